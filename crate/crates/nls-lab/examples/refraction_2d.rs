//! Refraction of a 2D soliton at a step in x1: outgoing angle from the
//! conserved transverse velocity, plus ground-state and Galilean-boost checks.

use nls_core::effective::refraction_angles;
use nls_core::grid::Grid;
use nls_core::potential::PotentialSpec;
use nls_core::soliton::ground_state_2d;
use nls_lab::{run_scenario, Scenario, ScenarioKind};

fn main() -> anyhow::Result<()> {
    let m = 2.0;
    let kappa = ground_state_2d(m, &Grid::new(256, 40.0, 2)?)?.kappa();
    let pot = PotentialSpec::increasing(0.1);
    println!("kappa = {kappa:.8}");
    println!("  v_in            theta_-   theta_+   v_out");
    for v_in in [[1.0, 0.0], [1.0, 0.4], [1.0, 0.8], [0.5, 1.0]] {
        let r = refraction_angles(v_in, m, &pot, kappa)?;
        println!(
            "  [{:.1}, {:.1}]  {:9.5} {:9.5}   [{:.5}, {:.5}]",
            v_in[0], v_in[1], r.theta_minus, r.theta_plus, r.v_out[0], r.v_out[1]
        );
    }

    let mut s = Scenario::new("refraction", ScenarioKind::Refraction2D);
    s.m = m;
    s.v_in = Some([1.0, 0.8]);
    s.epsilon = Some(0.1);
    let r = run_scenario(&s)?;
    for c in &r.checks {
        println!("{} {:<24} {:.3e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    Ok(())
}
