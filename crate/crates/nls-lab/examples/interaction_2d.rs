//! Full 2D run of a soliton crossing a step with a transverse drift. Slow:
//! a 256² grid over the whole flat-to-flat window.
//!
//! cargo run --release -p nls-lab --example interaction_2d -- [out_dir]

use nls_lab::{run_scenario, Horizon, Scenario, ScenarioKind};

fn main() -> anyhow::Result<()> {
    let mut s = Scenario::new("interaction2d", ScenarioKind::Interaction2D);
    s.m = 2.0;
    s.v_in = Some([1.0, 0.3]);
    s.epsilon = Some(0.2);
    s.horizon = Horizon::Flat;
    s.dt = 2e-3;
    s.stride = 50;
    s.output.dir = std::env::args().nth(1).map(Into::into);
    let r = run_scenario(&s)?;
    let sum = &r.summary;
    println!("kappa {}, grid {} x {}", sum["kappa"], sum["n"], sum["length"]);
    println!("final c {} (limit {}), final v {} (limit v1 {})", sum["final_c"], sum["c_inf"], sum["final_v"], sum["v_inf"]);
    for c in &r.checks {
        println!("{} {:<14} {:.3e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    if let Some(f) = &r.failure {
        println!("failure: {f}");
    }
    Ok(())
}
