//! Soliton crossing a smooth step up (1 -> 2), compared with the predicted
//! asymptotic state. Bundle written to the directory given as first argument.
//!
//! cargo run --release -p nls-lab --example transmission -- out/transmission 0.05

use std::path::PathBuf;

use nls_lab::config::{PotentialConfig, PotentialDirection};
use nls_lab::{run_scenario, Horizon, Scenario, ScenarioKind};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from);
    let eps: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.1);

    let mut s = Scenario::new("transmission", ScenarioKind::Interaction1D);
    s.v0 = Some(1.0);
    s.epsilon = Some(eps);
    s.horizon = Horizon::Flat;
    s.potential = PotentialConfig { direction: PotentialDirection::Increasing, a_minus: 1.0, a_plus: 2.0, steepness: 1.0 };
    s.output.dir = out;
    let r = run_scenario(&s)?;
    for c in &r.checks {
        println!("{:<20} {:>11.3e} {}", c.name, c.value, if c.passed { "ok" } else { "FAIL" });
    }
    let sum = &r.summary;
    println!("final c {} (limit {}), final v {} (limit {})", sum["final_c"], sum["c_inf"], sum["final_v"], sum["v_inf"]);
    Ok(())
}
