//! Interaction runs at several ε (in parallel, capped by NLS_LAB_THREADS) with
//! fitted rates for the modulation remainder and the ansatz residual.
//!
//! cargo run --release -p nls-lab --example convergence -- [out_dir]

use nls_lab::threads::init_threads;
use nls_lab::{run_scenario, Horizon, Scenario, ScenarioKind};

fn main() -> anyhow::Result<()> {
    println!("threads: {}", init_threads()?);
    let mut s = Scenario::new("converge", ScenarioKind::ConvergenceStudy);
    s.v0 = Some(1.0);
    s.epsilons = vec![0.4, 0.2, 0.1];
    s.horizon = Horizon::Flat;
    s.dt = 2e-3;
    s.output.dir = std::env::args().nth(1).map(Into::into);
    let r = run_scenario(&s)?;
    let sum = &r.summary;
    println!("epsilons       {}", sum["epsilons"]);
    println!("max remainder  {}", sum["max_remainder"]);
    println!("residuals      {}", sum["residuals"]);
    println!("remainder slope {:.3} (asymptotic rate {})", sum["remainder_fit"]["slope"].as_f64().unwrap_or(f64::NAN), sum["remainder_target"]);
    println!("residual slope  {:.3} (expected {})", sum["residual_fit"]["slope"].as_f64().unwrap_or(f64::NAN), sum["expected_residual_slope"]);
    for c in &r.checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(())
}
