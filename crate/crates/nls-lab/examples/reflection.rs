//! Soliton sent into a step down (1 -> 0.5) below the transmission threshold.
//! The scenario is read from TOML; an optional argument sets the bundle directory.

use nls_lab::{run_scenario, Scenario};

const CONFIG: &str = r#"
name = "reflection"
kind = "reflection1d"
m = 3.0
v0 = 0.8
epsilon = 0.1
horizon = "flat"

[potential]
direction = "decreasing"
a_minus = 1.0
a_plus = 0.5
"#;

fn main() -> anyhow::Result<()> {
    let mut s = Scenario::from_toml(CONFIG)?;
    s.output.dir = std::env::args().nth(1).map(Into::into);
    let r = run_scenario(&s)?;
    let sum = &r.summary;
    println!("outcome {}, window [{:.1}, {:.1}], grid {} x {}", sum["outcome"], sum["t0"], sum["t1"], sum["n"], sum["length"]);
    println!("turning points {}, C at turn {} (predicted {})", sum["turning_points"], sum["c_turn_ode"], sum["c_turn_predicted"]);
    println!("final v {} vs {}", sum["final_v"], sum["v_inf"]);
    println!("passed: {}", r.passed);
    Ok(())
}
