//! H¹ residual of the corrected ansatz at the transition center against ε,
//! with the fitted log-log slope, for m = 2 and m = 3.

use nls_lab::scenario::residual_scaling;
use nls_lab::{Scenario, ScenarioKind};

fn main() -> anyhow::Result<()> {
    for m in [2.0, 3.0] {
        let mut s = Scenario::new("residual", ScenarioKind::ResidualScaling);
        s.m = m;
        s.v0 = Some(1.0);
        s.epsilons = vec![0.2, 0.1, 0.05, 0.025];
        let out = residual_scaling(&s, None)?;
        let sum = &out.summary;
        println!("m = {m}");
        for (e, r) in sum.epsilons.iter().zip(&sum.residuals) {
            println!("  eps {e:6.3}  residual {r:.4e}");
        }
        println!("  slope {:.3} ± {:.3} (expected {})", sum.fit.slope, sum.fit.stderr, sum.expected_slope);
    }
    Ok(())
}
