//! Identity and operator suites for a list of exponents, as run by
//! `nls-lab verify-identities` and `nls-lab verify-operators`.

use nls_lab::scenario::{identity_suite, operator_suite};

fn main() -> anyhow::Result<()> {
    for m in [2.0, 3.0, 4.0] {
        let ids = identity_suite(m, None)?;
        println!("m = {m}: profile residual {:.2e}", ids.summary.profile_residual);
        for row in &ids.summary.identities {
            println!("  {:<40} {:>14.8} {:>14.8} {:9.1e}", row.name, row.lhs, row.rhs, row.rel_error);
        }
        let ops = operator_suite(m, None)?;
        let failed: Vec<_> = ops.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        println!("  operator checks: {} run, failing {:?}", ops.checks.len(), failed);
        if let Some(s2) = &ops.summary.second_order {
            println!("  alphas {:?}\n  betas {:?}", s2.alphas, s2.betas);
        }
    }
    Ok(())
}
