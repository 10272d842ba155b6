//! Kernel and eigenvalue checks for the linearized operators around Q_c.

use nls_core::grid::Grid;
use nls_core::linearized::{negative_eigenvalue, spectral_checks};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(4096, 120.0, 1)?;
    println!("  m    c   |L+Q'|     |L-Q|     |L+ΛQ+Q|   lambda_m  closed form");
    for m in [2.0, 3.0, 4.0] {
        for c in [0.5, 1.0, 4.0] {
            let r = spectral_checks(m, c, &grid)?;
            println!(
                "{m:3.0} {c:4.1} {:9.2e} {:9.2e} {:9.2e} {:10.6} {:10.6}",
                r.kernel_plus,
                r.kernel_minus,
                r.lambda_identity,
                r.lambda_m(),
                negative_eigenvalue(m, c)
            );
        }
    }
    Ok(())
}
