//! Petviashvili ground states in 2D with their Pohozaev defect and κ.

use nls_core::grid::Grid;
use nls_core::soliton::ground_state_2d_scaled;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(256, 40.0, 2)?;
    println!("   m     c   iterations   residual     kappa     pohozaev   symmetry");
    for m in [2.0, 2.5] {
        for c in [1.0, 2.0] {
            let g = ground_state_2d_scaled(m, c, &grid, 1e-10, 4000)?;
            let pz = if c == 1.0 { format!("{:.2e}", g.pohozaev_defect()) } else { "-".into() };
            println!(
                "{m:4.1} {c:5.1} {:12} {:10.2e} {:9.6} {pz:>10} {:10.2e}",
                g.iterations,
                g.residual,
                g.kappa(),
                g.symmetry_defect()
            );
        }
    }
    Ok(())
}
