//! Exact traveling wave in a uniform medium: split-step error against the
//! closed form and conserved quantities.
//!
//! cargo run --release -p nls-core --example free_soliton -- [m] [dt]

use nls_core::grid::Grid;
use nls_core::potential::PotentialSpec;
use nls_core::soliton::{traveling_wave, SolitonParams};
use nls_core::solver::{evolve, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let m = args.first().copied().unwrap_or(3.0);
    let dt = args.get(1).copied().unwrap_or(1e-3);
    let t = 10.0;

    let grid = Grid::new(2048, 200.0, 1)?;
    let p = SolitonParams::new(m, 1.0, 1.0, -5.0);
    let u0 = traveling_wave(&p, &grid, 0.0)?;
    let exact = traveling_wave(&p, &grid, t)?;
    let cfg = SolverConfig::new(m, PotentialSpec::uniform(1.0), dt, 0.0, t).with_stride(1000);

    for (label, cfg) in [("dt", cfg), ("2dt", SolverConfig { dt: 2.0 * dt, ..cfg })] {
        let run = evolve(&u0, &cfg)?;
        println!(
            "{label:>4}: sup error {:.3e}  mass drift {:.2e}  energy drift {:.2e}  steps {}",
            run.field.sup_distance(&exact)?,
            run.diagnostics.mass_drift(),
            run.diagnostics.energy_drift(),
            run.steps
        );
    }
    Ok(())
}
