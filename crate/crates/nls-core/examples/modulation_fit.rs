//! Recover soliton parameters from a perturbed field with the orthogonality
//! conditions, starting from a rough guess.

use nls_core::grid::Grid;
use nls_core::modulation::{fit_with, reference_distance, FitOptions};
use nls_core::potential::PotentialSpec;
use nls_core::soliton::{traveling_wave, SolitonParams};
use num_complex::Complex64 as C64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(1024, 80.0, 1)?;
    let pot = PotentialSpec::increasing(0.05);
    let mut truth = SolitonParams::new(3.0, 1.3, 0.7, 2.5);
    truth.gamma = 0.4;
    truth.amp = pot.at(truth.rho).powf(0.5);

    let mut u = traveling_wave(&truth, &grid, 0.0)?;
    // small even bump that the fit should leave in the remainder
    for (z, x) in u.values.iter_mut().zip(grid.coords()) {
        *z += C64::new(1e-3 * (-(x - 2.5f64).powi(2)).exp(), 0.0);
    }

    let mut guess = truth;
    guess.c *= 1.05;
    guess.v += 0.05;
    guess.rho -= 0.2;
    guess.gamma -= 0.05;
    let fit = fit_with(&u, &guess, &pot, FitOptions::default())?;
    let q = fit.params;
    println!("          c         v         rho       gamma");
    println!("truth  {:9.6} {:9.6} {:9.6} {:9.6}", truth.c, truth.v, truth.rho, truth.gamma);
    println!("guess  {:9.6} {:9.6} {:9.6} {:9.6}", guess.c, guess.v, guess.rho, guess.gamma);
    println!("fit    {:9.6} {:9.6} {:9.6} {:9.6}", q.c, q.v, q.rho, q.gamma);
    println!("newton iterations {}, projection residual {:.2e}", fit.iterations, fit.residual);
    println!("remainder H1 {:.3e}", reference_distance(&u, &q)?);
    Ok(())
}
