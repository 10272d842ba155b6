//! First- and second-order correction profiles for m = 3 and the residual of
//! the corrected ansatz at the center of the transition for decreasing ε.

use nls_core::grid::Grid;
use nls_core::potential::PotentialSpec;
use nls_core::profiles::{center_state, residual_norm, CorrectionProfiles};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 3.0;
    let p = CorrectionProfiles::build(m)?;
    let k = p.constants;
    println!("m = {m}: chi {:.6}  xi {:.6}  order {}", k.chi, k.xi, p.order);
    println!("alphas {:?}", k.alphas);
    println!("betas  {:?}", k.betas);

    let grid = Grid::new(1024, 60.0, 1)?;
    println!("   eps      order 0      order 1      order 2");
    for eps in [0.1, 0.05, 0.025] {
        let s = center_state(m, 1.0, PotentialSpec::increasing(eps));
        let r: Vec<f64> = (0..=p.order).map(|o| residual_norm(&s, &p, &grid, o)).collect::<Result<_, _>>()?;
        println!("{eps:6.3} {}", r.iter().map(|x| format!("{x:12.4e}")).collect::<String>());
    }
    Ok(())
}
