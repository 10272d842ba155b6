use nls_core::grid::{spectral_derivative, spectral_laplacian, ComplexField, FftPlan, Grid, RealField};
use nls_core::linearized::{LinearizedOperator, Sign};
use nls_core::modulation::fit_modulation;
use nls_core::potential::PotentialSpec;
use nls_core::soliton::{traveling_wave, SolitonParams};
use nls_core::solver::{step_strang, observables, SolverConfig};
use nls_core::C64;
use proptest::prelude::*;

fn bump(grid: &Grid, a: f64, s: f64, k: f64) -> ComplexField {
    ComplexField::from_fn(grid, |x| C64::from_polar(a * (-(x - s).powi(2) / 8.0).exp(), k * x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivative_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64, s in -5.0..5.0f64) {
        let g = Grid::new(256, 60.0, 1).unwrap();
        let f = bump(&g, 1.0, s, 0.3);
        let h = bump(&g, 0.5, -s, -0.7);
        let mut comb = f.clone();
        comb.scale(C64::new(a, 0.0));
        comb.axpy(C64::new(b, 0.0), &h).unwrap();
        let lhs = spectral_laplacian(&comb);
        let mut rhs = spectral_laplacian(&f);
        rhs.scale(C64::new(a, 0.0));
        rhs.axpy(C64::new(b, 0.0), &spectral_laplacian(&h)).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-11);
    }

    #[test]
    fn parseval(s in -5.0..5.0f64, k in -2.0..2.0f64) {
        let g = Grid::new(128, 40.0, 1).unwrap();
        let f = bump(&g, 1.3, s, k);
        let mut spec = f.values.clone();
        FftPlan::new(&g).forward(&mut spec);
        let phys: f64 = f.values.iter().map(|z| z.norm_sqr()).sum();
        let freq: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / g.n() as f64;
        prop_assert!((phys - freq).abs() < 1e-10 * phys);
    }

    #[test]
    fn linearized_self_adjoint(m in 2.0..4.5f64, c in 0.5..2.0f64, s in -3.0..3.0f64) {
        let g = Grid::new(256, 60.0, 1).unwrap();
        let w = RealField::from_fn(&g, |x| (-(x - s).powi(2) / 4.0).exp());
        let z = RealField::from_fn(&g, |x| x * (-(x + s).powi(2) / 6.0).exp());
        for sign in [Sign::Plus, Sign::Minus] {
            let op = LinearizedOperator::new(sign, m, c, &g).unwrap();
            let a = op.apply(&w).unwrap().dot(&z);
            let b = w.dot(&op.apply(&z).unwrap());
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn operators_preserve_parity(m in 2.0..4.5f64, c in 0.5..2.0f64) {
        let g = Grid::new(256, 60.0, 1).unwrap();
        let even = RealField::from_fn(&g, |x| (-x * x / 5.0).exp());
        let odd = RealField::from_fn(&g, |x| x * (-x * x / 5.0).exp());
        let op = LinearizedOperator::new(Sign::Plus, m, c, &g).unwrap();
        let le = op.apply(&even).unwrap();
        let lo = op.apply(&odd).unwrap();
        prop_assert!(le.odd_part().sup_norm() < 1e-10 * le.sup_norm());
        prop_assert!(lo.even_part().sup_norm() < 1e-10 * lo.sup_norm());
    }

    #[test]
    fn strang_step_commutes_with_phase(theta in 0.0..std::f64::consts::TAU, m in 2.0..4.0f64) {
        let g = Grid::new(512, 80.0, 1).unwrap();
        let pot = PotentialSpec::increasing(0.05);
        let u = bump(&g, 1.0, -3.0, 0.5);
        let cfg = SolverConfig::new(m, pot, 1e-2, 0.0, 1e-2);
        let rot = C64::from_polar(1.0, theta);
        let mut ur = u.clone();
        ur.scale(rot);
        let a = step_strang(&ur, &cfg).unwrap();
        let mut b = step_strang(&u, &cfg).unwrap();
        b.scale(rot);
        prop_assert!(a.sup_distance(&b).unwrap() < 1e-12);
        let o0 = observables(&u, &pot, m);
        prop_assert!((observables(&a, &pot, m).mass - o0.mass).abs() < 1e-12 * o0.mass);
    }

    #[test]
    fn fit_is_equivariant(c in 0.7..1.6f64, v in -1.0..1.0f64, rho in -5.0..5.0f64, theta in -1.0..1.0f64) {
        let g = Grid::new(1024, 100.0, 1).unwrap();
        let pot = PotentialSpec::increasing(0.05);
        let mut p = SolitonParams::new(3.0, c, v, rho);
        p.amp = pot.at(rho).sqrt();
        let u = traveling_wave(&p, &g, 0.0).unwrap();
        let guess = SolitonParams { c: c * 1.03, rho: rho + 0.1, ..p };
        let base = fit_modulation(&u, &guess, &pot).unwrap();
        let mut ur = u.clone();
        ur.scale(C64::from_polar(1.0, theta));
        let rot = fit_modulation(&ur, &SolitonParams { gamma: guess.gamma + theta, ..guess }, &pot).unwrap();
        prop_assert!((rot.gamma - base.gamma - theta).abs() < 1e-9);
        prop_assert!((rot.c - base.c).abs() < 1e-9 && (rot.rho - base.rho).abs() < 1e-9);
        prop_assert!((base.c - c).abs() < 1e-9 && (base.v - v).abs() < 1e-9);
    }
}

#[test]
fn derivative_of_plane_wave() {
    let g = Grid::new(64, 2.0 * std::f64::consts::PI, 1).unwrap();
    let f = ComplexField::from_fn(&g, |x| C64::from_polar(1.0, 3.0 * x));
    let d = spectral_derivative(&f, 0);
    let mut want = f.clone();
    want.scale(C64::new(0.0, 3.0));
    assert!(d.sup_distance(&want).unwrap() < 1e-12);
}
