//! Numerical cross-checks of the correction profiles against independent solves.

use crate::error::Result;
use crate::grid::{Grid, RealField};
use crate::linearized::{LinearizedOperator, Sign};
use crate::potential::PotentialSpec;
use crate::profiles::{
    first_order_profiles, first_order_sources, second_order_profiles, second_order_sources, AnsatzState,
    CorrectionProfiles,
};
use crate::soliton::{lambda_q, soliton_derivative, soliton_profile};

/// Grid wide enough that the polynomially weighted first-order tails fit.
pub fn check_grid() -> Result<Grid> {
    Grid::new(2048, 90.0, 1)
}

/// A state inside the transition region with nonzero `a'`, `a''`.
pub fn check_state(m: f64, c: f64) -> AnsatzState {
    AnsatzState::new(m, c, 1.3, 3.0, 0.2, PotentialSpec::increasing(0.05))
}

#[derive(Clone, Copy, Debug)]
pub struct FirstOrderCheck {
    pub m: f64,
    pub c: f64,
    /// `|A₁(MINRES) - A₁(closed form)|∞`.
    pub a1_error: f64,
    pub b1_error: f64,
    /// Largest of `|<A₁,Q_c>|, |<A₁,Q_c'>|, |<B₁,Q_c>|, |<B₁,Q_c'>|`.
    pub orthogonality: f64,
}

impl FirstOrderCheck {
    pub fn sup_error(&self) -> f64 {
        self.a1_error.max(self.b1_error)
    }
}

pub fn verify_first_order(state: &AnsatzState, grid: &Grid) -> Result<FirstOrderCheck> {
    let (m, c) = (state.m, state.c);
    let (f1, g1) = first_order_sources(state, grid);
    let closed = first_order_profiles(state, grid)?;
    let lp = LinearizedOperator::new(Sign::Plus, m, c, grid)?;
    let lm = LinearizedOperator::new(Sign::Minus, m, c, grid)?;
    let a1 = lp.solve_constrained(&f1, &lp.kernel())?;
    let b1 = lm.solve_constrained(&g1, &lm.kernel())?;
    let qc = lm.kernel();
    let qp = lp.kernel();
    let orthogonality = [&closed.a1, &closed.b1]
        .iter()
        .flat_map(|f| [f.dot(&qc).abs(), f.dot(&qp).abs()])
        .fold(0.0, f64::max);
    Ok(FirstOrderCheck {
        m,
        c,
        a1_error: a1.sup_distance(&closed.a1)?,
        b1_error: b1.sup_distance(&closed.b1)?,
        orthogonality,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SecondOrderCheck {
    pub m: f64,
    /// `|<F̃₂, ΛQ_c>|` and `|<G̃₂, yQ_c>|` after the counterterms.
    pub projections: [f64; 2],
    /// `|odd(A₂)|∞ + |even(B₂)|∞`.
    pub parity: f64,
    /// Largest inner product of `A₂`, `B₂` with `Q_c`, `Q_c'`.
    pub orthogonality: f64,
    pub alphas: [f64; 4],
    pub betas: [f64; 2],
}

impl SecondOrderCheck {
    pub fn signs_ok(&self) -> bool {
        self.alphas[0] > 0.0 && self.alphas[1] < 0.0 && self.betas[0] > 0.0
    }
}

pub fn verify_second_order(profiles: &CorrectionProfiles, state: &AnsatzState, grid: &Grid) -> Result<SecondOrderCheck> {
    let (m, c) = (state.m, state.c);
    let src = second_order_sources(state, profiles, grid)?;
    let lq = RealField::from_fn(grid, |y| lambda_q(m, c, y));
    let yq = RealField::from_fn(grid, |y| y * soliton_profile(m, c, y));
    let (a2, b2) = second_order_profiles(state, profiles, grid)?;
    let qc = RealField::from_fn(grid, |y| soliton_profile(m, c, y));
    let qp = RealField::from_fn(grid, |y| soliton_derivative(m, c, y));
    let orthogonality = [&a2, &b2]
        .iter()
        .flat_map(|f| [f.dot(&qc).abs(), f.dot(&qp).abs()])
        .fold(0.0, f64::max);
    Ok(SecondOrderCheck {
        m,
        projections: [src.f2.dot(&lq).abs(), src.g2.dot(&yq).abs()],
        parity: a2.odd_part().sup_norm() + b2.even_part().sup_norm(),
        orthogonality,
        alphas: src.alphas,
        betas: src.betas,
    })
}
