//! Linearized operators around `Q_c` and their constrained inversion.
//!
//! ```text
//! L+ w = -w'' + c w - m Q_c^{m-1} w      kernel Q_c'
//! L- w = -w'' + c w -   Q_c^{m-1} w      kernel Q_c
//! ```
//!
//! `L+` has one negative eigenvalue, so the inversion uses preconditioned
//! MINRES on the kernel-deflated operator `L + σ k kᵀ/|k|²` rather than CG.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;

use crate::error::{NlsError, Result};
use crate::grid::{FftPlan, Grid, RealField};
use crate::soliton::{check_exponent, lambda_q, soliton_derivative, soliton_profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone)]
pub struct LinearizedOperator {
    pub sign: Sign,
    pub m: f64,
    pub c: f64,
    grid: Grid,
    well: Vec<f64>,
    k2: Vec<f64>,
    plan: FftPlan,
}

/// Relative residual and iteration budget for [`LinearizedOperator::solve_constrained`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub orthogonality_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: None, orthogonality_tol: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: RealField,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearizedOperator {
    pub fn new(sign: Sign, m: f64, c: f64, grid: &Grid) -> Result<Self> {
        check_exponent(m, 1)?;
        if grid.dim() != 1 {
            return Err(NlsError::InvalidParameter("linearized operators are 1D".into()));
        }
        if !(c > 0.0) {
            return Err(NlsError::InvalidParameter(format!("c must be positive, got {c}")));
        }
        let coef = match sign {
            Sign::Plus => m,
            Sign::Minus => 1.0,
        };
        let well = grid.coords().iter().map(|&y| coef * soliton_profile(m, c, y).powf(m - 1.0)).collect();
        let k2 = grid.wavenumbers().iter().map(|k| k * k).collect();
        Ok(LinearizedOperator { sign, m, c, grid: grid.clone(), well, k2, plan: FftPlan::new(grid) })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `Q_c'` for `L+`, `Q_c` for `L-`.
    pub fn kernel(&self) -> RealField {
        let (m, c) = (self.m, self.c);
        match self.sign {
            Sign::Plus => RealField::from_fn(&self.grid, |y| soliton_derivative(m, c, y)),
            Sign::Minus => RealField::from_fn(&self.grid, |y| soliton_profile(m, c, y)),
        }
    }

    fn spectral(&self, w: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut buf: Vec<C64> = w.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.plan.forward(&mut buf);
        buf.iter_mut().zip(&self.k2).for_each(|(z, &k2)| *z *= symbol(k2));
        self.plan.inverse(&mut buf);
        buf.iter().map(|z| z.re).collect()
    }

    fn apply_raw(&self, w: &[f64]) -> Vec<f64> {
        let c = self.c;
        let mut out = self.spectral(w, |k2| k2 + c);
        out.iter_mut().zip(w).zip(&self.well).for_each(|((o, &wi), &p)| *o -= p * wi);
        out
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let c = self.c;
        self.spectral(r, |k2| 1.0 / (k2 + c))
    }

    pub fn apply(&self, w: &RealField) -> Result<RealField> {
        self.grid.ensure_same(&w.grid)?;
        RealField::new(self.grid.clone(), self.apply_raw(&w.values))
    }

    /// Solve `L h = source` with `∫ h · orthogonal_to = 0`.
    pub fn solve_constrained(&self, source: &RealField, orthogonal_to: &RealField) -> Result<RealField> {
        Ok(self.solve_with(source, orthogonal_to, SolveOptions::default())?.field)
    }

    pub fn solve_with(
        &self,
        source: &RealField,
        orthogonal_to: &RealField,
        opts: SolveOptions,
    ) -> Result<Solution> {
        self.grid.ensure_same(&source.grid)?;
        self.grid.ensure_same(&orthogonal_to.grid)?;
        let b = &source.values;
        let k = &orthogonal_to.values;
        let kk = dot(k, k);
        let bb = dot(b, b).sqrt();
        if bb == 0.0 {
            return Ok(Solution { field: RealField::zeros(&self.grid), iterations: 0, relative_residual: 0.0 });
        }
        let proj = dot(b, k) / (bb * kk.sqrt());
        if proj.abs() > opts.orthogonality_tol {
            return Err(NlsError::IncompatibleSource { projection: proj.abs(), tolerance: opts.orthogonality_tol });
        }
        // remove the (tiny) admissible kernel component so the deflated system is consistent
        let b: Vec<f64> = b.iter().zip(k).map(|(bi, ki)| bi - dot(b, k) / kk * ki).collect();

        let sigma = self.c;
        let op = |x: &[f64]| {
            let mut y = self.apply_raw(x);
            let s = sigma * dot(k, x) / kk;
            y.iter_mut().zip(k).for_each(|(yi, ki)| *yi += s * ki);
            y
        };
        let max_iter = opts.max_iter.unwrap_or(10 * self.grid.n());
        let (mut x, iterations, rel) = minres(&op, &|r| self.precondition(r), &b, opts.tol, max_iter)?;

        let s = dot(&x, k) / kk;
        x.iter_mut().zip(k).for_each(|(xi, ki)| *xi -= s * ki);
        Ok(Solution { field: RealField::new(self.grid.clone(), x)?, iterations, relative_residual: rel })
    }
}

/// Preconditioned MINRES for a symmetric (possibly indefinite) operator with
/// an SPD preconditioner. Returns `(x, iterations, |b - Ax|/|b|)`.
pub fn minres(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    precond: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    let true_residual = |x: &[f64]| {
        let ax = op(x);
        ax.iter().zip(b).map(|(a, bi)| (bi - a).powi(2)).sum::<f64>().sqrt() / bnorm
    };

    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = precond(&r1);
    let beta1 = dot(&r1, &y).sqrt();
    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut last = f64::INFINITY;

    for itn in 1..=max_iter {
        let s = 1.0 / beta;
        let v: Vec<f64> = y.iter().map(|yi| s * yi).collect();
        y = op(&v);
        if itn >= 2 {
            let f = beta / oldb;
            y.iter_mut().zip(&r1).for_each(|(yi, ri)| *yi -= f * ri);
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        y.iter_mut().zip(&r2).for_each(|(yi, ri)| *yi -= f * ri);
        r1 = std::mem::replace(&mut r2, y);
        y = precond(&r2);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let denom = 1.0 / gamma;
        let w1 = std::mem::replace(&mut w2, w);
        w = v
            .iter()
            .zip(&w1)
            .zip(&w2)
            .map(|((vi, a), b2)| (vi - oldeps * a - delta * b2) * denom)
            .collect();
        x.iter_mut().zip(&w).for_each(|(xi, wi)| *xi += phi * wi);

        if phibar / beta1 < 0.1 * tol || beta == 0.0 || itn % 25 == 0 {
            last = true_residual(&x);
            if last < tol {
                return Ok((x, itn, last));
            }
        }
    }
    Err(NlsError::NoConvergence { iterations: max_iter, residual: last.min(true_residual(&x)) })
}

#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub m: f64,
    pub c: f64,
    /// `|L+ Q_c'|∞`.
    pub kernel_plus: f64,
    /// `|L- Q_c|∞`.
    pub kernel_minus: f64,
    /// `|L+ ΛQ_c + Q_c|∞`.
    pub lambda_identity: f64,
    /// Rayleigh quotient of `Q_c^{(m+1)/2}` under `L+`.
    pub rayleigh: f64,
    /// `|L+ φ - rayleigh·φ|∞ / |φ|∞` for `φ = Q_c^{(m+1)/2}`.
    pub eigen_residual: f64,
    /// Minimum of `<L+ w, w>/<w, w>` over `w ⊥ Q_c, Q_c'` (informational).
    pub constrained_min: f64,
}

impl SpectralReport {
    /// The negative eigenvalue magnitude `λ_m` estimated from the Rayleigh quotient.
    pub fn lambda_m(&self) -> f64 {
        -self.rayleigh
    }
}

/// Kernel, scaling and eigenvalue sanity checks for `L±` around `Q_c`.
pub fn spectral_checks(m: f64, c: f64, grid: &Grid) -> Result<SpectralReport> {
    let lp = LinearizedOperator::new(Sign::Plus, m, c, grid)?;
    let lm = LinearizedOperator::new(Sign::Minus, m, c, grid)?;
    let qc = lm.kernel();
    let dq = lp.kernel();
    let kernel_plus = lp.apply(&dq)?.sup_norm();
    let kernel_minus = lm.apply(&qc)?.sup_norm();
    let lq = RealField::from_fn(grid, |y| lambda_q(m, c, y));
    let lambda_identity = lp.apply(&lq)?.zip_with(&qc, |a, b| a + b)?.sup_norm();

    let phi = qc.map(|q| q.powf(0.5 * (m + 1.0)));
    let lphi = lp.apply(&phi)?;
    let rayleigh = lphi.dot(&phi) / phi.dot(&phi);
    let eigen_residual = lphi.zip_with(&phi, |a, b| a - rayleigh * b)?.sup_norm() / phi.sup_norm();

    let constrained_min = constrained_min_rayleigh(&lp, &[qc.clone(), dq.clone()], 400)?;
    Ok(SpectralReport { m, c, kernel_plus, kernel_minus, lambda_identity, rayleigh, eigen_residual, constrained_min })
}

/// `λ_m = c (m+3)(m-1)/4`, the magnitude of the negative eigenvalue of `L+`.
pub fn negative_eigenvalue(m: f64, c: f64) -> f64 {
    c * (m + 3.0) * (m - 1.0) / 4.0
}

fn project_out(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let s = dot(x, b) / dot(b, b);
        x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= s * bi);
    }
}

/// Preconditioned steepest descent on the Rayleigh quotient restricted to the
/// orthogonal complement of `constraints`.
fn constrained_min_rayleigh(op: &LinearizedOperator, constraints: &[RealField], iters: usize) -> Result<f64> {
    // Gram-Schmidt the constraint directions
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for cf in constraints {
        let mut v = cf.values.clone();
        project_out(&mut v, &basis);
        basis.push(v);
    }
    let grid = op.grid();
    let mut x: Vec<f64> = grid.coords().iter().map(|&y| (-0.1 * y * y).exp() * (1.0 + 0.3 * y)).collect();
    project_out(&mut x, &basis);
    let norm = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let mut rq = dot(&op.apply_raw(&x), &x);
    for _ in 0..iters {
        let ax = op.apply_raw(&x);
        rq = dot(&ax, &x);
        let r: Vec<f64> = ax.iter().zip(&x).map(|(a, xi)| a - rq * xi).collect();
        let mut p = op.precondition(&r);
        project_out(&mut p, &basis);
        let pn = dot(&p, &p).sqrt();
        if pn < 1e-14 {
            break;
        }
        p.iter_mut().for_each(|v| *v /= pn);
        // Rayleigh-Ritz on span{x, p}
        let ap = op.apply_raw(&p);
        let xp = dot(&x, &p);
        let a = Matrix2::new(rq, dot(&ax, &p), dot(&ap, &x), dot(&ap, &p));
        let a = 0.5 * (a + a.transpose());
        let b = Matrix2::new(1.0, xp, xp, 1.0);
        let Some(chol) = b.cholesky() else { break };
        let linv = chol.l().try_inverse().unwrap_or_else(Matrix2::identity);
        let reduced = linv * a * linv.transpose();
        let eig = reduced.symmetric_eigen();
        let idx = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
        let coeff: Vector2<f64> = linv.transpose() * eig.eigenvectors.column(idx);
        let mut next: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| coeff[0] * xi + coeff[1] * pi).collect();
        project_out(&mut next, &basis);
        let nn = dot(&next, &next).sqrt();
        next.iter_mut().for_each(|v| *v /= nn);
        x = next;
    }
    Ok(rq.min(dot(&op.apply_raw(&x), &x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid {
        Grid::new(1024, 60.0, 1).unwrap()
    }

    #[test]
    fn kernels_and_scaling_identity() {
        let g = grid();
        for &(m, c) in &[(2.0, 1.0), (3.0, 1.0), (3.0, 4.0), (4.0, 1.0)] {
            let rep = spectral_checks(m, c, &g).unwrap();
            assert!(rep.kernel_plus < 1e-9, "{rep:?}");
            assert!(rep.kernel_minus < 1e-9, "{rep:?}");
            assert!(rep.lambda_identity < 1e-8, "{rep:?}");
        }
    }

    #[test]
    fn cubic_negative_eigenvalue_is_three() {
        let rep = spectral_checks(3.0, 1.0, &grid()).unwrap();
        assert_abs_diff_eq!(rep.lambda_m(), 3.0, epsilon = 1e-6);
        assert!(rep.eigen_residual < 1e-8);
        assert!(rep.constrained_min > 0.0);
    }

    #[test]
    fn quadratic_negative_eigenvalue_sign() {
        let rep = spectral_checks(2.0, 1.0, &grid()).unwrap();
        assert!(rep.rayleigh < 0.0);
        assert_abs_diff_eq!(rep.lambda_m(), negative_eigenvalue(2.0, 1.0), epsilon = 1e-8);
    }

    #[test]
    fn inverts_to_lambda_q_and_yq() {
        let g = grid();
        for &(m, c) in &[(2.0, 1.0), (3.0, 2.0), (4.5, 0.7)] {
            let lp = LinearizedOperator::new(Sign::Plus, m, c, &g).unwrap();
            let q = RealField::from_fn(&g, |y| -soliton_profile(m, c, y));
            let h = lp.solve_constrained(&q, &lp.kernel()).unwrap();
            let expect = RealField::from_fn(&g, |y| lambda_q(m, c, y));
            assert!(h.sup_distance(&expect).unwrap() < 1e-7);

            let lm = LinearizedOperator::new(Sign::Minus, m, c, &g).unwrap();
            let src = RealField::from_fn(&g, |y| -2.0 * soliton_derivative(m, c, y));
            let h = lm.solve_constrained(&src, &lm.kernel()).unwrap();
            let expect = RealField::from_fn(&g, |y| y * soliton_profile(m, c, y));
            assert!(h.sup_distance(&expect).unwrap() < 1e-7);
        }
    }

    #[test]
    fn rejects_incompatible_source() {
        let g = grid();
        let lm = LinearizedOperator::new(Sign::Minus, 3.0, 1.0, &g).unwrap();
        let src = lm.kernel();
        assert!(matches!(lm.solve_constrained(&src, &lm.kernel()), Err(NlsError::IncompatibleSource { .. })));
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let lp = LinearizedOperator::new(Sign::Plus, 3.0, 1.0, &grid()).unwrap();
        let other = RealField::zeros(&Grid::new(512, 60.0, 1).unwrap());
        assert!(lp.apply(&other).is_err());
    }
}
