//! Modulation fit: recover `(c, v, ρ, γ)` from a 1D field through the
//! orthogonality conditions
//!
//! ```text
//! ∫ ζ Q_c(y) = ∫ ζ Q_c'(y) = 0,   ζ = u e^{-iΘ} - Q_c(y)/ã(ερ),   Θ = γ + v x/2
//! ```
//!
//! Fitted parameters describe the field at the snapshot instant, so
//! `traveling_wave(p, grid, 0)` is the reference soliton.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{NlsError, Result};
use crate::grid::ComplexField;
use crate::potential::PotentialSpec;
use crate::profiles::{assemble_approximate_solution, AnsatzState, CorrectionProfiles};
use crate::soliton::{lambda_q, lambda_q_derivative, soliton_derivative, soliton_profile, soliton_second, SolitonParams};

pub const MAX_NEWTON_ITERATIONS: usize = 50;
/// Relative distance `‖u - R̃‖/‖R̃‖` beyond which a guess is rejected.
pub const BASIN_RADIUS: f64 = 0.3;

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Converged once the largest projection is below `tol · ‖u‖`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tol: 1e-10, max_iter: MAX_NEWTON_ITERATIONS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub params: SolitonParams,
    /// Largest projection divided by `‖u‖`.
    pub residual: f64,
    pub iterations: usize,
}

fn amp_of(pot: &PotentialSpec, m: f64, rho: f64) -> f64 {
    pot.at(rho).powf(1.0 / (m - 1.0))
}

/// Unknowns `(c, v, ρ, γ̂)` with the local phase `γ̂ = γ + vρ/2`.
fn projections(u: &ComplexField, pot: &PotentialSpec, m: f64, x: &Vector4<f64>, jac: bool) -> (Vector4<f64>, Matrix4<f64>) {
    let (c, v, rho, gh) = (x[0], x[1], x[2], x[3]);
    let grid = &u.grid;
    let amp = amp_of(pot, m, rho);
    let r = pot.epsilon * rho;
    // ∂ρ(1/ã) = -(ε a'/((m-1) a)) / ã
    let damp = -pot.epsilon * pot.eval(r, 1) / ((m - 1.0) * pot.eval(r, 0));
    let mut g = [C64::new(0.0, 0.0); 2];
    let mut dg = [[C64::new(0.0, 0.0); 4]; 2];
    let i = C64::new(0.0, 1.0);
    for (j, z) in u.values.iter().enumerate() {
        let y = grid.x(j) - rho;
        let q = soliton_profile(m, c, y);
        let qp = soliton_derivative(m, c, y);
        if q.abs() < 1e-300 && qp.abs() < 1e-300 {
            continue;
        }
        let ue = z * C64::from_polar(1.0, -(gh + 0.5 * v * y));
        let zeta = ue - q / amp;
        let phi = [q, qp];
        for k in 0..2 {
            g[k] += zeta * phi[k];
        }
        if jac {
            let lq = lambda_q(m, c, y);
            let lqp = lambda_q_derivative(m, c, y);
            let qpp = soliton_second(m, c, y);
            let dzeta = [C64::from(-lq / amp), -i * 0.5 * y * ue, i * 0.5 * v * ue + qp / amp - q * damp / amp, -i * ue];
            let dphi = [[lq, 0.0, -qp, 0.0], [lqp, 0.0, -qpp, 0.0]];
            for k in 0..2 {
                for p in 0..4 {
                    dg[k][p] += dzeta[p] * phi[k] + zeta * dphi[k][p];
                }
            }
        }
    }
    let dx = grid.dx();
    let f = Vector4::new(g[0].re, g[0].im, g[1].re, g[1].im) * dx;
    let mut jm = Matrix4::zeros();
    if jac {
        for p in 0..4 {
            jm[(0, p)] = dg[0][p].re * dx;
            jm[(1, p)] = dg[0][p].im * dx;
            jm[(2, p)] = dg[1][p].re * dx;
            jm[(3, p)] = dg[1][p].im * dx;
        }
    }
    (f, jm)
}

fn reference(u: &ComplexField, p: &SolitonParams) -> ComplexField {
    let values = (0..u.grid.n())
        .map(|j| {
            let x = u.grid.x(j);
            C64::from_polar(soliton_profile(p.m, p.c, x - p.rho) / p.amp, p.gamma + 0.5 * p.v * x)
        })
        .collect();
    ComplexField { grid: u.grid.clone(), values }
}

/// `‖u - R̃(p)‖_{H¹}` with `R̃` the order-0 reference.
pub fn reference_distance(u: &ComplexField, p: &SolitonParams) -> Result<f64> {
    Ok(u.sub(&reference(u, p))?.h1_norm())
}

/// Newton fit of the four real orthogonality conditions, starting at `guess`.
pub fn fit_modulation(u: &ComplexField, guess: &SolitonParams, pot: &PotentialSpec) -> Result<SolitonParams> {
    Ok(fit_with(u, guess, pot, FitOptions::default())?.params)
}

pub fn fit_with(u: &ComplexField, guess: &SolitonParams, pot: &PotentialSpec, opts: FitOptions) -> Result<Fit> {
    if u.grid.dim() != 1 {
        return Err(NlsError::InvalidParameter("modulation fit expects a 1D field".into()));
    }
    guess.validate()?;
    let m = guess.m;
    let mut g0 = *guess;
    g0.amp = amp_of(pot, m, guess.rho);
    let r0 = reference(u, &g0);
    let dist = u.sub(&r0)?.l2_norm() / r0.l2_norm();
    if !(dist <= BASIN_RADIUS) {
        return Err(NlsError::LostLock {
            reason: format!("guess outside the basin: ‖u - R̃‖/‖R̃‖ = {dist:.3}"),
            residual: dist,
        });
    }
    let unorm = u.l2_norm();
    let mut x = Vector4::new(guess.c, guess.v, guess.rho, guess.gamma + 0.5 * guess.v * guess.rho);
    let (mut f, mut jac) = projections(u, pot, m, &x, true);
    let mut res = f.amax() / unorm;
    for it in 0..=opts.max_iter {
        if res < opts.tol {
            let params = SolitonParams {
                m,
                c: x[0],
                v: x[1],
                rho: x[2],
                gamma: x[3] - 0.5 * x[1] * x[2],
                amp: amp_of(pot, m, x[2]),
            };
            return Ok(Fit { params, residual: res, iterations: it });
        }
        if it == opts.max_iter {
            break;
        }
        let step = jac.lu().solve(&(-f)).ok_or_else(|| NlsError::LostLock {
            reason: "singular Jacobian".into(),
            residual: res,
        })?;
        let mut lambda = 1.0;
        loop {
            let trial = x + step * lambda;
            if trial[0] > 0.0 {
                let (ft, _) = projections(u, pot, m, &trial, false);
                let rt = ft.amax() / unorm;
                if rt.is_finite() && rt < res {
                    x = trial;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(NlsError::LostLock { reason: "damped Newton step stalled".into(), residual: res });
            }
        }
        (f, jac) = projections(u, pot, m, &x, true);
        res = f.amax() / unorm;
    }
    Err(NlsError::LostLock { reason: format!("no convergence in {} iterations", opts.max_iter), residual: res })
}

#[derive(Clone, Debug, Default)]
pub struct ModulationTrack {
    pub times: Vec<f64>,
    pub params: Vec<SolitonParams>,
    pub fit_residuals: Vec<f64>,
    /// `‖u - ũ‖_{H¹}` against the highest available ansatz order.
    pub remainder_h1: Vec<f64>,
    /// Ansatz order used for `remainder_h1`.
    pub remainder_order: u8,
    /// Time and reason of the first failed fit, if any.
    pub lost_lock: Option<(f64, String)>,
}

impl ModulationTrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SolitonParams> {
        self.params.last()
    }

    /// `dρ/dt` by centered differences at interior samples.
    pub fn rho_velocity(&self) -> Vec<(f64, f64)> {
        (1..self.len().saturating_sub(1))
            .map(|i| {
                let dt = self.times[i + 1] - self.times[i - 1];
                (self.times[i], (self.params[i + 1].rho - self.params[i - 1].rho) / dt)
            })
            .collect()
    }

    pub fn max_remainder(&self) -> f64 {
        self.remainder_h1.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// Sequential warm-started fitting.
pub struct Tracker<'a> {
    pub potential: PotentialSpec,
    pub options: FitOptions,
    profiles: Option<&'a CorrectionProfiles>,
    last: Option<(f64, SolitonParams)>,
    track: ModulationTrack,
}

impl<'a> Tracker<'a> {
    pub fn new(potential: PotentialSpec, init_guess: SolitonParams, t0: f64) -> Self {
        Tracker {
            potential,
            options: FitOptions::default(),
            profiles: None,
            last: Some((t0, init_guess)),
            track: ModulationTrack::default(),
        }
    }

    /// Report `remainder_h1` against the corrected ansatz of the given profiles.
    pub fn with_profiles(mut self, profiles: &'a CorrectionProfiles) -> Self {
        self.profiles = Some(profiles);
        self
    }

    pub fn is_locked(&self) -> bool {
        self.track.lost_lock.is_none()
    }

    /// Fit the snapshot at time `t`. After a lock loss further snapshots are ignored.
    pub fn push(&mut self, t: f64, u: &ComplexField) -> Result<()> {
        if !self.is_locked() {
            return Ok(());
        }
        let (t_prev, prev) = self.last.expect("tracker always has a guess");
        let dt = t - t_prev;
        let mut guess = prev;
        guess.rho += prev.v * dt;
        guess.gamma += (prev.c - 0.25 * prev.v * prev.v) * dt;
        match fit_with(u, &guess, &self.potential, self.options) {
            Ok(fit) => {
                let mut p = fit.params;
                // unwrap γ towards the prediction
                let turns = ((guess.gamma - p.gamma) / std::f64::consts::TAU).round();
                p.gamma += turns * std::f64::consts::TAU;
                let (remainder, order) = self.remainder(u, &p)?;
                self.track.times.push(t);
                self.track.params.push(p);
                self.track.fit_residuals.push(fit.residual);
                self.track.remainder_h1.push(remainder);
                self.track.remainder_order = order;
                self.last = Some((t, p));
                Ok(())
            }
            Err(NlsError::LostLock { reason, .. }) => {
                self.track.lost_lock = Some((t, reason));
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    fn remainder(&self, u: &ComplexField, p: &SolitonParams) -> Result<(f64, u8)> {
        match self.profiles {
            Some(prof) => {
                let state = AnsatzState::new(p.m, p.c, p.v, p.rho, p.gamma, self.potential);
                let ut = assemble_approximate_solution(&state, prof, &u.grid, prof.order)?;
                Ok((u.sub(&ut)?.h1_norm(), prof.order))
            }
            None => Ok((reference_distance(u, p)?, 0)),
        }
    }

    pub fn finish(self) -> ModulationTrack {
        self.track
    }

    pub fn track(&self) -> &ModulationTrack {
        &self.track
    }
}

/// Fit every snapshot in order.
pub fn track(
    snapshots: &[(f64, ComplexField)],
    pot: &PotentialSpec,
    init_guess: SolitonParams,
    profiles: Option<&CorrectionProfiles>,
) -> Result<ModulationTrack> {
    let t0 = snapshots.first().map(|s| s.0).unwrap_or(0.0);
    let mut tr = Tracker::new(*pot, init_guess, t0);
    if let Some(p) = profiles {
        tr = tr.with_profiles(p);
    }
    for (t, u) in snapshots {
        tr.push(*t, u)?;
    }
    Ok(tr.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::soliton::traveling_wave;
    use approx::assert_abs_diff_eq;

    fn setup() -> (Grid, PotentialSpec, SolitonParams) {
        let g = Grid::new(1024, 100.0, 1).unwrap();
        let pot = PotentialSpec::increasing(0.05);
        let mut p = SolitonParams::new(3.0, 1.3, 0.8, 4.0);
        p.gamma = 0.7;
        p.amp = amp_of(&pot, 3.0, p.rho);
        (g, pot, p)
    }

    fn perturbed(p: &SolitonParams) -> SolitonParams {
        SolitonParams { c: p.c * 1.05, v: p.v + 0.05, rho: p.rho - 0.2, gamma: p.gamma + 0.1, ..*p }
    }

    #[test]
    fn round_trip() {
        let (g, pot, p) = setup();
        let u = traveling_wave(&p, &g, 0.0).unwrap();
        let f = fit_with(&u, &perturbed(&p), &pot, FitOptions::default()).unwrap();
        assert!(f.residual < 1e-10);
        assert_abs_diff_eq!(f.params.c, p.c, epsilon = 1e-10);
        assert_abs_diff_eq!(f.params.v, p.v, epsilon = 1e-10);
        assert_abs_diff_eq!(f.params.rho, p.rho, epsilon = 1e-10);
        assert_abs_diff_eq!(f.params.gamma, p.gamma, epsilon = 1e-10);
    }

    #[test]
    fn phase_and_translation_equivariance() {
        let (g, pot, p) = setup();
        let mut u = traveling_wave(&p, &g, 0.0).unwrap();
        let base = fit_modulation(&u, &p, &pot).unwrap();
        u.scale(C64::from_polar(1.0, 0.4));
        let rot = fit_modulation(&u, &SolitonParams { gamma: p.gamma + 0.4, ..p }, &pot).unwrap();
        assert_abs_diff_eq!(rot.gamma - base.gamma, 0.4, epsilon = 1e-10);
        assert_abs_diff_eq!(rot.c, base.c, epsilon = 1e-10);
        let shifted = SolitonParams { rho: p.rho + g.dx(), amp: amp_of(&pot, 3.0, p.rho + g.dx()), ..p };
        let us = traveling_wave(&shifted, &g, 0.0).unwrap();
        let fs = fit_modulation(&us, &p, &pot).unwrap();
        assert_abs_diff_eq!(fs.rho - base.rho, g.dx(), epsilon = 1e-10);
    }

    #[test]
    fn small_perturbation() {
        let (g, pot, p) = setup();
        let mut u = traveling_wave(&p, &g, 0.0).unwrap();
        for j in 0..g.n() {
            let y = g.x(j) - p.rho;
            u.values[j] += C64::new(1e-3 * (-(y * y) / 4.0).exp() * (y * y - 2.0), 0.0);
        }
        let f = fit_modulation(&u, &p, &pot).unwrap();
        for (a, b) in [(f.c, p.c), (f.v, p.v), (f.rho, p.rho), (f.gamma, p.gamma)] {
            assert!((a - b).abs() < 1e-2, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_far_guess() {
        let (g, pot, p) = setup();
        let u = traveling_wave(&p, &g, 0.0).unwrap();
        let far = SolitonParams { rho: p.rho + 10.0, ..p };
        assert!(matches!(fit_modulation(&u, &far, &pot), Err(NlsError::LostLock { .. })));
    }

    #[test]
    fn tracker_follows_free_motion() {
        let g = Grid::new(1024, 100.0, 1).unwrap();
        let pot = PotentialSpec::uniform(1.0);
        let p = SolitonParams::new(3.0, 1.0, 1.0, -20.0);
        let snaps: Vec<(f64, ComplexField)> =
            (0..20).map(|k| (0.5 * k as f64, traveling_wave(&p, &g, 0.5 * k as f64).unwrap())).collect();
        let tr = track(&snaps, &pot, p, None).unwrap();
        assert_eq!(tr.len(), 20);
        assert!(tr.lost_lock.is_none());
        for (t, q) in tr.times.iter().zip(&tr.params) {
            assert_abs_diff_eq!(q.rho, -20.0 + t, epsilon = 1e-9);
            assert_abs_diff_eq!(q.gamma, 0.75 * t, epsilon = 1e-9);
        }
        assert!(tr.max_remainder() < 1e-8);
    }
}
