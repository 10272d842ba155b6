//! Strang split-step Fourier solver for
//! `i u_t + Δu + a(εx₁)|u|^{m-1}u = 0` on periodic 1D/2D grids.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{NlsError, Result};
use crate::grid::{spectral_derivative, ComplexField, FftPlan, Grid};
use crate::potential::PotentialSpec;

/// Largest accepted time step.
pub const MAX_DT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t0: f64,
    pub t1: f64,
    /// Steps between diagnostic samples.
    pub observer_stride: usize,
    pub m: f64,
    pub potential: PotentialSpec,
    /// Abort once the fraction of mass in the outer band exceeds this.
    pub edge_tolerance: f64,
}

impl SolverConfig {
    pub fn new(m: f64, potential: PotentialSpec, dt: f64, t0: f64, t1: f64) -> Self {
        SolverConfig { dt, t0, t1, observer_stride: 100, m, potential, edge_tolerance: 1e-6 }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.observer_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(NlsError::InvalidParameter(format!("dt must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        if !(self.t1 >= self.t0) || !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(NlsError::InvalidParameter(format!("bad interval [{}, {}]", self.t0, self.t1)));
        }
        if self.observer_stride == 0 {
            return Err(NlsError::InvalidParameter("observer_stride must be positive".into()));
        }
        if !(self.m > 1.0) {
            return Err(NlsError::InvalidParameter(format!("m must exceed 1, got {}", self.m)));
        }
        self.potential.check()
    }

    /// Number of steps and the effective step that lands exactly on `t1`.
    pub fn steps(&self) -> (usize, f64) {
        let span = self.t1 - self.t0;
        if span == 0.0 {
            return (0, self.dt);
        }
        let n = ((span / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, span / n as f64)
    }
}

/// `(M, E_a, P)`; `P[1] = 0` in 1D.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub mass: f64,
    pub energy: f64,
    pub momentum: [f64; 2],
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub momentum: Vec<[f64; 2]>,
    /// `(ε/(m+1)) ∫ a'(εx₁)|u|^{m+1}` at each sample.
    pub momentum_rhs: Vec<f64>,
    /// Fraction of mass in the outer band of the domain.
    pub edge_mass: Vec<f64>,
    /// Fraction of spectral energy above `2/3` of the Nyquist wavenumber.
    pub spectral_tail: Vec<f64>,
}

impl Diagnostics {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass.iter().fold(0.0, |a, &m| a.max((m - m0).abs() / m0))
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        let scale = e0.abs().max(1e-300);
        self.energy.iter().fold(0.0, |a, &e| a.max((e - e0).abs() / scale))
    }

    fn push(&mut self, t: f64, u: &ComplexField, prop: &Propagator) {
        let obs = prop.observables(u);
        self.times.push(t);
        self.mass.push(obs.mass);
        self.energy.push(obs.energy);
        self.momentum.push(obs.momentum);
        self.momentum_rhs.push(prop.momentum_rhs(u));
        self.edge_mass.push(edge_fraction(u));
        self.spectral_tail.push(spectral_tail(u));
    }
}

/// Outcome of [`evolve`]. On abort, `field` and `diagnostics` hold the last
/// accepted state.
#[derive(Debug)]
pub struct Run {
    pub field: ComplexField,
    pub time: f64,
    pub steps: usize,
    pub diagnostics: Diagnostics,
    pub abort: Option<NlsError>,
}

impl Run {
    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }

    pub fn into_result(self) -> Result<(ComplexField, Diagnostics)> {
        match self.abort {
            None => Ok((self.field, self.diagnostics)),
            Some(e) => Err(e),
        }
    }
}

/// Precomputed data for one grid and configuration.
pub struct Propagator {
    grid: Grid,
    m: f64,
    epsilon: f64,
    a_eps: Vec<f64>,
    da_eps: Vec<f64>,
    k2: Vec<f64>,
    plan: FftPlan,
}

impl Propagator {
    pub fn new(grid: &Grid, m: f64, potential: &PotentialSpec) -> Self {
        let n = grid.n();
        let x1 = |idx: usize| if grid.dim() == 1 { grid.x(idx) } else { grid.x(idx / n) };
        let eps = potential.epsilon;
        let a_eps = (0..grid.len()).map(|i| potential.eval(eps * x1(i), 0)).collect();
        let da_eps = (0..grid.len()).map(|i| potential.eval(eps * x1(i), 1)).collect();
        let k = grid.wavenumbers();
        let k2 = match grid.dim() {
            1 => k.iter().map(|k| k * k).collect(),
            _ => (0..n * n).map(|i| k[i / n].powi(2) + k[i % n].powi(2)).collect(),
        };
        Propagator { grid: grid.clone(), m, epsilon: eps, a_eps, da_eps, k2, plan: FftPlan::new(grid) }
    }

    /// `|z|^{m-1}` with fast paths for integer exponents.
    fn power(&self, z: C64) -> f64 {
        let r2 = z.norm_sqr();
        match self.m {
            3.0 => r2,
            2.0 => r2.sqrt(),
            4.0 => r2 * r2.sqrt(),
            5.0 => r2 * r2,
            m => r2.powf(0.5 * (m - 1.0)),
        }
    }

    /// Exact nonlinear flow for time `tau`: `u ↦ u e^{i a |u|^{m-1} τ}`.
    pub fn nonlinear(&self, u: &mut [C64], tau: f64) {
        u.par_iter_mut().with_min_len(1024).zip(self.a_eps.par_iter()).for_each(|(z, &a)| {
            let w = a * self.power(*z) * tau;
            *z *= C64::from_polar(1.0, w);
        });
    }

    /// Exact linear flow: multiplier `e^{-i|k|²τ}`.
    pub fn linear(&self, u: &mut [C64], tau: f64) {
        self.plan.forward(u);
        u.par_iter_mut().with_min_len(1024).zip(self.k2.par_iter()).for_each(|(z, &k2)| {
            *z *= C64::from_polar(1.0, -k2 * tau);
        });
        self.plan.inverse(u);
    }

    /// `count` Strang steps with the half nonlinear steps of neighbours merged.
    pub fn strang(&self, u: &mut [C64], dt: f64, count: usize) {
        if count == 0 {
            return;
        }
        self.nonlinear(u, 0.5 * dt);
        for i in 0..count {
            self.linear(u, dt);
            self.nonlinear(u, if i + 1 == count { 0.5 * dt } else { dt });
        }
    }

    pub fn observables(&self, u: &ComplexField) -> Observables {
        let cell = self.grid.cell();
        let mass = u.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell;
        let mut grad2 = 0.0;
        let mut momentum = [0.0; 2];
        for (axis, p) in momentum.iter_mut().enumerate().take(self.grid.dim()) {
            let d = spectral_derivative(u, axis);
            grad2 += d.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell;
            *p = 0.5 * u.values.iter().zip(&d.values).map(|(a, b)| (a.conj() * b).im).sum::<f64>() * cell;
        }
        let mp1 = self.m + 1.0;
        let pot: f64 = u
            .values
            .iter()
            .zip(&self.a_eps)
            .map(|(z, a)| a * z.norm_sqr().powf(0.5 * mp1))
            .sum::<f64>()
            * cell;
        Observables { mass, energy: 0.5 * grad2 - pot / mp1, momentum }
    }

    /// `(ε/(m+1)) ∫ a'(εx₁)|u|^{m+1}`.
    pub fn momentum_rhs(&self, u: &ComplexField) -> f64 {
        let mp1 = self.m + 1.0;
        let s: f64 = u.values.iter().zip(&self.da_eps).map(|(z, d)| d * z.norm_sqr().powf(0.5 * mp1)).sum();
        self.epsilon / mp1 * s * self.grid.cell()
    }
}

fn check_field(u: &ComplexField, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if u.grid.dim() == 2 && cfg.m >= 3.0 {
        return Err(NlsError::InvalidParameter(format!("2D runs need m < 3, got {}", cfg.m)));
    }
    if !u.is_finite() {
        return Err(NlsError::NonFinite { step: 0 });
    }
    Ok(())
}

/// One Strang step of size `cfg.dt`.
pub fn step_strang(u: &ComplexField, cfg: &SolverConfig) -> Result<ComplexField> {
    check_field(u, cfg)?;
    let prop = Propagator::new(&u.grid, cfg.m, &cfg.potential);
    let mut v = u.values.clone();
    prop.strang(&mut v, cfg.dt, 1);
    let out = ComplexField { grid: u.grid.clone(), values: v };
    if !out.is_finite() {
        return Err(NlsError::NonFinite { step: 1 });
    }
    Ok(out)
}

/// `(M, E_a, P)` of `u`.
pub fn observables(u: &ComplexField, pot: &PotentialSpec, m: f64) -> Observables {
    Propagator::new(&u.grid, m, pot).observables(u)
}

/// Share of the mass within 1/16 of the domain length from any edge.
pub fn edge_fraction(u: &ComplexField) -> f64 {
    let g = &u.grid;
    let n = g.n();
    let band = (n / 16).max(1);
    let edge = |i: usize| i < band || i >= n - band;
    let (mut total, mut outer) = (0.0, 0.0);
    for (idx, z) in u.values.iter().enumerate() {
        let w = z.norm_sqr();
        total += w;
        let out = match g.dim() {
            1 => edge(idx),
            _ => edge(idx / n) || edge(idx % n),
        };
        if out {
            outer += w;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

/// Fraction of `Σ|û|²` carried by modes with `|k_i| > (2/3) k_max` on some axis.
pub fn spectral_tail(u: &ComplexField) -> f64 {
    let g = &u.grid;
    let plan = FftPlan::new(g);
    let mut data = u.values.clone();
    plan.forward(&mut data);
    let n = g.n();
    let kmax = g.wavenumbers()[g.nyquist_index()].abs();
    let k = g.wavenumbers();
    let high = |i: usize| k[i].abs() > 2.0 / 3.0 * kmax;
    let (mut total, mut tail) = (0.0, 0.0);
    for (idx, z) in data.iter().enumerate() {
        let w = z.norm_sqr();
        total += w;
        let h = match g.dim() {
            1 => high(idx),
            _ => high(idx / n) || high(idx % n),
        };
        if h {
            tail += w;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Evolve `u0` over `[t0, t1]`, sampling diagnostics every `observer_stride` steps.
pub fn evolve(u0: &ComplexField, cfg: &SolverConfig) -> Result<Run> {
    evolve_observed(u0, cfg, |_, _| {})
}

/// As [`evolve`], calling `observer(t, u)` at every diagnostic sample.
pub fn evolve_observed(
    u0: &ComplexField,
    cfg: &SolverConfig,
    mut observer: impl FnMut(f64, &ComplexField),
) -> Result<Run> {
    check_field(u0, cfg)?;
    let prop = Propagator::new(&u0.grid, cfg.m, &cfg.potential);
    let (total, dt) = cfg.steps();
    let mut diag = Diagnostics::default();
    let mut u = u0.clone();
    diag.push(cfg.t0, &u, &prop);
    observer(cfg.t0, &u);
    let mut done = 0;
    let mut abort = None;
    while done < total {
        let count = cfg.observer_stride.min(total - done);
        let mut next = u.values.clone();
        prop.strang(&mut next, dt, count);
        let t = if done + count == total { cfg.t1 } else { cfg.t0 + (done + count) as f64 * dt };
        let cand = ComplexField { grid: u.grid.clone(), values: next };
        if !cand.is_finite() {
            abort = Some(NlsError::NonFinite { step: done + count });
            break;
        }
        let edge = edge_fraction(&cand);
        if edge > cfg.edge_tolerance {
            abort = Some(NlsError::BoundaryProximity(format!(
                "edge mass fraction {edge:.3e} exceeds {:.1e} at t = {t:.4}",
                cfg.edge_tolerance
            )));
            break;
        }
        u = cand;
        done += count;
        diag.push(t, &u, &prop);
        observer(t, &u);
    }
    let time = *diag.times.last().unwrap();
    Ok(Run { field: u, time, steps: done, diagnostics: diag, abort })
}

#[derive(Clone, Debug)]
pub struct MomentumLaw {
    /// Interior sample times.
    pub times: Vec<f64>,
    pub dpdt: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: Vec<f64>,
}

impl MomentumLaw {
    pub fn min_dpdt(&self) -> f64 {
        self.dpdt.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_dpdt(&self) -> f64 {
        self.dpdt.iter().fold(0.0, |a, d| a.max(d.abs()))
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |a, &r| a.max(r))
    }
}

/// `|dP₁/dt - (ε/(m+1))∫a'|u|^{m+1}|` at interior samples; `dP₁/dt` by
/// centered differences (non-uniform spacing allowed).
pub fn momentum_law_residual(diag: &Diagnostics) -> Result<MomentumLaw> {
    let n = diag.len();
    if n < 3 {
        return Err(NlsError::TooFewSamples { needed: 3, got: n });
    }
    let t = &diag.times;
    let p: Vec<f64> = diag.momentum.iter().map(|p| p[0]).collect();
    let mut law = MomentumLaw { times: vec![], dpdt: vec![], rhs: vec![], residual: vec![] };
    for i in 1..n - 1 {
        let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        // second-order three-point derivative on a non-uniform stencil
        let d = -h1 / (h0 * (h0 + h1)) * p[i - 1] + (h1 - h0) / (h0 * h1) * p[i] + h0 / (h1 * (h0 + h1)) * p[i + 1];
        law.times.push(t[i]);
        law.dpdt.push(d);
        law.rhs.push(diag.momentum_rhs[i]);
        law.residual.push((d - diag.momentum_rhs[i]).abs());
    }
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soliton::{traveling_wave, SolitonParams};
    use approx::assert_abs_diff_eq;

    fn soliton_grid() -> Grid {
        Grid::new(2048, 200.0, 1).unwrap()
    }

    #[test]
    fn observables_of_unit_soliton() {
        let g = soliton_grid();
        let pot = PotentialSpec::uniform(1.0);
        let u = traveling_wave(&SolitonParams::new(3.0, 1.0, 0.0, 0.0), &g, 0.0).unwrap();
        let o = observables(&u, &pot, 3.0);
        assert_abs_diff_eq!(o.mass, 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(o.energy, -2.0 / 3.0, epsilon = 1e-10);
        let u = traveling_wave(&SolitonParams::new(3.0, 1.0, 1.0, 0.0), &g, 0.0).unwrap();
        assert_abs_diff_eq!(observables(&u, &pot, 3.0).momentum[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn nonlinear_substep_preserves_modulus() {
        let g = Grid::new(256, 40.0, 1).unwrap();
        let pot = PotentialSpec::increasing(0.1);
        let prop = Propagator::new(&g, 3.0, &pot);
        let u = traveling_wave(&SolitonParams::new(3.0, 1.0, 0.5, 0.0), &g, 0.0).unwrap();
        let mut v = u.values.clone();
        prop.nonlinear(&mut v, 0.37);
        for (a, b) in u.values.iter().zip(&v) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn one_step_conserves_mass() {
        let g = Grid::new(512, 60.0, 1).unwrap();
        let cfg = SolverConfig::new(3.0, PotentialSpec::increasing(0.1), 1e-2, 0.0, 1e-2);
        let u = traveling_wave(&SolitonParams::new(3.0, 1.0, 0.5, 0.0), &g, 0.0).unwrap();
        let v = step_strang(&u, &cfg).unwrap();
        assert!((v.l2_norm() / u.l2_norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn single_step_local_error_is_third_order() {
        let g = Grid::new(512, 60.0, 1).unwrap();
        let p = SolitonParams::new(3.0, 1.0, 1.0, 0.0);
        let u = traveling_wave(&p, &g, 0.0).unwrap();
        let err = |dt: f64| {
            let cfg = SolverConfig::new(3.0, PotentialSpec::uniform(1.0), dt, 0.0, dt);
            step_strang(&u, &cfg).unwrap().sup_distance(&traveling_wave(&p, &g, dt).unwrap()).unwrap()
        };
        let ratio = err(2e-2) / err(1e-2);
        assert!((ratio - 8.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn free_soliton_accuracy() {
        let g = soliton_grid();
        let p = SolitonParams::new(3.0, 1.0, 1.0, -5.0);
        let u0 = traveling_wave(&p, &g, 0.0).unwrap();
        let run = |dt: f64| {
            let cfg = SolverConfig::new(3.0, PotentialSpec::uniform(1.0), dt, 0.0, 10.0);
            evolve(&u0, &cfg).unwrap()
        };
        let exact = traveling_wave(&p, &g, 10.0).unwrap();
        let r1 = run(1e-3);
        assert!(r1.completed());
        let e1 = r1.field.sup_distance(&exact).unwrap();
        let e2 = run(2e-3).field.sup_distance(&exact).unwrap();
        // second-order Strang: ≈1.0e-5 at dt = 1e-3 over T = 10
        assert!(e1 < 1.5e-5, "{e1:e}");
        assert!((e2 / e1 - 4.0).abs() < 0.5, "{}", e2 / e1);
        assert!(r1.diagnostics.mass_drift() < 1e-12, "{:e}", r1.diagnostics.mass_drift());
        assert!(r1.diagnostics.energy_drift() < 1e-8);
    }

    #[test]
    fn time_reversal() {
        let g = Grid::new(512, 80.0, 1).unwrap();
        let pot = PotentialSpec::increasing(0.2);
        let u0 = traveling_wave(&SolitonParams::new(3.0, 1.0, 1.0, -5.0), &g, 0.0).unwrap();
        let cfg = SolverConfig::new(3.0, pot, 1e-2, 0.0, 5.0);
        let fwd = evolve(&u0, &cfg).unwrap().field;
        let back = ComplexField { grid: g.clone(), values: fwd.values.iter().map(|z| z.conj()).collect() };
        let ret = evolve(&back, &cfg).unwrap().field;
        let err = ret.values.iter().zip(&u0.values).fold(0.0f64, |a, (r, u)| a.max((r.conj() - u).norm()));
        assert!(err < 1e-10, "{err:e}");
    }

    #[test]
    fn scaling_symmetry() {
        let g = Grid::new(512, 80.0, 1).unwrap();
        let m = 3.0;
        let s = 2f64.powf(-1.0 / (m - 1.0));
        let v0 = traveling_wave(&SolitonParams::new(m, 1.0, 0.7, 0.0), &g, 0.0).unwrap();
        let cfg1 = SolverConfig::new(m, PotentialSpec::uniform(1.0), 1e-2, 0.0, 3.0);
        let cfg2 = SolverConfig::new(m, PotentialSpec::uniform(2.0), 1e-2, 0.0, 3.0);
        let mut a = evolve(&v0, &cfg1).unwrap().field;
        a.scale(C64::new(s, 0.0));
        let mut b0 = v0.clone();
        b0.scale(C64::new(s, 0.0));
        let b = evolve(&b0, &cfg2).unwrap().field;
        assert!(a.sup_distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn boundary_abort_keeps_partial_diagnostics() {
        let g = Grid::new(256, 40.0, 1).unwrap();
        let u0 = traveling_wave(&SolitonParams::new(3.0, 1.0, 2.0, 0.0), &g, 0.0).unwrap();
        let cfg = SolverConfig::new(3.0, PotentialSpec::uniform(1.0), 1e-2, 0.0, 20.0).with_stride(10);
        let run = evolve(&u0, &cfg).unwrap();
        assert!(matches!(run.abort, Some(NlsError::BoundaryProximity(_))));
        assert!(run.time > 0.0 && run.time < 20.0);
        assert_eq!(run.diagnostics.len(), run.steps / 10 + 1);
    }

    #[test]
    fn momentum_law_flat_potential() {
        let g = Grid::new(512, 80.0, 1).unwrap();
        let u0 = traveling_wave(&SolitonParams::new(3.0, 1.0, 0.5, 0.0), &g, 0.0).unwrap();
        let cfg = SolverConfig::new(3.0, PotentialSpec::uniform(1.0), 1e-2, 0.0, 2.0).with_stride(20);
        let run = evolve(&u0, &cfg).unwrap();
        let law = momentum_law_residual(&run.diagnostics).unwrap();
        assert!(law.max_residual() < 1e-8 && law.max_abs_dpdt() < 1e-8);
        let mut short = run.diagnostics.clone();
        short.times.truncate(2);
        assert!(matches!(momentum_law_residual(&short), Err(NlsError::TooFewSamples { .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let g = Grid::new(64, 20.0, 1).unwrap();
        let u = ComplexField::zeros(&g);
        let cfg = SolverConfig::new(3.0, PotentialSpec::uniform(1.0), 0.5, 0.0, 1.0);
        assert!(evolve(&u, &cfg).is_err());
        let g2 = Grid::new(32, 20.0, 2).unwrap();
        let cfg = SolverConfig::new(3.0, PotentialSpec::uniform(1.0), 0.01, 0.0, 1.0);
        assert!(evolve(&ComplexField::zeros(&g2), &cfg).is_err());
    }
}
