//! Effective parameter dynamics of the soliton, asymptotic predictions,
//! Galilean boosts and the refraction law.
//!
//! ```text
//! V' = ε f1 = 8ε a'C / ((m+3) a)       (2D: 4κε a'C / ((m+1) a))
//! C' = ε f2 = 4ε a'CV / ((5-m) a)      (2D: 2ε a'CV / ((3-m) a))
//! U' = V,  H' = -V'U/2
//! ```
//! with `a, a'` evaluated at `εU`.

use num_complex::Complex64 as C64;

use crate::error::{NlsError, Result};
use crate::grid::{spectral_shift, ComplexField};
use crate::potential::{Direction, PotentialSpec};
use crate::soliton::{check_exponent, ScalingExponents};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdeKind {
    Increasing1D,
    Decreasing1D,
    TwoD,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveState {
    pub c: f64,
    pub v: f64,
    pub u: f64,
    pub h: f64,
}

impl EffectiveState {
    fn axpy(&self, dt: f64, d: &EffectiveState) -> EffectiveState {
        EffectiveState { c: self.c + dt * d.c, v: self.v + dt * d.v, u: self.u + dt * d.u, h: self.h + dt * d.h }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EffectiveSystem {
    pub kind: OdeKind,
    pub m: f64,
    pub potential: PotentialSpec,
    /// `∫Q^{m+1}/∫Q²` of the 2D ground state; unused in 1D.
    pub kappa: f64,
}

impl EffectiveSystem {
    pub fn new(kind: OdeKind, m: f64, potential: PotentialSpec) -> Result<Self> {
        potential.check()?;
        match kind {
            OdeKind::TwoD => check_exponent(m, 2)?,
            _ => check_exponent(m, 1)?,
        }
        let expected = match kind {
            OdeKind::Increasing1D => Some(Direction::Increasing),
            OdeKind::Decreasing1D => Some(Direction::Decreasing),
            OdeKind::TwoD => None,
        };
        if let Some(dir) = expected {
            if dir != potential.direction {
                return Err(NlsError::InvalidParameter(format!(
                    "{kind:?} requires a {dir:?} potential"
                )));
            }
        }
        Ok(EffectiveSystem { kind, m, potential, kappa: 0.5 * (m + 1.0) })
    }

    /// 1D system whose kind follows the potential direction.
    pub fn one_d(m: f64, potential: PotentialSpec) -> Result<Self> {
        let kind = match potential.direction {
            Direction::Increasing => OdeKind::Increasing1D,
            Direction::Decreasing => OdeKind::Decreasing1D,
        };
        Self::new(kind, m, potential)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// Coefficients `(k1, k2)` with `V' = k1 ε a'C/a`, `C' = k2 ε a'CV/a`.
    pub fn coefficients(&self) -> (f64, f64) {
        let m = self.m;
        match self.kind {
            OdeKind::TwoD => (4.0 * self.kappa / (m + 1.0), 2.0 / (3.0 - m)),
            _ => (8.0 / (m + 3.0), 4.0 / (5.0 - m)),
        }
    }

    /// Slope `s` of the conserved combination `V² - s C`.
    pub fn invariant_slope(&self) -> f64 {
        let (k1, k2) = self.coefficients();
        2.0 * k1 / k2
    }

    /// Exponent `q` in `C = (a(εU)/a(εU0))^q`.
    pub fn scaling_exponent(&self) -> f64 {
        self.coefficients().1
    }

    pub fn invariant(&self, s: &EffectiveState) -> f64 {
        s.v * s.v - self.invariant_slope() * s.c
    }

    pub fn rhs(&self, s: &EffectiveState) -> EffectiveState {
        let eps = self.potential.epsilon;
        let r = eps * s.u;
        let a = self.potential.eval(r, 0);
        let da = self.potential.eval(r, 1);
        let (k1, k2) = self.coefficients();
        let dv = k1 * eps * da * s.c / a;
        let dc = k2 * eps * da * s.c * s.v / a;
        EffectiveState { c: dc, v: dv, u: s.v, h: -0.5 * dv * s.u }
    }

    pub fn rk4_step(&self, s: &EffectiveState, dt: f64) -> EffectiveState {
        let k1 = self.rhs(s);
        let k2 = self.rhs(&s.axpy(0.5 * dt, &k1));
        let k3 = self.rhs(&s.axpy(0.5 * dt, &k2));
        let k4 = self.rhs(&s.axpy(dt, &k3));
        EffectiveState {
            c: s.c + dt / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c),
            v: s.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            u: s.u + dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            h: s.h + dt / 6.0 * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h),
        }
    }
}

/// `d(C, V, U, H)/dt` for the given system kind.
pub fn ode_rhs(kind: OdeKind, s: &EffectiveState, pot: &PotentialSpec, m: f64) -> Result<EffectiveState> {
    Ok(EffectiveSystem::new(kind, m, *pot)?.rhs(s))
}

/// Default RK4 step `min(0.01/ε, 0.5)`.
pub fn default_dt(epsilon: f64) -> f64 {
    (0.01 / epsilon).min(0.5)
}

/// Interaction time `T_ε = ε^{-1-1/100} / v0`.
pub fn interaction_time(v0: f64, epsilon: f64) -> f64 {
    epsilon.powf(-1.01) / v0
}

/// Largest tolerated drift of the conserved combination.
pub const INVARIANT_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<EffectiveState>,
    pub invariant_drift: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, EffectiveState) {
        (*self.t.last().unwrap(), *self.states.last().unwrap())
    }

    pub fn max_drift(&self) -> f64 {
        self.invariant_drift.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Linear interpolation of the state at time `t` (clamped).
    pub fn at(&self, t: f64) -> EffectiveState {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.states[0];
        }
        if t >= self.t[n - 1] {
            return self.states[n - 1];
        }
        let i = self.t.partition_point(|&s| s <= t) - 1;
        let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        let (a, b) = (&self.states[i], &self.states[i + 1]);
        EffectiveState {
            c: a.c + w * (b.c - a.c),
            v: a.v + w * (b.v - a.v),
            u: a.u + w * (b.u - a.u),
            h: a.h + w * (b.h - a.h),
        }
    }
}

/// Classical RK4 from `t0` to `t1` with fixed step `dt` (last step shortened).
pub fn integrate_effective(
    sys: &EffectiveSystem,
    init: EffectiveState,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t1 > t0) {
        return Err(NlsError::InvalidParameter(format!("need dt > 0 and t1 > t0 (dt {dt}, [{t0}, {t1}])")));
    }
    if !(init.c > 0.0) {
        return Err(NlsError::InvalidParameter("C must be positive".into()));
    }
    let steps = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    let inv0 = sys.invariant(&init);
    let scale = inv0.abs().max(1.0);
    let mut traj = Trajectory::default();
    traj.t.push(t0);
    traj.states.push(init);
    traj.invariant_drift.push(0.0);
    let mut s = init;
    for i in 1..=steps {
        let t_prev = t0 + (i - 1) as f64 * dt;
        let t = if i == steps { t1 } else { t0 + i as f64 * dt };
        s = sys.rk4_step(&s, t - t_prev);
        let drift = (sys.invariant(&s) - inv0).abs() / scale;
        if drift > INVARIANT_DRIFT_LIMIT || !(s.c > 0.0) {
            return Err(NlsError::InvariantDrift { t, drift, limit: INVARIANT_DRIFT_LIMIT });
        }
        traj.t.push(t);
        traj.states.push(s);
        traj.invariant_drift.push(drift);
    }
    Ok(traj)
}

/// Times where `V` changes sign, refined by bisection on the RK4 sub-step.
pub fn turning_points(sys: &EffectiveSystem, traj: &Trajectory) -> Vec<(f64, EffectiveState)> {
    let mut out = Vec::new();
    for i in 1..traj.states.len() {
        let (a, b) = (&traj.states[i - 1], &traj.states[i]);
        if a.v == 0.0 {
            out.push((traj.t[i - 1], *a));
            continue;
        }
        if a.v.signum() != b.v.signum() && b.v != 0.0 {
            let (mut lo, mut hi) = (0.0, traj.t[i] - traj.t[i - 1]);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sys.rk4_step(a, mid).v.signum() == a.v.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * (1.0 + traj.t[i].abs()) {
                    break;
                }
            }
            let h = 0.5 * (lo + hi);
            out.push((traj.t[i - 1] + h, sys.rk4_step(a, h)));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Transmitted,
    Reflected,
    Critical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomePrediction {
    pub kind: Outcome,
    pub c_inf: f64,
    pub v_inf: f64,
    pub lambda_inf: f64,
    /// `c0 = 1 - v0²/s`, the scaling at the turning point (reflection only).
    pub c_turn: Option<f64>,
}

fn predict(sys: &EffectiveSystem, v0: f64) -> Result<OutcomePrediction> {
    if !(v0 > 0.0) {
        return Err(NlsError::InvalidParameter(format!("v0 must be positive, got {v0}")));
    }
    let pot = &sys.potential;
    let m = sys.m;
    let slope = sys.invariant_slope();
    let c_far = (pot.a_plus / pot.a_minus).powf(sys.scaling_exponent());
    let lambda_plus = pot.a_plus.powf(-1.0 / (m - 1.0));
    let lambda_minus = pot.a_minus.powf(-1.0 / (m - 1.0));
    if c_far >= 1.0 {
        let v_inf = (v0 * v0 + slope * (c_far - 1.0)).sqrt();
        return Ok(OutcomePrediction {
            kind: Outcome::Transmitted,
            c_inf: c_far,
            v_inf,
            lambda_inf: lambda_plus,
            c_turn: None,
        });
    }
    let threshold = slope * (1.0 - c_far);
    let gap = v0 * v0 - threshold;
    let c_turn = 1.0 - v0 * v0 / slope;
    if gap.abs() <= 1e-12 {
        Ok(OutcomePrediction { kind: Outcome::Critical, c_inf: c_far, v_inf: 0.0, lambda_inf: lambda_plus, c_turn: Some(c_turn) })
    } else if gap < 0.0 {
        Ok(OutcomePrediction { kind: Outcome::Reflected, c_inf: 1.0, v_inf: -v0, lambda_inf: lambda_minus, c_turn: Some(c_turn) })
    } else {
        Ok(OutcomePrediction {
            kind: Outcome::Transmitted,
            c_inf: c_far,
            v_inf: gap.sqrt(),
            lambda_inf: lambda_plus,
            c_turn: None,
        })
    }
}

/// Asymptotic outcome of a 1D soliton launched from the left with speed `v0`.
pub fn predict_outcome(m: f64, v0: f64, pot: &PotentialSpec) -> Result<OutcomePrediction> {
    predict(&EffectiveSystem::one_d(m, *pot)?, v0)
}

/// Asymptotic outcome of the normal velocity component in 2D.
pub fn predict_outcome_2d(m: f64, v1: f64, pot: &PotentialSpec, kappa: f64) -> Result<OutcomePrediction> {
    predict(&EffectiveSystem::new(OdeKind::TwoD, m, *pot)?.with_kappa(kappa), v1)
}

/// `λ0` of the 1D system, exposed for reporting.
pub fn lambda0(m: f64) -> f64 {
    ScalingExponents::new(m).lambda0
}

/// `𝒢[u](x1, x2) = u(x1, x2 - v2 t) e^{i x2 v2/2} e^{-i v2² t/4}`.
///
/// `v2/2` must be a grid wavenumber so that the boosted field stays periodic.
pub fn galilean_boost(field: &ComplexField, v2: f64, t: f64) -> Result<ComplexField> {
    let grid = &field.grid;
    if grid.dim() != 2 {
        return Err(NlsError::InvalidParameter("Galilean boost needs a 2D field".into()));
    }
    if v2 == 0.0 {
        return Ok(field.clone());
    }
    let dk = 2.0 * std::f64::consts::PI / grid.length();
    let modes = 0.5 * v2 / dk;
    if (modes - modes.round()).abs() > 1e-9 {
        return Err(NlsError::InvalidParameter(format!(
            "v2/2 = {} is not a multiple of the wavenumber spacing {dk}",
            0.5 * v2
        )));
    }
    let mut out = spectral_shift(field, 1, v2 * t);
    let n = grid.n();
    let global = C64::from_polar(1.0, -0.25 * v2 * v2 * t);
    for (idx, z) in out.values.iter_mut().enumerate() {
        let x2 = grid.x(idx % n);
        *z *= global * C64::from_polar(1.0, 0.5 * v2 * x2);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refraction {
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub v_out: [f64; 2],
    pub law_residual: f64,
}

/// Incidence and refraction angles (from the `x1` axis) of a 2D soliton.
pub fn refraction_angles(v_in: [f64; 2], m: f64, pot: &PotentialSpec, kappa: f64) -> Result<Refraction> {
    if !(v_in[0] > 0.0) {
        return Err(NlsError::InvalidParameter(format!("incident x1 velocity must be positive, got {}", v_in[0])));
    }
    let pred = predict_outcome_2d(m, v_in[0], pot, kappa)?;
    let v_out = [pred.v_inf, v_in[1]];
    let theta_minus = v_in[1].atan2(v_in[0]);
    let theta_plus = v_out[1].atan2(v_out[0]);
    let speed_in = v_in[0].hypot(v_in[1]);
    let speed_out = v_out[0].hypot(v_out[1]);
    let law_residual = (speed_in * theta_minus.sin() - speed_out * theta_plus.sin()).abs();
    Ok(Refraction { theta_minus, theta_plus, v_out, law_residual })
}
