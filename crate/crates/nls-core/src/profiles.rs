//! Correction profiles of the approximate solution
//!
//! ```text
//! ũ = [Q_c(y)/ã + Σ_k ε^k (A_k + i B_k)(y)] e^{iΘ},   y = x - ρ,  Θ = φ + v x/2
//! ```
//!
//! where `ã = a^{1/(m-1)}(ερ)`. First order profiles are closed form; second
//! order profiles (m ≥ 3) come from constrained inversions of `L±` at `c = 1`
//! and are rescaled to the current `c`.

use num_complex::Complex64 as C64;

use crate::error::{NlsError, Result};
use crate::grid::{ComplexField, FftPlan, Grid, RealField};
use crate::linearized::{LinearizedOperator, Sign};
use crate::potential::PotentialSpec;
use crate::soliton::{check_exponent, q, q_prime, q_second, ScalingExponents};

/// Reference grid for the unit (`c = 1`) profiles.
pub const REFERENCE_N: usize = 1024;
pub const REFERENCE_LENGTH: f64 = 80.0;

/// Constants of the first and second order systems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileConstants {
    pub m: f64,
    pub chi: f64,
    pub xi: f64,
    /// `½∫Q²`.
    pub m_half: f64,
    /// `(α_I, α_II, α_III, α_IV)`; zero for `m < 3`.
    pub alphas: [f64; 4],
    /// `(β_I, β_II)`; zero for `m < 3`.
    pub betas: [f64; 2],
}

/// Unit first order profiles and their derivatives, as functions of `s = √c y`.
#[derive(Clone, Copy, Debug)]
struct Unit {
    m: f64,
    chi: f64,
    xi: f64,
}

impl Unit {
    fn a1(&self, s: f64) -> f64 {
        let m = self.m;
        (s * (s * q_prime(m, s) - q(m, s)) + self.xi * q_prime(m, s)) / (m + 3.0)
    }
    fn a1_prime(&self, s: f64) -> f64 {
        let m = self.m;
        (s * q_prime(m, s) + (s * s + self.xi) * q_second(m, s) - q(m, s)) / (m + 3.0)
    }
    fn b1(&self, s: f64) -> f64 {
        let m = self.m;
        -(s * s + self.chi) * q(m, s) / (2.0 * (5.0 - m))
    }
    fn b1_prime(&self, s: f64) -> f64 {
        let m = self.m;
        -(2.0 * s * q(m, s) + (s * s + self.chi) * q_prime(m, s)) / (2.0 * (5.0 - m))
    }

    /// `F₂^{I..IV}(s)`.
    fn f2(&self, s: f64) -> [f64; 4] {
        let m = self.m;
        let qs = q(m, s);
        let (a1, b1, b1p) = (self.a1(s), self.b1(s), self.b1_prime(s));
        let qm2 = qs.powf(m - 2.0);
        [
            0.5 * s * s * qs.powf(m),
            -b1,
            (m * qs.powf(m - 1.0) - 4.0 / (m + 3.0)) * s * a1 + 0.5 * m * (m - 1.0) * qm2 * a1 * a1
                - 8.0 / (m + 3.0) * b1,
            0.5 * (m - 1.0) * qm2 * b1 * b1 - 2.0 / (5.0 - m) * s * b1p - (m - 8.0) / (5.0 - m) * b1,
        ]
    }

    /// `G₂^{I,II}(s)`.
    fn g2(&self, s: f64) -> [f64; 2] {
        let m = self.m;
        let qs = q(m, s);
        let (a1, a1p, b1) = (self.a1(s), self.a1_prime(s), self.b1(s));
        [
            a1,
            (m - 6.0) / (5.0 - m) * a1
                + (qs.powf(m - 1.0) - 4.0 / (m + 3.0)) * s * b1
                + 2.0 / (5.0 - m) * s * a1p
                + (m - 1.0) * qs.powf(m - 2.0) * a1 * b1,
        ]
    }
}

/// A real profile stored by its Fourier coefficients, evaluable anywhere.
#[derive(Clone, Debug)]
pub struct UnitProfile {
    pub field: RealField,
    coeffs: Vec<C64>,
    k: Vec<f64>,
}

impl UnitProfile {
    fn new(field: RealField) -> Self {
        let grid = &field.grid;
        let plan = FftPlan::new(grid);
        let mut buf: Vec<C64> = field.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        plan.forward(&mut buf);
        let n = grid.n() as f64;
        let coeffs = buf.iter().map(|z| z / n).collect();
        UnitProfile { k: grid.wavenumbers().to_vec(), coeffs, field }
    }

    /// Trigonometric interpolant at `s`; zero outside the reference window.
    pub fn eval(&self, s: f64) -> f64 {
        let half = 0.5 * self.field.grid.length();
        if s.abs() >= half {
            return 0.0;
        }
        let x = s + half;
        let n = self.k.len();
        let dk = self.k[1];
        let step = C64::from_polar(1.0, dk * x);
        let mut z = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n / 2 {
            acc += self.coeffs[j] * z;
            z *= step;
        }
        let mut z = C64::from_polar(1.0, self.k[n / 2] * x);
        for j in n / 2..n {
            acc += self.coeffs[j] * z;
            z *= step;
        }
        acc.re
    }
}

/// Unit profiles and constants for one exponent `m`.
#[derive(Clone, Debug)]
pub struct CorrectionProfiles {
    pub m: f64,
    /// Highest available order: 1, or 2 when `m ≥ 3`.
    pub order: u8,
    pub constants: ProfileConstants,
    pub a1: RealField,
    pub b1: RealField,
    /// `Â^{I..IV}` with `L+ Â = F₂^{(k)} - α_k Q`, `⊥ Q'`.
    pub a2: Vec<UnitProfile>,
    /// `B̂^{I,II}` with `L- B̂ = G₂^{(k)} - β_k Q'`, `⊥ Q`.
    pub b2: Vec<UnitProfile>,
}

fn unit_constants(m: f64, grid: &Grid) -> (Unit, f64) {
    let q2 = RealField::from_fn(grid, |s| q(m, s).powi(2));
    let y2q2 = RealField::from_fn(grid, |s| (s * q(m, s)).powi(2));
    let chi = -y2q2.integrate() / q2.integrate();
    let xi = -(m + 7.0) / (2.0 * (m - 1.0)) + chi;
    (Unit { m, chi, xi }, 0.5 * q2.integrate())
}

/// `(χ, ξ)` by quadrature of the unit soliton.
pub fn xi_chi(m: f64) -> Result<(f64, f64)> {
    check_exponent(m, 1)?;
    let grid = Grid::new(REFERENCE_N, REFERENCE_LENGTH, 1)?;
    let (u, _) = unit_constants(m, &grid);
    Ok((u.xi, u.chi))
}

impl CorrectionProfiles {
    pub fn build(m: f64) -> Result<Self> {
        Self::build_on(m, &Grid::new(REFERENCE_N, REFERENCE_LENGTH, 1)?)
    }

    pub fn build_on(m: f64, grid: &Grid) -> Result<Self> {
        check_exponent(m, 1)?;
        let (unit, m_half) = unit_constants(m, grid);
        let a1 = RealField::from_fn(grid, |s| unit.a1(s));
        let b1 = RealField::from_fn(grid, |s| unit.b1(s));
        let mut constants = ProfileConstants { m, chi: unit.chi, xi: unit.xi, m_half, alphas: [0.0; 4], betas: [0.0; 2] };
        if m < 3.0 {
            return Ok(CorrectionProfiles { m, order: 1, constants, a1, b1, a2: vec![], b2: vec![] });
        }
        let theta = ScalingExponents::new(m).theta;
        let qf = RealField::from_fn(grid, |s| q(m, s));
        let qp = RealField::from_fn(grid, |s| q_prime(m, s));
        let lq = RealField::from_fn(grid, |s| q(m, s) / (m - 1.0) + 0.5 * s * q_prime(m, s));
        let yq = RealField::from_fn(grid, |s| s * q(m, s));
        let lp = LinearizedOperator::new(Sign::Plus, m, 1.0, grid)?;
        let lm = LinearizedOperator::new(Sign::Minus, m, 1.0, grid)?;
        let mut a2 = Vec::with_capacity(4);
        for k in 0..4 {
            let f = RealField::from_fn(grid, |s| unit.f2(s)[k]);
            let alpha = lq.dot(&f) / (2.0 * theta * m_half);
            constants.alphas[k] = alpha;
            let src = f.zip_with(&qf, |a, b| a - alpha * b)?;
            a2.push(UnitProfile::new(lp.solve_constrained(&src.even_part(), &qp)?.even_part()));
        }
        let mut b2 = Vec::with_capacity(2);
        for k in 0..2 {
            let g = RealField::from_fn(grid, |s| unit.g2(s)[k]);
            let beta = -yq.dot(&g) / m_half;
            constants.betas[k] = beta;
            let src = g.zip_with(&qp, |a, b| a - beta * b)?;
            b2.push(UnitProfile::new(lm.solve_constrained(&src.odd_part(), &qf)?.odd_part()));
        }
        Ok(CorrectionProfiles { m, order: 2, constants, a1, b1, a2, b2 })
    }

    fn unit(&self) -> Unit {
        Unit { m: self.m, chi: self.constants.chi, xi: self.constants.xi }
    }
}

/// Modulation state `(c, v, ρ, φ)` with `Θ = φ + v x/2`, i.e.
/// `φ = ∫c - ¼∫v² + γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnsatzState {
    pub m: f64,
    pub c: f64,
    pub v: f64,
    pub rho: f64,
    pub phase: f64,
    pub potential: PotentialSpec,
}

/// Potential factors at `ερ`.
#[derive(Clone, Copy, Debug)]
struct Factors {
    a: f64,
    a1: f64,
    a2: f64,
    amp: f64,
    /// `ã^m`
    amp_m: f64,
    /// `ã^{2m-1}`
    amp_2m1: f64,
}

impl AnsatzState {
    pub fn new(m: f64, c: f64, v: f64, rho: f64, phase: f64, potential: PotentialSpec) -> Self {
        AnsatzState { m, c, v, rho, phase, potential }
    }

    fn factors(&self) -> Factors {
        let r = self.potential.epsilon * self.rho;
        let a = self.potential.eval(r, 0);
        let amp = a.powf(1.0 / (self.m - 1.0));
        Factors {
            a,
            a1: self.potential.eval(r, 1),
            a2: self.potential.eval(r, 2),
            amp,
            amp_m: amp.powf(self.m),
            amp_2m1: amp.powf(2.0 * self.m - 1.0),
        }
    }

    /// `ã(ερ)`.
    pub fn amp(&self) -> f64 {
        self.factors().amp
    }

    /// `(f1, f2)`.
    pub fn f1_f2(&self) -> (f64, f64) {
        let f = self.factors();
        let m = self.m;
        (8.0 * f.a1 * self.c / ((m + 3.0) * f.a), 4.0 * f.a1 * self.c * self.v / ((5.0 - m) * f.a))
    }

    /// `(f3, f4)`; zero when the constants carry no second order data.
    pub fn f3_f4(&self, k: &ProfileConstants) -> (f64, f64) {
        let f = self.factors();
        let r = self.v * self.v / self.c;
        let d2 = f.a2 / f.a;
        let d11 = (f.a1 / f.a).powi(2);
        let [a1, a2, a3, a4] = k.alphas;
        let [b1, b2] = k.betas;
        ((a1 + a2 * r) * d2 + (a3 + a4 * r) * d11, (b1 * d2 + b2 * d11) * self.v / self.c)
    }
}

/// Ansatz sources of the first order system, as functions of `y` on `grid`.
pub fn first_order_sources(state: &AnsatzState, grid: &Grid) -> (RealField, RealField) {
    let (m, c, v) = (state.m, state.c, state.v);
    let f = state.factors();
    let pre = f.a1 / f.amp_m;
    let p = 1.0 / (m - 1.0);
    let sc = c.sqrt();
    let f1 = RealField::from_fn(grid, |y| {
        let qc = c.powf(p) * q(m, sc * y);
        pre * y * qc * (qc.powf(m - 1.0) - 4.0 * c / (m + 3.0))
    });
    let g1 = RealField::from_fn(grid, |y| {
        let qc = c.powf(p) * q(m, sc * y);
        let qcp = c.powf(p + 0.5) * q_prime(m, sc * y);
        pre * v * (qc + 2.0 * y * qcp) / (5.0 - m)
    });
    (f1, g1)
}

#[derive(Clone, Debug)]
pub struct FirstOrder {
    pub a1: RealField,
    pub b1: RealField,
    pub xi: f64,
    pub chi: f64,
}

/// Closed-form `A_{1,c}`, `B_{1,c}` as functions of `y` on `grid`.
pub fn first_order_profiles(state: &AnsatzState, grid: &Grid) -> Result<FirstOrder> {
    let (xi, chi) = xi_chi(state.m)?;
    let u = Unit { m: state.m, chi, xi };
    let (a1, b1) = first_order_eval(state, &u, grid.coords().iter().copied());
    Ok(FirstOrder {
        a1: RealField::new(grid.clone(), a1)?,
        b1: RealField::new(grid.clone(), b1)?,
        xi,
        chi,
    })
}

fn first_order_eval(state: &AnsatzState, u: &Unit, ys: impl Iterator<Item = f64>) -> (Vec<f64>, Vec<f64>) {
    let (m, c, v) = (state.m, state.c, state.v);
    let f = state.factors();
    let p = 1.0 / (m - 1.0);
    let ka = f.a1 / f.amp_m * c.powf(p - 0.5);
    let kb = f.a1 * v / f.amp_m * c.powf(p - 1.0);
    let sc = c.sqrt();
    ys.map(|y| (ka * u.a1(sc * y), kb * u.b1(sc * y))).unzip()
}

#[derive(Clone, Debug)]
pub struct SecondOrderSources {
    pub f2: RealField,
    pub g2: RealField,
    pub alphas: [f64; 4],
    pub betas: [f64; 2],
}

fn need_second_order(profiles: &CorrectionProfiles) -> Result<()> {
    if profiles.order < 2 {
        Err(NlsError::SecondOrderUndefined(profiles.m))
    } else {
        Ok(())
    }
}

/// `F̃₂`, `G̃₂` including the `f3`, `f4` counterterms.
pub fn second_order_sources(
    state: &AnsatzState,
    profiles: &CorrectionProfiles,
    grid: &Grid,
) -> Result<SecondOrderSources> {
    need_second_order(profiles)?;
    let (m, c, v) = (state.m, state.c, state.v);
    let f = state.factors();
    let u = profiles.unit();
    let p = 1.0 / (m - 1.0);
    let sc = c.sqrt();
    let r = v * v / c;
    let (f3, f4) = state.f3_f4(&profiles.constants);
    let k2 = f.a2 / f.amp_m;
    let k11 = f.a1 * f.a1 / f.amp_2m1;
    let f2 = RealField::from_fn(grid, |y| {
        let s = sc * y;
        let [fi, fii, fiii, fiv] = u.f2(s);
        c.powf(p) * (k2 * (fi + r * fii) + k11 * (fiii + r * fiv) - f3 / f.amp * q(m, s))
    });
    let g2 = RealField::from_fn(grid, |y| {
        let s = sc * y;
        let [gi, gii] = u.g2(s);
        c.powf(p - 0.5) * v * (k2 * gi + k11 * gii) - f4 / f.amp * c.powf(p + 0.5) * q_prime(m, s)
    });
    Ok(SecondOrderSources { f2, g2, alphas: profiles.constants.alphas, betas: profiles.constants.betas })
}

/// `(A_{2,c}, B_{2,c})` by constrained inversion on `grid` at the state's `c`.
pub fn second_order_profiles(
    state: &AnsatzState,
    profiles: &CorrectionProfiles,
    grid: &Grid,
) -> Result<(RealField, RealField)> {
    let src = second_order_sources(state, profiles, grid)?;
    let lp = LinearizedOperator::new(Sign::Plus, state.m, state.c, grid)?;
    let lm = LinearizedOperator::new(Sign::Minus, state.m, state.c, grid)?;
    let a2 = lp.solve_constrained(&src.f2, &lp.kernel())?;
    let b2 = lm.solve_constrained(&src.g2, &lm.kernel())?;
    Ok((a2, b2))
}

/// `(A_{2,c}, B_{2,c})` from the rescaled unit profiles.
fn second_order_eval(state: &AnsatzState, profiles: &CorrectionProfiles, ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (m, c, v) = (state.m, state.c, state.v);
    let f = state.factors();
    let p = 1.0 / (m - 1.0);
    let sc = c.sqrt();
    let r = v * v / c;
    let k2 = f.a2 / f.amp_m;
    let k11 = f.a1 * f.a1 / f.amp_2m1;
    let wa = [k2, k2 * r, k11, k11 * r].map(|w| w * c.powf(p - 1.0));
    let wb = [k2, k11].map(|w| w * v * c.powf(p - 1.5));
    ys.iter()
        .map(|&y| {
            let s = sc * y;
            let a: f64 = profiles.a2.iter().zip(wa).filter(|(_, w)| *w != 0.0).map(|(u, w)| w * u.eval(s)).sum();
            let b: f64 = profiles.b2.iter().zip(wb).filter(|(_, w)| *w != 0.0).map(|(u, w)| w * u.eval(s)).sum();
            (a, b)
        })
        .unzip()
}

/// `ũ` of the given order sampled on a 1D grid.
pub fn assemble_approximate_solution(
    state: &AnsatzState,
    profiles: &CorrectionProfiles,
    grid: &Grid,
    order: u8,
) -> Result<ComplexField> {
    if order > profiles.order {
        return Err(NlsError::SecondOrderUndefined(state.m));
    }
    if grid.dim() != 1 {
        return Err(NlsError::InvalidParameter("approximate solution is 1D".into()));
    }
    crate::soliton::check_clearance(grid, state.rho, state.c)?;
    let (m, c) = (state.m, state.c);
    let eps = state.potential.epsilon;
    let f = state.factors();
    let ys: Vec<f64> = grid.coords().iter().map(|x| x - state.rho).collect();
    let (a1, b1) = if order >= 1 { first_order_eval(state, &profiles.unit(), ys.iter().copied()) } else { (vec![], vec![]) };
    let (a2, b2) = if order >= 2 { second_order_eval(state, profiles, &ys) } else { (vec![], vec![]) };
    let p = 1.0 / (m - 1.0);
    let sc = c.sqrt();
    let values = ys
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let mut z = C64::new(c.powf(p) * q(m, sc * y) / f.amp, 0.0);
            if order >= 1 {
                z += eps * C64::new(a1[j], b1[j]);
            }
            if order >= 2 {
                z += eps * eps * C64::new(a2[j], b2[j]);
            }
            z * C64::from_polar(1.0, state.phase + 0.5 * state.v * (y + state.rho))
        })
        .collect();
    ComplexField::new(grid.clone(), values)
}

/// Parameter ODE driving the ansatz: `c' = εf2`, `v' = εf1`,
/// `ρ' = v + ε²f4`, `φ' = c - v²/4 - ½v'ρ + ε²f3`.
#[derive(Clone, Copy, Debug)]
pub struct ModulationOde {
    pub constants: ProfileConstants,
    /// Include `f3`, `f4` (second order ansatz).
    pub second_order: bool,
}

impl ModulationOde {
    pub fn rhs(&self, s: &AnsatzState) -> [f64; 4] {
        let eps = s.potential.epsilon;
        let (f1, f2) = s.f1_f2();
        let (f3, f4) = if self.second_order { s.f3_f4(&self.constants) } else { (0.0, 0.0) };
        let dv = eps * f1;
        [eps * f2, dv, s.v + eps * eps * f4, s.c - 0.25 * s.v * s.v - 0.5 * dv * s.rho + eps * eps * f3]
    }

    pub fn step(&self, s: &AnsatzState, dt: f64) -> AnsatzState {
        let add = |s: &AnsatzState, k: [f64; 4], h: f64| AnsatzState {
            c: s.c + h * k[0],
            v: s.v + h * k[1],
            rho: s.rho + h * k[2],
            phase: s.phase + h * k[3],
            ..*s
        };
        let k1 = self.rhs(s);
        let k2 = self.rhs(&add(s, k1, 0.5 * dt));
        let k3 = self.rhs(&add(s, k2, 0.5 * dt));
        let k4 = self.rhs(&add(s, k3, dt));
        let k: [f64; 4] = std::array::from_fn(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0);
        add(s, k, dt)
    }

    /// Integrate with RK4 using at most `max_dt` per step.
    pub fn advance(&self, s: &AnsatzState, t: f64, max_dt: f64) -> AnsatzState {
        if t == 0.0 {
            return *s;
        }
        let steps = (t.abs() / max_dt).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        (0..steps).fold(*s, |acc, _| self.step(&acc, h))
    }
}

/// Time step of the centered difference for `ũ_t`.
pub const RESIDUAL_DELTA: f64 = 1e-4;

/// `S[ũ] = iũ_t + ũ_xx + a(εx)|ũ|^{m-1}ũ` at the state, with `ũ_t` from a
/// Richardson-extrapolated centered difference along the parameter ODE.
pub fn residual_field(
    state: &AnsatzState,
    profiles: &CorrectionProfiles,
    grid: &Grid,
    order: u8,
) -> Result<ComplexField> {
    let ode = ModulationOde { constants: profiles.constants, second_order: order >= 2 };
    let d = RESIDUAL_DELTA;
    let at = |h: f64| assemble_approximate_solution(&ode.advance(state, h, d), profiles, grid, order);
    let (p1, m1, p2, m2) = (at(d)?, at(-d)?, at(2.0 * d)?, at(-2.0 * d)?);
    let u = assemble_approximate_solution(state, profiles, grid, order)?;
    let uxx = crate::grid::spectral_laplacian(&u);
    let pot = &state.potential;
    let e = (state.m - 1.0) / 2.0;
    let values = (0..u.values.len())
        .map(|j| {
            let d1 = (p1.values[j] - m1.values[j]) / (2.0 * d);
            let d2 = (p2.values[j] - m2.values[j]) / (4.0 * d);
            let ut = (4.0 * d1 - d2) / 3.0;
            let z = u.values[j];
            let nl = pot.at(grid.x(j)) * z.norm_sqr().powf(e) * z;
            C64::new(0.0, 1.0) * ut + uxx.values[j] + nl
        })
        .collect();
    ComplexField::new(grid.clone(), values)
}

/// `‖S[ũ]‖_{H¹}` at the state.
pub fn residual_norm(state: &AnsatzState, profiles: &CorrectionProfiles, grid: &Grid, order: u8) -> Result<f64> {
    Ok(residual_field(state, profiles, grid, order)?.h1_norm())
}

/// State of the effective trajectory at `ρ = 0` for a soliton launched with
/// `c = 1`, speed `v0` from the left flat region.
pub fn center_state(m: f64, v0: f64, potential: PotentialSpec) -> AnsatzState {
    let q = 4.0 / (5.0 - m);
    let c = (potential.eval(0.0, 0) / potential.a_minus).powf(q);
    let slope = 4.0 * ScalingExponents::new(m).lambda0;
    let v = (v0 * v0 + slope * (c - 1.0)).sqrt();
    AnsatzState::new(m, c, v, 0.0, 0.0, potential)
}
