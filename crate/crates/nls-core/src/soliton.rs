//! Ground states of `Q'' - cQ + Q^m = 0`, their scalings, traveling waves and
//! the classical integral identities.

use num_complex::Complex64 as C64;

use crate::error::{NlsError, Result};
use crate::grid::{spectral_shift, ComplexField, FftPlan, Grid, RealField};

/// Exponents attached to the nonlinearity `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingExponents {
    pub theta: f64,
    pub lambda0: f64,
    pub p_m: u32,
}

impl ScalingExponents {
    pub fn new(m: f64) -> Self {
        ScalingExponents {
            theta: 1.0 / (m - 1.0) - 0.25,
            lambda0: (5.0 - m) / (m + 3.0),
            p_m: if m < 3.0 { 1 } else { 2 },
        }
    }
}

/// Reject exponents outside `[2, 5)` in 1D or `[2, 3)` in 2D.
pub fn check_exponent(m: f64, dim: usize) -> Result<()> {
    let upper = if dim == 1 { 5.0 } else { 3.0 };
    if m >= 2.0 && m < upper {
        Ok(())
    } else {
        Err(NlsError::InvalidParameter(format!("m = {m} outside [2, {upper}) for dim {dim}")))
    }
}

fn sech2(z: f64) -> f64 {
    if z.abs() > 350.0 {
        0.0
    } else {
        1.0 / z.cosh().powi(2)
    }
}

/// Unit soliton `Q(s)`.
pub fn q(m: f64, s: f64) -> f64 {
    (0.5 * (m + 1.0) * sech2(0.5 * (m - 1.0) * s)).powf(1.0 / (m - 1.0))
}

/// `Q'(s) = -tanh((m-1)s/2) Q(s)`.
pub fn q_prime(m: f64, s: f64) -> f64 {
    -(0.5 * (m - 1.0) * s).tanh() * q(m, s)
}

/// `Q''(s) = Q - Q^m`.
pub fn q_second(m: f64, s: f64) -> f64 {
    let v = q(m, s);
    v - v.powf(m)
}

/// `Q_c(x) = c^{1/(m-1)} Q(√c x)`.
pub fn soliton_profile(m: f64, c: f64, x: f64) -> f64 {
    c.powf(1.0 / (m - 1.0)) * q(m, c.sqrt() * x)
}

/// `Q_c'(x)`.
pub fn soliton_derivative(m: f64, c: f64, x: f64) -> f64 {
    c.powf(1.0 / (m - 1.0) + 0.5) * q_prime(m, c.sqrt() * x)
}

/// `Q_c''(x) = c Q_c - Q_c^m`.
pub fn soliton_second(m: f64, c: f64, x: f64) -> f64 {
    let v = soliton_profile(m, c, x);
    c * v - v.powf(m)
}

/// `ΛQ_c = ∂_c Q_c = (Q_c/(m-1) + x Q_c'/2)/c`.
pub fn lambda_q(m: f64, c: f64, x: f64) -> f64 {
    (soliton_profile(m, c, x) / (m - 1.0) + 0.5 * x * soliton_derivative(m, c, x)) / c
}

/// `(ΛQ_c)'`.
pub fn lambda_q_derivative(m: f64, c: f64, x: f64) -> f64 {
    let d1 = soliton_derivative(m, c, x);
    (d1 / (m - 1.0) + 0.5 * d1 + 0.5 * x * soliton_second(m, c, x)) / c
}

/// Modulation parameters of a 1D soliton. `amp` divides the profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonParams {
    pub m: f64,
    pub c: f64,
    pub v: f64,
    pub rho: f64,
    pub gamma: f64,
    pub amp: f64,
}

impl SolitonParams {
    pub fn new(m: f64, c: f64, v: f64, rho: f64) -> Self {
        SolitonParams { m, c, v, rho, gamma: 0.0, amp: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.m, 1)?;
        if !(self.c > 0.0 && self.amp > 0.0) {
            return Err(NlsError::InvalidParameter(format!("c and amp must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Require the soliton centered at `center` to stay 10 e-folds from the edge.
pub fn check_clearance(grid: &Grid, center: f64, c: f64) -> Result<()> {
    let reach = center.abs() + 10.0 / c.sqrt();
    if reach > 0.5 * grid.length() {
        return Err(NlsError::BoundaryProximity(format!(
            "center {center:.3} with decay length {:.3} needs half-length {reach:.3} > {:.3}",
            1.0 / c.sqrt(),
            0.5 * grid.length()
        )));
    }
    Ok(())
}

/// Frozen-parameter traveling wave `Q_c(x-ρ-vt)/amp · e^{i(ct + vx/2 - v²t/4 + γ)}`.
pub fn traveling_wave(p: &SolitonParams, grid: &Grid, t: f64) -> Result<ComplexField> {
    p.validate()?;
    if grid.dim() != 1 {
        return Err(NlsError::InvalidParameter("traveling_wave expects a 1D grid".into()));
    }
    let center = p.rho + p.v * t;
    check_clearance(grid, center, p.c)?;
    let base = p.c * t - 0.25 * p.v * p.v * t + p.gamma;
    Ok(ComplexField::from_fn(grid, |x| {
        let amp = soliton_profile(p.m, p.c, x - center) / p.amp;
        C64::from_polar(amp, base + 0.5 * p.v * x)
    }))
}

/// Modulation parameters of a 2D soliton.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonParams2D {
    pub m: f64,
    pub c: f64,
    pub v: [f64; 2],
    pub rho: [f64; 2],
    pub gamma: f64,
    pub amp: f64,
}

/// Numerical 2D ground state of `ΔQ - cQ + Q^m = 0`, centered at the origin.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub m: f64,
    pub c: f64,
    pub profile: RealField,
    pub residual: f64,
    pub iterations: usize,
}

impl GroundState {
    /// `∫Q^{m+1} / ∫Q²`.
    pub fn kappa(&self) -> f64 {
        let num: f64 = self.profile.values.iter().map(|q| q.abs().powf(self.m + 1.0)).sum();
        let den: f64 = self.profile.values.iter().map(|q| q * q).sum();
        num / den
    }

    /// Relative defect of `∫Q^{m+1} = ((m+1)/2) ∫Q²`, valid for `c = 1`.
    pub fn pohozaev_defect(&self) -> f64 {
        let k = self.kappa();
        let target = 0.5 * (self.m + 1.0);
        (k - target).abs() / target
    }

    /// Largest `|Q(x) - Q(-x)|` and `|Q(x1,x2) - Q(x2,x1)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let g = &self.profile.grid;
        let n = g.n();
        let v = &self.profile.values;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let idx = g.index2(i, j);
                worst = worst.max((v[idx] - v[g.mirror(idx)]).abs());
                worst = worst.max((v[idx] - v[g.index2(j, i)]).abs());
            }
        }
        worst
    }
}

/// 2D ground state for `c = 1`.
pub fn ground_state_2d(m: f64, grid: &Grid) -> Result<GroundState> {
    ground_state_2d_scaled(m, 1.0, grid, 1e-10, 2000)
}

/// Petviashvili iteration for `-ΔQ + cQ = Q^m` on a 2D grid.
pub fn ground_state_2d_scaled(
    m: f64,
    c: f64,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<GroundState> {
    check_exponent(m, 2)?;
    if grid.dim() != 2 {
        return Err(NlsError::InvalidParameter("ground_state_2d expects a 2D grid".into()));
    }
    if !(c > 0.0) {
        return Err(NlsError::InvalidParameter(format!("c must be positive, got {c}")));
    }
    let n = grid.n();
    let k = grid.wavenumbers();
    let symbol: Vec<f64> = (0..n * n).map(|idx| k[idx / n].powi(2) + k[idx % n].powi(2) + c).collect();
    let plan = FftPlan::new(grid);
    let power = |x: f64| x.abs().powf(m - 1.0) * x;
    let stab = m / (m - 1.0);
    let cell = grid.cell();

    let mut q: Vec<f64> = RealField::from_fn_2d(grid, |x, y| (-(x * x + y * y)).exp()).values;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let mut qh: Vec<C64> = q.iter().map(|&v| C64::new(v, 0.0)).collect();
        let mut nh: Vec<C64> = q.iter().map(|&v| C64::new(power(v), 0.0)).collect();
        plan.forward(&mut qh);
        plan.forward(&mut nh);

        // residual of the current iterate: (-|k|² - c) q̂ + N̂
        let mut res: Vec<C64> = qh.iter().zip(&nh).zip(&symbol).map(|((a, b), s)| b - a * s).collect();
        plan.inverse(&mut res);
        residual = (res.iter().map(|z| z.re * z.re).sum::<f64>() * cell).sqrt();
        if residual < tol {
            return Ok(GroundState {
                m,
                c,
                profile: RealField::new(grid.clone(), q)?,
                residual,
                iterations: it,
            });
        }

        let s1: f64 = qh.iter().zip(&symbol).map(|(a, s)| s * a.norm_sqr()).sum();
        let s2: f64 = qh.iter().zip(&nh).map(|(a, b)| (a.conj() * b).re).sum();
        if !(s2 > 0.0) {
            break;
        }
        let factor = (s1 / s2).powf(stab);
        let mut next: Vec<C64> = nh.iter().zip(&symbol).map(|(b, s)| b * (factor / s)).collect();
        plan.inverse(&mut next);
        q = next.iter().map(|z| z.re).collect();
    }
    Err(NlsError::NoConvergence { iterations: max_iter, residual })
}

/// `Q_c(x - ρ - vt)/amp · e^{i(ct + v·x/2 - |v|²t/4 + γ)}` built from a 2D ground state.
pub fn traveling_wave_2d(
    p: &SolitonParams2D,
    ground: &GroundState,
    grid: &Grid,
    t: f64,
) -> Result<ComplexField> {
    grid.ensure_same(&ground.profile.grid)?;
    if (ground.c - p.c).abs() > 1e-12 * p.c || ground.m != p.m {
        return Err(NlsError::InvalidParameter("ground state does not match (m, c)".into()));
    }
    let center = [p.rho[0] + p.v[0] * t, p.rho[1] + p.v[1] * t];
    for x in center {
        check_clearance(grid, x, p.c)?;
    }
    let mut f = ground.profile.to_complex();
    f = spectral_shift(&f, 0, center[0]);
    f = spectral_shift(&f, 1, center[1]);
    let v2 = p.v[0] * p.v[0] + p.v[1] * p.v[1];
    let base = p.c * t - 0.25 * v2 * t + p.gamma;
    let n = grid.n();
    for i in 0..n {
        for j in 0..n {
            let idx = grid.index2(i, j);
            let phase = base + 0.5 * (p.v[0] * grid.x(i) + p.v[1] * grid.x(j));
            f.values[idx] = C64::from_polar(f.values[idx].re / p.amp, phase);
        }
    }
    Ok(f)
}

#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub m: f64,
    pub checks: Vec<IdentityCheck>,
    pub tolerance: f64,
}

impl IdentityReport {
    pub fn max_rel_error(&self) -> f64 {
        self.checks.iter().fold(0.0, |acc, c| acc.max(c.rel_error))
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() < self.tolerance
    }

    /// First check whose name starts with `prefix`.
    pub fn get(&self, prefix: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name.starts_with(prefix))
    }
}

struct Moments {
    grid: Grid,
    m: f64,
}

impl Moments {
    fn int(&self, f: impl Fn(f64) -> f64) -> f64 {
        RealField::from_fn(&self.grid, f).integrate()
    }

    fn energy(&self, c: f64) -> f64 {
        let m = self.m;
        0.5 * self.int(|y| soliton_derivative(m, c, y).powi(2))
            - self.int(|y| soliton_profile(m, c, y).powf(m + 1.0)) / (m + 1.0)
    }
}

/// Verify the integral identities of the 1D soliton by quadrature.
pub fn check_identities(m: f64) -> Result<IdentityReport> {
    check_exponent(m, 1)?;
    let grid = Grid::new(8192, 160.0, 1)?;
    let mom = Moments { grid, m };
    let ex = ScalingExponents::new(m);
    let (th, l0) = (ex.theta, ex.lambda0);
    let c = 4.0;

    let q = |y: f64| soliton_profile(m, 1.0, y);
    let qp = |y: f64| soliton_derivative(m, 1.0, y);
    let int_q = mom.int(q);
    let int_q2 = mom.int(|y| q(y).powi(2));
    let int_y2q2 = mom.int(|y| y * y * q(y).powi(2));
    let int_y4q2 = mom.int(|y| y.powi(4) * q(y).powi(2));
    let e1 = mom.energy(1.0);

    let mut checks = Vec::new();
    let mut push_scaled = |name: &'static str, lhs: f64, rhs: f64, scale: f64| {
        let rel_error = (lhs - rhs).abs() / rhs.abs().max(scale).max(1e-300);
        checks.push(IdentityCheck { name, lhs, rhs, rel_error });
    };
    // ∫ΛQ_c vanishes identically at m = 3, so measure it against ∫|ΛQ_c|
    let lq_scale = mom.int(|y| lambda_q(m, c, y).abs());
    push_scaled("∫ΛQ_c = (θ-1/4)c^(θ-5/4) ∫Q", mom.int(|y| lambda_q(m, c, y)), (th - 0.25) * c.powf(th - 1.25) * int_q, lq_scale);
    let mut push = |name: &'static str, lhs: f64, rhs: f64| push_scaled(name, lhs, rhs, 0.0);
    push("E1[Q] = -λ0/2 ∫Q²", e1, -0.5 * l0 * int_q2);
    push("∫Q_c = c^(θ-1/4) ∫Q", mom.int(|y| soliton_profile(m, c, y)), c.powf(th - 0.25) * int_q);
    push("∫Q_c² = c^(2θ) ∫Q²", mom.int(|y| soliton_profile(m, c, y).powi(2)), c.powf(2.0 * th) * int_q2);
    push("E1[Q_c] = c^(2θ+1) E1[Q]", mom.energy(c), c.powf(2.0 * th + 1.0) * e1);
    push(
        "∫Q_c^(m+1) = 2(m+1)c^(2θ+1)/(m+3) ∫Q²",
        mom.int(|y| soliton_profile(m, c, y).powf(m + 1.0)),
        2.0 * (m + 1.0) * c.powf(2.0 * th + 1.0) / (m + 3.0) * int_q2,
    );
    push(
        "∫ΛQ_c Q_c = θc^(2θ-1) ∫Q²",
        mom.int(|y| lambda_q(m, c, y) * soliton_profile(m, c, y)),
        th * c.powf(2.0 * th - 1.0) * int_q2,
    );
    push("∫Q'² = (m-1)/(m+3) ∫Q²", mom.int(|y| qp(y).powi(2)), (m - 1.0) / (m + 3.0) * int_q2);
    push(
        "∫y²Q^(m+1) = (m+1)/(m+3) (2∫y²Q² - ∫Q²)",
        mom.int(|y| y * y * q(y).powf(m + 1.0)),
        (m + 1.0) / (m + 3.0) * (2.0 * int_y2q2 - int_q2),
    );
    push(
        "∫y⁴Q^(m+1) = (m+1)/(m+3) (2∫y⁴Q² - 6∫y²Q²)",
        mom.int(|y| y.powi(4) * q(y).powf(m + 1.0)),
        (m + 1.0) / (m + 3.0) * (2.0 * int_y4q2 - 6.0 * int_y2q2),
    );
    push(
        "∫y²Q'² = 2/(m+3) ∫Q² + (m-1)/(m+3) ∫y²Q²",
        mom.int(|y| y * y * qp(y).powi(2)),
        2.0 / (m + 3.0) * int_q2 + (m - 1.0) / (m + 3.0) * int_y2q2,
    );
    Ok(IdentityReport { m, checks, tolerance: 1e-8 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian_real;
    use approx::assert_abs_diff_eq;

    #[test]
    fn peak_values() {
        assert_abs_diff_eq!(soliton_profile(3.0, 1.0, 0.0), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(soliton_profile(2.0, 1.0, 0.0), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(soliton_profile(3.0, 4.0, 0.0), 2.0 * 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(lambda_q(3.0, 1.0, 0.0), 2f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn exponents() {
        let e = ScalingExponents::new(3.0);
        assert_abs_diff_eq!(e.theta, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(e.lambda0, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(e.p_m, 2);
        assert_eq!(ScalingExponents::new(2.5).p_m, 1);
    }

    #[test]
    fn lambda_q_is_c_derivative() {
        let h = 1e-5;
        for &(m, c) in &[(2.0, 1.0), (3.0, 0.7), (4.0, 2.0)] {
            for &x in &[-1.3, 0.0, 0.4, 2.5] {
                let fd = (soliton_profile(m, c + h, x) - soliton_profile(m, c - h, x)) / (2.0 * h);
                assert_abs_diff_eq!(fd, lambda_q(m, c, x), epsilon = 1e-8);
                let fd = (lambda_q(m, c, x + h) - lambda_q(m, c, x - h)) / (2.0 * h);
                assert_abs_diff_eq!(fd, lambda_q_derivative(m, c, x), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn laplacian_of_cubic_soliton() {
        let g = Grid::new(2048, 100.0, 1).unwrap();
        let qf = RealField::from_fn(&g, |x| q(3.0, x));
        let lap = laplacian_real(&qf);
        for j in 0..g.n() {
            let v = qf.values[j];
            assert_abs_diff_eq!(lap.values[j], v - v.powi(3), epsilon = 1e-10);
        }
    }

    #[test]
    fn traveling_wave_phase_and_position() {
        let g = Grid::new(1024, 100.0, 1).unwrap();
        let mut p = SolitonParams::new(3.0, 1.0, 0.0, 0.0);
        let f = traveling_wave(&p, &g, 0.0).unwrap();
        let mid = g.n() / 2;
        assert_abs_diff_eq!(f.values[mid].re, 2f64.sqrt(), epsilon = 1e-14);
        p.gamma = std::f64::consts::FRAC_PI_2;
        let f = traveling_wave(&p, &g, 0.0).unwrap();
        assert_abs_diff_eq!(f.values[mid].im, 2f64.sqrt(), epsilon = 1e-14);
        let p = SolitonParams::new(3.0, 1.0, 1.0, 0.0);
        let f = traveling_wave(&p, &g, 5.0).unwrap();
        let arg = (0..g.n()).max_by(|&a, &b| f.values[a].norm().total_cmp(&f.values[b].norm())).unwrap();
        assert!((g.x(arg) - 5.0).abs() <= g.dx());
    }

    #[test]
    fn traveling_wave_near_boundary_fails() {
        let g = Grid::new(256, 40.0, 1).unwrap();
        let p = SolitonParams::new(3.0, 1.0, 0.0, 15.0);
        assert!(matches!(traveling_wave(&p, &g, 0.0), Err(NlsError::BoundaryProximity(_))));
    }

    #[test]
    fn identities_m3_values() {
        let rep = check_identities(3.0).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let e1 = rep.get("E1[Q] ").unwrap();
        assert_abs_diff_eq!(e1.lhs, -2.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn identities_m2_energy_ratio() {
        let rep = check_identities(2.0).unwrap();
        let e1 = rep.get("E1[Q] ").unwrap();
        let g = Grid::new(8192, 160.0, 1).unwrap();
        let q2 = RealField::from_fn(&g, |y| q(2.0, y).powi(2)).integrate();
        assert_abs_diff_eq!(e1.lhs / q2, -0.3, epsilon = 1e-8);
    }

    #[test]
    fn ground_state_2d_small() {
        let g = Grid::new(64, 30.0, 2).unwrap();
        let gs = ground_state_2d_scaled(2.0, 1.0, &g, 1e-9, 2000).unwrap();
        assert!(gs.residual < 1e-9);
        assert!(gs.symmetry_defect() < 1e-10);
        assert!(gs.profile.values.iter().all(|&v| v > -1e-10));
    }
}
