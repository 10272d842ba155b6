use nls_core::grid::{laplacian_real, Grid, RealField};
use nls_core::linearized::{negative_eigenvalue, spectral_checks, SpectralReport};
use nls_core::profiles::CorrectionProfiles;
use nls_core::soliton::{check_identities, soliton_profile};
use nls_core::verify::{check_grid, check_state, verify_first_order, verify_second_order, FirstOrderCheck, SecondOrderCheck};
use serde::Serialize;

use super::{Check, Outcome};
use crate::bundle::Bundle;

pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentitySummary {
    pub m: f64,
    /// `‖Q'' - Q + Q^m‖∞` over `c ∈ {0.5, 1, 4}` on a fine sample.
    pub profile_residual: f64,
    pub identities: Vec<IdentityRow>,
}

/// `‖Q_c'' - cQ_c + Q_c^m‖∞` over `c ∈ {0.5, 1, 4}`, differentiating the
/// sampled profile spectrally.
pub fn profile_residual(m: f64) -> anyhow::Result<f64> {
    let grid = Grid::new(4096, 80.0, 1)?;
    let mut worst: f64 = 0.0;
    for c in [0.5, 1.0, 4.0] {
        let qc = RealField::from_fn(&grid, |x| soliton_profile(m, c, x));
        let lap = laplacian_real(&qc);
        let r = lap.zip_with(&qc, |d2, v| d2 - c * v + v.powf(m))?;
        worst = worst.max(r.sup_norm());
    }
    Ok(worst)
}

pub fn identity_suite(m: f64, bundle: Option<&mut Bundle>) -> anyhow::Result<Outcome<IdentitySummary>> {
    let rep = check_identities(m)?;
    let identities: Vec<IdentityRow> = rep
        .checks
        .iter()
        .map(|c| IdentityRow { name: c.name.trim().to_string(), lhs: c.lhs, rhs: c.rhs, rel_error: c.rel_error })
        .collect();
    let summary = IdentitySummary { m, profile_residual: profile_residual(m)?, identities };
    let mut checks = vec![Check::below("profile_residual", summary.profile_residual, 1e-9)];
    checks.extend(summary.identities.iter().map(|r| Check::below(&r.name, r.rel_error, IDENTITY_TOL)));
    if let Some(b) = bundle {
        b.write_json("identities.json", &summary)?;
    }
    Ok(Outcome { checks, failure: None, summary, resolved: serde_json::Value::Null })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralRow {
    pub c: f64,
    pub kernel_plus: f64,
    pub kernel_minus: f64,
    pub lambda_identity: f64,
    pub lambda_m: f64,
    pub lambda_m_closed_form: f64,
    pub eigen_residual: f64,
    pub constrained_min: f64,
}

impl From<&SpectralReport> for SpectralRow {
    fn from(r: &SpectralReport) -> Self {
        SpectralRow {
            c: r.c,
            kernel_plus: r.kernel_plus,
            kernel_minus: r.kernel_minus,
            lambda_identity: r.lambda_identity,
            lambda_m: r.lambda_m(),
            lambda_m_closed_form: negative_eigenvalue(r.m, r.c),
            eigen_residual: r.eigen_residual,
            constrained_min: r.constrained_min,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorSummary {
    pub m: f64,
    pub spectral: Vec<SpectralRow>,
    pub first_order: FirstOrderSerde,
    pub second_order: Option<SecondOrderSerde>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderSerde {
    pub a1_error: f64,
    pub b1_error: f64,
    pub orthogonality: f64,
}

impl From<FirstOrderCheck> for FirstOrderSerde {
    fn from(f: FirstOrderCheck) -> Self {
        FirstOrderSerde { a1_error: f.a1_error, b1_error: f.b1_error, orthogonality: f.orthogonality }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondOrderSerde {
    pub projections: [f64; 2],
    pub parity: f64,
    pub orthogonality: f64,
    pub alphas: [f64; 4],
    pub betas: [f64; 2],
}

impl From<SecondOrderCheck> for SecondOrderSerde {
    fn from(s: SecondOrderCheck) -> Self {
        SecondOrderSerde {
            projections: s.projections,
            parity: s.parity,
            orthogonality: s.orthogonality,
            alphas: s.alphas,
            betas: s.betas,
        }
    }
}

/// Grid used for the kernel and eigenvalue checks.
pub fn operator_grid() -> anyhow::Result<Grid> {
    Ok(Grid::new(4096, 120.0, 1)?)
}

/// Kernel, scaling and eigenvalue checks of `L±`, plus the first- and
/// second-order profile cross-checks.
pub fn operator_suite(m: f64, bundle: Option<&mut Bundle>) -> anyhow::Result<Outcome<OperatorSummary>> {
    let grid = operator_grid()?;
    let spectral: Vec<SpectralRow> = [0.5, 1.0, 4.0]
        .iter()
        .map(|&c| spectral_checks(m, c, &grid).map(|r| SpectralRow::from(&r)))
        .collect::<Result<_, _>>()?;
    let first: FirstOrderCheck = verify_first_order(&check_state(m, 1.0), &check_grid()?)?;
    let second = if m >= 3.0 {
        let p = CorrectionProfiles::build(m)?;
        Some(verify_second_order(&p, &check_state(m, 1.6), &Grid::new(1024, 60.0, 1)?)?)
    } else {
        None
    };
    let mut checks = Vec::new();
    for r in &spectral {
        let tag = |s: &str| format!("{s} (c={})", r.c);
        checks.push(Check::below(&tag("kernel_plus"), r.kernel_plus, 1e-9));
        checks.push(Check::below(&tag("kernel_minus"), r.kernel_minus, 1e-9));
        checks.push(Check::below(&tag("lambda_identity"), r.lambda_identity, 1e-8));
        checks.push(Check::near(&tag("lambda_m"), r.lambda_m, r.lambda_m_closed_form, 1e-6));
    }
    checks.push(Check::below("first_order_sup_error", first.sup_error(), 1e-6));
    checks.push(Check::below("first_order_orthogonality", first.orthogonality, 1e-8));
    if let Some(s2) = &second {
        checks.push(Check::below("counterterm_projection", s2.projections[0].max(s2.projections[1]), 1e-8));
        checks.push(Check::below("second_order_parity", s2.parity, 1e-8));
        checks.push(Check::below("second_order_orthogonality", s2.orthogonality, 1e-8));
        checks.push(Check::flag("alpha_beta_signs", s2.signs_ok()));
    }
    let summary = OperatorSummary { m, spectral, first_order: first.into(), second_order: second.map(Into::into) };
    if let Some(b) = bundle {
        b.write_json("operators.json", &summary)?;
    }
    Ok(Outcome { checks, failure: None, summary, resolved: serde_json::Value::Null })
}
