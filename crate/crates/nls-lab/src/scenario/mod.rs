//! Scenario orchestration: solver, tracker, effective ODE and predictions,
//! with results written to an optional bundle directory.

use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;

use crate::bundle::{Bundle, Manifest, REPORT};
use crate::config::{Scenario, ScenarioKind};

mod free;
mod one_d;
mod scaling;
mod suites;
mod two_d;

pub use free::{free_soliton, FreeSolitonSummary};
pub use one_d::{soliton_1d, Soliton1DSummary};
pub use scaling::{convergence_study, residual_scaling, ConvergenceSummary, ResidualScalingSummary};
pub use suites::{identity_suite, operator_grid, operator_suite, profile_residual, IdentitySummary, OperatorSummary};
pub use two_d::{interaction_2d, refraction_2d, Interaction2DSummary, Refraction2DSummary, SOLVER_TOLERANCE};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, passed: value < threshold }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, passed: value >= threshold }
    }

    /// Passes when `|value - target| <= tol`; records the deviation.
    pub fn near(name: &str, value: f64, target: f64, tol: f64) -> Self {
        let dev = (value - target).abs();
        Check { name: name.into(), value: dev, threshold: tol, passed: dev <= tol }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, threshold: 1.0, passed: ok }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub kind: ScenarioKind,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Run abort or lock loss, if any.
    pub failure: Option<String>,
    pub summary: serde_json::Value,
    pub bundle: Option<PathBuf>,
}

impl ScenarioReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// What a runner hands back to [`run_scenario`].
pub struct Outcome<S> {
    pub checks: Vec<Check>,
    pub failure: Option<String>,
    pub summary: S,
    pub resolved: serde_json::Value,
}

fn finish<S: Serialize>(s: &Scenario, out: Outcome<S>, bundle: Option<Bundle>) -> anyhow::Result<ScenarioReport> {
    let passed = out.failure.is_none() && out.checks.iter().all(|c| c.passed);
    let mut report = ScenarioReport {
        name: s.name.clone(),
        kind: s.kind,
        passed,
        checks: out.checks,
        failure: out.failure,
        summary: serde_json::to_value(&out.summary)?,
        bundle: None,
    };
    if let Some(mut b) = bundle {
        b.write_json(REPORT, &report)?;
        let manifest = Manifest {
            name: s.name.clone(),
            kind: format!("{:?}", s.kind),
            version: env!("CARGO_PKG_VERSION").into(),
            passed,
            files: Vec::new(),
            config: serde_json::to_value(s)?,
            resolved: out.resolved,
        };
        report.bundle = Some(b.finish(manifest)?);
    }
    Ok(report)
}

/// Run a scenario, writing a bundle when `output.dir` is set.
pub fn run_scenario(s: &Scenario) -> anyhow::Result<ScenarioReport> {
    s.validate()?;
    let mut bundle = match &s.output.dir {
        Some(d) => Some(Bundle::create(d)?),
        None => None,
    };
    let ctx = || format!("scenario {} ({:?})", s.name, s.kind);
    let b = bundle.as_mut();
    match s.kind {
        ScenarioKind::FreeSoliton => finish(s, free_soliton(s, b).with_context(ctx)?, bundle),
        ScenarioKind::Interaction1D | ScenarioKind::Reflection1D => {
            finish(s, soliton_1d(s, b).with_context(ctx)?, bundle)
        }
        ScenarioKind::Interaction2D => finish(s, interaction_2d(s, b).with_context(ctx)?, bundle),
        ScenarioKind::Refraction2D => finish(s, refraction_2d(s, b).with_context(ctx)?, bundle),
        ScenarioKind::IdentitySuite => finish(s, identity_suite(s.m, b).with_context(ctx)?, bundle),
        ScenarioKind::OperatorSuite => finish(s, operator_suite(s.m, b).with_context(ctx)?, bundle),
        ScenarioKind::ResidualScaling => finish(s, residual_scaling(s, b).with_context(ctx)?, bundle),
        ScenarioKind::ConvergenceStudy => finish(s, convergence_study(s, b).with_context(ctx)?, bundle),
    }
}
