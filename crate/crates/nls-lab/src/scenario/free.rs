use nls_core::grid::Grid;
use nls_core::modulation::Tracker;
use nls_core::potential::PotentialSpec;
use nls_core::soliton::{traveling_wave, SolitonParams};
use nls_core::solver::{evolve, evolve_observed, SolverConfig};
use serde::Serialize;

use super::{Check, Outcome};
use crate::bundle::{Bundle, COMPARISON};
use crate::config::Scenario;

#[derive(Clone, Debug, Serialize)]
pub struct FreeSolitonSummary {
    pub sup_error: f64,
    pub sup_error_double_dt: f64,
    pub halving_ratio: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub fitted_c_drift: f64,
    pub fitted_v_drift: f64,
    pub steps: usize,
}

/// Exact traveling wave in `a ≡ 1` compared with the closed form at `t_free`,
/// repeated at `2·dt` for the convergence order.
pub fn free_soliton(s: &Scenario, bundle: Option<&mut Bundle>) -> anyhow::Result<Outcome<FreeSolitonSummary>> {
    let grid = Grid::new(s.grid.n.unwrap_or(2048), s.grid.length.unwrap_or(200.0), 1)?;
    let pot = PotentialSpec::uniform(1.0);
    let v = s.v0.unwrap_or(1.0);
    let p = SolitonParams::new(s.m, s.c0, v, -0.5 * v * s.t_free);
    let u0 = traveling_wave(&p, &grid, 0.0)?;
    let exact = traveling_wave(&p, &grid, s.t_free)?;

    let cfg = SolverConfig::new(s.m, pot, s.dt, 0.0, s.t_free).with_stride(s.stride);
    let mut tracker = Tracker::new(pot, p, 0.0);
    let mut hard = None;
    let run = evolve_observed(&u0, &cfg, |t, u| {
        if let Err(e) = tracker.push(t, u) {
            hard.get_or_insert(e);
        }
    })?;
    if let Some(e) = hard {
        return Err(e.into());
    }
    let track = tracker.finish();
    let coarse = evolve(&u0, &SolverConfig { dt: 2.0 * s.dt, ..cfg })?;
    let sup_error = run.field.sup_distance(&exact)?;
    let sup_error_double_dt = coarse.field.sup_distance(&exact)?;
    let drift = |f: fn(&SolitonParams) -> f64| {
        track.params.iter().map(|q| (f(q) - f(&p)).abs()).fold(0.0, f64::max)
    };
    let summary = FreeSolitonSummary {
        sup_error,
        sup_error_double_dt,
        halving_ratio: sup_error_double_dt / sup_error,
        mass_drift: run.diagnostics.mass_drift(),
        energy_drift: run.diagnostics.energy_drift(),
        fitted_c_drift: drift(|q| q.c),
        fitted_v_drift: drift(|q| q.v),
        steps: run.steps,
    };
    let checks = vec![
        Check::below("sup_error", summary.sup_error, 1e-6),
        Check::below("mass_drift", summary.mass_drift, 1e-12),
        Check::near("halving_ratio", summary.halving_ratio, 4.0, 0.5),
        Check::below("fitted_c_drift", summary.fitted_c_drift, 1e-6),
        Check::below("fitted_v_drift", summary.fitted_v_drift, 1e-6),
    ];
    let failure = run.abort.as_ref().map(|e| e.to_string()).or(track.lost_lock.as_ref().map(|l| l.1.clone()));
    if let Some(b) = bundle {
        b.write_diagnostics(&run.diagnostics, None)?;
        b.write_track(&track)?;
        b.write_json(COMPARISON, &summary)?;
    }
    let resolved = serde_json::json!({ "n": grid.n(), "length": grid.length(), "t1": s.t_free, "v0": v });
    Ok(Outcome { checks, failure, summary, resolved })
}
