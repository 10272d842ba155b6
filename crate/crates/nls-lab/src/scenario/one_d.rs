use nls_core::effective::{predict_outcome, EffectiveSystem, Outcome as Kind};
use nls_core::modulation::Tracker;
use nls_core::potential::Direction;
use nls_core::profiles::{center_state, first_order_profiles, second_order_profiles, CorrectionProfiles};
use nls_core::grid::Grid;
use nls_core::profiles::{REFERENCE_LENGTH, REFERENCE_N};
use nls_core::soliton::{traveling_wave, SolitonParams};
use nls_core::solver::{evolve_observed, momentum_law_residual, SolverConfig};
use serde::Serialize;

use super::{Check, Outcome};
use crate::bundle::{Bundle, COMPARISON, PREDICTION};
use crate::config::{Horizon, Scenario, ScenarioKind};
use crate::reference::{sized_grid, Reference};

/// Relative tolerance on the asymptotic parameters.
pub const PARAMETER_TOL: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct Soliton1DSummary {
    pub outcome: String,
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
    pub length: f64,
    pub c_inf: f64,
    pub v_inf: f64,
    pub final_c: f64,
    pub final_v: f64,
    pub c_rel_error: f64,
    pub v_rel_error: f64,
    pub max_remainder_h1: f64,
    pub remainder_order: u8,
    pub ode_final_c: f64,
    pub ode_final_v: f64,
    pub ode_rel_error: f64,
    pub ode_max_invariant_drift: f64,
    pub turning_points: usize,
    pub c_turn_ode: Option<f64>,
    pub c_turn_predicted: Option<f64>,
    /// Smallest `dP/dt` times the sign of `a'`.
    pub min_signed_dpdt: f64,
    pub max_abs_dpdt: f64,
    pub max_law_residual: f64,
    /// Largest `|ρ' - v|/|v|` over interior samples with `|v| > 0.1`.
    pub max_rho_velocity_mismatch: f64,
    pub mass_drift: f64,
    pub max_spectral_tail: f64,
    pub samples: usize,
    pub steps: usize,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Transmission or reflection run compared with the effective dynamics.
pub fn soliton_1d(s: &Scenario, mut bundle: Option<&mut Bundle>) -> anyhow::Result<Outcome<Soliton1DSummary>> {
    let m = s.m;
    let v0 = s.v0()?;
    let pot = s.potential_spec()?;
    let prediction = predict_outcome(m, v0, &pot)?;
    let reference = Reference::compute(EffectiveSystem::one_d(m, pot)?, v0, prediction)?;
    let window = reference.window(s.horizon, v0)?;
    let grid = sized_grid(s.grid.n, s.grid.length, reference.reach(window), 1)?;
    let profiles = CorrectionProfiles::build(m)?;

    let s0 = reference.state_at(window.t0);
    let p0 = SolitonParams { m, c: s0.c, v: s0.v, rho: s0.u, gamma: 0.0, amp: pot.at(s0.u).powf(1.0 / (m - 1.0)) };
    let u0 = traveling_wave(&p0, &grid, 0.0)?;
    let cfg = SolverConfig::new(m, pot, s.dt, window.t0, window.t1).with_stride(s.stride);

    let mut tracker = Tracker::new(pot, p0, window.t0).with_profiles(&profiles);
    let mut hard = None;
    let mut sample = 0usize;
    let snap_every = s.output.snapshot_every;
    let run = evolve_observed(&u0, &cfg, |t, u| {
        if let Err(e) = tracker.push(t, u) {
            hard.get_or_insert(anyhow::Error::from(e));
        }
        if snap_every > 0 && sample.is_multiple_of(snap_every) {
            if let Some(b) = bundle.as_deref_mut() {
                if let Err(e) = b.write_snapshot(sample, u) {
                    hard.get_or_insert(e);
                }
            }
        }
        sample += 1;
    })?;
    if let Some(e) = hard {
        return Err(e);
    }
    let track = tracker.finish();
    let law = momentum_law_residual(&run.diagnostics)?;
    let sign = match pot.direction {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    };

    let ode = reference.restricted(window);
    let (_, ode_end) = ode.last();
    let last = track.last().copied().unwrap_or(p0);
    let max_rho_velocity_mismatch = track
        .rho_velocity()
        .into_iter()
        .zip(&track.params[1..])
        .filter(|(_, p)| p.v.abs() > 0.1)
        .map(|((_, d), p)| (d - p.v).abs() / p.v.abs())
        .fold(0.0, f64::max);
    let turning: Vec<_> = reference.turning.iter().filter(|(t, _)| *t >= window.t0 && *t <= window.t1).collect();
    let summary = Soliton1DSummary {
        outcome: format!("{:?}", prediction.kind),
        t0: window.t0,
        t1: window.t1,
        n: grid.n(),
        length: grid.length(),
        c_inf: prediction.c_inf,
        v_inf: prediction.v_inf,
        final_c: last.c,
        final_v: last.v,
        c_rel_error: rel(last.c, prediction.c_inf),
        v_rel_error: rel(last.v, prediction.v_inf),
        max_remainder_h1: track.max_remainder(),
        remainder_order: track.remainder_order,
        ode_final_c: ode_end.c,
        ode_final_v: ode_end.v,
        ode_rel_error: rel(ode_end.c, prediction.c_inf).max(rel(ode_end.v, prediction.v_inf)),
        ode_max_invariant_drift: ode.max_drift(),
        turning_points: turning.len(),
        c_turn_ode: turning.first().map(|(_, st)| st.c),
        c_turn_predicted: prediction.c_turn,
        min_signed_dpdt: law.dpdt.iter().map(|d| sign * d).fold(f64::INFINITY, f64::min),
        max_abs_dpdt: law.max_abs_dpdt(),
        max_law_residual: law.max_residual(),
        max_rho_velocity_mismatch,
        mass_drift: run.diagnostics.mass_drift(),
        max_spectral_tail: run.diagnostics.spectral_tail.iter().fold(0.0, |a, &b| a.max(b)),
        samples: track.len(),
        steps: run.steps,
    };

    let mut checks = vec![
        Check::flag("completed", run.completed()),
        Check::flag("locked", track.lost_lock.is_none()),
        Check::below("c_rel_error", summary.c_rel_error, PARAMETER_TOL),
        Check::below("v_rel_error", summary.v_rel_error, PARAMETER_TOL),
        Check::at_least("min_signed_dpdt", summary.min_signed_dpdt, -1e-6),
        Check::below("law_residual_ratio", summary.max_law_residual / summary.max_abs_dpdt, 1e-4),
    ];
    if s.horizon == Horizon::Flat {
        checks.push(Check::below("ode_rel_error", summary.ode_rel_error, 1e-4));
    }
    if s.kind == ScenarioKind::Reflection1D || prediction.kind == Kind::Reflected {
        checks.push(Check::flag("unique_turning_point", summary.turning_points == 1));
        if let (Some(a), Some(b)) = (summary.c_turn_ode, summary.c_turn_predicted) {
            checks.push(Check::near("c_turn", a, b, 1e-6));
        }
    }
    let failure = run
        .abort
        .as_ref()
        .map(|e| e.to_string())
        .or_else(|| track.lost_lock.as_ref().map(|(t, r)| format!("fit lost lock at t = {t:.3}: {r}")));

    if let Some(b) = bundle {
        b.write_diagnostics(&run.diagnostics, Some(&law))?;
        b.write_track(&track)?;
        b.write_trajectory(&ode)?;
        write_profile(b, m, v0, &profiles, &pot)?;
        b.write_json(
            PREDICTION,
            &serde_json::json!({
                "kind": format!("{:?}", prediction.kind),
                "c_inf": prediction.c_inf,
                "v_inf": prediction.v_inf,
                "lambda_inf": prediction.lambda_inf,
                "c_turn": prediction.c_turn,
            }),
        )?;
        b.write_json(COMPARISON, &summary)?;
    }
    let resolved = serde_json::json!({
        "t0": window.t0, "t1": window.t1, "n": grid.n(), "length": grid.length(),
        "initial": { "c": p0.c, "v": p0.v, "rho": p0.rho, "amp": p0.amp },
    });
    Ok(Outcome { checks, failure, summary, resolved })
}

/// Correction profiles at the center of the transition on the reference grid.
fn write_profile(
    b: &mut Bundle,
    m: f64,
    v0: f64,
    profiles: &CorrectionProfiles,
    pot: &nls_core::potential::PotentialSpec,
) -> anyhow::Result<()> {
    let grid = Grid::new(REFERENCE_N, REFERENCE_LENGTH, 1)?;
    let st = center_state(m, v0, *pot);
    let fo = first_order_profiles(&st, &grid)?;
    let (a2, b2) = if profiles.order >= 2 {
        let (a, b) = second_order_profiles(&st, profiles, &grid)?;
        (a.values, b.values)
    } else {
        (Vec::new(), Vec::new())
    };
    b.write_profile(&grid.coords(), [&fo.a1.values, &fo.b1.values, &a2, &b2])
}
