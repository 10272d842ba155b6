use std::f64::consts::PI;

use nls_core::effective::{galilean_boost, predict_outcome_2d, refraction_angles, EffectiveSystem, OdeKind};
use nls_core::grid::{ComplexField, Grid};
use nls_core::potential::PotentialSpec;
use nls_core::soliton::{ground_state_2d, ground_state_2d_scaled, traveling_wave_2d, GroundState, SolitonParams2D};
use nls_core::solver::{evolve, evolve_observed, observables, SolverConfig};
use serde::Serialize;

use super::{Check, Outcome};
use crate::bundle::{Bundle, COMPARISON, PREDICTION};
use crate::config::Scenario;
use crate::reference::{domain_length, Reference};

/// Nominal accuracy of the split-step solver used for equivariance checks.
pub const SOLVER_TOLERANCE: f64 = 1e-6;
const GROUND_TOL: f64 = 1e-10;
const GROUND_ITER: usize = 4000;

fn amp(pot: &PotentialSpec, m: f64, x1: f64) -> f64 {
    pot.at(x1).powf(1.0 / (m - 1.0))
}

/// Mass-weighted center of a 2D field.
fn centroid(u: &ComplexField) -> [f64; 2] {
    let g = &u.grid;
    let n = g.n();
    let (mut w, mut x1, mut x2) = (0.0, 0.0, 0.0);
    for (idx, z) in u.values.iter().enumerate() {
        let p = z.norm_sqr();
        w += p;
        x1 += p * g.x(idx / n);
        x2 += p * g.x(idx % n);
    }
    [x1 / w, x2 / w]
}

#[derive(Clone, Debug, Serialize)]
pub struct Interaction2DSummary {
    pub kappa: f64,
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
    pub length: f64,
    pub c_inf: f64,
    pub v_inf: f64,
    pub final_c: f64,
    pub final_v: [f64; 2],
    pub c_rel_error: f64,
    pub v1_rel_error: f64,
    pub v2_drift: f64,
    pub mass_drift: f64,
}

/// 2D soliton crossing the step in `x1`. Parameters are read from
/// conserved-quantity proxies: `v = 2P/M`, `c` from the mass and the local
/// amplitude factor.
pub fn interaction_2d(s: &Scenario, bundle: Option<&mut Bundle>) -> anyhow::Result<Outcome<Interaction2DSummary>> {
    let m = s.m;
    let v_in = s.v_in.expect("validated");
    let pot = s.potential_spec()?;
    // κ from a unit ground state on a fixed reference grid
    let unit = ground_state_2d(m, &Grid::new(256, 40.0, 2)?)?;
    let kappa = unit.kappa();
    let unit_mass = unit.profile.dot(&unit.profile);
    let sys = EffectiveSystem::new(OdeKind::TwoD, m, pot)?.with_kappa(kappa);
    let prediction = predict_outcome_2d(m, v_in[0], &pot, kappa)?;
    let reference = Reference::compute(sys, v_in[0], prediction)?;
    let window = reference.window(s.horizon, v_in[0])?;
    let drift2 = v_in[1].abs() * (window.t1 - window.t0);
    let reach = reference.reach(window).max(0.5 * drift2 + 10.0);
    let length = s.grid.length.unwrap_or_else(|| domain_length(reach));
    let grid = Grid::new(s.grid.n.unwrap_or(256), length, 2)?;
    if reach > 7.0 / 16.0 * length {
        anyhow::bail!("2D grid of length {length} too small for reach {reach:.2}");
    }

    let s0 = reference.state_at(window.t0);
    let ground = ground_state_2d_scaled(m, s0.c, &grid, GROUND_TOL, GROUND_ITER)?;
    let p0 = SolitonParams2D {
        m,
        c: s0.c,
        v: [s0.v, v_in[1]],
        rho: [s0.u, -0.5 * v_in[1] * (window.t1 - window.t0)],
        gamma: 0.0,
        amp: amp(&pot, m, s0.u),
    };
    let u0 = traveling_wave_2d(&p0, &ground, &grid, 0.0)?;
    let cfg = SolverConfig::new(m, pot, s.dt, window.t0, window.t1).with_stride(s.stride);
    // c from M = c^{2/(m-1) - 1} M_1 / ã²
    let power = 2.0 / (m - 1.0) - 1.0;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let run = evolve_observed(&u0, &cfg, |t, u| {
        let obs = observables(u, &pot, m);
        let x = centroid(u);
        let a = amp(&pot, m, x[0]);
        let c = (obs.mass * a * a / unit_mass).powf(1.0 / power);
        rows.push(vec![t, c, 2.0 * obs.momentum[0] / obs.mass, 2.0 * obs.momentum[1] / obs.mass, x[0], x[1]]);
    })?;
    let last = rows.last().cloned().unwrap_or_default();
    let summary = Interaction2DSummary {
        kappa,
        t0: window.t0,
        t1: window.t1,
        n: grid.n(),
        length,
        c_inf: prediction.c_inf,
        v_inf: prediction.v_inf,
        final_c: last[1],
        final_v: [last[2], last[3]],
        c_rel_error: (last[1] - prediction.c_inf).abs() / prediction.c_inf,
        v1_rel_error: (last[2] - prediction.v_inf).abs() / prediction.v_inf.abs(),
        v2_drift: rows.iter().map(|r| (r[3] - v_in[1]).abs()).fold(0.0, f64::max),
        mass_drift: run.diagnostics.mass_drift(),
    };
    let checks = vec![
        Check::flag("completed", run.completed()),
        Check::below("c_rel_error", summary.c_rel_error, 0.05),
        Check::below("v1_rel_error", summary.v1_rel_error, 0.05),
        Check::below("v2_drift", summary.v2_drift, 1e-6),
    ];
    if let Some(b) = bundle {
        b.write_diagnostics(&run.diagnostics, None)?;
        b.write_table("track2d.csv", &["t", "c", "v1", "v2", "rho1", "rho2"], &rows)?;
        b.write_trajectory(&reference.restricted(window))?;
        b.write_json(
            PREDICTION,
            &serde_json::json!({
                "kind": format!("{:?}", prediction.kind), "c_inf": prediction.c_inf,
                "v_inf": prediction.v_inf, "kappa": kappa,
            }),
        )?;
        b.write_json(COMPARISON, &summary)?;
    }
    let failure = run.abort.as_ref().map(|e| e.to_string());
    let resolved = serde_json::json!({ "t0": window.t0, "t1": window.t1, "n": grid.n(), "length": length });
    Ok(Outcome { checks, failure, summary, resolved })
}

#[derive(Clone, Debug, Serialize)]
pub struct Refraction2DSummary {
    pub ground_residual: f64,
    pub ground_iterations: usize,
    pub pohozaev_defect: f64,
    pub kappa: f64,
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub v_out: [f64; 2],
    pub law_residual: f64,
    /// Transverse boost used in the equivariance check (a multiple of `2·2π/L`).
    pub boost_v2: f64,
    pub boost_time: f64,
    pub boost_error: f64,
}

/// Largest admissible transverse boost not exceeding `target` in magnitude
/// (at least one wavenumber step).
pub fn admissible_boost(target: f64, length: f64) -> f64 {
    let dk = 2.0 * PI / length;
    let modes = (0.5 * target.abs() / dk).floor().max(1.0);
    2.0 * modes * dk * if target < 0.0 { -1.0 } else { 1.0 }
}

/// `‖evolve(𝒢u0) - 𝒢 evolve(u0)‖∞` for a short run.
pub fn boost_equivariance(
    m: f64,
    pot: &PotentialSpec,
    ground: &GroundState,
    v1: f64,
    v2: f64,
    t: f64,
    dt: f64,
) -> anyhow::Result<f64> {
    let grid = &ground.profile.grid;
    let p = SolitonParams2D { m, c: 1.0, v: [v1, 0.0], rho: [-2.0, 0.0], gamma: 0.0, amp: amp(pot, m, -2.0) };
    let u0 = traveling_wave_2d(&p, ground, grid, 0.0)?;
    let cfg = SolverConfig::new(m, *pot, dt, 0.0, t).with_stride(usize::MAX);
    let boosted_first = evolve(&galilean_boost(&u0, v2, 0.0)?, &cfg)?;
    let plain = evolve(&u0, &cfg)?;
    let boosted_after = galilean_boost(&plain.field, v2, t)?;
    Ok(boosted_first.field.sup_distance(&boosted_after)?)
}

/// Ground-state checks, refraction law at prediction level and a short
/// Galilean-boost equivariance run.
pub fn refraction_2d(s: &Scenario, bundle: Option<&mut Bundle>) -> anyhow::Result<Outcome<Refraction2DSummary>> {
    let m = s.m;
    let v_in = s.v_in.expect("validated");
    let pot = s.potential_spec()?;
    let fine = ground_state_2d_scaled(m, 1.0, &Grid::new(256, 40.0, 2)?, GROUND_TOL, GROUND_ITER)?;
    let kappa = fine.kappa();
    let r = refraction_angles(v_in, m, &pot, kappa)?;
    let n = s.grid.n.unwrap_or(128);
    let length = s.grid.length.unwrap_or(40.0);
    let coarse = ground_state_2d_scaled(m, 1.0, &Grid::new(n, length, 2)?, GROUND_TOL, GROUND_ITER)?;
    let boost_v2 = admissible_boost(if v_in[1] == 0.0 { 1.0 } else { v_in[1] }, length);
    let boost_time = 1.0;
    let boost_error = boost_equivariance(m, &pot, &coarse, v_in[0], boost_v2, boost_time, s.dt)?;
    let summary = Refraction2DSummary {
        ground_residual: fine.residual,
        ground_iterations: fine.iterations,
        pohozaev_defect: fine.pohozaev_defect(),
        kappa,
        theta_minus: r.theta_minus,
        theta_plus: r.theta_plus,
        v_out: r.v_out,
        law_residual: r.law_residual,
        boost_v2,
        boost_time,
        boost_error,
    };
    let checks = vec![
        Check::below("ground_residual", summary.ground_residual, 1e-8),
        Check::below("pohozaev_defect", summary.pohozaev_defect, 1e-6),
        Check::below("refraction_law_residual", summary.law_residual, 1e-10),
        Check::below("boost_equivariance", summary.boost_error, 10.0 * SOLVER_TOLERANCE),
    ];
    if let Some(b) = bundle {
        b.write_json(PREDICTION, &serde_json::json!({ "v_in": v_in, "v_out": r.v_out, "theta_minus": r.theta_minus, "theta_plus": r.theta_plus }))?;
        b.write_json(COMPARISON, &summary)?;
    }
    Ok(Outcome { checks, failure: None, summary, resolved: serde_json::json!({ "n": n, "length": length }) })
}
