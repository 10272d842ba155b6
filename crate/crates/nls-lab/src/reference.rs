//! Effective-ODE reference trajectory, time origin, horizon and grid sizing.

use anyhow::{bail, Context};
use nls_core::effective::{
    default_dt, integrate_effective, interaction_time, turning_points, EffectiveState, EffectiveSystem, Outcome,
    OutcomePrediction, Trajectory,
};
use nls_core::grid::Grid;
use serde::Serialize;

use crate::config::Horizon;

/// `|a - a±| < FLAT_TOL·|a+ - a-|` counts as flat.
pub const FLAT_TOL: f64 = 1e-5;
/// Grid spacing targeted by automatic sizing.
pub const TARGET_DX: f64 = 0.08;

#[derive(Clone, Debug)]
pub struct Reference {
    pub system: EffectiveSystem,
    pub prediction: OutcomePrediction,
    /// Time origin at the center crossing or the first turning point.
    pub trajectory: Trajectory,
    /// Launch time (start of the incoming flat region).
    pub t_start: f64,
    /// Time the soliton is back in a flat region, or the end of the integration.
    pub t_exit: f64,
    pub turning: Vec<(f64, EffectiveState)>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Window {
    pub t0: f64,
    pub t1: f64,
}

fn shift(traj: &mut Trajectory, by: f64) {
    traj.t.iter_mut().for_each(|t| *t -= by);
}

impl Reference {
    /// Launch `C = 1`, `V = v0` at the left edge of the flat region and
    /// integrate until the soliton is flat again.
    pub fn compute(system: EffectiveSystem, v0: f64, prediction: OutcomePrediction) -> anyhow::Result<Self> {
        let pot = system.potential;
        let x_flat = pot.flat_radius(FLAT_TOL) / pot.epsilon;
        let dt = default_dt(pot.epsilon);
        let init = EffectiveState { c: 1.0, v: v0, u: -x_flat, h: 0.0 };
        let t_max = 20.0 * x_flat / v0;
        let mut traj = integrate_effective(&system, init, 0.0, t_max, dt).context("effective trajectory")?;
        let exit = traj
            .states
            .iter()
            .position(|s| s.u >= x_flat || (s.u <= -x_flat && s.v < 0.0))
            .unwrap_or(traj.t.len() - 1);
        let turning = turning_points(&system, &traj);
        let origin = match prediction.kind {
            Outcome::Reflected | Outcome::Critical if !turning.is_empty() => turning[0].0,
            _ => {
                let i = traj.states.iter().position(|s| s.u >= 0.0).context("trajectory never reaches the center")?;
                let a = traj.states[i - 1];
                let (mut lo, mut hi) = (0.0, traj.t[i] - traj.t[i - 1]);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if system.rk4_step(&a, mid).u < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                traj.t[i - 1] + 0.5 * (lo + hi)
            }
        };
        let t_exit = traj.t[exit] - origin;
        shift(&mut traj, origin);
        let turning = turning.into_iter().map(|(t, s)| (t - origin, s)).collect();
        Ok(Reference { system, prediction, t_start: traj.t[0], t_exit, trajectory: traj, turning })
    }

    /// State at `t` by an RK4 step from the preceding sample.
    pub fn state_at(&self, t: f64) -> EffectiveState {
        let tr = &self.trajectory;
        let i = tr.t.partition_point(|&s| s <= t).saturating_sub(1);
        let h = t - tr.t[i];
        if h == 0.0 {
            tr.states[i]
        } else {
            self.system.rk4_step(&tr.states[i], h)
        }
    }

    pub fn window(&self, horizon: Horizon, v0: f64) -> anyhow::Result<Window> {
        let t_end = *self.trajectory.t.last().unwrap();
        let w = match horizon {
            Horizon::Auto => {
                let te = interaction_time(v0, self.system.potential.epsilon);
                Window { t0: -te, t1: te }
            }
            Horizon::Flat => Window { t0: self.t_start, t1: self.t_exit },
            Horizon::Explicit { t0, t1 } => Window { t0, t1 },
        };
        if w.t0 < self.t_start || w.t1 > t_end {
            bail!(
                "horizon [{:.3}, {:.3}] leaves the reference trajectory [{:.3}, {:.3}]",
                w.t0,
                w.t1,
                self.t_start,
                t_end
            );
        }
        Ok(w)
    }

    /// Reference samples inside the window, with both endpoints.
    pub fn restricted(&self, w: Window) -> Trajectory {
        let tr = &self.trajectory;
        let mut out = Trajectory::default();
        let inv0 = self.system.invariant(&tr.states[0]);
        let scale = inv0.abs().max(1.0);
        let mut push = |t: f64, s: EffectiveState| {
            out.t.push(t);
            out.states.push(s);
            out.invariant_drift.push((self.system.invariant(&s) - inv0).abs() / scale);
        };
        push(w.t0, self.state_at(w.t0));
        for (t, s) in tr.t.iter().zip(&tr.states) {
            if *t > w.t0 && *t < w.t1 {
                push(*t, *s);
            }
        }
        push(w.t1, self.state_at(w.t1));
        out
    }

    /// Largest `|U| + 10/√C` over the window.
    pub fn reach(&self, w: Window) -> f64 {
        self.restricted(w).states.iter().map(|s| s.u.abs() + 10.0 / s.c.sqrt()).fold(0.0, f64::max)
    }
}

/// Smallest domain keeping a soliton of reach `reach` out of the edge band.
pub fn domain_length(reach: f64) -> f64 {
    let l = 16.0 / 7.0 * reach + 10.0;
    (l / 20.0).ceil() * 20.0
}

pub fn points_for(length: f64) -> usize {
    ((length / TARGET_DX).ceil() as usize).next_power_of_two()
}

/// Check an explicit or automatic grid against the reach of the trajectory.
pub fn sized_grid(n: Option<usize>, length: Option<f64>, reach: f64, dim: usize) -> anyhow::Result<Grid> {
    let length = length.unwrap_or_else(|| domain_length(reach));
    let n = n.unwrap_or_else(|| points_for(length));
    if reach > 7.0 / 16.0 * length {
        bail!(
            "grid of length {length} is too small: the predicted trajectory reaches {reach:.2} \
             but the edge band starts at {:.2}",
            7.0 / 16.0 * length
        );
    }
    Ok(Grid::new(n, length, dim)?)
}
