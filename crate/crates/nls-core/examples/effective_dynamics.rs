//! Reduced dynamics: predicted outcome and an RK4 trajectory with its
//! invariant drift, for a step up (transmission) and a step down (reflection).

use nls_core::effective::{integrate_effective, predict_outcome, default_dt, turning_points, EffectiveState, EffectiveSystem};
use nls_core::potential::PotentialSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 0.05;
    for (label, pot, v0) in [
        ("increasing 1 -> 2", PotentialSpec::increasing(eps), 1.0),
        ("decreasing 1 -> 0.5", PotentialSpec::decreasing(eps, 0.5), 0.8),
    ] {
        let m = 3.0;
        let sys = EffectiveSystem::one_d(m, pot)?;
        let pred = predict_outcome(m, v0, &pot)?;
        let x0 = pot.flat_radius(1e-5) / eps;
        let init = EffectiveState { c: 1.0, v: v0, u: -x0, h: 0.0 };
        let traj = integrate_effective(&sys, init, 0.0, 6.0 * x0 / v0, default_dt(eps))?;
        let (t, end) = traj.last();
        println!("{label}: {:?}, c_inf {:.6}, v_inf {:.6}", pred.kind, pred.c_inf, pred.v_inf);
        println!("  at t = {t:.1}: C {:.6}  V {:.6}  U {:.1}  max invariant drift {:.2e}", end.c, end.v, end.u, traj.max_drift());
        for (tt, s) in turning_points(&sys, &traj) {
            println!("  turning point t = {tt:.3}: C = {:.9} (predicted {:.9})", s.c, pred.c_turn.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
