use nls_core::grid::Grid;
use nls_core::modulation::Tracker;
use nls_core::potential::PotentialSpec;
use nls_core::profiles::{assemble_approximate_solution, AnsatzState, CorrectionProfiles, ModulationOde};
use nls_core::soliton::{traveling_wave, SolitonParams};
use nls_core::solver::{evolve, evolve_observed, SolverConfig};

#[test]
fn ansatz_initial_data_follows_modulation_ode() {
    let m = 3.0;
    let pot = PotentialSpec::increasing(0.05);
    let grid = Grid::new(1024, 120.0, 1).unwrap();
    let profiles = CorrectionProfiles::build(m).unwrap();
    let s0 = AnsatzState::new(m, 1.0, 1.0, -10.0, 0.0, pot);
    let u0 = assemble_approximate_solution(&s0, &profiles, &grid, 2).unwrap();
    let guess = SolitonParams { gamma: 0.0, amp: pot.at(-10.0).sqrt(), ..SolitonParams::new(m, 1.0, 1.0, -10.0) };
    let mut tracker = Tracker::new(pot, guess, 0.0).with_profiles(&profiles);
    let cfg = SolverConfig::new(m, pot, 1e-3, 0.0, 8.0).with_stride(500);
    let run = evolve_observed(&u0, &cfg, |t, u| tracker.push(t, u).unwrap()).unwrap();
    assert!(run.completed());
    let track = tracker.finish();
    assert!(track.lost_lock.is_none());
    assert!(track.len() >= 10);
    let ode = ModulationOde { constants: profiles.constants, second_order: true };
    let mut s = s0;
    let mut t_prev = 0.0;
    let mut worst = 0.0f64;
    for (t, p) in track.times.iter().zip(&track.params) {
        s = ode.advance(&s, t - t_prev, 1e-2);
        t_prev = *t;
        worst = worst.max((p.c - s.c).abs()).max((p.v - s.v).abs()).max((p.rho - s.rho).abs());
    }
    eprintln!("max parameter deviation {worst:.3e}, max remainder {:.3e}", track.max_remainder());
    assert!(worst < 5e-3, "{worst}");
    assert!(track.max_remainder() < 5e-3);
    for (t, drho) in track.rho_velocity() {
        let v = track.params[track.times.iter().position(|x| *x == t).unwrap()].v;
        assert!((drho - v).abs() < 0.02 * v.abs(), "t={t} ρ'={drho} v={v}");
    }
}

#[test]
fn long_run_mass_drift() {
    let grid = Grid::new(1024, 100.0, 1).unwrap();
    let pot = PotentialSpec::uniform(1.0);
    let p = SolitonParams::new(3.0, 1.0, 0.0, 0.0);
    let u0 = traveling_wave(&p, &grid, 0.0).unwrap();
    let cfg = SolverConfig::new(3.0, pot, 1e-3, 0.0, 100.0).with_stride(10_000);
    let run = evolve(&u0, &cfg).unwrap();
    assert_eq!(run.steps, 100_000);
    let drift = run.diagnostics.mass_drift();
    eprintln!("mass drift over 1e5 steps: {drift:.3e}");
    assert!(drift < 1e-11, "{drift}");
}
