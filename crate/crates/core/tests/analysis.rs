mod common;

use std::sync::Arc;

use common::{drift_model, run, setup, standard_initial, standard_model};
use degenwave::analysis::{
    decay_bound_check, dissipation_residual, energy, fit_decay_rate, inequality_suite, lemma46_empirical_m,
    multiplier_identity_residual, theoretical_constants,
};
use degenwave::evolution::{initial_data, simulate, InitialPreset, Integrator, State};
use degenwave::function_spaces::{hardy_poincare_constant, richardson, GridFunction};
use degenwave::Error;

#[test]
fn energy_of_linear_interpolant() {
    let s = setup(standard_model());
    let sys = s.system(64, 1.0);
    let y = GridFunction::interpolate(Arc::clone(&sys.mesh), |x| x);
    let state = State { t: 0.0, y: y.reduced().to_vec(), v: vec![0.0; 64] };
    assert!((energy(&sys, &state).unwrap() - 1.0).abs() < 1e-13);
    let scaled = State { t: 0.0, y: state.y.iter().map(|v| 3.0 * v).collect(), v: state.v.clone() };
    assert!((energy(&sys, &scaled).unwrap() - 9.0).abs() < 1e-12);
    let bad = State { t: 0.0, y: vec![0.0; 3], v: vec![0.0; 3] };
    assert!(matches!(energy(&sys, &bad), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn explicit_euler_breaks_the_identity() {
    let s = setup(standard_model());
    let sys = s.system(32, 1.0);
    let (y0, y1) = initial_data(&standard_initial(), &sys).unwrap();
    let cn = simulate(&sys, &y0, &y1, 0.5, 1e-3, 0, Integrator::Trapezoidal).unwrap();
    let ee = simulate(&sys, &y0, &y1, 0.5, 1e-3, 0, Integrator::ExplicitEuler).unwrap();
    let (r_cn, r_ee) = (dissipation_residual(&cn, 1e-3), dissipation_residual(&ee, 1e-3));
    assert!(r_cn < 1e-12, "{r_cn}");
    assert!(r_ee > 1e3 * r_cn, "{r_ee} vs {r_cn}");
}

#[test]
fn zero_solution_has_zero_slacks() {
    let s = setup(standard_model());
    let sys = s.system(32, 1.0);
    let zero = InitialPreset::Poly { y0: vec![], y1: vec![] };
    let trace = run(&sys, &zero, 1.0, 1e-2, 5);
    assert_eq!(dissipation_residual(&trace, 1e-2), 0.0);
    assert_eq!(multiplier_identity_residual(&trace, &sys, 0.2, 0.8).unwrap(), 0.0);
    let c = theoretical_constants(&s.weight, &s.hyp, 0.5, 1.0, None).unwrap();
    let sl = inequality_suite(&trace, &sys, &c, 0.2, 0.8, 1.0).unwrap();
    for slack in [sl.boundary_observation, sl.energy_integral, sl.combined_identity] {
        assert_eq!((slack.lhs, slack.rhs, slack.slack), (0.0, 0.0, 0.0));
    }
    assert!(sl.all_ok);
}

#[test]
fn snapshots_must_cover_the_window() {
    let s = setup(standard_model());
    let sys = s.system(32, 1.0);
    let trace = run(&sys, &standard_initial(), 1.0, 1e-2, 0);
    assert!(matches!(multiplier_identity_residual(&trace, &sys, 0.2, 0.8), Err(Error::InsufficientSnapshots(_))));
    let trace = run(&sys, &standard_initial(), 1.0, 1e-2, 7);
    assert!(matches!(multiplier_identity_residual(&trace, &sys, 0.2, 0.8), Err(Error::InsufficientSnapshots(_))));
    let trace = run(&sys, &standard_initial(), 1.0, 1e-2, 10);
    assert!(matches!(multiplier_identity_residual(&trace, &sys, 0.2, 1.5), Err(Error::InsufficientSnapshots(_))));
}

#[test]
fn multiplier_residual_small_on_fine_mesh() {
    let s = setup(standard_model());
    let sys = s.system(512, 1.0);
    let trace = run(&sys, &standard_initial(), 5.0, 1e-3, 10);
    let r = multiplier_identity_residual(&trace, &sys, 0.5, 5.0).unwrap();
    assert!(r < 0.05, "{r}");
}

fn c_hp(s: &common::Setup, n: usize) -> f64 {
    let est = richardson([n / 4, n / 2, n].map(|m| hardy_poincare_constant(&s.system(m, 1.0)).unwrap()));
    est.finest.max(est.extrapolated)
}

#[test]
fn drift_scenario_inequalities_hold() {
    let s = setup(drift_model());
    let sys = s.system(128, 1.0);
    let c = theoretical_constants(&s.weight, &s.hyp, c_hp(&s, 128), 1.0, None).unwrap();
    let trace = run(&sys, &standard_initial(), 5.0, 1e-3, 10);
    let sl = inequality_suite(&trace, &sys, &c, 0.5, 5.0, 1.0).unwrap();
    assert!(sl.all_ok, "{sl:?}");
}

#[test]
fn doubled_energy_integral_is_flagged() {
    let s = setup(standard_model());
    let sys = s.system(256, 1.0);
    let c = theoretical_constants(&s.weight, &s.hyp, c_hp(&s, 256), 1.0, None).unwrap();
    let trace = run(&sys, &standard_initial(), 5.0, 1e-3, 10);
    let plain = inequality_suite(&trace, &sys, &c, 0.5, 5.0, 1.0).unwrap();
    assert!(plain.energy_integral.ok);
    let mutated = inequality_suite(&trace, &sys, &c, 0.5, 5.0, 2.0).unwrap();
    assert!(
        mutated.energy_integral.slack < 0.0 && !mutated.all_ok,
        "doubled lhs {:.4} still below rhs {:.4}",
        mutated.energy_integral.lhs,
        mutated.energy_integral.rhs
    );
}

#[test]
fn theoretical_rate_is_conservative() {
    for model in [standard_model(), drift_model()] {
        let s = setup(model);
        let sys = s.system(128, 1.0);
        let c = theoretical_constants(&s.weight, &s.hyp, c_hp(&s, 128), 1.0, None).unwrap();
        let trace = run(&sys, &standard_initial(), 10.0, 1e-3, 0);
        let omega = fit_decay_rate(&trace.times, &trace.energies, 0.1).unwrap();
        assert!(1.0 / c.m <= omega * 1.5);
        assert!(omega >= (1.0 - 1e-2) / c.m);
        let m_emp = lemma46_empirical_m(&trace.times, &trace.energies).unwrap();
        assert!(decay_bound_check(&trace.times, &trace.energies, m_emp).unwrap().bound_ok);
        assert!(decay_bound_check(&trace.times, &trace.energies, c.m).unwrap().bound_ok);
    }
}

#[test]
fn undecayed_trace_has_no_empirical_constant() {
    let s = setup(standard_model());
    let sys = s.system(64, 1.0);
    let trace = run(&sys, &standard_initial(), 1.0, 1e-2, 0);
    assert!(matches!(lemma46_empirical_m(&trace.times, &trace.energies), Err(Error::NotDecayed { .. })));
}
