//! End-to-end checks of the library against closed forms and reference
//! values at the baseline engine parameters.

use otto_core::bath::{markov_limits, rate_coefficients, BathSpec, RateTrajectory};
use otto_core::cycle::{
    ift_reference, run_cooling, run_cycle, sweep_cutoff, CycleConfig, HeatingGrid,
};
use otto_core::dynamics::{
    adiabaticity_with, evolve_open, propagate_unitary, time_ordered, Direction, OdeOptions,
};
use otto_core::matcore::herm_eig2;
use otto_core::measures::{cooling_heat, cycle_energetics, witness_f, NonMarkovReport};
use otto_core::model::{
    beta_from_population, hamiltonian_at, jump_operator, state_from_population, transition_energy, StrokePhase,
    SystemParams,
};
use otto_core::Execution;

fn hot_bath(omega_c: f64) -> (BathSpec, f64) {
    let p = SystemParams::baseline();
    let h = hamiltonian_at(&p, StrokePhase::Hot).unwrap();
    let eps = transition_energy(&h).unwrap().epsilon;
    let beta = beta_from_population(&h, 0.99).unwrap();
    (BathSpec::fermionic(0.6, omega_c, beta).unwrap(), eps)
}

#[test]
fn rates_approach_markov_limits() {
    for wc in [15.0, 25.0, 30.0] {
        let (b, eps) = hot_bath(wc);
        let r = rate_coefficients(&b, eps, 1e3).unwrap();
        let (g, gt) = markov_limits(&b, eps).unwrap();
        assert!((r.gamma / g - 1.0).abs() < 0.01, "omega_c = {wc}");
        assert!((r.gamma_tilde / gt - 1.0).abs() < 0.01, "omega_c = {wc}");
    }
}

#[test]
fn decoherence_rate_sign_depends_on_cutoff() {
    let (b, eps) = hot_bath(25.0);
    let fast = RateTrajectory::compute(&b, eps, 10.0, None, Execution::default()).unwrap();
    assert!(fast.samples().skip(1).all(|(_, r)| r.big_gamma > 0.0));
    assert!(fast.warnings().is_empty(), "{:?}", fast.warnings());
    assert!(witness_f(&fast).f.iter().all(|&f| f == 0.0));
    assert_eq!(NonMarkovReport::new(&fast, 0.0, 10.0).unwrap().q, 0.0);

    let (b, eps) = hot_bath(5.0);
    let slow = RateTrajectory::compute(&b, eps, 10.0, None, Execution::default()).unwrap();
    assert!(slow.samples().any(|(_, r)| r.big_gamma < 0.0));
    assert!(slow.samples().all(|(_, r)| r.gamma_tilde >= -1e-12));
}

#[test]
fn hot_bath_thermalizes_the_expanded_state() {
    let cfg = CycleConfig::baseline(25.0);
    let p = cfg.system;
    let hc = cfg.h_cold().unwrap();
    let hh = cfg.h_hot().unwrap();
    let u = propagate_unitary(&p, Direction::Expansion, cfg.unitary_steps).unwrap();
    let rho_exp = state_from_population(&hc, 0.261).unwrap().evolve(&u).unwrap();
    let rates = RateTrajectory::compute(&cfg.hot_bath().unwrap(), cfg.epsilon_hot().unwrap(), 10.0, None, Execution::default()).unwrap();
    let grid: Vec<f64> = (0..=1000).map(|i| 0.01 * i as f64).collect();
    let a = jump_operator(&hh).unwrap();
    let traj = evolve_open(&rho_exp, &hh, &rates, &a, &grid, OdeOptions::default()).unwrap();
    let target = state_from_population(&hh, 0.99).unwrap();
    assert!((*traj.final_state().matrix() - *target.matrix()).max_abs() < 1e-3);
    assert!(traj.max_trace_deviation() < 1e-8);
    assert!(traj.min_eigenvalue() >= -1e-6);

    // Populations in the H_hot eigenbasis move monotonically toward 0.99.
    let e = herm_eig2(&hh).unwrap();
    let pops: Vec<f64> = traj.states().iter().map(|s| s.population(&e.v_plus)).collect();
    assert!(pops[0] < 0.9 && pops[1000] > 0.98);

    // Halving both tolerances moves the end state by less than the tolerance.
    let tight = OdeOptions {
        rtol: 5e-10,
        atol: 5e-13,
        ..Default::default()
    };
    let short = [0.0, 1.0];
    let a1 = evolve_open(&rho_exp, &hh, &rates, &a, &short, OdeOptions::default()).unwrap();
    let a2 = evolve_open(&rho_exp, &hh, &rates, &a, &short, tight).unwrap();
    assert!((*a1.final_state().matrix() - *a2.final_state().matrix()).max_abs() < 1e-9);
}

#[test]
fn adiabaticity_matches_direct_matrix_element() {
    let p = SystemParams::new_unordered(2.0, 2.0, 0.13, 0.0).unwrap();
    let xi = adiabaticity_with(&p, 20_000).unwrap();
    let u = time_ordered(|t| hamiltonian_at(&p, StrokePhase::Expansion(t)), p.tau(), 40_000).unwrap();
    let cold = herm_eig2(&hamiltonian_at(&p, StrokePhase::Cold).unwrap()).unwrap();
    let hot = herm_eig2(&hamiltonian_at(&p, StrokePhase::Hot).unwrap()).unwrap();
    let direct = u.matrix_element(&hot.v_plus, &cold.v_minus).norm_sqr();
    assert!((xi - direct).abs() < 1e-8);
}

#[test]
fn perfect_thermalization_efficiency() {
    let cfg = CycleConfig::baseline(30.0);
    let hc = cfg.h_cold().unwrap();
    let hh = cfg.h_hot().unwrap();
    let u = propagate_unitary(&cfg.system, Direction::Expansion, cfg.unitary_steps).unwrap();
    let rho_in = state_from_population(&hc, 0.261).unwrap();
    let rho_exp = rho_in.evolve(&u).unwrap();
    let rho_heat = state_from_population(&hh, 0.99).unwrap();
    let rho_comp = rho_heat.evolve(&u.adjoint()).unwrap();
    let e = cycle_energetics(&rho_in, &rho_exp, &rho_heat, &rho_comp, &hc, &hh).unwrap();
    assert!(e.valid_engine);
    assert!((e.eta.unwrap() - 0.649).abs() < 0.005);

    // Independent of the bath's spectral parameters.
    let grid = [0.7, 0.9, 0.99];
    let reference = ift_reference(&cfg, &grid).unwrap();
    for wc in [5.0, 15.0, 25.0] {
        let mut c = cfg.with_omega_c(wc);
        c.hot.alpha = 0.1 * wc;
        let other = ift_reference(&c, &grid).unwrap();
        for (a, b) in reference.rows.iter().zip(&other.rows) {
            assert!((a.eta().unwrap() - b.eta().unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn first_law_over_a_full_cycle() {
    let mut cfg = CycleConfig::baseline(25.0);
    cfg.heating = HeatingGrid {
        dense_step: 1e-3,
        dense_end: 0.3,
        tail_step: 0.01,
        t_max: 0.3,
    };
    cfg.t_f = 0.3;
    cfg.q_window = (0.0, 0.3);
    let r = run_cycle(&cfg, Execution::default()).unwrap();
    let rho_heat = *r.heating.final_state();
    let u = propagate_unitary(&cfg.system, Direction::Expansion, cfg.unitary_steps).unwrap();
    let rho_comp = rho_heat.evolve(&u.adjoint()).unwrap();
    let cooling = run_cooling(&cfg, &rho_comp, &[0.0, 0.5, 2.0], Execution::default()).unwrap();
    let rho_final = cooling.final_state();
    let hc = cfg.h_cold().unwrap();
    let rho_in = state_from_population(&hc, cfg.p_plus_cold).unwrap();
    let e = r.energetics.last().unwrap();
    let q_cold = cooling_heat(&rho_comp, rho_final, &hc);
    let total = e.w1 + e.q_hot + e.w2 + q_cold;
    let direct = rho_final.expectation(&hc) - rho_in.expectation(&hc);
    assert!((total - direct).abs() < 1e-12);
    assert!(cooling.max_trace_deviation() < 1e-8);
}

#[test]
fn baseline_cycle_at_fast_cutoff() {
    let r = run_cycle(&CycleConfig::baseline(30.0), Execution::default()).unwrap();
    let w = r.eta_max.unwrap();
    assert!((w.peak.eta - 0.712).abs() < 0.002, "{w:?}");
    assert!((0.27171..=0.27208).contains(&w.peak.t), "{w:?}");
    assert!(w.t_lo <= w.peak.t && w.peak.t <= w.t_hi);
    let second = r.peaks[1];
    assert!((second.eta - 0.6733).abs() < 0.002);
    assert!((0.54362..=0.54429).contains(&second.t), "{second:?}");
    let period = 2.0 * std::f64::consts::PI / r.epsilon_hot;
    assert!(((second.t - r.peaks[0].t) / period - 1.0).abs() < 0.05);
    for e in r.engine_eta().into_iter().flatten() {
        assert!(e <= w.peak.eta);
    }
    let ift = ift_reference(&CycleConfig::baseline(30.0), &[0.99]).unwrap();
    assert!((r.eta_sat.unwrap() - ift.rows[0].eta().unwrap()).abs() < 2e-3);
    assert!(r.t_eq.is_some());
    assert_eq!(r.q(), 0.0);
    assert!(!r.no_engine());
}

#[test]
fn sweeps_are_deterministic() {
    let mut cfg = CycleConfig::baseline(25.0);
    cfg.heating = HeatingGrid {
        dense_step: 1e-3,
        dense_end: 0.4,
        tail_step: 0.05,
        t_max: 1.0,
    };
    cfg.q_window = (0.0, 1.0);
    cfg.unitary_steps = 5000;
    let list = [25.0, 12.0, 5.0];
    let a = sweep_cutoff(&cfg, &list, Execution::default()).unwrap();
    let b = sweep_cutoff(&cfg, &list, Execution::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().map(|r| r.omega_c).collect::<Vec<_>>(), list);
    assert!(a.iter().all(|r| r.result.is_ok()));
}

#[test]
fn failing_sweep_points_stay_in_their_rows() {
    let mut cfg = CycleConfig::baseline(25.0);
    cfg.heating = HeatingGrid {
        dense_step: 1e-3,
        dense_end: 0.1,
        tail_step: 0.05,
        t_max: 0.2,
    };
    cfg.t_f = 0.2;
    cfg.q_window = (0.0, 0.2);
    let rows = sweep_cutoff(&cfg, &[25.0, -1.0], Execution::default()).unwrap();
    assert!(rows[0].result.is_ok());
    assert!(rows[1].result.is_err());
}
