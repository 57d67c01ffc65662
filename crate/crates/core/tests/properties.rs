use otto_core::bath::{rate_coefficients, BathSpec, RateTrajectory, Statistics};
use otto_core::cycle::{ift_reference, CycleConfig};
use otto_core::dynamics::{
    decoupling_residual, eigenbasis_superoperator, evolve_open, propagate_unitary, unitarity_defect, Direction,
    OdeOptions,
};
use otto_core::matcore::{expm_aherm, herm_eig2, CMat2, DensityMatrix, C64};
use otto_core::measures::{cycle_energetics, integrate_linear, witness_value};
use otto_core::model::{
    beta_from_population, hamiltonian_at, jump_operator, state_from_population, transition_energy, StrokePhase,
    SystemParams,
};
use otto_core::quad::GaussLegendre;
use proptest::prelude::*;

fn hermitian() -> impl Strategy<Value = CMat2> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
        .prop_map(|(c0, x, y, z)| CMat2::from_bloch(c0, [x, y, z]))
}

fn nondegenerate() -> impl Strategy<Value = CMat2> {
    hermitian().prop_filter("gap too small", |m| {
        let (_, c) = m.bloch();
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() > 1e-3
    })
}

fn state() -> impl Strategy<Value = DensityMatrix> {
    (0.0..1.0f64, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(r, th, ph)| {
        DensityMatrix::from_bloch(1.0, [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]).unwrap()
    })
}

fn params() -> impl Strategy<Value = SystemParams> {
    (0.5..3.0f64, 0.1..2.0f64, 0.02..0.5f64, 0.0..1.0f64)
        .prop_map(|(nc, dn, tau, g)| SystemParams::new(nc, nc + dn, tau, g).unwrap())
}

/// exp(M) by scaled Taylor series, independent of the closed forms.
fn expm_series(m: &CMat2) -> CMat2 {
    let norm = m.max_abs();
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let a = m.scale_re(0.5f64.powi(squarings));
    let mut term = CMat2::identity();
    let mut sum = CMat2::identity();
    for k in 1..30 {
        term = (term * a).scale_re(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_is_an_involution(m in hermitian(), d in -3.0..3.0f64) {
        let mut z = m;
        z.0[0][1] += C64::new(d, -d);
        prop_assert_eq!(z.adjoint().adjoint(), z);
    }

    #[test]
    fn eigendecomposition_reconstructs(m in nondegenerate()) {
        let e = herm_eig2(&m).unwrap();
        prop_assert!(e.e_minus <= e.e_plus);
        let rebuilt = e.projector_plus().scale_re(e.e_plus) + e.projector_minus().scale_re(e.e_minus);
        prop_assert!((rebuilt - m).max_abs() < 1e-10);
        for (v, ev) in [(e.v_plus, e.e_plus), (e.v_minus, e.e_minus)] {
            let mv = m.apply(&v);
            for k in 0..2 {
                prop_assert!((mv[k] - v[k] * ev).norm() < 1e-10);
            }
        }
        let overlap = e.v_plus[0].conj() * e.v_minus[0] + e.v_plus[1].conj() * e.v_minus[1];
        prop_assert!(overlap.norm() < 1e-12);
    }

    #[test]
    fn propagator_inverts(m in hermitian(), s in -1000.0..1000.0f64, rho in state()) {
        let u = expm_aherm(&m, s).unwrap();
        let v = expm_aherm(&m, -s).unwrap();
        prop_assert!((u * v - CMat2::identity()).max_abs() < 1e-11);
        prop_assert!(unitarity_defect(&u) < 1e-11);
        let r = u.conjugate(rho.matrix());
        prop_assert!((r.trace().re - 1.0).abs() < 1e-11);
    }

    #[test]
    fn population_round_trip_and_gibbs_equivalence(h in nondegenerate(), p in 0.01..0.99f64) {
        let rho = state_from_population(&h, p).unwrap();
        let e = herm_eig2(&h).unwrap();
        prop_assert!((rho.population(&e.v_plus) - p).abs() < 1e-12);
        let beta = beta_from_population(&h, p).unwrap();
        let eps = transition_energy(&h).unwrap().epsilon;
        prop_assert!((beta * eps - ((1.0 - p) / p).ln()).abs() < 1e-12);
        let w = expm_series(&h.scale_re(-beta));
        let gibbs = w.scale_re(1.0 / w.trace().re);
        prop_assert!((gibbs - *rho.matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn jump_operator_weight(h in nondegenerate()) {
        let a = jump_operator(&h).unwrap();
        let w = (a.adjoint() * a).trace().re;
        prop_assert!(w <= 1.0 + 1e-12);
        let (c0, c) = h.bloch();
        let yz = CMat2::from_bloch(c0, [0.0, c[1], c[2]]);
        if c[1].hypot(c[2]) > 1e-3 {
            let a = jump_operator(&yz).unwrap();
            prop_assert!(((a.adjoint() * a).trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expansion_hamiltonian_is_lipschitz(p in params(), s in 0.0..1.0f64, ds in 0.0..1e-3f64) {
        let t = s * p.tau();
        let t2 = (t + ds * p.tau()).min(p.tau());
        let h1 = hamiltonian_at(&p, StrokePhase::Expansion(t)).unwrap();
        let h2 = hamiltonian_at(&p, StrokePhase::Expansion(t2)).unwrap();
        prop_assert!((h2 - h1).max_abs() <= p.hamiltonian_lipschitz() * (t2 - t) + 1e-12);
    }

    #[test]
    fn witness_ignores_positive_shifts(g in 0.0..5.0f64, gt in 0.0..5.0f64, c in 0.0..5.0f64) {
        prop_assert_eq!(witness_value(g, gt), 0.0);
        prop_assert_eq!(witness_value(g + c, gt + c), 0.0);
        prop_assert!(witness_value(g - c, gt - c) >= 0.0);
    }

    #[test]
    fn quantifier_windows_add_up(
        f in prop::collection::vec(0.0..3.0f64, 3..40),
        a in 0.0..1.0f64,
        b in 0.0..1.0f64,
        c in 0.0..1.0f64,
    ) {
        let n = f.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.1 + 0.01 * (i as f64).sqrt()).collect();
        let end = times[n - 1];
        let mut cuts = [a * end, b * end, c * end];
        cuts.sort_by(f64::total_cmp);
        let whole = integrate_linear(&times, &f, cuts[0], cuts[2]).unwrap();
        let left = integrate_linear(&times, &f, cuts[0], cuts[1]).unwrap();
        let right = integrate_linear(&times, &f, cuts[1], cuts[2]).unwrap();
        prop_assert!(whole >= 0.0);
        prop_assert!((whole - left - right).abs() < 1e-12);
        let zero = vec![0.0; n];
        prop_assert_eq!(integrate_linear(&times, &zero, 0.0, end).unwrap(), 0.0);
    }

    #[test]
    fn energetics_are_affine_in_each_state(
        s in prop::collection::vec(state(), 6),
        lam in 0.0..1.0f64,
        slot in 0usize..4,
    ) {
        let p = SystemParams::baseline();
        let hc = hamiltonian_at(&p, StrokePhase::Cold).unwrap();
        let hh = hamiltonian_at(&p, StrokePhase::Hot).unwrap();
        let mix = DensityMatrix::from_matrix(
            s[4].matrix().scale_re(lam) + s[5].matrix().scale_re(1.0 - lam),
        ).unwrap();
        let args = |x: &DensityMatrix| {
            let mut v = [s[0], s[1], s[2], s[3]];
            v[slot] = *x;
            cycle_energetics(&v[0], &v[1], &v[2], &v[3], &hc, &hh).unwrap()
        };
        let (em, e4, e5) = (args(&mix), args(&s[4]), args(&s[5]));
        for (m, a, b) in [(em.w1, e4.w1, e5.w1), (em.w2, e4.w2, e5.w2), (em.q_hot, e4.q_hot, e5.q_hot)] {
            prop_assert!((m - (lam * a + (1.0 - lam) * b)).abs() < 1e-10);
        }
        prop_assert_eq!(em.w, em.w1 + em.w2);
        prop_assert_eq!(em.valid_engine, em.w < 0.0 && em.q_hot > 0.0);
    }

    #[test]
    fn inner_time_integral_matches_direct_quadrature(x in -50.0..50.0f64, t in 0.01..2.0f64) {
        let gl = GaussLegendre::new(64);
        let pieces = 32;
        let direct: f64 = (0..pieces)
            .map(|k| {
                let (a, b) = (t * k as f64 / pieces as f64, t * (k + 1) as f64 / pieces as f64);
                gl.integrate(&|s: f64| [(x * (t - s)).cos()], a, b)[0]
            })
            .sum();
        let closed = if x == 0.0 { t } else { (x * t).sin() / x };
        prop_assert!((direct - closed).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stroke_unitaries_are_unitary(p in params()) {
        let u = propagate_unitary(&p, Direction::Expansion, 2000).unwrap();
        let ud = propagate_unitary(&p, Direction::Compression, 2000).unwrap();
        prop_assert!(unitarity_defect(&u) < 1e-9);
        prop_assert!((u * ud - CMat2::identity()).max_abs() < 1e-9);
    }

    #[test]
    fn rates_scale_linearly_in_alpha(wc in 2.0..40.0f64, t in 0.01..3.0f64, a in 0.05..1.0f64) {
        let b1 = BathSpec::fermionic(a, wc, -0.05).unwrap();
        let b2 = b1.with_alpha(2.5 * a).unwrap();
        let r1 = rate_coefficients(&b1, 22.8, t).unwrap();
        let r2 = rate_coefficients(&b2, 22.8, t).unwrap();
        prop_assert!((r2.gamma / r1.gamma - 2.5).abs() < 1e-10);
        prop_assert!((r2.gamma_tilde / r1.gamma_tilde - 2.5).abs() < 1e-10);
        prop_assert_eq!(r1.big_gamma, 2.0 * r1.gamma - r1.gamma_tilde);
    }

    #[test]
    fn generator_blocks_decouple(h in nondegenerate(), g in -2.0..2.0f64, gt in 0.0..2.0f64) {
        let a = jump_operator(&h).unwrap();
        let m = eigenbasis_superoperator(&h, &a, g, gt).unwrap();
        prop_assert!(decoupling_residual(&m) < 1e-12 * (1.0 + h.max_abs()));
    }

    #[test]
    fn open_evolution_preserves_trace(
        h in nondegenerate(),
        rho in state(),
        g in -0.5..2.0f64,
        gt in 0.0..2.0f64,
    ) {
        let a = jump_operator(&h).unwrap();
        let rates = RateTrajectory::constant(0.5 * (g + gt), gt, Statistics::Fermionic, 3.0).unwrap();
        let grid: Vec<f64> = (0..=30).map(|i| 0.1 * i as f64).collect();
        let traj = evolve_open(&rho, &h, &rates, &a, &grid, OdeOptions::default()).unwrap();
        prop_assert!(traj.max_trace_deviation() < 1e-8);
        for s in traj.states() {
            prop_assert!(s.matrix().hermitian_deviation() <= 1e-10);
        }
    }

    #[test]
    fn constant_rates_relax_to_detailed_balance(h in nondegenerate(), nbar in 0.02..0.98f64, k in 0.5..3.0f64) {
        let a = jump_operator(&h).unwrap();
        let w = (a.adjoint() * a).trace().re;
        prop_assume!(w > 0.05);
        // Γ = k(1 − n̄), γ̃ = k n̄; relaxation rate k·|a|² ≥ 0.025
        let t_end = 40.0 / (k * w);
        let rates = RateTrajectory::constant(0.5 * k, k * nbar, Statistics::Fermionic, t_end).unwrap();
        let traj = evolve_open(&DensityMatrix::maximally_mixed(), &h, &rates, &a, &[0.0, t_end], OdeOptions::default()).unwrap();
        let target = state_from_population(&h, nbar).unwrap();
        prop_assert!((*traj.final_state().matrix() - *target.matrix()).max_abs() < 1e-6);
    }

    #[test]
    fn ift_engines_have_sub_unit_efficiency(p in 0.5..0.999f64) {
        let cfg = CycleConfig::baseline(30.0);
        let row = &ift_reference(&cfg, &[p]).unwrap().rows[0];
        if row.valid_engine() {
            let eta = row.eta().unwrap();
            prop_assert!((0.0..1.0).contains(&eta));
        }
    }
}
