use coherence_core::catalysis::{
    build_catalyst, closed_form_rho_prime, cq_trace_distance, phi_state, processed_state, psi_state,
    run_protocol,
};
use coherence_core::channels::{
    addition_channel, addition_channel_commutator, addition_channel_stinespring, channels_commute,
    classify, complete_dephasing, composition_gap, dephasing_channel, is_io, is_sio,
    multiplicativity_deviation, non_schur_sio_fixture, schur_kraus, superoperator, KrausChannel,
    SchurChannel,
};
use coherence_core::experiments::sampling::{
    diagonal_state, ginibre_state, haar_unitary, pure_state, simplex_point, task_rng, unit_diagonal_psd,
};
use coherence_core::measures::{coherence_fraction, full_dephase, l1_coherence, robustness};
use coherence_core::phasedisc::{
    empirical_advantage, helstrom, optimal_success, optimal_success_iterative, PhaseGame,
};
use coherence_core::qmat::{
    eig_hermitian, majorizes, partial_trace, trace_norm, ComplexMatrix, DensityMatrix, C64,
};
use proptest::prelude::*;

const GRID: usize = 16;
const REFINE: usize = 200;

fn cf(rho: &DensityMatrix) -> f64 {
    coherence_fraction(rho, GRID, REFINE).0
}

fn hermitian(d: usize, seed: u64) -> ComplexMatrix {
    let g = coherence_core::experiments::sampling::ginibre_matrix(d, &mut task_rng(seed, 0));
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Prefix-sum majorization written independently of the library.
fn oracle_majorizes(p: &[f64], q: &[f64]) -> bool {
    let n = p.len().max(q.len());
    let sorted = |v: &[f64]| {
        let mut s: Vec<f64> = v.to_vec();
        s.resize(n, 0.0);
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    };
    let (p, q) = (sorted(p), sorted(q));
    let (mut a, mut b) = (0.0, 0.0);
    for k in 0..n {
        a += p[k];
        b += q[k];
        if a < b - 1e-9 {
            return false;
        }
    }
    true
}

/// `U = P D`: a random basis permutation times random diagonal phases.
fn incoherent_unitary(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = task_rng(seed, 9);
    let p = simplex_point(d, &mut rng);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap());
    let phases = simplex_point(d, &mut rng);
    ComplexMatrix::from_fn(d, |i, j| {
        if order[j] == i {
            C64::from_polar(1.0, 40.0 * phases[j])
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let rho = ginibre_state(da * db, &mut task_rng(seed, 0));
        for keep in [[0], [1]] {
            let out = partial_trace(&rho, &[da, db], &keep).unwrap();
            prop_assert!((out.trace() - rho.trace()).norm() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_inverts_tensor(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let a = ginibre_state(da, &mut task_rng(seed, 0));
        let b = ginibre_state(db, &mut task_rng(seed, 1));
        let out = partial_trace(&a.tensor(&b), &[da, db], &[0]).unwrap();
        prop_assert!(out.max_abs_diff(&a) <= 1e-12);
    }

    #[test]
    fn eig_reconstructs(seed in any::<u64>(), d in 1usize..=16) {
        let h = hermitian(d, seed);
        let s = eig_hermitian(&h).unwrap();
        let err = (&s.reconstruct() - &h).frobenius_norm();
        prop_assert!(err <= 1e-10 * h.frobenius_norm().max(1.0));
    }

    #[test]
    fn majorizes_matches_oracle(seed in any::<u64>(), n in 1usize..7, m in 1usize..7) {
        let mut rng = task_rng(seed, 0);
        let p = simplex_point(n, &mut rng);
        let q = simplex_point(m, &mut rng);
        prop_assert_eq!(majorizes(&p, &q).unwrap(), oracle_majorizes(&p, &q));
    }

    #[test]
    fn trace_norm_dominates_frobenius(seed in any::<u64>(), d in 1usize..6) {
        let g = coherence_core::experiments::sampling::ginibre_matrix(d, &mut task_rng(seed, 0));
        prop_assert!(trace_norm(&g) >= g.frobenius_norm() - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn dephased_fraction_is_one_over_d(seed in any::<u64>(), d in 2usize..5) {
        let rho = ginibre_state(d, &mut task_rng(seed, 0));
        prop_assert!((cf(&full_dephase(&rho)) - 1.0 / d as f64).abs() <= 1e-9);
    }

    #[test]
    fn fraction_bounded_by_robustness(seed in any::<u64>(), d in 2usize..5) {
        let rho = ginibre_state(d, &mut task_rng(seed, 0));
        let r = robustness(&rho).unwrap();
        prop_assert!(cf(&rho) <= (1.0 + r) / d as f64 + 1e-6);
    }

    #[test]
    fn qubit_fraction_equals_robustness_relation(seed in any::<u64>()) {
        let rho = ginibre_state(2, &mut task_rng(seed, 0));
        let r = robustness(&rho).unwrap();
        prop_assert!((cf(&rho) - (1.0 + r) / 2.0).abs() <= 1e-6);
    }

    #[test]
    fn nonnegative_states_hit_closed_form(seed in any::<u64>(), d in 2usize..5) {
        let g = ComplexMatrix::from_fn(d, |i, j| {
            let mut rng = task_rng(seed, (i * d + j) as u64);
            C64::new(simplex_point(2, &mut rng)[0], 0.0)
        });
        let rho = DensityMatrix::normalized(g.matmul(&g.transpose())).unwrap();
        prop_assert!((cf(&rho) - (1.0 + l1_coherence(&rho)) / d as f64).abs() <= 1e-8);
    }

    #[test]
    fn robustness_incoherent_unitary_invariance(seed in any::<u64>(), d in 2usize..5) {
        let rho = ginibre_state(d, &mut task_rng(seed, 0));
        let u = incoherent_unitary(d, seed);
        let moved = DensityMatrix::new(u.conjugate(&rho)).unwrap();
        prop_assert!((robustness(&rho).unwrap() - robustness(&moved).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn fraction_phase_invariance(seed in any::<u64>(), d in 2usize..5) {
        let rho = ginibre_state(d, &mut task_rng(seed, 0));
        let phases = simplex_point(d, &mut task_rng(seed, 3));
        let u = ComplexMatrix::diag(&phases.iter().map(|&t| C64::from_polar(1.0, 20.0 * t)).collect::<Vec<_>>());
        let moved = DensityMatrix::new(u.conjugate(&rho)).unwrap();
        prop_assert!((cf(&rho) - cf(&moved)).abs() <= 1e-8);
    }
}

fn zoo(seed: u64) -> Vec<KrausChannel> {
    let mut rng = task_rng(seed, 77);
    vec![
        KrausChannel::identity(3),
        complete_dephasing(3),
        dephasing_channel(simplex_point(2, &mut rng)[0]).unwrap(),
        schur_kraus(&SchurChannel::new(unit_diagonal_psd(3, 2, &mut rng)).unwrap()).unwrap(),
        addition_channel(simplex_point(2, &mut rng)[0], &ginibre_state(3, &mut rng)).unwrap(),
        KrausChannel::unitary(haar_unitary(3, &mut rng)).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn channels_preserve_trace_and_hermiticity(seed in any::<u64>()) {
        let rho = ginibre_state(3, &mut task_rng(seed, 0));
        for ch in zoo(seed) {
            let out = ch.apply_linear(&rho);
            prop_assert!((out.trace().re - 1.0).abs() <= 1e-12);
            prop_assert!(out.hermiticity_error() <= 1e-12);
            prop_assert!(!is_sio(&ch) || is_io(&ch));
        }
    }

    #[test]
    fn schur_channels_fix_incoherent_states(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = task_rng(seed, 0);
        let ch = schur_kraus(&SchurChannel::new(unit_diagonal_psd(d, d, &mut rng)).unwrap()).unwrap();
        let sigma = diagonal_state(d, &mut rng);
        prop_assert!(ch.apply_linear(&sigma).max_abs_diff(&sigma) <= 1e-12);
    }

    #[test]
    fn addition_forms_agree(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = task_rng(seed, 0);
        let alpha = simplex_point(2, &mut rng)[0];
        let rho = ginibre_state(d, &mut rng);
        let sigma = ginibre_state(d, &mut rng);
        let a = addition_channel_commutator(alpha, &sigma, &rho).unwrap();
        let b = addition_channel_stinespring(alpha, &sigma, &rho).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
        let same = addition_channel_stinespring(alpha, &rho, &rho).unwrap();
        prop_assert!(same.max_abs_diff(&rho) <= 1e-12);
    }

    #[test]
    fn addition_commutes_with_schur(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = task_rng(seed, 0);
        let alpha = simplex_point(2, &mut rng)[0];
        let sigma = diagonal_state(d, &mut rng);
        let rho = ginibre_state(d, &mut rng);
        let lambda = addition_channel(alpha, &sigma).unwrap();
        let e = schur_kraus(&SchurChannel::new(unit_diagonal_psd(d, 2, &mut rng)).unwrap()).unwrap();
        let lhs = lambda.apply_linear(&e.apply_linear(&rho));
        let rhs = e.apply_linear(&lambda.apply_linear(&rho));
        prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-10);
        prop_assert_eq!(channels_commute(&lambda, &e).unwrap(), composition_gap(&lambda, &e) <= 1e-10);
    }

    #[test]
    fn superoperator_acts_on_row_stacked_vectors(seed in any::<u64>()) {
        let rho = ginibre_state(3, &mut task_rng(seed, 0));
        for ch in zoo(seed) {
            let lhs = ch.apply_linear(&rho).vectorize();
            let rhs = superoperator(&ch).apply(&rho.vectorize());
            let gap = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(gap <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn classifier_round_trip(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = task_rng(seed, 0);
        let rank = 1 + (seed % d as u64) as usize;
        let c = unit_diagonal_psd(d, rank, &mut rng);
        let class = classify(&schur_kraus(&SchurChannel::new(c.clone()).unwrap()).unwrap());
        let found = class.schur_form.expect("Schur form recovered");
        prop_assert!(found.perm().iter().enumerate().all(|(i, &p)| i == p));
        prop_assert!(found.coeff().max_abs_diff(&c) <= 1e-9);
        prop_assert!(class.is_sio && class.is_io && class.is_mio_on_basis);
    }

    #[test]
    fn schur_channels_are_multiplicative(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = task_rng(seed, 0);
        let ch = schur_kraus(&SchurChannel::new(unit_diagonal_psd(d, 2, &mut rng)).unwrap()).unwrap();
        let rho = ginibre_state(d, &mut rng);
        let sigma = diagonal_state(d, &mut rng);
        prop_assert!(multiplicativity_deviation(&ch, &rho, &sigma).unwrap() <= 1e-12);
    }

    #[test]
    fn sio_without_schur_form_breaks_multiplicativity(seed in any::<u64>()) {
        let fixture = non_schur_sio_fixture();
        let class = classify(&fixture);
        prop_assert!(class.is_sio && class.schur_form.is_none());
        let mut rng = task_rng(seed, 0);
        let rho = ginibre_state(2, &mut rng);
        let sigma = diagonal_state(2, &mut rng);
        prop_assert!(multiplicativity_deviation(&fixture, &rho, &sigma).unwrap() > 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn iterative_solver_matches_helstrom(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = task_rng(seed, 0);
        let rho = if seed % 2 == 0 { pure_state(d, &mut rng) } else { ginibre_state(d, &mut rng) };
        let pr = simplex_point(2, &mut rng);
        let ph = simplex_point(2, &mut rng);
        let game = PhaseGame::new(vec![(pr[0], 6.0 * ph[0]), (pr[1], 6.0 * ph[1])], d).unwrap();
        let exact = helstrom(&game, &rho).unwrap().0;
        let sol = optimal_success_iterative(&game, &rho).unwrap();
        prop_assert!((sol.value - exact).abs() <= 1e-8);
    }

    #[test]
    fn advantage_within_robustness_bound(seed in any::<u64>(), d in 2usize..4, m in 2usize..5) {
        let mut rng = task_rng(seed, 0);
        let rho = ginibre_state(d, &mut rng);
        let priors = simplex_point(m, &mut rng);
        let phases = simplex_point(m, &mut rng);
        let game = PhaseGame::new(priors.iter().zip(&phases).map(|(&p, &t)| (p, 20.0 * t)).collect(), d).unwrap();
        let adv = empirical_advantage(&game, &rho).unwrap();
        prop_assert!(adv <= 1.0 + robustness(&rho).unwrap() + 1e-4);
        let dephased = full_dephase(&rho);
        prop_assert!(empirical_advantage(&game, &dephased).unwrap() <= adv + 1e-8);
        let (v, povm) = optimal_success(&game, &rho).unwrap();
        prop_assert!(v <= 1.0 + 1e-12);
        let mut total = ComplexMatrix::zeros(d);
        for e in povm.elements() {
            prop_assert!(eig_hermitian(e).unwrap().min() >= -1e-9);
            total += e;
        }
        prop_assert!((&total - &ComplexMatrix::identity(d)).frobenius_norm() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn pipeline_matches_closed_form(z in 0.75f64..=1.0) {
        let trace = run_protocol(&psi_state(), &phi_state(z).unwrap(), 2).unwrap();
        prop_assert!(trace.processed.max_abs_diff(&closed_form_rho_prime(z).unwrap()) <= 1e-12);
        prop_assert!(trace.catalyst_restored_error <= 1e-10);
    }

    #[test]
    fn catalyst_restored_for_random_targets(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = task_rng(seed, 0);
        let rho = ginibre_state(2, &mut rng);
        let gamma = ginibre_state(1 << n, &mut rng);
        let trace = run_protocol(&rho, &gamma, n).unwrap();
        let catalyst = build_catalyst(&rho, &gamma, n).unwrap();
        let restored = trace.after_step3.trace_system().unwrap();
        prop_assert!(cq_trace_distance(&restored, &catalyst).unwrap() <= 1e-10);
        prop_assert!(trace.processed.max_abs_diff(&processed_state(&gamma, n).unwrap()) <= 1e-10);
        for s in [&trace.after_step1, &trace.after_step2, &trace.after_step3] {
            let m = s.to_matrix().unwrap();
            prop_assert!((m.trace().re - 1.0).abs() <= 1e-10);
            prop_assert!(m.hermiticity_error() <= 1e-10);
            prop_assert!(eig_hermitian(&m).unwrap().min() >= -1e-10);
        }
    }
}
