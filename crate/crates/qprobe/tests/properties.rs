//! Property suite: structural invariants of the graph observables, the
//! propagators and the readout, checked against independent oracles.

mod common;

use proptest::prelude::*;

use qprobe::dynamics::{self, EffectiveHamiltonian, Leak, TimeGrid};
use qprobe::experiments::{
    self, build_dataset, build_intrusion_dataset, dataset_to_jsonl, fit_and_evaluate,
    parse_composition, EnsembleSpec, IntrusionSpec, LambdaChoice, Split,
};
use qprobe::graph::{self, Graph, ObservableKind};
use qprobe::probe::{extract_features, initial_state, ProbeConfig};
use qprobe::readout;
use qprobe::seed;

fn er(n: usize, p: f64, s: u64) -> Graph {
    graph::gen_erdos_renyi(n, p, &mut seed::rng(s, &[])).unwrap()
}

fn connected(n: usize, p: f64, s: u64) -> Graph {
    graph::sample_valid(n, p, &mut seed::rng(s, &[]), 10_000).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_two_equals_degree_sum(n in 2usize..40, s in 0u64..1_000_000, p in 0.05f64..0.95) {
        let g = er(n, p, s);
        let degree_sum: usize = g.degrees().iter().sum();
        prop_assert_eq!(graph::trace_power(&g, 2).unwrap(), degree_sum as f64);
        prop_assert_eq!(degree_sum, 2 * g.edge_count());
    }

    #[test]
    fn trace_three_counts_triangles(n in 3usize..=20, s in 0u64..1_000_000) {
        let g = er(n, 0.4, s);
        let triangles = common::triangle_count(&g);
        prop_assert_eq!(graph::trace_power(&g, 3).unwrap(), (6 * triangles) as f64);
    }

    #[test]
    fn trace_four_counts_closed_walks(n in 3usize..=12, s in 0u64..1_000_000) {
        let g = er(n, 0.5, s);
        let walks = common::closed_walk4_count(&g);
        prop_assert_eq!(graph::trace_power(&g, 4).unwrap(), walks as f64);
    }

    #[test]
    fn eigenvalue_sum_vanishes_and_ratio_in_unit_interval(n in 4usize..30, s in 0u64..1_000_000) {
        let g = connected(n, 0.5, s);
        let eigs = g.adjacency_dense().symmetric_eigenvalues();
        let sum: f64 = eigs.iter().sum();
        prop_assert!(sum.abs() <= 1e-9 * n as f64);
        let ratio = graph::spectral_ratio(&g).unwrap();
        prop_assert!(ratio > 0.0 && ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn generated_graphs_have_canonical_edges(n in 2usize..30, s in 0u64..1_000_000) {
        let g = er(n, 0.3, s);
        for w in g.edges().windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for &(i, j) in g.edges() {
            prop_assert!(i < j && j < n);
        }
    }

    #[test]
    fn feature_values_stay_in_unit_interval(s in 0u64..1_000_000, leak_strength in 0.0f64..2.0) {
        let g = connected(10, 0.5, s);
        let probe = ProbeConfig::new(vec![0, 1, 2], TimeGrid::new(0.07, 5).unwrap(), None).unwrap();
        let h = EffectiveHamiltonian::with_leak(g, 1.0, Leak { alpha: 9, strength: leak_strength })
            .unwrap();
        let f = extract_features(&h, &probe, None).unwrap();
        for &v in f.values() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn pearson_affine_invariance(scale in 0.01f64..50.0, shift in -10.0f64..10.0, s in 0u64..1_000_000) {
        let mut rng = seed::rng(s, &[7]);
        use rand::Rng;
        let t: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let p: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let base = readout::pearson(&t, &p).unwrap();
        let mapped: Vec<f64> = p.iter().map(|v| scale * v + shift).collect();
        prop_assert!((readout::pearson(&t, &mapped).unwrap() - base).abs() <= 1e-12);
    }
}

#[test]
fn unitarity_holds_on_hundred_random_graphs() {
    let probe = ProbeConfig::standard();
    for s in 0..100u64 {
        let g = connected(50, 0.6, 10_000 + s);
        let h = EffectiveHamiltonian::hermitian(g, 1.0).unwrap();
        let psi0 = initial_state(&probe.monitored, 50).unwrap();
        for state in dynamics::evolve(&h, &psi0, &probe.grid).unwrap() {
            assert!((state.norm_sq() - 1.0).abs() <= 1e-10, "seed {s}");
        }
    }
}

#[test]
fn norm_is_monotone_under_any_positive_leak() {
    for s in 0..20u64 {
        let g = connected(20, 0.4, 20_000 + s);
        let strength = 0.1 + 1.9 * (s as f64 / 20.0);
        let h = EffectiveHamiltonian::with_leak(g, 1.0, Leak { alpha: 19, strength }).unwrap();
        let psi0 = initial_state(&[0, 1, 2], 20).unwrap();
        let states = dynamics::evolve(&h, &psi0, &TimeGrid::new(0.06, 12).unwrap()).unwrap();
        let mut prev = 1.0;
        for st in states {
            let n2 = st.norm_sq();
            assert!(n2 <= prev + 1e-12, "seed {s}: {n2} after {prev}");
            prev = n2;
        }
    }
}

#[test]
fn norm_decay_rate_matches_central_difference() {
    // d‖ψ‖²/dt = −2Γ|⟨α|ψ⟩|², checked at t = 0.3 with step 1e-4.
    let step = 1e-4;
    for s in 0..20u64 {
        let g = connected(12, 0.5, 30_000 + s);
        let strength = 0.2 + 1.8 * (s as f64 / 20.0);
        let alpha = 11;
        let h = EffectiveHamiltonian::with_leak(g, 1.0, Leak { alpha, strength }).unwrap();
        let psi0 = initial_state(&[0, 1, 2], 12).unwrap();
        let t = 0.3;
        let at = |t: f64| dynamics::propagate(&h, &psi0, t).unwrap();
        let derivative = (at(t + step).norm_sq() - at(t - step).norm_sq()) / (2.0 * step);
        let expected = -2.0 * strength * at(t).occupation(alpha).unwrap();
        let rel = (derivative - expected).abs() / expected.abs().max(1e-12);
        assert!(rel <= 1e-4, "seed {s}: derivative {derivative} vs {expected} (rel {rel:.2e})");
    }
}

#[test]
fn hermitian_evolution_matches_forty_term_series() {
    for s in 0..5u64 {
        let g = connected(12, 0.5, 40_000 + s);
        let a = g.adjacency_dense();
        let h = EffectiveHamiltonian::hermitian(g, 1.0).unwrap();
        let psi0 = initial_state(&[0, 1, 2], 12).unwrap();
        let state = dynamics::propagate(&h, &psi0, 0.3).unwrap();
        let oracle = common::taylor_state(&a, &psi0, 0.3, 40);
        let diff = common::state_diff(&state, &oracle);
        assert!(diff <= 1e-10, "seed {s}: series mismatch {diff:.2e}");
    }
}

#[test]
fn nonhermitian_evolution_matches_step_doubling_oracle() {
    for s in 0..5u64 {
        let g = connected(10, 0.5, 50_000 + s);
        let h = EffectiveHamiltonian::with_leak(g, 1.0, Leak { alpha: 9, strength: 1.0 }).unwrap();
        let psi0 = initial_state(&[0, 1], 10).unwrap();
        let state = dynamics::propagate(&h, &psi0, 0.5).unwrap();
        let oracle = common::step_doubled_state(&h, &psi0, 0.5, 4);
        let diff = common::state_diff(&state, &oracle);
        assert!(diff <= 1e-10, "seed {s}: step-doubling mismatch {diff:.2e}");
    }
}

#[test]
fn short_time_error_scales_as_tau_to_the_fifth() {
    let g = connected(12, 0.5, 60_000);
    let a = g.adjacency_dense();
    let norm_a = a
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, &l| m.max(l.abs()));
    let h = EffectiveHamiltonian::hermitian(g, 1.0).unwrap();
    let psi0 = initial_state(&[0, 1, 2], 12).unwrap();

    let err_at = |tau: f64| -> f64 {
        let exact = dynamics::propagate(&h, &psi0, tau).unwrap();
        let taylor4 = common::taylor_state(&a, &psi0, tau, 4);
        exact
            .amplitudes()
            .iter()
            .zip(taylor4.iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };

    let taus = [0.1, 0.05, 0.025];
    let errs: Vec<f64> = taus.iter().map(|&t| err_at(t)).collect();
    for (i, (&tau, &err)) in taus.iter().zip(&errs).enumerate() {
        let bound = norm_a.powi(5) * tau.powi(5) / 120.0;
        assert!(err <= 2.0 * bound, "tau {tau}: err {err:.3e} vs bound {bound:.3e}");
        if i > 0 {
            let ratio = errs[i - 1] / err;
            assert!(
                (16.0..=64.0).contains(&ratio),
                "tau halving should shrink the error ~32x, got {ratio:.1}"
            );
        }
    }
}

#[test]
fn spectral_and_series_paths_agree_on_grids() {
    let g = connected(12, 0.5, 70_000);
    let a = g.adjacency_dense();
    let h = EffectiveHamiltonian::hermitian(g, 1.0).unwrap();
    let psi0 = initial_state(&[0, 1, 2, 3], 12).unwrap();
    let grid = TimeGrid::new(0.05, 8).unwrap();
    let states = dynamics::evolve(&h, &psi0, &grid).unwrap();
    for (state, t) in states.iter().zip(grid.times()) {
        let oracle = common::taylor_state(&a, &psi0, t, 40);
        assert!(common::state_diff(state, &oracle) <= 1e-10, "t = {t}");
    }
}

#[test]
fn mixed_p_model_ranks_edge_density_correctly() {
    // TrA² is monotone in edge count, so predictions on a mixed-p test set
    // must rank the p cells: rank correlation with the true p above 0.9.
    let probe = ProbeConfig::standard();
    let train = build_dataset(
        ObservableKind::TrA2,
        &parse_composition("40xG(30,p=0.2|0.4|0.6|0.8)").unwrap(),
        &probe,
        123,
        Split::Train,
        10_000,
    )
    .unwrap();
    let test = build_dataset(
        ObservableKind::TrA2,
        &parse_composition("10xG(30,p=0.2|0.4|0.6|0.8)").unwrap(),
        &probe,
        123,
        Split::Test,
        10_000,
    )
    .unwrap();
    let report = fit_and_evaluate(&train, &test, LambdaChoice::default(), &probe).unwrap();
    let cell_p: Vec<f64> = test.patterns.iter().map(|p| p.cell.p).collect();
    let rank = readout::spearman(&cell_p, &report.test_predictions).unwrap();
    assert!(rank > 0.9, "rank correlation with p: {rank}");
}

#[test]
fn gamma_predictions_increase_with_gamma() {
    let probe = ProbeConfig::standard();
    let spec = IntrusionSpec {
        n: 30,
        p: 0.5,
        alpha: 29,
        gamma_max: 2.0,
        n_train: 80,
        n_test: 20,
        probe: probe.clone(),
        lambda: LambdaChoice::default(),
        master_seed: 9,
        max_attempts: 10_000,
    };
    let report = experiments::run_intrusion_task(&spec).unwrap();
    assert!(
        report.test_spearman.unwrap() > 0.99,
        "spearman {:?}",
        report.test_spearman
    );
}

#[test]
fn dataset_bytes_are_reproducible() {
    let probe = ProbeConfig::new(vec![0, 1], TimeGrid::new(0.05, 3).unwrap(), None).unwrap();
    let make = || {
        build_dataset(
            ObservableKind::SpectralRatio,
            &EnsembleSpec::single(6, 14, 0.5),
            &probe,
            77,
            Split::Train,
            10_000,
        )
        .unwrap()
    };
    assert_eq!(dataset_to_jsonl(&make(), None), dataset_to_jsonl(&make(), None));

    let spec = IntrusionSpec {
        n: 12,
        p: 0.5,
        alpha: 11,
        gamma_max: 2.0,
        n_train: 4,
        n_test: 2,
        probe,
        lambda: LambdaChoice::default(),
        master_seed: 3,
        max_attempts: 10_000,
    };
    let a = build_intrusion_dataset(&spec).unwrap();
    let b = build_intrusion_dataset(&spec).unwrap();
    assert_eq!(dataset_to_jsonl(&a.0, None), dataset_to_jsonl(&b.0, None));
    assert_eq!(dataset_to_jsonl(&a.1, None), dataset_to_jsonl(&b.1, None));
}

#[test]
fn shot_noise_converges_at_inverse_square_root_rate() {
    // regression of log mean absolute error on log shots: slope −0.5 ± 0.1
    let g = connected(12, 0.5, 80_000);
    let h = EffectiveHamiltonian::hermitian(g, 1.0).unwrap();
    let grid = TimeGrid::new(0.05, 5).unwrap();
    let exact_cfg = ProbeConfig::new(vec![0, 1, 2], grid, None).unwrap();
    let exact = extract_features(&h, &exact_cfg, None).unwrap();

    let mut points = Vec::new();
    for (level, shots) in [(0u64, 10_000u64), (1, 1_000_000)] {
        let cfg = ProbeConfig { shots: Some(shots), ..exact_cfg.clone() };
        let mut total = 0.0;
        let mut count = 0usize;
        for rep in 0..60u64 {
            let mut rng = seed::rng(81_000, &[level, rep]);
            let noisy = extract_features(&h, &cfg, Some(&mut rng)).unwrap();
            for (e, n) in exact.values().iter().zip(noisy.values()) {
                total += (e - n).abs();
                count += 1;
            }
        }
        points.push(((shots as f64).ln(), (total / count as f64).ln()));
    }
    let slope = (points[1].1 - points[0].1) / (points[1].0 - points[0].0);
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
}
