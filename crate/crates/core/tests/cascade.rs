mod support;

use firmnet_core::cascade::{
    derive_step_params, read_fmx, sweep, update_probability, write_fmx, CascadeEngine, CascadeGraph, CascadeParams,
    FailureRecord, SweepConfig, DEFAULT_BIT_BUDGET,
};
use firmnet_core::stats::mean_se;
use firmnet_core::synth::{gen_shareholding, ShareGenParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::cascade_oracle::BruteForceCascade;

fn synthetic(n: usize, seed: u64) -> CascadeGraph {
    let net = gen_shareholding(&ShareGenParams {
        n_nodes: n,
        seed,
        ..Default::default()
    })
    .unwrap();
    CascadeGraph::from_network(&net).unwrap()
}

fn random_dag(n: usize, density: f64, seed: u64) -> Vec<(u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    edges
}

fn full(graph: &CascadeGraph, params: CascadeParams<f64>) -> firmnet_core::cascade::RunOutput<f64> {
    CascadeEngine::new(graph, params)
        .unwrap()
        .run(FailureRecord::Full {
            budget_bits: DEFAULT_BIT_BUDGET,
        })
        .unwrap()
}

proptest! {
    #[test]
    fn probability_stays_in_unit_interval(
        alpha in 0.0f64..=1.0,
        gamma in 0.0f64..50.0,
        steps in 1usize..200,
        d in 1u32..50,
        m_frac in 0.0f64..=1.0,
        p_prev in 0.0f64..=1.0,
    ) {
        let step = derive_step_params(alpha, gamma, steps).unwrap();
        let m = (m_frac * d as f64).floor() as u32;
        let (x, p) = update_probability(m, d, &step, p_prev);
        prop_assert!((0.0..=step.k_step).contains(&x));
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn failure_matrix_only_grows(seed in any::<u64>(), alpha in 0.1f64..=1.0, gamma in 0.5f64..5.0) {
        let graph = CascadeGraph::from_edges(30, random_dag(30, 0.2, seed));
        let mut params = CascadeParams::new(alpha, gamma, 20, seed);
        params.shock_fraction = 0.2;
        let out = full(&graph, params);
        let m = out.matrix.unwrap();
        for r in 1..m.steps {
            for i in 0..m.nodes {
                prop_assert!(!m.get(r - 1, i) || m.get(r, i));
            }
        }
        let total_new: usize = out.metrics.per_step_new_failures.iter().sum();
        prop_assert_eq!(m.row_count(m.steps - 1), out.metrics.shock_size + total_new);
    }
}

#[test]
fn zero_alpha_means_no_propagation() {
    let graph = synthetic(5000, 1);
    for gamma in [0.0, 1.0, 5.0] {
        let out = full(&graph, CascadeParams::new(0.0, gamma, 50, 3));
        assert_eq!(out.metrics.mean_downtime, 0.0);
        assert_eq!(out.metrics.failure_proportion, 0.0);
        assert!(out.metrics.shock_size > 0);
    }
}

#[test]
fn huge_discount_is_memoryless() {
    let step = derive_step_params(0.5f64, 1e6, 50).unwrap();
    for (m, d, p_prev) in [(0, 3, 0.7), (1, 3, 0.9), (2, 2, 0.3)] {
        let (x, p) = update_probability(m, d, &step, p_prev);
        assert!((p - x).abs() < 1e-12, "m={m} d={d}: p={p} x={x}");
    }
}

#[test]
fn runs_are_identical_across_thread_counts() {
    let graph = synthetic(20_000, 2);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| full(&graph, CascadeParams::new(0.8, 1.0, 30, 99)))
    };
    let a = run(1);
    let b = run(8);
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.matrix, b.matrix);
}

#[test]
fn bit_budget_refuses_oversized_matrices() {
    let graph = synthetic(1000, 4);
    let out = CascadeEngine::new(&graph, CascadeParams::new(0.5, 1.0, 50, 1))
        .unwrap()
        .run(FailureRecord::Full { budget_bits: 49_999 })
        .unwrap();
    assert!(out.matrix_refused);
    assert!(out.matrix.is_none());
}

#[test]
fn failure_matrix_file_round_trip() {
    let graph = synthetic(777, 5);
    let out = full(&graph, CascadeParams::new(0.9, 1.0, 13, 8));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.fmx");
    let m = out.matrix.unwrap();
    write_fmx(&path, &m).unwrap();
    assert_eq!(read_fmx(&path).unwrap(), m);
}

fn compare_with_oracle(n: usize, edges: &[(u32, u32)], replicates: u64) {
    let (alpha, gamma, steps, shock) = (0.9, 1.0, 10, 0.2);
    let graph = CascadeGraph::from_edges(n, edges.iter().copied());
    let mut ours = Vec::with_capacity(replicates as usize);
    for seed in 0..replicates {
        let mut p = CascadeParams::new(alpha, gamma, steps, seed);
        p.shock_fraction = shock;
        let m = CascadeEngine::new(&graph, p).unwrap().run(FailureRecord::Summary).unwrap().metrics;
        ours.push(m.failure_proportion);
    }
    let oracle = BruteForceCascade::new(n, edges, alpha, gamma, steps, shock);
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let theirs: Vec<f64> = (0..replicates).map(|_| oracle.run(&mut rng).1).collect();
    let (ma, sa) = mean_se(&ours);
    let (mb, sb) = mean_se(&theirs);
    let tol = 3.0 * (sa * sa + sb * sb).sqrt();
    assert!(ma > 0.0);
    assert!((ma - mb).abs() <= tol, "engine {ma} vs oracle {mb} (tolerance {tol})");
}

#[test]
fn engine_matches_brute_force_on_a_line() {
    compare_with_oracle(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], 20_000);
}

#[test]
fn engine_matches_brute_force_on_a_dag() {
    compare_with_oracle(10, &random_dag(10, 0.35, 17), 20_000);
}

#[test]
fn sweep_trends_on_a_small_network() {
    let graph = synthetic(3000, 6);
    let cfg = SweepConfig {
        alphas: vec![0.2, 0.6, 1.0],
        gammas: vec![1.0, 5.0],
        steps: 50,
        shock_fraction: 0.1,
        replicates: 10,
        seed: 7,
    };
    let t = sweep(&graph, &cfg).unwrap();
    assert_eq!(t.rows.len(), 60);
    let c = |a, g| t.cell(a, g, 2).mean_downtime;
    assert!(c(0, 0) < c(1, 0) && c(1, 0) < c(2, 0));
    assert!(c(2, 1) < c(2, 0));
}
