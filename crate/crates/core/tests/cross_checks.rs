//! Cross-module consistency checks: the simulators, the exact enumeration,
//! the one-window kernel, and the test statistics must all agree with each
//! other, not just with their own unit oracles.

use std::collections::BTreeMap;

use bayule_core::ba::{enumerate_exact, GraphState};
use bayule_core::coupling::window_increment_pmf;
use bayule_core::rng::{par_replica_map, replica_rng_channel};
use bayule_core::stats::{
    chi_square_gof, fixed_vertex_experiment, tv_distance, uniform_vertex_degree_counts, Histogram,
};
use rand::Rng;

/// Monte Carlo degree of a uniform vertex against the exact mixture law
/// derived from full enumeration (three vertices, one edge per arrival).
#[test]
fn uniform_vertex_degree_matches_enumeration_mixture() {
    let replicas = 40_000;
    let hist = uniform_vertex_degree_counts(1, 3, replicas, 4).unwrap();
    let law = enumerate_exact(1, 3).unwrap().uniform_vertex_degree_law();

    let gof = chi_square_gof(
        &hist,
        1,
        |k| law.get(&k).copied().unwrap_or(0.0),
        |_| 0.0,
        5.0,
    )
    .unwrap();
    assert!(gof.p_value > 1e-3, "ragged fit: {gof:?}");

    let tv = tv_distance(&hist.fractions(), &law).unwrap();
    assert!(tv < 0.02, "tv = {tv}");
}

/// Marginal law of one traced vertex against the exact per-vertex marginal
/// from enumeration.
#[test]
fn traced_vertex_marginal_matches_enumeration() {
    let replicas = 40_000;
    let rep = fixed_vertex_experiment(1, 2, &[3], replicas, 9).unwrap();
    let marginal = rep.marginal(0);
    let law = enumerate_exact(1, 3).unwrap().vertex_degree_law(2);

    let tv = tv_distance(&marginal.fractions(), &law).unwrap();
    assert!(tv < 0.02, "tv = {tv}");
}

/// One-window degree increments observed in the growing graph, conditioned
/// on the start-of-window degree, against the exact window kernel.
#[test]
fn growth_window_increments_match_window_kernel() {
    let m = 2u32;
    let n0 = 30u64;
    let replicas = 30_000u64;
    let pairs: Vec<(u64, u64)> = par_replica_map(77, replicas, |_r, rng| {
        let mut state = GraphState::new(m);
        state.run_to_windows(n0, rng);
        let before = state.degree(1).unwrap();
        state.run_to_windows(n0 + 1, rng);
        (before, state.degree(1).unwrap() - before)
    });

    // Condition on the modal start-of-window degree so the conditional
    // sample is large, then compare against the exact kernel at that state.
    let mut by_start: BTreeMap<u64, Histogram> = BTreeMap::new();
    for &(k, d) in &pairs {
        by_start.entry(k).or_default().add(d);
    }
    let (&k_mode, cond) = by_start
        .iter()
        .max_by_key(|(_, h)| h.total())
        .expect("nonempty");
    assert!(cond.total() > 1_000, "conditional sample too small");

    let pmf = window_increment_pmf(k_mode, n0, m).unwrap();
    let law: BTreeMap<u64, f64> = pmf
        .iter()
        .enumerate()
        .map(|(j, &p)| (j as u64, p))
        .collect();
    let tv = tv_distance(&cond.fractions(), &law).unwrap();
    assert!(tv < 0.05, "k = {k_mode}, tv = {tv}");

    let gof = chi_square_gof(
        cond,
        0,
        |j| pmf.get(j as usize).copied().unwrap_or(0.0),
        |_| 0.0,
        5.0,
    )
    .unwrap();
    assert!(gof.p_value > 1e-3, "k = {k_mode}: {gof:?}");
}

/// Under the null, goodness-of-fit p-values are approximately uniform:
/// Kolmogorov distance to the uniform CDF stays below 0.05 across 1000
/// simulated nulls of 200 draws each.
#[test]
fn gof_p_values_are_uniform_under_null() {
    let nulls = 1_000u64;
    let draws = 200u32;
    // Geometric null, p(k) = 2^-k on k >= 1, sampled by exact inversion.
    let mut p_values: Vec<f64> = par_replica_map(31, nulls, |_r, rng| {
        let mut hist = Histogram::new();
        for _ in 0..draws {
            let u: f64 = rng.random();
            let k = (-(1.0 - u).log2()).floor() as u64 + 1;
            hist.add(k);
        }
        chi_square_gof(
            &hist,
            1,
            |k| 0.5f64.powi(k as i32),
            |k| 0.5f64.powi(k as i32 - 1),
            5.0,
        )
        .unwrap()
        .p_value
    });
    p_values.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let n = p_values.len() as f64;
    let mut ks = 0.0f64;
    for (i, &p) in p_values.iter().enumerate() {
        ks = ks.max((p - i as f64 / n).abs());
        ks = ks.max(((i + 1) as f64 / n - p).abs());
    }
    assert!(ks <= 0.05, "KS distance to uniform = {ks}");
}

/// Total-variation distance is a metric bounded by one: symmetry, triangle
/// inequality, and range, on randomized distribution triples.
#[test]
fn tv_distance_metric_properties() {
    let mut rng = replica_rng_channel(3, 0, 0);
    for _ in 0..200 {
        let mut random_pmf = |support: u64| -> BTreeMap<u64, f64> {
            let raw: Vec<f64> = (0..support).map(|_| rng.random::<f64>() + 0.01).collect();
            let total: f64 = raw.iter().sum();
            raw.iter()
                .enumerate()
                .map(|(k, &w)| (k as u64, w / total))
                .collect()
        };
        let p = random_pmf(6);
        let q = random_pmf(6);
        let r = random_pmf(6);

        let pq = tv_distance(&p, &q).unwrap();
        let qp = tv_distance(&q, &p).unwrap();
        let pr = tv_distance(&p, &r).unwrap();
        let rq = tv_distance(&r, &q).unwrap();

        assert_eq!(pq, qp, "symmetry");
        assert!((0.0..=1.0 + 1e-12).contains(&pq), "range: {pq}");
        assert!(pq <= pr + rq + 1e-12, "triangle: {pq} > {pr} + {rq}");
    }
}
