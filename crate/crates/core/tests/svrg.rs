mod common;

use common::{decaying_matrix, dense};
use ridgesketch_core::linalg::{max_abs_diff, DataMatrix};
use ridgesketch_core::solver::{RidgeComponents, RidgeProblem};
use ridgesketch_core::svrg::{
    svrg_solve, theoretical_params, variance_reduced_direction, FiniteSum, SvrgConfig,
    WeightedSampler,
};

fn small_problem(seed: u64) -> RidgeProblem {
    let x = decaying_matrix(6, 12, 1.0, seed);
    let y: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
    RidgeProblem::new(dense(x), y, 0.05).unwrap()
}

#[test]
fn inner_direction_is_unbiased() {
    let p = small_problem(1);
    let comps = RidgeComponents::new(&p);
    let n = comps.num_components();
    assert!(n <= 20);
    let sampler = WeightedSampler::new(comps.betas()).unwrap();
    let weights: Vec<f64> = sampler
        .probabilities()
        .iter()
        .map(|q| 1.0 / (n as f64 * q))
        .collect();
    let w: Vec<f64> = (0..6).map(|i| 0.3 * i as f64 - 0.5).collect();
    let snapshot: Vec<f64> = (0..6).map(|i| 0.1 * (i as f64).cos()).collect();
    let full = comps.full_gradient(&snapshot);
    let mut expectation = vec![0.0; 6];
    for (i, q) in sampler.probabilities().iter().enumerate() {
        let v = variance_reduced_direction(&comps, i, &w, &snapshot, &full, weights[i]);
        expectation
            .iter_mut()
            .zip(&v)
            .for_each(|(e, x)| *e += q * x);
    }
    assert!(max_abs_diff(&expectation, &comps.full_gradient(&w)) < 1e-10);
}

#[test]
fn equal_betas_sample_like_uniform() {
    let weighted = WeightedSampler::new(&[2.5; 7]).unwrap();
    let uniform = WeightedSampler::uniform(7).unwrap();
    for step in 0..1000 {
        let u = (step as f64 + 0.5) / 1000.0;
        assert_eq!(weighted.sample(u), uniform.sample(u));
    }
}

#[test]
fn theoretical_parameters_decrease_objective() {
    for seed in 0..5 {
        let p = small_problem(10 + seed);
        let comps = RidgeComponents::new(&p);
        let w0 = vec![0.0; 6];
        let cfg = theoretical_params(&comps, comps.objective(&w0), 1e-6)
            .unwrap()
            .with_seed(seed);
        let (_, trace) = svrg_solve(&comps, &cfg, &w0).unwrap();
        let first = trace.records.first().unwrap().objective;
        assert!(trace.last().unwrap().objective <= first + 1e-12);
    }
}

#[test]
fn runs_are_reproducible() {
    let p = small_problem(3);
    let comps = RidgeComponents::new(&p);
    let cfg = SvrgConfig::tuned(6, 36, 0.05, 42);
    let (a, ta) = svrg_solve(&comps, &cfg, &[0.0; 6]).unwrap();
    let (b, tb) = svrg_solve(&comps, &cfg, &[0.0; 6]).unwrap();
    assert!(max_abs_diff(&a, &b) < 1e-10);
    for (x, y) in ta.records.iter().zip(&tb.records) {
        assert!((x.objective - y.objective).abs() < 1e-10);
    }
}

#[test]
fn sparse_storage_gives_same_run() {
    let x = decaying_matrix(6, 12, 1.0, 4);
    let y: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
    let sparse = ridgesketch_core::linalg::SparseMatrix::from_dense(&x);
    let pd = RidgeProblem::new(dense(x), y.clone(), 0.1).unwrap();
    let ps = RidgeProblem::new(DataMatrix::sparse(sparse), y, 0.1).unwrap();
    let cfg = SvrgConfig::tuned(4, 30, 0.05, 8);
    let (a, _) = svrg_solve(&RidgeComponents::new(&pd), &cfg, &[0.0; 6]).unwrap();
    let (b, _) = svrg_solve(&RidgeComponents::new(&ps), &cfg, &[0.0; 6]).unwrap();
    assert!(max_abs_diff(&a, &b) < 1e-12);
}
