mod common;

use common::{decaying_matrix, dense, patterned_sparse};
use proptest::prelude::*;
use ridgesketch_core::dataset::{generate_synthetic, Decay, SyntheticSpec};
use ridgesketch_core::linalg::{max_abs_diff, DataMatrix};
use ridgesketch_core::precond::Preconditioner;
use ridgesketch_core::sketch::{block_lanczos, LanczosConfig};
use ridgesketch_core::solver::{
    plain_svrg, reference_minimum, sketched_preconditioned_svrg, ApplicationMode,
    PreconditionedComponents, RidgeComponents, RidgeProblem, Schedule, SketchOptions,
};
use ridgesketch_core::svrg::{svrg_solve, FiniteSum, NoClock, SvrgConfig};

fn problem(seed: u64) -> RidgeProblem {
    let x = decaying_matrix(10, 30, 1.0, seed);
    let y: Vec<f64> = (0..30).map(|i| (0.3 * i as f64).sin()).collect();
    RidgeProblem::new(dense(x), y, 1e-2).unwrap()
}

fn sketched(p: &RidgeProblem, k: usize, seed: u64) -> Preconditioner {
    let sv = block_lanczos(&p.normalized_data(), &LanczosConfig::new(k, 0.5, seed)).unwrap();
    Preconditioner::sketched(&sv, p.lambda()).unwrap()
}

fn component_average<F: FiniteSum>(f: &F, w: &[f64]) -> f64 {
    let n = f.num_components();
    let mut total = 0.0;
    for i in 0..n {
        // Each component is a quadratic whose value is recoverable from its
        // gradient g and the coordinate change: f_i = ½‖g‖²/β_i when the
        // component is ½β_i(uᵀw − c)² with unit u.
        let g = f.component_gradient(i, w);
        let gn = g.iter().map(|x| x * x).sum::<f64>();
        total += 0.5 * gn / f.betas()[i];
    }
    total / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn components_average_to_objective(seed in 0u64..10_000) {
        let p = problem(seed % 7);
        let w: Vec<f64> = (0..10).map(|i| ((seed + i) as f64 * 0.77).sin()).collect();
        let plain = RidgeComponents::new(&p);
        let a = component_average(&plain, &w);
        prop_assert!((a - plain.objective(&w)).abs() < 1e-12 * a.max(1.0));
        let pc = sketched(&p, 3, 1);
        let pre = PreconditionedComponents::new(&p, &pc, ApplicationMode::Lazy).unwrap();
        let b = component_average(&pre, &w);
        prop_assert!((b - pre.objective(&w)).abs() < 1e-12 * b.max(1.0));
    }
}

#[test]
fn finite_difference_hessian_matches_conditioned_matrix() {
    let p = problem(2);
    let pc = sketched(&p, 4, 3);
    let comps = PreconditionedComponents::new(&p, &pc, ApplicationMode::Dense).unwrap();
    let m = ridgesketch_core::precond::conditioned_matrix(&p.normalized_data(), p.lambda(), &pc)
        .unwrap();
    let w: Vec<f64> = (0..10).map(|i| 0.2 * i as f64 - 1.0).collect();
    let h = 1e-4;
    for j in 0..10 {
        let mut plus = w.clone();
        let mut minus = w.clone();
        plus[j] += h;
        minus[j] -= h;
        let gp = comps.full_gradient(&plus);
        let gm = comps.full_gradient(&minus);
        let fd: Vec<f64> = gp
            .iter()
            .zip(&gm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        let col = m.col(j);
        let scale = col.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        assert!(max_abs_diff(&fd, col) < 1e-5 * scale);
    }
}

#[test]
fn lazy_projection_drift_stays_small() {
    let x = patterned_sparse(40, 120, 1);
    let y: Vec<f64> = (0..120).map(|i| (i % 5) as f64 - 2.0).collect();
    let p = RidgeProblem::new(DataMatrix::sparse(x), y, 1e-3).unwrap();
    let pc = sketched(&p, 8, 2);
    let comps = PreconditionedComponents::new(&p, &pc, ApplicationMode::Lazy).unwrap();
    let beta_hat = comps.betas().iter().sum::<f64>() / comps.num_components() as f64;
    let cfg = SvrgConfig::tuned(10, 2 * comps.num_components(), 0.5 / beta_hat, 1);
    let (_, trace) = svrg_solve(&comps, &cfg, &[0.0; 40]).unwrap();
    for r in &trace.records {
        assert!(
            r.projection_drift.unwrap() <= 1e-8,
            "{:?}",
            r.projection_drift
        );
    }
}

#[test]
fn sketched_beats_plain_on_quadratic_decay() {
    let (n, d, k, lambda, epochs) = (300, 60, 15, 1e-6, 12);
    let mut wins = 0;
    let seeds = 20;
    for seed in 0..seeds {
        let ds = generate_synthetic(&SyntheticSpec::new(n, d, Decay::Quadratic, seed)).unwrap();
        let p = ds.ridge_problem(lambda).unwrap();
        let r = reference_minimum(&p).unwrap();
        let m = 2 * (n + d);
        let plain_beta = {
            let c = RidgeComponents::new(&p);
            c.betas().iter().sum::<f64>() / c.num_components() as f64
        };
        let plain = plain_svrg(
            &p,
            &Schedule::Fixed(SvrgConfig::tuned(epochs, m, 0.5 / plain_beta, seed)),
            &NoClock,
            None,
        )
        .unwrap();
        let pc = sketched(&p, k, seed);
        let pre_beta = {
            let c = PreconditionedComponents::new(&p, &pc, ApplicationMode::Dense).unwrap();
            c.betas().iter().sum::<f64>() / c.num_components() as f64
        };
        let run = sketched_preconditioned_svrg(
            &p,
            &SketchOptions::new(k, seed),
            &Schedule::Fixed(SvrgConfig::tuned(epochs, m, 0.5 / pre_beta, seed)),
            &NoClock,
            None,
        )
        .unwrap();
        let a = r.suboptimality(&p, &run.w).unwrap();
        let b = r.suboptimality(&p, &plain.w).unwrap();
        if a <= b {
            wins += 1;
        }
    }
    assert!(wins >= 17, "sketched won on {wins} of {seeds} seeds");
}
