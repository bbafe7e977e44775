use ridgesketch::bench::{run_convergence, run_ratio_curve, BenchConfig, Method, StepSelection};
use ridgesketch::StdClock;
use ridgesketch_core::dataset::{generate_synthetic, Decay, SyntheticSpec};
use ridgesketch_core::precond::SpectrumSummary;
use ridgesketch_core::solver::RidgeProblem;

fn problem(n: usize, d: usize, seed: u64) -> RidgeProblem {
    generate_synthetic(&SyntheticSpec::new(n, d, Decay::Quadratic, seed))
        .unwrap()
        .ridge_problem(1e-4)
        .unwrap()
}

#[test]
fn curves_are_nonnegative_and_share_the_start() {
    let p = problem(200, 30, 1);
    let report = run_convergence(
        &p,
        &BenchConfig::new(1e-4, 8, 5, vec![3, 4]),
        &StdClock::new(),
    )
    .unwrap();
    assert!(report
        .rows()
        .all(|r| r.suboptimality >= 0.0 && r.elapsed_ms >= 0.0));
    for seed in [3, 4] {
        let a = report.run(Method::Svrg, seed).unwrap();
        let b = report.run(Method::SketchedSvrg, seed).unwrap();
        assert_eq!(a.rows.len(), 6);
        assert_eq!(
            a.at_epoch(0).unwrap().suboptimality,
            b.at_epoch(0).unwrap().suboptimality
        );
    }
}

#[test]
fn csv_is_deterministic_apart_from_timings() {
    let p = problem(150, 20, 2);
    let cfg = BenchConfig::new(1e-4, 5, 4, vec![0]);
    let strip = |cfg: &BenchConfig| {
        let report = run_convergence(&p, cfg, &StdClock::new()).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&cfg), strip(&cfg));
}

#[test]
fn fixed_step_is_used_as_given() {
    let p = problem(100, 10, 5);
    let mut cfg = BenchConfig::new(1e-4, 3, 2, vec![0]);
    cfg.step = StepSelection::Fixed(0.05);
    let report = run_convergence(&p, &cfg, &StdClock::new()).unwrap();
    for m in Method::ALL {
        assert_eq!(report.run(m, 0).unwrap().step_size, 0.05);
    }
}

#[test]
fn flat_spectrum_has_unit_ratio() {
    let spec = SpectrumSummary::new(vec![0.3; 25], 1e-6).unwrap();
    let rows = run_ratio_curve(&spec, 25).unwrap();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| (r.ratio - 1.0).abs() < 1e-12));
}

#[test]
fn ratio_grows_with_k_on_decaying_spectra() {
    let ev: Vec<f64> = (1..=50).map(|q| (q as f64).powi(-2)).collect();
    let rows = run_ratio_curve(&SpectrumSummary::new(ev, 1e-6).unwrap(), 50).unwrap();
    assert!(rows.windows(2).all(|w| w[1].ratio >= w[0].ratio - 1e-12));
}
