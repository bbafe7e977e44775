//! Kept in its own binary so no other test competes for the CPU.

use std::time::Instant;

use ridgesketch_core::dataset::{generate_synthetic, Decay, SyntheticSpec};
use ridgesketch_core::solver::{plain_svrg, RidgeProblem, Schedule};
use ridgesketch_core::svrg::{NoClock, SvrgConfig};

fn problem(n: usize, d: usize, seed: u64) -> RidgeProblem {
    generate_synthetic(&SyntheticSpec::new(n, d, Decay::Quadratic, seed))
        .unwrap()
        .ridge_problem(1e-4)
        .unwrap()
}

/// Fastest wall time of a fixed number of plain SVRG steps per data point.
fn epoch_time(n: usize) -> f64 {
    let p = problem(n, 50, 9);
    let cfg = SvrgConfig::tuned(10, 2 * (n + 50), 1e-3, 0);
    let mut samples: Vec<f64> = (0..5)
        .map(|_| {
            let t = Instant::now();
            plain_svrg(&p, &Schedule::Fixed(cfg), &NoClock, None).unwrap();
            t.elapsed().as_secs_f64()
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[0]
}

#[test]
fn epoch_cost_is_linear_in_n() {
    epoch_time(2000);
    let ratio = epoch_time(8000) / epoch_time(4000);
    assert!((1.5..=3.0).contains(&ratio), "time ratio {ratio}");
}
