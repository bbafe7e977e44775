mod common;

use common::{decaying_matrix, dense};
use ridgesketch_core::linalg::{DataMatrix, DenseMatrix};
use ridgesketch_core::sketch::{
    block_lanczos, exact_truncated_svd, per_vector_check, residual_spectral_norm, LanczosConfig,
};

fn projection_residual(a: &DataMatrix, basis: &DenseMatrix) -> f64 {
    let ad = a.to_dense();
    let proj = basis.matmul(&basis.t_matmul(&ad).unwrap()).unwrap();
    ad.sub(&proj).unwrap().frobenius_norm()
}

#[test]
fn reconstruction_is_projection_of_data() {
    let a = dense(decaying_matrix(30, 60, 1.0, 3));
    let sv = block_lanczos(&a, &LanczosConfig::new(6, 0.5, 7)).unwrap();
    let ad = a.to_dense();
    let proj = sv.left.matmul(&sv.left.t_matmul(&ad).unwrap()).unwrap();
    let diff = sv.reconstruct().sub(&proj).unwrap().frobenius_norm();
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn bitwise_deterministic() {
    let a = dense(decaying_matrix(25, 40, 1.0, 1));
    let cfg = LanczosConfig::new(5, 0.5, 11);
    let x = block_lanczos(&a, &cfg).unwrap();
    let y = block_lanczos(&a, &cfg).unwrap();
    assert_eq!(x.singular_values, y.singular_values);
    assert_eq!(x.left, y.left);
    assert_eq!(x.right, y.right);
}

#[test]
fn values_bounded_and_ordered_under_per_vector_event() {
    let eps = 0.5;
    for seed in 0..10 {
        let a = dense(decaying_matrix(40, 80, 1.0, 100 + seed));
        let k = 6;
        let exact = exact_truncated_svd(&a, 40).unwrap().singular_values;
        let sv = block_lanczos(&a, &LanczosConfig::new(k, eps, seed)).unwrap();
        if !per_vector_check(&sv, &exact, eps, 1e-12).holds {
            continue;
        }
        for (i, s) in sv.singular_values.iter().enumerate() {
            assert!(*s <= exact[i] + eps * exact[k] + 1e-12);
        }
        assert!(sv.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn more_blocks_do_not_hurt() {
    for seed in 0..5 {
        let a = dense(decaying_matrix(40, 70, 0.5, 200 + seed));
        let mut previous = f64::INFINITY;
        for q in 1..=4 {
            let sv = block_lanczos(&a, &LanczosConfig::new(5, 0.5, seed).with_blocks(q)).unwrap();
            let err = projection_residual(&a, &sv.left);
            assert!(
                err <= previous + 1e-8,
                "seed {seed} q {q}: {err} > {previous}"
            );
            previous = err;
        }
    }
}

#[test]
fn residual_norm_matches_next_singular_value_for_exact_basis() {
    let a = dense(decaying_matrix(20, 40, 1.0, 5));
    let all = exact_truncated_svd(&a, 20).unwrap().singular_values;
    let top = exact_truncated_svd(&a, 4).unwrap();
    let r = residual_spectral_norm(&a, &top.left, 500, 1).unwrap();
    assert!((r - all[4]).abs() < 1e-6 * all[4]);
}
