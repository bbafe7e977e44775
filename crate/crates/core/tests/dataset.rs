mod common;

use common::patterned_sparse;
use ridgesketch_core::dataset::{
    average_norm_normalize, generate_synthetic, mean_column_norm, Decay, LabeledDataset,
    Provenance, SyntheticSpec,
};
use ridgesketch_core::linalg::{max_abs_diff, DataMatrix};

#[test]
fn normalization_commutes_with_matvec() {
    let x = DataMatrix::sparse(patterned_sparse(15, 25, 3));
    let ds = LabeledDataset::new(x.clone(), vec![1.0; 25], Provenance::File("mem".into())).unwrap();
    let scale = mean_column_norm(&x);
    let out = average_norm_normalize(ds).unwrap();
    assert!((mean_column_norm(&out.data) - 1.0).abs() < 1e-12);
    assert_eq!(out.data.nnz(), x.nnz());
    for t in 0..5 {
        let v: Vec<f64> = (0..25).map(|i| ((i + t) as f64 * 0.41).sin()).collect();
        let expected: Vec<f64> = x.matvec(&v).unwrap().iter().map(|y| y / scale).collect();
        assert!(max_abs_diff(&out.data.matvec(&v).unwrap(), &expected) < 1e-12);
    }
}

#[test]
fn generation_is_bitwise_reproducible() {
    for decay in [Decay::Linear, Decay::Quadratic] {
        let spec = SyntheticSpec::new(60, 20, decay, 77);
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a.data.to_dense().as_slice(), b.data.to_dense().as_slice());
        assert_eq!(a.labels, b.labels);
    }
}
