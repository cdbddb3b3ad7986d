#![allow(dead_code)]

use acgl::analytic::SessionBatch;
use acgl::harness::ExperimentConfig;
use acgl::Matrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// 4 classes × 50 nodes, 16 features, homophily 0.9, base session of 2 classes,
/// backbone and expander sized for quick runs.
pub fn fixture_config() -> ExperimentConfig {
    ExperimentConfig {
        base_classes: Some(2),
        hidden: 32,
        expander_dim: 256,
        learning_rate: 1e-2,
        ..ExperimentConfig::default()
    }
}

pub fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// A stream of sessions with disjoint class groups; session `s` has `groups[s]` classes.
pub fn random_stream<R: Rng>(dim: usize, groups: &[usize], rng: &mut R) -> Vec<SessionBatch> {
    let mut next_class = 0;
    groups
        .iter()
        .map(|&width| {
            let classes: Vec<usize> = (next_class..next_class + width).collect();
            next_class += width;
            let n = rng.random_range(1..=24);
            let labels: Vec<usize> = (0..n)
                .map(|_| classes[rng.random_range(0..width)])
                .collect();
            SessionBatch::from_labels(gaussian(n, dim, rng), &labels, classes).unwrap()
        })
        .collect()
}

pub fn relative(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
