use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::{Graph, Split};

/// Parameters of a stochastic-block-model style graph with Gaussian features.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub nodes_per_class: usize,
    pub feature_dim: usize,
    /// Probability that a sampled edge stays inside its source node's class.
    pub homophily: f64,
    pub seed: u64,
    /// Edge stubs sampled per node before deduplication.
    pub edges_per_node: usize,
    /// Standard deviation of the per-class feature means.
    pub class_separation: f64,
    /// Standard deviation of per-node feature noise.
    pub feature_noise: f64,
    /// Fraction of each class assigned to train and to val; the rest is test.
    pub train_fraction: f64,
    pub val_fraction: f64,
}

impl SyntheticSpec {
    pub fn new(
        num_classes: usize,
        nodes_per_class: usize,
        feature_dim: usize,
        homophily: f64,
        seed: u64,
    ) -> Self {
        Self {
            num_classes,
            nodes_per_class,
            feature_dim,
            homophily,
            seed,
            edges_per_node: 3,
            class_separation: 1.0,
            feature_noise: 1.0,
            train_fraction: 0.4,
            val_fraction: 0.1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::param("num_classes", "need at least 2 classes"));
        }
        if self.nodes_per_class < 2 {
            return Err(Error::param(
                "nodes_per_class",
                "need at least 2 nodes per class",
            ));
        }
        if self.feature_dim == 0 {
            return Err(Error::param("feature_dim", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.homophily) {
            return Err(Error::param("homophily", "must lie in [0, 1]"));
        }
        if !(self.class_separation >= 0.0 && self.feature_noise >= 0.0) {
            return Err(Error::param(
                "feature_noise",
                "standard deviations must be non-negative",
            ));
        }
        if !(self.train_fraction > 0.0
            && self.val_fraction >= 0.0
            && self.train_fraction + self.val_fraction < 1.0)
        {
            return Err(Error::param(
                "train_fraction",
                "train > 0, val >= 0 and train + val < 1 required",
            ));
        }
        Ok(())
    }
}

/// Generates a graph deterministically from `spec.seed`.
///
/// Nodes are laid out class by class. Each class receives a Gaussian mean
/// vector and every node adds independent Gaussian noise to it. Each node
/// draws `edges_per_node` partners: with probability `homophily` from its own
/// class, otherwise from any other class. Splits are stratified per class and
/// always leave at least one train and one test node per class.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Graph> {
    spec.validate()?;
    let c = spec.num_classes;
    let per = spec.nodes_per_class;
    let n = c * per;
    let d = spec.feature_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mean_dist = Normal::new(0.0, spec.class_separation).expect("validated std");
    let noise_dist = Normal::new(0.0, spec.feature_noise).expect("validated std");
    let means = Matrix::from_fn(c, d, |_, _| mean_dist.sample(&mut rng));
    let labels: Vec<usize> = (0..n).map(|i| i / per).collect();
    let mut features = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            features[(i, j)] = means[(labels[i], j)] + noise_dist.sample(&mut rng);
        }
    }

    let mut edges = BTreeSet::new();
    for (u, &class) in labels.iter().enumerate() {
        for _ in 0..spec.edges_per_node {
            let v = if rng.random::<f64>() < spec.homophily {
                // uniform over the class, excluding u
                let offset = rng.random_range(0..per - 1);
                let v = class * per + offset;
                if v >= u {
                    v + 1
                } else {
                    v
                }
            } else {
                let pick = rng.random_range(0..n - per);
                if pick >= class * per {
                    pick + per
                } else {
                    pick
                }
            };
            edges.insert((u.min(v), u.max(v)));
        }
    }

    let mut splits = vec![Split::Test; n];
    let n_train = ((per as f64 * spec.train_fraction).round() as usize).clamp(1, per - 1);
    let n_val = ((per as f64 * spec.val_fraction).round() as usize).min(per - 1 - n_train);
    for class in 0..c {
        let mut members: Vec<usize> = (class * per..(class + 1) * per).collect();
        rand::seq::SliceRandom::shuffle(members.as_mut_slice(), &mut rng);
        for &node in &members[..n_train] {
            splits[node] = Split::Train;
        }
        for &node in &members[n_train..n_train + n_val] {
            splits[node] = Split::Val;
        }
    }

    Graph::new(n, edges, features, labels, c, splits)
}
