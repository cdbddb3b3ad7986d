//! Frozen random feature expansion in front of the analytic classifier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::container::{ContainerReader, ContainerWriter, PayloadKind};
use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::linalg::{relu_inplace, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

impl Activation {
    fn tag(self) -> u64 {
        match self {
            Activation::Relu => 1,
        }
    }

    fn from_tag(tag: u64) -> Result<Self> {
        match tag {
            1 => Ok(Activation::Relu),
            other => Err(Error::Container(format!("unknown activation tag {other}"))),
        }
    }
}

/// A random `h × d_feg` projection drawn once from `seed` and never trained.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpanderParams {
    weights: Matrix,
    activation: Activation,
    uses_adjacency: bool,
    seed: u64,
}

/// Draws `W_feg` i.i.d. uniform in `[−1/√h, 1/√h]`.
pub fn init_expander(hidden_dim: usize, output_dim: usize, seed: u64) -> Result<ExpanderParams> {
    if output_dim <= hidden_dim {
        return Err(Error::param(
            "expander.dim",
            format!("expansion dimension {output_dim} must exceed the hidden size {hidden_dim}"),
        ));
    }
    let bound = 1.0 / (hidden_dim as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Matrix::zeros(hidden_dim, output_dim);
    for i in 0..hidden_dim {
        for j in 0..output_dim {
            weights[(i, j)] = rng.random_range(-bound..=bound);
        }
    }
    Ok(ExpanderParams {
        weights,
        activation: Activation::Relu,
        uses_adjacency: false,
        seed,
    })
}

impl ExpanderParams {
    /// Switches between `σ(H W)` (default) and the graph-convolution form `σ(Â H W)`.
    pub fn with_adjacency(mut self, uses_adjacency: bool) -> Self {
        self.uses_adjacency = uses_adjacency;
        self
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn uses_adjacency(&self) -> bool {
        self.uses_adjacency
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ContainerWriter::new(PayloadKind::Expander);
        w.u64(self.seed)
            .u64(self.input_dim() as u64)
            .u64(self.output_dim() as u64)
            .u64(self.uses_adjacency as u64)
            .u64(self.activation.tag())
            .matrix(&self.weights);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ContainerReader::open(bytes, PayloadKind::Expander)?;
        let seed = r.u64()?;
        let h = r.usize()?;
        let d = r.usize()?;
        if d <= h {
            return Err(Error::Container(format!(
                "expander dims {h}x{d} are not expanding"
            )));
        }
        let uses_adjacency = match r.u64()? {
            0 => false,
            1 => true,
            other => return Err(Error::Container(format!("bad adjacency flag {other}"))),
        };
        let activation = Activation::from_tag(r.u64()?)?;
        let weights = r.matrix(h, d)?;
        r.finish()?;
        Ok(Self {
            weights,
            activation,
            uses_adjacency,
            seed,
        })
    }
}

/// Lifts backbone embeddings `hidden` (`N × h`) to `N × d_feg`.
pub fn expand(
    hidden: &Matrix,
    params: &ExpanderParams,
    adj: &NormalizedAdjacency,
) -> Result<Matrix> {
    if hidden.ncols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "embeddings have {} columns, expander expects {}",
            hidden.ncols(),
            params.input_dim()
        )));
    }
    let mut out = if params.uses_adjacency {
        adj.matmul(hidden)? * &params.weights
    } else {
        hidden * &params.weights
    };
    match params.activation {
        Activation::Relu => relu_inplace(&mut out),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize_adjacency, Graph, Split};

    fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.nrows(), b.ncols());
        for i in 0..a.nrows() {
            for j in 0..b.ncols() {
                for k in 0..a.ncols() {
                    out[(i, j)] += a[(i, k)] * b[(k, j)];
                }
            }
        }
        out
    }

    #[test]
    fn seeded_and_shaped() {
        let a = init_expander(256, 2048, 9).unwrap();
        assert_eq!(a.weights().shape(), (256, 2048));
        assert_eq!(a, init_expander(256, 2048, 9).unwrap());
        assert_eq!(
            init_expander(256, 1024, 9).unwrap().weights().shape(),
            (256, 1024)
        );
        let bound = 1.0 / 16.0;
        assert!(a.weights().iter().all(|w| w.abs() <= bound));
        assert!(init_expander(8, 8, 0).is_err());
    }

    #[test]
    fn zero_embeddings_expand_to_zero() {
        let p = init_expander(3, 7, 1).unwrap();
        let out = expand(&Matrix::zeros(4, 3), &p, &NormalizedAdjacency::identity(4)).unwrap();
        assert_eq!(out, Matrix::zeros(4, 7));
    }

    #[test]
    fn identity_padded_weights_copy_embeddings() {
        let mut p = init_expander(2, 4, 1).unwrap();
        p.weights = Matrix::from_fn(2, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        let h = Matrix::from_row_slice(2, 2, &[0.5, 1.5, 2.0, 0.0]);
        let out = expand(&h, &p, &NormalizedAdjacency::identity(2)).unwrap();
        assert_eq!(out.columns(0, 2), h);
        assert_eq!(out.columns(2, 2), Matrix::zeros(2, 2));
    }

    #[test]
    fn matches_naive_matmul() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = Matrix::from_fn(5, 8, |_, _| rng.random_range(-1.0..1.0));
        let mut p = init_expander(8, 16, 2).unwrap();
        let mut oracle = naive_matmul(&h, p.weights());
        oracle.iter_mut().for_each(|v| *v = v.max(0.0));
        let adj = NormalizedAdjacency::identity(5);
        let out = expand(&h, &p, &adj).unwrap();
        assert!(out
            .iter()
            .zip(oracle.iter())
            .all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(out.iter().all(|v| *v >= 0.0));

        // graph form: σ(Â H W)
        let g = Graph::new(
            5,
            vec![(0, 1), (1, 2), (3, 4)],
            Matrix::zeros(5, 1),
            vec![0; 5],
            1,
            vec![Split::Train; 5],
        )
        .unwrap();
        let adj = normalize_adjacency(&g);
        p = p.with_adjacency(true);
        let mut oracle = naive_matmul(&naive_matmul(&adj.to_dense(), &h), p.weights());
        oracle.iter_mut().for_each(|v| *v = v.max(0.0));
        let out = expand(&h, &p, &adj).unwrap();
        assert!(out
            .iter()
            .zip(oracle.iter())
            .all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn wide_expansion_has_full_row_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = Matrix::from_fn(10, 6, |_, _| rng.random_range(0.0..1.0));
        let p = init_expander(6, 40, 3).unwrap();
        let out = expand(&h, &p, &NormalizedAdjacency::identity(10)).unwrap();
        assert_eq!(out.rank(1e-9), 10);
    }

    #[test]
    fn shape_mismatch() {
        let p = init_expander(3, 7, 1).unwrap();
        assert!(expand(&Matrix::zeros(2, 4), &p, &NormalizedAdjacency::identity(2)).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let p = init_expander(3, 5, 77).unwrap().with_adjacency(true);
        assert_eq!(ExpanderParams::from_bytes(&p.to_bytes()).unwrap(), p);
    }
}
