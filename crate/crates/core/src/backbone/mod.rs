//! Two-layer GCN feature backbone trained by backpropagation on the base session.

mod adam;
mod gcn;
mod train;

use rand::Rng;

use crate::container::{ContainerReader, ContainerWriter, PayloadKind};
use crate::error::{Error, Result};
use crate::linalg::{is_finite, Matrix};

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use gcn::{
    embed, gcn_backward, gcn_forward, masked_softmax_cross_entropy, propagate, DropoutMask,
    GcnGradients, GcnOutput, GcnProblem,
};
pub use train::{train_base, BaseTraining, TrainConfig};

/// Weights of the two graph-convolution layers.
#[derive(Debug, Clone, PartialEq)]
pub struct BackboneParams {
    /// Input features to hidden units, `d × h`.
    pub w0: Matrix,
    /// Hidden units to base-class logits, `h × C₀`.
    pub w1: Matrix,
}

fn glorot_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    // row-major draw order so the stream does not depend on storage layout
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.random_range(-bound..bound);
        }
    }
    m
}

impl BackboneParams {
    /// Glorot-uniform initialization drawn from `rng`.
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_dim: usize,
        num_classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || num_classes == 0 {
            return Err(Error::param(
                "backbone.hidden",
                "input, hidden and output dimensions must be positive",
            ));
        }
        let w0 = glorot_uniform(input_dim, hidden_dim, rng);
        let w1 = glorot_uniform(hidden_dim, num_classes, rng);
        Ok(Self { w0, w1 })
    }

    pub fn input_dim(&self) -> usize {
        self.w0.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w0.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w1.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.w1.nrows() != self.w0.ncols() {
            return Err(Error::Shape(format!(
                "W0 has {} columns but W1 has {} rows",
                self.w0.ncols(),
                self.w1.nrows()
            )));
        }
        if !is_finite(&self.w0) || !is_finite(&self.w1) {
            return Err(Error::Numerical("backbone weights are not finite".into()));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ContainerWriter::new(PayloadKind::Backbone);
        w.u64(self.input_dim() as u64)
            .u64(self.hidden_dim() as u64)
            .u64(self.num_classes() as u64)
            .matrix(&self.w0)
            .matrix(&self.w1);
        w.finish()
    }

    /// Decodes parameters; `expected` = `(input_dim, hidden_dim, num_classes)`
    /// rejects files whose header disagrees.
    pub fn from_bytes(bytes: &[u8], expected: Option<(usize, usize, usize)>) -> Result<Self> {
        let mut r = ContainerReader::open(bytes, PayloadKind::Backbone)?;
        let dims = (r.usize()?, r.usize()?, r.usize()?);
        if let Some(want) = expected {
            if want != dims {
                return Err(Error::Container(format!(
                    "backbone dimensions {dims:?} do not match expected {want:?}"
                )));
            }
        }
        let (d, h, c) = dims;
        let w0 = r.matrix(d, h)?;
        let w1 = r.matrix(h, c)?;
        r.finish()?;
        Ok(Self { w0, w1 })
    }
}
