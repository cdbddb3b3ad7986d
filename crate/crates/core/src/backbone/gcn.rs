use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::linalg::Matrix;

use super::BackboneParams;

/// Per-entry multipliers applied to the hidden layer: `0` for dropped units,
/// `1/(1−p)` for kept ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask(pub Matrix);

impl DropoutMask {
    pub fn sample<R: Rng + ?Sized>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Self {
        let keep = 1.0 / (1.0 - rate);
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = if rng.random::<f64>() < rate {
                    0.0
                } else {
                    keep
                };
            }
        }
        DropoutMask(m)
    }
}

#[derive(Debug, Clone)]
pub struct GcnOutput {
    /// Hidden activations after dropout (identical to the pre-dropout
    /// activations in inference mode).
    pub hidden: Matrix,
    pub logits: Matrix,
    /// The mask used, when training with a positive rate.
    pub dropout: Option<DropoutMask>,
}

#[derive(Debug, Clone)]
pub struct GcnGradients {
    pub loss: f64,
    pub w0: Matrix,
    pub w1: Matrix,
}

/// `Â · X`, the first-layer propagation that does not depend on the weights.
pub fn propagate(adj: &NormalizedAdjacency, x: &Matrix) -> Result<Matrix> {
    adj.matmul(x)
}

fn check_shapes(adj: &NormalizedAdjacency, x: &Matrix, params: &BackboneParams) -> Result<()> {
    params.validate()?;
    if x.nrows() != adj.dim() {
        return Err(Error::Shape(format!(
            "{} feature rows for a {}-node adjacency",
            x.nrows(),
            adj.dim()
        )));
    }
    if x.ncols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "features have {} columns, W0 expects {}",
            x.ncols(),
            params.input_dim()
        )));
    }
    Ok(())
}

/// Intermediate values of one forward pass, kept for the backward pass.
struct Trace {
    pre_activation: Matrix,
    hidden: Matrix,
    propagated_hidden: Matrix,
    logits: Matrix,
}

fn forward_trace(
    adj: &NormalizedAdjacency,
    ax: &Matrix,
    params: &BackboneParams,
    dropout: Option<&DropoutMask>,
) -> Result<Trace> {
    let pre_activation = ax * &params.w0;
    let mut hidden = pre_activation.map(|v| v.max(0.0));
    if let Some(mask) = dropout {
        if mask.0.shape() != hidden.shape() {
            return Err(Error::Shape(
                "dropout mask does not match hidden layer".into(),
            ));
        }
        hidden.component_mul_assign(&mask.0);
    }
    let propagated_hidden = adj.matmul(&hidden)?;
    let logits = &propagated_hidden * &params.w1;
    Ok(Trace {
        pre_activation,
        hidden,
        propagated_hidden,
        logits,
    })
}

/// Two-layer GCN: `H = ReLU(Â X W0)` (dropout on `H` in training), logits `Â H W1`.
pub fn gcn_forward<R: Rng + ?Sized>(
    adj: &NormalizedAdjacency,
    x: &Matrix,
    params: &BackboneParams,
    dropout_rate: f64,
    rng: &mut R,
    training: bool,
) -> Result<GcnOutput> {
    if !(0.0..1.0).contains(&dropout_rate) {
        return Err(Error::param("backbone.dropout", "must lie in [0, 1)"));
    }
    check_shapes(adj, x, params)?;
    let ax = propagate(adj, x)?;
    let dropout = (training && dropout_rate > 0.0)
        .then(|| DropoutMask::sample(x.nrows(), params.hidden_dim(), dropout_rate, rng));
    let trace = forward_trace(adj, &ax, params, dropout.as_ref())?;
    Ok(GcnOutput {
        hidden: trace.hidden,
        logits: trace.logits,
        dropout,
    })
}

/// Inference-mode first-layer embeddings `ReLU(Â X W0)`.
pub fn embed(adj: &NormalizedAdjacency, x: &Matrix, params: &BackboneParams) -> Result<Matrix> {
    check_shapes(adj, x, params)?;
    let mut hidden = propagate(adj, x)? * &params.w0;
    crate::linalg::relu_inplace(&mut hidden);
    Ok(hidden)
}

/// Mean cross-entropy over masked rows and the row-wise softmax of `logits`.
pub fn masked_softmax_cross_entropy(
    logits: &Matrix,
    labels: &[usize],
    mask: &[bool],
) -> Result<(f64, Matrix)> {
    if labels.len() != logits.nrows() || mask.len() != logits.nrows() {
        return Err(Error::Shape(format!(
            "{} logit rows, {} labels, {} mask entries",
            logits.nrows(),
            labels.len(),
            mask.len()
        )));
    }
    let count = mask.iter().filter(|m| **m).count();
    if count == 0 {
        return Err(Error::Empty("loss mask selects no nodes".into()));
    }
    let mut probs = logits.clone();
    let mut total = 0.0;
    for (i, mut row) in probs.row_iter_mut().enumerate() {
        let max = row.max();
        row.iter_mut().for_each(|v| *v = (*v - max).exp());
        let sum = row.sum();
        row /= sum;
        if mask[i] {
            let y = labels[i];
            if y >= logits.ncols() {
                return Err(Error::Shape(format!("label {y} has no logit column")));
            }
            // log p_y = (z_y − max) − ln Σ exp(z − max)
            total -= (logits[(i, y)] - max) - sum.ln();
        }
    }
    Ok((total / count as f64, probs))
}

/// Exact gradients of the masked mean cross-entropy with respect to both layers.
///
/// `dropout` must be the mask used by the paired forward pass (`None` for
/// inference-mode forward). The ReLU derivative at zero is taken as zero.
pub fn gcn_backward(
    adj: &NormalizedAdjacency,
    x: &Matrix,
    params: &BackboneParams,
    labels: &[usize],
    mask: &[bool],
    dropout: Option<&DropoutMask>,
) -> Result<GcnGradients> {
    check_shapes(adj, x, params)?;
    let problem = GcnProblem::new(adj, x, labels, mask)?;
    problem.gradients(params, dropout)
}

/// A fixed graph, feature matrix and supervision target with `Â X` cached.
pub struct GcnProblem<'a> {
    adj: &'a NormalizedAdjacency,
    ax: Matrix,
    labels: &'a [usize],
    mask: &'a [bool],
}

impl<'a> GcnProblem<'a> {
    pub fn new(
        adj: &'a NormalizedAdjacency,
        x: &Matrix,
        labels: &'a [usize],
        mask: &'a [bool],
    ) -> Result<Self> {
        if labels.len() != adj.dim() || mask.len() != adj.dim() {
            return Err(Error::Shape(
                "labels and mask must have one entry per node".into(),
            ));
        }
        Ok(Self {
            adj,
            ax: propagate(adj, x)?,
            labels,
            mask,
        })
    }

    pub fn loss(&self, params: &BackboneParams, dropout: Option<&DropoutMask>) -> Result<f64> {
        let trace = forward_trace(self.adj, &self.ax, params, dropout)?;
        Ok(masked_softmax_cross_entropy(&trace.logits, self.labels, self.mask)?.0)
    }

    pub fn logits(&self, params: &BackboneParams) -> Result<Matrix> {
        Ok(forward_trace(self.adj, &self.ax, params, None)?.logits)
    }

    pub fn gradients(
        &self,
        params: &BackboneParams,
        dropout: Option<&DropoutMask>,
    ) -> Result<GcnGradients> {
        let count = self.mask.iter().filter(|m| **m).count();
        self.scaled_gradients(params, dropout, 1.0 / count.max(1) as f64)
    }

    /// Gradients of `scale · Σ_masked −log p_y`; `scale = 1/|mask|` is the mean loss.
    pub(crate) fn scaled_gradients(
        &self,
        params: &BackboneParams,
        dropout: Option<&DropoutMask>,
        scale: f64,
    ) -> Result<GcnGradients> {
        let trace = forward_trace(self.adj, &self.ax, params, dropout)?;
        let (loss, probs) = masked_softmax_cross_entropy(&trace.logits, self.labels, self.mask)?;

        // dL/dlogits = scale · (P − Y) on masked rows
        let mut g_logits = Matrix::zeros(probs.nrows(), probs.ncols());
        for i in 0..probs.nrows() {
            if self.mask[i] {
                for j in 0..probs.ncols() {
                    g_logits[(i, j)] = scale * probs[(i, j)];
                }
                g_logits[(i, self.labels[i])] -= scale;
            }
        }
        let w1 = trace.propagated_hidden.tr_mul(&g_logits);
        // Â is symmetric, so Âᵀ G W1ᵀ = Â (G W1ᵀ)
        let mut g_hidden = self.adj.matmul(&(&g_logits * params.w1.transpose()))?;
        if let Some(mask) = dropout {
            g_hidden.component_mul_assign(&mask.0);
        }
        g_hidden.zip_apply(&trace.pre_activation, |g, z| {
            if z <= 0.0 {
                *g = 0.0;
            }
        });
        let w0 = self.ax.tr_mul(&g_hidden);
        Ok(GcnGradients { loss, w0, w1 })
    }
}
