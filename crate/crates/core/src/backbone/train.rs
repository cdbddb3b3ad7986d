use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, session_subgraph, Graph, SessionPlan, Split};

use super::gcn::{DropoutMask, GcnProblem};
use super::{adam_step, AdamConfig, BackboneParams, OptimizerState};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub weight_decay: f64,
    /// Drives both weight initialization and dropout sampling.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 256,
            epochs: 50,
            learning_rate: 1e-3,
            dropout: 0.5,
            weight_decay: 5e-4,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 {
            return Err(Error::param("backbone.hidden", "must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("backbone.lr", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::param("backbone.dropout", "must lie in [0, 1)"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::param(
                "backbone.weight_decay",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BaseTraining {
    pub params: BackboneParams,
    /// Training loss before each epoch's update, then the final inference-mode loss.
    pub losses: Vec<f64>,
    /// Inference-mode accuracy on the base session's train nodes.
    pub train_accuracy: f64,
}

/// Full-batch Adam training of the GCN on the base session's induced subgraph.
///
/// The output layer has one unit per base class in plan order.
pub fn train_base(graph: &Graph, plan: &SessionPlan, config: &TrainConfig) -> Result<BaseTraining> {
    config.validate()?;
    let base = plan.base_classes();
    let sub = session_subgraph(graph, base)?;
    let adj = normalize_adjacency(&sub);
    let mut local = vec![usize::MAX; graph.num_classes()];
    for (pos, &class) in base.iter().enumerate() {
        local[class] = pos;
    }
    let labels: Vec<usize> = sub.labels().iter().map(|&l| local[l]).collect();
    let mask = sub.mask(Split::Train);
    if !mask.iter().any(|m| *m) {
        return Err(Error::Empty("base session has no training nodes".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params =
        BackboneParams::init(sub.num_features(), config.hidden_dim, base.len(), &mut rng)?;
    let mut optimizer = OptimizerState::for_backbone(
        AdamConfig {
            learning_rate: config.learning_rate,
            weight_decay: config.weight_decay,
            ..Default::default()
        },
        &params,
    );
    let problem = GcnProblem::new(&adj, sub.features(), &labels, &mask)?;

    let mut losses = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        let dropout = (config.dropout > 0.0).then(|| {
            DropoutMask::sample(sub.num_nodes(), config.hidden_dim, config.dropout, &mut rng)
        });
        let grads = problem.gradients(&params, dropout.as_ref())?;
        losses.push(grads.loss);
        adam_step(&mut params, &grads, &mut optimizer)?;
    }
    params.validate()?;
    losses.push(problem.loss(&params, None)?);

    let logits = problem.logits(&params)?;
    let mut correct = 0usize;
    let mut total = 0usize;
    for i in 0..sub.num_nodes() {
        if mask[i] {
            total += 1;
            if crate::analytic::argmax_row(&logits, i) == labels[i] {
                correct += 1;
            }
        }
    }
    Ok(BaseTraining {
        params,
        losses,
        train_accuracy: correct as f64 / total as f64,
    })
}
