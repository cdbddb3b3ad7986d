//! The three-stage class-incremental protocol: backpropagation on the base
//! session, closed-form alignment, then one recursive update per session,
//! with every seen task evaluated after each session.

mod config;
mod scope;
mod sweep;

use std::time::Instant;

use crate::analytic::{
    classifier_learners, predict, AnalyticState, ClassifierLearner, LearnerSettings, SessionBatch,
};
use crate::backbone::{embed, train_base, BackboneParams};
use crate::error::{Error, Result};
use crate::expander::{expand, init_expander, ExpanderParams};
use crate::graph::{
    build_session_plan, normalize_adjacency, session_subgraph, shuffled_class_order, Graph,
    SessionPlan, Split,
};
use crate::linalg::{select_rows, Matrix};
use crate::metrics::{PerformanceMatrix, Timings};

pub use config::{
    parse_override_value, DataSource, ExperimentConfig, ResolvedSeeds, Seeds, ValueKind,
    CONFIG_KEYS,
};
pub use scope::{evaluation_scopes, EvaluationScope, ScopeContext, TaskSubgraph, UnionSubgraph};
pub use sweep::{
    emit_sweep, run_sweep, sweep_axes, ExpanderDimAxis, GammaAxis, SweepAxis, SweepPoint,
};

/// The frozen backbone followed by the frozen expander.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenEncoder {
    pub backbone: BackboneParams,
    pub expander: ExpanderParams,
}

impl FrozenEncoder {
    /// Expanded features for every node of `graph`, using only `graph`'s edges.
    pub fn encode(&self, graph: &Graph) -> Result<Matrix> {
        let adj = normalize_adjacency(graph);
        let hidden = embed(&adj, graph.features(), &self.backbone)?;
        expand(&hidden, &self.expander, &adj)
    }

    pub fn output_dim(&self) -> usize {
        self.expander.output_dim()
    }
}

/// Accuracy of `state` on the test nodes of `task_graph`, predicting over all seen classes.
pub fn evaluate_task(
    state: &AnalyticState,
    encoder: &FrozenEncoder,
    task_graph: &Graph,
) -> Result<f64> {
    let test = task_graph.nodes_in(Split::Test);
    if test.is_empty() {
        return Err(Error::Empty("task has no test nodes".into()));
    }
    let features = select_rows(&encoder.encode(task_graph)?, &test);
    let labels: Vec<usize> = test.iter().map(|&i| task_graph.labels()[i]).collect();
    Ok(scope::accuracy(&predict(&features, state)?, &labels))
}

pub struct ExperimentOutcome {
    pub matrix: PerformanceMatrix,
    pub timings: Timings,
    pub plan: SessionPlan,
    pub encoder: FrozenEncoder,
    pub learner: Box<dyn ClassifierLearner>,
    pub base_losses: Vec<f64>,
    pub base_train_accuracy: f64,
}

impl ExperimentOutcome {
    /// Final analytic state, when the learner keeps one.
    pub fn final_state(&self) -> Option<&AnalyticState> {
        self.learner.state()
    }
}

/// Builds the session plan a config describes for `graph`.
pub fn plan_for(config: &ExperimentConfig, graph: &Graph) -> Result<SessionPlan> {
    let c = graph.num_classes();
    let c0 = config.base_classes.unwrap_or(c.div_ceil(2));
    let order = config
        .shuffle_classes
        .then(|| shuffled_class_order(c, config.seeds.resolve().data));
    build_session_plan(graph, c0, config.increment, order.as_deref())
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let graph = config.load_graph()?;
    run_experiment_on(config, &graph)
}

/// [`run_experiment`] on an already loaded graph.
pub fn run_experiment_on(config: &ExperimentConfig, graph: &Graph) -> Result<ExperimentOutcome> {
    config.validate()?;
    let started = Instant::now();
    let seeds = config.seeds.resolve();
    let plan = plan_for(config, graph)?;

    let clock = Instant::now();
    let base = train_base(graph, &plan, &config.train_config(seeds.backbone))?;
    let mut timings = Timings {
        base_training: clock.elapsed().as_secs_f64(),
        ..Default::default()
    };

    let encoder = FrozenEncoder {
        backbone: base.params,
        expander: init_expander(config.hidden, config.expander_dim, seeds.expander)?
            .with_adjacency(config.expander_uses_adjacency),
    };
    let mut learner = classifier_learners().create_with(
        &config.learner,
        &LearnerSettings {
            gamma: config.gamma,
            r_update: config.r_update.clone(),
        },
    )?;
    let mut scope = evaluation_scopes().create(&config.eval_scope)?;
    let mut matrix = PerformanceMatrix::new();

    for (session, classes) in plan.groups().iter().enumerate() {
        let clock = Instant::now();
        let task_graph = session_subgraph(graph, classes)?;
        let features = encoder.encode(&task_graph)?;
        let train = task_graph.nodes_in(Split::Train);
        if train.is_empty() {
            return Err(Error::Empty(format!(
                "session {session} (classes {classes:?}) has no training nodes"
            )));
        }
        let labels: Vec<usize> = train.iter().map(|&i| task_graph.labels()[i]).collect();
        let batch =
            SessionBatch::from_labels(select_rows(&features, &train), &labels, classes.clone())?;
        learner.learn(batch)?;
        let elapsed = clock.elapsed().as_secs_f64();
        if session == 0 {
            timings.alignment = elapsed;
        } else {
            timings.incremental.push(elapsed);
        }

        let clock = Instant::now();
        scope.prepare(&ScopeContext {
            graph,
            plan: &plan,
            encoder: &encoder,
            task_graph: &task_graph,
            task_features: &features,
            session,
        })?;
        drop(task_graph);
        let row = (0..=session)
            .map(|task| scope.accuracy(task, learner.as_ref()))
            .collect::<Result<Vec<f64>>>()?;
        matrix.push_row(row)?;
        timings.evaluation += clock.elapsed().as_secs_f64();
    }
    timings.total = started.elapsed().as_secs_f64();

    Ok(ExperimentOutcome {
        matrix,
        timings,
        plan,
        encoder,
        learner,
        base_losses: base.losses,
        base_train_accuracy: base.train_accuracy,
    })
}
