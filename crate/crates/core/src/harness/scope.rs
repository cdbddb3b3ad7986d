//! Which graph past tasks are evaluated on (`eval.scope`).

use crate::analytic::ClassifierLearner;
use crate::error::{Error, Result};
use crate::graph::{session_subgraph, Graph, SessionPlan, Split};
use crate::linalg::{select_rows, Matrix};
use crate::registry::Registry;

use super::FrozenEncoder;

/// What a scope may look at after session `session` has been learned.
pub struct ScopeContext<'a> {
    pub graph: &'a Graph,
    pub plan: &'a SessionPlan,
    pub encoder: &'a FrozenEncoder,
    /// Induced subgraph of the session just learned.
    pub task_graph: &'a Graph,
    /// `encoder` applied to `task_graph`.
    pub task_features: &'a Matrix,
    pub session: usize,
}

pub trait EvaluationScope: Send {
    fn name(&self) -> &'static str;

    /// Called once after each session, before any [`EvaluationScope::accuracy`] call.
    fn prepare(&mut self, ctx: &ScopeContext<'_>) -> Result<()>;

    /// Test accuracy on task `task` (`task <=` the last prepared session).
    fn accuracy(&self, task: usize, learner: &dyn ClassifierLearner) -> Result<f64>;
}

/// Test nodes of one task, already encoded.
#[derive(Debug, Clone)]
struct EncodedTest {
    features: Matrix,
    labels: Vec<usize>,
}

impl EncodedTest {
    fn accuracy(&self, learner: &dyn ClassifierLearner) -> Result<f64> {
        if self.labels.is_empty() {
            return Err(Error::Empty("task has no test nodes".into()));
        }
        let predicted = learner.predict(&self.features)?;
        Ok(accuracy(&predicted, &self.labels))
    }
}

pub(crate) fn accuracy(predicted: &[usize], labels: &[usize]) -> f64 {
    let correct = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    correct as f64 / labels.len() as f64
}

fn encoded_test(features: &Matrix, graph: &Graph, keep: impl Fn(usize) -> bool) -> EncodedTest {
    let rows: Vec<usize> = graph
        .nodes_in(Split::Test)
        .into_iter()
        .filter(|&i| keep(graph.labels()[i]))
        .collect();
    EncodedTest {
        features: select_rows(features, &rows),
        labels: rows.iter().map(|&i| graph.labels()[i]).collect(),
    }
}

/// Each task is evaluated on its own induced subgraph; message passing never
/// crosses into other tasks' nodes.
#[derive(Debug, Default)]
pub struct TaskSubgraph {
    tasks: Vec<EncodedTest>,
}

impl EvaluationScope for TaskSubgraph {
    fn name(&self) -> &'static str {
        "task"
    }

    fn prepare(&mut self, ctx: &ScopeContext<'_>) -> Result<()> {
        debug_assert_eq!(self.tasks.len(), ctx.session);
        self.tasks
            .push(encoded_test(ctx.task_features, ctx.task_graph, |_| true));
        Ok(())
    }

    fn accuracy(&self, task: usize, learner: &dyn ClassifierLearner) -> Result<f64> {
        self.tasks
            .get(task)
            .ok_or_else(|| Error::Validation(format!("task {task} has not been prepared")))?
            .accuracy(learner)
    }
}

/// After session `k`, every task is evaluated on the subgraph induced by all
/// classes of sessions `0..=k`.
#[derive(Debug, Default)]
pub struct UnionSubgraph {
    tasks: Vec<EncodedTest>,
}

impl EvaluationScope for UnionSubgraph {
    fn name(&self) -> &'static str {
        "union"
    }

    fn prepare(&mut self, ctx: &ScopeContext<'_>) -> Result<()> {
        let groups = &ctx.plan.groups()[..=ctx.session];
        let classes: Vec<usize> = groups.iter().flatten().copied().collect();
        let union = session_subgraph(ctx.graph, &classes)?;
        let features = ctx.encoder.encode(&union)?;
        self.tasks = groups
            .iter()
            .map(|g| encoded_test(&features, &union, |label| g.contains(&label)))
            .collect();
        Ok(())
    }

    fn accuracy(&self, task: usize, learner: &dyn ClassifierLearner) -> Result<f64> {
        self.tasks
            .get(task)
            .ok_or_else(|| Error::Validation(format!("task {task} has not been prepared")))?
            .accuracy(learner)
    }
}

pub fn evaluation_scopes() -> Registry<dyn EvaluationScope> {
    Registry::<dyn EvaluationScope>::new("evaluation scope")
        .with("task", "each task on its own induced test subgraph", |_| {
            Ok(Box::<TaskSubgraph>::default())
        })
        .with(
            "union",
            "each task on the subgraph of all classes seen so far",
            |_| Ok(Box::<UnionSubgraph>::default()),
        )
}
