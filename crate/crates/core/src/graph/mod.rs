//! Node-classification graph data: the graph value itself, normalized
//! adjacency, on-disk datasets, synthetic generation and class-incremental
//! session plans.

mod adjacency;
mod io;
mod session;
mod synthetic;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub use adjacency::{normalize_adjacency, NormalizedAdjacency};
pub use io::{load_dataset, save_dataset, DatasetFormat, DatasetMeta, DATASET_SCHEMA_VERSION};
pub use session::{build_session_plan, session_subgraph, shuffled_class_order, SessionPlan};
pub use synthetic::{generate_synthetic, SyntheticSpec};

/// Which split a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!(
                "unknown split `{other}` (expected train, val or test)"
            )),
        }
    }
}

/// An undirected, attributed, labeled graph for transductive node classification.
///
/// Edges are stored once per undirected pair as `(u, v)` with `u < v`, sorted
/// and free of duplicates and self-loops. Labels are global class ids in
/// `[0, num_classes)`, so a subgraph keeps the class numbering of its parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    features: Matrix,
    labels: Vec<usize>,
    num_classes: usize,
    splits: Vec<Split>,
}

impl Graph {
    /// Builds a graph, canonicalizing edges and validating every invariant.
    ///
    /// Reversed and duplicate edges collapse to one undirected edge and
    /// self-loops are dropped.
    pub fn new(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Matrix,
        labels: Vec<usize>,
        num_classes: usize,
        splits: Vec<Split>,
    ) -> Result<Self> {
        let mut canonical = BTreeSet::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) references a node outside [0, {num_nodes})"
                )));
            }
            if u != v {
                canonical.insert((u.min(v), u.max(v)));
            }
        }
        if features.nrows() != num_nodes {
            return Err(Error::Validation(format!(
                "feature matrix has {} rows for {num_nodes} nodes",
                features.nrows()
            )));
        }
        if labels.len() != num_nodes {
            return Err(Error::Validation(format!(
                "{} labels for {num_nodes} nodes",
                labels.len()
            )));
        }
        if splits.len() != num_nodes {
            return Err(Error::Validation(format!(
                "{} split entries for {num_nodes} nodes",
                splits.len()
            )));
        }
        if let Some((node, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::Validation(format!(
                "node {node} has label {label} outside [0, {num_classes})"
            )));
        }
        if !features.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation(
                "features contain non-finite values".into(),
            ));
        }
        Ok(Self {
            num_nodes,
            edges: canonical.into_iter().collect(),
            features,
            labels,
            num_classes,
            splits,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn mask(&self, split: Split) -> Vec<bool> {
        self.splits.iter().map(|&s| s == split).collect()
    }

    /// Node ids in the given split, ascending.
    pub fn nodes_in(&self, split: Split) -> Vec<usize> {
        (0..self.num_nodes)
            .filter(|&i| self.splits[i] == split)
            .collect()
    }

    /// Classes that actually occur among the node labels, ascending.
    pub fn present_classes(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.labels.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Divides each feature row by its L1 norm; all-zero rows stay zero.
    pub fn row_normalize_features(&mut self) {
        for mut row in self.features.row_iter_mut() {
            let sum: f64 = row.iter().map(|v| v.abs()).sum();
            if sum > 0.0 {
                row /= sum;
            }
        }
    }

    /// Subgraph induced by `nodes` (given in the order new ids are assigned).
    pub fn induced_by_nodes(&self, nodes: &[usize]) -> Result<Graph> {
        let mut new_id = vec![usize::MAX; self.num_nodes];
        for (new, &old) in nodes.iter().enumerate() {
            if old >= self.num_nodes {
                return Err(Error::Validation(format!("node {old} out of range")));
            }
            if new_id[old] != usize::MAX {
                return Err(Error::Validation(format!("node {old} listed twice")));
            }
            new_id[old] = new;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|(u, v)| new_id[*u] != usize::MAX && new_id[*v] != usize::MAX)
            .map(|(u, v)| (new_id[*u], new_id[*v]))
            .collect();
        let features = crate::linalg::select_rows(&self.features, nodes);
        let labels = nodes.iter().map(|&i| self.labels[i]).collect();
        let splits = nodes.iter().map(|&i| self.splits[i]).collect();
        Graph::new(
            nodes.len(),
            edges,
            features,
            labels,
            self.num_classes,
            splits,
        )
    }
}
