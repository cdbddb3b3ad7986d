use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::Graph;

/// Ordered class groups of a class-incremental stream.
///
/// Group 0 is the base session; each later group is one incremental session.
/// `session_nodes[s]` lists the parent-graph node ids whose label falls in
/// group `s`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionPlan {
    groups: Vec<Vec<usize>>,
    session_nodes: Vec<Vec<usize>>,
}

impl SessionPlan {
    pub fn base_classes(&self) -> &[usize] {
        &self.groups[0]
    }

    pub fn incremental_groups(&self) -> &[Vec<usize>] {
        &self.groups[1..]
    }

    /// All groups, base first.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_sessions(&self) -> usize {
        self.groups.len()
    }

    pub fn session_nodes(&self, session: usize) -> &[usize] {
        &self.session_nodes[session]
    }
}

/// A seeded permutation of `0..num_classes`.
pub fn shuffled_class_order(num_classes: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..num_classes).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Splits the classes into a base group of `c0` followed by groups of `k`.
///
/// `class_order` defaults to ascending class id. The final group may hold
/// fewer than `k` classes.
pub fn build_session_plan(
    graph: &Graph,
    c0: usize,
    k: usize,
    class_order: Option<&[usize]>,
) -> Result<SessionPlan> {
    let c = graph.num_classes();
    if c0 == 0 || c0 >= c {
        return Err(Error::param(
            "c0",
            format!("base class count {c0} must lie in [1, {c}) for {c} classes"),
        ));
    }
    if k == 0 || k > c - c0 {
        return Err(Error::param(
            "k",
            format!("increment {k} must lie in [1, {}]", c - c0),
        ));
    }
    let order: Vec<usize> = match class_order {
        Some(order) => {
            let set: BTreeSet<usize> = order.iter().copied().collect();
            if order.len() != c || set.len() != c || set.iter().any(|&x| x >= c) {
                return Err(Error::param(
                    "class_order",
                    format!("must be a permutation of 0..{c}"),
                ));
            }
            order.to_vec()
        }
        None => (0..c).collect(),
    };

    let mut groups = vec![order[..c0].to_vec()];
    groups.extend(order[c0..].chunks(k).map(|g| g.to_vec()));

    let mut group_of = vec![0usize; c];
    for (s, g) in groups.iter().enumerate() {
        for &class in g {
            group_of[class] = s;
        }
    }
    let mut session_nodes = vec![Vec::new(); groups.len()];
    for (node, &label) in graph.labels().iter().enumerate() {
        session_nodes[group_of[label]].push(node);
    }
    Ok(SessionPlan {
        groups,
        session_nodes,
    })
}

/// Subgraph induced by the nodes whose label is in `class_set`.
///
/// Node ids are compacted preserving their relative order; labels keep their
/// global class ids.
pub fn session_subgraph(graph: &Graph, class_set: &[usize]) -> Result<Graph> {
    if class_set.is_empty() {
        return Err(Error::Empty("session class set is empty".into()));
    }
    let wanted: BTreeSet<usize> = class_set.iter().copied().collect();
    let nodes: Vec<usize> = graph
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| wanted.contains(l))
        .map(|(i, _)| i)
        .collect();
    if nodes.is_empty() {
        return Err(Error::Empty(format!(
            "no nodes carry a label in {class_set:?}"
        )));
    }
    graph.induced_by_nodes(&nodes)
}
