// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Labeled rooted forests recording the recursion structure of a colorer run.
//!
//! Every node is labeled by an `(edge, cycle)` pair. A forest is *feasible*
//! when roots carry pairwise distinct edges, siblings carry pairwise
//! distinct edges, and each child's edge is one of the first `2k - 2` edges
//! of its parent's cycle read from the parent's edge.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::{CycleId, CycleIndex};
use crate::engine::PhaseLog;
use crate::graph::{EdgeId, Graph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForestError {
    #[error("node {node}: edge {edge} does not exist")]
    DanglingEdge { node: usize, edge: EdgeId },
    #[error("node {node}: cycle {cycle} does not exist")]
    DanglingCycle { node: usize, cycle: CycleId },
    #[error("node {node}: edge {edge} is not on cycle {cycle}")]
    EdgeOffCycle {
        node: usize,
        edge: EdgeId,
        cycle: CycleId,
    },
    #[error("node {node}: cycle {cycle} is shorter than six")]
    ShortCycle { node: usize, cycle: CycleId },
    #[error("forest enumeration exceeded {limit} forests")]
    BudgetExceeded { limit: usize },
    #[error("malformed preorder encoding")]
    Malformed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub edge: EdgeId,
    pub cycle: CycleId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestNode {
    pub label: Label,
    pub parent: Option<usize>,
    /// In insertion order (call order for forests built from a log).
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceForest {
    nodes: Vec<ForestNode>,
    roots: Vec<usize>,
}

impl TraceForest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a node under `parent` (or as a new root) and returns its id.
    pub fn push(&mut self, label: Label, parent: Option<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(ForestNode {
            label,
            parent,
            children: Vec::new(),
        });
        match parent {
            Some(p) => self.nodes[p].children.push(id),
            None => self.roots.push(id),
        }
        id
    }

    pub fn nodes(&self) -> &[ForestNode] {
        &self.nodes
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn sorted(&self, ids: &[usize]) -> Vec<usize> {
        let mut ids = ids.to_vec();
        ids.sort_by_key(|&i| self.nodes[i].label.edge);
        ids
    }

    /// Node ids in depth-first order, trees and siblings ordered by edge
    /// label.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<usize> = self.sorted(&self.roots).into_iter().rev().collect();
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.sorted(&self.nodes[u].children).into_iter().rev());
        }
        out
    }

    /// The label sequence `(e_1, C_1) .. (e_n, C_n)`.
    pub fn label_sequence(&self) -> Vec<Label> {
        self.preorder()
            .into_iter()
            .map(|u| self.nodes[u].label)
            .collect()
    }

    /// Child counts in the order of [`TraceForest::label_sequence`].
    pub fn preorder_arities(&self) -> Vec<usize> {
        self.preorder()
            .into_iter()
            .map(|u| self.nodes[u].children.len())
            .collect()
    }

    /// Rebuilds a forest from its label sequence and per-node child counts.
    pub fn from_preorder(labels: &[Label], arities: &[usize]) -> Result<TraceForest, ForestError> {
        if labels.len() != arities.len() {
            return Err(ForestError::Malformed);
        }
        let mut forest = TraceForest::new();
        // Open nodes still waiting for children: (id, remaining).
        let mut open: Vec<(usize, usize)> = Vec::new();
        for (&label, &arity) in labels.iter().zip(arities) {
            while matches!(open.last(), Some(&(_, 0))) {
                open.pop();
            }
            let parent = open.last_mut().map(|slot| {
                slot.1 -= 1;
                slot.0
            });
            let id = forest.push(label, parent);
            open.push((id, arity));
        }
        if open.iter().any(|&(_, r)| r != 0) {
            return Err(ForestError::Malformed);
        }
        Ok(forest)
    }

    /// Σ (2k_i - 2) over the nodes.
    pub fn weight_exponent(&self, index: &CycleIndex) -> u64 {
        self.nodes
            .iter()
            .map(|n| 2 * index.cycle(n.label.cycle).half_length() as u64 - 2)
            .sum()
    }
}

/// One node per recoloring phase, children in call order. With `prefix`,
/// only the first `prefix` phases are used.
pub fn forest_from_log(log: &PhaseLog, prefix: Option<usize>) -> TraceForest {
    let n = prefix.map_or(log.phases.len(), |p| p.min(log.phases.len()));
    let mut forest = TraceForest::new();
    for phase in &log.phases[..n] {
        forest.push(
            Label {
                edge: phase.edge,
                cycle: phase.cycle,
            },
            phase.parent,
        );
    }
    forest
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    /// Condition (i) among roots.
    RootsShareEdge {
        nodes: (usize, usize),
        edge: EdgeId,
    },
    /// Condition (i) among siblings.
    SiblingsShareEdge {
        nodes: (usize, usize),
        edge: EdgeId,
    },
    /// Condition (ii).
    ChildOutsideWindow {
        parent: usize,
        child: usize,
    },
}

pub fn check_feasible(
    forest: &TraceForest,
    g: &Graph,
    index: &CycleIndex,
) -> Result<Feasibility, ForestError> {
    for (id, node) in forest.nodes.iter().enumerate() {
        let Label { edge, cycle } = node.label;
        if edge >= g.edge_count() {
            return Err(ForestError::DanglingEdge { node: id, edge });
        }
        if cycle >= index.len() {
            return Err(ForestError::DanglingCycle { node: id, cycle });
        }
        let c = index.cycle(cycle);
        if !c.contains(edge) {
            return Err(ForestError::EdgeOffCycle {
                node: id,
                edge,
                cycle,
            });
        }
        if c.len() < 6 {
            return Err(ForestError::ShortCycle { node: id, cycle });
        }
    }

    let duplicate = |ids: &[usize]| -> Option<((usize, usize), EdgeId)> {
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if forest.nodes[a].label.edge == forest.nodes[b].label.edge {
                    return Some(((a, b), forest.nodes[a].label.edge));
                }
            }
        }
        None
    };
    if let Some((nodes, edge)) = duplicate(&forest.roots) {
        return Ok(Feasibility::RootsShareEdge { nodes, edge });
    }
    for node in &forest.nodes {
        if let Some((nodes, edge)) = duplicate(&node.children) {
            return Ok(Feasibility::SiblingsShareEdge { nodes, edge });
        }
    }
    for (id, node) in forest.nodes.iter().enumerate() {
        if node.children.is_empty() {
            continue;
        }
        let view = index
            .view(node.label.cycle, node.label.edge)
            .expect("labels checked above");
        let window = view.recolored();
        for &child in &node.children {
            if !window.contains(&forest.nodes[child].label.edge) {
                return Ok(Feasibility::ChildOutsideWindow { parent: id, child });
            }
        }
    }
    Ok(Feasibility::Feasible)
}

/// `‖F‖ = Π K^{-(2k_i - 2)}`, kept as the exact pair `(K, Σ(2k_i - 2))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestWeight {
    pub palette_size: u32,
    pub exponent: u64,
}

/// Largest denominator, in bits, materialized by [`ForestWeight::exact`].
pub const EXACT_WEIGHT_BITS: u64 = 1 << 16;

impl ForestWeight {
    /// `1 / K^exponent` as a rational, if the denominator fits the bit budget.
    pub fn exact(&self) -> Option<BigRational> {
        let bits = (self.palette_size as f64).log2() * self.exponent as f64;
        if bits > EXACT_WEIGHT_BITS as f64 {
            return None;
        }
        let denom = BigUint::from(self.palette_size).pow(self.exponent as u32);
        Some(BigRational::new(One::one(), denom.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self.exact() {
            Some(r) if self.exponent < 1000 => r.to_f64().unwrap_or(0.0),
            _ => (-(self.exponent as f64) * (self.palette_size as f64).ln()).exp(),
        }
    }

    pub fn ln(&self) -> f64 {
        -(self.exponent as f64) * (self.palette_size as f64).ln()
    }
}

pub fn forest_weight(forest: &TraceForest, index: &CycleIndex, palette_size: u32) -> ForestWeight {
    ForestWeight {
        palette_size,
        exponent: forest.weight_exponent(index),
    }
}

/// Default cap on the number of forests produced by enumeration.
pub const DEFAULT_FOREST_LIMIT: usize = 1_000_000;

#[derive(Clone, Debug)]
struct Tree {
    label: Label,
    size: usize,
    children: Vec<Tree>,
}

struct Enumerator<'a> {
    index: &'a CycleIndex,
    limit: usize,
    produced: usize,
}

impl Enumerator<'_> {
    fn charge(&mut self, n: usize) -> Result<(), ForestError> {
        self.produced += n;
        if self.produced > self.limit {
            Err(ForestError::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// Every tree with root edge `edge` and at most `max` nodes.
    fn trees(&mut self, edge: EdgeId, max: usize) -> Result<Vec<Tree>, ForestError> {
        let mut out = Vec::new();
        if max == 0 {
            return Ok(out);
        }
        for anchored in self.index.long_cycles_at(edge) {
            let view = self.index.view(anchored.cycle, edge).expect("indexed");
            let mut window = view.recolored().to_vec();
            window.sort_unstable();
            for children in self.forests(&window, max - 1)? {
                let size = 1 + children.iter().map(|t| t.size).sum::<usize>();
                out.push(Tree {
                    label: Label {
                        edge,
                        cycle: anchored.cycle,
                    },
                    size,
                    children,
                });
            }
        }
        self.charge(out.len())?;
        Ok(out)
    }

    /// Every set of trees with distinct root edges drawn from `edges`
    /// (sorted), with at most `max` nodes in total, the empty set included.
    fn forests(&mut self, edges: &[EdgeId], max: usize) -> Result<Vec<Vec<Tree>>, ForestError> {
        let Some((&first, rest)) = edges.split_first() else {
            return Ok(vec![Vec::new()]);
        };
        let mut out = self.forests(rest, max)?;
        if max > 0 {
            for tree in self.trees(first, max)? {
                for tail in self.forests(rest, max - tree.size)? {
                    let mut f = Vec::with_capacity(tail.len() + 1);
                    f.push(tree.clone());
                    f.extend(tail);
                    out.push(f);
                }
            }
        }
        self.charge(out.len())?;
        Ok(out)
    }
}

fn attach(forest: &mut TraceForest, tree: &Tree, parent: Option<usize>) {
    let id = forest.push(tree.label, parent);
    for child in &tree.children {
        attach(forest, child, Some(id));
    }
}

/// All feasible forests with at most `max_nodes` nodes, each exactly once.
pub fn enumerate_feasible_forests(
    g: &Graph,
    index: &CycleIndex,
    max_nodes: usize,
    limit: usize,
) -> Result<Vec<TraceForest>, ForestError> {
    let mut en = Enumerator {
        index,
        limit,
        produced: 0,
    };
    let edges: Vec<EdgeId> = (0..g.edge_count()).collect();
    let sets = en.forests(&edges, max_nodes)?;
    Ok(sets
        .into_iter()
        .map(|trees| {
            let mut forest = TraceForest::new();
            for t in &trees {
                attach(&mut forest, t, None);
            }
            forest
        })
        .collect())
}

/// Nested serialized form. `anchor` is the first edge of the cycle's
/// canonical traversal, which lets a reader detect a cycle id taken from a
/// different index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub edge: EdgeId,
    pub cycle: CycleId,
    pub anchor: EdgeId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestDocument {
    pub trees: Vec<TreeDocument>,
}

impl ForestDocument {
    /// Trees and siblings in label order.
    pub fn from_forest(forest: &TraceForest, index: &CycleIndex) -> ForestDocument {
        fn build(f: &TraceForest, index: &CycleIndex, u: usize) -> TreeDocument {
            let node = &f.nodes[u];
            TreeDocument {
                edge: node.label.edge,
                cycle: node.label.cycle,
                anchor: index.cycle(node.label.cycle).edges()[0],
                children: f
                    .sorted(&node.children)
                    .into_iter()
                    .map(|c| build(f, index, c))
                    .collect(),
            }
        }
        ForestDocument {
            trees: forest
                .sorted(&forest.roots)
                .into_iter()
                .map(|r| build(forest, index, r))
                .collect(),
        }
    }

    /// Rebuilds the forest, checking every label against `index`.
    pub fn to_forest(&self, g: &Graph, index: &CycleIndex) -> Result<TraceForest, ForestError> {
        fn add(
            doc: &TreeDocument,
            parent: Option<usize>,
            f: &mut TraceForest,
            g: &Graph,
            index: &CycleIndex,
        ) -> Result<(), ForestError> {
            let node = f.len();
            if doc.edge >= g.edge_count() {
                return Err(ForestError::DanglingEdge {
                    node,
                    edge: doc.edge,
                });
            }
            if doc.cycle >= index.len() || index.cycle(doc.cycle).edges()[0] != doc.anchor {
                return Err(ForestError::DanglingCycle {
                    node,
                    cycle: doc.cycle,
                });
            }
            let id = f.push(
                Label {
                    edge: doc.edge,
                    cycle: doc.cycle,
                },
                parent,
            );
            for child in &doc.children {
                add(child, Some(id), f, g, index)?;
            }
            Ok(())
        }
        let mut f = TraceForest::new();
        for t in &self.trees {
            add(t, None, &mut f, g, index)?;
        }
        Ok(f)
    }
}
