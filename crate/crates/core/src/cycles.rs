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

//! Exhaustive enumeration of the even simple cycles of a graph.
//!
//! Every cycle is stored once, in its canonical positive traversal: it
//! starts at the cycle's minimum vertex and leaves towards the smaller of
//! that vertex's two cycle neighbours. Cycles are ordered by their sorted
//! edge-id lists, and that order is what "the least cycle" means.

use thiserror::Error;

use crate::graph::{EdgeId, Graph, VertexId};

pub type CycleId = usize;

/// Default cap on the number of simple cycles visited while indexing.
pub const DEFAULT_CYCLE_LIMIT: usize = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CycleError {
    #[error(
        "cycle budget exceeded: more than {limit} simple cycles; graph too large for exact mode"
    )]
    BudgetExceeded { limit: usize },
    #[error("edge {edge} is not on cycle {cycle}")]
    EdgeNotOnCycle { edge: EdgeId, cycle: CycleId },
}

/// An even simple cycle in canonical positive traversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    id: CycleId,
    edges: Vec<EdgeId>,
    vertices: Vec<VertexId>,
    sorted: Vec<EdgeId>,
}

impl Cycle {
    pub fn id(&self) -> CycleId {
        self.id
    }

    /// Edge ids in traversal order.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    /// Vertices in traversal order; `edges()[i]` joins `vertices()[i]` and
    /// `vertices()[i + 1]` (cyclically).
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Edge ids sorted ascending; the canonical sort key.
    pub fn sorted_edges(&self) -> &[EdgeId] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `k` for a cycle of length `2k`.
    pub fn half_length(&self) -> usize {
        self.edges.len() / 2
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.sorted.binary_search(&e).is_ok()
    }

    /// Position of `e` in the traversal.
    pub fn position(&self, e: EdgeId) -> Option<usize> {
        self.edges.iter().position(|&f| f == e)
    }

    /// Edges at even positions (class 0) and odd positions (class 1) of the
    /// canonical traversal, each monochromatic. This is independent of the
    /// anchor since the length is even.
    pub fn has_monochromatic_classes<C: PartialEq + Copy>(
        &self,
        color: impl Fn(EdgeId) -> C,
    ) -> bool {
        let c0 = color(self.edges[0]);
        let c1 = color(self.edges[1]);
        self.edges
            .iter()
            .enumerate()
            .all(|(i, &e)| color(e) == if i % 2 == 0 { c0 } else { c1 })
    }

    /// At least one parity class monochromatic.
    pub fn has_a_monochromatic_class<C: PartialEq + Copy>(
        &self,
        color: impl Fn(EdgeId) -> C,
    ) -> bool {
        (0..2).any(|p| {
            let c = color(self.edges[p]);
            self.edges.iter().skip(p).step_by(2).all(|&e| color(e) == c)
        })
    }
}

/// A cycle read from one of its edges: `sequence[0]` is the anchor and the
/// rest follow the positive traversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleView {
    pub cycle_id: CycleId,
    pub anchor: EdgeId,
    pub sequence: Vec<EdgeId>,
    /// Edges at even distance from the anchor (includes the anchor).
    pub parity_even: Vec<EdgeId>,
    /// Edges at odd distance from the anchor.
    pub parity_odd: Vec<EdgeId>,
}

impl CycleView {
    pub fn half_length(&self) -> usize {
        self.sequence.len() / 2
    }

    /// `e_1 .. e_{2k-2}`: the edges a recoloring phase redraws.
    pub fn recolored(&self) -> &[EdgeId] {
        &self.sequence[..self.sequence.len() - 2]
    }
}

pub fn cycle_view(c: &Cycle, e: EdgeId) -> Result<CycleView, CycleError> {
    let start = c.position(e).ok_or(CycleError::EdgeNotOnCycle {
        edge: e,
        cycle: c.id,
    })?;
    let n = c.len();
    let sequence: Vec<EdgeId> = (0..n).map(|i| c.edges[(start + i) % n]).collect();
    let parity_even = sequence.iter().step_by(2).copied().collect();
    let parity_odd = sequence.iter().skip(1).step_by(2).copied().collect();
    Ok(CycleView {
        cycle_id: c.id,
        anchor: e,
        sequence,
        parity_even,
        parity_odd,
    })
}

/// A long cycle as seen from one of its edges, without materializing the
/// rotated sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Anchored {
    pub cycle: CycleId,
    pub offset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexOptions {
    /// Only cycles up to this length are indexed. Verdicts built on a
    /// capped index only hold up to that length.
    pub max_len: Option<usize>,
    pub cycle_limit: usize,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            max_len: None,
            cycle_limit: DEFAULT_CYCLE_LIMIT,
        }
    }
}

/// All even cycles of a graph, canonically ordered, with per-edge lookup of
/// the cycles of length at least six.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleIndex {
    cycles: Vec<Cycle>,
    per_edge: Vec<Vec<Anchored>>,
    per_edge_all: Vec<Vec<CycleId>>,
    max_len: Option<usize>,
}

impl CycleIndex {
    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn cycle(&self, id: CycleId) -> &Cycle {
        &self.cycles[id]
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn four_cycles(&self) -> impl Iterator<Item = &Cycle> {
        self.cycles.iter().filter(|c| c.len() == 4)
    }

    /// Even cycles of length at least six.
    pub fn long_cycles(&self) -> impl Iterator<Item = &Cycle> {
        self.cycles.iter().filter(|c| c.len() >= 6)
    }

    /// Cycles of length at least six through `e`, in cycle order.
    pub fn long_cycles_at(&self, e: EdgeId) -> &[Anchored] {
        &self.per_edge[e]
    }

    /// Every indexed even cycle through `e`, in cycle order.
    pub fn cycles_at(&self, e: EdgeId) -> &[CycleId] {
        &self.per_edge_all[e]
    }

    pub fn view(&self, cycle: CycleId, e: EdgeId) -> Result<CycleView, CycleError> {
        cycle_view(&self.cycles[cycle], e)
    }

    /// `Some(L)` when the index was built with a length cap.
    pub fn max_len(&self) -> Option<usize> {
        self.max_len
    }

    pub fn is_tainted(&self) -> bool {
        self.max_len.is_some()
    }
}

pub fn build_cycle_index(g: &Graph, options: IndexOptions) -> Result<CycleIndex, CycleError> {
    let mut found: Vec<(Vec<VertexId>, Vec<EdgeId>)> = Vec::new();
    let mut visited_cycles = 0usize;
    let n = g.vertex_count();
    let cap = options.max_len.unwrap_or(n).min(n);

    let mut on_path = vec![false; n];
    for s in 0..n {
        // DFS over simple paths starting at s through vertices > s.
        let mut path = vec![s];
        let mut edge_path: Vec<EdgeId> = Vec::new();
        let mut cursor: Vec<usize> = vec![0];
        on_path[s] = true;
        while let Some(&u) = path.last() {
            let depth = path.len() - 1;
            let i = cursor[depth];
            let incident = g.incident(u);
            if i == incident.len() {
                on_path[u] = false;
                path.pop();
                cursor.pop();
                edge_path.pop();
                continue;
            }
            cursor[depth] += 1;
            let e = incident[i];
            let w = g.opposite(e, u);
            if w == s && path.len() >= 3 {
                // Each cycle is reached in both directions; keep the one
                // leaving s towards the smaller neighbour.
                if path[1] < u {
                    visited_cycles += 1;
                    if visited_cycles > options.cycle_limit {
                        return Err(CycleError::BudgetExceeded {
                            limit: options.cycle_limit,
                        });
                    }
                    if path.len() % 2 == 0 {
                        let mut edges = edge_path.clone();
                        edges.push(e);
                        found.push((path.clone(), edges));
                    }
                }
            } else if w > s && !on_path[w] && path.len() < cap {
                on_path[w] = true;
                path.push(w);
                edge_path.push(e);
                cursor.push(0);
            }
        }
    }

    let mut cycles: Vec<Cycle> = found
        .into_iter()
        .map(|(vertices, edges)| {
            let mut sorted = edges.clone();
            sorted.sort_unstable();
            Cycle {
                id: 0,
                edges,
                vertices,
                sorted,
            }
        })
        .collect();
    cycles.sort_by(|a, b| a.sorted.cmp(&b.sorted));

    let mut per_edge = vec![Vec::new(); g.edge_count()];
    let mut per_edge_all = vec![Vec::new(); g.edge_count()];
    for (id, c) in cycles.iter_mut().enumerate() {
        c.id = id;
        for (offset, &e) in c.edges.iter().enumerate() {
            per_edge_all[e].push(id);
            if c.edges.len() >= 6 {
                per_edge[e].push(Anchored { cycle: id, offset });
            }
        }
    }

    Ok(CycleIndex {
        cycles,
        per_edge,
        per_edge_all,
        max_len: options.max_len,
    })
}
