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

//! Exact acyclic chromatic index of small graphs by backtracking.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::CycleIndex;
use crate::graph::{EdgeId, Graph};
use crate::rng::Color;

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleError {
    #[error("search budget of {budget} nodes exceeded while probing K = {palette_size}")]
    BudgetExceeded { palette_size: u32, budget: u64 },
    #[error("no coloring with at most {k_max} colors; chi_a >= {lower_bound}")]
    KMaxInsufficient { k_max: u32, lower_bound: u32 },
    #[error("k_max = {k_max} is below the maximum degree {max_degree}")]
    KMaxBelowDegree { k_max: u32, max_degree: usize },
    #[error("cycle index is capped at length {0}; exact search needs every cycle")]
    TaintedIndex(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub chi_a: u32,
    /// Optimal coloring indexed by canonical edge id.
    pub witness: Vec<Color>,
    /// Search nodes over every probed palette size.
    pub colorings_examined: u64,
}

struct Search {
    order: Vec<EdgeId>,
    /// Earlier positions holding an edge adjacent to the one at this position.
    adjacent_before: Vec<Vec<usize>>,
    /// Cycles, as position lists, whose last edge in search order is here.
    closing: Vec<Vec<Vec<usize>>>,
    colors: Vec<Color>,
    palette_size: Color,
    nodes: u64,
    budget: u64,
}

struct OutOfBudget;

impl Search {
    fn new(g: &Graph, index: &CycleIndex, budget: u64) -> Search {
        let order = search_order(g);
        let m = order.len();
        let mut pos = vec![0; m];
        for (p, &e) in order.iter().enumerate() {
            pos[e] = p;
        }
        let adjacent_before = order
            .iter()
            .enumerate()
            .map(|(p, &e)| {
                let mut before: Vec<usize> = g
                    .adjacent_edges(e)
                    .map(|f| pos[f])
                    .filter(|&q| q < p)
                    .collect();
                before.sort_unstable();
                before
            })
            .collect();
        let mut closing = vec![Vec::new(); m];
        for c in index.cycles() {
            let ps: Vec<usize> = c.edges().iter().map(|&e| pos[e]).collect();
            let last = *ps.iter().max().expect("cycles are nonempty");
            closing[last].push(ps);
        }
        Search {
            order,
            adjacent_before,
            closing,
            colors: vec![0; m],
            palette_size: 0,
            nodes: 0,
            budget,
        }
    }

    fn admissible(&self, p: usize, c: Color) -> bool {
        if self.adjacent_before[p].iter().any(|&q| self.colors[q] == c) {
            return false;
        }
        // Properness already holds, so a cycle is bichromatic iff it uses
        // only the colors of two consecutive edges.
        self.closing[p].iter().all(|cycle| {
            let color = |q: usize| if q == p { c } else { self.colors[q] };
            let (a, b) = (color(cycle[0]), color(cycle[1]));
            cycle.iter().any(|&q| {
                let x = color(q);
                x != a && x != b
            })
        })
    }

    /// Colors are interchangeable, so the next edge only tries colors up to
    /// one more than the largest color used so far.
    fn extend(&mut self, p: usize, max_used: Color) -> Result<bool, OutOfBudget> {
        if p == self.order.len() {
            return Ok(true);
        }
        let top = (max_used + 1).min(self.palette_size);
        for c in 1..=top {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(OutOfBudget);
            }
            if !self.admissible(p, c) {
                continue;
            }
            self.colors[p] = c;
            if self.extend(p + 1, max_used.max(c))? {
                return Ok(true);
            }
        }
        self.colors[p] = 0;
        Ok(false)
    }

    fn witness(&self) -> Vec<Color> {
        let mut out = vec![0; self.order.len()];
        for (p, &e) in self.order.iter().enumerate() {
            out[e] = self.colors[p];
        }
        out
    }
}

/// Breadth-first from the lowest-numbered vertex of maximum degree; each
/// edge is placed once both its endpoints are reached, so short cycles close
/// early and the star at the start vertex comes first.
fn search_order(g: &Graph) -> Vec<EdgeId> {
    let n = g.vertex_count();
    let delta = g.max_degree();
    let mut rank = vec![usize::MAX; n];
    let mut next = 0;
    let starts = (0..n).filter(|&v| g.degree(v) == delta).chain(0..n);
    for s in starts {
        if rank[s] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([s]);
        rank[s] = next;
        next += 1;
        while let Some(v) = queue.pop_front() {
            let mut nbrs: Vec<usize> = g.incident(v).iter().map(|&e| g.opposite(e, v)).collect();
            nbrs.sort_unstable();
            for w in nbrs {
                if rank[w] == usize::MAX {
                    rank[w] = next;
                    next += 1;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut order: Vec<EdgeId> = (0..g.edge_count()).collect();
    order.sort_by_key(|&e| {
        let (u, v) = g.endpoints(e);
        let (a, b) = (rank[u].min(rank[v]), rank[u].max(rank[v]));
        (b, a)
    });
    order
}

/// Smallest `K ≤ k_max` with a proper acyclic coloring, probing
/// `K = Δ, Δ+1, …`. The node budget is shared across all probes.
pub fn exact_chi_a(
    g: &Graph,
    index: &CycleIndex,
    k_max: u32,
    node_budget: u64,
) -> Result<OracleResult, OracleError> {
    if let Some(cap) = index.max_len() {
        return Err(OracleError::TaintedIndex(cap));
    }
    let delta = g.max_degree();
    if (k_max as usize) < delta {
        return Err(OracleError::KMaxBelowDegree {
            k_max,
            max_degree: delta,
        });
    }
    if g.edge_count() == 0 {
        return Ok(OracleResult {
            chi_a: 0,
            witness: Vec::new(),
            colorings_examined: 0,
        });
    }
    let mut search = Search::new(g, index, node_budget);
    for k in delta as u32..=k_max {
        search.palette_size = k;
        match search.extend(0, 0) {
            Ok(true) => {
                return Ok(OracleResult {
                    chi_a: k,
                    witness: search.witness(),
                    colorings_examined: search.nodes,
                })
            }
            Ok(false) => {}
            Err(OutOfBudget) => {
                return Err(OracleError::BudgetExceeded {
                    palette_size: k,
                    budget: node_budget,
                })
            }
        }
    }
    Err(OracleError::KMaxInsufficient {
        k_max,
        lower_bound: k_max + 1,
    })
}

/// Whether `2Δ - 1` colors suffice; edgeless graphs trivially qualify.
pub fn certify_corollary(
    g: &Graph,
    index: &CycleIndex,
    node_budget: u64,
) -> Result<bool, OracleError> {
    if g.edge_count() == 0 {
        return Ok(true);
    }
    let k_max = (2 * g.max_degree() - 1) as u32;
    match exact_chi_a(g, index, k_max, node_budget) {
        Ok(_) => Ok(true),
        Err(OracleError::KMaxInsufficient { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

fn is_connected(n: usize, pairs: &[(usize, usize)], mask: u32) -> bool {
    let mut seen = 1u32;
    loop {
        let before = seen;
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 && (seen >> u & 1 == 1 || seen >> v & 1 == 1) {
                seen |= 1 << u | 1 << v;
            }
        }
        if seen == before {
            return seen == (1u32 << n) - 1;
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// One representative of every isomorphism class of connected graphs on
/// exactly `n` vertices (`1 ≤ n ≤ 7`).
///
/// Representatives are the edge subsets of `K_n` whose bitmask is minimal
/// over all vertex relabelings.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!(
        (1..=7).contains(&n),
        "connected_graphs supports 1..=7 vertices"
    );
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let slot = |u: usize, v: usize| {
        let (a, b) = (u.min(v), u.max(v));
        pairs
            .iter()
            .position(|&p| p == (a, b))
            .expect("pair of K_n")
    };
    let maps: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .map(|perm| pairs.iter().map(|&(u, v)| slot(perm[u], perm[v])).collect())
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        if !is_connected(n, &pairs, mask) {
            continue;
        }
        let canonical = maps.iter().all(|map| {
            let mut image = 0u32;
            for (i, &j) in map.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    image |= 1 << j;
                }
            }
            image >= mask
        });
        if canonical {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p);
            out.push(Graph::from_edges(n, edges).expect("subgraph of K_n"));
        }
    }
    out
}
