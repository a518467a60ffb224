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

//! Properness and acyclicity checks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cycles::{CycleId, CycleIndex};
use crate::graph::{EdgeId, Graph};
use crate::rng::Color;

/// Two adjacent edges with the same color, if any.
pub fn improper_pair(g: &Graph, colors: &[Color]) -> Option<(EdgeId, EdgeId)> {
    for v in 0..g.vertex_count() {
        let inc = g.incident(v);
        for (i, &a) in inc.iter().enumerate() {
            for &b in &inc[i + 1..] {
                if colors[a] == colors[b] {
                    return Some((a, b));
                }
            }
        }
    }
    None
}

pub fn verify_proper(g: &Graph, colors: &[Color]) -> bool {
    improper_pair(g, colors).is_none()
}

fn distinct_colors(edges: &[EdgeId], colors: &[Color]) -> usize {
    edges
        .iter()
        .map(|&e| colors[e])
        .collect::<BTreeSet<_>>()
        .len()
}

/// True when no 4-cycle uses exactly two colors.
pub fn verify_no_bichromatic_4cycle(index: &CycleIndex, colors: &[Color]) -> bool {
    index
        .four_cycles()
        .all(|c| distinct_colors(c.edges(), colors) != 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AcyclicVerdict {
    Acyclic,
    /// Proper and free of bichromatic cycles up to the index's length cap.
    AcyclicUpTo {
        max_len: usize,
    },
    Improper {
        edges: (EdgeId, EdgeId),
    },
    Bichromatic {
        cycle: CycleId,
        edges: Vec<EdgeId>,
    },
}

impl AcyclicVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(
            self,
            AcyclicVerdict::Acyclic | AcyclicVerdict::AcyclicUpTo { .. }
        )
    }
}

/// Proper, and no indexed even cycle is covered by two colors.
pub fn verify_acyclic(g: &Graph, index: &CycleIndex, colors: &[Color]) -> AcyclicVerdict {
    if let Some(edges) = improper_pair(g, colors) {
        return AcyclicVerdict::Improper { edges };
    }
    for c in index.cycles() {
        if distinct_colors(c.edges(), colors) <= 2 {
            return AcyclicVerdict::Bichromatic {
                cycle: c.id(),
                edges: c.edges().to_vec(),
            };
        }
    }
    match index.max_len() {
        Some(max_len) => AcyclicVerdict::AcyclicUpTo { max_len },
        None => AcyclicVerdict::Acyclic,
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Cycle-free check that does not use the cycle index: a proper coloring is
/// acyclic iff for every pair of colors the edges using them form a forest.
///
/// Returns the offending color pair, or `None` when proper and acyclic.
/// An improper coloring is reported as `Some((c, c))`.
pub fn two_color_forest_violation(g: &Graph, colors: &[Color]) -> Option<(Color, Color)> {
    if let Some((a, _)) = improper_pair(g, colors) {
        return Some((colors[a], colors[a]));
    }
    let palette: Vec<Color> = colors
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for (i, &a) in palette.iter().enumerate() {
        for &b in &palette[i + 1..] {
            let mut sets = DisjointSets::new(g.vertex_count());
            for (e, &(u, v)) in g.edges().iter().enumerate() {
                if (colors[e] == a || colors[e] == b) && !sets.union(u, v) {
                    return Some((a, b));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{build_cycle_index, IndexOptions};
    use crate::graph::{generate, Family};

    fn c6() -> (Graph, CycleIndex) {
        let g = generate(&Family::Cycle(6)).unwrap();
        let idx = build_cycle_index(&g, IndexOptions::default()).unwrap();
        (g, idx)
    }

    /// Colors given in traversal order of the single cycle.
    fn along_cycle(idx: &CycleIndex, seq: [Color; 6]) -> Vec<Color> {
        let mut colors = vec![0; 6];
        for (i, &e) in idx.cycle(0).edges().iter().enumerate() {
            colors[e] = seq[i];
        }
        colors
    }

    #[test]
    fn three_colors_on_c6() {
        let (g, idx) = c6();
        let col = along_cycle(&idx, [1, 2, 3, 1, 2, 3]);
        assert!(verify_proper(&g, &col));
        assert_eq!(verify_acyclic(&g, &idx, &col), AcyclicVerdict::Acyclic);
        assert_eq!(two_color_forest_violation(&g, &col), None);
    }

    #[test]
    fn alternating_c6_is_bichromatic() {
        let (g, idx) = c6();
        let col = along_cycle(&idx, [1, 2, 1, 2, 1, 2]);
        assert!(verify_proper(&g, &col));
        assert!(matches!(
            verify_acyclic(&g, &idx, &col),
            AcyclicVerdict::Bichromatic { cycle: 0, .. }
        ));
        assert_eq!(two_color_forest_violation(&g, &col), Some((1, 2)));
    }

    #[test]
    fn improper_c6() {
        let (g, idx) = c6();
        let col = along_cycle(&idx, [1, 1, 2, 3, 2, 3]);
        assert!(!verify_proper(&g, &col));
        assert!(matches!(
            verify_acyclic(&g, &idx, &col),
            AcyclicVerdict::Improper { .. }
        ));
    }

    #[test]
    fn four_cycle_check_on_k4() {
        let g = generate(&Family::Complete(4)).unwrap();
        let idx = build_cycle_index(&g, IndexOptions::default()).unwrap();
        // Perfect matchings {01,23}, {02,13}, {03,12} get colors 1, 2, 3.
        let mut col = vec![0; 6];
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            col[e] = match (u, v) {
                (0, 1) | (2, 3) => 1,
                (0, 2) | (1, 3) => 2,
                _ => 3,
            };
        }
        assert!(verify_proper(&g, &col));
        assert!(!verify_no_bichromatic_4cycle(&idx, &col));
        assert!(!verify_acyclic(&g, &idx, &col).is_ok());
        assert!(two_color_forest_violation(&g, &col).is_some());
    }

    #[test]
    fn capped_index_qualifies_verdict() {
        let (g, full) = c6();
        let col = along_cycle(&full, [1, 2, 1, 2, 1, 2]);
        let idx = build_cycle_index(
            &g,
            IndexOptions {
                max_len: Some(4),
                ..IndexOptions::default()
            },
        )
        .unwrap();
        // The capped index cannot see the 6-cycle.
        assert_eq!(
            verify_acyclic(&g, &idx, &col),
            AcyclicVerdict::AcyclicUpTo { max_len: 4 }
        );
    }
}
