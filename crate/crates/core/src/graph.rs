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

//! Simple undirected graphs with a canonical edge order.
//!
//! Vertices are dense `0..vertex_count` indices. Edges are stored as
//! `(min, max)` pairs sorted lexicographically; the position of an edge in
//! that order is its [`EdgeId`] and is what every algorithm in this crate
//! means by "the least edge".

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: u64 },
    #[error("line {line}: duplicate edge {u} {v}")]
    DuplicateEdge { line: usize, u: u64, v: u64 },
    #[error("vertex {vertex} out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("graph has no vertices")]
    Empty,
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

/// Immutable simple graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
    adjacency: Vec<Vec<EdgeId>>,
    lookup: HashMap<(VertexId, VertexId), EdgeId>,
    labels: Vec<u64>,
}

impl Graph {
    /// Builds a graph on `vertex_count` vertices from unordered pairs.
    ///
    /// Pairs may be given in any order and orientation; they are
    /// normalized to `(min, max)` and sorted.
    pub fn from_edges<I>(vertex_count: usize, pairs: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for (line, (u, v)) in pairs.into_iter().enumerate() {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: w,
                        vertex_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop {
                    line: line + 1,
                    vertex: u as u64,
                });
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge {
                    line: line + 1,
                    u: u as u64,
                    v: v as u64,
                });
            }
        }
        let labels = (0..vertex_count as u64).collect();
        Ok(Self::build(vertex_count, set.into_iter().collect(), labels))
    }

    fn build(vertex_count: usize, edges: Vec<(VertexId, VertexId)>, labels: Vec<u64>) -> Graph {
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut lookup = HashMap::with_capacity(edges.len());
        for (id, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push(id);
            adjacency[v].push(id);
            lookup.insert((u, v), id);
        }
        Graph {
            vertex_count,
            edges,
            adjacency,
            lookup,
            labels,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Endpoints `(u, v)` with `u < v`.
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Incident edges of `v`, in increasing edge id.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Graphs with maximum degree at most one have no two adjacent edges.
    pub fn is_trivial(&self) -> bool {
        self.max_degree() <= 1
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.lookup.get(&(u.min(v), u.max(v))).copied()
    }

    /// The vertex of `e` that is not `v`.
    pub fn opposite(&self, e: EdgeId, v: VertexId) -> VertexId {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Edges sharing an endpoint with `e`.
    pub fn adjacent_edges(&self, e: EdgeId) -> impl Iterator<Item = EdgeId> + '_ {
        let (u, v) = self.edges[e];
        self.adjacency[u]
            .iter()
            .chain(self.adjacency[v].iter())
            .copied()
            .filter(move |&f| f != e)
    }

    /// Original input label of a dense vertex index.
    pub fn label(&self, v: VertexId) -> u64 {
        self.labels[v]
    }

    /// Length of a shortest cycle, by BFS from every vertex.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for s in 0..self.vertex_count {
            let mut dist = vec![usize::MAX; self.vertex_count];
            let mut parent_edge = vec![usize::MAX; self.vertex_count];
            let mut queue = std::collections::VecDeque::new();
            dist[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adjacency[u] {
                    if e == parent_edge[u] {
                        continue;
                    }
                    let w = self.opposite(e, u);
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent_edge[w] = e;
                        queue.push_back(w);
                    } else {
                        let len = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    /// Edge-list text in canonical edge order, one `u v` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            out.push_str(&format!("{} {}\n", u, v));
        }
        out
    }
}

/// Parses the edge-list format: one `u v` pair per line, `#` comments and
/// blank lines ignored. Vertex labels are arbitrary non-negative integers;
/// they are remapped to dense indices in increasing label order.
pub fn load_graph(text: &str) -> Result<Graph, GraphError> {
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("expected two vertex labels, found {}", fields.len()),
            });
        }
        let mut parsed = [0u64; 2];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("not a non-negative integer: {:?}", field),
            })?;
        }
        raw.push((line_no, parsed[0], parsed[1]));
    }

    let labels: Vec<u64> = raw
        .iter()
        .flat_map(|&(_, u, v)| [u, v])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if labels.is_empty() {
        return Err(GraphError::Empty);
    }
    let index: HashMap<u64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();

    let mut set = BTreeSet::new();
    for &(line, u, v) in &raw {
        if u == v {
            return Err(GraphError::SelfLoop { line, vertex: u });
        }
        let (a, b) = (index[&u], index[&v]);
        if !set.insert((a.min(b), a.max(b))) {
            return Err(GraphError::DuplicateEdge { line, u, v });
        }
    }
    Ok(Graph::build(
        labels.len(),
        set.into_iter().collect(),
        labels,
    ))
}

/// Deterministic and seeded graph families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Complete(usize),
    Cycle(usize),
    Grid(usize, usize),
    RandomRegular { n: usize, d: usize, seed: u64 },
    Petersen,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Complete(n) => write!(f, "complete:{}", n),
            Family::Cycle(n) => write!(f, "cycle:{}", n),
            Family::Grid(r, c) => write!(f, "grid:{}x{}", r, c),
            Family::RandomRegular { n, d, seed } => write!(f, "regular:{},{},{}", n, d, seed),
            Family::Petersen => write!(f, "petersen"),
        }
    }
}

impl FromStr for Family {
    type Err = GraphError;

    /// Accepts `complete:N`, `cycle:N`, `grid:RxC`, `regular:N,D,SEED` and
    /// `petersen`.
    fn from_str(s: &str) -> Result<Family, GraphError> {
        let bad = || GraphError::InvalidParameters(format!("unrecognized generator {:?}", s));
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, a),
            None => (s, ""),
        };
        let nums = |sep: &[char]| -> Result<Vec<u64>, GraphError> {
            args.split(sep)
                .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
                .collect()
        };
        match name {
            "petersen" if args.is_empty() => Ok(Family::Petersen),
            "complete" => match nums(&[','])?.as_slice() {
                [n] => Ok(Family::Complete(*n as usize)),
                _ => Err(bad()),
            },
            "cycle" => match nums(&[','])?.as_slice() {
                [n] => Ok(Family::Cycle(*n as usize)),
                _ => Err(bad()),
            },
            "grid" => match nums(&['x', ','])?.as_slice() {
                [r, c] => Ok(Family::Grid(*r as usize, *c as usize)),
                _ => Err(bad()),
            },
            "regular" => match nums(&[','])?.as_slice() {
                [n, d, seed] => Ok(Family::RandomRegular {
                    n: *n as usize,
                    d: *d as usize,
                    seed: *seed,
                }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

const REGULAR_ATTEMPTS: usize = 100_000;

pub fn generate(family: &Family) -> Result<Graph, GraphError> {
    match *family {
        Family::Complete(n) => {
            if n < 3 {
                return Err(GraphError::InvalidParameters(
                    "complete graph needs n >= 3".into(),
                ));
            }
            let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            Graph::from_edges(n, pairs)
        }
        Family::Cycle(n) => {
            if n < 3 {
                return Err(GraphError::InvalidParameters("cycle needs n >= 3".into()));
            }
            Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        Family::Grid(r, c) => {
            if r == 0 || c == 0 || r * c < 2 {
                return Err(GraphError::InvalidParameters(
                    "grid needs at least two vertices".into(),
                ));
            }
            let mut pairs = Vec::new();
            for i in 0..r {
                for j in 0..c {
                    let v = i * c + j;
                    if j + 1 < c {
                        pairs.push((v, v + 1));
                    }
                    if i + 1 < r {
                        pairs.push((v, v + c));
                    }
                }
            }
            Graph::from_edges(r * c, pairs)
        }
        Family::Petersen => {
            let mut pairs = Vec::with_capacity(15);
            for i in 0..5 {
                pairs.push((i, (i + 1) % 5));
                pairs.push((i, i + 5));
                pairs.push((i + 5, (i + 2) % 5 + 5));
            }
            Graph::from_edges(10, pairs)
        }
        Family::RandomRegular { n, d, seed } => random_regular(n, d, seed),
    }
}

/// Pairing-model sampler, rejecting configurations with loops or multi-edges.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    if n < 3 || d == 0 || d >= n || !(n * d).is_multiple_of(2) {
        return Err(GraphError::InvalidParameters(format!(
            "random regular graph needs n >= 3, 0 < d < n and n*d even (got n={}, d={})",
            n, d
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..REGULAR_ATTEMPTS {
        points.shuffle(&mut rng);
        let mut set = BTreeSet::new();
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !set.insert((u.min(v), u.max(v))) {
                continue 'attempt;
            }
        }
        return Graph::from_edges(n, set);
    }
    Err(GraphError::InvalidParameters(format!(
        "no simple {}-regular graph on {} vertices found after {} attempts",
        d, n, REGULAR_ATTEMPTS
    )))
}
