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

//! Randomized acyclic edge coloring with `2Δ - 1` colors, the validation
//! machinery that bounds its running time, and exact oracles for small
//! graphs.

pub mod asymptotics;
pub mod cycles;
pub mod engine;
pub mod forest;
pub mod graph;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod validation;
pub mod verify;

pub use cycles::{build_cycle_index, Cycle, CycleId, CycleIndex, CycleView, IndexOptions};
pub use engine::{
    edge_color, main_algorithm, EdgeColoring, EngineConfig, Outcome, Palette, RunResult,
};
pub use graph::{generate, load_graph, EdgeId, Family, Graph, VertexId};
pub use rng::{Color, Seed, TrialRng};
pub use verify::{verify_acyclic, verify_proper, AcyclicVerdict};
