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

//! The randomized resampling colorer.
//!
//! [`edge_color`] draws every color independently, ignoring properness, and
//! then repeatedly picks the least edge lying on a *bad* cycle (an even
//! cycle of length at least six whose two parity classes are each
//! monochromatic) together with the least such cycle, and redraws that
//! cycle's first `2k - 2` edges as seen from the edge. After each redraw
//! the same search runs restricted to the redrawn edges, recursively.
//!
//! [`main_algorithm`] repeats [`edge_color`] from scratch until the result
//! is proper and has no bichromatic 4-cycle. At that point no even cycle of
//! any length is bichromatic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::{CycleId, CycleIndex, CycleView};
use crate::graph::{EdgeId, Graph};
use crate::rng::{Color, ColorSource, RandomTape, Seed, TrialRng};
use crate::verify::{verify_no_bichromatic_4cycle, verify_proper};

#[derive(Debug, Error, PartialEq)]
pub enum PaletteError {
    #[error("palette needs at least one color")]
    Empty,
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("graph has maximum degree {0}; derived palette would be empty")]
    DegenerateDegree(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaletteDerivation {
    Explicit,
    TwoDeltaMinusOne,
    Epsilon(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    size: u32,
    derivation: PaletteDerivation,
}

impl Palette {
    pub fn explicit(size: u32) -> Result<Palette, PaletteError> {
        if size == 0 {
            return Err(PaletteError::Empty);
        }
        Ok(Palette {
            size,
            derivation: PaletteDerivation::Explicit,
        })
    }

    /// `2Δ - 1` colors.
    pub fn two_delta_minus_one(g: &Graph) -> Result<Palette, PaletteError> {
        let delta = g.max_degree();
        if delta == 0 {
            return Err(PaletteError::DegenerateDegree(0));
        }
        Ok(Palette {
            size: (2 * delta - 1) as u32,
            derivation: PaletteDerivation::TwoDeltaMinusOne,
        })
    }

    /// `⌈(2 + ε)(Δ - 1)⌉` colors.
    pub fn epsilon(g: &Graph, eps: f64) -> Result<Palette, PaletteError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(PaletteError::BadEpsilon(eps));
        }
        let delta = g.max_degree();
        let size = ((2.0 + eps) * (delta as f64 - 1.0)).ceil();
        if size < 1.0 {
            return Err(PaletteError::DegenerateDegree(delta));
        }
        Ok(Palette {
            size: size as u32,
            derivation: PaletteDerivation::Epsilon(eps),
        })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn derivation(&self) -> PaletteDerivation {
        self.derivation
    }

    /// `(Δ - 1) / K`.
    pub fn q(&self, max_degree: usize) -> f64 {
        (max_degree as f64 - 1.0).max(0.0) / self.size as f64
    }
}

/// A total map from edge id to color.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeColoring(Vec<Color>);

impl EdgeColoring {
    pub fn new(colors: Vec<Color>) -> Self {
        EdgeColoring(colors)
    }

    pub fn colors(&self) -> &[Color] {
        &self.0
    }

    pub fn get(&self, e: EdgeId) -> Color {
        self.0[e]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<Color> {
        self.0
    }
}

/// Which cycles trigger a recoloring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationRule {
    /// Both parity classes monochromatic.
    #[default]
    BothClasses,
    /// At least one parity class monochromatic. Experimental.
    OneClass,
}

pub fn is_bad_cycle(view: &CycleView, colors: &[Color]) -> bool {
    let mono = |class: &[EdgeId]| class.iter().all(|&e| colors[e] == colors[class[0]]);
    mono(&view.parity_even) && mono(&view.parity_odd)
}

fn cycle_is_bad(index: &CycleIndex, cycle: CycleId, colors: &[Color], rule: ViolationRule) -> bool {
    let c = index.cycle(cycle);
    match rule {
        ViolationRule::BothClasses => c.has_monochromatic_classes(|e| colors[e]),
        ViolationRule::OneClass => c.has_a_monochromatic_class(|e| colors[e]),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub edge: EdgeId,
    pub cycle: CycleId,
}

/// The least edge on a bad cycle of length at least six, and the least such
/// cycle through it. With `restrict`, only those edges are candidates.
pub fn find_least_violation(
    index: &CycleIndex,
    colors: &[Color],
    restrict: Option<&[EdgeId]>,
    rule: ViolationRule,
) -> Option<Violation> {
    let probe = |e: EdgeId| {
        index
            .long_cycles_at(e)
            .iter()
            .find(|a| cycle_is_bad(index, a.cycle, colors, rule))
            .map(|a| Violation {
                edge: e,
                cycle: a.cycle,
            })
    };
    match restrict {
        None => (0..colors.len()).find_map(probe),
        Some(edges) => {
            let mut candidates = edges.to_vec();
            candidates.sort_unstable();
            candidates.dedup();
            candidates.into_iter().find_map(probe)
        }
    }
}

/// One call of the recoloring procedure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecolorPhase {
    pub edge: EdgeId,
    pub cycle: CycleId,
    /// `e_1 .. e_{2k-2}` of the cycle read from `edge`, in draw order.
    pub recolored: Vec<EdgeId>,
    /// 1 for root calls.
    pub depth: u32,
    /// Index into [`PhaseLog::phases`] of the calling phase; `None` for root
    /// calls.
    pub parent: Option<usize>,
}

/// Phase 0 (the initial coloring) is implicit; `phases[i]` is phase `i + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub phases: Vec<RecolorPhase>,
    pub halted: bool,
}

impl PhaseLog {
    /// Including the initial coloring phase.
    pub fn total_phases(&self) -> u64 {
        self.phases.len() as u64 + 1
    }

    pub fn recolor_phases(&self) -> u64 {
        self.phases.len() as u64
    }

    pub fn root_calls(&self) -> usize {
        self.phases.iter().filter(|p| p.parent.is_none()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeColorRun {
    pub coloring: EdgeColoring,
    pub log: PhaseLog,
}

struct Frame {
    phase: usize,
    candidates: Vec<EdgeId>,
}

/// Runs the resampling colorer until no bad cycle of length at least six
/// remains, or until `phase_budget` recoloring phases have been spent
/// (`log.halted == false`).
pub fn edge_color<S: ColorSource>(
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    source: &mut S,
    phase_budget: u64,
    rule: ViolationRule,
) -> EdgeColorRun {
    let k = palette.size();
    source.begin_phase();
    let mut colors: Vec<Color> = (0..g.edge_count()).map(|e| source.draw(e, k)).collect();
    let mut log = PhaseLog::default();
    let mut stack: Vec<Frame> = Vec::new();

    loop {
        let found = match stack.last() {
            None => find_least_violation(index, &colors, None, rule),
            Some(top) => find_least_violation(index, &colors, Some(&top.candidates), rule),
        };
        let Some(v) = found else {
            if stack.pop().is_none() {
                log.halted = true;
                break;
            }
            continue;
        };
        if log.phases.len() as u64 >= phase_budget {
            break;
        }
        let view = index
            .view(v.cycle, v.edge)
            .expect("violation edge lies on its cycle");
        let recolored = view.recolored().to_vec();
        source.begin_phase();
        for &e in &recolored {
            colors[e] = source.draw(e, k);
        }
        let mut candidates = recolored.clone();
        candidates.sort_unstable();
        log.phases.push(RecolorPhase {
            edge: v.edge,
            cycle: v.cycle,
            recolored,
            depth: stack.len() as u32 + 1,
            parent: stack.last().map(|f| f.phase),
        });
        stack.push(Frame {
            phase: log.phases.len() - 1,
            candidates,
        });
    }

    EdgeColorRun {
        coloring: EdgeColoring(colors),
        log,
    }
}

pub const DEFAULT_PHASES_PER_EDGE: u64 = 10_000;
/// A uniformly random 5-coloring of a cubic graph is proper roughly once in
/// two thousand draws, so the retry loop needs far more than a thousand runs.
pub const DEFAULT_RETRY_BUDGET: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Maximum recoloring phases per colorer run.
    pub phase_budget: u64,
    /// Maximum colorer runs per attempt of the retry loop.
    pub retry_budget: u64,
    pub rule: ViolationRule,
}

impl EngineConfig {
    /// `10⁴·m` phases and `10⁵` retries.
    pub fn for_graph(g: &Graph) -> Self {
        EngineConfig {
            phase_budget: (DEFAULT_PHASES_PER_EDGE * g.edge_count() as u64).max(1),
            retry_budget: DEFAULT_RETRY_BUDGET,
            rule: ViolationRule::BothClasses,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    PhaseBudgetExhausted,
    RetryBudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub seed: Seed,
    pub palette_size: u32,
    pub outcome: Outcome,
    /// Total phases (initial coloring included) of every colorer run.
    pub phases_per_run: Vec<u64>,
    pub coloring: EdgeColoring,
    /// Log of the last colorer run.
    pub log: PhaseLog,
}

impl RunResult {
    pub fn edge_color_runs(&self) -> u64 {
        self.phases_per_run.len() as u64
    }

    pub fn document(&self, include_log: bool) -> RunDocument {
        RunDocument {
            version: RUN_DOCUMENT_VERSION,
            seed: self.seed.master,
            trial: self.seed.trial,
            palette_size: self.palette_size,
            outcome: self.outcome,
            edge_color_runs: self.edge_color_runs(),
            phases_per_run: self.phases_per_run.clone(),
            coloring: self.coloring.colors().to_vec(),
            log: include_log.then(|| self.log.clone()),
        }
    }
}

pub const RUN_DOCUMENT_VERSION: u32 = 1;

/// Serialized form of a [`RunResult`]; `coloring[i]` is the color of edge `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDocument {
    pub version: u32,
    pub seed: u64,
    pub trial: u64,
    #[serde(rename = "K")]
    pub palette_size: u32,
    pub outcome: Outcome,
    pub edge_color_runs: u64,
    pub phases_per_run: Vec<u64>,
    pub coloring: Vec<Color>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log: Option<PhaseLog>,
}

/// Repeats [`edge_color`] from a fresh random coloring until the output is
/// proper with no bichromatic 4-cycle. All runs draw from one stream.
pub fn main_algorithm(
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    seed: Seed,
    config: &EngineConfig,
) -> RunResult {
    let mut rng = TrialRng::new(seed);
    let mut phases_per_run = Vec::new();
    let mut last = None;
    let mut outcome = Outcome::RetryBudgetExhausted;
    for _ in 0..config.retry_budget.max(1) {
        let run = edge_color(
            g,
            index,
            palette,
            &mut rng,
            config.phase_budget,
            config.rule,
        );
        phases_per_run.push(run.log.total_phases());
        let halted = run.log.halted;
        let good = halted
            && verify_proper(g, run.coloring.colors())
            && verify_no_bichromatic_4cycle(index, run.coloring.colors());
        last = Some(run);
        if !halted {
            outcome = Outcome::PhaseBudgetExhausted;
            break;
        }
        if good {
            outcome = Outcome::Success;
            break;
        }
    }
    let run = last.expect("at least one colorer run");
    RunResult {
        seed,
        palette_size: palette.size(),
        outcome,
        phases_per_run,
        coloring: run.coloring,
        log: run.log,
    }
}

/// Findings of [`check_trace`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub root_calls: usize,
    /// Calls after whose termination an edge that was clean at the call's
    /// start, or the call's own edge, sits on a bad cycle.
    pub progression_violations: Vec<usize>,
    /// Phases whose cycle was not bad, or did not contain the phase's edge,
    /// when the phase began.
    pub selection_violations: Vec<usize>,
    /// The log says the run halted but a bad cycle remains.
    pub unsound_halt: bool,
}

impl TraceCheck {
    pub fn is_clean(&self, edge_count: usize) -> bool {
        self.progression_violations.is_empty()
            && self.selection_violations.is_empty()
            && !self.unsound_halt
            && self.root_calls <= edge_count
    }
}

/// Replays a recorded colorer run from its tape and checks the structural
/// facts every run must satisfy: each call, once it returns, leaves its own
/// edge and every edge that was clean when it started clean; root calls
/// number at most `m`; a halted run has no bad cycle left.
pub fn check_trace(
    g: &Graph,
    index: &CycleIndex,
    tape: &RandomTape,
    log: &PhaseLog,
    rule: ViolationRule,
) -> TraceCheck {
    let m = g.edge_count();
    let clean = |colors: &[Color]| -> Vec<bool> {
        (0..m)
            .map(|e| {
                !index
                    .long_cycles_at(e)
                    .iter()
                    .any(|a| cycle_is_bad(index, a.cycle, colors, rule))
            })
            .collect()
    };

    let mut colors = vec![0; m];
    if let Some(initial) = tape.phases.first() {
        for &(e, c) in initial {
            colors[e] = c;
        }
    }

    let n = log.phases.len();
    // Subtrees are contiguous in call order, so a call ends right after its
    // last descendant.
    let mut last_descendant: Vec<usize> = (0..n).collect();
    for p in (0..n).rev() {
        if let Some(parent) = log.phases[p].parent {
            last_descendant[parent] = last_descendant[parent].max(last_descendant[p]);
        }
    }
    let mut unfinished = vec![false; n];
    if !log.halted && n > 0 {
        let mut p = Some(n - 1);
        while let Some(i) = p {
            unfinished[i] = true;
            p = log.phases[i].parent;
        }
    }
    let mut ending_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        if !unfinished[p] {
            ending_at[last_descendant[p]].push(p);
        }
    }

    let mut report = TraceCheck {
        root_calls: log.root_calls(),
        ..TraceCheck::default()
    };
    let mut clean_at_start: Vec<Option<Vec<bool>>> = vec![None; n];
    for p in 0..n {
        let phase = &log.phases[p];
        let c = index.cycle(phase.cycle);
        if !c.contains(phase.edge) || !cycle_is_bad(index, phase.cycle, &colors, rule) {
            report.selection_violations.push(p);
        }
        if !unfinished[p] {
            clean_at_start[p] = Some(clean(&colors));
        }
        if let Some(draws) = tape.phases.get(p + 1) {
            for &(e, col) in draws {
                colors[e] = col;
            }
        }
        if ending_at[p].is_empty() {
            continue;
        }
        let after = clean(&colors);
        for &q in &ending_at[p] {
            let before = clean_at_start[q].take().expect("start state recorded");
            let own = log.phases[q].edge;
            let broken = !after[own] || (0..m).any(|e| before[e] && !after[e]);
            if broken {
                report.progression_violations.push(q);
            }
        }
    }
    if log.halted && clean(&colors).iter().any(|&ok| !ok) {
        report.unsound_halt = true;
    }
    report
}
