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

//! The validation algorithm run against a fixed feasible forest, its
//! coupling with the colorer, and Monte Carlo checks of its success law.
//!
//! Validation colors every edge once, then walks the forest's label
//! sequence. At each label `(e, C)` it checks that both parity classes of
//! `C` read from `e` are monochromatic, and in either case redraws
//! `e_1 .. e_{2k-2}`; a failed check ends the run with failure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::cycles::CycleIndex;
use crate::engine::{
    edge_color, is_bad_cycle, EdgeColorRun, EdgeColoring, Palette, PhaseLog, ViolationRule,
};
use crate::forest::{forest_from_log, forest_weight, TraceForest};
use crate::graph::Graph;
use crate::rng::{
    Color, ColorSource, RandomTape, Seed, TapeMismatch, TapeRecorder, TapeReplay, TrialRng,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("coupled validation failed at phase {phase} of a {prefix}-phase prefix")]
    CouplingViolation { phase: usize, prefix: usize },
    #[error("tape replay diverged: {0:?}")]
    TapeMismatch(TapeMismatch),
    #[error("coupled validation ended on a coloring different from the colorer's")]
    StateMismatch,
    #[error("prefix length must be at least 1")]
    EmptyPrefix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ColorValStatus {
    Success,
    /// The check failed at this (1-based) phase.
    Failure {
        phase: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorValOutcome {
    pub status: ColorValStatus,
    pub phases_executed: usize,
    pub coloring: EdgeColoring,
    /// Colors drawn, initial coloring included.
    pub draws: usize,
}

impl ColorValOutcome {
    pub fn is_success(&self) -> bool {
        self.status == ColorValStatus::Success
    }
}

pub fn color_val<S: ColorSource>(
    forest: &TraceForest,
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    source: &mut S,
) -> ColorValOutcome {
    let k = palette.size();
    source.begin_phase();
    let mut colors: Vec<Color> = (0..g.edge_count()).map(|e| source.draw(e, k)).collect();
    let mut draws = colors.len();
    let mut status = ColorValStatus::Success;
    let mut phases_executed = 0;
    for (i, label) in forest.label_sequence().into_iter().enumerate() {
        let view = index
            .view(label.cycle, label.edge)
            .expect("forest labels must lie on their cycles");
        let monochromatic = is_bad_cycle(&view, &colors);
        source.begin_phase();
        for &e in view.recolored() {
            colors[e] = source.draw(e, k);
            draws += 1;
        }
        phases_executed += 1;
        if !monochromatic {
            status = ColorValStatus::Failure { phase: i + 1 };
            break;
        }
    }
    ColorValOutcome {
        status,
        phases_executed,
        coloring: EdgeColoring::new(colors),
        draws,
    }
}

/// Colorer run whose draws were recorded.
#[derive(Clone, Debug)]
pub struct RecordedRun {
    pub run: EdgeColorRun,
    pub tape: RandomTape,
}

pub fn recorded_edge_color(
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    seed: Seed,
    phase_budget: u64,
) -> RecordedRun {
    let mut rec = TapeRecorder::new(TrialRng::new(seed));
    let run = edge_color(
        g,
        index,
        palette,
        &mut rec,
        phase_budget,
        ViolationRule::BothClasses,
    );
    RecordedRun {
        run,
        tape: rec.into_tape(),
    }
}

/// Replays the colorer's draws through validation of the forest made of
/// its first `prefix` phases. Validation must succeed.
pub fn replay_prefix(
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    log: &PhaseLog,
    tape: &RandomTape,
    prefix: usize,
) -> Result<(TraceForest, ColorValOutcome), ValidationError> {
    let forest = forest_from_log(log, Some(prefix));
    let mut replay = TapeReplay::new(tape);
    let outcome = color_val(&forest, g, index, palette, &mut replay);
    if let Some(m) = replay.mismatch() {
        return Err(ValidationError::TapeMismatch(m.clone()));
    }
    if let ColorValStatus::Failure { phase } = outcome.status {
        return Err(ValidationError::CouplingViolation { phase, prefix });
    }
    Ok((forest, outcome))
}

#[derive(Clone, Debug)]
pub struct CoupledRun {
    pub recorded: RecordedRun,
    pub forest: TraceForest,
    pub outcome: ColorValOutcome,
}

/// Runs the colorer, takes the forest of its first `n` phases (or all of
/// them if it halts sooner) and replays the same draws through validation.
pub fn couple_run(
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    seed: Seed,
    n: usize,
    phase_budget: u64,
) -> Result<CoupledRun, ValidationError> {
    if n == 0 {
        return Err(ValidationError::EmptyPrefix);
    }
    let recorded = recorded_edge_color(g, index, palette, seed, phase_budget);
    let (forest, outcome) = replay_prefix(g, index, palette, &recorded.run.log, &recorded.tape, n)?;
    if forest.len() == recorded.run.log.phases.len() && outcome.coloring != recorded.run.coloring {
        return Err(ValidationError::StateMismatch);
    }
    Ok(CoupledRun {
        recorded,
        forest,
        outcome,
    })
}

/// Checks every prefix length `1..=phases` of one recorded run.
pub fn couple_all_prefixes(
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    recorded: &RecordedRun,
) -> Result<usize, ValidationError> {
    let phases = recorded.run.log.phases.len();
    for n in 1..=phases {
        let (forest, outcome) =
            replay_prefix(g, index, palette, &recorded.run.log, &recorded.tape, n)?;
        if n == phases && outcome.coloring != recorded.run.coloring {
            return Err(ValidationError::StateMismatch);
        }
        debug_assert_eq!(forest.len(), n);
    }
    Ok(phases)
}

/// Success count of validation of a forest against its weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductLawReport {
    pub trials: u64,
    pub successes: u64,
    pub observed: f64,
    pub expected: f64,
    /// Binomial standard deviation of the observed frequency.
    pub sigma: f64,
    pub z: f64,
    pub within_three_sigma: bool,
}

const CHUNK: u64 = 4096;

/// Runs validation of `forest` on fresh randomness `trials` times; trial
/// `i` uses stream `(seed, i)`.
pub fn success_frequency(
    forest: &TraceForest,
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    trials: u64,
    seed: u64,
) -> ProductLawReport {
    let successes: u64 = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            (start..(start + CHUNK).min(trials))
                .filter(|&t| {
                    let mut rng = TrialRng::new(Seed::new(seed, t));
                    color_val(forest, g, index, palette, &mut rng).is_success()
                })
                .count() as u64
        })
        .sum();
    let expected = forest_weight(forest, index, palette.size()).to_f64();
    let observed = successes as f64 / trials as f64;
    let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
    let z = if sigma > 0.0 {
        (observed - expected) / sigma
    } else if observed == expected {
        0.0
    } else {
        f64::INFINITY
    };
    ProductLawReport {
        trials,
        successes,
        observed,
        expected,
        sigma,
        z,
        within_three_sigma: z.abs() <= 3.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeUniformity {
    pub edge: usize,
    pub counts: Vec<u64>,
    pub chi_square: f64,
    pub p_value: f64,
    pub uniform: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub trials: u64,
    pub successes: u64,
    /// Per-edge significance after Bonferroni correction.
    pub alpha_per_edge: f64,
    pub edges: Vec<EdgeUniformity>,
    /// False when too few successes to test (fewer than 5 expected per cell).
    pub conclusive: bool,
    pub uniform: bool,
}

pub const DISTRIBUTION_ALPHA: f64 = 0.01;

/// Among validation runs of `forest` that succeed, tests that each edge's
/// final color is uniform over the palette (chi-square, Bonferroni across
/// edges at overall level 0.01).
pub fn check_distribution_lemma(
    forest: &TraceForest,
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    trials: u64,
    seed: u64,
) -> DistributionReport {
    let k = palette.size() as usize;
    let m = g.edge_count();
    let merge = |mut a: (u64, Vec<u64>), b: (u64, Vec<u64>)| {
        a.0 += b.0;
        a.1.iter_mut().zip(b.1).for_each(|(x, y)| *x += y);
        a
    };
    let (successes, flat) = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let mut acc = (0u64, vec![0u64; m * k]);
            for t in start..(start + CHUNK).min(trials) {
                let mut rng = TrialRng::new(Seed::new(seed, t));
                let out = color_val(forest, g, index, palette, &mut rng);
                if out.is_success() {
                    acc.0 += 1;
                    for (e, &c) in out.coloring.colors().iter().enumerate() {
                        acc.1[e * k + (c as usize - 1)] += 1;
                    }
                }
            }
            acc
        })
        .reduce(|| (0, vec![0u64; m * k]), merge);

    let alpha_per_edge = DISTRIBUTION_ALPHA / m.max(1) as f64;
    let conclusive = k >= 2 && successes as f64 / k as f64 >= 5.0;
    let dist = ChiSquared::new((k.max(2) - 1) as f64).expect("positive degrees of freedom");
    let edges: Vec<EdgeUniformity> = (0..m)
        .map(|e| {
            let counts = flat[e * k..(e + 1) * k].to_vec();
            let expected = successes as f64 / k as f64;
            let chi_square = if expected > 0.0 {
                counts
                    .iter()
                    .map(|&c| (c as f64 - expected).powi(2) / expected)
                    .sum()
            } else {
                0.0
            };
            let p_value = 1.0 - dist.cdf(chi_square);
            EdgeUniformity {
                edge: e,
                counts,
                chi_square,
                p_value,
                uniform: p_value >= alpha_per_edge,
            }
        })
        .collect();
    let uniform = conclusive && edges.iter().all(|e| e.uniform);
    DistributionReport {
        trials,
        successes,
        alpha_per_edge,
        edges,
        conclusive,
        uniform,
    }
}
