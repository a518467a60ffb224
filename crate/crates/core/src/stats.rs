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

//! Empirical running-time tails of the colorer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{solve_characteristic, tail_bound, QValue};
use crate::cycles::CycleIndex;
use crate::engine::{edge_color, EngineConfig, Palette};
use crate::graph::Graph;
use crate::rng::{Seed, TrialRng};

/// Recoloring phases of one colorer run per trial; trial `t` uses
/// `Seed::new(seed, t)`. Runs that hit the phase budget report the budget.
pub fn recolor_counts(
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    seed: u64,
    trials: u64,
    config: &EngineConfig,
) -> Vec<RunCount> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = TrialRng::new(Seed::new(seed, t));
            let run = edge_color(
                g,
                index,
                palette,
                &mut rng,
                config.phase_budget,
                config.rule,
            );
            RunCount {
                recolors: run.log.recolor_phases(),
                halted: run.log.halted,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCount {
    pub recolors: u64,
    pub halted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub n: u64,
    /// Runs with at least `n` recoloring phases.
    pub count: u64,
    pub survival: f64,
    /// `n^m ρ^{-n}`; absent for `n = 0` or without a usable `ρ`.
    pub bound: Option<f64>,
}

/// `survival[n]` is the fraction of runs with at least `n` recolorings, for
/// `n = 0 ..= max`.
pub fn survival_function(counts: &[u64]) -> Vec<(u64, u64)> {
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut hist = vec![0u64; max as usize + 2];
    for &c in counts {
        hist[c as usize] += 1;
    }
    let mut out = Vec::with_capacity(max as usize + 1);
    let mut at_least = counts.len() as u64;
    for n in 0..=max {
        out.push((n, at_least));
        at_least -= hist[n as usize];
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares for `ln y = intercept + slope·x`; needs two distinct `x`.
pub fn log_linear_fit(points: &[(f64, f64)]) -> Option<LogLinearFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(x, y)| (x, y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LogLinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: pts.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub edges: usize,
    pub max_degree: usize,
    #[serde(rename = "K")]
    pub palette_size: u32,
    pub seed: u64,
    pub trials: u64,
    /// Runs stopped by the phase budget.
    pub unhalted: u64,
    pub q: Option<f64>,
    pub rho: Option<f64>,
    /// `ρ ≤ 1` or unavailable: the bound says nothing.
    pub bound_vacuous: bool,
    pub survival: Vec<SurvivalPoint>,
    /// Fit of `ln P(recolors ≥ n)` against `n` over every `n` with a
    /// nonzero frequency, `n = 0` included.
    pub fit: Option<LogLinearFit>,
    /// Every run finished without recoloring.
    pub degenerate: bool,
    /// The bound is at least the empirical survival at every `n ≥ 1`.
    pub dominated: bool,
    pub mean_recolors: f64,
    pub max_recolors: u64,
}

/// Runs `trials` seeded colorer runs and summarizes their recoloring counts
/// against `n^m ρ^{-n}` with `ρ` solved at `q = (Δ-1)/K`.
pub fn tail_report(
    g: &Graph,
    index: &CycleIndex,
    palette: &Palette,
    seed: u64,
    trials: u64,
    config: &EngineConfig,
) -> TailReport {
    let runs = recolor_counts(g, index, palette, seed, trials, config);
    let counts: Vec<u64> = runs.iter().map(|r| r.recolors).collect();
    let m = g.edge_count();
    let delta = g.max_degree();
    let q = QValue::from_palette(delta, palette.size())
        .ok()
        .map(|v| v.q);
    let rho = q
        .and_then(|q| solve_characteristic(q, 1e-12).ok())
        .map(|s| s.rho);
    let total = trials.max(1) as f64;
    let survival: Vec<SurvivalPoint> = survival_function(&counts)
        .into_iter()
        .map(|(n, count)| SurvivalPoint {
            n,
            count,
            survival: count as f64 / total,
            bound: match rho {
                Some(r) if n >= 1 => tail_bound(m, r, n).ok().map(|b| b.value),
                _ => None,
            },
        })
        .collect();
    let degenerate = counts.iter().all(|&c| c == 0);
    let fit = if degenerate {
        None
    } else {
        let pts: Vec<(f64, f64)> = survival.iter().map(|p| (p.n as f64, p.survival)).collect();
        log_linear_fit(&pts)
    };
    let dominated = survival
        .iter()
        .filter(|p| p.n >= 1)
        .all(|p| p.bound.is_some_and(|b| b >= p.survival));
    TailReport {
        edges: m,
        max_degree: delta,
        palette_size: palette.size(),
        seed,
        trials,
        unhalted: runs.iter().filter(|r| !r.halted).count() as u64,
        q,
        rho,
        bound_vacuous: rho.is_none_or(|r| r <= 1.0),
        survival,
        fit,
        degenerate,
        dominated,
        mean_recolors: counts.iter().sum::<u64>() as f64 / total,
        max_recolors: counts.iter().copied().max().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{build_cycle_index, IndexOptions};
    use crate::graph::{generate, Family};

    #[test]
    fn survival_counts() {
        let s = survival_function(&[0, 0, 1, 3, 1]);
        assert_eq!(s, vec![(0, 5), (1, 3), (2, 1), (3, 1)]);
        assert_eq!(survival_function(&[]), vec![(0, 0)]);
    }

    #[test]
    fn exact_exponential_fit() {
        let pts: Vec<(f64, f64)> = (0..6).map(|n| (n as f64, 0.5f64.powi(n))).collect();
        let fit = log_linear_fit(&pts).unwrap();
        assert!((fit.slope - 0.5f64.ln()).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(log_linear_fit(&[(1.0, 0.5)]).is_none());
    }

    #[test]
    fn forest_graph_is_degenerate() {
        let g = generate(&Family::Grid(1, 5)).unwrap();
        let idx = build_cycle_index(&g, IndexOptions::default()).unwrap();
        let p = Palette::two_delta_minus_one(&g).unwrap();
        let r = tail_report(&g, &idx, &p, 3, 100, &EngineConfig::for_graph(&g));
        assert!(r.degenerate);
        assert!(r.fit.is_none());
        assert_eq!(r.max_recolors, 0);
        assert_eq!(r.unhalted, 0);
    }

    #[test]
    fn hexagon_tail_decays() {
        let g = generate(&Family::Cycle(6)).unwrap();
        let idx = build_cycle_index(&g, IndexOptions::default()).unwrap();
        let p = Palette::explicit(2).unwrap();
        let r = tail_report(&g, &idx, &p, 11, 20_000, &EngineConfig::for_graph(&g));
        // Each draw of the four recolored edges leaves the hexagon bad with
        // probability 1/16, as does the initial coloring.
        let fit = r.fit.unwrap();
        assert!((fit.slope - (1.0f64 / 16.0).ln()).abs() < 0.3, "{:?}", fit);
        assert_eq!(r.unhalted, 0);
    }

    #[test]
    fn report_is_reproducible() {
        let g = generate(&Family::Petersen).unwrap();
        let idx = build_cycle_index(&g, IndexOptions::default()).unwrap();
        let p = Palette::two_delta_minus_one(&g).unwrap();
        let cfg = EngineConfig::for_graph(&g);
        let a = tail_report(&g, &idx, &p, 5, 500, &cfg);
        let b = tail_report(&g, &idx, &p, 5, 500, &cfg);
        assert_eq!(a, b);
    }
}
