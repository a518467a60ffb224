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

//! Acceptance gate. Runs every criterion at its pinned tolerance and prints
//! one PASS/FAIL line each; exits nonzero if any criterion fails.
//!
//! All randomness is seeded from the constants below.

use std::process::ExitCode;
use std::time::Instant;

use acyclic_core::asymptotics::{rate_estimate, series_coefficients, solve_characteristic};
use acyclic_core::cycles::{build_cycle_index, CycleIndex, IndexOptions};
use acyclic_core::engine::{
    check_trace, main_algorithm, EngineConfig, Outcome, Palette, RunDocument, ViolationRule,
};
use acyclic_core::forest::{check_feasible, enumerate_feasible_forests, Feasibility, TraceForest};
use acyclic_core::graph::{generate, Family, Graph};
use acyclic_core::oracle::{certify_corollary, connected_graphs, exact_chi_a, DEFAULT_NODE_BUDGET};
use acyclic_core::stats::tail_report;
use acyclic_core::validation::{couple_all_prefixes, recorded_edge_color, success_frequency};
use acyclic_core::verify::{two_color_forest_violation, verify_acyclic};
use acyclic_core::Seed;
use rayon::prelude::*;

const SEEDS_PER_GRAPH: u64 = 200;
const CORRECTNESS_SEED: u64 = 0x5eed_0001;

const TAU_TOL: f64 = 1e-10;
const RHO_TOL: f64 = 1e-8;
const RATE_QS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.45];
const RATE_ORDER: usize = 200;
const RATE_TOL: f64 = 1e-3;

const PRODUCT_TRIALS: u64 = 1_000_000;
const PRODUCT_SEED: u64 = 0x5eed_0005;
const PRODUCT_MAX_EXPONENT: u64 = 12;
const PRODUCT_MIN_FORESTS: usize = 5;
const SIGMAS: f64 = 3.0;

const COUPLED_RUNS: u64 = 1_000;
const COUPLING_SEED: u64 = 0x5eed_0006;
const STRESS_PHASE_BUDGET: u64 = 100;

const TRACES_PER_CONFIG: u64 = 1_000;
const TRACE_SEED: u64 = 0x5eed_0007;
const MIN_TRACES: u64 = 1_000;

const TAIL_TRIALS: u64 = 10_000;
const TAIL_SEED: u64 = 0x5eed_0008;
const TAIL_Q: f64 = 0.4;
const TAIL_MIN_R2: f64 = 0.9;

type Criterion<'a> = Box<dyn Fn() -> Verdict + 'a>;

struct Verdict {
    pass: bool,
    detail: String,
}

struct Instance {
    name: String,
    graph: Graph,
    index: CycleIndex,
}

fn suite() -> Vec<Instance> {
    let mut families = vec![
        Family::Cycle(6),
        Family::Cycle(8),
        Family::Complete(4),
        Family::Complete(5),
        Family::Petersen,
        Family::Grid(3, 4),
    ];
    families.extend((1..=5).map(|seed| Family::RandomRegular { n: 10, d: 3, seed }));
    families
        .into_iter()
        .map(|f| {
            let graph = generate(&f).unwrap();
            let index = build_cycle_index(&graph, IndexOptions::default()).unwrap();
            Instance {
                name: f.to_string(),
                graph,
                index,
            }
        })
        .collect()
}

fn delta_palette(g: &Graph) -> Palette {
    Palette::two_delta_minus_one(g).unwrap()
}

/// Two colors: every long cycle is bad far more often than under `2Δ - 1`.
fn stress_palette() -> Palette {
    Palette::explicit(2).unwrap()
}

fn correctness_documents(suite: &[Instance]) -> Vec<(String, Vec<RunDocument>, Vec<bool>)> {
    suite
        .iter()
        .map(|inst| {
            let palette = delta_palette(&inst.graph);
            let config = EngineConfig::for_graph(&inst.graph);
            let runs: Vec<(RunDocument, bool)> = (0..SEEDS_PER_GRAPH)
                .into_par_iter()
                .map(|t| {
                    let r = main_algorithm(
                        &inst.graph,
                        &inst.index,
                        &palette,
                        Seed::new(CORRECTNESS_SEED, t),
                        &config,
                    );
                    let colors = r.coloring.colors();
                    let verified = r.outcome != Outcome::Success
                        || (two_color_forest_violation(&inst.graph, colors).is_none()
                            && verify_acyclic(&inst.graph, &inst.index, colors).is_ok());
                    (r.document(false), verified)
                })
                .collect();
            let (docs, verified) = runs.into_iter().unzip();
            (inst.name.clone(), docs, verified)
        })
        .collect()
}

fn correctness_json(suite: &[Instance]) -> String {
    let docs: Vec<(String, Vec<RunDocument>)> = correctness_documents(suite)
        .into_iter()
        .map(|(n, d, _)| (n, d))
        .collect();
    serde_json::to_string(&docs).unwrap()
}

fn c1_correctness(suite: &[Instance]) -> Verdict {
    let results = correctness_documents(suite);
    let mut runs = 0;
    let mut successes = 0;
    let mut failures = Vec::new();
    for (name, docs, verified) in &results {
        for (doc, ok) in docs.iter().zip(verified) {
            runs += 1;
            if doc.outcome == Outcome::Success {
                successes += 1;
            }
            if !ok {
                failures.push(format!("{} seed {}", name, doc.trial));
            }
        }
    }
    Verdict {
        pass: failures.is_empty() && successes > 0,
        detail: format!(
            "{} runs, {} successes, {} verification failures{}",
            runs,
            successes,
            failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(": {:?}", &failures[..failures.len().min(5)])
            }
        ),
    }
}

fn c2_oracle(suite: &[Instance]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for inst in suite {
        let g = &inst.graph;
        let k = delta_palette(g).size();
        match exact_chi_a(g, &inst.index, k, DEFAULT_NODE_BUDGET) {
            Ok(r) => {
                let ok = r.chi_a <= k && r.chi_a as usize >= g.max_degree();
                pass &= ok;
                parts.push(format!("{}={}", inst.name, r.chi_a));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {}", inst.name, e));
            }
        }
    }
    let mut swept = 0;
    for n in 1..=6 {
        for g in connected_graphs(n) {
            let idx = build_cycle_index(&g, IndexOptions::default()).unwrap();
            swept += 1;
            if certify_corollary(&g, &idx, DEFAULT_NODE_BUDGET) != Ok(true) {
                pass = false;
                parts.push(format!("counterexample {:?}", g.edges()));
            }
        }
    }
    Verdict {
        pass,
        detail: format!(
            "chi_a [{}]; {} connected graphs on <= 6 vertices certified",
            parts.join(", "),
            swept
        ),
    }
}

fn c3_golden() -> Verdict {
    let s = solve_characteristic(0.5, 1e-12).unwrap();
    let dt = (s.tau - (5f64.sqrt() - 2.0)).abs();
    let dr = (s.rho - 1.0).abs();
    Verdict {
        pass: dt < TAU_TOL && dr < RHO_TOL,
        detail: format!("|tau - (sqrt5 - 2)| = {:.2e}, |rho - 1| = {:.2e}", dt, dr),
    }
}

fn c4_rate() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for q in RATE_QS {
        let est = rate_estimate(&series_coefficients(q, RATE_ORDER).unwrap()).unwrap();
        let rho = solve_characteristic(q, 1e-12).unwrap().rho;
        let err = (est.rate - 1.0 / rho).abs();
        pass &= err < RATE_TOL;
        parts.push(format!("q={}: {:.2e}", q, err));
    }
    Verdict {
        pass,
        detail: format!("|rate - 1/rho| [{}]", parts.join(", ")),
    }
}

/// The first forest of each size up to `max_nodes`, plus the first one
/// using a cycle longer than six, among those of small enough weight.
fn product_forests(g: &Graph, idx: &CycleIndex, max_nodes: usize) -> Vec<TraceForest> {
    let all = enumerate_feasible_forests(g, idx, max_nodes, 5_000_000).unwrap();
    let light: Vec<&TraceForest> = all
        .iter()
        .filter(|f| f.weight_exponent(idx) <= PRODUCT_MAX_EXPONENT)
        .collect();
    let mut picked: Vec<TraceForest> = Vec::new();
    for size in 1..=max_nodes {
        if let Some(f) = light.iter().find(|f| f.len() == size) {
            picked.push((*f).clone());
        }
    }
    let long = light
        .iter()
        .find(|f| f.nodes().iter().any(|n| idx.cycle(n.label.cycle).len() > 6));
    if let Some(f) = long {
        if !picked.contains(f) {
            picked.push((*f).clone());
        }
    }
    picked
}

fn c5_product_law() -> Verdict {
    let cases = [
        (Family::Cycle(6), 3),
        (Family::Cycle(8), 1),
        (Family::Petersen, 2),
    ];
    let mut forests = 0;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (family, max_nodes) in cases {
        let g = generate(&family).unwrap();
        let idx = build_cycle_index(&g, IndexOptions::default()).unwrap();
        for (i, forest) in product_forests(&g, &idx, max_nodes).iter().enumerate() {
            assert_eq!(check_feasible(forest, &g, &idx), Ok(Feasibility::Feasible));
            forests += 1;
            for k in [2, delta_palette(&g).size()] {
                let palette = Palette::explicit(k).unwrap();
                let seed = PRODUCT_SEED ^ ((forests as u64) << 8) ^ k as u64;
                let r = success_frequency(forest, &g, &idx, &palette, PRODUCT_TRIALS, seed);
                worst = worst.max(r.z.abs());
                pass &= r.z.abs() <= SIGMAS;
                parts.push(format!(
                    "{}#{} K={} {}/{} vs {:.3e}",
                    family, i, k, r.successes, r.trials, r.expected
                ));
            }
        }
    }
    pass &= forests >= PRODUCT_MIN_FORESTS;
    Verdict {
        pass,
        detail: format!(
            "{} forests, max |z| = {:.2}; {}",
            forests,
            worst,
            parts.join("; ")
        ),
    }
}

fn c6_coupling(suite: &[Instance]) -> Verdict {
    let mut runs = 0u64;
    let mut prefixes = 0u64;
    let mut failures = Vec::new();
    for inst in suite {
        let g = &inst.graph;
        let configs = [
            (delta_palette(g), EngineConfig::for_graph(g).phase_budget),
            (stress_palette(), STRESS_PHASE_BUDGET),
        ];
        for (palette, budget) in configs {
            let outcomes: Vec<Result<usize, String>> = (0..COUPLED_RUNS)
                .into_par_iter()
                .map(|t| {
                    let rec = recorded_edge_color(
                        g,
                        &inst.index,
                        &palette,
                        Seed::new(COUPLING_SEED, t),
                        budget,
                    );
                    couple_all_prefixes(g, &inst.index, &palette, &rec).map_err(|e| {
                        format!("{} K={} trial {}: {}", inst.name, palette.size(), t, e)
                    })
                })
                .collect();
            for o in outcomes {
                runs += 1;
                match o {
                    Ok(n) => prefixes += n as u64,
                    Err(e) => failures.push(e),
                }
            }
        }
    }
    Verdict {
        pass: failures.is_empty(),
        detail: format!(
            "{} coupled runs, {} prefixes replayed, {} failures{}",
            runs,
            prefixes,
            failures.len(),
            failures
                .first()
                .map(|f| format!(": {}", f))
                .unwrap_or_default()
        ),
    }
}

fn c7_traces(suite: &[Instance]) -> Verdict {
    let mut traces = 0u64;
    let mut phases = 0u64;
    let mut progression = 0usize;
    let mut selection = 0usize;
    let mut unsound = 0usize;
    let mut too_many_roots = 0usize;
    let mut max_roots = 0usize;
    for inst in suite {
        let g = &inst.graph;
        let configs = [
            (delta_palette(g), EngineConfig::for_graph(g).phase_budget),
            (stress_palette(), STRESS_PHASE_BUDGET),
        ];
        for (palette, budget) in configs {
            for t in 0..TRACES_PER_CONFIG {
                let rec =
                    recorded_edge_color(g, &inst.index, &palette, Seed::new(TRACE_SEED, t), budget);
                let check = check_trace(
                    g,
                    &inst.index,
                    &rec.tape,
                    &rec.run.log,
                    ViolationRule::BothClasses,
                );
                traces += 1;
                phases += rec.run.log.recolor_phases();
                progression += check.progression_violations.len();
                selection += check.selection_violations.len();
                unsound += check.unsound_halt as usize;
                max_roots = max_roots.max(check.root_calls);
                if check.root_calls > g.edge_count() {
                    too_many_roots += 1;
                }
            }
        }
    }
    Verdict {
        pass: traces >= MIN_TRACES
            && progression == 0
            && selection == 0
            && unsound == 0
            && too_many_roots == 0,
        detail: format!(
            "{} traces, {} recoloring phases; progression violations {}, selection violations {}, \
             unsound halts {}, traces over m roots {} (max roots {})",
            traces, phases, progression, selection, unsound, too_many_roots, max_roots
        ),
    }
}

fn tail_json() -> (String, acyclic_core::stats::TailReport) {
    let g = generate(&Family::Petersen).unwrap();
    let idx = build_cycle_index(&g, IndexOptions::default()).unwrap();
    let palette = delta_palette(&g);
    let report = tail_report(
        &g,
        &idx,
        &palette,
        TAIL_SEED,
        TAIL_TRIALS,
        &EngineConfig::for_graph(&g),
    );
    (serde_json::to_string(&report).unwrap(), report)
}

fn c8_tail() -> Verdict {
    let (_, r) = tail_json();
    let (slope, r2) = r
        .fit
        .map_or((f64::NAN, f64::NAN), |f| (f.slope, f.r_squared));
    let q_ok = r.q.is_some_and(|q| (q - TAIL_Q).abs() < 1e-15);
    let curve: Vec<String> = r
        .survival
        .iter()
        .map(|p| format!("{}:{}", p.n, p.count))
        .collect();
    Verdict {
        pass: q_ok
            && !r.degenerate
            && r.dominated
            && slope < 0.0
            && r2 > TAIL_MIN_R2
            && r.unhalted == 0,
        detail: format!(
            "K={} rho={:.6} survival [{}], slope {:.3}, R^2 {:.4}, dominated {}",
            r.palette_size,
            r.rho.unwrap_or(f64::NAN),
            curve.join(" "),
            slope,
            r2,
            r.dominated
        ),
    }
}

fn c9_determinism(suite: &[Instance]) -> Verdict {
    let a = correctness_json(suite);
    let b = correctness_json(suite);
    let (ta, _) = tail_json();
    let (tb, _) = tail_json();
    Verdict {
        pass: a == b && ta == tb,
        detail: format!(
            "correctness JSON {} bytes identical: {}; tail JSON {} bytes identical: {}",
            a.len(),
            a == b,
            ta.len(),
            ta == tb
        ),
    }
}

fn main() -> ExitCode {
    let suite = suite();
    let criteria: Vec<(&str, Criterion)> = vec![
        (
            "1 correctness of output",
            Box::new(|| c1_correctness(&suite)),
        ),
        ("2 oracle domination", Box::new(|| c2_oracle(&suite))),
        ("3 tau and rho at q = 1/2", Box::new(c3_golden)),
        ("4 rate consistency", Box::new(c4_rate)),
        ("5 product law", Box::new(c5_product_law)),
        ("6 coupling", Box::new(|| c6_coupling(&suite))),
        ("7 trace invariants", Box::new(|| c7_traces(&suite))),
        ("8 tail behavior", Box::new(c8_tail)),
        ("9 determinism", Box::new(|| c9_determinism(&suite))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += !v.pass as usize;
        println!(
            "[{}] criterion {} ({:.1}s): {}",
            tag,
            name,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
