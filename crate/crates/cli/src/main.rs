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

//! `acyclic`: color graphs, verify colorings, run the exact oracle, sample
//! running-time tails and tabulate the growth-rate constants.
//!
//! Exit status: 0 success, 1 usage or input error, 2 budget exhausted,
//! 3 verification failed.

mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use acyclic_core::asymptotics::{asymptotics_row, AsymptoticsRow, QValue, MAX_SERIES_ORDER};
use acyclic_core::cycles::{build_cycle_index, CycleIndex, IndexOptions, DEFAULT_CYCLE_LIMIT};
use acyclic_core::engine::{
    main_algorithm, EngineConfig, Outcome, Palette, PaletteDerivation, RunDocument, ViolationRule,
    DEFAULT_PHASES_PER_EDGE,
};
use acyclic_core::forest::{
    check_feasible, forest_from_log, forest_weight, Feasibility, ForestDocument,
};
use acyclic_core::graph::Graph;
use acyclic_core::oracle::{exact_chi_a, OracleError};
use acyclic_core::stats::{tail_report, TailReport};
use acyclic_core::validation::{recorded_edge_color, success_frequency, ProductLawReport};
use acyclic_core::verify::{verify_acyclic, AcyclicVerdict};
use acyclic_core::Seed;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_INPUT: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "acyclic", version, about = "Randomized acyclic edge coloring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Color a graph with the retrying resampling colorer.
    Color(ColorArgs),
    /// Check that a coloring file is proper and acyclic.
    Verify(VerifyArgs),
    /// Exact acyclic chromatic index by exhaustive search.
    Oracle(OracleArgs),
    /// Survival function of recoloring counts over many seeded runs.
    Stats(StatsArgs),
    /// Growth-rate constants for a grid of q values.
    Asymptotics(AsymptoticsArgs),
    /// Dump or validate trace forests.
    #[command(subcommand)]
    Forests(ForestsCommand),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file: one "u v" pair per line, '#' starts a comment.
    input: Option<PathBuf>,
    /// Generated graph: complete:N, cycle:N, grid:RxC, regular:N,D,SEED or
    /// petersen.
    #[arg(long = "gen", value_name = "SPEC")]
    generator: Option<String>,
    /// Fail instead of enumerating more than this many simple cycles.
    #[arg(long, default_value_t = DEFAULT_CYCLE_LIMIT)]
    cycle_limit: usize,
}

impl GraphArgs {
    fn load(&self) -> Result<(Graph, CycleIndex)> {
        let g = input::read_graph(self.input.as_deref(), self.generator.as_deref())?;
        let index = build_cycle_index(
            &g,
            IndexOptions {
                max_len: None,
                cycle_limit: self.cycle_limit,
            },
        )?;
        Ok((g, index))
    }
}

#[derive(Args)]
#[group(multiple = false)]
struct PaletteArgs {
    /// Number of colors.
    #[arg(long)]
    colors: Option<u32>,
    /// ⌈(2 + ε)(Δ - 1)⌉ colors.
    #[arg(long)]
    epsilon: Option<f64>,
}

impl PaletteArgs {
    /// `2Δ - 1` unless overridden.
    fn palette(&self, g: &Graph) -> Result<Palette> {
        Ok(match (self.colors, self.epsilon) {
            (Some(k), _) => Palette::explicit(k)?,
            (None, Some(eps)) => Palette::epsilon(g, eps)?,
            (None, None) => Palette::two_delta_minus_one(g)?,
        })
    }
}

#[derive(Args)]
struct BudgetArgs {
    /// Recoloring phases per colorer run [default: 10⁴·m].
    #[arg(long, env = "ACYCLIC_PHASE_BUDGET")]
    phase_budget: Option<u64>,
    /// Colorer runs before giving up.
    #[arg(long, env = "ACYCLIC_RETRY_BUDGET", default_value_t = acyclic_core::engine::DEFAULT_RETRY_BUDGET)]
    retry_budget: u64,
}

impl BudgetArgs {
    fn config(&self, g: &Graph) -> Result<EngineConfig> {
        let phase_budget = self
            .phase_budget
            .unwrap_or((DEFAULT_PHASES_PER_EDGE * g.edge_count() as u64).max(1));
        if phase_budget == 0 || self.retry_budget == 0 {
            bail!("budgets must be at least 1");
        }
        Ok(EngineConfig {
            phase_budget,
            retry_budget: self.retry_budget,
            rule: ViolationRule::BothClasses,
        })
    }
}

/// The given seed, or a fresh one announced on stderr.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {}", s);
        s
    })
}

#[derive(Args)]
struct ColorArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    palette: PaletteArgs,
    #[command(flatten)]
    budgets: BudgetArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Stream index under the master seed.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Also write the coloring file here.
    #[arg(long, value_name = "FILE")]
    coloring_out: Option<PathBuf>,
    /// Include the phase log of the last colorer run.
    #[arg(long)]
    log: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Serialize)]
struct GraphSummary {
    vertices: usize,
    edges: usize,
    max_degree: usize,
    even_cycles: usize,
}

impl GraphSummary {
    fn of(g: &Graph, index: &CycleIndex) -> Self {
        GraphSummary {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            max_degree: g.max_degree(),
            even_cycles: index.len(),
        }
    }
}

#[derive(Serialize)]
struct ColorReport {
    graph: GraphSummary,
    palette: PaletteDerivation,
    #[serde(flatten)]
    run: RunDocument,
    verdict: AcyclicVerdict,
}

fn cmd_color(args: &ColorArgs) -> Result<u8> {
    let (g, index) = args.graph.load()?;
    let palette = args.palette.palette(&g)?;
    let config = args.budgets.config(&g)?;
    let seed = Seed::new(resolve_seed(args.seed), args.trial);
    let result = main_algorithm(&g, &index, &palette, seed, &config);
    let verdict = verify_acyclic(&g, &index, result.coloring.colors());
    if let Some(path) = &args.coloring_out {
        fs::write(
            path,
            input::write_coloring(palette.size(), result.coloring.colors()),
        )
        .with_context(|| format!("writing {}", path.display()))?;
    }
    let report = ColorReport {
        graph: GraphSummary::of(&g, &index),
        palette: palette.derivation(),
        run: result.document(args.log),
        verdict,
    };
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            println!("edge,u,v,color");
            for (e, &(u, v)) in g.edges().iter().enumerate() {
                println!(
                    "{},{},{},{}",
                    e,
                    g.label(u),
                    g.label(v),
                    report.run.coloring[e]
                );
            }
        }
        Format::Human => {
            let s = &report.graph;
            println!(
                "graph: {} vertices, {} edges, max degree {}",
                s.vertices, s.edges, s.max_degree
            );
            println!(
                "palette: K = {} ({:?})",
                report.run.palette_size, report.palette
            );
            println!("seed: {} (trial {})", report.run.seed, report.run.trial);
            println!(
                "outcome: {:?} after {} colorer runs, {} phases in the last",
                result.outcome,
                report.run.edge_color_runs,
                report.run.phases_per_run.last().copied().unwrap_or(0)
            );
            println!("verdict: {}", describe_verdict(&g, &report.verdict));
        }
    }
    Ok(match result.outcome {
        Outcome::Success if report.verdict.is_ok() => 0,
        Outcome::Success => EXIT_VERIFY,
        Outcome::PhaseBudgetExhausted | Outcome::RetryBudgetExhausted => EXIT_BUDGET,
    })
}

fn describe_edges(g: &Graph, edges: &[usize]) -> String {
    edges
        .iter()
        .map(|&e| {
            let (u, v) = g.endpoints(e);
            format!("{}-{}", g.label(u), g.label(v))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn describe_verdict(g: &Graph, v: &AcyclicVerdict) -> String {
    match v {
        AcyclicVerdict::Acyclic => "proper and acyclic".to_string(),
        AcyclicVerdict::AcyclicUpTo { max_len } => {
            format!("proper, no bichromatic cycle up to length {}", max_len)
        }
        AcyclicVerdict::Improper { edges } => {
            format!(
                "improper: {} share a color",
                describe_edges(g, &[edges.0, edges.1])
            )
        }
        AcyclicVerdict::Bichromatic { edges, .. } => {
            format!("bichromatic cycle: {}", describe_edges(g, edges))
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Coloring file: header "K m", then one color per line.
    coloring: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Serialize)]
struct VerifyReport {
    #[serde(rename = "K")]
    palette_size: u32,
    edges: usize,
    verdict: AcyclicVerdict,
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let (g, index) = args.graph.load()?;
    let text = fs::read_to_string(&args.coloring)
        .with_context(|| format!("reading {}", args.coloring.display()))?;
    let (k, colors) = input::parse_coloring(&text, g.edge_count())?;
    let verdict = verify_acyclic(&g, &index, &colors);
    let ok = verdict.is_ok();
    match args.format {
        Format::Human => println!("{}", describe_verdict(&g, &verdict)),
        Format::Json | Format::Csv => {
            let report = VerifyReport {
                palette_size: k,
                edges: g.edge_count(),
                verdict,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(if ok { 0 } else { EXIT_VERIFY })
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Largest palette to probe [default: 2Δ - 1].
    #[arg(long)]
    k_max: Option<u32>,
    /// Backtracking nodes before giving up.
    #[arg(long, env = "ACYCLIC_NODE_BUDGET", default_value_t = acyclic_core::oracle::DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Serialize)]
struct OracleReport {
    graph: GraphSummary,
    k_max: u32,
    chi_a: Option<u32>,
    /// Established when the search ran out of palette sizes.
    lower_bound: Option<u32>,
    witness: Option<Vec<u32>>,
    nodes: Option<u64>,
}

fn cmd_oracle(args: &OracleArgs) -> Result<u8> {
    let (g, index) = args.graph.load()?;
    let k_max = args
        .k_max
        .unwrap_or((2 * g.max_degree()).saturating_sub(1) as u32);
    let summary = GraphSummary::of(&g, &index);
    let report = match exact_chi_a(&g, &index, k_max, args.node_budget) {
        Ok(r) => OracleReport {
            graph: summary,
            k_max,
            chi_a: Some(r.chi_a),
            lower_bound: None,
            witness: Some(r.witness),
            nodes: Some(r.colorings_examined),
        },
        Err(OracleError::KMaxInsufficient { lower_bound, .. }) => OracleReport {
            graph: summary,
            k_max,
            chi_a: None,
            lower_bound: Some(lower_bound),
            witness: None,
            nodes: None,
        },
        Err(e @ OracleError::BudgetExceeded { .. }) => {
            eprintln!("error: {}", e);
            return Ok(EXIT_BUDGET);
        }
        Err(e) => return Err(e.into()),
    };
    match args.format {
        Format::Human => match (report.chi_a, report.lower_bound) {
            (Some(c), _) => println!(
                "chi_a = {} (2Δ-1 = {}), {} search nodes",
                c,
                (2 * g.max_degree()).saturating_sub(1),
                report.nodes.unwrap_or(0)
            ),
            (None, Some(lb)) => println!(
                "chi_a >= {} (no coloring with at most {} colors)",
                lb, k_max
            ),
            (None, None) => unreachable!("report carries a value or a bound"),
        },
        Format::Json | Format::Csv => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(0)
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    palette: PaletteArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Recoloring phases per run [default: 10⁴·m].
    #[arg(long, env = "ACYCLIC_PHASE_BUDGET")]
    phase_budget: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn cmd_stats(args: &StatsArgs) -> Result<u8> {
    if args.trials < 100 {
        bail!("need at least 100 trials, got {}", args.trials);
    }
    let (g, index) = args.graph.load()?;
    let palette = args.palette.palette(&g)?;
    let config = BudgetArgs {
        phase_budget: args.phase_budget,
        retry_budget: 1,
    }
    .config(&g)?;
    let seed = resolve_seed(args.seed);
    let report = tail_report(&g, &index, &palette, seed, args.trials, &config);
    print_tail(&report, args.format)?;
    Ok(0)
}

fn print_tail(r: &TailReport, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(r)?),
        Format::Csv => {
            println!("n,count,survival,bound");
            for p in &r.survival {
                let bound = p.bound.map(|b| b.to_string()).unwrap_or_default();
                println!("{},{},{},{}", p.n, p.count, p.survival, bound);
            }
        }
        Format::Human => {
            println!(
                "K = {}, m = {}, {} trials, seed {}",
                r.palette_size, r.edges, r.trials, r.seed
            );
            match r.rho {
                Some(rho) => println!(
                    "q = {:.6}, rho = {:.6}{}",
                    r.q.unwrap_or(f64::NAN),
                    rho,
                    if r.bound_vacuous {
                        " (bound vacuous)"
                    } else {
                        ""
                    }
                ),
                None => println!("rho unavailable (q outside (0, 1))"),
            }
            if r.degenerate {
                println!("degenerate: no run needed a recoloring");
            }
            for p in &r.survival {
                let bound = p
                    .bound
                    .map(|b| format!("{:.3e}", b))
                    .unwrap_or_else(|| "-".into());
                println!(
                    "  n = {:>4}  P(recolors >= n) = {:.6}  bound {}",
                    p.n, p.survival, bound
                );
            }
            if let Some(f) = r.fit {
                println!(
                    "log-linear slope {:.4}, R^2 {:.4} over {} points",
                    f.slope, f.r_squared, f.points
                );
            }
            println!(
                "bound dominates: {}; unhalted runs: {}",
                r.dominated, r.unhalted
            );
        }
    }
    Ok(())
}

#[derive(Args)]
struct AsymptoticsArgs {
    /// q values; defaults to 0.1 0.2 0.3 0.4 0.45 0.5.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    q: Vec<f64>,
    /// Add q = (Δ - 1)/K for this maximum degree (with --colors).
    #[arg(long, requires = "colors")]
    delta: Option<usize>,
    #[arg(long, requires = "delta")]
    colors: Option<u32>,
    /// Series truncation order.
    #[arg(long, default_value_t = 200)]
    order: usize,
    /// Bisection tolerance for τ.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn cmd_asymptotics(args: &AsymptoticsArgs) -> Result<u8> {
    if args.order > MAX_SERIES_ORDER {
        bail!("order {} exceeds the cap {}", args.order, MAX_SERIES_ORDER);
    }
    let mut qs = if args.q.is_empty() {
        vec![0.1, 0.2, 0.3, 0.4, 0.45, 0.5]
    } else {
        args.q.clone()
    };
    if let (Some(delta), Some(k)) = (args.delta, args.colors) {
        qs.push(QValue::from_palette(delta, k)?.q);
    }
    let rows: Vec<AsymptoticsRow> = qs
        .iter()
        .map(|&q| asymptotics_row(q, args.order, args.tol).with_context(|| format!("q = {}", q)))
        .collect::<Result<_>>()?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
        Format::Csv => {
            println!("q,r,tau,rho,inverse_rho,rate_estimate,rate_error,characteristic_residual,identity_residual");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{},{},{},{}",
                    r.q,
                    r.r,
                    r.tau,
                    r.rho,
                    r.inverse_rho,
                    r.rate_estimate,
                    r.rate_error,
                    r.characteristic_residual,
                    r.identity_residual
                );
            }
        }
        Format::Human => {
            println!(
                "{:>8} {:>14} {:>14} {:>14} {:>10}",
                "q", "tau", "rho", "rate", "|rate-1/rho|"
            );
            for r in &rows {
                println!(
                    "{:>8} {:>14.10} {:>14.8} {:>14.10} {:>10.2e}",
                    r.q, r.tau, r.rho, r.rate_estimate, r.rate_error
                );
            }
        }
    }
    Ok(0)
}

#[derive(Subcommand)]
enum ForestsCommand {
    /// Run the colorer once and print the forest of its recoloring calls.
    Dump(DumpArgs),
    /// Check a forest file for feasibility and report its weight.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    palette: PaletteArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Recoloring phases before stopping [default: 10⁴·m].
    #[arg(long, env = "ACYCLIC_PHASE_BUDGET")]
    phase_budget: Option<u64>,
    /// Keep only the first N phases.
    #[arg(long)]
    prefix: Option<usize>,
}

#[derive(Serialize)]
struct DumpReport {
    seed: u64,
    trial: u64,
    #[serde(rename = "K")]
    palette_size: u32,
    halted: bool,
    recolor_phases: u64,
    forest: ForestDocument,
}

fn cmd_dump(args: &DumpArgs) -> Result<u8> {
    let (g, index) = args.graph.load()?;
    let palette = args.palette.palette(&g)?;
    let budget = BudgetArgs {
        phase_budget: args.phase_budget,
        retry_budget: 1,
    }
    .config(&g)?
    .phase_budget;
    let seed = Seed::new(resolve_seed(args.seed), args.trial);
    let rec = recorded_edge_color(&g, &index, &palette, seed, budget);
    let forest = forest_from_log(&rec.run.log, args.prefix);
    let report = DumpReport {
        seed: seed.master,
        trial: seed.trial,
        palette_size: palette.size(),
        halted: rec.run.log.halted,
        recolor_phases: rec.run.log.recolor_phases(),
        forest: ForestDocument::from_forest(&forest, &index),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

#[derive(Args)]
struct ValidateArgs {
    /// Forest file as printed by `forests dump` (or its `forest` member).
    forest: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    palette: PaletteArgs,
    /// Also estimate the validation success rate from this many runs.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct ValidateReport {
    nodes: usize,
    feasibility: Feasibility,
    #[serde(rename = "K")]
    palette_size: u32,
    weight_exponent: u64,
    weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    product_law: Option<ProductLawReport>,
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8> {
    let (g, index) = args.graph.load()?;
    let palette = args.palette.palette(&g)?;
    let text = fs::read_to_string(&args.forest)
        .with_context(|| format!("reading {}", args.forest.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).context("forest file is not JSON")?;
    let doc: ForestDocument = serde_json::from_value(value.get("forest").cloned().unwrap_or(value))
        .context("forest file does not hold a forest")?;
    let forest = doc.to_forest(&g, &index)?;
    let feasibility = check_feasible(&forest, &g, &index)?;
    let weight = forest_weight(&forest, &index, palette.size());
    let product_law = match args.trials {
        Some(t) if feasibility == Feasibility::Feasible => Some(success_frequency(
            &forest, &g, &index, &palette, t, args.seed,
        )),
        _ => None,
    };
    let feasible = feasibility == Feasibility::Feasible;
    let report = ValidateReport {
        nodes: forest.len(),
        feasibility,
        palette_size: palette.size(),
        weight_exponent: weight.exponent,
        weight: weight.to_f64(),
        product_law,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if feasible { 0 } else { EXIT_VERIFY })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Color(a) => cmd_color(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Asymptotics(a) => cmd_asymptotics(&a),
        Command::Forests(ForestsCommand::Dump(a)) => cmd_dump(&a),
        Command::Forests(ForestsCommand::Validate(a)) => cmd_validate(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(EXIT_INPUT)
        }
    }
}
