//! Command-line front-end: `precompute`, `simulate`, `optimize`, `bench`.
//!
//! Exit codes: 0 on success, 2 for bad input (flags, files, formats),
//! 3 when the problem is too large to allocate.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::{layer_sweep, rows_to_csv, BenchRow};
use crate::distributed;
use crate::error::{Error, Result};
use crate::mixers::MixerSpec;
use crate::optimize::{optimize_parameters, NelderMeadOptions, TrajectoryPoint};
use crate::problems::{labs_terms, maxcut_terms, Graph};
use crate::qaoa::{QaoaParams, QaoaResult, QaoaSimulator};
use crate::statevec::StateVector;
use crate::terms::{compact_costs, TermPolynomial};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fastqaoa", version, about = "QAOA simulation with a precomputed cost diagonal")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Precompute the cost vector and report its statistics.
    Precompute(PrecomputeArgs),
    /// Simulate one QAOA circuit and report expectation and overlap.
    Simulate(SimulateArgs),
    /// Optimize the QAOA angles with Nelder-Mead.
    Optimize(OptimizeArgs),
    /// Time simulations over a list of depths.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Builtin problem: labs, maxcut, maxcut-triangle, maxcut-ring,
    /// maxcut-complete, maxcut-3regular.
    #[arg(long)]
    pub problem: Option<String>,
    /// JSON terms file: {"n": 3, "terms": [[0.5, [0, 1]], [-1.5, []]]}.
    #[arg(long)]
    pub terms_file: Option<PathBuf>,
    /// Edge list, one `u v [weight]` per line.
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
    /// Problem size (LABS length, generated graph size, or graph vertex count).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MixerArg {
    X,
    XyRing,
    XyComplete,
}

impl From<MixerArg> for MixerSpec {
    fn from(m: MixerArg) -> Self {
        match m {
            MixerArg::X => MixerSpec::X,
            MixerArg::XyRing => MixerSpec::XyRing,
            MixerArg::XyComplete => MixerSpec::XyComplete,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CircuitArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "x")]
    pub mixer: MixerArg,
    /// Logical worker count (power of two).
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Ones in the initial state for XY mixers (default n/2).
    #[arg(long)]
    pub hamming_weight: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AngleArgs {
    /// Comma-separated gamma per layer.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Option<Vec<f64>>,
    /// Comma-separated beta per layer.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    /// JSON file {"gammas": [...], "betas": [...]}.
    #[arg(long, conflicts_with_all = ["gamma", "beta"])]
    pub params_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PrecomputeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub circuit: CircuitArgs,
    #[command(flatten)]
    pub angles: AngleArgs,
    /// Number of layers.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub circuit: CircuitArgs,
    #[command(flatten)]
    pub angles: AngleArgs,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Maximum objective evaluations.
    #[arg(long, default_value_t = 500)]
    pub budget: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub circuit: CircuitArgs,
    /// Comma-separated depths to time.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    pub p: Vec<usize>,
    /// Repeats per depth; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Builds the cost polynomial from exactly one problem source.
pub fn load_problem(args: &ProblemArgs) -> Result<TermPolynomial> {
    let need_n = |what: &str| {
        args.n.ok_or_else(|| Error::domain(format!("--problem {what} requires --n")))
    };
    match (&args.problem, &args.terms_file, &args.graph_file) {
        (None, Some(path), None) => TermPolynomial::from_json_file(path),
        (Some(p), None, Some(path)) if p == "maxcut" => maxcut_terms(&Graph::from_file(path, args.n)?),
        (None, None, Some(path)) => maxcut_terms(&Graph::from_file(path, args.n)?),
        (Some(p), None, None) => match p.as_str() {
            "labs" => labs_terms(need_n("labs")?),
            "maxcut" => Err(Error::domain("--problem maxcut requires --graph-file")),
            "maxcut-triangle" => maxcut_terms(&Graph::triangle()),
            "maxcut-ring" => maxcut_terms(&Graph::ring(need_n(p)?)?),
            "maxcut-complete" => maxcut_terms(&Graph::complete(need_n(p)?)?),
            "maxcut-3regular" => maxcut_terms(&Graph::three_regular(need_n(p)?)?),
            other => Err(Error::domain(format!("unknown problem {other:?}"))),
        },
        (None, None, None) => Err(Error::domain(
            "no problem given: use --problem, --terms-file or --graph-file",
        )),
        _ => Err(Error::domain("give exactly one problem source")),
    }
}

/// Deterministic starting angles in `[0, pi/4)` drawn from `seed`.
pub fn seeded_params(p: usize, seed: u64) -> QaoaParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quarter = std::f64::consts::FRAC_PI_4;
    let gammas = (0..p).map(|_| rng.gen_range(0.0..quarter)).collect();
    let betas = (0..p).map(|_| rng.gen_range(0.0..quarter)).collect();
    QaoaParams { gammas, betas }
}

fn resolve_params(angles: &AngleArgs, p: usize, seed: u64) -> Result<QaoaParams> {
    let params = if let Some(path) = &angles.params_file {
        let text = std::fs::read_to_string(path)?;
        let raw: QaoaParams = serde_json::from_str(&text)?;
        QaoaParams::new(raw.gammas, raw.betas)?
    } else {
        match (&angles.gamma, &angles.beta) {
            (Some(g), Some(b)) => QaoaParams::new(g.clone(), b.clone())?,
            (None, None) => return Ok(seeded_params(p, seed)),
            _ => return Err(Error::domain("--gamma and --beta must be given together")),
        }
    };
    if params.p() != p {
        return Err(Error::domain(format!("{} angle pairs given but --p is {p}", params.p())));
    }
    Ok(params)
}

fn initial_state(circuit: &CircuitArgs, n: usize) -> Result<Option<StateVector>> {
    let mixer = MixerSpec::from(circuit.mixer);
    if !mixer.is_xy() {
        return Ok(None);
    }
    let weight = circuit.hamming_weight.unwrap_or(n / 2);
    StateVector::hamming_weight_uniform(n, weight).map(Some)
}

fn run(sim: &QaoaSimulator, params: &QaoaParams, init: Option<&StateVector>, workers: usize) -> Result<QaoaResult> {
    if workers > 1 {
        return Ok(distributed::simulate_with(sim, params, workers, init)?.result);
    }
    match init {
        Some(s) => sim.simulate_from(params, s.clone()),
        None => sim.simulate(params),
    }
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
pub struct PrecomputeReport {
    pub n: usize,
    pub terms: usize,
    pub min_cost: f64,
    pub max_cost: f64,
    pub mean_cost: f64,
    pub ground_states: usize,
    pub compact_u16: bool,
    pub wall_time_precompute_s: f64,
}

pub fn cmd_precompute(args: &PrecomputeArgs) -> Result<String> {
    let poly = load_problem(&args.problem)?;
    let sim = QaoaSimulator::new(poly.clone(), MixerSpec::X);
    let costs = sim.costs()?;
    let min = costs.min();
    let report = PrecomputeReport {
        n: poly.n(),
        terms: poly.len(),
        min_cost: min,
        max_cost: costs.max(),
        mean_cost: costs.mean(),
        ground_states: costs.values().iter().filter(|&&c| c == min).count(),
        compact_u16: compact_costs(&costs).is_ok(),
        wall_time_precompute_s: sim.precompute_time().as_secs_f64(),
    };
    to_json(&report)
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub n: usize,
    pub p: usize,
    pub mixer: String,
    pub workers: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub expectation: f64,
    pub overlap: f64,
    pub min_cost: f64,
    pub wall_time_precompute_s: f64,
    pub wall_time_per_layer_s: f64,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let c = &args.circuit;
    let poly = load_problem(&c.problem)?;
    let n = poly.n();
    let params = resolve_params(&args.angles, args.p, c.seed)?;
    let init = initial_state(c, n)?;
    distributed::worker_bits(n, c.workers)?;
    let sim = QaoaSimulator::new(poly, c.mixer.into());
    let costs = sim.costs()?;
    let start = Instant::now();
    let result = run(&sim, &params, init.as_ref(), c.workers)?;
    let elapsed = start.elapsed().as_secs_f64();
    let report = SimulateReport {
        n,
        p: params.p(),
        mixer: sim.mixer().name().to_string(),
        workers: c.workers,
        gammas: params.gammas.clone(),
        betas: params.betas.clone(),
        expectation: result.expectation(),
        overlap: result.overlap(),
        min_cost: costs.min(),
        wall_time_precompute_s: sim.precompute_time().as_secs_f64(),
        wall_time_per_layer_s: if params.p() > 0 { elapsed / params.p() as f64 } else { 0.0 },
    };
    to_json(&report)
}

#[derive(Debug, Serialize)]
pub struct OptimizeReport {
    pub n: usize,
    pub p: usize,
    pub mixer: String,
    pub workers: usize,
    pub seed: u64,
    pub initial_params: QaoaParams,
    pub initial_value: f64,
    pub best_params: QaoaParams,
    pub best_value: f64,
    pub overlap: f64,
    pub min_cost: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub precompute_count: usize,
    pub trajectory: Vec<TrajectoryPoint>,
    pub wall_time_s: f64,
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<String> {
    let c = &args.circuit;
    let poly = load_problem(&c.problem)?;
    let n = poly.n();
    let init_params = resolve_params(&args.angles, args.p, c.seed)?;
    let init = initial_state(c, n)?;
    distributed::worker_bits(n, c.workers)?;
    let sim = QaoaSimulator::new(poly, c.mixer.into());
    let start = Instant::now();
    let objective = |p: &QaoaParams| Ok(run(&sim, p, init.as_ref(), c.workers)?.expectation());
    let opts = NelderMeadOptions { budget: args.budget, tolerance: args.tolerance, ..Default::default() };
    let report = optimize_parameters(objective, &init_params, &opts)?;
    let best = run(&sim, &report.best_params, init.as_ref(), c.workers)?;
    let out = OptimizeReport {
        n,
        p: args.p,
        mixer: sim.mixer().name().to_string(),
        workers: c.workers,
        seed: c.seed,
        initial_value: report.trajectory[0].value,
        initial_params: init_params,
        best_params: report.best_params,
        best_value: report.best_value,
        overlap: best.overlap(),
        min_cost: best.costs().min(),
        evaluations: report.evaluations,
        converged: report.converged,
        precompute_count: sim.precompute_count(),
        trajectory: report.trajectory,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    to_json(&out)
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub mixer: String,
    pub workers: usize,
    pub repeats: usize,
    pub precompute_count: usize,
    pub rows: Vec<BenchRow>,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String> {
    let c = &args.circuit;
    if args.p.is_empty() {
        return Err(Error::domain("--p needs at least one depth"));
    }
    let poly = load_problem(&c.problem)?;
    let n = poly.n();
    let init = initial_state(c, n)?;
    distributed::worker_bits(n, c.workers)?;
    let sim = QaoaSimulator::new(poly, c.mixer.into());
    let seed = c.seed;
    let rows = layer_sweep(&sim, &args.p, args.repeats.max(3), |p| seeded_params(p, seed), init.as_ref(), c.workers)?;
    match args.format {
        Format::Csv => Ok(rows_to_csv(&rows)),
        Format::Json => to_json(&BenchReport {
            n,
            mixer: sim.mixer().name().to_string(),
            workers: c.workers,
            repeats: args.repeats.max(3),
            precompute_count: sim.precompute_count(),
            rows,
        }),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Resource { .. } => EXIT_RESOURCE,
        _ => EXIT_INPUT,
    }
}

/// Runs a parsed command, writing its report; returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let (text, output) = match &cli.command {
        Command::Precompute(a) => (cmd_precompute(a), &a.output),
        Command::Simulate(a) => (cmd_simulate(a), &a.circuit.output),
        Command::Optimize(a) => (cmd_optimize(a), &a.circuit.output),
        Command::Bench(a) => (cmd_bench(a), &a.circuit.output),
    };
    match text.and_then(|t| write_output(output, &t)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
