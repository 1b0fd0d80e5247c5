use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use qlayout::bench::{run_bench, summarize};
use qlayout::corpus::{build_corpus, CorpusOptions};
use qlayout::io::{
    features_json, load_graph, read_circuit, read_dataset, read_json, read_model, write_circuit,
    write_json, SolutionRecord,
};
use qlayout::solver::{ProcessChecker, SolverConfig};
use qlayout_core::augment::{ChunkPlan, Target};
use qlayout_core::features::extract_features;
use qlayout_core::regressor::RegressionTree;
use qlayout_core::search::{
    solve_optimal, IncrementRule, ModelPair, Predictions, SearchError, SearchParams,
};
use qlayout_core::solution::{validate_solution, SwapEmission};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_INVALID: u8 = 4;

#[derive(Parser)]
#[command(name = "qlayout", version, about = "Depth- and swap-optimal qubit layout synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map a circuit onto a device with optimal depth, then optimal swaps.
    Map(MapArgs),
    /// Print the six circuit features as JSON.
    Features {
        circuit: PathBuf,
    },
    /// Chunk seed circuits, label the chunks and write a training corpus.
    Augment(AugmentArgs),
    /// Fit a regression tree to a dataset CSV.
    Train(TrainArgs),
    /// Predict depth and swap count for a circuit.
    Predict {
        circuit: PathBuf,
        #[arg(long)]
        depth_model: PathBuf,
        #[arg(long)]
        swap_model: PathBuf,
    },
    /// Check a saved mapping against its circuit and device.
    Validate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        arch: String,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Compare search counts with and without predictions.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SolveOpts {
    /// Solver executable (default: $QLAYOUT_SOLVER, then `z3`).
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Extra solver arguments, replacing the built-in ones.
    #[arg(long = "solver-arg", allow_hyphen_values = true)]
    solver_args: Vec<String>,
    /// Wall-clock limit per solver call, in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, default_value_t = 3)]
    swap_duration: usize,
    #[arg(long, default_value_t = 50)]
    d_th: usize,
    #[arg(long, default_value_t = 15)]
    d_dl: usize,
    #[arg(long, default_value_t = 10)]
    d_ds: usize,
    /// Give the large extent increment to bounds below the threshold instead.
    #[arg(long)]
    large_step_below_threshold: bool,
    /// Keep swaps as `swap` gates instead of three CNOTs.
    #[arg(long)]
    keep_swap_opcode: bool,
}

impl SolveOpts {
    fn params(&self) -> SearchParams {
        SearchParams {
            d_th: self.d_th,
            d_dl: self.d_dl,
            d_ds: self.d_ds,
            swap_duration: self.swap_duration,
            increment_rule: if self.large_step_below_threshold {
                IncrementRule::LargeBelowThreshold
            } else {
                IncrementRule::LargeAboveThreshold
            },
            emission: if self.keep_swap_opcode {
                SwapEmission::Opcode
            } else {
                SwapEmission::ThreeCnots
            },
        }
    }

    fn solver(&self, timeout: Option<f64>) -> anyhow::Result<SolverConfig> {
        let mut cfg = match &self.solver {
            Some(p) => SolverConfig::with_path(p),
            None => SolverConfig::default(),
        };
        if !self.solver_args.is_empty() {
            cfg.args = self.solver_args.iter().map(Into::into).collect();
        }
        let timeout = match timeout.or(self.timeout) {
            Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
            Some(s) => return Err(anyhow!("timeout must be positive, got {s}")),
            None => None,
        };
        Ok(cfg.with_timeout(timeout))
    }
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Built-in device (qx2, lineN, ringN, gridRxC) or coupling-graph JSON.
    #[arg(long)]
    arch: String,
    #[arg(long, requires = "swap_model")]
    depth_model: Option<PathBuf>,
    #[arg(long, requires = "depth_model")]
    swap_model: Option<PathBuf>,
    /// Mapped circuit (default: mapped.qasm).
    #[arg(long, default_value = "mapped.qasm")]
    out: PathBuf,
    /// Telemetry JSON (default: printed to standard output).
    #[arg(long)]
    telemetry: Option<PathBuf>,
    /// Full solution record, usable by `validate`.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[command(flatten)]
    solve: SolveOpts,
}

#[derive(Args)]
struct AugmentArgs {
    /// Seed circuits.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    arch: String,
    #[arg(long)]
    out: PathBuf,
    /// Chunk budgets, e.g. `20,40,60`.
    #[arg(long, value_delimiter = ',', required = true)]
    b_list: Vec<usize>,
    /// Drop single-qubit gates before chunking with `--b-list`.
    #[arg(long)]
    two_qubit_only: bool,
    /// Budgets for an additional pass that keeps only two-qubit gates.
    #[arg(long, value_delimiter = ',')]
    two_qubit_pass: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    kmax: usize,
    /// Per-sample solver time limit in seconds; failing samples are skipped.
    #[arg(long)]
    timeout_per_sample: Option<f64>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    solve: SolveOpts,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV (six features, label, source).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = parse_target)]
    target: Target,
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(required = true)]
    circuits: Vec<PathBuf>,
    #[arg(long)]
    arch: String,
    #[arg(long, requires = "swap_model")]
    depth_model: Option<PathBuf>,
    #[arg(long, requires = "depth_model")]
    swap_model: Option<PathBuf>,
    /// Per-sample table as CSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    solve: SolveOpts,
}

fn parse_target(s: &str) -> Result<Target, String> {
    match s {
        "depth" => Ok(Target::Depth),
        "swaps" | "swap" => Ok(Target::Swaps),
        _ => Err(format!("expected `depth` or `swaps`, got `{s}`")),
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error: e.into(),
    }
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: e.into(),
    }
}

fn search_failure(e: SearchError) -> Failure {
    let code = match e {
        SearchError::Encode(_) => EXIT_INPUT,
        _ => EXIT_SOLVER,
    };
    let error = match e.telemetry() {
        Some(t) => anyhow!(
            "{e} (after {} depth and {} swap checks)",
            t.depth_checks,
            t.swap_checks
        ),
        None => anyhow!(e),
    };
    Failure { code, error }
}

fn load_models(depth: &Option<PathBuf>, swaps: &Option<PathBuf>) -> Result<Option<ModelPair>, Failure> {
    match (depth, swaps) {
        (Some(d), Some(s)) => Ok(Some(ModelPair {
            depth: read_model(d).map_err(input)?,
            swaps: read_model(s).map_err(input)?,
        })),
        _ => Ok(None),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(input)?;
    println!("{text}");
    Ok(())
}

fn cmd_map(a: MapArgs) -> Result<(), Failure> {
    let c = read_circuit(&a.circuit).map_err(input)?;
    let g = load_graph(&a.arch).map_err(input)?;
    let models = load_models(&a.depth_model, &a.swap_model)?;
    let hints = models.as_ref().map(|m| m.predict(&c)).unwrap_or_default();
    let solver = a.solve.solver(None).map_err(usage)?;
    let mut checker = ProcessChecker::new(solver);
    let outcome =
        solve_optimal(&c, &g, hints, &a.solve.params(), &mut checker).map_err(search_failure)?;
    let report = validate_solution(&c, &g, &outcome.solution);
    if let Some(v) = report.first() {
        return Err(Failure {
            code: EXIT_INVALID,
            error: anyhow!("solver model failed validation: {:?}: {}", v.kind, v.detail),
        });
    }
    write_circuit(&a.out, &outcome.solution.mapped_circuit).map_err(input)?;
    if let Some(p) = &a.solution {
        let record = SolutionRecord::new(&g, &outcome.solution, Some(outcome.telemetry.clone()));
        write_json(p, &record).map_err(input)?;
    }
    match &a.telemetry {
        Some(p) => write_json(p, &outcome.telemetry).map_err(input),
        None => print_json(&outcome.telemetry),
    }
}

fn cmd_augment(a: AugmentArgs) -> Result<(), Failure> {
    let g = load_graph(&a.arch).map_err(input)?;
    let mut plans = vec![ChunkPlan::new(a.b_list.clone(), a.two_qubit_only).map_err(usage)?];
    if !a.two_qubit_pass.is_empty() {
        plans.push(ChunkPlan::new(a.two_qubit_pass.clone(), true).map_err(usage)?);
    }
    let opts = CorpusOptions {
        plans,
        params: a.solve.params(),
        solver: a.solve.solver(a.timeout_per_sample).map_err(usage)?,
        jobs: a.jobs,
        k_max: a.kmax,
    };
    let report = build_corpus(&a.inputs, &g, &a.out, &opts).map_err(input)?;
    print_json(&serde_json::json!({
        "samples": report.depth.len(),
        "skipped": report.failures.len(),
        "depth_after_allknn": report.depth_refined.len(),
        "swaps_after_allknn": report.swaps_refined.len(),
    }))
}

fn cmd_train(a: TrainArgs) -> Result<(), Failure> {
    let d = read_dataset(&a.data, a.target, "").map_err(input)?;
    let tree = RegressionTree::fit(&d, a.max_depth).map_err(input)?;
    write_json(&a.out, &tree).map_err(input)
}

fn cmd_predict(circuit: &Path, depth: PathBuf, swaps: PathBuf) -> Result<(), Failure> {
    let c = read_circuit(circuit).map_err(input)?;
    let models = load_models(&Some(depth), &Some(swaps))?.expect("both paths given");
    let p: Predictions = models.predict(&c);
    print_json(&serde_json::json!({"depth": p.depth, "swaps": p.swaps}))
}

fn cmd_validate(circuit: &Path, arch: &str, solution: &Path) -> Result<(), Failure> {
    let c = read_circuit(circuit).map_err(input)?;
    let g = load_graph(arch).map_err(input)?;
    let record: SolutionRecord = read_json(solution).map_err(input)?;
    let sol = record
        .to_solution()
        .with_context(|| format!("{}: mapped_qasm", solution.display()))
        .map_err(input)?;
    let report = validate_solution(&c, &g, &sol);
    print_json(&serde_json::json!({
        "valid": report.is_valid(),
        "first": report.first(),
        "violations": report.violations,
    }))?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INVALID,
            error: anyhow!("solution is invalid"),
        })
    }
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let g = load_graph(&a.arch).map_err(input)?;
    let models = load_models(&a.depth_model, &a.swap_model)?;
    let circuits = a
        .circuits
        .iter()
        .map(|p| Ok((p.display().to_string(), read_circuit(p)?)))
        .collect::<Result<Vec<_>, qlayout::io::InputError>>()
        .map_err(input)?;
    let solver = a.solve.solver(None).map_err(usage)?;
    let results = run_bench(&circuits, &g, models.as_ref(), &a.solve.params(), &solver, a.jobs);
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err((name, e)) => {
                log::warn!("{name}: {e}");
                failed.push(name);
            }
        }
    }
    let sink: Box<dyn std::io::Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(input)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row).map_err(input)?;
    }
    w.flush().map_err(input)?;
    drop(w);
    if a.out.is_some() {
        print_json(&summarize(&rows))?;
    } else {
        eprintln!("{}", serde_json::to_string(&summarize(&rows)).map_err(input)?);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_SOLVER,
            error: anyhow!("{} circuit(s) failed: {}", failed.len(), failed.join(", ")),
        })
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Map(a) => cmd_map(a),
        Command::Features { circuit } => {
            let c = read_circuit(&circuit).map_err(input)?;
            print_json(&features_json(&extract_features(&c)))
        }
        Command::Augment(a) => cmd_augment(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict {
            circuit,
            depth_model,
            swap_model,
        } => cmd_predict(&circuit, depth_model, swap_model),
        Command::Validate {
            circuit,
            arch,
            solution,
        } => cmd_validate(&circuit, &arch, &solution),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
