//! Command-line front end: `cluster`, `sweep`, `synth` and `eval`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 solver stopped at the iteration limit (results are still written).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anchor_mvc::data::{read_labels, save_dataset};
use anchor_mvc::metrics::{summarize, NmiNormalization};
use anchor_mvc::{
    generate_synthetic, load_dataset, run, save_results, AnchorCount, ClusteringResult,
    DatasetManifest, Error, MetricReport, PipelineConfig, SolverConfig, SynthSpec, ViewDataset,
};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "anchor-mvc",
    version,
    about = "Multi-view clustering on anchor bipartite graphs",
    after_help = "Set RAYON_NUM_THREADS to bound the worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a dataset; writes labels, trace, fused graph and metrics to --out.
    Cluster(ClusterArgs),
    /// Repeat clustering for each value of one parameter and tabulate the metrics.
    Sweep(SweepArgs),
    /// Write a synthetic multi-view dataset and its manifest.
    Synth(SynthArgs),
    /// Score a predicted label file against ground truth.
    Eval(EvalArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// TOML dataset manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Inline synthetic spec, e.g. n=300,views=3,clusters=3,sep=10,noise=1,corrupt=0.1,seed=7
    #[arg(long)]
    synth: Option<String>,
}

#[derive(Args, Clone)]
struct MethodArgs {
    /// Cluster count; defaults to the number of distinct ground-truth labels.
    #[arg(long)]
    clusters: Option<usize>,
    /// Absolute anchor count; overrides --anchor-prop.
    #[arg(long)]
    anchors: Option<usize>,
    /// Anchor count as a fraction of the sample count.
    #[arg(long, default_value_t = 0.5)]
    anchor_prop: f64,
    /// Anchors linked to each sample in the initial graphs.
    #[arg(long, default_value_t = 5)]
    neighbors: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Spectral weight (starting value when adaptive).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    adaptive_beta: bool,
    /// Schatten exponent in (0, 1].
    #[arg(long, default_value_t = 0.9)]
    p: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    /// Anchor-selection seed; repetition r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Nmi::Geometric)]
    nmi: Nmi,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    repetitions: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    method: MethodArgs,
    /// Parameter to vary. Anchor values at most 1 are proportions, larger ones counts.
    #[arg(long, value_enum)]
    sweep: Axis,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    repetitions: u64,
    #[arg(long, default_value = "sweep")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Inline synthetic spec; missing keys keep their defaults.
    #[arg(long, default_value = "")]
    synth: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "synthetic")]
    name: String,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum, default_value_t = Nmi::Geometric)]
    nmi: Nmi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Nmi {
    Geometric,
    Arithmetic,
}

impl From<Nmi> for NmiNormalization {
    fn from(n: Nmi) -> Self {
        match n {
            Nmi::Geometric => NmiNormalization::Geometric,
            Nmi::Arithmetic => NmiNormalization::Arithmetic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    P,
    Anchors,
    Alpha,
    Beta,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::Anchors => "anchors",
            Axis::Alpha => "alpha",
            Axis::Beta => "beta",
        }
    }
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidP(_) | Error::InvalidConfig(_) | Error::TooManyAnchors { .. } => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Cluster(args) => cmd_cluster(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Eval(args) => cmd_eval(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Loads the dataset and the cluster count implied by it, if any.
fn load_input(input: &Input) -> CliResult<(ViewDataset, Option<usize>)> {
    if let Some(path) = &input.manifest {
        let manifest = DatasetManifest::from_path(path)?;
        let data = load_dataset(&manifest)?;
        let k = data.labels().map(distinct);
        return Ok((data, k));
    }
    let text = input.synth.as_deref().unwrap_or_default();
    let spec: SynthSpec = text.parse().map_err(|e: Error| usage(e.to_string()))?;
    let data = generate_synthetic(&spec)?;
    Ok((data, Some(spec.clusters)))
}

fn distinct(labels: &[usize]) -> usize {
    let mut seen = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn pipeline_config(method: &MethodArgs, implied_k: Option<usize>) -> CliResult<PipelineConfig> {
    let clusters = method
        .clusters
        .or(implied_k)
        .ok_or_else(|| usage("--clusters is required when the dataset has no labels"))?;
    let solver = SolverConfig {
        alpha: method.alpha,
        beta: method.beta,
        p: method.p,
        clusters,
        max_iters: method.max_iters,
        tol: method.tol,
        beta_adaptive: method.adaptive_beta,
        ..SolverConfig::default()
    };
    solver.validate()?;
    let anchors = match method.anchors {
        Some(m) => AnchorCount::Absolute(m),
        None => AnchorCount::Proportion(method.anchor_prop),
    };
    Ok(PipelineConfig {
        anchors,
        neighbors: method.neighbors,
        solver,
        seed: method.seed,
    })
}

fn run_once(data: &ViewDataset, config: &PipelineConfig, nmi: Nmi) -> CliResult<ClusteringResult> {
    let mut result = run(data, config)?;
    if nmi == Nmi::Arithmetic {
        if let Some(truth) = data.labels() {
            result.metrics = Some(MetricReport::compute_with(
                truth,
                &result.labeling.sample_labels,
                nmi.into(),
            )?);
        }
    }
    if !result.converged {
        warn!(
            "stopped at the iteration limit ({}) before reaching tol",
            config.solver.max_iters
        );
    }
    Ok(result)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn mean_std_line(reports: &[MetricReport]) -> String {
    let (mean, std) = summarize(reports);
    mean.values()
        .iter()
        .zip(std.values())
        .map(|(m, s)| format!("{m:.4}±{s:.4}"))
        .collect::<Vec<_>>()
        .join("\t")
}

fn cmd_cluster(args: &ClusterArgs) -> CliResult<u8> {
    let (data, implied_k) = load_input(&args.input)?;
    let base = pipeline_config(&args.method, implied_k)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;

    let reps = args.repetitions as usize;
    let mut reports = Vec::new();
    let mut all_converged = true;
    for r in 0..reps {
        let config = PipelineConfig {
            seed: base.seed + r as u64,
            ..base.clone()
        };
        let result = run_once(&data, &config, args.method.nmi)?;
        let dir = if reps == 1 {
            args.out.clone()
        } else {
            args.out.join(format!("rep_{r:02}"))
        };
        save_results(&result, &dir)?;
        info!(
            "run {r}: components={} forced_edits={} iterations={} converged={}",
            result.raw_components,
            result.labeling.forced_edits,
            result.trace.len(),
            result.converged
        );
        all_converged &= result.converged;
        reports.extend(result.metrics);
    }

    if reports.is_empty() {
        println!("no ground-truth labels; cluster labels written to {}", args.out.display());
    } else if reps == 1 {
        println!("{}\n{}", MetricReport::HEADER, reports[0]);
    } else {
        let (mean, std) = summarize(&reports);
        let summary = format!("stat\t{}\nmean\t{mean}\nstd\t{std}\n", MetricReport::HEADER);
        write_file(&args.out.join("summary.tsv"), &summary)?;
        println!("{}\n{}", MetricReport::HEADER, mean_std_line(&reports));
    }
    Ok(if all_converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn apply_axis(config: &mut PipelineConfig, axis: Axis, value: f64) -> CliResult<()> {
    match axis {
        Axis::P => config.solver.p = value,
        Axis::Alpha => config.solver.alpha = value,
        Axis::Beta => config.solver.beta = value,
        Axis::Anchors if value > 0.0 && value <= 1.0 => {
            config.anchors = AnchorCount::Proportion(value)
        }
        Axis::Anchors if value > 1.0 && value.fract() == 0.0 => {
            config.anchors = AnchorCount::Absolute(value as usize)
        }
        Axis::Anchors => {
            return Err(usage(format!(
                "anchor sweep values must be proportions in (0, 1] or whole counts, got {value}"
            )))
        }
    }
    config.solver.validate()?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<u8> {
    let (data, implied_k) = load_input(&args.input)?;
    let base = pipeline_config(&args.method, implied_k)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let axis = args.sweep.name();
    let has_truth = data.labels().is_some();

    let mut table = format!("{axis}\trep\t{}\tanchors\traw_components\tforced_edits\titerations\tconverged\n", MetricReport::HEADER);
    let mut timings = format!("{axis}\trep\tgraph_s\tsolve_s\tlabel_s\n");
    let mut all_converged = true;
    println!("{axis}\t{}", MetricReport::HEADER);
    for &value in &args.values {
        let mut config = base.clone();
        apply_axis(&mut config, args.sweep, value)?;
        let mut reports = Vec::new();
        for r in 0..args.repetitions {
            let run_config = PipelineConfig {
                seed: base.seed + r,
                ..config.clone()
            };
            let result = run_once(&data, &run_config, args.method.nmi)?;
            let metrics = match &result.metrics {
                Some(m) => m.to_string(),
                None => vec!["NA"; 7].join("\t"),
            };
            let _ = writeln!(
                table,
                "{value}\t{r}\t{metrics}\t{}\t{}\t{}\t{}\t{}",
                result.n_anchors,
                result.raw_components,
                result.labeling.forced_edits,
                result.trace.len(),
                result.converged
            );
            let t = result.timings;
            let _ = writeln!(timings, "{value}\t{r}\t{:.6}\t{:.6}\t{:.6}", t.graph, t.solve, t.label);
            all_converged &= result.converged;
            reports.extend(result.metrics);
        }
        if has_truth {
            println!("{value}\t{}", mean_std_line(&reports));
        } else {
            println!("{value}\tNA");
        }
    }
    write_file(&args.out.join(format!("sweep_{axis}.tsv")), &table)?;
    write_file(&args.out.join(format!("sweep_{axis}_timings.tsv")), &timings)?;
    Ok(if all_converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn cmd_synth(args: &SynthArgs) -> CliResult<u8> {
    let spec: SynthSpec = args.synth.parse().map_err(|e: Error| usage(e.to_string()))?;
    let data = generate_synthetic(&spec)?;
    let manifest = save_dataset(&data, &args.out, &args.name)?;
    println!("{}", manifest.display());
    Ok(0)
}

fn cmd_eval(args: &EvalArgs) -> CliResult<u8> {
    let truth = read_labels(&args.truth)?;
    let pred = read_labels(&args.pred)?;
    let report = MetricReport::compute_with(&truth, &pred, args.nmi.into())?;
    println!("{}\n{report}", MetricReport::HEADER);
    Ok(0)
}
