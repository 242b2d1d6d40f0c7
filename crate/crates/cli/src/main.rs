use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ggm_core::classifier::{GradientInit, GradientOptions, TrainingMode};
use ggm_core::graph::{
    build_graph, build_graph_with_witness, write_dot, write_edge_csv, write_witness_csv,
};
use ggm_core::harness::{
    bench_recompute, format_table, load_csv, read_csv_columns, run_nested_cv, train_model,
    uniform_dataset, write_bench_csv, write_probability_csv, FilterSearch, SigmaSearch,
    SigmaStrategy, TrainSettings,
};
use ggm_core::regularization::{filter_samples, memberships, write_membership_csv};
use ggm_core::{
    Architecture, Dataset, Error, ErrorKind, ExperimentConfig, FilterModel, FilterPolicy,
    MembershipKind, Standardizer, TrainedModel,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ggm",
    version,
    about = "Gabriel-graph classifiers: graphs, filtering, training and evaluation"
)]
struct Cli {
    /// Seed for fold assignment, random sigma draws and benchmark removal sets.
    #[arg(long, env = "GGM_SEED", global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Gabriel graph of a dataset and export it.
    Graph(GraphArgs),
    /// Per-sample membership report (q, q_d, class threshold, removal flag).
    Membership(MembershipArgs),
    /// Apply a filter policy and list kept and removed rows.
    Filter(FilterArgs),
    /// Fit a model on a whole dataset and save it as JSON.
    Train(TrainArgs),
    /// Class probabilities for every row of a CSV file.
    Predict(PredictArgs),
    /// Nested cross-validation from a config file and/or flags.
    Cv(CvArgs),
    /// Time fresh graph builds against incremental recomputation.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Input {
    /// Headed CSV file.
    csv: PathBuf,
    /// Name of the label column.
    #[arg(long, default_value = "class")]
    label: String,
    /// Use raw feature values instead of z-scores.
    #[arg(long)]
    raw: bool,
}

impl Input {
    /// Loaded rows, standardized unless `--raw`.
    fn load(&self) -> Result<Dataset, Error> {
        let data = load_csv(&self.csv, &self.label)?;
        if self.raw {
            return Ok(data);
        }
        Standardizer::fit(&data)?.transform_checked(&data)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Csv,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "dot")]
    format: GraphFormat,
    /// Also count witnesses and write them to this CSV file.
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MembershipArg {
    Cardinality,
    Distance,
}

impl From<MembershipArg> for MembershipKind {
    fn from(m: MembershipArg) -> Self {
        match m {
            MembershipArg::Cardinality => MembershipKind::Cardinality,
            MembershipArg::Distance => MembershipKind::Distance,
        }
    }
}

/// `none`, `threshold`, or `count:N` / `count:a,b,...` with one count per class.
#[derive(Clone, Debug)]
enum PolicyArg {
    None,
    Threshold,
    Counts(Vec<usize>),
}

fn parse_policy(s: &str) -> Result<PolicyArg, String> {
    match s {
        "none" => Ok(PolicyArg::None),
        "threshold" => Ok(PolicyArg::Threshold),
        _ => {
            let rest = s
                .strip_prefix("count:")
                .ok_or_else(|| format!("unknown filter policy '{s}'"))?;
            let counts = rest
                .split([',', '/'])
                .map(|c| {
                    c.trim()
                        .parse::<usize>()
                        .map_err(|e| format!("bad count '{c}': {e}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PolicyArg::Counts(counts))
        }
    }
}

impl PolicyArg {
    fn resolve(&self, class_count: usize) -> FilterPolicy {
        match self {
            PolicyArg::None => FilterPolicy::None,
            PolicyArg::Threshold => FilterPolicy::Threshold,
            PolicyArg::Counts(c) if c.len() == 1 => FilterPolicy::PerClassCount {
                counts: vec![c[0]; class_count],
            },
            PolicyArg::Counts(c) => FilterPolicy::PerClassCount { counts: c.clone() },
        }
    }
}

#[derive(Args)]
struct RegularizationArgs {
    #[arg(long, value_enum, default_value = "distance")]
    membership: MembershipArg,
    /// Kernel bandwidth for distance membership.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long = "filter-policy", value_parser = parse_policy, default_value = "threshold")]
    filter_policy: PolicyArg,
}

#[derive(Args)]
struct MembershipArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    reg: RegularizationArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    reg: RegularizationArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ArchArg {
    /// Edge-midpoint model; activation chosen by --activation.
    Chipclass,
    ChipclassExp,
    ChipclassTanh,
    SsvBinary,
    SsvMulticlass,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActivationArg {
    Exp,
    Tanh,
}

fn architecture(arch: ArchArg, activation: Option<ActivationArg>) -> Result<Architecture, String> {
    use ActivationArg::*;
    Ok(match (arch, activation) {
        (ArchArg::Chipclass, None | Some(Exp)) | (ArchArg::ChipclassExp, None | Some(Exp)) => {
            Architecture::ChipclassExp
        }
        (ArchArg::Chipclass | ArchArg::ChipclassTanh, None | Some(Tanh)) => {
            Architecture::ChipclassTanh
        }
        (ArchArg::SsvBinary, None | Some(Tanh)) => Architecture::SsvBinary,
        (ArchArg::SsvMulticlass, None | Some(Tanh)) => Architecture::SsvMulticlass,
        _ => return Err("--activation contradicts --arch".into()),
    })
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pinv,
    Gradient,
}

#[derive(Args)]
struct TrainingArgs {
    /// Output-weight training for ssv-multiclass.
    #[arg(long, value_enum, default_value = "pinv")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    /// Start gradient descent from zero weights instead of the pseudoinverse.
    #[arg(long)]
    zero_init: bool,
}

impl TrainingArgs {
    fn mode(&self) -> TrainingMode {
        match self.mode {
            ModeArg::Pinv => TrainingMode::Pseudoinverse,
            ModeArg::Gradient => TrainingMode::Gradient,
        }
    }

    fn options(&self) -> GradientOptions {
        GradientOptions {
            step: self.step,
            max_epochs: self.epochs,
            init: if self.zero_init {
                GradientInit::Zeros
            } else {
                GradientInit::Pseudoinverse
            },
            ..GradientOptions::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Headed CSV file.
    csv: PathBuf,
    #[arg(long, default_value = "class")]
    label: String,
    #[arg(long, value_enum, default_value = "ssv-binary")]
    arch: ArchArg,
    #[arg(long, value_enum)]
    activation: Option<ActivationArg>,
    #[command(flatten)]
    reg: RegularizationArgs,
    #[command(flatten)]
    training: TrainingArgs,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// CSV holding (at least) the model's feature columns.
    csv: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterSearchArg {
    None,
    Threshold,
    Count,
}

#[derive(Args)]
struct CvArgs {
    /// Experiment config (JSON). Flags below override its fields.
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long, value_enum)]
    arch: Option<ArchArg>,
    #[arg(long, value_enum)]
    activation: Option<ActivationArg>,
    #[arg(long, value_enum)]
    membership: Option<MembershipArg>,
    #[arg(long, value_enum)]
    filter: Option<FilterSearchArg>,
    #[arg(long)]
    sigma_low: Option<f64>,
    #[arg(long)]
    sigma_high: Option<f64>,
    #[arg(long)]
    sigma_count: Option<usize>,
    /// Draw sigma values at random instead of a log grid.
    #[arg(long)]
    sigma_random: bool,
    #[arg(long)]
    outer: Option<usize>,
    #[arg(long)]
    inner: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// JSON report file; the table goes to stdout. Without it the JSON goes
    /// to stdout and the table to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset to benchmark on; omit for a synthetic uniform dataset.
    csv: Option<PathBuf>,
    #[arg(long, default_value = "class")]
    label: String,
    /// Size of the synthetic dataset.
    #[arg(long, default_value_t = 2000)]
    m: usize,
    /// Dimension of the synthetic dataset.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.5")]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failures that end the process, with their exit status.
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_graph(args: &GraphArgs) -> Result<(), Failure> {
    let data = args.input.load()?;
    let graph = if args.witness.is_some() {
        build_graph_with_witness(&data)?
    } else {
        build_graph(&data)?
    };
    let mut out = output(args.out.as_deref())?;
    match args.format {
        GraphFormat::Dot => write_dot(&graph, &data, &mut out)?,
        GraphFormat::Csv => write_edge_csv(&graph, &data, &mut out)?,
    }
    out.flush()?;
    if let Some(path) = &args.witness {
        write_witness_csv(&graph, BufWriter::new(File::create(path)?))?;
    }
    log::info!("{} vertices, {} edges", graph.len(), graph.edge_count());
    Ok(())
}

fn fit_filter(
    data: &Dataset,
    reg: &RegularizationArgs,
) -> Result<(ggm_core::GabrielGraph, FilterModel), Failure> {
    let graph = build_graph(data)?;
    let policy = reg.filter_policy.resolve(data.class_count());
    let filter = FilterModel::fit(&graph, data, reg.membership.into(), reg.sigma, policy)?;
    Ok((graph, filter))
}

fn run_membership(args: &MembershipArgs) -> Result<(), Failure> {
    let data = args.input.load()?;
    let (graph, filter) = fit_filter(&data, &args.reg)?;
    let outcome = filter_samples(&data, &filter)?;
    let q = memberships(&graph, &data, MembershipKind::Cardinality, args.reg.sigma)?;
    let qd = memberships(&graph, &data, MembershipKind::Distance, args.reg.sigma)?;
    let ids: Vec<usize> = (0..data.len()).collect();
    let mut out = output(args.out.as_deref())?;
    write_membership_csv(&data, &ids, &q, &qd, &filter, &outcome, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run_filter(args: &FilterArgs) -> Result<(), Failure> {
    let data = args.input.load()?;
    let (_, filter) = fit_filter(&data, &args.reg)?;
    let outcome = filter_samples(&data, &filter)?;
    let doc = json!({
        "policy": filter.policy,
        "membership": filter.kind,
        "sigma": filter.sigma,
        "thresholds": filter.thresholds,
        "kept": outcome.kept,
        "removed": outcome.removed,
        "rescued_classes": outcome.rescued_classes,
    });
    let mut out = output(args.out.as_deref())?;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&doc).map_err(Error::from)?
    )?;
    out.flush()?;
    log::info!(
        "kept {}, removed {}",
        outcome.kept.len(),
        outcome.removed.len()
    );
    Ok(())
}

fn run_train(args: &TrainArgs) -> Result<(), Failure> {
    let architecture = architecture(args.arch, args.activation).map_err(Failure::Usage)?;
    let data = load_csv(&args.csv, &args.label)?;
    let settings = TrainSettings {
        architecture,
        membership: args.reg.membership.into(),
        sigma: args.reg.sigma,
        policy: args.reg.filter_policy.resolve(data.class_count()),
        mode: args.training.mode(),
        gradient: args.training.options(),
    };
    let fit = train_model(&data, &settings)?;
    std::fs::write(&args.out, fit.model.to_json()?)?;
    log::info!(
        "{architecture}: {} centers, {} removed{}",
        fit.model.center_count(),
        fit.removed.len(),
        if fit.fallback {
            ", unfiltered support used"
        } else {
            ""
        }
    );
    if let Some(report) = &fit.training {
        log::info!(
            "loss {:.6} -> {:.6} in {} epochs",
            report.initial_loss,
            report.final_loss,
            report.epochs
        );
    }
    Ok(())
}

fn run_predict(args: &PredictArgs) -> Result<(), Failure> {
    let model = TrainedModel::from_json(&std::fs::read_to_string(&args.model)?)?;
    let x = read_csv_columns(&args.csv, &model.feature_names)?;
    let probs = model.predict_proba_batch(x.view())?;
    let mut out = output(args.out.as_deref())?;
    write_probability_csv(probs.view(), &model.class_labels, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cv_config(args: &CvArgs, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = &args.dataset {
        config.dataset = Some(d.clone());
    }
    if let Some(l) = &args.label {
        config.label_column = l.clone();
    }
    if let Some(a) = args.arch {
        config.architecture = architecture(a, args.activation).map_err(Failure::Usage)?;
    } else if args.activation.is_some() {
        return Err(Failure::Usage("--activation needs --arch".into()));
    }
    if let Some(m) = args.membership {
        config.membership = m.into();
    }
    if let Some(f) = args.filter {
        config.filter = match f {
            FilterSearchArg::None => FilterSearch::None,
            FilterSearchArg::Threshold => FilterSearch::Threshold,
            FilterSearchArg::Count => FilterSearch::default(),
        };
    }
    let SigmaSearch {
        low,
        high,
        count,
        strategy,
    } = &mut config.sigma;
    *low = args.sigma_low.unwrap_or(*low);
    *high = args.sigma_high.unwrap_or(*high);
    *count = args.sigma_count.unwrap_or(*count);
    if args.sigma_random {
        *strategy = SigmaStrategy::Random;
    }
    config.outer_folds = args.outer.unwrap_or(config.outer_folds);
    config.inner_folds = args.inner.unwrap_or(config.inner_folds);
    if let Some(m) = args.mode {
        config.training_mode = match m {
            ModeArg::Pinv => TrainingMode::Pseudoinverse,
            ModeArg::Gradient => TrainingMode::Gradient,
        };
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if config.dataset.is_none() {
        return Err(Failure::Usage(
            "cv needs a dataset (config field or --dataset)".into(),
        ));
    }
    Ok(config)
}

fn run_cv(args: &CvArgs, seed: Option<u64>, quiet: bool) -> Result<(), Failure> {
    let config = cv_config(args, seed)?;
    let result = run_nested_cv(&config)?;
    let json = serde_json::to_string_pretty(&result.report).map_err(Error::from)?;
    let table = format_table(&result.report);
    match &args.out {
        Some(path) => {
            std::fs::write(path, json + "\n")?;
            if !quiet {
                print!("{table}");
            }
        }
        None => {
            println!("{json}");
            if !quiet {
                eprint!("{table}");
            }
        }
    }
    Ok(())
}

fn run_bench(args: &BenchArgs, seed: u64, quiet: bool) -> Result<(), Failure> {
    let (name, data) = match &args.csv {
        Some(path) => {
            let name = path
                .file_stem()
                .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
            (name, load_csv(path, &args.label)?)
        }
        None => (
            format!("uniform-{}x{}", args.m, args.dim),
            uniform_dataset(args.m, args.dim, seed)?,
        ),
    };
    let (records, samples) = bench_recompute(&name, &data, &args.fractions, args.reps, seed)?;
    let mut out = output(args.out.as_deref())?;
    write_bench_csv(&samples, &mut out)?;
    out.flush()?;
    if !quiet {
        eprintln!(
            "{:>8}  {:>8}  {:>12}  {:>12}  {:>12}",
            "fraction", "removed", "fresh s", "incr s", "counting s"
        );
        for r in &records {
            eprintln!(
                "{:>8.2}  {:>8}  {:>12.6}  {:>12.6}  {:>12.6}",
                r.fraction, r.removed, r.fresh_mean, r.incremental_mean, r.counting_mean
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Graph(a) => run_graph(a),
        Command::Membership(a) => run_membership(a),
        Command::Filter(a) => run_filter(a),
        Command::Train(a) => run_train(a),
        Command::Predict(a) => run_predict(a),
        Command::Cv(a) => run_cv(a, cli.seed, cli.quiet),
        Command::Bench(a) => run_bench(a, cli.seed.unwrap_or(0), cli.quiet),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Data => ExitCode::from(2),
                ErrorKind::Numerical => ExitCode::from(3),
            }
        }
    }
}
