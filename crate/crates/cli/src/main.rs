//! `veracity` — train, evaluate and feature-select pupillary classifiers.
//!
//! Subcommands: `generate` (synthetic CSV), `train`, `gfs` (train with
//! genetic feature selection), `sweep` (hidden-size x activation grid) and
//! `report` (evaluate a checkpoint on a dataset). A TOML config file can set
//! every option; command-line flags win over the file.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use veracity::data::{
    corrupt_positions, generate_synthetic, load_dataset, write_dataset, SynthConfig,
};
use veracity::error::{Error, Result};
use veracity::experiment::{run_experiment, sweep_baseline, DataSource, ExperimentConfig};
use veracity::ga::{GaConfig, SelectionScope};
use veracity::metrics::{report as metrics_report, ConfusionMatrix, EvalReport};
use veracity::model::input::StreamInput;
use veracity::model::{load_checkpoint, save_checkpoint, Checkpoint, Scenario};
use veracity::nn::Activation;

#[derive(Parser)]
#[command(
    name = "veracity",
    version,
    about = "Pupillary time-series classification with genetic feature selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as CSV
    Generate(GenerateArgs),
    /// Train over the configured seeds and report test metrics
    Train(TrainArgs),
    /// Train with genetic feature selection before the final fit
    Gfs(GfsArgs),
    /// Mean-accuracy grid over hidden sizes and activations
    Sweep(SweepArgs),
    /// Evaluate a saved checkpoint on a dataset CSV
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML experiment config; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts, masks and checkpoints
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Dataset CSV (overrides the config data source)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Use the synthetic generator (overrides the config data source)
    #[arg(long)]
    synthetic: bool,
    #[command(flatten)]
    synth: SynthArgs,
}

#[derive(Args, Clone)]
struct SynthArgs {
    /// Synthetic: number of observers
    #[arg(long)]
    observers: Option<usize>,
    /// Synthetic: number of videos per observer
    #[arg(long)]
    videos: Option<usize>,
    /// Synthetic: minimum recording length
    #[arg(long)]
    min_len: Option<usize>,
    /// Synthetic: maximum recording length
    #[arg(long)]
    max_len: Option<usize>,
    /// Synthetic: first timestep of the signal window
    #[arg(long)]
    signal_start: Option<usize>,
    /// Synthetic: one past the last timestep of the signal window
    #[arg(long)]
    signal_end: Option<usize>,
    /// Synthetic: per-timestep Gaussian noise (mm)
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Synthetic: blink dropout probability per timestep
    #[arg(long)]
    blink_rate: Option<f64>,
    /// Synthetic: right-eye bump scale in [0, 1]
    #[arg(long)]
    eye_correlation: Option<f64>,
    /// Synthetic: generator seed
    #[arg(long)]
    data_seed: Option<u64>,
}

#[derive(Args, Clone)]
struct ModelFlags {
    /// Stream scenario: left-only, right-only, left-right, left-diff, right-diff
    #[arg(long)]
    scenario: Option<String>,
    /// Hidden units per stream
    #[arg(long)]
    hidden: Option<usize>,
    /// Activation: relu, tanh or sigmoid
    #[arg(long)]
    activation: Option<String>,
    /// Training epochs for the final fit
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Coupled L2 weight decay
    #[arg(long)]
    weight_decay: Option<f64>,
    /// Single run seed (shorthand for --seeds with one value)
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated run seeds
    #[arg(long)]
    seeds: Option<String>,
    /// Z-score features from training statistics
    #[arg(long)]
    normalize: bool,
    /// Disjoint test folds (one per seed) instead of reshuffled splits
    #[arg(long)]
    five_fold: bool,
    /// Training fraction of the outer split
    #[arg(long)]
    train_fraction: Option<f64>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    synth: SynthArgs,
    /// Replace this fraction of timestep positions with pure noise
    #[arg(long)]
    corrupt_fraction: Option<f64>,
    /// Mean of the corruption noise (mm)
    #[arg(long, default_value_t = 3.5)]
    corrupt_mean: f64,
    /// Standard deviation of the corruption noise (mm)
    #[arg(long, default_value_t = 1.5)]
    corrupt_sd: f64,
    /// Seed of the corruption draw
    #[arg(long, default_value_t = 0)]
    corrupt_seed: u64,
    /// Output file (defaults to <out>/dataset.csv)
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct GfsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelFlags,
    /// GA generations
    #[arg(long)]
    generations: Option<usize>,
    /// GA population size (odd; tournament group count follows)
    #[arg(long)]
    population: Option<usize>,
    /// Members per tournament group
    #[arg(long)]
    tournament_size: Option<usize>,
    /// Per-bit mutation probability
    #[arg(long)]
    mutation_rate: Option<f64>,
    /// Training epochs per fitness evaluation
    #[arg(long)]
    fitness_epochs: Option<usize>,
    /// GA seed
    #[arg(long)]
    ga_seed: Option<u64>,
    /// Parent-selection scope: group or population
    #[arg(long)]
    selection_scope: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelFlags,
    /// Comma-separated hidden sizes from {30,40,50,60,70,80}
    #[arg(long, default_value = "30,40,50,60,70,80")]
    hidden_list: String,
    /// Comma-separated activations
    #[arg(long, default_value = "relu,tanh,sigmoid")]
    activations: String,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Checkpoint produced by `train` or `gfs`
    #[arg(long)]
    model: PathBuf,
    /// Dataset CSV to evaluate on
    #[arg(long)]
    data: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Gfs(args) => cmd_gfs(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Numeric(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| {
                Error::validation(format!("config {}: {e}", path.display()))
            })
        }
    }
}

fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::validation(format!("bad {what} value {s:?}")))
        })
        .collect()
}

fn apply_synth_flags(cfg: &mut SynthConfig, args: &SynthArgs) {
    if let Some(v) = args.observers {
        cfg.n_observers = v;
    }
    if let Some(v) = args.videos {
        cfg.n_videos = v;
    }
    if let Some(v) = args.min_len {
        cfg.length_range.0 = v;
    }
    if let Some(v) = args.max_len {
        cfg.length_range.1 = v;
    }
    if let Some(v) = args.signal_start {
        cfg.signal_window.0 = v;
    }
    if let Some(v) = args.signal_end {
        cfg.signal_window.1 = v;
    }
    if let Some(v) = args.noise_sd {
        cfg.noise_sd = v;
    }
    if let Some(v) = args.blink_rate {
        cfg.blink_rate = v;
    }
    if let Some(v) = args.eye_correlation {
        cfg.eye_correlation = v;
    }
    if let Some(v) = args.data_seed {
        cfg.seed = v;
    }
}

fn apply_data_flags(cfg: &mut ExperimentConfig, args: &DataArgs) -> Result<()> {
    if args.data.is_some() && args.synthetic {
        return Err(Error::validation("--data and --synthetic are exclusive"));
    }
    if let Some(path) = &args.data {
        cfg.data = DataSource::Csv { path: path.clone() };
    } else if args.synthetic {
        cfg.data = DataSource::Synthetic {
            config: SynthConfig::default(),
        };
    }
    if let DataSource::Synthetic { config } = &mut cfg.data {
        apply_synth_flags(config, &args.synth);
    }
    Ok(())
}

fn apply_model_flags(cfg: &mut ExperimentConfig, args: &ModelFlags) -> Result<()> {
    if let Some(s) = &args.scenario {
        cfg.scenario = Scenario::from_str(s)?;
    }
    if let Some(h) = args.hidden {
        cfg.train.hidden_units = h;
    }
    if let Some(a) = &args.activation {
        cfg.train.activation = Activation::from_str(a)?;
    }
    if let Some(e) = args.epochs {
        cfg.train.epochs = e;
    }
    if let Some(lr) = args.learning_rate {
        cfg.train.learning_rate = lr;
    }
    if let Some(wd) = args.weight_decay {
        cfg.train.weight_decay = wd;
    }
    if let Some(f) = args.train_fraction {
        cfg.train_fraction = f;
    }
    match (&args.seed, &args.seeds) {
        (Some(_), Some(_)) => {
            return Err(Error::validation("--seed and --seeds are exclusive"))
        }
        (Some(seed), None) => cfg.run_seeds = vec![*seed],
        (None, Some(list)) => cfg.run_seeds = parse_list(list, "seed")?,
        (None, None) => {}
    }
    if args.normalize {
        cfg.normalize = true;
    }
    if args.five_fold {
        cfg.five_fold = true;
    }
    Ok(())
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let base = load_config(args.common.config.as_deref())?;
    let mut synth = match base.data {
        DataSource::Synthetic { config } => config,
        DataSource::Csv { .. } => SynthConfig::default(),
    };
    apply_synth_flags(&mut synth, &args.synth);
    let mut ds = generate_synthetic::<f64>(&synth)?;
    if let Some(fraction) = args.corrupt_fraction {
        ds = corrupt_positions(
            &ds,
            fraction,
            args.corrupt_mean,
            args.corrupt_sd,
            args.corrupt_seed,
        )?;
    }
    let path = match args.file {
        Some(path) => path,
        None => {
            ensure_out_dir(&args.common.out)?;
            args.common.out.join("dataset.csv")
        }
    };
    write_dataset(&ds, &path)?;
    println!("wrote {} samples to {}", ds.len(), path.display());
    Ok(())
}

fn run_and_save(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let (summary, runs) = run_experiment::<f64>(cfg)?;
    print!("{}", summary.render_text());
    std::fs::write(out.join("summary.csv"), summary.to_csv_string())?;
    for run in &runs {
        let ckpt = Checkpoint {
            params: run.params.clone(),
            scenario: cfg.scenario,
            mask: run.mask.clone(),
            normalizer: run.normalizer.clone(),
        };
        save_checkpoint(&ckpt, out.join(format!("model_{}.ckpt", run.seed)))?;
        if let Some(history) = &run.history {
            std::fs::write(
                out.join(format!("ga_history_{}.csv", run.seed)),
                history.to_csv_string(),
            )?;
        }
        if let Some(mask) = &run.mask {
            std::fs::write(
                out.join(format!("best_mask_{}.txt", run.seed)),
                format!("{}\n", mask.to_01_string()),
            )?;
        }
    }
    println!("artifacts written to {}", out.display());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut cfg = load_config(args.common.config.as_deref())?;
    cfg.ga = None;
    apply_data_flags(&mut cfg, &args.data)?;
    apply_model_flags(&mut cfg, &args.model)?;
    run_and_save(&cfg, &args.common.out)
}

fn cmd_gfs(args: GfsArgs) -> Result<()> {
    let mut cfg = load_config(args.common.config.as_deref())?;
    apply_data_flags(&mut cfg, &args.data)?;
    apply_model_flags(&mut cfg, &args.model)?;
    let mut ga = cfg.ga.take().unwrap_or_default();
    if let Some(p) = args.population {
        let derived = GaConfig::for_population(p)?;
        ga.population_size = derived.population_size;
        ga.tournament_group_count = derived.tournament_group_count;
        ga.tournament_group_size = ga.tournament_group_size.min(p);
    }
    if let Some(g) = args.generations {
        ga.generations = g;
    }
    if let Some(t) = args.tournament_size {
        ga.tournament_group_size = t;
    }
    if let Some(m) = args.mutation_rate {
        ga.mutation_rate = m;
    }
    if let Some(e) = args.fitness_epochs {
        ga.fitness_epochs = e;
    }
    if let Some(s) = args.ga_seed {
        ga.seed = s;
    }
    if let Some(scope) = &args.selection_scope {
        ga.selection_scope = match scope.trim().to_ascii_lowercase().as_str() {
            "group" => SelectionScope::Group,
            "population" => SelectionScope::Population,
            other => {
                return Err(Error::validation(format!(
                    "unknown selection scope {other:?} (expected group or population)"
                )))
            }
        };
    }
    cfg.ga = Some(ga);
    run_and_save(&cfg, &args.common.out)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = load_config(args.common.config.as_deref())?;
    cfg.ga = None;
    apply_data_flags(&mut cfg, &args.data)?;
    apply_model_flags(&mut cfg, &args.model)?;
    let hidden: Vec<usize> = parse_list(&args.hidden_list, "hidden size")?;
    let activations: Vec<Activation> = args
        .activations
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Activation::from_str)
        .collect::<Result<_>>()?;
    let table = sweep_baseline::<f64>(&cfg, &hidden, &activations)?;
    print!("{}", table.render_text());
    ensure_out_dir(&args.common.out)?;
    std::fs::write(args.common.out.join("sweep.csv"), table.to_csv_string())?;
    println!("artifacts written to {}", args.common.out.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let ckpt: Checkpoint<f64> = load_checkpoint(&args.model)?;
    let ds = load_dataset::<f64>(&args.data)?;
    let mut input = StreamInput::from_dataset(&ds, ckpt.scenario)?;
    if let Some(norm) = &ckpt.normalizer {
        input.normalize(norm);
    }
    let preds = ckpt.params.predict_batch(&input.batch(ckpt.mask.as_ref())?)?;
    let cm = ConfusionMatrix::from_labels(&preds, input.labels())?;
    let report = metrics_report(&cm)?;
    print!("{}", report.render_table());
    ensure_out_dir(&args.common.out)?;
    let csv = format!("{}\n{}\n", EvalReport::csv_header(), report.csv_row());
    std::fs::write(args.common.out.join("report.csv"), csv)?;
    println!("artifacts written to {}", args.common.out.display());
    Ok(())
}
