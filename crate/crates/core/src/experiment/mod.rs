//! Experiment presets: seeded multi-run protocol with optional genetic
//! feature selection, aggregation across seeds, and the hidden-size by
//! activation sweep.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate_synthetic, load_dataset, split, Dataset, SplitSpec, SynthConfig};
use crate::error::{Error, Result};
use crate::ga::{evolve, FeatureMask, GaConfig, GaHistory};
use crate::metrics::{report, ClassMetrics, ConfusionMatrix, EvalReport};
use crate::model::input::{StreamInput, StreamNormalizer};
use crate::model::{self, ModelParams, ModelTopology, Scenario};
use crate::nn::{Activation, TrainConfig};
use crate::scalar::Scalar;
use crate::seeds::{self, mix};

/// Where the experiment's samples come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    Synthetic {
        #[serde(default)]
        config: SynthConfig,
    },
    Csv {
        path: PathBuf,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic {
            config: SynthConfig::default(),
        }
    }
}

impl DataSource {
    pub fn load<T: Scalar>(&self) -> Result<Dataset<T>> {
        match self {
            DataSource::Synthetic { config } => generate_synthetic(config),
            DataSource::Csv { path } => load_dataset(path),
        }
    }
}

/// Full specification of a seeded multi-run experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub scenario: Scenario,
    pub train: TrainConfig,
    pub ga: Option<GaConfig>,
    pub run_seeds: Vec<u64>,
    pub train_fraction: f64,
    pub normalize: bool,
    /// When set, the runs use disjoint test folds (one per seed) from a
    /// single shuffle instead of independent reshuffled splits.
    pub five_fold: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataSource::default(),
            scenario: Scenario::LeftOnly,
            train: TrainConfig::default(),
            ga: None,
            run_seeds: vec![1000, 2000, 3000, 4000, 5000],
            train_fraction: 0.8,
            normalize: false,
            five_fold: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.run_seeds.is_empty() {
            return Err(Error::validation("run_seeds must not be empty"));
        }
        let mut sorted = self.run_seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.run_seeds.len() {
            return Err(Error::validation("run_seeds must be distinct"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::validation("train_fraction must lie in (0, 1)"));
        }
        self.train.validate()?;
        if let Some(ga) = &self.ga {
            ga.validate()?;
        }
        if let DataSource::Synthetic { config } = &self.data {
            config.validate()?;
        }
        Ok(())
    }
}

/// Everything produced by one seeded run.
#[derive(Clone, Debug)]
pub struct SeedRun<T> {
    pub seed: u64,
    pub report: EvalReport,
    pub elapsed_s: f64,
    pub params: ModelParams<T>,
    pub mask: Option<FeatureMask>,
    pub history: Option<GaHistory>,
    pub normalizer: Option<StreamNormalizer<T>>,
}

/// Per-seed reports plus their arithmetic mean.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub per_seed: Vec<(u64, EvalReport, f64)>,
    pub aggregate: EvalReport,
}

impl RunSummary {
    fn from_runs<T>(runs: &[SeedRun<T>]) -> Self {
        let per_seed: Vec<(u64, EvalReport, f64)> = runs
            .iter()
            .map(|r| (r.seed, r.report, r.elapsed_s))
            .collect();
        let reports: Vec<EvalReport> = runs.iter().map(|r| r.report).collect();
        RunSummary {
            per_seed,
            aggregate: mean_report(&reports),
        }
    }

    /// One row per seed plus a trailing `mean` row. Elapsed times are
    /// deliberately excluded so identical configurations produce
    /// byte-identical files.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("seed,{}\n", EvalReport::csv_header());
        for (seed, report, _) in &self.per_seed {
            out.push_str(&format!("{seed},{}\n", report.csv_row()));
        }
        out.push_str(&format!("mean,{}\n", self.aggregate.csv_row()));
        out
    }

    /// Human-readable per-seed accuracy lines plus the aggregate table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (seed, report, elapsed) in &self.per_seed {
            out.push_str(&format!(
                "seed {seed}: accuracy {:.2} % ({elapsed:.2} s)\n",
                report.accuracy
            ));
        }
        out.push_str(&format!("\nMean over {} seeds\n", self.per_seed.len()));
        out.push_str(&self.aggregate.render_table());
        out
    }
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Arithmetic mean of each metric; undefined entries are skipped per metric.
pub fn mean_report(reports: &[EvalReport]) -> EvalReport {
    let class = |pick: fn(&EvalReport) -> ClassMetrics| ClassMetrics {
        precision: mean_opt(reports.iter().map(|r| pick(r).precision)),
        recall: mean_opt(reports.iter().map(|r| pick(r).recall)),
        f1: mean_opt(reports.iter().map(|r| pick(r).f1)),
    };
    EvalReport {
        accuracy: reports.iter().map(|r| r.accuracy).sum::<f64>() / reports.len().max(1) as f64,
        genuine: class(|r| r.genuine),
        posed: class(|r| r.posed),
        macro_precision: mean_opt(reports.iter().map(|r| r.macro_precision)),
        macro_recall: mean_opt(reports.iter().map(|r| r.macro_recall)),
        macro_f1: mean_opt(reports.iter().map(|r| r.macro_f1)),
    }
}

/// Disjoint index folds from one seeded shuffle, sizes differing by at most
/// one.
fn kfold_partitions(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || n < 2 * k {
        return Err(Error::validation(format!(
            "{n} samples cannot form {k} usable folds"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    indices.shuffle(&mut seeds::rng(mix(seed, &[seeds::TAG_KFOLD])));
    let mut folds = vec![Vec::new(); k];
    for (i, idx) in indices.into_iter().enumerate() {
        folds[i % k].push(idx);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

fn partition_by_indices<T: Scalar>(ds: &Dataset<T>, test_idx: &[usize]) -> (Dataset<T>, Dataset<T>) {
    let in_test: std::collections::HashSet<usize> = test_idx.iter().copied().collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, sample) in ds.samples().iter().enumerate() {
        if in_test.contains(&i) {
            test.push(sample.clone());
        } else {
            train.push(sample.clone());
        }
    }
    (
        Dataset::from_validated(train),
        Dataset::from_validated(test),
    )
}

/// Runs one seed end to end: split, optional mask evolution on the training
/// portion only, full retraining on the whole training portion, evaluation
/// on the held-out test portion.
pub fn run_single_seed<T: Scalar>(
    cfg: &ExperimentConfig,
    ds: &Dataset<T>,
    seed: u64,
) -> Result<SeedRun<T>> {
    let start = Instant::now();
    let (train_ds, test_ds) = if cfg.five_fold {
        let k = cfg.run_seeds.len();
        let fold_index = cfg
            .run_seeds
            .iter()
            .position(|&s| s == seed)
            .ok_or_else(|| Error::validation(format!("seed {seed} not in run_seeds")))?;
        let folds = kfold_partitions(ds.len(), k, cfg.run_seeds[0])?;
        partition_by_indices(ds, &folds[fold_index])
    } else {
        split(
            ds,
            &SplitSpec {
                train_fraction: cfg.train_fraction,
                seed,
            },
        )?
    };

    let (mask, history) = match &cfg.ga {
        None => (None, None),
        Some(ga_cfg) => {
            let ga_run = GaConfig {
                seed: mix(ga_cfg.seed, &[seeds::TAG_RUN_GA, seed]),
                ..ga_cfg.clone()
            };
            let (mask, history) =
                evolve(&train_ds, cfg.scenario, &ga_run, &cfg.train, cfg.normalize)?;
            (Some(mask), Some(history))
        }
    };

    let mut train_input = StreamInput::from_dataset(&train_ds, cfg.scenario)?;
    let mut test_input = StreamInput::from_dataset(&test_ds, cfg.scenario)?;
    let normalizer = cfg.normalize.then(|| train_input.fit_normalizer());
    if let Some(norm) = &normalizer {
        train_input.normalize(norm);
        test_input.normalize(norm);
    }

    let topology = ModelTopology {
        kind: cfg.scenario.kind(),
        input_dim: StreamInput::<T>::input_dim(mask.as_ref()),
        hidden_units: cfg.train.hidden_units,
        activation: cfg.train.activation,
    };
    let mut train_cfg = cfg.train.clone();
    train_cfg.init_seed = mix(cfg.train.init_seed, &[seeds::TAG_RUN_FINAL_INIT, seed]);
    let batch = train_input.batch(mask.as_ref())?;
    let (params, _) = model::train(topology, &batch, &train_input.label_indices(), &train_cfg)?;

    let preds = params.predict_batch(&test_input.batch(mask.as_ref())?)?;
    let cm = ConfusionMatrix::from_labels(&preds, test_input.labels())?;
    Ok(SeedRun {
        seed,
        report: report(&cm)?,
        elapsed_s: start.elapsed().as_secs_f64(),
        params,
        mask,
        history,
        normalizer,
    })
}

/// Runs every seed of the experiment (in parallel; results are ordered and
/// identical to sequential execution) and aggregates the reports.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig) -> Result<(RunSummary, Vec<SeedRun<T>>)> {
    cfg.validate()?;
    let ds: Dataset<T> = cfg.data.load()?;
    let runs: Vec<SeedRun<T>> = cfg
        .run_seeds
        .par_iter()
        .map(|&seed| run_single_seed(cfg, &ds, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok((RunSummary::from_runs(&runs), runs))
}

/// Table-shaped sweep result: rows are hidden sizes, columns activations,
/// cells mean test accuracy (percent) over the configured seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub hidden: Vec<usize>,
    pub activations: Vec<Activation>,
    pub cells: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn render_text(&self) -> String {
        let mut out = format!("{:>4}", "n");
        for act in &self.activations {
            out.push_str(&format!(" {:>8}", act.label()));
        }
        out.push('\n');
        for (row, &h) in self.hidden.iter().enumerate() {
            out.push_str(&format!("{h:>4}"));
            for cell in &self.cells[row] {
                out.push_str(&format!(" {cell:>8.2}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("hidden");
        for act in &self.activations {
            out.push_str(&format!(",{act}"));
        }
        out.push('\n');
        for (row, &h) in self.hidden.iter().enumerate() {
            out.push_str(&h.to_string());
            for cell in &self.cells[row] {
                out.push_str(&format!(",{cell}"));
            }
            out.push('\n');
        }
        out
    }
}

const SWEEP_HIDDEN_GRID: [usize; 6] = [30, 40, 50, 60, 70, 80];

/// Mean-accuracy grid over hidden sizes and activations, each cell a full
/// seeded experiment without feature selection.
pub fn sweep_baseline<T: Scalar>(
    cfg: &ExperimentConfig,
    hidden: &[usize],
    activations: &[Activation],
) -> Result<SweepTable> {
    if hidden.is_empty() || activations.is_empty() {
        return Err(Error::validation("sweep grid must not be empty"));
    }
    if let Some(bad) = hidden.iter().find(|h| !SWEEP_HIDDEN_GRID.contains(h)) {
        return Err(Error::validation(format!(
            "hidden size {bad} outside the sweep grid {SWEEP_HIDDEN_GRID:?}"
        )));
    }
    let mut cells = Vec::with_capacity(hidden.len());
    for &h in hidden {
        let mut row = Vec::with_capacity(activations.len());
        for &act in activations {
            let cell_cfg = ExperimentConfig {
                ga: None,
                train: TrainConfig {
                    hidden_units: h,
                    activation: act,
                    ..cfg.train.clone()
                },
                ..cfg.clone()
            };
            let (summary, _) = run_experiment::<T>(&cell_cfg)?;
            row.push(summary.aggregate.accuracy);
        }
        cells.push(row);
    }
    Ok(SweepTable {
        hidden: hidden.to_vec(),
        activations: activations.to_vec(),
        cells,
    })
}
