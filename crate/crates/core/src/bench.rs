//! Experiment harness: noise, leaf-size and training-size sweeps.
//!
//! A sweep is described by an [`ExperimentConfig`], read from a plain
//! `key = value` file and/or set key by key from the command line. For every
//! repeat the data is regenerated (or reshuffled) from a repeat-derived seed,
//! each noise model is injected into the training and validation parts, each
//! learner is fitted, and accuracy is measured on the clean test part.
//!
//! Seeds inside repeat `r` are derived from `derive_seed(seed, r)`, so a cell
//! depends only on the master seed, the repeat index and its own settings.
//! All noise models of one repeat share a noise seed, which makes symmetric
//! flips nested across noise levels.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::criteria::Criterion;
use crate::data::{load_table, split_dataset, Dataset, SplitSpec, Synthetic, TableOptions};
use crate::error::{Error, Result};
use crate::forest::{fit_forest, ForestParams};
use crate::noise::{inject_noise, NoiseModel};
use crate::rng::derive_seed;
use crate::tree::{fit_tree, Classifier, TreeParams};

const SEED_DATA: u64 = 0;
const SEED_SPLIT: u64 = 1;
const SEED_NOISE: u64 = 2;
const SEED_VALIDATION_NOISE: u64 = 3;
const SEED_LEARNER: u64 = 4;
const SEED_TEST: u64 = 5;

/// Where the data of a sweep comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Synthetic(Synthetic),
    /// A delimited table, read with the native options (comma, header row,
    /// label in the last column).
    File(PathBuf),
}

impl DataSource {
    pub fn name(&self) -> String {
        match self {
            DataSource::Synthetic(s) => s.name().to_string(),
            DataSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
        }
    }
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSource::Synthetic(s) => write!(f, "{s}"),
            DataSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(DataSource::File(PathBuf::from(path))),
            Some(_) => Err(Error::invalid("file: dataset needs a path")),
            None => s.parse().map(DataSource::Synthetic),
        }
    }
}

/// A learner in a sweep: `tree:<criterion>`, `forest:<criterion>` or
/// `prf:<k_splits>` (purely random forest).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Learner {
    Tree(Criterion),
    Forest(Criterion),
    PurelyRandom(usize),
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Learner::Tree(c) => write!(f, "tree:{c}"),
            Learner::Forest(c) => write!(f, "forest:{c}"),
            Learner::PurelyRandom(k) => write!(f, "prf:{k}"),
        }
    }
}

impl FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').ok_or_else(|| {
            Error::invalid(format!(
                "learner {s:?} must look like tree:gini, forest:gini or prf:<k>"
            ))
        })?;
        match kind {
            "tree" => Ok(Learner::Tree(arg.parse()?)),
            "forest" => Ok(Learner::Forest(arg.parse()?)),
            "prf" => arg
                .trim()
                .parse()
                .map(Learner::PurelyRandom)
                .map_err(|_| Error::invalid(format!("prf needs a split count, got {arg:?}"))),
            other => Err(Error::invalid(format!(
                "unknown learner kind {other:?} (expected tree, forest or prf)"
            ))),
        }
    }
}

/// Settings of a sweep. Every field is reachable through [`ExperimentConfig::set`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DataSource>,
    /// Generated sample count; `None` uses each generator's default size.
    pub n: Option<usize>,
    pub split: (f64, f64, f64),
    /// Clean test points generated for the training-size sweep.
    pub test_size: usize,
    pub noise: Vec<NoiseModel>,
    pub learners: Vec<Learner>,
    pub min_leaf: usize,
    /// Training-size sweep only: min_leaf becomes `max(1, round(fraction · size))`.
    pub min_leaf_fraction: Option<f64>,
    pub max_depth: Option<usize>,
    pub trees: usize,
    pub repeats: usize,
    pub seed: Option<u64>,
    /// Score on the (clean) training part instead of the test part.
    pub test_on_train: bool,
    pub leaf_sizes: Vec<usize>,
    pub sizes: Vec<usize>,
    pub output: Option<PathBuf>,
    pub runs_output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: vec![DataSource::Synthetic(Synthetic::Checkerboard2)],
            n: None,
            split: (0.6, 0.2, 0.2),
            test_size: 4000,
            noise: [0.0, 0.1, 0.2, 0.3, 0.4]
                .into_iter()
                .map(NoiseModel::Symmetric)
                .chain([NoiseModel::ClassConditional { pos: 0.4, neg: 0.2 }])
                .collect(),
            learners: vec![Learner::Tree(Criterion::Gini), Learner::Forest(Criterion::Gini)],
            min_leaf: 250,
            min_leaf_fraction: None,
            max_depth: None,
            trees: 100,
            repeats: 10,
            seed: None,
            test_on_train: false,
            leaf_sizes: vec![1, 5, 10, 25, 50, 100, 150, 200, 250],
            sizes: vec![100, 200, 400, 1000, 2000, 4000, 10000],
            output: None,
            runs_output: None,
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(';').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse {value:?}")))
}

fn parse_num_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split([';', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| parse_num(key, v))
        .collect()
}

fn parse_optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value.trim() {
        "" | "none" => Ok(None),
        v => parse_num(key, v).map(Some),
    }
}

impl ExperimentConfig {
    /// Keys accepted by [`ExperimentConfig::set`], in documentation order.
    pub const KEYS: [&'static str; 17] = [
        "dataset",
        "n",
        "split",
        "test_size",
        "noise",
        "learners",
        "min_leaf",
        "min_leaf_fraction",
        "max_depth",
        "trees",
        "repeats",
        "seed",
        "test_on_train",
        "leaf_sizes",
        "sizes",
        "output",
        "runs_output",
    ];

    /// Sets one key. Lists (`dataset`, `noise`, `learners`) are separated by
    /// `;`; numeric lists also accept `,`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "dataset" => self.datasets = list(value).map(str::parse).collect::<Result<_>>()?,
            "n" => self.n = parse_optional(key, value)?,
            "split" => {
                let parts: Vec<f64> = value
                    .split([',', ';'])
                    .map(|v| parse_num(key, v))
                    .collect::<Result<_>>()?;
                match parts[..] {
                    [t, v, s] => self.split = (t, v, s),
                    _ => return Err(Error::invalid(format!("split needs three fractions, got {value:?}"))),
                }
            }
            "test_size" => self.test_size = parse_num(key, value)?,
            "noise" => self.noise = list(value).map(str::parse).collect::<Result<_>>()?,
            "learners" | "learner" => self.learners = list(value).map(str::parse).collect::<Result<_>>()?,
            "min_leaf" => self.min_leaf = parse_num(key, value)?,
            "min_leaf_fraction" => self.min_leaf_fraction = parse_optional(key, value)?,
            "max_depth" => self.max_depth = parse_optional(key, value)?,
            "trees" => self.trees = parse_num(key, value)?,
            "repeats" => self.repeats = parse_num(key, value)?,
            "seed" => self.seed = Some(parse_num(key, value)?),
            "test_on_train" => self.test_on_train = parse_num(key, value)?,
            "leaf_sizes" => self.leaf_sizes = parse_num_list(key, value)?,
            "sizes" => self.sizes = parse_num_list(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "runs_output" => self.runs_output = Some(PathBuf::from(value)),
            other => {
                return Err(Error::invalid(format!(
                    "unknown key {other:?} (known keys: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key = value` text over `self`. Blank lines and lines
    /// starting with `#` are skipped; errors carry the line number.
    pub fn apply_text(&mut self, text: &str, source_name: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source_name, i + 1, None, format!("expected key = value, got {line:?}")))?;
            self.set(key, value)
                .map_err(|e| Error::parse(source_name, i + 1, None, e.to_string()))?;
        }
        Ok(())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text, source_name)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::invalid("no dataset given"));
        }
        if self.noise.is_empty() {
            return Err(Error::invalid("no noise model given"));
        }
        if self.learners.is_empty() {
            return Err(Error::invalid("no learner given"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if self.trees == 0 {
            return Err(Error::invalid("trees must be at least 1"));
        }
        if self.min_leaf == 0 {
            return Err(Error::invalid("min_leaf must be at least 1"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::invalid("max_depth must be positive when set"));
        }
        if let Some(f) = self.min_leaf_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid(format!("min_leaf_fraction {f} outside (0, 1)")));
            }
        }
        if self.n == Some(0) || self.test_size == 0 {
            return Err(Error::invalid("sample counts must be positive"));
        }
        for m in &self.noise {
            m.validate()?;
        }
        SplitSpec::new(self.split.0, self.split.1, self.split.2, 0)?;
        Ok(())
    }

    /// The master seed, which sweeps require.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::invalid("a seed is required (set seed = <u64> or pass --seed)"))
    }
}

/// One fitted learner scored once.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub learner: String,
    pub noise: String,
    pub repeat: usize,
    /// Test accuracy in percent.
    pub accuracy: f64,
}

/// Aggregated cell: mean and sample standard deviation over repeats.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub learner: String,
    pub noise: String,
    pub mean: f64,
    pub std: f64,
    pub repeats: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

pub const TABLE_HEADER: [&str; 6] = ["dataset", "learner", "noise", "mean", "std", "repeats"];
pub const RUNS_HEADER: [&str; 5] = ["dataset", "learner", "noise", "repeat", "accuracy"];

fn csv_error(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

impl ResultTable {
    /// Groups consecutive runs of the same cell, in the order they appear.
    pub fn from_runs(runs: &[RunRecord]) -> ResultTable {
        let mut rows: Vec<ResultRow> = Vec::new();
        let mut start = 0;
        while start < runs.len() {
            let head = &runs[start];
            let end = start
                + runs[start..]
                    .iter()
                    .take_while(|r| r.dataset == head.dataset && r.learner == head.learner && r.noise == head.noise)
                    .count();
            let acc: Vec<f64> = runs[start..end].iter().map(|r| r.accuracy).collect();
            let (mean, std) = mean_std(&acc);
            rows.push(ResultRow {
                dataset: head.dataset.clone(),
                learner: head.learner.clone(),
                noise: head.noise.clone(),
                mean,
                std,
                repeats: acc.len(),
            });
            start = end;
        }
        ResultTable { rows }
    }

    pub fn find(&self, dataset: &str, learner: &str, noise: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.learner == learner && r.noise == noise)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TABLE_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.dataset.as_str(),
                r.learner.as_str(),
                r.noise.as_str(),
                &format!("{:.2}", r.mean),
                &format!("{:.2}", r.std),
                &r.repeats.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Reads a table written by [`ResultTable::to_csv`]. Means and standard
    /// deviations come back rounded to two decimals.
    pub fn from_csv(text: &str) -> Result<ResultTable> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(csv_error)?;
        if header.iter().ne(TABLE_HEADER) {
            return Err(Error::parse("table", 1, None, format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            let line = i + 2;
            let num = |j: usize| -> Result<f64> {
                rec[j]
                    .parse()
                    .map_err(|_| Error::parse("table", line, Some(j + 1), format!("bad number {:?}", &rec[j])))
            };
            rows.push(ResultRow {
                dataset: rec[0].to_string(),
                learner: rec[1].to_string(),
                noise: rec[2].to_string(),
                mean: num(3)?,
                std: num(4)?,
                repeats: rec[5]
                    .parse()
                    .map_err(|_| Error::parse("table", line, Some(6), "bad repeat count"))?,
            });
        }
        Ok(ResultTable { rows })
    }
}

/// Mean and (n-1)-denominator standard deviation; the deviation of a single
/// value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn emit_table(table: &ResultTable, path: &Path) -> Result<()> {
    fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}

pub fn runs_to_csv(runs: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RUNS_HEADER).expect("in-memory write");
    for r in runs {
        w.write_record([
            r.dataset.as_str(),
            r.learner.as_str(),
            r.noise.as_str(),
            &r.repeat.to_string(),
            &r.accuracy.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Reads a per-run log written by [`runs_to_csv`]. Accuracies round-trip exactly.
pub fn runs_from_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(RUNS_HEADER) {
        return Err(Error::parse("runs", 1, None, format!("unexpected header {header:?}")));
    }
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_error)?;
            let bad = |col: usize| Error::parse("runs", i + 2, Some(col), "bad number");
            Ok(RunRecord {
                dataset: rec[0].to_string(),
                learner: rec[1].to_string(),
                noise: rec[2].to_string(),
                repeat: rec[3].parse().map_err(|_| bad(4))?,
                accuracy: rec[4].parse().map_err(|_| bad(5))?,
            })
        })
        .collect()
}

/// Output of a sweep: the aggregated table and every individual run, both in
/// config order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub table: ResultTable,
    pub runs: Vec<RunRecord>,
}

impl SweepResult {
    /// Writes the table and run log to the paths named in `cfg`, if any.
    pub fn write_outputs(&self, cfg: &ExperimentConfig) -> Result<()> {
        if let Some(p) = &cfg.output {
            emit_table(&self.table, p)?;
        }
        if let Some(p) = &cfg.runs_output {
            fs::write(p, runs_to_csv(&self.runs)).map_err(|e| Error::io(p, e))?;
        }
        Ok(())
    }
}

struct Parts {
    train: Dataset,
    validation: Dataset,
    test: Dataset,
}

/// One setting of the swept parameter: a label suffix, an optional training
/// size and the leaf size to use.
#[derive(Clone, Debug)]
struct Variant {
    dataset_suffix: String,
    learner_suffix: String,
    train_size: Option<usize>,
    min_leaf: usize,
}

fn prepare(
    cfg: &ExperimentConfig,
    source: &DataSource,
    loaded: Option<&Dataset>,
    repeat_seed: u64,
    train_size: Option<usize>,
) -> Result<Parts> {
    let split = |ds: &Dataset| -> Result<Parts> {
        let (t, v, s) = cfg.split;
        let spec = SplitSpec::new(t, v, s, derive_seed(repeat_seed, SEED_SPLIT))?;
        let (train, validation, test) = split_dataset(ds, &spec)?;
        Ok(Parts {
            train,
            validation,
            test,
        })
    };
    let mut parts = match (source, train_size) {
        (DataSource::Synthetic(s), None) => {
            let n = cfg.n.unwrap_or_else(|| s.default_size());
            split(&s.generate(n, derive_seed(repeat_seed, SEED_DATA))?)?
        }
        (DataSource::Synthetic(s), Some(size)) => {
            // A prefix of one long draw, so larger training sets extend smaller ones.
            let train = s.generate(size, derive_seed(repeat_seed, SEED_DATA))?;
            let n_val = ((size as f64) * cfg.split.1 / cfg.split.0).floor() as usize;
            let validation = s.generate(n_val.max(1), derive_seed(repeat_seed, SEED_SPLIT))?;
            let test = s.generate(cfg.test_size, derive_seed(repeat_seed, SEED_TEST))?;
            Parts {
                train,
                validation,
                test,
            }
        }
        (DataSource::File(_), size) => {
            let mut parts = split(loaded.expect("file sources are loaded up front"))?;
            if let Some(size) = size {
                if size > parts.train.n() {
                    return Err(Error::invalid(format!(
                        "training size {size} exceeds the {} training rows available",
                        parts.train.n()
                    )));
                }
                parts.train = parts.train.subset(&(0..size).collect::<Vec<_>>());
            }
            parts
        }
    };
    if cfg.test_on_train {
        parts.test = parts.train.clone();
    }
    Ok(parts)
}

fn fit_and_score(
    cfg: &ExperimentConfig,
    learner: Learner,
    train: &Dataset,
    test: &Dataset,
    min_leaf: usize,
    seed: u64,
) -> Result<f64> {
    let tree = TreeParams {
        max_depth: cfg.max_depth,
        seed,
        ..TreeParams::new(Criterion::Gini, min_leaf)
    };
    let accuracy = match learner {
        Learner::Tree(criterion) => fit_tree(train, &TreeParams { criterion, ..tree })?.accuracy(test)?,
        Learner::Forest(criterion) => {
            let params = ForestParams::greedy(cfg.trees, TreeParams { criterion, ..tree }, seed);
            fit_forest(train, &params)?.accuracy(test)?
        }
        Learner::PurelyRandom(k) => {
            fit_forest(train, &ForestParams::purely_random(cfg.trees, k, seed))?.accuracy(test)?
        }
    };
    Ok(100.0 * accuracy)
}

/// Runs every (dataset, variant, learner, noise) cell for every repeat.
/// Repeats run in parallel; output order is dataset, variant, learner, noise,
/// repeat.
fn run_variants(cfg: &ExperimentConfig, variants: &[Variant]) -> Result<SweepResult> {
    cfg.validate()?;
    let seed = cfg.require_seed()?;
    let native = TableOptions::native();
    let loaded: Vec<Option<Dataset>> = cfg
        .datasets
        .iter()
        .map(|src| match src {
            DataSource::File(p) => load_table(p, &native).map(Some),
            DataSource::Synthetic(_) => Ok(None),
        })
        .collect::<Result<_>>()?;

    let n_cells = variants.len() * cfg.learners.len() * cfg.noise.len();
    let jobs: Vec<(usize, usize)> = (0..cfg.datasets.len())
        .flat_map(|d| (0..cfg.repeats).map(move |r| (d, r)))
        .collect();
    // One job per (dataset, repeat); it returns accuracies in cell order.
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(d, r)| -> Result<Vec<f64>> {
            let repeat_seed = derive_seed(seed, r as u64);
            let learner_seed = derive_seed(repeat_seed, SEED_LEARNER);
            let mut out = Vec::with_capacity(n_cells);
            let mut cached: Option<(Option<usize>, Parts)> = None;
            for v in variants {
                if cached.as_ref().map(|(size, _)| *size) != Some(v.train_size) {
                    let parts = prepare(cfg, &cfg.datasets[d], loaded[d].as_ref(), repeat_seed, v.train_size)?;
                    cached = Some((v.train_size, parts));
                }
                let parts = &cached.as_ref().expect("just filled").1;
                let noisy: Vec<Dataset> = cfg
                    .noise
                    .iter()
                    .map(|&m| {
                        // Validation labels are corrupted as the protocol asks, though nothing reads them.
                        inject_noise(&parts.validation, m, derive_seed(repeat_seed, SEED_VALIDATION_NOISE))?;
                        Ok(inject_noise(&parts.train, m, derive_seed(repeat_seed, SEED_NOISE))?.into_data())
                    })
                    .collect::<Result<_>>()?;
                for &learner in &cfg.learners {
                    for train in &noisy {
                        out.push(fit_and_score(
                            cfg,
                            learner,
                            train,
                            &parts.test,
                            v.min_leaf,
                            learner_seed,
                        )?);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut runs = Vec::with_capacity(jobs.len() * n_cells);
    for (d, source) in cfg.datasets.iter().enumerate() {
        let per_repeat = &results[d * cfg.repeats..(d + 1) * cfg.repeats];
        let mut cell = 0;
        for v in variants {
            for learner in &cfg.learners {
                for noise in &cfg.noise {
                    for (r, accs) in per_repeat.iter().enumerate() {
                        runs.push(RunRecord {
                            dataset: format!("{}{}", source.name(), v.dataset_suffix),
                            learner: format!("{learner}{}", v.learner_suffix),
                            noise: noise.to_string(),
                            repeat: r,
                            accuracy: accs[cell],
                        });
                    }
                    cell += 1;
                }
            }
        }
    }
    Ok(SweepResult {
        table: ResultTable::from_runs(&runs),
        runs,
    })
}

/// Accuracy of every learner under every noise model, on the configured split.
pub fn run_noise_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_variants(
        cfg,
        &[Variant {
            dataset_suffix: String::new(),
            learner_suffix: String::new(),
            train_size: None,
            min_leaf: cfg.min_leaf,
        }],
    )
}

/// The noise sweep repeated for each minimum leaf size. Learner labels gain a
/// `[min_leaf=k]` suffix. The data of a repeat does not depend on the leaf
/// size, so each cell equals the noise-sweep cell run with that `min_leaf`.
pub fn run_leaf_size_sweep(cfg: &ExperimentConfig, leaf_sizes: &[usize]) -> Result<SweepResult> {
    if leaf_sizes.is_empty() || leaf_sizes.contains(&0) {
        return Err(Error::invalid(
            "leaf sizes must be a non-empty list of positive integers",
        ));
    }
    let variants: Vec<Variant> = leaf_sizes
        .iter()
        .map(|&k| Variant {
            dataset_suffix: String::new(),
            learner_suffix: format!("[min_leaf={k}]"),
            train_size: None,
            min_leaf: k,
        })
        .collect();
    run_variants(cfg, &variants)
}

/// The noise sweep repeated for each training-set size, scored on a fixed
/// clean test set of `test_size` points per repeat. Dataset labels gain a
/// `[train=n]` suffix.
pub fn run_training_size_sweep(cfg: &ExperimentConfig, sizes: &[usize]) -> Result<SweepResult> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::invalid(
            "training sizes must be a non-empty list of positive integers",
        ));
    }
    let variants: Vec<Variant> = sizes
        .iter()
        .map(|&s| Variant {
            dataset_suffix: format!("[train={s}]"),
            learner_suffix: String::new(),
            train_size: Some(s),
            min_leaf: size_min_leaf(cfg, s),
        })
        .collect();
    run_variants(cfg, &variants)
}

/// Leaf size used at training size `size` in the training-size sweep.
pub fn size_min_leaf(cfg: &ExperimentConfig, size: usize) -> usize {
    match cfg.min_leaf_fraction {
        Some(f) => ((f * size as f64).round() as usize).max(1),
        None => cfg.min_leaf,
    }
}
