//! Datasets, synthetic generators, delimited-table I/O and train/validation/test splits.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Binary class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// +1 or -1.
    pub fn sign(self) -> i64 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    /// Majority label of a count pair. Ties go to `Pos`.
    pub fn majority(n_pos: u64, n_neg: u64) -> Label {
        if n_pos >= n_neg {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn is_pos(self) -> bool {
        self == Label::Pos
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Pos => "+1",
            Label::Neg => "-1",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" => Ok(Label::Pos),
            "-1" => Ok(Label::Neg),
            other => Err(Error::invalid(format!("label must be +1 or -1, got {other:?}"))),
        }
    }
}

/// Labelled samples with `d` real features each, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    d: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
}

impl Dataset {
    /// Builds a dataset from a flat row-major feature buffer.
    pub fn new(d: usize, features: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        if features.len() != d * labels.len() {
            return Err(Error::invalid(format!(
                "{} feature values do not form {} rows of dimension {d}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Dataset { d, features, labels })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: rows[i].len(),
            });
        }
        Dataset::new(d, rows.concat(), labels)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.d + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.d)
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Number of `+1` labels.
    pub fn count_pos(&self) -> usize {
        self.labels.iter().filter(|l| l.is_pos()).count()
    }

    /// Same features with replacement labels.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Dataset> {
        if labels.len() != self.n() {
            return Err(Error::invalid(format!(
                "expected {} labels, got {}",
                self.n(),
                labels.len()
            )));
        }
        Ok(Dataset {
            d: self.d,
            features: self.features.clone(),
            labels,
        })
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            d: self.d,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Comma-separated text with header `f0,...,f{d-1},label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.d {
            out.push_str(&format!("f{j},"));
        }
        out.push_str("label\n");
        for (row, label) in self.rows().zip(&self.labels) {
            for v in row {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{label}\n"));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Options for reading delimiter-separated tables.
#[derive(Clone, Debug)]
pub struct TableOptions {
    pub delimiter: char,
    pub has_header: bool,
    /// Zero-based label column; `None` means the last column.
    pub label_column: Option<usize>,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            delimiter: ',',
            has_header: false,
            label_column: None,
        }
    }
}

impl TableOptions {
    /// Options matching the files written by [`Dataset::to_csv`].
    pub fn native() -> Self {
        TableOptions {
            has_header: true,
            ..TableOptions::default()
        }
    }
}

/// Reads a delimited table of numeric features and a two-valued label column.
///
/// Raw labels are mapped to {+1, -1} by ordering the two distinct values: if
/// both parse as numbers the numerically larger becomes +1, otherwise the
/// lexicographically larger string does. A single numeric label value maps
/// to +1 when positive and -1 otherwise.
pub fn load_table(path: &Path, options: &TableOptions) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, &path.display().to_string(), options)
}

pub fn parse_table(text: &str, source_name: &str, options: &TableOptions) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    if options.has_header {
        lines.next();
    }

    let mut width = None;
    let mut label_col = 0;
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let cells: Vec<&str> = line.split(options.delimiter).map(str::trim).collect();
        match width {
            None => {
                if cells.len() < 2 {
                    return Err(Error::parse(
                        source_name,
                        lineno,
                        None,
                        "need at least one feature column and a label column",
                    ));
                }
                label_col = options.label_column.unwrap_or(cells.len() - 1);
                if label_col >= cells.len() {
                    return Err(Error::parse(
                        source_name,
                        lineno,
                        None,
                        format!("label column {label_col} out of range for {} columns", cells.len()),
                    ));
                }
                width = Some(cells.len());
            }
            Some(w) if w != cells.len() => {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    None,
                    format!("expected {w} columns, found {}", cells.len()),
                ));
            }
            Some(_) => {}
        }
        for (col, cell) in cells.iter().enumerate() {
            if col == label_col {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::parse(
                    source_name,
                    lineno,
                    Some(col + 1),
                    format!("cannot parse {cell:?} as a number"),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    Some(col + 1),
                    "feature is not finite",
                ));
            }
            features.push(v);
        }
    }

    let Some(width) = width else {
        return Err(Error::Empty(format!("{source_name} has no data rows")));
    };
    let labels = map_labels(&raw_labels, source_name)?;
    Dataset::new(width - 1, features, labels)
}

fn map_labels(raw: &[String], source_name: &str) -> Result<Vec<Label>> {
    let mut alphabet: Vec<&str> = raw.iter().map(String::as_str).collect();
    alphabet.sort_unstable();
    alphabet.dedup();
    if alphabet.len() > 2 {
        return Err(Error::parse(
            source_name,
            0,
            None,
            format!(
                "label column has {} distinct values, expected two: {:?}",
                alphabet.len(),
                alphabet
            ),
        ));
    }
    let numeric: Option<Vec<f64>> = alphabet.iter().map(|s| s.parse::<f64>().ok()).collect();
    let positive: &str = match (numeric, alphabet.as_slice()) {
        (Some(vals), [only]) => {
            if vals[0] > 0.0 {
                only
            } else {
                ""
            }
        }
        (Some(vals), [a, b]) => {
            if vals[0] > vals[1] {
                a
            } else {
                b
            }
        }
        (None, [a, b]) => std::cmp::max(*a, *b),
        (None, [only]) => {
            return Err(Error::parse(
                source_name,
                0,
                None,
                format!("single non-numeric label value {only:?} cannot be mapped to +1/-1"),
            ))
        }
        _ => unreachable!("non-empty tables have at least one label"),
    };
    Ok(raw
        .iter()
        .map(|s| if s == positive { Label::Pos } else { Label::Neg })
        .collect())
}

/// Label of a point on a `grid`×`grid` checkerboard over [0, grid]².
///
/// Cells are indexed by the floor of each coordinate (a coordinate equal to
/// `grid` falls in the last cell); the label is +1 on cells whose index sum
/// is even.
pub fn checkerboard_label(grid: u32, x: &[f64]) -> Label {
    let cell = |v: f64| (v.floor() as i64).clamp(0, i64::from(grid) - 1);
    if (cell(x[0]) + cell(x[1])) % 2 == 0 {
        Label::Pos
    } else {
        Label::Neg
    }
}

/// `n` points uniform on [0, grid]² labelled by [`checkerboard_label`].
pub fn generate_checkerboard(grid: u32, n: usize, seed: u64) -> Result<Dataset> {
    if grid != 2 && grid != 4 {
        return Err(Error::invalid(format!("checkerboard grid must be 2 or 4, got {grid}")));
    }
    if n == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let mut rng = rng::seeded(seed);
    let side = f64::from(grid);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = [rng.gen::<f64>() * side, rng.gen::<f64>() * side];
        features.extend_from_slice(&x);
        labels.push(checkerboard_label(grid, &x));
    }
    Dataset::new(2, features, labels)
}

/// Two-dimensional imbalanced linearly separable data.
///
/// Class +1 is uniform on [0,0.5]×[0,1] in both variants. Class -1 is uniform
/// on [0.5,1]×[0,1] with prior 0.1 (variant 3), or on [0.5,0.7]×[0.4,0.6]
/// with prior 0.2 (variant 4). Each sample's class is drawn from the prior.
pub fn generate_imbalanced_linear(variant: u32, n: usize, seed: u64) -> Result<Dataset> {
    let (prior_pos, neg_x, neg_y) = match variant {
        3 => (0.9, (0.5, 1.0), (0.0, 1.0)),
        4 => (0.8, (0.5, 0.7), (0.4, 0.6)),
        _ => {
            return Err(Error::invalid(format!(
                "linear dataset variant must be 3 or 4, got {variant}"
            )))
        }
    };
    if n == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let mut rng = rng::seeded(seed);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.gen::<f64>() < prior_pos {
            features.push(rng.gen_range(0.0..0.5));
            features.push(rng.gen_range(0.0..1.0));
            labels.push(Label::Pos);
        } else {
            features.push(rng.gen_range(neg_x.0..neg_x.1));
            features.push(rng.gen_range(neg_y.0..neg_y.1));
            labels.push(Label::Neg);
        }
    }
    Dataset::new(2, features, labels)
}

/// The four synthetic benchmark datasets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Synthetic {
    Checkerboard2,
    Checkerboard4,
    Linear3,
    Linear4,
}

impl Synthetic {
    pub fn generate(self, n: usize, seed: u64) -> Result<Dataset> {
        match self {
            Synthetic::Checkerboard2 => generate_checkerboard(2, n, seed),
            Synthetic::Checkerboard4 => generate_checkerboard(4, n, seed),
            Synthetic::Linear3 => generate_imbalanced_linear(3, n, seed),
            Synthetic::Linear4 => generate_imbalanced_linear(4, n, seed),
        }
    }

    /// Sample count used for the accuracy tables.
    pub fn default_size(self) -> usize {
        match self {
            Synthetic::Checkerboard2 | Synthetic::Checkerboard4 => 30_000,
            Synthetic::Linear3 | Synthetic::Linear4 => 40_000,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Synthetic::Checkerboard2 => "cb2",
            Synthetic::Checkerboard4 => "cb4",
            Synthetic::Linear3 => "linear3",
            Synthetic::Linear4 => "linear4",
        }
    }
}

impl fmt::Display for Synthetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Synthetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cb2" | "checkerboard2" => Ok(Synthetic::Checkerboard2),
            "cb4" | "checkerboard4" => Ok(Synthetic::Checkerboard4),
            "linear3" | "dataset3" => Ok(Synthetic::Linear3),
            "linear4" | "dataset4" => Ok(Synthetic::Linear4),
            other => Err(Error::invalid(format!(
                "unknown dataset {other:?} (expected cb2, cb4, linear3 or linear4)"
            ))),
        }
    }
}

/// Train/validation/test fractions and the shuffle seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, validation: f64, test: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train,
            validation,
            test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 60/20/20.
    pub fn standard(seed: u64) -> Self {
        SplitSpec {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("train", self.train),
            ("validation", self.validation),
            ("test", self.test),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::invalid(format!("{name} fraction {f} outside [0, 1]")));
            }
        }
        let total = self.train + self.validation + self.test;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("split fractions sum to {total}, not 1")));
        }
        Ok(())
    }

    /// (train, validation, test) sizes for `n` rows; the rounding remainder goes to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // The epsilon keeps products like 0.2 * 10 from flooring to 1.
        let count = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
        let validation = count(self.validation);
        let test = count(self.test);
        (n - validation - test, validation, test)
    }
}

/// Shuffled index partition `(train, validation, test)` of `0..n`.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 samples to split, got {n}")));
    }
    let (n_train, n_val, n_test) = spec.sizes(n);
    if spec.test > 0.0 && n_test == 0 {
        return Err(Error::invalid(format!(
            "test fraction {} leaves an empty test set for n = {n}",
            spec.test
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(spec.seed));
    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok((order, validation, test))
}

/// Partitions `ds` into (train, validation, test) by a seeded shuffle.
pub fn split_dataset(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let (train, validation, test) = split_indices(ds.n(), spec)?;
    Ok((ds.subset(&train), ds.subset(&validation), ds.subset(&test)))
}
