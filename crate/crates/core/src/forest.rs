//! Random forests: greedily grown bagged trees and purely random trees.
//!
//! Each tree draws from its own random stream keyed by `(seed, tree index)`,
//! so a forest is the same whether its trees are fitted serially or in
//! parallel, in any order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::tree::{self, Classifier, DecisionTree, Draft, SplitRule, TreeParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForestMode {
    /// Bagged trees grown by criterion maximisation over a random feature
    /// subset at every node.
    Greedy,
    /// Trees whose partitions ignore the labels: random node, random
    /// feature, uniform threshold, repeated `k_splits` times.
    PurelyRandom,
}

impl ForestMode {
    pub fn name(self) -> &'static str {
        match self {
            ForestMode::Greedy => "greedy",
            ForestMode::PurelyRandom => "purely-random",
        }
    }
}

impl fmt::Display for ForestMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ForestMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(ForestMode::Greedy),
            "purely-random" => Ok(ForestMode::PurelyRandom),
            other => Err(Error::invalid(format!("unknown forest mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Greedy-mode tree settings. A missing `feature_subset` defaults to
    /// `ceil(sqrt(d))`; the tree seed is unused (streams come from `seed`).
    pub tree: TreeParams,
    /// Fit each tree on a size-n resample drawn with replacement.
    pub bootstrap: bool,
    pub mode: ForestMode,
    /// Number of splits per tree in purely random mode.
    pub k_splits: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            tree: TreeParams::default(),
            bootstrap: true,
            mode: ForestMode::Greedy,
            k_splits: 0,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn greedy(n_trees: usize, tree: TreeParams, seed: u64) -> Self {
        ForestParams {
            n_trees,
            tree,
            seed,
            ..ForestParams::default()
        }
    }

    pub fn purely_random(n_trees: usize, k_splits: usize, seed: u64) -> Self {
        ForestParams {
            n_trees,
            mode: ForestMode::PurelyRandom,
            k_splits,
            bootstrap: false,
            seed,
            ..ForestParams::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomForest {
    mode: ForestMode,
    n_features: usize,
    trees: Vec<DecisionTree>,
}

impl Classifier for RandomForest {
    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Majority vote over the trees; an even split goes to +1.
    fn classify(&self, x: &[f64]) -> Label {
        let votes: i64 = self.trees.iter().map(|t| t.classify(x).sign()).sum();
        if votes >= 0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }
}

impl RandomForest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn mode(&self) -> ForestMode {
        self.mode
    }

    /// `FOREST <n_trees> <mode>` followed by each tree's text.
    pub fn to_text(&self) -> String {
        let mut out = format!("FOREST {} {}\n", self.trees.len(), self.mode);
        for t in &self.trees {
            t.write_text(&mut out);
        }
        out
    }

    pub fn from_text(text: &str, n_features: usize) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let header_err = |line: usize| Error::parse("forest", line, None, "expected header `FOREST <n_trees> <mode>`");
        let (i, header) = lines.next().ok_or_else(|| header_err(1))?;
        let (count, mode) = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["FOREST", count, mode] => (
                count.parse::<usize>().map_err(|_| header_err(i + 1))?,
                mode.parse::<ForestMode>().map_err(|_| header_err(i + 1))?,
            ),
            _ => return Err(header_err(i + 1)),
        };
        if count == 0 {
            return Err(Error::parse("forest", i + 1, None, "a forest needs at least one tree"));
        }
        let trees = (0..count)
            .map(|_| tree::parse_tree(&mut lines, n_features, "forest"))
            .collect::<Result<Vec<_>>>()?;
        if let Some((i, _)) = lines.next() {
            return Err(Error::parse(
                "forest",
                i + 1,
                None,
                format!("content after the declared {count} trees"),
            ));
        }
        Ok(RandomForest {
            mode,
            n_features,
            trees,
        })
    }
}

fn validate(ds: &Dataset, params: &ForestParams) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot fit a forest on an empty dataset".into()));
    }
    if params.n_trees == 0 {
        return Err(Error::invalid("a forest needs at least one tree"));
    }
    params.tree.validate(ds.d())
}

/// Fits the forest's trees in parallel.
pub fn fit_forest(ds: &Dataset, params: &ForestParams) -> Result<RandomForest> {
    validate(ds, params)?;
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| fit_member(ds, params, i))
        .collect();
    Ok(RandomForest {
        mode: params.mode,
        n_features: ds.d(),
        trees,
    })
}

/// Fits the forest's trees one after another on the calling thread.
pub fn fit_forest_serial(ds: &Dataset, params: &ForestParams) -> Result<RandomForest> {
    validate(ds, params)?;
    let trees = (0..params.n_trees).map(|i| fit_member(ds, params, i)).collect();
    Ok(RandomForest {
        mode: params.mode,
        n_features: ds.d(),
        trees,
    })
}

fn fit_member(ds: &Dataset, params: &ForestParams, index: usize) -> DecisionTree {
    let mut rng = rng::stream(params.seed, index as u64);
    let samples: Vec<usize> = if params.bootstrap {
        (0..ds.n()).map(|_| rng.gen_range(0..ds.n())).collect()
    } else {
        (0..ds.n()).collect()
    };
    match params.mode {
        ForestMode::Greedy => {
            let d = ds.d();
            let tree_params = TreeParams {
                feature_subset: Some(params.tree.feature_subset.unwrap_or_else(|| default_feature_subset(d))),
                ..params.tree
            };
            tree::grow(ds, samples, &tree_params, &mut rng)
        }
        ForestMode::PurelyRandom => purely_random_tree(ds, samples, params.k_splits, &mut rng),
    }
}

/// `ceil(sqrt(d))`.
pub fn default_feature_subset(d: usize) -> usize {
    let mut k = (d as f64).sqrt().floor() as usize;
    while k * k < d {
        k += 1;
    }
    k.max(1)
}

/// Builds a tree with up to `k_splits` label-independent splits.
///
/// A leaf is expandable when it holds at least two samples and some feature
/// is non-constant on it. Each step picks an expandable leaf and a feature
/// uniformly; if that feature is constant on the leaf the pick is redrawn.
/// The threshold is uniform on the feature's range at the leaf.
fn purely_random_tree(ds: &Dataset, samples: Vec<usize>, k_splits: usize, rng: &mut StreamRng) -> DecisionTree {
    let d = ds.d();
    let range = |samples: &[usize], j: usize| {
        samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            let v = ds.value(i, j);
            (lo.min(v), hi.max(v))
        })
    };
    let splittable = |samples: &[usize]| {
        samples.len() >= 2
            && (0..d).any(|j| {
                let (lo, hi) = range(samples, j);
                lo < hi
            })
    };

    let mut drafts = vec![Draft::Leaf(samples)];
    let mut expandable: Vec<usize> = Vec::new();
    if let Draft::Leaf(s) = &drafts[0] {
        if splittable(s) {
            expandable.push(0);
        }
    }

    let mut made = 0;
    while made < k_splits && !expandable.is_empty() {
        let slot = rng.gen_range(0..expandable.len());
        let node = expandable[slot];
        let j = rng.gen_range(0..d);
        let Draft::Leaf(samples) = &drafts[node] else {
            unreachable!("only leaves are expandable")
        };
        let (lo, hi) = range(samples, j);
        if lo >= hi {
            continue;
        }
        let threshold = lo + rng.gen::<f64>() * (hi - lo);
        let rule = SplitRule { feature: j, threshold };
        let (left, right): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&i| ds.value(i, j) <= threshold);
        if right.is_empty() {
            // threshold rounded up to the maximum
            continue;
        }
        expandable.swap_remove(slot);
        for child in [left, right] {
            if splittable(&child) {
                expandable.push(drafts.len());
            }
            drafts.push(Draft::Leaf(child));
        }
        let (l, r) = (drafts.len() - 2, drafts.len() - 1);
        drafts[node] = Draft::Split {
            rule,
            left: l,
            right: r,
        };
        made += 1;
    }
    tree::assemble(ds, &drafts, 0)
}
