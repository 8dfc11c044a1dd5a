//! Greedy top-down induction of axis-aligned binary decision trees.
//!
//! Internal nodes route `x` left iff `x[feature] <= threshold`. Leaves are
//! labelled by majority vote over their training samples, ties going to +1.
//! Split selection maximises a [`Criterion`] over midpoint thresholds of
//! every feature; equal criterion values are resolved towards the lower
//! feature index and then the lower threshold. There is no pruning.

use std::fmt::Write as _;

use rand::seq::index;

use crate::criteria::Criterion;
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Criterion values at or below this are treated as "no gain".
pub const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeParams {
    pub criterion: Criterion,
    /// Minimum number of training samples in each child of a split.
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Number of features examined at each node, drawn afresh per node.
    /// `None` examines all of them.
    pub feature_subset: Option<usize>,
    /// Seeds the per-node feature draws.
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            criterion: Criterion::Gini,
            min_leaf: 1,
            max_depth: None,
            feature_subset: None,
            seed: 0,
        }
    }
}

impl TreeParams {
    pub fn new(criterion: Criterion, min_leaf: usize) -> Self {
        TreeParams {
            criterion,
            min_leaf,
            ..TreeParams::default()
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::invalid("min_leaf must be at least 1"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::invalid("max_depth must be positive when set"));
        }
        if let Some(k) = self.feature_subset {
            if k == 0 || k > d {
                return Err(Error::invalid(format!("feature_subset {k} must lie in 1..={d}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRule {
    pub feature: usize,
    pub threshold: f64,
}

impl SplitRule {
    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        x[self.feature] <= self.threshold
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestSplit {
    pub rule: SplitRule,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: Label,
        n_pos: u64,
        n_neg: u64,
    },
}

/// A fitted binary tree. Nodes are stored in pre-order with the root at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    n_features: usize,
    nodes: Vec<Node>,
}

/// Something that labels feature vectors of a fixed dimension.
pub trait Classifier {
    fn n_features(&self) -> usize;

    /// Label for `x`, assuming `x.len() == self.n_features()`.
    fn classify(&self, x: &[f64]) -> Label;

    fn predict(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.len(),
            });
        }
        Ok(self.classify(x))
    }

    /// Fraction of `ds` classified correctly.
    fn accuracy(&self, ds: &Dataset) -> Result<f64> {
        if ds.d() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: ds.d(),
            });
        }
        if ds.is_empty() {
            return Err(Error::Empty("cannot score an empty dataset".into()));
        }
        let correct = ds
            .rows()
            .zip(ds.labels())
            .filter(|(x, &y)| self.classify(x) == y)
            .count();
        Ok(correct as f64 / ds.n() as f64)
    }
}

impl Classifier for DecisionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn classify(&self, x: &[f64]) -> Label {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { label, .. } => label,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }
}

impl DecisionTree {
    /// A one-node tree.
    pub fn leaf(n_features: usize, label: Label, n_pos: u64, n_neg: u64) -> Self {
        DecisionTree {
            n_features,
            nodes: vec![Node::Leaf { label, n_pos, n_neg }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            match self.nodes[i] {
                Node::Split { left, right, .. } => {
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
                Node::Leaf { .. } => deepest = deepest.max(d),
            }
        }
        deepest
    }

    /// Index of the leaf `x` is routed to.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
                Node::Leaf { .. } => return i,
            }
        }
    }

    /// Line-oriented pre-order text: `N <feature> <threshold>` for splits,
    /// `L <label> <n+> <n->` for leaves. Thresholds round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out);
        out
    }

    pub(crate) fn write_text(&self, out: &mut String) {
        for node in &self.nodes {
            match node {
                Node::Split { feature, threshold, .. } => writeln!(out, "N {feature} {threshold}"),
                Node::Leaf { label, n_pos, n_neg } => writeln!(out, "L {label} {n_pos} {n_neg}"),
            }
            .expect("writing to a String cannot fail");
        }
    }

    /// Parses [`DecisionTree::to_text`] output for inputs of dimension `n_features`.
    pub fn from_text(text: &str, n_features: usize) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let tree = parse_tree(&mut lines, n_features, "tree")?;
        if let Some((i, _)) = lines.next() {
            return Err(Error::parse(
                "tree",
                i + 1,
                None,
                "trailing content after a complete tree",
            ));
        }
        Ok(tree)
    }
}

/// Consumes exactly one pre-order tree from `lines`.
pub(crate) fn parse_tree<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    n_features: usize,
    source: &str,
) -> Result<DecisionTree> {
    let mut nodes: Vec<Node> = Vec::new();
    // splits still missing a child, with whether the left one is filled
    let mut open: Vec<(usize, bool)> = Vec::new();
    loop {
        let Some((i, line)) = lines.next() else {
            return Err(Error::parse(source, 0, None, "unexpected end of input inside a tree"));
        };
        let lineno = i + 1;
        let err = |msg: String| Error::parse(source, lineno, None, msg);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let node = match tokens.as_slice() {
            ["N", feature, threshold] => {
                let feature: usize = feature
                    .parse()
                    .map_err(|_| err(format!("bad feature index {feature:?}")))?;
                let threshold: f64 = threshold
                    .parse()
                    .map_err(|_| err(format!("bad threshold {threshold:?}")))?;
                if feature >= n_features {
                    return Err(err(format!(
                        "feature {feature} out of range for dimension {n_features}"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(err("threshold is not finite".into()));
                }
                Node::Split {
                    feature,
                    threshold,
                    left: 0,
                    right: 0,
                }
            }
            ["L", label, n_pos, n_neg] => Node::Leaf {
                label: label.parse().map_err(|_| err(format!("bad leaf label {label:?}")))?,
                n_pos: n_pos.parse().map_err(|_| err(format!("bad count {n_pos:?}")))?,
                n_neg: n_neg.parse().map_err(|_| err(format!("bad count {n_neg:?}")))?,
            },
            _ => {
                return Err(err(format!(
                    "expected `N <feature> <threshold>` or `L <label> <n+> <n->`, got {line:?}"
                )))
            }
        };
        let idx = nodes.len();
        let is_split = matches!(node, Node::Split { .. });
        nodes.push(node);
        if let Some(&(parent, left_filled)) = open.last() {
            if let Node::Split { left, right, .. } = &mut nodes[parent] {
                if left_filled {
                    *right = idx;
                    open.pop();
                } else {
                    *left = idx;
                    open.last_mut().expect("checked above").1 = true;
                }
            }
        }
        if is_split {
            open.push((idx, false));
        }
        if open.is_empty() {
            return Ok(DecisionTree { n_features, nodes });
        }
    }
}

/// Midpoints between consecutive distinct values, ascending.
pub fn candidate_splits(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sorted.dedup();
    sorted.windows(2).map(|w| midpoint(w[0], w[1])).collect()
}

/// A threshold `t` with `lo <= t < hi`, for `lo < hi`.
#[inline]
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Best split of `samples` over all features.
pub fn best_split(ds: &Dataset, samples: &[usize], params: &TreeParams) -> Option<BestSplit> {
    let features: Vec<usize> = (0..ds.d()).collect();
    SplitSearch::new(ds, params).best(samples, &features)
}

/// Reusable buffers for split search.
struct SplitSearch<'a> {
    ds: &'a Dataset,
    criterion: Criterion,
    min_leaf: usize,
    column: Vec<(f64, bool)>,
}

impl<'a> SplitSearch<'a> {
    fn new(ds: &'a Dataset, params: &TreeParams) -> Self {
        SplitSearch {
            ds,
            criterion: params.criterion,
            min_leaf: params.min_leaf,
            column: Vec::new(),
        }
    }

    /// Scans `features` in the given (ascending) order and thresholds in
    /// ascending order, keeping the first strict maximum.
    fn best(&mut self, samples: &[usize], features: &[usize]) -> Option<BestSplit> {
        let n = samples.len();
        if n < 2 * self.min_leaf || n < 2 {
            return None;
        }
        let n_pos = samples.iter().filter(|&&i| self.ds.label(i).is_pos()).count() as u64;
        let mut best: Option<BestSplit> = None;
        for &j in features {
            self.column.clear();
            self.column.extend(
                samples
                    .iter()
                    .map(|&i| (self.ds.value(i, j), self.ds.label(i).is_pos())),
            );
            self.column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_pos = 0u64;
            for k in 0..n - 1 {
                left_pos += u64::from(self.column[k].1);
                let n_left = k + 1;
                if n_left < self.min_leaf {
                    continue;
                }
                if n - n_left < self.min_leaf {
                    break;
                }
                let (lo, hi) = (self.column[k].0, self.column[k + 1].0);
                if lo == hi {
                    continue;
                }
                let value =
                    self.criterion
                        .evaluate_counts(n_left as u64, left_pos, (n - n_left) as u64, n_pos - left_pos);
                if best.is_none_or(|b| value > b.gain) {
                    best = Some(BestSplit {
                        rule: SplitRule {
                            feature: j,
                            threshold: midpoint(lo, hi),
                        },
                        gain: value,
                    });
                }
            }
        }
        best.filter(|b| b.gain > MIN_GAIN)
    }
}

/// Grows a tree on all of `ds`.
pub fn fit_tree(ds: &Dataset, params: &TreeParams) -> Result<DecisionTree> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot fit a tree on an empty dataset".into()));
    }
    params.validate(ds.d())?;
    let mut rng = rng::seeded(params.seed);
    Ok(grow(ds, (0..ds.n()).collect(), params, &mut rng))
}

/// A node still to grow: its samples, its depth and the parent slot to patch.
type Pending = (Vec<usize>, usize, Option<(usize, bool)>);

/// Grows a tree on `samples` (indices into `ds`, repeats allowed).
pub(crate) fn grow(ds: &Dataset, samples: Vec<usize>, params: &TreeParams, rng: &mut StreamRng) -> DecisionTree {
    let d = ds.d();
    let subset = params.feature_subset.filter(|&k| k < d);
    let all_features: Vec<usize> = (0..d).collect();
    let mut search = SplitSearch::new(ds, params);
    let mut nodes: Vec<Node> = Vec::new();

    // Right children are pushed before left ones so the arena comes out in pre-order.
    let mut stack: Vec<Pending> = vec![(samples, 0, None)];
    while let Some((samples, depth, parent)) = stack.pop() {
        let idx = nodes.len();
        if let Some((p, is_left)) = parent {
            if let Node::Split { left, right, .. } = &mut nodes[p] {
                *(if is_left { left } else { right }) = idx;
            }
        }

        let depth_ok = params.max_depth.is_none_or(|m| depth < m);
        let split = if depth_ok {
            match subset {
                Some(k) => {
                    let mut features = index::sample(rng, d, k).into_vec();
                    features.sort_unstable();
                    search.best(&samples, &features)
                }
                None => search.best(&samples, &all_features),
            }
        } else {
            None
        };

        match split {
            Some(BestSplit { rule, .. }) => {
                let (left, right): (Vec<usize>, Vec<usize>) = samples
                    .iter()
                    .partition(|&&i| ds.value(i, rule.feature) <= rule.threshold);
                nodes.push(Node::Split {
                    feature: rule.feature,
                    threshold: rule.threshold,
                    left: 0,
                    right: 0,
                });
                stack.push((right, depth + 1, Some((idx, false))));
                stack.push((left, depth + 1, Some((idx, true))));
            }
            None => nodes.push(leaf_for(ds, &samples)),
        }
    }
    DecisionTree { n_features: d, nodes }
}

pub(crate) fn leaf_for(ds: &Dataset, samples: &[usize]) -> Node {
    let n_pos = samples.iter().filter(|&&i| ds.label(i).is_pos()).count() as u64;
    let n_neg = samples.len() as u64 - n_pos;
    Node::Leaf {
        label: Label::majority(n_pos, n_neg),
        n_pos,
        n_neg,
    }
}

/// A tree under construction whose nodes may be stored in any order.
pub(crate) enum Draft {
    Leaf(Vec<usize>),
    Split { rule: SplitRule, left: usize, right: usize },
}

/// Lays out `drafts` (rooted at `root`) as a pre-order tree with
/// majority-vote leaves.
pub(crate) fn assemble(ds: &Dataset, drafts: &[Draft], root: usize) -> DecisionTree {
    let mut nodes = Vec::with_capacity(drafts.len());
    let mut stack: Vec<(usize, Option<(usize, bool)>)> = vec![(root, None)];
    while let Some((draft, parent)) = stack.pop() {
        let idx = nodes.len();
        if let Some((p, is_left)) = parent {
            if let Node::Split { left, right, .. } = &mut nodes[p] {
                *(if is_left { left } else { right }) = idx;
            }
        }
        match &drafts[draft] {
            Draft::Leaf(samples) => nodes.push(leaf_for(ds, samples)),
            Draft::Split { rule, left, right } => {
                nodes.push(Node::Split {
                    feature: rule.feature,
                    threshold: rule.threshold,
                    left: 0,
                    right: 0,
                });
                stack.push((*right, Some((idx, false))));
                stack.push((*left, Some((idx, true))));
            }
        }
    }
    DecisionTree {
        n_features: ds.d(),
        nodes,
    }
}

/// Structural equality: same shape, same split features, thresholds within
/// `threshold_tol`, same leaf labels. Leaf counts are ignored.
pub fn trees_equal(a: &DecisionTree, b: &DecisionTree, threshold_tol: f64) -> bool {
    // Pre-order layout of a full binary tree determines its shape, so a
    // node-by-node walk compares topology too.
    a.nodes.len() == b.nodes.len()
        && a.nodes.iter().zip(&b.nodes).all(|pair| match pair {
            (
                Node::Split {
                    feature: fa,
                    threshold: ta,
                    ..
                },
                Node::Split {
                    feature: fb,
                    threshold: tb,
                    ..
                },
            ) => fa == fb && (ta - tb).abs() <= threshold_tol,
            (Node::Leaf { label: la, .. }, Node::Leaf { label: lb, .. }) => la == lb,
            _ => false,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{leaf_sample_bound, BoundCriterion, BoundQuery};
    use crate::data::{
        checkerboard_label, generate_checkerboard, generate_imbalanced_linear, split_dataset, SplitSpec,
    };
    use crate::noise::{inject_noise, NoiseModel, NonUniform};
    use proptest::prelude::*;
    use rand::Rng;

    fn one_d(values: &[f64], labels: &[Label]) -> Dataset {
        Dataset::new(1, values.to_vec(), labels.to_vec()).unwrap()
    }

    #[test]
    fn candidate_split_examples() {
        assert_eq!(candidate_splits(&[1.0, 3.0]), vec![2.0]);
        assert!(candidate_splits(&[5.0, 5.0, 5.0]).is_empty());
        assert_eq!(candidate_splits(&[4.0, 1.0, 0.0, 1.0]), vec![0.5, 2.5]);
    }

    #[test]
    fn midpoint_of_adjacent_floats_stays_below_upper() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = midpoint(lo, hi);
        assert!(lo <= t && t < hi);
    }

    /// Exhaustive O(n^2) search by direct counting.
    fn brute_force_best(ds: &Dataset, criterion: Criterion, min_leaf: usize) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..ds.d() {
            let values: Vec<f64> = (0..ds.n()).map(|i| ds.value(i, j)).collect();
            for t in candidate_splits(&values) {
                let (mut nl, mut nlp, mut nr, mut nrp) = (0u64, 0u64, 0u64, 0u64);
                for i in 0..ds.n() {
                    let pos = u64::from(ds.label(i).is_pos());
                    if ds.value(i, j) <= t {
                        nl += 1;
                        nlp += pos;
                    } else {
                        nr += 1;
                        nrp += pos;
                    }
                }
                if (nl as usize) < min_leaf || (nr as usize) < min_leaf {
                    continue;
                }
                let s = crate::criteria::SplitStats::new(nl, nlp, nr, nrp).unwrap();
                let g = criterion.evaluate(&s.fractions().unwrap());
                if best.is_none_or(|b| g > b.2) {
                    best = Some((j, t, g));
                }
            }
        }
        best
    }

    #[test]
    fn best_split_on_checkerboard_slab_matches_exhaustive_search() {
        let cb = generate_checkerboard(2, 4000, 12).unwrap();
        let slab: Vec<usize> = (0..cb.n()).filter(|&i| cb.value(i, 1) < 1.0).take(1000).collect();
        let ds = cb.subset(&slab);
        let params = TreeParams::new(Criterion::Gini, 1);
        let found = best_split(&ds, &(0..ds.n()).collect::<Vec<_>>(), &params).unwrap();
        let (j, t, g) = brute_force_best(&ds, Criterion::Gini, 1).unwrap();
        assert_eq!(found.rule.feature, j);
        assert_eq!(found.rule.threshold, t);
        assert!((found.gain - g).abs() < 1e-12);
        assert_eq!(j, 0);
        assert!((t - 1.0).abs() < 0.05, "threshold {t}");
        assert!((g - 0.5).abs() < 0.01, "gain {g}");
    }

    #[test]
    fn best_split_matches_exhaustive_search_for_every_criterion() {
        let cb = generate_checkerboard(4, 300, 5).unwrap();
        let noisy = inject_noise(&cb, NoiseModel::Symmetric(0.2), 1).unwrap();
        let ds = noisy.data();
        let all: Vec<usize> = (0..ds.n()).collect();
        for criterion in Criterion::ALL {
            for min_leaf in [1, 7, 40] {
                let found = best_split(ds, &all, &TreeParams::new(criterion, min_leaf));
                let brute = brute_force_best(ds, criterion, min_leaf).filter(|b| b.2 > MIN_GAIN);
                match (found, brute) {
                    (Some(f), Some((j, t, g))) => {
                        assert_eq!((f.rule.feature, f.rule.threshold), (j, t), "{criterion} {min_leaf}");
                        assert!((f.gain - g).abs() < 1e-12);
                    }
                    (None, None) => {}
                    other => panic!("{criterion} {min_leaf}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn best_split_none_for_pure_node() {
        let ds = one_d(&[1.0, 2.0, 3.0, 4.0], &[Label::Neg; 4]);
        assert!(best_split(&ds, &[0, 1, 2, 3], &TreeParams::default()).is_none());
    }

    #[test]
    fn best_split_forced_two_point_split() {
        let ds = one_d(&[0.0, 1.0], &[Label::Pos, Label::Neg]);
        let s = best_split(&ds, &[0, 1], &TreeParams::default()).unwrap();
        assert_eq!(
            s.rule,
            SplitRule {
                feature: 0,
                threshold: 0.5
            }
        );
        assert_eq!(s.gain, 0.5);
    }

    #[test]
    fn best_split_tie_prefers_lower_feature_then_lower_threshold() {
        // both features separate the classes identically
        let ds = Dataset::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]],
            vec![Label::Pos, Label::Pos, Label::Neg, Label::Neg],
        )
        .unwrap();
        let s = best_split(&ds, &[0, 1, 2, 3], &TreeParams::default()).unwrap();
        assert_eq!(
            s.rule,
            SplitRule {
                feature: 0,
                threshold: 1.5
            }
        );
        // symmetric pattern: thresholds 0.5 and 2.5 tie under twoing
        let ds = one_d(&[0.0, 1.0, 2.0, 3.0], &[Label::Pos, Label::Neg, Label::Neg, Label::Pos]);
        let s = best_split(&ds, &[0, 1, 2, 3], &TreeParams::new(Criterion::Twoing, 1)).unwrap();
        assert_eq!(s.rule.threshold, 0.5);
    }

    #[test]
    fn best_split_respects_min_leaf() {
        let ds = one_d(
            &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            &[Label::Pos, Label::Neg, Label::Neg, Label::Neg, Label::Neg, Label::Neg],
        );
        let all = [0, 1, 2, 3, 4, 5];
        assert_eq!(
            best_split(&ds, &all, &TreeParams::default()).unwrap().rule.threshold,
            0.5
        );
        let s = best_split(&ds, &all, &TreeParams::new(Criterion::Gini, 3)).unwrap();
        assert_eq!(s.rule.threshold, 2.5);
        assert!(best_split(&ds, &all, &TreeParams::new(Criterion::Gini, 4)).is_none());
    }

    #[test]
    fn pure_dataset_gives_single_leaf() {
        let ds = one_d(&[1.0, 2.0, 3.0], &[Label::Neg; 3]);
        let t = fit_tree(&ds, &TreeParams::default()).unwrap();
        assert_eq!(t, DecisionTree::leaf(1, Label::Neg, 0, 3));
    }

    #[test]
    fn fit_rejects_bad_input() {
        let ds = one_d(&[1.0], &[Label::Pos]);
        assert!(fit_tree(&ds.subset(&[]), &TreeParams::default()).is_err());
        assert!(fit_tree(&ds, &TreeParams::new(Criterion::Gini, 0)).is_err());
        let p = TreeParams {
            feature_subset: Some(2),
            ..TreeParams::default()
        };
        assert!(fit_tree(&ds, &p).is_err());
    }

    #[test]
    fn leaf_tie_goes_positive() {
        let ds = one_d(&[1.0, 1.0], &[Label::Neg, Label::Pos]);
        let t = fit_tree(&ds, &TreeParams::default()).unwrap();
        assert_eq!(
            t.root(),
            &Node::Leaf {
                label: Label::Pos,
                n_pos: 1,
                n_neg: 1
            }
        );
    }

    #[test]
    fn linear3_root_split_and_accuracy() {
        let ds = generate_imbalanced_linear(3, 40_000, 3).unwrap();
        let (train, _, test) = split_dataset(&ds, &SplitSpec::standard(4)).unwrap();
        let t = fit_tree(&train, &TreeParams::new(Criterion::Gini, 250)).unwrap();
        match t.root() {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert!((threshold - 0.5).abs() < 0.01);
            }
            other => panic!("{other:?}"),
        }
        assert!(t.accuracy(&test).unwrap() >= 0.999);
    }

    #[test]
    fn checkerboard_tree_accuracy_and_prediction() {
        let ds = generate_checkerboard(2, 30_000, 8).unwrap();
        let (train, _, test) = split_dataset(&ds, &SplitSpec::standard(9)).unwrap();
        let t = fit_tree(&train, &TreeParams::new(Criterion::Gini, 250)).unwrap();
        assert!(t.depth() >= 2);
        assert!(t.accuracy(&test).unwrap() >= 0.995);
        assert_eq!(t.predict(&[1.5, 1.5]).unwrap(), checkerboard_label(2, &[1.5, 1.5]));
        assert!(t.predict(&[1.5]).is_err());
    }

    #[test]
    fn routing_rule() {
        let t = DecisionTree::from_text("N 0 1\nL -1 3 5\nL +1 4 0\n", 2).unwrap();
        assert_eq!(t.predict(&[0.5, 9.0]).unwrap(), Label::Neg);
        assert_eq!(t.predict(&[1.0, 9.0]).unwrap(), Label::Neg);
        assert_eq!(t.predict(&[1.5, 9.0]).unwrap(), Label::Pos);
        let leaf = DecisionTree::leaf(3, Label::Pos, 1, 0);
        assert_eq!(leaf.predict(&[7.0, -1.0, 0.0]).unwrap(), Label::Pos);
    }

    #[test]
    fn trees_equal_examples() {
        let ds = generate_checkerboard(2, 2000, 1).unwrap();
        let t = fit_tree(&ds, &TreeParams::new(Criterion::Gini, 50)).unwrap();
        assert!(trees_equal(&t, &t, 0.0));
        assert!(!trees_equal(
            &DecisionTree::leaf(2, Label::Pos, 1, 0),
            &DecisionTree::leaf(2, Label::Neg, 0, 1),
            0.0
        ));
        let a = DecisionTree::from_text("N 0 1\nL -1 3 5\nL +1 4 0\n", 2).unwrap();
        let b = DecisionTree::from_text("N 0 1.04\nL -1 9 9\nL +1 1 0\n", 2).unwrap();
        let c = DecisionTree::from_text("N 1 1\nL -1 3 5\nL +1 4 0\n", 2).unwrap();
        assert!(trees_equal(&a, &b, 0.05));
        assert!(!trees_equal(&a, &b, 0.01));
        assert!(!trees_equal(&a, &c, 1.0));
        assert!(!trees_equal(&a, &DecisionTree::leaf(2, Label::Neg, 0, 1), 1.0));
    }

    #[test]
    fn text_format_is_exact() {
        let text = "N 1 0.30000000000000004\nN 0 1e-7\nL +1 2 1\nL -1 0 4\nL -1 1 9\n";
        let t = DecisionTree::from_text(text, 2).unwrap();
        assert_eq!(t.nodes().len(), 5);
        assert_eq!(DecisionTree::from_text(&t.to_text(), 2).unwrap(), t);
        assert!(matches!(t.nodes()[0], Node::Split { left: 1, right: 4, .. }));
        assert!(matches!(t.nodes()[1], Node::Split { left: 2, right: 3, .. }));
    }

    #[test]
    fn text_format_errors() {
        for bad in [
            "N 0 1\nL +1 1 0\n",
            "N 5 1\nL +1 1 0\nL -1 0 1\n",
            "X 1\n",
            "L +2 1 1\n",
            "L +1 1 0\nL +1 1 0\n",
            "",
        ] {
            assert!(DecisionTree::from_text(bad, 2).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn fitted_tree_round_trips_through_text() {
        let ds = generate_checkerboard(4, 3000, 2).unwrap();
        let noisy = inject_noise(&ds, NoiseModel::Symmetric(0.1), 2).unwrap();
        let t = fit_tree(noisy.data(), &TreeParams::new(Criterion::Twoing, 5)).unwrap();
        assert_eq!(DecisionTree::from_text(&t.to_text(), 2).unwrap(), t);
    }

    #[test]
    fn leaves_respect_min_leaf_and_recount() {
        let ds = generate_checkerboard(4, 5000, 6).unwrap();
        let noisy = inject_noise(&ds, NoiseModel::Symmetric(0.3), 6).unwrap();
        for (criterion, min_leaf) in [(Criterion::Gini, 30), (Criterion::Entropy, 1), (Criterion::Twoing, 100)] {
            let t = fit_tree(noisy.data(), &TreeParams::new(criterion, min_leaf)).unwrap();
            let mut counts = vec![(0u64, 0u64); t.nodes().len()];
            for (x, y) in noisy.data().rows().zip(noisy.data().labels()) {
                let leaf = t.leaf_index(x);
                if y.is_pos() {
                    counts[leaf].0 += 1;
                } else {
                    counts[leaf].1 += 1;
                }
            }
            for (i, node) in t.nodes().iter().enumerate() {
                if let Node::Leaf { label, n_pos, n_neg } = node {
                    assert_eq!((*n_pos, *n_neg), counts[i]);
                    assert!((n_pos + n_neg) as usize >= min_leaf);
                    assert_eq!(*label, Label::majority(*n_pos, *n_neg));
                }
            }
        }
    }

    #[test]
    fn max_depth_limits_growth() {
        let ds = generate_checkerboard(4, 3000, 6).unwrap();
        for depth in [1, 2, 3] {
            let p = TreeParams {
                max_depth: Some(depth),
                ..TreeParams::default()
            };
            assert!(fit_tree(&ds, &p).unwrap().depth() <= depth);
        }
    }

    #[test]
    fn memorises_training_data_without_limits() {
        let ds = generate_checkerboard(4, 2000, 3).unwrap();
        let noisy = inject_noise(&ds, NoiseModel::Symmetric(0.3), 3).unwrap();
        let t = fit_tree(noisy.data(), &TreeParams::default()).unwrap();
        assert_eq!(t.accuracy(noisy.data()).unwrap(), 1.0);
    }

    #[test]
    fn feature_subsets_are_seeded() {
        let rows: Vec<Vec<f64>> = {
            let mut r = crate::rng::seeded(3);
            (0..600).map(|_| (0..5).map(|_| r.gen::<f64>()).collect()).collect()
        };
        let labels = rows
            .iter()
            .map(|x| if x[0] + x[3] > 1.0 { Label::Pos } else { Label::Neg })
            .collect();
        let ds = Dataset::from_rows(&rows, labels).unwrap();
        let p = TreeParams {
            feature_subset: Some(2),
            min_leaf: 5,
            seed: 11,
            ..TreeParams::default()
        };
        let a = fit_tree(&ds, &p).unwrap();
        assert_eq!(a, fit_tree(&ds, &p).unwrap());
        let b = fit_tree(&ds, &TreeParams { seed: 12, ..p }).unwrap();
        assert_ne!(a, b);
        // a full subset is the same as no subset
        let full = TreeParams {
            feature_subset: Some(5),
            ..p
        };
        assert_eq!(
            fit_tree(&ds, &full).unwrap(),
            fit_tree(
                &ds,
                &TreeParams {
                    feature_subset: None,
                    ..p
                }
            )
            .unwrap()
        );
    }

    /// Majority vote over `n` labels with `n_pos` clean positives after
    /// flipping each with probability `rates(i)`: did the label stay positive?
    fn majority_survives(n: usize, n_pos: usize, rates: impl Fn(usize) -> f64, rng: &mut StreamRng) -> bool {
        let mut noisy_pos = 0u64;
        for i in 0..n {
            let flip = rng.gen::<f64>() < rates(i);
            noisy_pos += u64::from((i < n_pos) != flip);
        }
        Label::majority(noisy_pos, n as u64 - noisy_pos) == Label::Pos
    }

    #[test]
    fn leaf_majority_survives_symmetric_noise() {
        let (rho, eta, delta) = (0.3, 0.3, 0.05);
        let n = leaf_sample_bound(&BoundQuery::new(rho, eta, delta, BoundCriterion::Leaf).unwrap()).unwrap() as usize;
        let n_pos = (n as f64 * (1.0 + rho) / 2.0).ceil() as usize;
        let mut rng = crate::rng::seeded(99);
        let trials = 2000;
        let kept = (0..trials)
            .filter(|_| majority_survives(n, n_pos, |_| eta, &mut rng))
            .count();
        assert!(kept as f64 / trials as f64 >= 1.0 - delta, "{kept}/{trials}");
    }

    #[test]
    fn pure_leaf_survives_non_uniform_noise() {
        let delta = 0.05;
        // worst admissible rate is the 0.4999 cap, so use the eta = 0.45 bound as a stand-in
        let n = leaf_sample_bound(&BoundQuery::new(1.0, 0.45, delta, BoundCriterion::Leaf).unwrap()).unwrap() as usize;
        let family = NonUniform::Affine {
            intercept: 0.05,
            slope: 0.5,
        };
        let xs: Vec<f64> = {
            let mut r = crate::rng::seeded(4);
            (0..n).map(|_| r.gen::<f64>()).collect()
        };
        let mut rng = crate::rng::seeded(5);
        let trials = 2000;
        let kept = (0..trials)
            .filter(|_| majority_survives(n, n, |i| family.rate(&[xs[i]]), &mut rng))
            .count();
        assert!(kept as f64 / trials as f64 >= 1.0 - delta, "{kept}/{trials}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn fit_is_deterministic_and_serialisable(seed in 0u64..1000, min_leaf in 1usize..20, eta in 0.0f64..0.45) {
            let ds = generate_checkerboard(2, 400, seed).unwrap();
            let noisy = inject_noise(&ds, NoiseModel::Symmetric(eta), seed).unwrap();
            let p = TreeParams::new(Criterion::Gini, min_leaf);
            let t = fit_tree(noisy.data(), &p).unwrap();
            prop_assert_eq!(&t, &fit_tree(noisy.data(), &p).unwrap());
            prop_assert_eq!(DecisionTree::from_text(&t.to_text(), 2).unwrap(), t);
        }
    }
}
