//! Sample-size bounds for noise-robust leaf labelling and split selection,
//! their Monte Carlo validators, and the entropy counterexample.
//!
//! All bounds have the form `C / (ρ² (1 - 2η)²) · ln(K / δ)`:
//!
//! | criterion          | C  | K  |
//! |--------------------|----|----|
//! | leaf majority vote | 2  | 1  |
//! | gini gain          | 72 | 12 |
//! | misclassification  | 18 | 12 |
//! | twoing             | 2  | 8  |
//!
//! The leaf bound is Hoeffding's inequality applied to the noisy majority
//! margin. The split bounds make every child fraction of both splits
//! ε-accurate (a union over 12 events, 8 for twoing which ignores the
//! parent) with ε chosen so the estimated gains cannot swap order. They are
//! loose; the validators measure how loose.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use statrs::distribution::{Binomial as BinomialLaw, DiscreteCDF};

use crate::criteria::{fraction_gain, noisy_split_stats, Criterion, ImpurityKind, SplitStats};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundCriterion {
    Leaf,
    Gini,
    Misclassification,
    Twoing,
}

impl BoundCriterion {
    pub const ALL: [BoundCriterion; 4] = [
        BoundCriterion::Leaf,
        BoundCriterion::Gini,
        BoundCriterion::Misclassification,
        BoundCriterion::Twoing,
    ];

    /// The split criterion a split bound speaks about.
    pub fn split_criterion(self) -> Option<Criterion> {
        match self {
            BoundCriterion::Leaf => None,
            BoundCriterion::Gini => Some(Criterion::Gini),
            BoundCriterion::Misclassification => Some(Criterion::Misclassification),
            BoundCriterion::Twoing => Some(Criterion::Twoing),
        }
    }

    /// `(C, K)` of the bound's `C / (ρ²(1-2η)²) · ln(K/δ)` form.
    fn constants(self) -> (f64, f64) {
        match self {
            BoundCriterion::Leaf => (2.0, 1.0),
            BoundCriterion::Gini => (72.0, 12.0),
            BoundCriterion::Misclassification => (18.0, 12.0),
            BoundCriterion::Twoing => (2.0, 8.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundCriterion::Leaf => "leaf",
            BoundCriterion::Gini => "gini",
            BoundCriterion::Misclassification => "mc",
            BoundCriterion::Twoing => "twoing",
        }
    }
}

impl fmt::Display for BoundCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "leaf" => Ok(BoundCriterion::Leaf),
            "gini" => Ok(BoundCriterion::Gini),
            "mc" | "misclassification" => Ok(BoundCriterion::Misclassification),
            "twoing" => Ok(BoundCriterion::Twoing),
            other => Err(Error::invalid(format!(
                "unknown bound criterion {other:?} (expected leaf, gini, mc or twoing)"
            ))),
        }
    }
}

/// Margin `rho`, noise rate `eta` and failure probability `delta`.
///
/// For leaves `rho` is the clean difference between the positive and
/// negative fractions; for splits it is the clean criterion gap between
/// the better and the worse split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundQuery {
    pub rho: f64,
    pub eta: f64,
    pub delta: f64,
    pub criterion: BoundCriterion,
}

impl BoundQuery {
    pub fn new(rho: f64, eta: f64, delta: f64, criterion: BoundCriterion) -> Result<Self> {
        let q = BoundQuery {
            rho,
            eta,
            delta,
            criterion,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::invalid(format!("margin {} outside (0, 1]", self.rho)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!(
                "failure probability {} outside (0, 1)",
                self.delta
            )));
        }
        if !(0.0..1.0).contains(&self.eta) || self.eta == 0.5 {
            return Err(Error::invalid(format!(
                "noise rate {} must lie in [0, 1) and differ from 0.5",
                self.eta
            )));
        }
        Ok(())
    }

    fn raw_bound(&self) -> f64 {
        let (c, k) = self.criterion.constants();
        let shrink = 1.0 - 2.0 * self.eta;
        c / (self.rho * self.rho * shrink * shrink) * (k / self.delta).ln()
    }
}

/// Smallest integer at least `x`, ignoring a relative excess of 1e-12 left
/// by floating-point evaluation.
fn ceil_count(x: f64) -> u64 {
    ((x * (1.0 - 1e-12)).ceil() as u64).max(1)
}

/// Unrounded leaf bound `2 / (ρ²(1-2η)²) · ln(1/δ)`.
pub fn leaf_bound_value(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    if q.criterion != BoundCriterion::Leaf {
        return Err(Error::invalid(format!(
            "leaf bound asked for criterion {}",
            q.criterion
        )));
    }
    if q.eta >= 0.5 {
        return Err(Error::invalid(format!(
            "majority vote needs a noise rate below 0.5, got {}",
            q.eta
        )));
    }
    Ok(q.raw_bound())
}

/// Leaf size above which a noisy majority vote keeps the clean label with
/// probability at least `1 - δ`.
pub fn leaf_sample_bound(q: &BoundQuery) -> Result<u64> {
    leaf_bound_value(q).map(ceil_count)
}

/// Unrounded split bound for the gini, misclassification or twoing criterion.
pub fn split_bound_value(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    if q.criterion == BoundCriterion::Leaf {
        return Err(Error::invalid(
            "split bound needs a split criterion (gini, mc or twoing)",
        ));
    }
    Ok(q.raw_bound())
}

/// Node size above which the noisy criterion ranks two splits in their clean
/// order with probability at least `1 - δ`.
pub fn split_sample_bound(q: &BoundQuery) -> Result<u64> {
    split_bound_value(q).map(ceil_count)
}

/// Either bound, by criterion.
pub fn sample_bound(q: &BoundQuery) -> Result<u64> {
    match q.criterion {
        BoundCriterion::Leaf => leaf_sample_bound(q),
        _ => split_sample_bound(q),
    }
}

/// Failure count of a Monte Carlo validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloOutcome {
    /// Sample size used in each trial.
    pub n: u64,
    pub trials: u64,
    pub failures: u64,
}

impl MonteCarloOutcome {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// Whether the failure count is consistent with a true failure
    /// probability of at most `delta`: it must not exceed the one-sided 99%
    /// quantile of Binomial(trials, delta).
    pub fn dominated_by(&self, delta: f64) -> bool {
        self.failures <= dominance_limit(self.trials, delta)
    }
}

/// One-sided 99% quantile of Binomial(trials, delta).
pub fn dominance_limit(trials: u64, delta: f64) -> u64 {
    BinomialLaw::new(delta, trials)
        .map(|law| law.inverse_cdf(0.99))
        .unwrap_or(trials)
}

/// Count of ones after flipping `ones` ones and `zeros` zeros, each with probability `eta`.
fn flipped_ones(ones: u64, zeros: u64, eta: f64, rng: &mut StreamRng) -> u64 {
    if eta == 0.0 {
        return ones;
    }
    let lost = Binomial::new(ones, eta).expect("eta validated").sample(rng);
    let gained = Binomial::new(zeros, eta).expect("eta validated").sample(rng);
    ones - lost + gained
}

/// Simulates a leaf of `leaf_sample_bound(q)` samples with clean margin at
/// least `rho` under symmetric noise and counts the trials in which the
/// majority vote turns negative.
pub fn validate_leaf_bound(q: &BoundQuery, trials: u64, seed: u64) -> Result<MonteCarloOutcome> {
    let n = leaf_sample_bound(q)?;
    let n_pos = ((n as f64 * (1.0 + q.rho) / 2.0).ceil() as u64).min(n);
    let n_neg = n - n_pos;
    let eta = q.eta;
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = rng::stream(seed, t);
            let noisy_pos = flipped_ones(n_pos, n_neg, eta, &mut rng);
            noisy_pos < n - noisy_pos
        })
        .count() as u64;
    Ok(MonteCarloOutcome { n, trials, failures })
}

/// Noisy counts of a split after symmetric flips.
fn noisy_counts(s: &SplitStats, eta: f64, rng: &mut StreamRng) -> (u64, u64, u64, u64) {
    let left_pos = flipped_ones(s.n_left_pos(), s.n_left() - s.n_left_pos(), eta, rng);
    let right_pos = flipped_ones(s.n_right_pos(), s.n_right() - s.n_right_pos(), eta, rng);
    (s.n_left(), left_pos, s.n_right(), right_pos)
}

/// Simulates symmetric noise on the labels of two splits of the same node
/// and counts the trials in which `better` no longer scores strictly above
/// `worse`.
///
/// `better` must beat `worse` by at least `rho` on clean counts, and both
/// must have at least `split_sample_bound(q)` samples. The two splits' flips
/// are drawn independently.
pub fn validate_split_bound(
    q: &BoundQuery,
    better: &SplitStats,
    worse: &SplitStats,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloOutcome> {
    let n = split_sample_bound(q)?;
    let criterion = q
        .criterion
        .split_criterion()
        .expect("split bound checked the criterion");
    if better.n() != worse.n() {
        return Err(Error::invalid(format!(
            "splits of one node must share n, got {} and {}",
            better.n(),
            worse.n()
        )));
    }
    if better.n() < n {
        return Err(Error::invalid(format!(
            "splits have {} samples, below the bound {n}",
            better.n()
        )));
    }
    let gap = criterion.evaluate(&better.fractions()?) - criterion.evaluate(&worse.fractions()?);
    if gap < q.rho {
        return Err(Error::invalid(format!(
            "clean {criterion} gap {gap} is below the margin {}",
            q.rho
        )));
    }
    let eta = q.eta;
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = rng::stream(seed, t);
            let (a, ap, b, bp) = noisy_counts(better, eta, &mut rng);
            let (c, cp, d, dp) = noisy_counts(worse, eta, &mut rng);
            criterion.evaluate_counts(a, ap, b, bp) <= criterion.evaluate_counts(c, cp, d, dp)
        })
        .count() as u64;
    Ok(MonteCarloOutcome {
        n: better.n(),
        trials,
        failures,
    })
}

/// Two splits given by `(a, p_l, p_r)` fractions, scaled to the split bound.
///
/// The margin is set to `(1 - slack)` times the clean gap of the fractions,
/// so that rounding the fractions to integer counts at the bound's sample
/// size still leaves a gap of at least the margin.
pub fn split_pair_at_bound(
    criterion: BoundCriterion,
    eta: f64,
    delta: f64,
    better: SplitShape,
    worse: SplitShape,
) -> Result<(BoundQuery, SplitStats, SplitStats)> {
    const SLACK: f64 = 0.01;
    let split = criterion
        .split_criterion()
        .ok_or_else(|| Error::invalid("split pairs need a split criterion"))?;
    let probe = 1_000_000_000;
    let value = |(a, pl, pr): SplitShape| -> Result<f64> {
        Ok(split.evaluate(&SplitStats::from_fractions(probe, a, pl, pr)?.fractions()?))
    };
    let gap = value(better)? - value(worse)?;
    if gap <= 0.0 {
        return Err(Error::invalid(format!(
            "first split does not beat the second under {split} (gap {gap})"
        )));
    }
    let q = BoundQuery::new((gap * (1.0 - SLACK)).min(1.0), eta, delta, criterion)?;
    let n = split_sample_bound(&q)?;
    let a = SplitStats::from_fractions(n, better.0, better.1, better.2)?;
    let b = SplitStats::from_fractions(n, worse.0, worse.1, worse.2)?;
    Ok((q, a, b))
}

/// A split as `(a, p_l, p_r)`: left share, left and right positive fractions.
pub type SplitShape = (f64, f64, f64);

/// The 18-point `(ρ, η, δ)` grid used to check the leaf bound.
pub fn leaf_grid() -> Vec<BoundQuery> {
    let mut grid = Vec::with_capacity(18);
    for rho in [0.1, 0.2, 0.5] {
        for eta in [0.1, 0.25, 0.4] {
            for delta in [0.05, 0.1] {
                grid.push(BoundQuery {
                    rho,
                    eta,
                    delta,
                    criterion: BoundCriterion::Leaf,
                });
            }
        }
    }
    grid
}

/// Split pairs `(better, worse)` with a shared parent
/// fraction. The first beats the second under gini, misclassification and
/// twoing alike.
pub const SPLIT_PAIRS: [(SplitShape, SplitShape); 3] = [
    ((0.5, 0.8, 0.2), (0.5, 0.7, 0.3)),
    ((0.4, 0.9, 0.3), (0.6, 0.6, 0.45)),
    ((0.25, 0.2, 0.6), (0.5, 0.45, 0.55)),
];

/// `(η, δ)` paired with each entry of [`SPLIT_PAIRS`].
pub const SPLIT_SETTINGS: [(f64, f64); 3] = [(0.1, 0.05), (0.25, 0.1), (0.4, 0.05)];

/// The counterexample's splits as fractions; gini prefers the first.
pub const COUNTEREXAMPLE_PAIR: (SplitShape, SplitShape) = ((0.5, 0.1, 0.5), (0.3, 0.01, 0.297 / 0.7));

/// Entropy and gini gains of two splits, clean and under symmetric noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CounterexampleReport {
    pub eta: f64,
    /// Entropy gains `[f1, f2]` on clean fractions.
    pub entropy_clean: [f64; 2],
    /// Entropy gains `[f1, f2]` on large-sample noisy fractions.
    pub entropy_noisy: [f64; 2],
    pub gini_clean: [f64; 2],
    pub gini_noisy: [f64; 2],
}

impl CounterexampleReport {
    /// Clean entropy prefers f2.
    pub fn clean_prefers_f2(&self) -> bool {
        self.entropy_clean[1] > self.entropy_clean[0]
    }

    /// Noisy entropy prefers f1.
    pub fn noisy_prefers_f1(&self) -> bool {
        self.entropy_noisy[0] > self.entropy_noisy[1]
    }

    /// Gini ranks the two splits the same way with and without noise.
    pub fn gini_order_kept(&self) -> bool {
        (self.gini_clean[0] > self.gini_clean[1]) == (self.gini_noisy[0] > self.gini_noisy[1])
    }

    /// Entropy flips its preference while gini does not.
    pub fn holds(&self) -> bool {
        self.clean_prefers_f2() && self.noisy_prefers_f1() && self.gini_order_kept()
    }
}

/// Two splits of a node with 30% positives on which entropy gain changes its
/// preference at `η = 0.4`:
///
/// * f1 sends half the samples left, with 5% and 25% of the node positive on
///   the left and right;
/// * f2 sends 30% left, with 0.3% and 29.7% of the node positive.
pub fn entropy_counterexample() -> CounterexampleReport {
    counterexample_at(0.4)
}

/// The [`entropy_counterexample`] splits evaluated at noise rate `eta`.
pub fn counterexample_at(eta: f64) -> CounterexampleReport {
    let f1 = SplitStats::new(500, 50, 500, 250).expect("valid counts");
    let f2 = SplitStats::new(300, 3, 700, 297).expect("valid counts");
    let splits = [
        f1.fractions().expect("non-degenerate"),
        f2.fractions().expect("non-degenerate"),
    ];
    let eval = |kind: ImpurityKind, noisy: bool| {
        splits.map(|f| {
            let f = if noisy { noisy_split_stats(&f, eta) } else { f };
            fraction_gain(kind, &f)
        })
    };
    CounterexampleReport {
        eta,
        entropy_clean: eval(ImpurityKind::Entropy, false),
        entropy_noisy: eval(ImpurityKind::Entropy, true),
        gini_clean: eval(ImpurityKind::Gini, false),
        gini_noisy: eval(ImpurityKind::Gini, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(rho: f64, eta: f64, delta: f64, c: BoundCriterion) -> BoundQuery {
        BoundQuery::new(rho, eta, delta, c).unwrap()
    }

    #[test]
    fn leaf_bound_examples() {
        assert_eq!(
            leaf_sample_bound(&q(1.0, 0.0, (-1.0f64).exp(), BoundCriterion::Leaf)).unwrap(),
            2
        );
        assert_eq!(
            leaf_sample_bound(&q(0.5, 0.25, 0.05, BoundCriterion::Leaf)).unwrap(),
            96
        );
        let lo = leaf_bound_value(&q(0.3, 0.2, 0.05, BoundCriterion::Leaf)).unwrap();
        let hi = leaf_bound_value(&q(0.3, 0.4, 0.05, BoundCriterion::Leaf)).unwrap();
        assert!((hi / lo - 9.0).abs() < 1e-12);
    }

    #[test]
    fn split_bound_examples() {
        // 20000 * ln 240 = 109612.778...
        assert_eq!(
            split_sample_bound(&q(0.1, 0.2, 0.05, BoundCriterion::Gini)).unwrap(),
            109_613
        );
        // 8/e² exceeds 1, so the collapse is checked one power of e further: 2 ln e³ = 6.
        assert!(BoundQuery::new(1.0, 0.0, 8.0 * (-2.0f64).exp(), BoundCriterion::Twoing).is_err());
        assert_eq!(
            split_sample_bound(&q(1.0, 0.0, 8.0 * (-3.0f64).exp(), BoundCriterion::Twoing)).unwrap(),
            6
        );
        // 18 * ln 12 / 1 = 44.73
        assert_eq!(
            split_sample_bound(&q(1.0, 0.0, 0.999, BoundCriterion::Misclassification)).unwrap(),
            45
        );
        for c in [
            BoundCriterion::Gini,
            BoundCriterion::Misclassification,
            BoundCriterion::Twoing,
        ] {
            let lo = split_bound_value(&q(0.05, 0.2, 0.1, c)).unwrap();
            let hi = split_bound_value(&q(0.05, 0.4, 0.1, c)).unwrap();
            assert!((hi / lo - 9.0).abs() < 1e-12, "{c}");
        }
    }

    #[test]
    fn bound_errors() {
        assert!(BoundQuery::new(0.0, 0.1, 0.1, BoundCriterion::Leaf).is_err());
        assert!(BoundQuery::new(0.5, 0.5, 0.1, BoundCriterion::Gini).is_err());
        assert!(BoundQuery::new(0.5, 0.1, 1.0, BoundCriterion::Gini).is_err());
        assert!(leaf_sample_bound(&q(0.5, 0.6, 0.1, BoundCriterion::Leaf)).is_err());
        assert!(leaf_sample_bound(&q(0.5, 0.1, 0.1, BoundCriterion::Gini)).is_err());
        assert!(split_sample_bound(&q(0.5, 0.1, 0.1, BoundCriterion::Leaf)).is_err());
        // splits above 0.5 are fine: labels are informative once inverted
        assert!(split_sample_bound(&q(0.5, 0.7, 0.1, BoundCriterion::Gini)).is_ok());
    }

    #[test]
    fn dominance_limit_examples() {
        assert_eq!(dominance_limit(10_000, 0.05), 551);
        assert!(dominance_limit(10_000, 0.1) > 1000);
    }

    #[test]
    fn noiseless_validators_never_fail() {
        let leaf = validate_leaf_bound(&q(0.5, 0.0, 0.05, BoundCriterion::Leaf), 2000, 1).unwrap();
        assert_eq!(leaf.failures, 0);
        let (qq, a, b) = split_pair_at_bound(
            BoundCriterion::Gini,
            0.0,
            0.05,
            (0.5, 0.1, 0.5),
            (0.3, 0.01, 0.297 / 0.7),
        )
        .unwrap();
        assert_eq!(validate_split_bound(&qq, &a, &b, 2000, 1).unwrap().failures, 0);
    }

    #[test]
    fn leaf_validator_examples() {
        for (rho, eta, delta) in [(0.5, 0.25, 0.05), (0.2, 0.4, 0.1)] {
            let out = validate_leaf_bound(&q(rho, eta, delta, BoundCriterion::Leaf), 10_000, 3).unwrap();
            assert!(out.rate() <= delta, "{rho} {eta} {delta}: {}", out.rate());
        }
    }

    #[test]
    fn leaf_validator_is_not_vacuous() {
        // a quarter of the bound should fail noticeably more often
        let query = q(0.1, 0.4, 0.05, BoundCriterion::Leaf);
        let full = validate_leaf_bound(&query, 4000, 9).unwrap();
        let n = full.n / 40;
        let n_pos = (n as f64 * 1.1 / 2.0).ceil() as u64;
        let failures = (0..4000u64)
            .filter(|&t| {
                let mut rng = rng::stream(9, t);
                let pos = flipped_ones(n_pos, n - n_pos, 0.4, &mut rng);
                pos < n - pos
            })
            .count();
        assert!(failures as u64 > full.failures);
    }

    #[test]
    fn split_validator_examples() {
        let (qq, a, b) = split_pair_at_bound(
            BoundCriterion::Gini,
            0.3,
            0.05,
            (0.5, 0.1, 0.5),
            (0.3, 0.01, 0.297 / 0.7),
        )
        .unwrap();
        assert!(validate_split_bound(&qq, &a, &b, 10_000, 5).unwrap().rate() <= 0.05);

        let (qq, a, b) =
            split_pair_at_bound(BoundCriterion::Twoing, 0.3, 0.1, (0.5, 0.8, 0.2), (0.5, 0.7, 0.3)).unwrap();
        assert!((qq.rho - 0.05 * 0.99).abs() < 1e-9);
        assert!(validate_split_bound(&qq, &a, &b, 10_000, 5).unwrap().rate() <= 0.1);
    }

    #[test]
    fn split_validator_preconditions() {
        let (qq, a, b) =
            split_pair_at_bound(BoundCriterion::Twoing, 0.3, 0.1, (0.5, 0.65, 0.35), (0.5, 0.55, 0.45)).unwrap();
        // reversed pair has a negative gap
        assert!(validate_split_bound(&qq, &b, &a, 10, 5).is_err());
        let small = SplitStats::new(10, 9, 10, 1).unwrap();
        assert!(validate_split_bound(&qq, &small, &small, 10, 5).is_err());
        let other_n = SplitStats::new(a.n_left() + 1, a.n_left_pos(), a.n_right(), a.n_right_pos()).unwrap();
        assert!(validate_split_bound(&qq, &other_n, &b, 10, 5).is_err());
        assert!(split_pair_at_bound(BoundCriterion::Gini, 0.1, 0.1, (0.5, 0.55, 0.45), (0.5, 0.9, 0.1)).is_err());
    }

    #[test]
    fn validators_are_deterministic() {
        let query = q(0.1, 0.4, 0.05, BoundCriterion::Leaf);
        assert_eq!(
            validate_leaf_bound(&query, 500, 4).unwrap(),
            validate_leaf_bound(&query, 500, 4).unwrap()
        );
    }

    #[test]
    fn counterexample_values() {
        let r = entropy_counterexample();
        assert!((r.entropy_clean[0] - 0.146_793_102_436_052).abs() < 1e-12);
        assert!((r.entropy_clean[1] - 0.168_676_278_553_887).abs() < 1e-12);
        assert!((r.entropy_noisy[0] - 0.004_651_491_303_399).abs() < 1e-12);
        assert!((r.entropy_noisy[1] - 0.004_209_104_884_417).abs() < 1e-12);
        assert!(r.clean_prefers_f2());
        assert!(r.noisy_prefers_f1());
        assert!(r.holds());
    }

    #[test]
    fn counterexample_gini_never_flips() {
        for k in 0..100 {
            let eta = k as f64 / 100.0;
            if eta == 0.5 {
                continue;
            }
            assert!(counterexample_at(eta).gini_order_kept(), "{eta}");
        }
    }

    proptest! {
        #[test]
        fn bounds_are_monotone(
            rho in 0.01f64..0.99, drho in 0.001f64..0.01,
            eta in 0.0f64..0.45, deta in 0.001f64..0.04,
            delta in 0.01f64..0.9, ddelta in 0.001f64..0.09,
        ) {
            for c in BoundCriterion::ALL {
                let base = sample_bound(&q(rho, eta, delta, c)).unwrap();
                prop_assert!(sample_bound(&q(rho + drho, eta, delta, c)).unwrap() <= base);
                prop_assert!(sample_bound(&q(rho, eta, delta + ddelta, c)).unwrap() <= base);
                prop_assert!(sample_bound(&q(rho, eta + deta, delta, c)).unwrap() >= base);
            }
        }

        #[test]
        fn bounds_scale_with_inverse_squared_shrinkage(rho in 0.01f64..1.0, eta in 0.0f64..0.45, delta in 0.001f64..0.5) {
            for c in BoundCriterion::ALL {
                let clean = q(rho, 0.0, delta, c).raw_bound();
                let noisy = q(rho, eta, delta, c).raw_bound();
                let shrink = 1.0 - 2.0 * eta;
                prop_assert!((noisy * shrink * shrink / clean - 1.0).abs() < 1e-12);
            }
        }
    }
}
