//! Impurity measures and split criteria for binary classification.
//!
//! A split sends a fraction `a` of a node's samples left. With `p`, `p_l`,
//! `p_r` the positive-class fractions at the parent and the two children,
//! the impurity gain is `G(p) - a G(p_l) - (1 - a) G(p_r)` and the twoing
//! value is `a (1 - a) (p_l - p_r)^2`.
//!
//! Under symmetric label noise with rate `η` every fraction moves to
//! `p (1 - 2η) + η` in the large-sample limit while `a` stays fixed. Gini
//! gain and twoing then scale by `(1 - 2η)^2` and misclassification gain by
//! `|1 - 2η|`, so their maximisers do not move. Entropy gain has no such
//! scaling.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::noise::expected_noisy_fraction;

/// Impurity functions of the positive fraction at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ImpurityKind {
    Gini,
    Entropy,
    Misclassification,
}

impl ImpurityKind {
    pub const ALL: [ImpurityKind; 3] = [
        ImpurityKind::Gini,
        ImpurityKind::Entropy,
        ImpurityKind::Misclassification,
    ];

    #[inline]
    pub fn impurity(self, p: f64) -> f64 {
        let q = 1.0 - p;
        match self {
            ImpurityKind::Gini => 2.0 * p * q,
            // base 2, with 0 log 0 = 0
            ImpurityKind::Entropy => {
                let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
                h(p) + h(q)
            }
            ImpurityKind::Misclassification => p.min(q),
        }
    }
}

/// `kind.impurity(p)`.
pub fn impurity(kind: ImpurityKind, p: f64) -> f64 {
    kind.impurity(p)
}

/// A split-selection criterion: impurity gain under one of the impurity
/// measures, or the twoing rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    Gini,
    Entropy,
    Misclassification,
    Twoing,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::Gini,
        Criterion::Entropy,
        Criterion::Misclassification,
        Criterion::Twoing,
    ];

    /// The criteria whose maximiser is invariant under symmetric noise.
    pub const NOISE_TOLERANT: [Criterion; 3] = [Criterion::Gini, Criterion::Misclassification, Criterion::Twoing];

    pub fn impurity_kind(self) -> Option<ImpurityKind> {
        match self {
            Criterion::Gini => Some(ImpurityKind::Gini),
            Criterion::Entropy => Some(ImpurityKind::Entropy),
            Criterion::Misclassification => Some(ImpurityKind::Misclassification),
            Criterion::Twoing => None,
        }
    }

    /// Criterion value of a split.
    #[inline]
    pub fn evaluate(self, f: &SplitFractions) -> f64 {
        match self.impurity_kind() {
            Some(kind) => fraction_gain(kind, f),
            None => fraction_twoing(f),
        }
    }

    /// Criterion value of a split given as child counts. Both children must
    /// be non-empty.
    #[inline]
    pub(crate) fn evaluate_counts(self, n_left: u64, n_left_pos: u64, n_right: u64, n_right_pos: u64) -> f64 {
        self.evaluate(&SplitFractions {
            n_left,
            n_right,
            p_left: n_left_pos as f64 / n_left as f64,
            p_right: n_right_pos as f64 / n_right as f64,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Gini => "gini",
            Criterion::Entropy => "entropy",
            Criterion::Misclassification => "mc",
            Criterion::Twoing => "twoing",
        }
    }
}

impl From<ImpurityKind> for Criterion {
    fn from(kind: ImpurityKind) -> Self {
        match kind {
            ImpurityKind::Gini => Criterion::Gini,
            ImpurityKind::Entropy => Criterion::Entropy,
            ImpurityKind::Misclassification => Criterion::Misclassification,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gini" => Ok(Criterion::Gini),
            "entropy" => Ok(Criterion::Entropy),
            "mc" | "misclassification" => Ok(Criterion::Misclassification),
            "twoing" => Ok(Criterion::Twoing),
            other => Err(Error::invalid(format!(
                "unknown criterion {other:?} (expected gini, entropy, mc or twoing)"
            ))),
        }
    }
}

/// Class counts on the two sides of a split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SplitStats {
    n_left: u64,
    n_left_pos: u64,
    n_right: u64,
    n_right_pos: u64,
}

impl SplitStats {
    pub fn new(n_left: u64, n_left_pos: u64, n_right: u64, n_right_pos: u64) -> Result<Self> {
        if n_left_pos > n_left || n_right_pos > n_right {
            return Err(Error::invalid(format!(
                "positive counts ({n_left_pos}, {n_right_pos}) exceed child sizes ({n_left}, {n_right})"
            )));
        }
        Ok(SplitStats {
            n_left,
            n_left_pos,
            n_right,
            n_right_pos,
        })
    }

    /// Counts closest to the given fractions for a parent of `n` samples.
    pub fn from_fractions(n: u64, a: f64, p_left: f64, p_right: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&p_left) || !(0.0..=1.0).contains(&p_right) {
            return Err(Error::invalid("fractions must lie in [0, 1]"));
        }
        let n_left = (a * n as f64).round() as u64;
        let n_right = n - n_left;
        SplitStats::new(
            n_left,
            (p_left * n_left as f64).round() as u64,
            n_right,
            (p_right * n_right as f64).round() as u64,
        )
    }

    pub fn n(&self) -> u64 {
        self.n_left + self.n_right
    }

    pub fn n_left(&self) -> u64 {
        self.n_left
    }

    pub fn n_right(&self) -> u64 {
        self.n_right
    }

    pub fn n_pos(&self) -> u64 {
        self.n_left_pos + self.n_right_pos
    }

    pub fn n_left_pos(&self) -> u64 {
        self.n_left_pos
    }

    pub fn n_right_pos(&self) -> u64 {
        self.n_right_pos
    }

    /// Positive fraction at the parent, from counts.
    pub fn p(&self) -> f64 {
        self.n_pos() as f64 / self.n() as f64
    }

    pub fn fractions(&self) -> Result<SplitFractions> {
        if self.n_left == 0 || self.n_right == 0 {
            return Err(Error::DegenerateSplit {
                n_left: self.n_left,
                n_right: self.n_right,
            });
        }
        Ok(SplitFractions {
            n_left: self.n_left,
            n_right: self.n_right,
            p_left: self.n_left_pos as f64 / self.n_left as f64,
            p_right: self.n_right_pos as f64 / self.n_right as f64,
        })
    }
}

/// Child sizes and child positive fractions of a non-degenerate split.
///
/// Fractions need not be ratios of the counts: [`noisy_split_stats`]
/// produces large-sample noisy fractions on the same child sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitFractions {
    n_left: u64,
    n_right: u64,
    p_left: f64,
    p_right: f64,
}

impl SplitFractions {
    pub fn new(n_left: u64, n_right: u64, p_left: f64, p_right: f64) -> Result<Self> {
        if n_left == 0 || n_right == 0 {
            return Err(Error::DegenerateSplit { n_left, n_right });
        }
        if !(0.0..=1.0).contains(&p_left) || !(0.0..=1.0).contains(&p_right) {
            return Err(Error::invalid(format!(
                "child fractions ({p_left}, {p_right}) outside [0, 1]"
            )));
        }
        Ok(SplitFractions {
            n_left,
            n_right,
            p_left,
            p_right,
        })
    }

    pub fn n(&self) -> u64 {
        self.n_left + self.n_right
    }

    pub fn n_left(&self) -> u64 {
        self.n_left
    }

    pub fn n_right(&self) -> u64 {
        self.n_right
    }

    /// Fraction of samples sent left.
    #[inline]
    pub fn a(&self) -> f64 {
        self.n_left as f64 / self.n() as f64
    }

    /// Parent positive fraction, `a p_l + (1 - a) p_r`.
    #[inline]
    pub fn p(&self) -> f64 {
        let a = self.a();
        a * self.p_left + (1.0 - a) * self.p_right
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p()
    }

    pub fn p_left(&self) -> f64 {
        self.p_left
    }

    pub fn q_left(&self) -> f64 {
        1.0 - self.p_left
    }

    pub fn p_right(&self) -> f64 {
        self.p_right
    }

    pub fn q_right(&self) -> f64 {
        1.0 - self.p_right
    }
}

/// Impurity gain of a split given as fractions.
#[inline]
pub fn fraction_gain(kind: ImpurityKind, f: &SplitFractions) -> f64 {
    let a = f.a();
    kind.impurity(f.p()) - a * kind.impurity(f.p_left) - (1.0 - a) * kind.impurity(f.p_right)
}

/// Twoing value of a split given as fractions.
#[inline]
pub fn fraction_twoing(f: &SplitFractions) -> f64 {
    let a = f.a();
    let d = f.p_left - f.p_right;
    a * (1.0 - a) * d * d
}

/// Impurity gain of a split. Errors on a degenerate split.
pub fn gain(kind: ImpurityKind, s: &SplitStats) -> Result<f64> {
    Ok(fraction_gain(kind, &s.fractions()?))
}

/// Twoing value of a split. Errors on a degenerate split.
pub fn twoing(s: &SplitStats) -> Result<f64> {
    Ok(fraction_twoing(&s.fractions()?))
}

/// Large-sample value under symmetric noise `eta` of a criterion whose clean
/// value is `clean`.
///
/// Entropy is rejected: its gain has no closed-form rescaling and its
/// maximiser can move under noise (see
/// [`crate::bounds::entropy_counterexample`]).
pub fn noisy_gain_closed_form(criterion: Criterion, clean: f64, eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::invalid(format!("noise rate {eta} outside [0, 1)")));
    }
    if eta == 0.5 {
        return Err(Error::invalid("noise rate 0.5 destroys all label information"));
    }
    let shrink = 1.0 - 2.0 * eta;
    match criterion {
        Criterion::Gini | Criterion::Twoing => Ok(shrink * shrink * clean),
        Criterion::Misclassification => Ok(shrink.abs() * clean),
        Criterion::Entropy => Err(Error::invalid(
            "entropy gain has no closed-form noisy scaling; its split ordering can change under symmetric noise",
        )),
    }
}

/// Large-sample fractions of `f` after symmetric noise `eta`; child sizes
/// are unchanged.
pub fn noisy_split_stats(f: &SplitFractions, eta: f64) -> SplitFractions {
    SplitFractions {
        p_left: expected_noisy_fraction(f.p_left, eta),
        p_right: expected_noisy_fraction(f.p_right, eta),
        ..*f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Two splits of a 1000-sample parent with 300 positives.
    fn remark_pair() -> (SplitStats, SplitStats) {
        (
            SplitStats::new(500, 50, 500, 250).unwrap(),
            SplitStats::new(300, 3, 700, 297).unwrap(),
        )
    }

    #[test]
    fn impurity_examples() {
        assert_eq!(impurity(ImpurityKind::Gini, 0.5), 0.5);
        assert_eq!(impurity(ImpurityKind::Misclassification, 0.0), 0.0);
        assert!(close(
            impurity(ImpurityKind::Entropy, 0.25),
            0.811_278_124_459_132_8,
            1e-15
        ));
        for kind in ImpurityKind::ALL {
            assert_eq!(kind.impurity(0.0), 0.0);
            assert_eq!(kind.impurity(1.0), 0.0);
        }
        assert_eq!(ImpurityKind::Entropy.impurity(0.5), 1.0);
    }

    #[test]
    fn gain_examples() {
        let flat = SplitStats::new(40, 10, 60, 15).unwrap();
        for kind in ImpurityKind::ALL {
            assert!(close(gain(kind, &flat).unwrap(), 0.0, 1e-15));
        }
        assert!(close(twoing(&flat).unwrap(), 0.0, 1e-15));

        let perfect = SplitStats::new(50, 50, 50, 0).unwrap();
        assert!(close(gain(ImpurityKind::Gini, &perfect).unwrap(), 0.5, 1e-15));

        let (f1, f2) = remark_pair();
        assert!(close(
            gain(ImpurityKind::Entropy, &f1).unwrap(),
            0.146_793_102_436_052,
            1e-12
        ));
        assert!(close(
            gain(ImpurityKind::Entropy, &f2).unwrap(),
            0.168_676_278_553_887,
            1e-12
        ));
    }

    #[test]
    fn twoing_examples() {
        let perfect = SplitStats::new(10, 10, 10, 0).unwrap();
        assert!(close(twoing(&perfect).unwrap(), 0.25, 1e-15));
        let (_, f2) = remark_pair();
        assert!(close(twoing(&f2).unwrap(), 0.036_042_857_142_857, 1e-12));
    }

    #[test]
    fn twoing_matches_its_absolute_value_definition() {
        let s = SplitStats::new(37, 5, 63, 40).unwrap().fractions().unwrap();
        let a = s.a();
        let full = a * (1.0 - a) * ((s.p_left() - s.p_right()).abs() + (s.q_left() - s.q_right()).abs()).powi(2) / 4.0;
        assert!(close(full, fraction_twoing(&s), 1e-15));
    }

    #[test]
    fn gini_gain_is_twice_twoing() {
        let s = SplitStats::new(37, 5, 63, 40).unwrap();
        assert!(close(
            gain(ImpurityKind::Gini, &s).unwrap(),
            2.0 * twoing(&s).unwrap(),
            1e-15
        ));
    }

    #[test]
    fn degenerate_split_is_rejected() {
        let s = SplitStats::new(0, 0, 10, 4).unwrap();
        assert!(matches!(
            gain(ImpurityKind::Gini, &s),
            Err(Error::DegenerateSplit { .. })
        ));
        assert!(twoing(&s).is_err());
        assert!(SplitStats::new(3, 4, 1, 0).is_err());
        assert!(SplitFractions::new(1, 1, 1.5, 0.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(noisy_gain_closed_form(Criterion::Gini, 0.37, 0.0).unwrap(), 0.37);
        assert!(close(
            noisy_gain_closed_form(Criterion::Gini, 0.5, 0.4).unwrap(),
            0.02,
            1e-15
        ));
        assert!(close(
            noisy_gain_closed_form(Criterion::Misclassification, 0.3, 0.3).unwrap(),
            0.12,
            1e-15
        ));
        assert!(close(
            noisy_gain_closed_form(Criterion::Misclassification, 0.3, 0.7).unwrap(),
            0.12,
            1e-15
        ));
        assert!(close(
            noisy_gain_closed_form(Criterion::Twoing, 0.25, 0.1).unwrap(),
            0.16,
            1e-15
        ));
        assert!(noisy_gain_closed_form(Criterion::Entropy, 0.1, 0.2).is_err());
        assert!(noisy_gain_closed_form(Criterion::Gini, 0.1, 0.5).is_err());
        assert!(noisy_gain_closed_form(Criterion::Gini, 0.1, 1.0).is_err());
    }

    #[test]
    fn noisy_fraction_examples() {
        let f = SplitStats::new(500, 50, 500, 250).unwrap().fractions().unwrap();
        assert_eq!(noisy_split_stats(&f, 0.0), f);
        let g = noisy_split_stats(&f, 0.4);
        assert!(close(g.p(), 0.46, 1e-15));
        assert!(close(g.p_left(), 0.42, 1e-15));
        assert!(close(g.p_right(), 0.5, 1e-15));
        assert_eq!((g.n_left(), g.n_right()), (500, 500));
        let pure = SplitFractions::new(3, 7, 1.0, 1.0).unwrap();
        assert!(close(noisy_split_stats(&pure, 0.1).p(), 0.9, 1e-15));
    }

    #[test]
    fn criterion_names() {
        for c in Criterion::ALL {
            assert_eq!(c.name().parse::<Criterion>().unwrap(), c);
        }
        assert!("gain-ratio".parse::<Criterion>().is_err());
    }

    #[test]
    fn product_estimator_bias_matches_closed_form() {
        // For n noisy labels, E[p~ q~] = p^η q^η - η(1-η)/n exactly.
        use rand::Rng;
        let (n, n_pos, eta) = (20usize, 6usize, 0.2);
        let trials = 400_000;
        let mut rng = crate::rng::seeded(17);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let mut pos = 0usize;
            for i in 0..n {
                let is_pos = i < n_pos;
                let flip = rng.gen::<f64>() < eta;
                pos += usize::from(is_pos != flip);
            }
            let p = pos as f64 / n as f64;
            let v = p * (1.0 - p);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / trials as f64;
        let se = ((sum_sq / trials as f64 - mean * mean) / trials as f64).sqrt();
        let pe = expected_noisy_fraction(n_pos as f64 / n as f64, eta);
        let expected = pe * (1.0 - pe) - eta * (1.0 - eta) / n as f64;
        assert!(
            (mean - expected).abs() < 4.0 * se,
            "mean {mean}, expected {expected}, se {se}"
        );
        // the bias is resolvable at this trial count
        assert!((mean - pe * (1.0 - pe)).abs() > 4.0 * se);
    }

    fn split_stats() -> impl Strategy<Value = SplitStats> {
        (1u64..500, 1u64..500)
            .prop_flat_map(|(nl, nr)| (Just(nl), 0..=nl, Just(nr), 0..=nr))
            .prop_map(|(nl, pl, nr, pr)| SplitStats::new(nl, pl, nr, pr).unwrap())
    }

    proptest! {
        #[test]
        fn impurity_is_symmetric_and_bounded(p in 0.0f64..=1.0) {
            for kind in ImpurityKind::ALL {
                let v = kind.impurity(p);
                prop_assert!(close(v, kind.impurity(1.0 - p), 1e-12));
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert!(v <= kind.impurity(0.5) + 1e-15);
            }
        }

        #[test]
        fn gains_are_nonnegative(s in split_stats()) {
            for kind in ImpurityKind::ALL {
                prop_assert!(gain(kind, &s).unwrap() >= -1e-12);
            }
            prop_assert!(twoing(&s).unwrap() >= 0.0);
        }

        #[test]
        fn parent_fraction_is_consistent(s in split_stats()) {
            let f = s.fractions().unwrap();
            prop_assert!(close(f.a() * f.p_left() + (1.0 - f.a()) * f.p_right(), s.p(), 1e-12));
            prop_assert!(close(f.p(), s.p(), 1e-12));
        }

        #[test]
        fn noisy_fractions_keep_sizes_and_consistency(s in split_stats(), eta in 0.0f64..1.0) {
            let f = s.fractions().unwrap();
            let g = noisy_split_stats(&f, eta);
            prop_assert_eq!((g.n_left(), g.n_right()), (f.n_left(), f.n_right()));
            prop_assert!(close(g.p(), expected_noisy_fraction(f.p(), eta), 1e-12));
        }
    }
}
