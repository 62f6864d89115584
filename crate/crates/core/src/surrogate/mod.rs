//! Structural SVM surrogates for non-decomposable measures.
//!
//! Every evaluator returns the surrogate value together with one element of
//! its subdifferential (obtained from the maximizing labeling or the selected
//! top-ranked negatives) and the maximizer itself. Ties in any ranking are
//! broken by ascending position in the input sequence.

mod fmeasure;
mod pauc;
mod preck;

pub use fmeasure::eval_fmeasure;
pub(crate) use fmeasure::f1_from_counts;
pub use pauc::{eval_pauc, select_top_beta_negatives, TopBetaSelection};
pub use preck::{eval_prbep, eval_prec_at_k};

use std::cmp::Ordering;
use std::fmt;

use crate::data::{check_dimension, Label, LabeledPoint, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which performance measure a surrogate targets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measure<T> {
    /// Precision in the top `ceil(k t)` positions, `0 < k < 1`.
    PrecAtK { k: T },
    /// Precision-recall break-even point.
    Prbep,
    /// Partial AUC over false-positive range `[0, beta]`, `0 < beta <= 1`.
    PartialAuc { beta: T },
    FMeasure,
}

/// A measure plus whether its surrogate is reported on a per-example scale.
///
/// Normalization divides pAUC by `ceil(beta t_-) * t_+` and the other
/// surrogates by the number of points `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureSpec<T> {
    pub kind: Measure<T>,
    pub normalize: bool,
}

impl<T: Scalar> MeasureSpec<T> {
    pub fn prec_at_k(k: T) -> Result<Self> {
        Self::checked(Measure::PrecAtK { k }, false)
    }

    pub fn prbep() -> Self {
        MeasureSpec {
            kind: Measure::Prbep,
            normalize: false,
        }
    }

    /// pAUC surrogates are normalized unless told otherwise.
    pub fn pauc(beta: T) -> Result<Self> {
        Self::checked(Measure::PartialAuc { beta }, true)
    }

    pub fn fmeasure() -> Self {
        MeasureSpec {
            kind: Measure::FMeasure,
            normalize: false,
        }
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    fn checked(kind: Measure<T>, normalize: bool) -> Result<Self> {
        let spec = MeasureSpec { kind, normalize };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            Measure::PrecAtK { k } if !(k > T::zero() && k < T::one()) => {
                Err(Error::invalid(format!("k must lie in (0, 1), got {k}")))
            }
            Measure::PartialAuc { beta } if !(beta > T::zero() && beta <= T::one()) => {
                Err(Error::invalid(format!("beta must lie in (0, 1], got {beta}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Measure::PrecAtK { .. } => "preck",
            Measure::Prbep => "prbep",
            Measure::PartialAuc { .. } => "pauc",
            Measure::FMeasure => "fmeasure",
        }
    }

    /// Whether a sequence with these class counts satisfies the surrogate's
    /// preconditions.
    pub fn admits(&self, n_pos: usize, n_neg: usize) -> bool {
        match self.kind {
            Measure::PrecAtK { .. } => n_pos + n_neg > 0,
            Measure::Prbep | Measure::FMeasure => n_pos > 0,
            Measure::PartialAuc { .. } => n_pos > 0 && n_neg > 0,
        }
    }

    /// Evaluates the surrogate, rejecting sequences that violate the
    /// measure's preconditions.
    pub fn evaluate(&self, points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Result<LossEval<T>> {
        match self.kind {
            Measure::PrecAtK { k } => eval_prec_at_k(points, w, k).map(|e| self.rescale_by_len(e, points.len())),
            Measure::Prbep => eval_prbep(points, w).map(|e| self.rescale_by_len(e, points.len())),
            Measure::PartialAuc { beta } => eval_pauc(points, w, beta, self.normalize),
            Measure::FMeasure => eval_fmeasure(points, w).map(|e| self.rescale_by_len(e, points.len())),
        }
    }

    /// Like [`evaluate`](Self::evaluate) but total on every finite sequence:
    /// the empty sequence scores 0, and sequences missing a class take the
    /// value of the maximization problem restricted to what is present
    /// (pAUC with an empty pair set scores 0; PRBEP with no positives admits
    /// only the all-negative labeling).
    ///
    /// Used on stream prefixes, where early prefixes may lack a class.
    pub fn evaluate_prefix(&self, points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Result<LossEval<T>> {
        self.validate()?;
        check_dimension(points, w.dimension())?;
        if points.is_empty() {
            return Ok(LossEval::zero(w.dimension()));
        }
        let n_pos = points.iter().filter(|p| p.is_positive()).count();
        let n_neg = points.len() - n_pos;
        if self.admits(n_pos, n_neg) {
            return self.evaluate(points, w);
        }
        let eval = match self.kind {
            Measure::Prbep => preck::top_cardinality(points, w, 0),
            Measure::FMeasure => fmeasure::enumerate(points, w),
            Measure::PartialAuc { .. } => LossEval::zero(w.dimension()),
            Measure::PrecAtK { .. } => unreachable!("non-empty sequences are admitted"),
        };
        Ok(self.rescale_by_len(eval, points.len()))
    }

    pub fn value(&self, points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Result<T> {
        self.evaluate(points, w).map(|e| e.value)
    }

    fn rescale_by_len(&self, mut eval: LossEval<T>, len: usize) -> LossEval<T> {
        let skip = matches!(self.kind, Measure::PartialAuc { .. });
        if self.normalize && !skip && len > 0 {
            eval.scale(T::one() / T::of_usize(len));
        }
        eval
    }
}

impl<T: Scalar> fmt::Display for MeasureSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Measure::PrecAtK { k } => write!(f, "prec@{k}"),
            Measure::Prbep => write!(f, "prbep"),
            Measure::PartialAuc { beta } => write!(f, "pauc[0,{beta}]"),
            Measure::FMeasure => write!(f, "f1"),
        }
    }
}

/// The maximizer that certifies a surrogate value.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Optimal labeling for label-enumeration surrogates.
    Labeling(Vec<Label>),
    /// Selected top-ranked negatives for pAUC.
    Negatives(TopBetaSelection),
    /// Nothing to certify (empty or degenerate input).
    Empty,
}

/// Surrogate value, a subgradient at the evaluation point and its witness.
#[derive(Clone, Debug, PartialEq)]
pub struct LossEval<T> {
    pub value: T,
    pub subgradient: WeightVector<T>,
    pub witness: Witness,
}

impl<T: Scalar> LossEval<T> {
    pub(crate) fn zero(dimension: usize) -> Self {
        LossEval {
            value: T::zero(),
            subgradient: WeightVector::zeros(dimension),
            witness: Witness::Empty,
        }
    }

    pub(crate) fn scale(&mut self, c: T) {
        self.value *= c;
        self.subgradient.scale(c);
    }

    /// The labeling witness, if this evaluation has one.
    pub fn labeling(&self) -> Option<&[Label]> {
        match &self.witness {
            Witness::Labeling(l) => Some(l),
            _ => None,
        }
    }
}

/// Scores with positions, ordered by score descending then position ascending.
pub(crate) fn ranked<T: Scalar>(scored: &mut [(T, usize)]) {
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
}

pub(crate) fn scores<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Vec<T> {
    points.iter().map(|p| w.score_unchecked(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_validation() {
        assert!(MeasureSpec::prec_at_k(0.0).is_err());
        assert!(MeasureSpec::prec_at_k(1.0).is_err());
        assert!(MeasureSpec::prec_at_k(0.3).is_ok());
        assert!(MeasureSpec::pauc(1.5).is_err());
        assert!(MeasureSpec::pauc(0.0f32).is_err());
        assert!(MeasureSpec::pauc(1.0).unwrap().normalize);
        assert!(!MeasureSpec::<f64>::prbep().normalize);
    }

    #[test]
    fn prefix_evaluation_is_total() {
        let neg = LabeledPoint::dense(&[0.5f64], Label::Negative);
        let w = WeightVector::from_vec(vec![1.0]);
        let only_neg = [&neg, &neg];
        assert_eq!(MeasureSpec::prbep().evaluate_prefix(&only_neg, &w).unwrap().value, -2.0);
        assert!(MeasureSpec::prbep().evaluate(&only_neg, &w).is_err());
        let pauc = MeasureSpec::pauc(0.5).unwrap();
        assert_eq!(pauc.evaluate_prefix(&only_neg, &w).unwrap().value, 0.0);
        assert_eq!(pauc.evaluate_prefix(&[], &w).unwrap().value, 0.0);
        // No positives: F1 is 0 for every labeling, so the best labeling
        // marks exactly the positively scored negatives: 2 * 0.5 * 2 + 1.
        let f = MeasureSpec::fmeasure().evaluate_prefix(&only_neg, &w).unwrap();
        assert!((f.value - 3.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_divides_by_length() {
        let a = LabeledPoint::dense(&[1.0], Label::Positive);
        let b = LabeledPoint::dense(&[0.5], Label::Negative);
        let w = WeightVector::from_vec(vec![1.0]);
        let spec = MeasureSpec::prec_at_k(0.5).unwrap();
        assert_eq!(spec.value(&[&a, &b], &w).unwrap(), 1.0);
        assert_eq!(spec.with_normalize(true).value(&[&a, &b], &w).unwrap(), 0.5);
    }
}
