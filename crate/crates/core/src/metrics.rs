//! Raw (non-surrogate) performance measures, all reported in `[0, 1]`.

use std::fmt;

use crate::data::{check_dimension, Dataset, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::{ceil_fraction, Scalar};
use crate::surrogate::{Measure, MeasureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureName {
    PrecAtK,
    Prbep,
    PartialAuc,
    F1,
}

impl fmt::Display for MeasureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureName::PrecAtK => "prec@k",
            MeasureName::Prbep => "prbep",
            MeasureName::PartialAuc => "pauc",
            MeasureName::F1 => "f1",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult<T> {
    pub measure: MeasureName,
    pub value: T,
    /// `(t_+, t_-)` of the evaluation set.
    pub support: (usize, usize),
}

fn ranked_scores<T: Scalar>(d: &Dataset<T>, w: &WeightVector<T>) -> Result<Vec<(T, usize)>> {
    let refs = d.refs();
    check_dimension(&refs, w.dimension())?;
    let mut scored: Vec<(T, usize)> = refs
        .iter()
        .enumerate()
        .map(|(i, p)| (w.score_unchecked(p), i))
        .collect();
    crate::surrogate::ranked(&mut scored);
    Ok(scored)
}

fn precision_in_top<T: Scalar>(d: &Dataset<T>, w: &WeightVector<T>, m: usize, name: MeasureName) -> Result<EvalResult<T>> {
    let ranked = ranked_scores(d, w)?;
    let hits = ranked[..m].iter().filter(|&&(_, i)| d.point(i).is_positive()).count();
    Ok(EvalResult {
        measure: name,
        value: T::of_usize(hits) / T::of_usize(m),
        support: (d.n_pos(), d.n_neg()),
    })
}

/// Fraction of positives among the `ceil(k t)` highest-scored points.
pub fn raw_prec_at_k<T: Scalar>(d: &Dataset<T>, w: &WeightVector<T>, k: T) -> Result<EvalResult<T>> {
    if d.is_empty() {
        return Err(Error::invalid("prec@k of an empty dataset"));
    }
    if !(k > T::zero() && k <= T::one()) {
        return Err(Error::invalid(format!("k must lie in (0, 1], got {k}")));
    }
    let m = ceil_fraction(k, d.len()).clamp(1, d.len());
    precision_in_top(d, w, m, MeasureName::PrecAtK)
}

/// Precision when exactly `t_+` points are predicted positive; at that
/// cutoff precision and recall coincide.
pub fn raw_prbep<T: Scalar>(d: &Dataset<T>, w: &WeightVector<T>) -> Result<EvalResult<T>> {
    if d.n_pos() == 0 {
        return Err(Error::invalid("PRBEP needs at least one positive"));
    }
    precision_in_top(d, w, d.n_pos(), MeasureName::Prbep)
}

/// Fraction of (positive, top-`beta` negative) pairs with the positive
/// scored at least as high.
pub fn raw_pauc<T: Scalar>(d: &Dataset<T>, w: &WeightVector<T>, beta: T) -> Result<EvalResult<T>> {
    if d.n_pos() == 0 || d.n_neg() == 0 {
        return Err(Error::invalid("pAUC needs both positives and negatives"));
    }
    if !(beta > T::zero() && beta <= T::one()) {
        return Err(Error::invalid(format!("beta must lie in (0, 1], got {beta}")));
    }
    let ranked = ranked_scores(d, w)?;
    let m = ceil_fraction(beta, d.n_neg()).clamp(1, d.n_neg());
    let top_negs: Vec<T> = ranked
        .iter()
        .filter(|&&(_, i)| !d.point(i).is_positive())
        .take(m)
        .map(|&(s, _)| s)
        .collect();
    let correct: usize = ranked
        .iter()
        .filter(|&&(_, i)| d.point(i).is_positive())
        .map(|&(s, _)| m - top_negs.partition_point(|&sj| sj > s))
        .sum();
    Ok(EvalResult {
        measure: MeasureName::PartialAuc,
        value: T::of_usize(correct) / (T::of_usize(m) * T::of_usize(d.n_pos())),
        support: (d.n_pos(), d.n_neg()),
    })
}

fn f1_value<T: Scalar>(tp: usize, fp: usize, fn_: usize) -> T {
    crate::surrogate::f1_from_counts(tp, fp, fn_)
}

/// F1 of the predictions `w^T x >= threshold`.
pub fn raw_f1<T: Scalar>(d: &Dataset<T>, w: &WeightVector<T>, threshold: T) -> Result<EvalResult<T>> {
    if d.n_pos() == 0 {
        return Err(Error::invalid("F1 needs at least one positive"));
    }
    let refs = d.refs();
    check_dimension(&refs, w.dimension())?;
    let (mut tp, mut fp) = (0, 0);
    for p in refs {
        if w.score_unchecked(p) - threshold >= T::zero() {
            if p.is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    Ok(EvalResult {
        measure: MeasureName::F1,
        value: f1_value(tp, fp, d.n_pos() - tp),
        support: (d.n_pos(), d.n_neg()),
    })
}

/// Sweeps every score as a threshold and returns the best `(threshold, F1)`.
pub fn best_threshold_f1<T: Scalar>(d: &Dataset<T>, w: &WeightVector<T>) -> Result<(T, EvalResult<T>)> {
    if d.n_pos() == 0 {
        return Err(Error::invalid("F1 needs at least one positive"));
    }
    let ranked = ranked_scores(d, w)?;
    let (mut tp, mut fp) = (0, 0);
    let mut best = (T::infinity(), T::zero());
    for (r, &(s, i)) in ranked.iter().enumerate() {
        if d.point(i).is_positive() {
            tp += 1;
        } else {
            fp += 1;
        }
        // Only cut between distinct scores.
        if ranked.get(r + 1).is_some_and(|&(next, _)| next == s) {
            continue;
        }
        let f1: T = f1_value(tp, fp, d.n_pos() - tp);
        if f1 > best.1 {
            best = (s, f1);
        }
    }
    Ok((best.0, EvalResult {
        measure: MeasureName::F1,
        value: best.1,
        support: (d.n_pos(), d.n_neg()),
    }))
}

/// The raw measure matching a surrogate specification (F1 at threshold 0).
pub fn raw_measure<T: Scalar>(d: &Dataset<T>, w: &WeightVector<T>, spec: &MeasureSpec<T>) -> Result<EvalResult<T>> {
    match spec.kind {
        Measure::PrecAtK { k } => raw_prec_at_k(d, w, k),
        Measure::Prbep => raw_prbep(d, w),
        Measure::PartialAuc { beta } => raw_pauc(d, w, beta),
        Measure::FMeasure => raw_f1(d, w, T::zero()),
    }
}
