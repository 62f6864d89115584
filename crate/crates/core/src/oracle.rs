//! Exhaustive reference evaluators used to check the fast surrogates, plus
//! an empirical uniform-convergence probe.
//!
//! Nothing here shares code with [`crate::surrogate`] beyond the model's dot
//! product; the point is to recompute every quantity from its definition.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, LabeledPoint, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::{ceil_fraction, Scalar};
use crate::surrogate::{Measure, MeasureSpec};

/// Largest sequence `brute_force_structural` will enumerate.
pub const ENUMERATION_LIMIT: usize = 20;

fn raw_scores<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Result<Vec<T>> {
    points.iter().map(|p| w.score(p)).collect()
}

fn sign<T: Scalar>(positive: bool) -> T {
    if positive {
        T::one()
    } else {
        -T::one()
    }
}

/// Exact maximum of the structural objective over all feasible labelings.
///
/// Prec@k and PRBEP restrict to labelings with `ceil(k t)` respectively
/// `t_+` positives and use `-sum y_i ybar_i` as the measure term; the
/// F-measure ranges over all `2^t` labelings with `1 - F1` as the measure
/// term. pAUC is delegated to [`brute_force_pauc`].
pub fn brute_force_structural<T: Scalar>(
    points: &[&LabeledPoint<T>],
    w: &WeightVector<T>,
    measure: &MeasureSpec<T>,
) -> Result<T> {
    measure.validate()?;
    if let Measure::PartialAuc { beta } = measure.kind {
        return brute_force_pauc(points, w, beta, measure.normalize);
    }
    let t = points.len();
    if t > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            size: t,
            limit: ENUMERATION_LIMIT,
        });
    }
    if t == 0 {
        return Err(Error::invalid("enumeration needs at least one point"));
    }
    let s = raw_scores(points, w)?;
    let y: Vec<bool> = points.iter().map(|p| p.is_positive()).collect();
    let n_pos = y.iter().filter(|&&b| b).count();
    let cardinality = match measure.kind {
        Measure::PrecAtK { k } => Some(ceil_fraction(k, t).clamp(1, t)),
        Measure::Prbep => Some(n_pos),
        _ => None,
    };

    let mut best = T::neg_infinity();
    for mask in 0u32..(1u32 << t) {
        if cardinality.is_some_and(|m| mask.count_ones() as usize != m) {
            continue;
        }
        let ybar = |i: usize| mask >> i & 1 == 1;
        let mut obj = T::zero();
        for i in 0..t {
            obj += (sign::<T>(ybar(i)) - sign::<T>(y[i])) * s[i];
        }
        match measure.kind {
            Measure::FMeasure => {
                let tp = (0..t).filter(|&i| ybar(i) && y[i]).count();
                let fp = (0..t).filter(|&i| ybar(i) && !y[i]).count();
                let fneg = (0..t).filter(|&i| !ybar(i) && y[i]).count();
                let f1 = if tp == 0 {
                    T::zero()
                } else {
                    T::of_usize(2 * tp) / T::of_usize(2 * tp + fp + fneg)
                };
                obj += T::one() - f1;
            }
            _ => {
                for i in 0..t {
                    obj -= sign::<T>(y[i]) * sign::<T>(ybar(i));
                }
            }
        }
        if obj > best {
            best = obj;
        }
    }
    if measure.normalize {
        best /= T::of_usize(t);
    }
    Ok(best)
}

/// Positions (ascending) of the negatives whose rank, counted explicitly
/// against every other negative, falls within the top `ceil(beta t_-)`.
/// A negative outranks another when it scores higher, or scores the same
/// and appears earlier.
pub fn brute_force_top_beta<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>, beta: T) -> Result<Vec<usize>> {
    let s = raw_scores(points, w)?;
    let negs: Vec<usize> = (0..points.len()).filter(|&i| !points[i].is_positive()).collect();
    if negs.is_empty() {
        return Err(Error::invalid("no negatives"));
    }
    let cutoff = ceil_fraction(beta, negs.len()).clamp(1, negs.len());
    Ok(negs
        .iter()
        .copied()
        .filter(|&j| {
            let above = negs
                .iter()
                .filter(|&&l| s[l] > s[j] || (s[l] == s[j] && l < j))
                .count();
            above < cutoff
        })
        .collect())
}

fn hinge<T: Scalar>(c: T) -> T {
    (T::one() - c).max(T::zero())
}

/// Partial-AUC hinge surrogate summed pair by pair over the explicitly
/// ranked top-`beta` negatives.
pub fn brute_force_pauc<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>, beta: T, normalize: bool) -> Result<T> {
    let n_pos = points.iter().filter(|p| p.is_positive()).count();
    if n_pos == 0 {
        return Err(Error::invalid("no positives"));
    }
    let selected = brute_force_top_beta(points, w, beta)?;
    let s = raw_scores(points, w)?;
    let mut total = T::zero();
    for (i, p) in points.iter().enumerate() {
        if p.is_positive() {
            for &j in &selected {
                total += hinge(s[i] - s[j]);
            }
        }
    }
    if normalize {
        total /= T::of_usize(selected.len()) * T::of_usize(n_pos);
    }
    Ok(total)
}

/// Hinge surrogate summed over every positive-negative pair (plain AUC).
pub fn pairwise_hinge<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Result<T> {
    let s = raw_scores(points, w)?;
    let mut total = T::zero();
    for (i, pi) in points.iter().enumerate() {
        for (j, pj) in points.iter().enumerate() {
            if pi.is_positive() && !pj.is_positive() {
                total += hinge(s[i] - s[j]);
            }
        }
    }
    Ok(total)
}

/// Fraction of positive-negative pairs ranked correctly, ties counted correct.
pub fn pairwise_auc<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Result<T> {
    let s = raw_scores(points, w)?;
    let (mut correct, mut pairs) = (0usize, 0usize);
    for (i, pi) in points.iter().enumerate() {
        for (j, pj) in points.iter().enumerate() {
            if pi.is_positive() && !pj.is_positive() {
                pairs += 1;
                correct += usize::from(s[i] >= s[j]);
            }
        }
    }
    if pairs == 0 {
        return Err(Error::invalid("AUC needs both classes"));
    }
    Ok(T::of_usize(correct) / T::of_usize(pairs))
}

/// Largest rank-wise deviation `max_k |g(z_(k)) - g(z'_(k))|` between the
/// sorted values `z_i = w^T x_i - c_i` and `z'_i = w'^T x_i - c_i`.
///
/// For points in the unit ball and 1-Lipschitz increasing `g` this never
/// exceeds `3 ||w - w'||`.
pub fn ranked_deviation<T: Scalar>(
    points: &[&LabeledPoint<T>],
    w: &WeightVector<T>,
    w2: &WeightVector<T>,
    offsets: &[T],
    g: impl Fn(T) -> T,
) -> Result<T> {
    if offsets.len() != points.len() {
        return Err(Error::invalid("one offset per point required"));
    }
    let sorted = |model: &WeightVector<T>| -> Result<Vec<T>> {
        let mut z: Vec<T> = raw_scores(points, model)?
            .into_iter()
            .zip(offsets)
            .map(|(s, &c)| s - c)
            .collect();
        z.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Ok(z)
    };
    let (z, z2) = (sorted(w)?, sorted(w2)?);
    Ok(z.iter()
        .zip(&z2)
        .map(|(&a, &b)| (g(a) - g(b)).abs())
        .fold(T::zero(), T::max))
}

/// Outcome of comparing two evaluations of the same quantity, or of an
/// empirical convergence probe.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport<T> {
    pub oracle_value: T,
    pub fast_value: T,
    pub max_abs_gap: T,
    pub trials: usize,
    /// Per-trial gaps.
    pub gaps: Vec<T>,
}

impl<T: Scalar> OracleReport<T> {
    pub fn new() -> Self {
        OracleReport {
            oracle_value: T::zero(),
            fast_value: T::zero(),
            max_abs_gap: T::zero(),
            trials: 0,
            gaps: Vec::new(),
        }
    }

    /// Records one trial; the reported values track the worst trial.
    pub fn record(&mut self, oracle_value: T, fast_value: T) {
        let gap = (oracle_value - fast_value).abs();
        if self.trials == 0 || gap > self.max_abs_gap || gap.is_nan() {
            self.max_abs_gap = gap;
            self.oracle_value = oracle_value;
            self.fast_value = fast_value;
        }
        self.trials += 1;
        self.gaps.push(gap);
    }

    /// Empirical `q`-quantile of the per-trial gaps (nearest rank).
    pub fn quantile(&self, q: f64) -> T {
        if self.gaps.is_empty() {
            return T::nan();
        }
        let mut g = self.gaps.clone();
        g.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let rank = ((q.clamp(0.0, 1.0) * g.len() as f64).ceil() as usize).clamp(1, g.len());
        g[rank - 1]
    }

    pub fn median(&self) -> T {
        if self.gaps.is_empty() {
            return T::nan();
        }
        let mut g = self.gaps.clone();
        g.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let n = g.len();
        if n % 2 == 1 {
            g[n / 2]
        } else {
            (g[n / 2 - 1] + g[n / 2]) / T::of(2.0)
        }
    }
}

impl<T: Scalar> Default for OracleReport<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Draws `s` points without replacement `trials` times and records, per
/// trial, `sup_{w in grid} |loss(full, w) - loss(sample, w)|` with both
/// losses normalized.
///
/// The reported oracle/fast values are the full-data and sample losses at
/// the worst trial's worst model.
pub fn empirical_uniform_convergence<T: Scalar>(
    d: &Dataset<T>,
    measure: &MeasureSpec<T>,
    s: usize,
    trials: usize,
    w_grid: &[WeightVector<T>],
    seed: u64,
) -> Result<OracleReport<T>> {
    if s == 0 || s > d.len() {
        return Err(Error::invalid(format!("sample size {s} must lie in 1..={}", d.len())));
    }
    if w_grid.is_empty() || trials == 0 {
        return Err(Error::invalid("need a nonempty model grid and at least one trial"));
    }
    let measure = measure.with_normalize(true);
    let full_refs = d.refs();
    let full: Vec<T> = w_grid
        .iter()
        .map(|w| measure.evaluate_prefix(&full_refs, w).map(|e| e.value))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::new();
    for _ in 0..trials {
        let mut idx = sample(&mut rng, d.len(), s).into_vec();
        idx.sort_unstable();
        let sub = d.select(&idx);
        let mut worst = (T::zero(), full[0], full[0]);
        for (w, &lf) in w_grid.iter().zip(&full) {
            let ls = measure.evaluate_prefix(&sub, w)?.value;
            let gap = (lf - ls).abs();
            if gap > worst.0 {
                worst = (gap, lf, ls);
            }
        }
        report.record(worst.1, worst.2);
    }
    Ok(report)
}
