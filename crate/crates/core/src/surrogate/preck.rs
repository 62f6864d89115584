use crate::data::{check_dimension, Label, LabeledPoint, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::{ceil_fraction, Scalar};

use super::{ranked, scores, LossEval, Witness};

/// Structural surrogate for precision at `k`.
///
/// With `z_i = w^T x_i - y_i` the maximization over labelings with exactly
/// `m = ceil(k t)` positives collapses to
/// `2 * (sum of the m largest z_i) - sum_i z_i - sum_i y_i w^T x_i`.
pub fn eval_prec_at_k<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>, k: T) -> Result<LossEval<T>> {
    if !(k > T::zero() && k < T::one()) {
        return Err(Error::invalid(format!("k must lie in (0, 1), got {k}")));
    }
    if points.is_empty() {
        return Err(Error::invalid("prec@k surrogate needs at least one point"));
    }
    check_dimension(points, w.dimension())?;
    let m = ceil_fraction(k, points.len()).clamp(1, points.len());
    Ok(top_cardinality(points, w, m))
}

/// Structural surrogate for PRBEP: the prec@k surrogate with the cardinality
/// fixed to the number of actual positives.
pub fn eval_prbep<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Result<LossEval<T>> {
    let n_pos = points.iter().filter(|p| p.is_positive()).count();
    if n_pos == 0 {
        return Err(Error::invalid("PRBEP surrogate needs at least one positive"));
    }
    check_dimension(points, w.dimension())?;
    Ok(top_cardinality(points, w, n_pos))
}

/// Maximizes `sum_i (ybar_i - y_i) w^T x_i - sum_i y_i ybar_i` over labelings
/// with exactly `m` positives.
pub(super) fn top_cardinality<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>, m: usize) -> LossEval<T> {
    let s = scores(points, w);
    let mut z: Vec<(T, usize)> = s
        .iter()
        .zip(points)
        .enumerate()
        .map(|(i, (&si, p))| (si - p.label().sign::<T>(), i))
        .collect();
    let z_total: T = z.iter().map(|&(v, _)| v).sum();
    let margin: T = s.iter().zip(points).map(|(&si, p)| p.label().sign::<T>() * si).sum();
    ranked(&mut z);
    let top: T = z[..m].iter().map(|&(v, _)| v).sum();

    let mut labeling = vec![Label::Negative; points.len()];
    for &(_, i) in &z[..m] {
        labeling[i] = Label::Positive;
    }
    let mut subgradient = WeightVector::zeros(w.dimension());
    let two = T::of(2.0);
    for (p, &l) in points.iter().zip(&labeling) {
        if l != p.label() {
            subgradient.add_point(l.sign::<T>() * two, p);
        }
    }
    LossEval {
        value: two * top - z_total - margin,
        subgradient,
        witness: Witness::Labeling(labeling),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    fn pair() -> (LabeledPoint<f64>, LabeledPoint<f64>) {
        (LabeledPoint::dense(&[1.0], P), LabeledPoint::dense(&[0.5], N))
    }

    #[test]
    fn prec_at_k_pair_instance() {
        let (a, b) = pair();
        // Brute force over the two labelings with one positive: {-2, 1}.
        let e = eval_prec_at_k(&[&a, &b], &WeightVector::from_vec(vec![1.0]), 0.5).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.labeling().unwrap(), &[N, P]);
        assert_eq!(e.subgradient.as_slice(), &[-1.0]);
        // At w = 0 the candidates are {-2, 2}.
        let e = eval_prec_at_k(&[&a, &b], &WeightVector::zeros(1), 0.5).unwrap();
        assert_eq!(e.value, 2.0);
    }

    #[test]
    fn prec_at_k_single_point() {
        let a = LabeledPoint::dense(&[1.0], P);
        let e = eval_prec_at_k(&[&a], &WeightVector::zeros(1), 0.5).unwrap();
        assert_eq!(e.value, -1.0);
        assert!(e.subgradient.is_zero());
    }

    #[test]
    fn prec_at_k_errors() {
        let w = WeightVector::<f64>::zeros(1);
        assert!(eval_prec_at_k(&[], &w, 0.5).is_err());
        let (a, _) = pair();
        assert!(eval_prec_at_k(&[&a], &w, 1.0).is_err());
        let wide = LabeledPoint::dense(&[0.0, 1.0], P);
        assert!(matches!(
            eval_prec_at_k(&[&wide], &w, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn prbep_examples() {
        let (a, b) = pair();
        assert_eq!(eval_prbep(&[&a, &b], &WeightVector::from_vec(vec![1.0])).unwrap().value, 1.0);
        assert_eq!(eval_prbep(&[&a, &b], &WeightVector::zeros(1)).unwrap().value, 2.0);
        assert_eq!(eval_prbep(&[&a], &WeightVector::zeros(1)).unwrap().value, -1.0);
        assert!(eval_prbep(&[&b], &WeightVector::zeros(1)).is_err());
    }

    #[test]
    fn ties_prefer_lower_positions() {
        let x = LabeledPoint::dense(&[1.0], N);
        let e = eval_prec_at_k(&[&x, &x, &x], &WeightVector::zeros(1), 0.5).unwrap();
        assert_eq!(e.labeling().unwrap(), &[P, P, N]);
    }
}
