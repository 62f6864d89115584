use crate::data::{check_dimension, Label, LabeledPoint, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{ranked, scores, LossEval, Witness};

/// F1 from confusion counts; 0 when undefined.
pub(crate) fn f1_from_counts<T: Scalar>(tp: usize, fp: usize, fn_: usize) -> T {
    let denom = 2 * tp + fp + fn_;
    if tp == 0 || denom == 0 {
        T::zero()
    } else {
        T::of_usize(2 * tp) / T::of_usize(denom)
    }
}

/// Structural surrogate for the F-measure with `Delta = 1 - F1`.
///
/// The objective depends on a labeling only through how many positives (`a`)
/// and negatives (`b`) it marks positive, and for fixed counts the best
/// choice marks the highest-scored ones. Enumerating `(a, b)` over prefix
/// sums of the two sorted classes costs `O(t_+ t_-)`.
pub fn eval_fmeasure<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> Result<LossEval<T>> {
    if !points.iter().any(|p| p.is_positive()) {
        return Err(Error::invalid("F-measure surrogate needs at least one positive"));
    }
    check_dimension(points, w.dimension())?;
    Ok(enumerate(points, w))
}

pub(super) fn enumerate<T: Scalar>(points: &[&LabeledPoint<T>], w: &WeightVector<T>) -> LossEval<T> {
    let s = scores(points, w);
    let (mut pos, mut neg): (Vec<(T, usize)>, Vec<(T, usize)>) = s
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .partition(|&(_, i)| points[i].is_positive());
    ranked(&mut pos);
    ranked(&mut neg);
    let prefix = |xs: &[(T, usize)]| {
        let mut acc = vec![T::zero()];
        for &(v, _) in xs {
            let last = *acc.last().unwrap();
            acc.push(last + v);
        }
        acc
    };
    let pos_prefix = prefix(&pos);
    let neg_prefix = prefix(&neg);
    let pos_total = pos_prefix[pos.len()];

    let two = T::of(2.0);
    let mut best = (T::neg_infinity(), 0, 0);
    for a in 0..=pos.len() {
        let missed = pos_total - pos_prefix[a];
        for b in 0..=neg.len() {
            let f1: T = f1_from_counts(a, b, pos.len() - a);
            let obj = two * (neg_prefix[b] - missed) + T::one() - f1;
            if obj > best.0 {
                best = (obj, a, b);
            }
        }
    }

    let (value, a, b) = best;
    let mut labeling: Vec<Label> = points.iter().map(|p| p.label()).collect();
    let mut subgradient = WeightVector::zeros(w.dimension());
    for &(_, i) in &pos[a..] {
        labeling[i] = Label::Negative;
        subgradient.add_point(-two, points[i]);
    }
    for &(_, i) in &neg[..b] {
        labeling[i] = Label::Positive;
        subgradient.add_point(two, points[i]);
    }
    LossEval {
        value,
        subgradient,
        witness: Witness::Labeling(labeling),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn f1_counts() {
        assert_eq!(f1_from_counts::<f64>(1, 1, 0), 2.0 / 3.0);
        assert_eq!(f1_from_counts::<f64>(0, 0, 3), 0.0);
        assert_eq!(f1_from_counts::<f64>(0, 0, 0), 0.0);
        assert_eq!(f1_from_counts::<f64>(4, 0, 0), 1.0);
    }

    #[test]
    fn separable_pair() {
        let a = LabeledPoint::dense(&[1.0], P);
        let b = LabeledPoint::dense(&[-1.0], N);
        // Exhaustive labelings give {-5/3, 0, -3, -1}.
        let e = eval_fmeasure(&[&a, &b], &WeightVector::from_vec(vec![1.0])).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.labeling().unwrap(), &[P, N]);
        assert!(e.subgradient.is_zero());
        assert_eq!(eval_fmeasure(&[&a, &b], &WeightVector::zeros(1)).unwrap().value, 1.0);
    }

    #[test]
    fn single_positive() {
        let a = LabeledPoint::dense(&[1.0], P);
        assert_eq!(eval_fmeasure(&[&a], &WeightVector::from_vec(vec![1.0])).unwrap().value, 0.0);
        let b = LabeledPoint::dense(&[1.0], N);
        assert!(eval_fmeasure(&[&b], &WeightVector::from_vec(vec![1.0])).is_err());
    }
}
