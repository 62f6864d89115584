use crate::data::{check_dimension, LabeledPoint, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::{ceil_fraction, Scalar};

use super::{ranked, scores, LossEval, Witness};

/// The negatives ranked within the top `ceil(beta t_-)` by score.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopBetaSelection {
    /// Positions in the input sequence, best-ranked first.
    pub selected: Vec<usize>,
    /// `ceil(beta t_-)`, capped at `t_-`.
    pub threshold_rank: usize,
}

impl TopBetaSelection {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

pub fn select_top_beta_negatives<T: Scalar>(
    points: &[&LabeledPoint<T>],
    w: &WeightVector<T>,
    beta: T,
) -> Result<TopBetaSelection> {
    check_beta(beta)?;
    check_dimension(points, w.dimension())?;
    let mut negs: Vec<(T, usize)> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_positive())
        .map(|(i, p)| (w.score_unchecked(p), i))
        .collect();
    if negs.is_empty() {
        return Err(Error::invalid("top-beta selection needs at least one negative"));
    }
    Ok(select_ranked(&mut negs, beta).1)
}

fn select_ranked<T: Scalar>(negs: &mut Vec<(T, usize)>, beta: T) -> (Vec<T>, TopBetaSelection) {
    let m = ceil_fraction(beta, negs.len()).clamp(1, negs.len());
    ranked(negs);
    negs.truncate(m);
    let (sel_scores, selected) = negs.iter().copied().unzip();
    (sel_scores, TopBetaSelection {
        selected,
        threshold_rank: m,
    })
}

fn check_beta<T: Scalar>(beta: T) -> Result<()> {
    if beta > T::zero() && beta <= T::one() {
        Ok(())
    } else {
        Err(Error::invalid(format!("beta must lie in (0, 1], got {beta}")))
    }
}

/// Hinge surrogate for partial AUC over the top `ceil(beta t_-)` negatives.
///
/// For a positive with score `s` the hinge `max(0, 1 - (s - s_j))` is active
/// exactly on a prefix of the selected negatives sorted by score, so value
/// and subgradient come from per-positive prefix lengths and prefix sums in
/// `O(t log t)` rather than by visiting every pair. A margin of exactly 1
/// contributes nothing to the subgradient.
pub fn eval_pauc<T: Scalar>(
    points: &[&LabeledPoint<T>],
    w: &WeightVector<T>,
    beta: T,
    normalize: bool,
) -> Result<LossEval<T>> {
    check_beta(beta)?;
    check_dimension(points, w.dimension())?;
    let s = scores(points, w);
    let mut negs: Vec<(T, usize)> = Vec::new();
    let mut pos: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if p.is_positive() {
            pos.push(i);
        } else {
            negs.push((s[i], i));
        }
    }
    if pos.is_empty() || negs.is_empty() {
        return Err(Error::invalid("pAUC surrogate needs both positives and negatives"));
    }
    let (sel_scores, selection) = select_ranked(&mut negs, beta);
    let m = selection.len();

    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(T::zero());
    for &v in &sel_scores {
        let last = *prefix.last().unwrap();
        prefix.push(last + v);
    }

    let one = T::one();
    let mut value = T::zero();
    let mut subgradient = WeightVector::zeros(w.dimension());
    // active_at_least[r]: positives whose active prefix has length >= r.
    let mut active_at_least = vec![0usize; m + 1];
    for &i in &pos {
        let si = s[i];
        let active = sel_scores.partition_point(|&sj| si - sj < one);
        if active > 0 {
            value += T::of_usize(active) * (one - si) + prefix[active];
            subgradient.add_point(-T::of_usize(active), points[i]);
        }
        active_at_least[active] += 1;
    }
    let mut covering = 0usize;
    for r in (0..m).rev() {
        covering += active_at_least[r + 1];
        if covering > 0 {
            subgradient.add_point(T::of_usize(covering), points[selection.selected[r]]);
        }
    }

    let mut eval = LossEval {
        value,
        subgradient,
        witness: Witness::Negatives(selection),
    };
    if normalize {
        eval.scale(one / (T::of_usize(m) * T::of_usize(pos.len())));
    }
    Ok(eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Label::{Negative as N, Positive as P};

    fn three() -> Vec<LabeledPoint<f64>> {
        vec![
            LabeledPoint::dense(&[1.0], P),
            LabeledPoint::dense(&[0.5], N),
            LabeledPoint::dense(&[-1.0], N),
        ]
    }

    #[test]
    fn pauc_three_point_instance() {
        let pts = three();
        let refs: Vec<_> = pts.iter().collect();
        let w = WeightVector::from_vec(vec![1.0]);
        let e = eval_pauc(&refs, &w, 0.5, false).unwrap();
        assert_eq!(e.value, 0.5);
        assert_eq!(e.subgradient.as_slice(), &[-0.5]);
        let e = eval_pauc(&refs, &w, 1.0, false).unwrap();
        assert_eq!(e.value, 0.5);
        assert_eq!(eval_pauc(&refs, &w, 1.0, true).unwrap().value, 0.25);
    }

    #[test]
    fn pauc_at_zero_model_is_one() {
        let pts = three();
        let refs: Vec<_> = pts.iter().collect();
        let w = WeightVector::zeros(1);
        for beta in [0.1, 0.5, 1.0] {
            assert_eq!(eval_pauc(&refs, &w, beta, true).unwrap().value, 1.0);
        }
        assert_eq!(eval_pauc(&refs, &w, 1.0, false).unwrap().value, 2.0);
    }

    #[test]
    fn hinge_kink_has_zero_subgradient() {
        let pts = [LabeledPoint::dense(&[1.0], P), LabeledPoint::dense(&[0.0], N)];
        let refs: Vec<_> = pts.iter().collect();
        let e = eval_pauc(&refs, &WeightVector::from_vec(vec![1.0]), 1.0, false).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.subgradient.is_zero());
    }

    #[test]
    fn pauc_requires_both_classes() {
        let pts = three();
        let w = WeightVector::zeros(1);
        assert!(eval_pauc(&[&pts[0]], &w, 0.5, true).is_err());
        assert!(eval_pauc(&[&pts[1], &pts[2]], &w, 0.5, true).is_err());
        assert!(eval_pauc(&[&pts[0], &pts[1]], &w, 1.5, true).is_err());
    }

    #[test]
    fn selection_examples() {
        let pts = three();
        let refs: Vec<_> = pts.iter().collect();
        let w = WeightVector::from_vec(vec![1.0]);
        let sel = select_top_beta_negatives(&refs, &w, 0.5).unwrap();
        assert_eq!(sel, TopBetaSelection { selected: vec![1], threshold_rank: 1 });
        assert_eq!(select_top_beta_negatives(&refs, &w, 1.0).unwrap().selected, vec![1, 2]);
        // Equal scores: lowest positions win.
        let flat = vec![LabeledPoint::dense(&[0.3], N); 4];
        let refs: Vec<_> = flat.iter().collect();
        let sel = select_top_beta_negatives(&refs, &WeightVector::zeros(1), 0.5).unwrap();
        assert_eq!(sel.selected, vec![0, 1]);
        assert!(select_top_beta_negatives(&[&pts[0]], &w, 0.5).is_err());
    }
}
