//! Online learning with non-decomposable losses.
//!
//! The penalty charged for a batch is the growth of the prefix loss caused by
//! appending it, `L_t(w) = loss(x_1..x_t, w) - loss(x_1..x_{t-1}, w)`, so the
//! penalties of a fixed model telescope to its loss on the whole stream.
//! Models are chosen by follow-the-regularized-leader: each round minimizes
//! the loss on everything seen so far plus `(eta / 2) ||w||^2`.

use crate::data::{Dataset, FeasibleSet, LabeledPoint, StreamOrder, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::surrogate::{Measure, MeasureSpec};
use crate::trace::{EpochObserver, ExperimentTrace, ModelAverage, NoTrace, Stopwatch};

/// Loss of `prefix ++ batch` minus loss of `prefix`; the empty prefix has
/// loss 0.
pub fn instantaneous_penalty<T: Scalar>(
    prefix: &[&LabeledPoint<T>],
    batch: &[&LabeledPoint<T>],
    w: &WeightVector<T>,
    measure: &MeasureSpec<T>,
) -> Result<T> {
    penalty_parts(prefix, batch, w, measure).map(|(before, after)| after - before)
}

fn penalty_parts<T: Scalar>(
    prefix: &[&LabeledPoint<T>],
    batch: &[&LabeledPoint<T>],
    w: &WeightVector<T>,
    measure: &MeasureSpec<T>,
) -> Result<(T, T)> {
    if batch.is_empty() {
        return Err(Error::invalid("penalty needs a nonempty batch"));
    }
    let combined: Vec<&LabeledPoint<T>> = prefix.iter().chain(batch).copied().collect();
    let before = measure.evaluate_prefix(prefix, w)?.value;
    let after = measure.evaluate_prefix(&combined, w)?.value;
    Ok((before, after))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyEntry<T> {
    pub prefix_len: usize,
    pub batch_len: usize,
    /// Loss of the prefix under the charged model.
    pub loss_before: T,
    /// Loss of prefix plus batch under the same model.
    pub loss_after: T,
}

impl<T: Scalar> PenaltyEntry<T> {
    pub fn penalty(&self) -> T {
        self.loss_after - self.loss_before
    }
}

/// The prefix losses evaluated for each charged penalty and their running
/// total.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PenaltyLedger<T> {
    entries: Vec<PenaltyEntry<T>>,
    cumulative_penalty: T,
}

impl<T: Scalar> PenaltyLedger<T> {
    pub fn new() -> Self {
        PenaltyLedger {
            entries: Vec::new(),
            cumulative_penalty: T::zero(),
        }
    }

    /// Charges `L_t(w)` for appending `batch` to `prefix` and returns it.
    pub fn charge(
        &mut self,
        measure: &MeasureSpec<T>,
        prefix: &[&LabeledPoint<T>],
        batch: &[&LabeledPoint<T>],
        w: &WeightVector<T>,
    ) -> Result<T> {
        let (loss_before, loss_after) = penalty_parts(prefix, batch, w, measure)?;
        let entry = PenaltyEntry {
            prefix_len: prefix.len(),
            batch_len: batch.len(),
            loss_before,
            loss_after,
        };
        self.cumulative_penalty += entry.penalty();
        self.entries.push(entry);
        Ok(entry.penalty())
    }

    pub fn entries(&self) -> &[PenaltyEntry<T>] {
        &self.entries
    }

    pub fn cumulative_penalty(&self) -> T {
        self.cumulative_penalty
    }
}

pub const DEFAULT_INNER_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FtrlConfig<T> {
    /// Regularization weight.
    pub eta: T,
    pub inner_iters: usize,
    pub batch_size_s: usize,
    pub measure: MeasureSpec<T>,
}

impl<T: Scalar> FtrlConfig<T> {
    pub fn new(measure: MeasureSpec<T>) -> Self {
        FtrlConfig {
            eta: T::one(),
            inner_iters: DEFAULT_INNER_ITERS,
            batch_size_s: 1,
            measure,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > T::zero()) || !self.eta.is_finite() {
            return Err(Error::invalid(format!("eta must be positive, got {}", self.eta)));
        }
        if self.inner_iters == 0 || self.batch_size_s == 0 {
            return Err(Error::invalid("inner_iters and batch size must be at least 1"));
        }
        self.measure.validate()
    }
}

/// A minimizer returned by an inner solver with the objective it achieved.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimizer<T> {
    pub model: WeightVector<T>,
    pub objective: T,
}

/// Projected subgradient descent on `loss(points, w) + (eta / 2) ||w||^2`
/// from `w = 0` with steps `1 / (eta i)`, returning the best iterate seen
/// (the start included).
pub fn minimize_regularized<T: Scalar>(
    points: &[&LabeledPoint<T>],
    measure: &MeasureSpec<T>,
    eta: T,
    iters: usize,
    set: &FeasibleSet<T>,
    dimension: usize,
) -> Result<Minimizer<T>> {
    let half_eta = eta / T::of(2.0);
    let mut w = WeightVector::zeros(dimension);
    let mut best: Option<Minimizer<T>> = None;
    for i in 1..=iters + 1 {
        let eval = measure.evaluate_prefix(points, &w)?;
        let sq = w.dot(&w);
        let objective = eval.value + half_eta * sq;
        if best.as_ref().is_none_or(|b| objective < b.objective) {
            best = Some(Minimizer {
                model: w.clone(),
                objective,
            });
        }
        if i > iters {
            break;
        }
        let mut g = eval.subgradient;
        g.add_scaled(eta, &w);
        w.add_scaled(-T::one() / (eta * T::of_usize(i)), &g);
        set.project_in_place(&mut w);
    }
    Ok(best.expect("at least one iterate"))
}

/// Projected subgradient descent on the unregularized loss with normalized
/// steps `radius / (||g|| sqrt(i))`, returning the best iterate seen.
pub fn minimize_unregularized<T: Scalar>(
    points: &[&LabeledPoint<T>],
    measure: &MeasureSpec<T>,
    iters: usize,
    set: &FeasibleSet<T>,
    start: WeightVector<T>,
) -> Result<Minimizer<T>> {
    let mut w = start;
    let mut best: Option<Minimizer<T>> = None;
    for i in 1..=iters + 1 {
        let eval = measure.evaluate_prefix(points, &w)?;
        if best.as_ref().is_none_or(|b| eval.value < b.objective) {
            best = Some(Minimizer {
                model: w.clone(),
                objective: eval.value,
            });
        }
        let gnorm = eval.subgradient.norm();
        if i > iters || gnorm.is_zero() {
            break;
        }
        let step = set.radius() / (gnorm * T::of_usize(i).sqrt());
        w.add_scaled(-step, &eval.subgradient);
        set.project_in_place(&mut w);
    }
    Ok(best.expect("at least one iterate"))
}

/// One FTRL update: the (approximate) minimizer of the regularized loss on
/// `history`. An empty history yields the zero model.
pub fn ftrl_step<T: Scalar>(
    history: &[&LabeledPoint<T>],
    dimension: usize,
    config: &FtrlConfig<T>,
    set: &FeasibleSet<T>,
) -> Result<Minimizer<T>> {
    config.validate()?;
    if history.is_empty() {
        return Ok(Minimizer {
            model: WeightVector::zeros(dimension),
            objective: T::zero(),
        });
    }
    minimize_regularized(history, &config.measure, config.eta, config.inner_iters, set, dimension)
}

/// Average penalty against the best fixed model found for the whole stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegretReport<T> {
    /// Scaled sum of the charged penalties.
    pub avg_penalty: T,
    /// Scaled loss of the best fixed model the batch solvers found. This is
    /// an upper bound on the true minimum, so `regret_upper` can only
    /// underestimate the true regret.
    pub batch_opt_loss: T,
    pub regret_upper: T,
    /// Number of points in the stream.
    pub horizon: usize,
    /// Factor applied to raw sums: `1/T` for unnormalized losses,
    /// `1/(beta T_+ T_-)` for unnormalized pAUC, `1` for normalized losses.
    pub scale: T,
}

/// Scale that turns summed penalties into an average for this measure.
pub fn regret_scale<T: Scalar>(measure: &MeasureSpec<T>, horizon: usize, n_pos: usize, n_neg: usize) -> T {
    if measure.normalize {
        return T::one();
    }
    match measure.kind {
        Measure::PartialAuc { beta } if n_pos > 0 && n_neg > 0 => {
            T::one() / (beta * T::of_usize(n_pos) * T::of_usize(n_neg))
        }
        _ => T::one() / T::of_usize(horizon.max(1)),
    }
}

#[derive(Clone, Debug)]
pub struct FtrlOutput<T> {
    /// `w_1, w_2, ...`: the model charged for each batch.
    pub trajectory: Vec<WeightVector<T>>,
    /// Mean of the trajectory.
    pub averaged_model: WeightVector<T>,
    pub report: RegretReport<T>,
    pub ledger: PenaltyLedger<T>,
    /// Objective achieved by each inner solve.
    pub inner_objectives: Vec<T>,
    pub trace: ExperimentTrace<T>,
}

pub fn run_ftrl<T: Scalar>(
    d: &Dataset<T>,
    order: &StreamOrder,
    config: &FtrlConfig<T>,
    set: &FeasibleSet<T>,
) -> Result<FtrlOutput<T>> {
    run_ftrl_observed(d, order, config, set, &mut NoTrace)
}

/// Streams `d` in `order` in batches of `batch_size_s` (the last may be
/// shorter). Each batch is charged at the FTRL model fit to everything
/// before it; observer rows are taken per step on the running average.
pub fn run_ftrl_observed<T: Scalar>(
    d: &Dataset<T>,
    order: &StreamOrder,
    config: &FtrlConfig<T>,
    set: &FeasibleSet<T>,
    observer: &mut impl EpochObserver<T>,
) -> Result<FtrlOutput<T>> {
    config.validate()?;
    if order.len() != d.len() {
        return Err(Error::invalid("stream order does not match dataset size"));
    }
    if d.is_empty() {
        return Err(Error::invalid("empty stream"));
    }
    let dim = d.dimension();
    let mut clock = Stopwatch::start();
    let mut trace = ExperimentTrace::new();
    let mut ledger = PenaltyLedger::new();
    let mut trajectory = Vec::new();
    let mut inner_objectives = Vec::new();
    let mut average = ModelAverage::new(dim);
    let mut history: Vec<&LabeledPoint<T>> = Vec::with_capacity(d.len());

    clock.snapshot(&mut trace, observer, 0, &average.mean());
    for (step, chunk) in order.indices().chunks(config.batch_size_s).enumerate() {
        let w_t = ftrl_step(&history, dim, config, set)?;
        let batch = d.select(chunk);
        ledger.charge(&config.measure, &history, &batch, &w_t.model)?;
        history.extend(batch);
        average.push(&w_t.model);
        inner_objectives.push(w_t.objective);
        trajectory.push(w_t.model);
        clock.snapshot(&mut trace, observer, step + 1, &average.mean());
    }

    // Best fixed model in hindsight: the better of a long regularized solve,
    // a long unregularized solve, and every model the learner played.
    let long = config.inner_iters.saturating_mul(10);
    let reg = minimize_regularized(&history, &config.measure, config.eta, long, set, dim)?;
    let mut best = config.measure.evaluate_prefix(&history, &reg.model)?.value;
    let unreg = minimize_unregularized(&history, &config.measure, long, set, reg.model)?;
    best = best.min(unreg.objective);
    for w in trajectory.iter().chain(std::iter::once(&average.mean())) {
        best = best.min(config.measure.evaluate_prefix(&history, w)?.value);
    }

    let scale = regret_scale(&config.measure, d.len(), d.n_pos(), d.n_neg());
    let avg_penalty = ledger.cumulative_penalty() * scale;
    let batch_opt_loss = best * scale;
    Ok(FtrlOutput {
        averaged_model: average.mean(),
        trajectory,
        report: RegretReport {
            avg_penalty,
            batch_opt_loss,
            regret_upper: avg_penalty - batch_opt_loss,
            horizon: d.len(),
            scale,
        },
        ledger,
        inner_objectives,
        trace,
    })
}

/// `|L_t(w) - L_t(w2)| / ||w - w2||` for the penalty of appending `batch`
/// to `prefix`; 0 when the models coincide.
pub fn penalty_lipschitz_ratio<T: Scalar>(
    measure: &MeasureSpec<T>,
    prefix: &[&LabeledPoint<T>],
    batch: &[&LabeledPoint<T>],
    w: &WeightVector<T>,
    w2: &WeightVector<T>,
) -> Result<T> {
    let dist = w.distance(w2);
    if dist.is_zero() {
        return Ok(T::zero());
    }
    let a = instantaneous_penalty(prefix, batch, w, measure)?;
    let b = instantaneous_penalty(prefix, batch, w2, measure)?;
    Ok((a - b).abs() / dist)
}

/// Lipschitz ratio of the prec@k penalty for one new point. For points in
/// the unit ball this is at most 8.
pub fn stability_check_preck<T: Scalar>(
    prefix: &[&LabeledPoint<T>],
    new_point: &LabeledPoint<T>,
    w: &WeightVector<T>,
    w2: &WeightVector<T>,
    k: T,
) -> Result<T> {
    penalty_lipschitz_ratio(&MeasureSpec::prec_at_k(k)?, prefix, &[new_point], w, w2)
}

/// PRBEP counterpart of [`stability_check_preck`].
pub fn stability_check_prbep<T: Scalar>(
    prefix: &[&LabeledPoint<T>],
    new_point: &LabeledPoint<T>,
    w: &WeightVector<T>,
    w2: &WeightVector<T>,
) -> Result<T> {
    penalty_lipschitz_ratio(&MeasureSpec::prbep(), prefix, &[new_point], w, w2)
}
