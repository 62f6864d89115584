//! Mini-batch stochastic solvers and the full-batch projected subgradient
//! baseline.
//!
//! All three take descent steps `w <- P[w - eta_e g]` with `eta_e = eta /
//! sqrt(e)`, `e = 1, 2, ...`, and return the mean of the post-step iterates.
//! Within an epoch the buffered points are evaluated in dataset order, so
//! an epoch's subgradient depends only on which points it holds.

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, FeasibleSet, Label, StreamOrder, WeightVector};
use crate::error::{Error, Result};
use crate::reservoir::ReservoirBuffer;
use crate::scalar::Scalar;
use crate::surrogate::MeasureSpec;
use crate::trace::{DatasetObserver, EpochObserver, ExperimentTrace, ModelAverage, Stopwatch};

pub const DEFAULT_BUFFER: usize = 500;
pub const DEFAULT_PASSES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgdConfig<T> {
    /// Step length scale.
    pub eta_scale: T,
    /// Buffer size, which is also the epoch length.
    pub buffer_size_s: usize,
    pub passes: usize,
    pub measure: MeasureSpec<T>,
    pub seed: u64,
    /// Class kept in the two-pass solver's reservoir.
    pub rare_class: Label,
}

impl<T: Scalar> SgdConfig<T> {
    pub fn new(measure: MeasureSpec<T>) -> Self {
        SgdConfig {
            eta_scale: T::one(),
            buffer_size_s: DEFAULT_BUFFER,
            passes: DEFAULT_PASSES,
            measure,
            seed: 0,
            rare_class: Label::Positive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_scale > T::zero()) || !self.eta_scale.is_finite() {
            return Err(Error::invalid(format!("eta must be positive, got {}", self.eta_scale)));
        }
        if self.buffer_size_s == 0 {
            return Err(Error::invalid("buffer size must be at least 1"));
        }
        if self.passes == 0 {
            return Err(Error::invalid("passes must be at least 1"));
        }
        self.measure.validate()
    }
}

#[derive(Clone, Debug)]
pub struct SolverOutput<T> {
    pub averaged_model: WeightVector<T>,
    pub final_model: WeightVector<T>,
    pub trace: ExperimentTrace<T>,
    pub epochs: usize,
    /// Epochs whose buffer violated the measure's preconditions.
    pub skipped_epochs: usize,
    /// Surrogate value at `w_{e-1}` for each non-skipped epoch, on that
    /// epoch's points.
    pub epoch_losses: Vec<T>,
    /// Solver time, excluding observer snapshots.
    pub elapsed: Duration,
}

impl<T: Scalar> SolverOutput<T> {
    /// Running minimum of the per-epoch losses.
    pub fn best_loss_history(&self) -> Vec<T> {
        self.epoch_losses
            .iter()
            .scan(T::infinity(), |best, &v| {
                *best = best.min(v);
                Some(*best)
            })
            .collect()
    }
}

/// Seed for the reshuffle before pass `pass` (pass 0 uses the caller's order).
fn pass_seed(seed: u64, pass: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(pass as u64 + 1)
}

/// Shared epoch loop: iterate state, averaging and tracing.
struct Descent<'a, T, O> {
    d: &'a Dataset<T>,
    config: &'a SgdConfig<T>,
    set: &'a FeasibleSet<T>,
    w: WeightVector<T>,
    average: ModelAverage<T>,
    epoch: usize,
    skipped: usize,
    losses: Vec<T>,
    clock: Stopwatch,
    trace: ExperimentTrace<T>,
    observer: &'a mut O,
}

impl<'a, T: Scalar, O: EpochObserver<T>> Descent<'a, T, O> {
    fn new(d: &'a Dataset<T>, config: &'a SgdConfig<T>, set: &'a FeasibleSet<T>, observer: &'a mut O) -> Self {
        let mut run = Descent {
            d,
            config,
            set,
            w: WeightVector::zeros(d.dimension()),
            average: ModelAverage::new(d.dimension()),
            epoch: 0,
            skipped: 0,
            losses: Vec::new(),
            clock: Stopwatch::start(),
            trace: ExperimentTrace::new(),
            observer,
        };
        let initial = run.average.mean();
        run.clock.snapshot(&mut run.trace, run.observer, 0, &initial);
        run
    }

    /// One epoch over the points at `indices` (sorted in place).
    fn epoch(&mut self, indices: &mut [usize]) -> Result<()> {
        indices.sort_unstable();
        self.epoch += 1;
        let points = self.d.select(indices);
        let n_pos = points.iter().filter(|p| p.is_positive()).count();
        if self.config.measure.admits(n_pos, points.len() - n_pos) {
            let eval = self.config.measure.evaluate(&points, &self.w)?;
            let step = self.config.eta_scale / T::of_usize(self.epoch).sqrt();
            self.w.add_scaled(-step, &eval.subgradient);
            self.set.project_in_place(&mut self.w);
            self.losses.push(eval.value);
        } else {
            self.skipped += 1;
        }
        self.average.push(&self.w);
        let mean = self.average.mean();
        self.clock.snapshot(&mut self.trace, self.observer, self.epoch, &mean);
        Ok(())
    }

    fn finish(self) -> SolverOutput<T> {
        SolverOutput {
            averaged_model: self.average.mean(),
            final_model: self.w,
            trace: self.trace,
            epochs: self.epoch,
            skipped_epochs: self.skipped,
            epoch_losses: self.losses,
            elapsed: self.clock.elapsed(),
        }
    }
}

fn check_order<T: Scalar>(d: &Dataset<T>, order: &StreamOrder) -> Result<()> {
    if order.len() != d.len() {
        return Err(Error::invalid(format!(
            "stream order has {} entries for {} points",
            order.len(),
            d.len()
        )));
    }
    Ok(())
}

/// Single pass with mini-batches. Traces the surrogate and raw measure on
/// the training data after every epoch.
pub fn run_1pmb<T: Scalar>(
    d: &Dataset<T>,
    order: &StreamOrder,
    config: &SgdConfig<T>,
    set: &FeasibleSet<T>,
) -> Result<SolverOutput<T>> {
    let mut observer = DatasetObserver::new(d, d, config.measure);
    run_1pmb_observed(d, order, config, set, &mut observer)
}

/// The stream is `passes` consecutive visits of the data (the first in
/// `order`, the rest reshuffled) cut into epochs of `buffer_size_s`, so the
/// epoch count is `ceil(n * passes / s)` and step sizes keep decaying
/// across passes.
pub fn run_1pmb_observed<T: Scalar>(
    d: &Dataset<T>,
    order: &StreamOrder,
    config: &SgdConfig<T>,
    set: &FeasibleSet<T>,
    observer: &mut impl EpochObserver<T>,
) -> Result<SolverOutput<T>> {
    config.validate()?;
    check_order(d, order)?;
    if d.is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    let mut run = Descent::new(d, config, set, observer);
    let mut buffer = Vec::with_capacity(config.buffer_size_s);
    for pass in 0..config.passes {
        let reshuffled;
        let visit = if pass == 0 {
            order.indices()
        } else {
            reshuffled = StreamOrder::random(d.len(), pass_seed(config.seed, pass));
            reshuffled.indices()
        };
        for &i in visit {
            buffer.push(i);
            if buffer.len() == config.buffer_size_s {
                run.epoch(&mut buffer)?;
                buffer.clear();
            }
        }
    }
    if !buffer.is_empty() {
        run.epoch(&mut buffer)?;
    }
    Ok(run.finish())
}

pub fn run_2pmb<T: Scalar>(
    d: &Dataset<T>,
    order: &StreamOrder,
    config: &SgdConfig<T>,
    set: &FeasibleSet<T>,
) -> Result<SolverOutput<T>> {
    let mut observer = DatasetObserver::new(d, d, config.measure);
    run_2pmb_observed(d, order, config, set, &mut observer)
}

/// Rare-class points sampled in the first pass.
pub fn rare_class_sample<T: Scalar>(d: &Dataset<T>, order: &StreamOrder, config: &SgdConfig<T>) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reservoir = ReservoirBuffer::new(config.buffer_size_s);
    for &i in order.indices() {
        if d.point(i).label() == config.rare_class {
            reservoir.offer(i, &mut rng);
        }
    }
    let mut kept = reservoir.into_items();
    kept.sort_unstable();
    kept
}

/// Two passes with mini-batches: the first reservoir-samples up to
/// `buffer_size_s` points of the rare class, the second streams the other
/// class in epochs of `buffer_size_s`, each evaluated together with the
/// fixed rare-class sample. Further passes repeat the second pass over a
/// reshuffled stream.
pub fn run_2pmb_observed<T: Scalar>(
    d: &Dataset<T>,
    order: &StreamOrder,
    config: &SgdConfig<T>,
    set: &FeasibleSet<T>,
    observer: &mut impl EpochObserver<T>,
) -> Result<SolverOutput<T>> {
    config.validate()?;
    check_order(d, order)?;
    if d.n_pos() == 0 || d.n_neg() == 0 {
        return Err(Error::invalid("two-pass solver needs both positives and negatives"));
    }
    let rare = rare_class_sample(d, order, config);
    let s = config.buffer_size_s;
    let mut run = Descent::new(d, config, set, observer);
    let mut buffer: Vec<usize> = Vec::with_capacity(s + rare.len());
    let mut filled = 0;
    for pass in 0..config.passes {
        let reshuffled;
        let visit = if pass == 0 {
            order.indices()
        } else {
            reshuffled = StreamOrder::random(d.len(), pass_seed(config.seed, pass));
            reshuffled.indices()
        };
        for &i in visit.iter().filter(|&&i| d.point(i).label() != config.rare_class) {
            buffer.push(i);
            filled += 1;
            if filled == s {
                buffer.extend_from_slice(&rare);
                run.epoch(&mut buffer)?;
                buffer.clear();
                filled = 0;
            }
        }
    }
    if filled > 0 {
        buffer.extend_from_slice(&rare);
        run.epoch(&mut buffer)?;
    }
    Ok(run.finish())
}

pub fn run_psg<T: Scalar>(d: &Dataset<T>, config: &SgdConfig<T>, set: &FeasibleSet<T>) -> Result<SolverOutput<T>> {
    let mut observer = DatasetObserver::new(d, d, config.measure);
    run_psg_observed(d, config, set, &mut observer)
}

/// Full-batch projected subgradient descent for `passes` iterations.
pub fn run_psg_observed<T: Scalar>(
    d: &Dataset<T>,
    config: &SgdConfig<T>,
    set: &FeasibleSet<T>,
    observer: &mut impl EpochObserver<T>,
) -> Result<SolverOutput<T>> {
    config.validate()?;
    if !config.measure.admits(d.n_pos(), d.n_neg()) {
        return Err(Error::invalid(format!(
            "dataset with {} positives and {} negatives does not admit the {} surrogate",
            d.n_pos(),
            d.n_neg(),
            config.measure.name()
        )));
    }
    let mut run = Descent::new(d, config, set, observer);
    let mut all: Vec<usize> = (0..d.len()).collect();
    for _ in 0..config.passes {
        run.epoch(&mut all)?;
    }
    Ok(run.finish())
}
