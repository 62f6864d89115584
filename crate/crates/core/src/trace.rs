//! Per-epoch snapshots of a training run.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, WeightVector};
use crate::metrics::raw_measure;
use crate::scalar::Scalar;
use crate::surrogate::MeasureSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow<T> {
    pub wall_clock_ms: u64,
    pub epoch: usize,
    pub train_surrogate: T,
    pub test_measure: T,
}

/// Rows ordered by epoch; wall-clock excludes the time spent producing the
/// snapshots themselves.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentTrace<T> {
    pub rows: Vec<TraceRow<T>>,
}

impl<T> ExperimentTrace<T> {
    pub fn new() -> Self {
        ExperimentTrace { rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow<T>> {
        self.rows.last()
    }
}

/// Called after every epoch (and once before the first) with the current
/// averaged model. Returning `Some((train_surrogate, test_measure))` records
/// a trace row.
pub trait EpochObserver<T> {
    fn observe(&mut self, epoch: usize, averaged: &WeightVector<T>) -> Option<(T, T)>;
}

/// Records nothing.
pub struct NoTrace;

impl<T> EpochObserver<T> for NoTrace {
    fn observe(&mut self, _: usize, _: &WeightVector<T>) -> Option<(T, T)> {
        None
    }
}

impl<T, F> EpochObserver<T> for F
where
    F: FnMut(usize, &WeightVector<T>) -> Option<(T, T)>,
{
    fn observe(&mut self, epoch: usize, averaged: &WeightVector<T>) -> Option<(T, T)> {
        self(epoch, averaged)
    }
}

/// Evaluates the surrogate on a training set and the matching raw measure
/// on an evaluation set every `every` epochs.
pub struct DatasetObserver<'a, T> {
    train: &'a Dataset<T>,
    test: &'a Dataset<T>,
    measure: MeasureSpec<T>,
    every: usize,
}

impl<'a, T: Scalar> DatasetObserver<'a, T> {
    pub fn new(train: &'a Dataset<T>, test: &'a Dataset<T>, measure: MeasureSpec<T>) -> Self {
        DatasetObserver {
            train,
            test,
            measure,
            every: 1,
        }
    }

    pub fn every(mut self, every: usize) -> Self {
        self.every = every.max(1);
        self
    }
}

impl<T: Scalar> EpochObserver<T> for DatasetObserver<'_, T> {
    fn observe(&mut self, epoch: usize, averaged: &WeightVector<T>) -> Option<(T, T)> {
        if !epoch.is_multiple_of(self.every) {
            return None;
        }
        let train = self
            .measure
            .evaluate_prefix(&self.train.refs(), averaged)
            .map_or(T::nan(), |e| e.value);
        let test = raw_measure(self.test, averaged, &self.measure).map_or(T::nan(), |r| r.value);
        Some((train, test))
    }
}

/// Wall clock that can exclude observer time.
pub(crate) struct Stopwatch {
    start: Instant,
    excluded: Duration,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch {
            start: Instant::now(),
            excluded: Duration::ZERO,
        }
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed().saturating_sub(self.excluded)
    }

    /// Runs the observer with the clock paused and appends a row if it
    /// produced one.
    pub(crate) fn snapshot<T: Copy>(
        &mut self,
        trace: &mut ExperimentTrace<T>,
        observer: &mut impl EpochObserver<T>,
        epoch: usize,
        averaged: &WeightVector<T>,
    ) {
        let wall_clock_ms = self.elapsed().as_millis() as u64;
        let paused = Instant::now();
        let row = observer.observe(epoch, averaged);
        self.excluded += paused.elapsed();
        if let Some((train_surrogate, test_measure)) = row {
            trace.rows.push(TraceRow {
                wall_clock_ms,
                epoch,
                train_surrogate,
                test_measure,
            });
        }
    }
}

/// Running mean of a sequence of models.
pub(crate) struct ModelAverage<T> {
    sum: WeightVector<T>,
    count: usize,
}

impl<T: Scalar> ModelAverage<T> {
    pub(crate) fn new(dimension: usize) -> Self {
        ModelAverage {
            sum: WeightVector::zeros(dimension),
            count: 0,
        }
    }

    pub(crate) fn push(&mut self, w: &WeightVector<T>) {
        self.sum.add_scaled(T::one(), w);
        self.count += 1;
    }

    pub(crate) fn mean(&self) -> WeightVector<T> {
        if self.count == 0 {
            return self.sum.clone();
        }
        self.sum.scaled(T::one() / T::of_usize(self.count))
    }
}
