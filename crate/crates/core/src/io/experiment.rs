use std::fmt;
use std::str::FromStr;

use crate::data::{Dataset, FeasibleSet, Label, StreamOrder, WeightVector, DEFAULT_RADIUS};
use crate::error::{Error, Result};
use crate::online::{run_ftrl_observed, FtrlConfig, RegretReport, DEFAULT_INNER_ITERS};
use crate::scalar::Scalar;
use crate::stochastic::{run_1pmb_observed, run_2pmb_observed, run_psg_observed, SgdConfig, DEFAULT_BUFFER, DEFAULT_PASSES};
use crate::surrogate::MeasureSpec;
use crate::trace::{DatasetObserver, ExperimentTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    OnePass,
    TwoPass,
    Psg,
    Ftrl,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::OnePass => "1pmb",
            SolverKind::TwoPass => "2pmb",
            SolverKind::Psg => "psg",
            SolverKind::Ftrl => "ftrl",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1pmb" => Ok(SolverKind::OnePass),
            "2pmb" => Ok(SolverKind::TwoPass),
            "psg" => Ok(SolverKind::Psg),
            "ftrl" => Ok(SolverKind::Ftrl),
            other => Err(Error::invalid(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig<T> {
    pub solver: SolverKind,
    pub measure: MeasureSpec<T>,
    /// Step scale for the stochastic solvers, regularization weight for FTRL.
    pub eta: T,
    /// Epoch length (FTRL: batch size).
    pub buffer_size_s: usize,
    /// Passes for 1PMB/2PMB, iterations for PSG.
    pub passes: usize,
    pub radius: T,
    pub seed: u64,
    pub inner_iters: usize,
    pub rare_class: Label,
    /// Record every n-th epoch (the initial state is always recorded).
    pub snapshot_every: usize,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn new(solver: SolverKind, measure: MeasureSpec<T>) -> Self {
        ExperimentConfig {
            solver,
            measure,
            eta: T::one(),
            buffer_size_s: DEFAULT_BUFFER,
            passes: DEFAULT_PASSES,
            radius: T::of(DEFAULT_RADIUS),
            seed: 0,
            inner_iters: DEFAULT_INNER_ITERS,
            rare_class: Label::Positive,
            snapshot_every: 1,
        }
    }

    pub fn sgd(&self) -> SgdConfig<T> {
        SgdConfig {
            eta_scale: self.eta,
            buffer_size_s: self.buffer_size_s,
            passes: self.passes,
            measure: self.measure,
            seed: self.seed,
            rare_class: self.rare_class,
        }
    }

    pub fn ftrl(&self) -> FtrlConfig<T> {
        FtrlConfig {
            eta: self.eta,
            inner_iters: self.inner_iters,
            batch_size_s: self.buffer_size_s,
            measure: self.measure,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome<T> {
    pub trace: ExperimentTrace<T>,
    /// Averaged model returned by the solver.
    pub model: WeightVector<T>,
    /// Epochs (FTRL: steps) run.
    pub epochs: usize,
    pub regret: Option<RegretReport<T>>,
}

/// Trains on `train` with the chosen solver, recording the training
/// surrogate and the raw test measure of the averaged model.
pub fn run_experiment<T: Scalar>(
    train: &Dataset<T>,
    test: &Dataset<T>,
    config: &ExperimentConfig<T>,
) -> Result<ExperimentOutcome<T>> {
    if train.dimension() != test.dimension() {
        return Err(Error::invalid(format!(
            "train dimension {} differs from test dimension {}",
            train.dimension(),
            test.dimension()
        )));
    }
    let set = FeasibleSet::new(config.radius)?;
    let order = StreamOrder::random(train.len(), config.seed);
    let mut observer = DatasetObserver::new(train, test, config.measure).every(config.snapshot_every);
    let context = |e: Error| match e {
        Error::InvalidInput(msg) => Error::invalid(format!("{}: {msg}", config.solver)),
        other => other,
    };
    let outcome = match config.solver {
        SolverKind::OnePass | SolverKind::TwoPass | SolverKind::Psg => {
            let sgd = config.sgd();
            let out = match config.solver {
                SolverKind::OnePass => run_1pmb_observed(train, &order, &sgd, &set, &mut observer),
                SolverKind::TwoPass => run_2pmb_observed(train, &order, &sgd, &set, &mut observer),
                _ => run_psg_observed(train, &sgd, &set, &mut observer),
            }
            .map_err(context)?;
            ExperimentOutcome {
                trace: out.trace,
                model: out.averaged_model,
                epochs: out.epochs,
                regret: None,
            }
        }
        SolverKind::Ftrl => {
            let out = run_ftrl_observed(train, &order, &config.ftrl(), &set, &mut observer).map_err(context)?;
            ExperimentOutcome {
                trace: out.trace,
                model: out.averaged_model,
                epochs: out.trajectory.len(),
                regret: Some(out.report),
            }
        }
    };
    Ok(outcome)
}
