//! Learning linear models for non-decomposable performance measures
//! (precision@k, PRBEP, partial AUC, F-measure) through structural SVM
//! surrogates.
//!
//! The crate provides surrogate evaluators with subgradients, an online
//! follow-the-regularized-leader learner with regret accounting, one- and
//! two-pass mini-batch stochastic solvers, a full-batch projected
//! subgradient baseline, raw evaluation measures, and brute-force oracles.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod data;
pub mod error;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod scalar;
pub mod online;
pub mod reservoir;
pub mod stochastic;
pub mod surrogate;
pub mod trace;
pub mod verify;

pub use data::{project, score, shuffle, Dataset, FeasibleSet, Label, LabeledPoint, StreamOrder, WeightVector};
pub use error::{Error, Result};
pub use metrics::{EvalResult, MeasureName};
pub use scalar::Scalar;
pub use surrogate::{LossEval, Measure, MeasureSpec, TopBetaSelection, Witness};

pub type Point = LabeledPoint<f64>;
pub type Data = Dataset<f64>;
pub type Weights = WeightVector<f64>;
pub type Ball = FeasibleSet<f64>;
pub type Spec = MeasureSpec<f64>;
