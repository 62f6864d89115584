//! File formats, synthetic data and experiment orchestration.

mod experiment;
mod libsvm;
mod model;
mod split;
mod synth;
mod trace_csv;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentOutcome, SolverKind};
pub use libsvm::{parse_libsvm, read_libsvm, read_libsvm_file, write_libsvm};
pub use model::{load_model, save_model};
pub use split::stratified_split;
pub use synth::{gen_synthetic, SynthSpec};
pub use trace_csv::{read_trace, write_trace, TRACE_HEADER};
