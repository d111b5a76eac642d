//! Manifest-driven experiment runs and trace comparison.

mod compare;
mod manifest;
mod runner;
mod trace;

pub use compare::{compare, load_trace, CheckPoint, Comparison, Expectation, ExpectationCheck, LabeledTrace};
pub use manifest::{CheckpointPolicy, Method, NeuralSettings, RunManifest, Scalar};
pub use runner::{load_checkpoint, run, RunOutcome};
pub use trace::{check_trace, read_trace, write_coverage, write_trace, TraceRow, COVERAGE_HEADER, TRACE_HEADER};
