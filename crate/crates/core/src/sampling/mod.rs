//! Monte Carlo CFR: outcome, external and robust sampling, mini-batches, MCCFR(+).

mod mccfr;
mod minibatch;
mod scheme;
mod traverse;

pub use mccfr::{mccfr_run, EvalSchedule, MccfrConfig, MccfrRun, MccfrSolver, TracePoint};
pub(crate) use mccfr::sample_iteration;
pub(crate) use minibatch::splitmix64;
pub use minibatch::{block_rng, mini_batch_cfv, sample_blocks, Accumulator, MemoryRecord, MemoryRole, SampleMemory};
pub use scheme::{RobustDist, RobustK, SamplingScheme};
pub use traverse::{traverse, weighted_utility, SampleRecordR, SampleRecordS, Traversal};
