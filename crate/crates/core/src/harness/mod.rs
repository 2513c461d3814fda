//! Seeded random ensembles and the verification suites behind `distill-lab verify`.

mod ensemble;
mod suite;

pub use ensemble::{
    random_state, sample_ensemble, EnsembleSpec, Filter, Sample, SamplingStats,
    MAX_CONSECUTIVE_REJECTIONS,
};
pub use suite::{check_trial, run_suite, SuiteName, SuiteReport, TrialFailure, TrialOutcome};
