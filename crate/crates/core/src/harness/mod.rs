//! Dataset ingestion, the one-pass evaluation protocol, regret reporting,
//! the greedy adversary and the analytic rates table.

pub mod adversary;
pub mod dataset;
pub mod rates;
pub mod regret;
pub mod run;

pub use adversary::{adversary_generate, AdversaryOutcome};
pub use dataset::{ingest, scale, DataFormat, Dataset};
pub use rates::{emit_rates, RateAlgorithm, RateQuery, RateRow};
pub use regret::{regret_report, KernelRidge, RegretLedger};
pub use run::{
    read_records, run_forecaster, run_stream, write_records, Algo, HarnessConfig, RunOutcome,
    RunRecord, StreamOptions, Task,
};
