//! Scenario generation, closed-loop trials and aggregated reports.

pub mod generate;
pub mod report;
pub mod trial;

pub use generate::{coverage, generate_scenario, GenerationFailed, GeneratorParams};
pub use report::{
    aggregate, mean_se, run_suite, trace_file_name, trials_csv, AggregateReport, PlannerRow,
    SuiteOutput, TimingRow,
};
pub use trial::{
    run_trial, MonitorRecord, MovedObstacle, Outcome, Trace, TraceEvent, TraceHeader, TraceRecord,
    TrialLimits, TrialResult,
};
