//! Scripted trajectory experiments, logs and deviation metrics.

mod log;
mod metrics;
mod runner;
mod script;

pub use log::{export_log, import_log, LogRow, TrajectoryLog, LOG_HEADER};
pub use metrics::{compute_metrics, RunMetrics};
pub use runner::{run_script, ClosedLoop, Reference, TickReport};
pub use script::{builtin_script, builtin_script_with, CommandScript, ScriptParams, Segment, BUILTIN_SCRIPTS};
