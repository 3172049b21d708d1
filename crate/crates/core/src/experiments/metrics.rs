use serde::{Deserialize, Serialize};

use crate::control::wrap_angle;
use crate::error::{OddError, Result};

use super::log::TrajectoryLog;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Distance from the first to the last logged position.
    pub endpoint_deviation: f64,
    /// Minimum distance to the start over the final quarter of the run.
    pub loop_deviation: f64,
    pub heading_drift: f64,
    pub path_length: f64,
}

pub fn compute_metrics(log: &TrajectoryLog) -> Result<RunMetrics> {
    let first = log.rows.first().ok_or(OddError::EmptyLog)?;
    let last = log.rows.last().ok_or(OddError::EmptyLog)?;
    let dist = |x: f64, y: f64| (x - first.x).hypot(y - first.y);
    let span = last.t - first.t;
    let cutoff = first.t + 0.75 * span;
    let loop_deviation = log
        .rows
        .iter()
        .filter(|r| r.t >= cutoff)
        .map(|r| dist(r.x, r.y))
        .fold(f64::INFINITY, f64::min);
    let path_length = log
        .rows
        .windows(2)
        .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
        .sum();
    Ok(RunMetrics {
        endpoint_deviation: dist(last.x, last.y),
        loop_deviation,
        heading_drift: wrap_angle(last.phi - first.phi).abs(),
        path_length,
    })
}
