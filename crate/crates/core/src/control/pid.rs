use serde::{Deserialize, Serialize};

use crate::error::{OddError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub output_min: f64,
    pub output_max: f64,
    /// Bound on `|∫e dt|`.
    pub integral_limit: f64,
}

impl PidGains {
    /// Gains with symmetric output bound `±limit` and no integral bound.
    pub fn new(kp: f64, ki: f64, kd: f64, limit: f64) -> Self {
        PidGains {
            kp,
            ki,
            kd,
            output_min: -limit,
            output_max: limit,
            integral_limit: f64::INFINITY,
        }
    }

    pub fn with_integral_limit(mut self, limit: f64) -> Self {
        self.integral_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.kp, self.ki, self.kd].iter().all(|g| g.is_finite());
        if !finite {
            return Err(OddError::InvalidGains("gains must be finite".into()));
        }
        if !(self.output_min < self.output_max) {
            return Err(OddError::InvalidGains(format!(
                "output_min {} must be below output_max {}",
                self.output_min, self.output_max
            )));
        }
        if !(self.integral_limit >= 0.0) {
            return Err(OddError::InvalidGains(format!(
                "integral_limit must be >= 0, got {}",
                self.integral_limit
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidMemory {
    pub integral_accum: f64,
    pub prev_error: f64,
    pub initialized: bool,
}

impl PidMemory {
    pub fn reset(&mut self) {
        *self = PidMemory::default();
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(OddError::NonPositiveDt(dt));
    }
    Ok(())
}

/// One PID update. The derivative is a backward difference of the error and
/// is zero on the first sample.
pub fn pid_step(gains: &PidGains, memory: &mut PidMemory, error: f64, dt: f64) -> Result<f64> {
    check_dt(dt)?;
    let derivative = if memory.initialized {
        (error - memory.prev_error) / dt
    } else {
        0.0
    };
    Ok(pid_with_derivative(gains, memory, error, derivative, dt))
}

/// PID update with an externally supplied error derivative, e.g. a measured
/// rate. Does not check `dt`.
pub(crate) fn pid_with_derivative(
    gains: &PidGains,
    memory: &mut PidMemory,
    error: f64,
    derivative: f64,
    dt: f64,
) -> f64 {
    let lim = gains.integral_limit;
    let fixed = gains.kp * error + gains.kd * derivative;
    let candidate = if gains.ki != 0.0 {
        (memory.integral_accum + error * dt).clamp(-lim, lim)
    } else {
        memory.integral_accum
    };
    if gains.ki != 0.0 {
        // Anti-windup: the integral may grow only until the output reaches
        // its bound, and never further once past it.
        let (a, b) = (
            (gains.output_min - fixed) / gains.ki,
            (gains.output_max - fixed) / gains.ki,
        );
        let (lo, hi) = (a.min(b), a.max(b));
        let old = memory.integral_accum;
        memory.integral_accum = if candidate > old {
            candidate.min(hi.max(old))
        } else {
            candidate.max(lo.min(old))
        };
    }
    memory.prev_error = error;
    memory.initialized = true;
    (fixed + gains.ki * memory.integral_accum).clamp(gains.output_min, gains.output_max)
}
