use serde::{Deserialize, Serialize};

use crate::control::{mix_commands, mixed_rate, wrap_angle, ControllerSuite};
use crate::drive::{BodyTwist, OddRate, Spacing};
use crate::error::Result;
use crate::sim::{Mode, RobotState, SimConfig, SimEvent, Simulator};

use super::log::{LogRow, TrajectoryLog};
use super::script::CommandScript;

/// Operator reference for one tick. Heading and spacing setpoints are
/// integrated from `rate` unless given absolutely.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Reference {
    pub rate: OddRate,
    pub yaw: Option<f64>,
    pub d: Option<f64>,
}

impl Reference {
    pub fn rate(rate: OddRate) -> Self {
        Reference {
            rate,
            yaw: None,
            d: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickReport {
    /// State before the step and the command applied over it.
    pub row: LogRow,
    pub motor_efforts: [f64; 4],
    pub event: Option<SimEvent>,
}

/// Simulator with the full control stack in the loop.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    sim: Simulator,
    suite: ControllerSuite,
    yaw_sp: f64,
    d_sp: f64,
}

impl ClosedLoop {
    pub fn new(config: SimConfig) -> Result<Self> {
        let state = RobotState::initial(&config);
        Self::with_state(config, state)
    }

    pub fn with_state(config: SimConfig, state: RobotState) -> Result<Self> {
        let suite = ControllerSuite::new(config.gains, config.geometry.d_min, config.geometry.d_max)?;
        let sim = Simulator::with_state(config, state)?;
        Ok(ClosedLoop {
            sim,
            suite,
            yaw_sp: state.phi,
            d_sp: state.d,
        })
    }

    pub fn state(&self) -> &RobotState {
        self.sim.state()
    }

    pub fn config(&self) -> &SimConfig {
        self.sim.config()
    }

    pub fn suite(&self) -> &ControllerSuite {
        &self.suite
    }

    pub fn setpoints(&self) -> (f64, f64) {
        (self.yaw_sp, self.d_sp)
    }

    pub fn tick(&mut self, reference: &Reference) -> Result<TickReport> {
        let cfg = self.sim.config();
        let dt = cfg.dt;
        let mode = cfg.mode;
        let geom = cfg.geometry;
        let r = reference.rate;

        let frame = self.sim.sense();
        let yaw_sp = reference.yaw.map(wrap_angle).unwrap_or(self.yaw_sp);
        let yaw_ff = if reference.yaw.is_some() { 0.0 } else { r.phi_dot };
        let d_sp = geom.clamp_spacing(reference.d.unwrap_or(self.d_sp));
        let d_ff = if reference.d.is_some() { 0.0 } else { r.d_dot };

        let steer = self.suite.steering_track(&frame, yaw_sp, yaw_ff, dt)?;
        let d_rate = self.suite.distance_track(&frame, d_sp, d_ff, dt)?;
        let (balance, op_x) = match mode {
            Mode::Balance => (self.suite.balancing_step(&frame, r.x_dot, dt)?, 0.0),
            Mode::Caster => (0.0, r.x_dot),
        };
        let operator = BodyTwist {
            x_dot: op_x,
            y_dot: r.y_dot,
            phi_dot: 0.0,
        };
        let d_meas = Spacing::new(geom.clamp_spacing(frame.d_measured))?;
        let wheels = mix_commands(balance, steer, d_rate, operator, &geom, d_meas)?;
        let mut motor_efforts = [0.0; 4];
        for (i, e) in motor_efforts.iter_mut().enumerate() {
            *e = self
                .suite
                .motor_step(i + 1, wheels.theta_dot[i], frame.wheel_speeds_measured[i], dt)?;
        }

        let cmd = mixed_rate(balance, steer, d_rate, operator);
        let row = log_row(self.sim.state(), cmd);
        let event = self.sim.step(&wheels)?;

        self.yaw_sp = wrap_angle(yaw_sp + yaw_ff * dt);
        self.d_sp = geom.clamp_spacing(d_sp + d_ff * dt);
        Ok(TickReport {
            row,
            motor_efforts,
            event,
        })
    }
}

fn log_row(s: &RobotState, cmd: OddRate) -> LogRow {
    LogRow {
        t: s.t,
        x: s.x,
        y: s.y,
        phi: s.phi,
        d: s.d,
        pitch: s.pitch,
        vx: s.rate.x_dot,
        vy: s.rate.y_dot,
        wz: s.rate.phi_dot,
        ddot: s.rate.d_dot,
        th1: s.wheel_speeds[0],
        th2: s.wheel_speeds[1],
        th3: s.wheel_speeds[2],
        th4: s.wheel_speeds[3],
        cmd_vx: cmd.x_dot,
        cmd_vy: cmd.y_dot,
        cmd_wz: cmd.phi_dot,
        cmd_ddot: cmd.d_dot,
    }
}

/// Runs `script` from the configured start with the control stack in the
/// loop, logging one row per step.
pub fn run_script(script: &CommandScript, config: &SimConfig) -> Result<TrajectoryLog> {
    script.validate()?;
    let mut config = config.clone();
    if let Some(m) = script.mode {
        config.mode = m;
    }
    if let Some(d) = script.initial_d {
        config.initial_d = d;
    }
    let dt = config.dt;
    let mut lp = ClosedLoop::new(config)?;
    let mut log = TrajectoryLog::default();
    for seg in &script.segments {
        let n = seg.steps(dt);
        log.rows.reserve(n);
        for k in 0..n {
            let reference = Reference {
                rate: seg.sample(k, n),
                yaw: seg.yaw_setpoint,
                d: seg.d_setpoint,
            };
            log.rows.push(lp.tick(&reference)?.row);
        }
    }
    Ok(log)
}
