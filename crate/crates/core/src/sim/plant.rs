//! State integration.

use serde::{Deserialize, Serialize};

use crate::control::wrap_angle;
use crate::drive::{odd_forward, odd_inverse, OddRate, Spacing};
use crate::dynamics::{forward_dynamics, inverse_dynamics, DynState, OddAccel};
use crate::error::{OddError, Result};
use crate::mecanum::{forward_kinematics, WheelSpeeds};

use super::config::{Mode, Plant, SimConfig};
use super::disturbance::{active_loads, group_forces, slip_rate, wheel_forces, GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub d: f64,
    /// Body-frame rates.
    pub rate: OddRate,
    pub pitch: f64,
    pub pitch_rate: f64,
    pub wheel_angles: [f64; 4],
    /// Actual wheel speeds after the tracking lag.
    pub wheel_speeds: [f64; 4],
    /// Body-frame `(ẍ, ÿ)` over the last step.
    pub body_accel: [f64; 2],
}

impl RobotState {
    pub fn at_rest(d: f64) -> Self {
        RobotState {
            t: 0.0,
            x: 0.0,
            y: 0.0,
            phi: 0.0,
            d,
            rate: OddRate::ZERO,
            pitch: 0.0,
            pitch_rate: 0.0,
            wheel_angles: [0.0; 4],
            wheel_speeds: [0.0; 4],
            body_accel: [0.0; 2],
        }
    }

    pub fn initial(config: &SimConfig) -> Self {
        Self::at_rest(config.initial_d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SimEvent {
    /// The spacing reached a stop and its rate was zeroed.
    SpacingLimitHit { t: f64, d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: RobotState,
    pub event: Option<SimEvent>,
}

/// Inverted-pendulum pitch update at `com_height`, semi-implicit Euler.
pub fn apply_pitch_dynamics(
    state: &RobotState,
    x_accel_cmd: f64,
    config: &SimConfig,
) -> Result<(f64, f64)> {
    if config.mode != Mode::Balance {
        return Err(OddError::ModeMismatch);
    }
    let p = state.pitch;
    let acc = (GRAVITY * p.sin() - x_accel_cmd * p.cos()) / config.com_height;
    let rate = state.pitch_rate + acc * config.dt;
    Ok((p + rate * config.dt, rate))
}

fn track(actual: &[f64; 4], setpoint: &[f64; 4], tau: f64, dt: f64) -> [f64; 4] {
    if tau <= 0.0 {
        return *setpoint;
    }
    let a = 1.0 - (-dt / tau).exp();
    let mut out = *actual;
    for i in 0..4 {
        out[i] += a * (setpoint[i] - actual[i]);
    }
    out
}

fn apply_stiction(rate: OddRate, d: Spacing, threshold: f64) -> OddRate {
    let mut g = odd_inverse(rate, d);
    let mut held = false;
    for v in [&mut g.y_dot_left, &mut g.y_dot_right] {
        if v.abs() < threshold && *v != 0.0 {
            *v = 0.0;
            held = true;
        }
    }
    if held {
        odd_forward(g, d)
    } else {
        rate
    }
}

/// Advances `state` by one `config.dt` with the given wheel speed setpoints.
pub fn step(state: &RobotState, setpoints: &WheelSpeeds, config: &SimConfig) -> Result<StepOutcome> {
    let dt = config.dt;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(OddError::NonPositiveDt(dt));
    }
    let d = Spacing::new(state.d)?;
    let geom = &config.geometry;

    let wheels = track(&state.wheel_speeds, &setpoints.theta_dot, config.wheel_speed_tracking_tau, dt);
    let mut kin = forward_kinematics(geom, d, &WheelSpeeds::new(wheels))?;
    if config.stiction_speed > 0.0 {
        kin = apply_stiction(kin, d, config.stiction_speed);
    }

    let loads = active_loads(config, state.t)?;
    let forces = wheel_forces(config, &loads, state.phi, &wheels);

    let rate = match config.plant {
        Plant::Speed => match forces {
            Some(f) if config.slip_gain != 0.0 => kin + slip_rate(config, &loads.masses, d, &f),
            _ => kin,
        },
        Plant::Force => {
            let dyn_state = DynState { rate: state.rate, d };
            let demand = OddAccel::from_array(
                ((kin - state.rate) * (1.0 / config.force_tau.max(dt))).to_array(),
            );
            let mut f = inverse_dynamics(&config.masses, &dyn_state, &demand);
            if let Some(w) = forces {
                f = f + group_forces(&w);
            }
            let acc = forward_dynamics(&loads.masses, &dyn_state, &f);
            state.rate + OddRate::from_array(acc.to_array()) * dt
        }
    };

    let body_accel = [
        (rate.x_dot - state.rate.x_dot) / dt,
        (rate.y_dot - state.rate.y_dot) / dt,
    ];

    let (pitch, pitch_rate) = match config.mode {
        Mode::Balance => apply_pitch_dynamics(state, body_accel[0], config)?,
        Mode::Caster => (0.0, 0.0),
    };

    let mut rate = rate;
    let mut event = None;
    let mut d_new = state.d + rate.d_dot * dt;
    if d_new > geom.d_max || d_new < geom.d_min {
        d_new = geom.clamp_spacing(d_new);
        rate.d_dot = 0.0;
        event = Some(SimEvent::SpacingLimitHit {
            t: state.t + dt,
            d: d_new,
        });
    }

    let phi = wrap_angle(state.phi + rate.phi_dot * dt);
    let (s, c) = phi.sin_cos();
    let x = state.x + (c * rate.x_dot - s * rate.y_dot) * dt;
    let y = state.y + (s * rate.x_dot + c * rate.y_dot) * dt;

    let mut wheel_angles = state.wheel_angles;
    for (a, w) in wheel_angles.iter_mut().zip(wheels) {
        *a += w * dt;
    }

    Ok(StepOutcome {
        state: RobotState {
            t: state.t + dt,
            x,
            y,
            phi,
            d: d_new,
            rate,
            pitch,
            pitch_rate,
            wheel_angles,
            wheel_speeds: wheels,
            body_accel,
        },
        event,
    })
}
