use rand::Rng;
use rand_distr::StandardNormal;

use crate::control::{wrap_angle, SensorFrame};
use crate::drive::Spacing;
use crate::mecanum::{forward_kinematics, WheelSpeeds};

use super::config::SimConfig;
use super::plant::RobotState;

fn noisy<R: Rng>(rng: &mut R, truth: f64, std: f64) -> f64 {
    if std > 0.0 {
        let n: f64 = rng.sample(StandardNormal);
        truth + std * n
    } else {
        truth
    }
}

fn quantize(v: f64, q: f64) -> f64 {
    if q > 0.0 {
        (v / q).round() * q
    } else {
        v
    }
}

/// Synthesizes one sensor frame. Channels with zero noise report the truth.
pub fn sense<R: Rng>(state: &RobotState, config: &SimConfig, rng: &mut R) -> SensorFrame {
    let n = &config.sensor_noise;
    let pitch = noisy(rng, state.pitch, n.pitch);
    let pitch_rate = noisy(rng, state.pitch_rate, n.pitch_rate);
    let yaw = if n.yaw > 0.0 {
        wrap_angle(noisy(rng, state.phi, n.yaw))
    } else {
        state.phi
    };
    let yaw_rate = noisy(rng, state.rate.phi_dot, n.yaw_rate);
    let d_measured = if n.draw_wire > 0.0 {
        state.d * (1.0 + noisy(rng, 0.0, n.draw_wire))
    } else {
        state.d
    };
    let accel_body = [
        noisy(rng, state.body_accel[0], n.accel),
        noisy(rng, state.body_accel[1], n.accel),
    ];
    let mut wheels = state.wheel_speeds;
    for w in wheels.iter_mut() {
        *w = quantize(noisy(rng, *w, n.wheel_speed), n.encoder_quantum);
    }
    let odometry = Spacing::new(d_measured)
        .and_then(|d| forward_kinematics(&config.geometry, d, &WheelSpeeds::new(wheels)))
        .unwrap_or(state.rate);
    SensorFrame {
        t: state.t,
        pitch,
        pitch_rate,
        yaw,
        yaw_rate,
        d_measured,
        d_rate: state.rate.d_dot,
        wheel_speeds_measured: wheels,
        accel_body,
        odometry,
    }
}
