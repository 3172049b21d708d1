use serde::{Deserialize, Serialize};

use super::pid::{check_dt, pid_with_derivative, PidGains, PidMemory};
use crate::drive::OddRate;
use crate::error::{OddError, Result};

/// One synthesized sensor sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorFrame {
    pub t: f64,
    pub pitch: f64,
    pub pitch_rate: f64,
    pub yaw: f64,
    pub yaw_rate: f64,
    pub d_measured: f64,
    pub d_rate: f64,
    pub wheel_speeds_measured: [f64; 4],
    pub accel_body: [f64; 2],
    /// Body rates reconstructed from the encoders.
    pub odometry: OddRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlGains {
    /// PD on pitch; `ki` unused.
    pub balance_pitch: PidGains,
    /// PI on `v_measured − v_setpoint`.
    pub balance_velocity: PidGains,
    /// Positive velocity feedback.
    pub balance_k_pf: f64,
    pub balance_limit: f64,
    /// PD on wrapped yaw error.
    pub steering: PidGains,
    /// PD on spacing error, producing a spacing-rate setpoint.
    pub distance_outer: PidGains,
    /// PI on spacing-rate error.
    pub distance_inner: PidGains,
    /// PI on wheel speed, effort in [-1, 1].
    pub motor: PidGains,
}

impl Default for ControlGains {
    fn default() -> Self {
        ControlGains {
            balance_pitch: PidGains::new(3.0, 0.0, 0.2, f64::INFINITY),
            balance_velocity: PidGains::new(0.3, 0.1, 0.0, 1.0).with_integral_limit(5.0),
            balance_k_pf: 0.8,
            balance_limit: 2.0,
            steering: PidGains::new(4.0, 0.0, 0.1, 3.0),
            distance_outer: PidGains::new(5.0, 0.0, 0.0, 0.4),
            distance_inner: PidGains::new(0.2, 10.0, 0.0, 0.2).with_integral_limit(0.05),
            motor: PidGains::new(0.02, 0.5, 0.0, 1.0).with_integral_limit(2.0),
        }
    }
}

impl ControlGains {
    pub fn validate(&self) -> Result<()> {
        for g in [
            &self.balance_pitch,
            &self.balance_velocity,
            &self.steering,
            &self.distance_outer,
            &self.distance_inner,
            &self.motor,
        ] {
            g.validate()?;
        }
        if !(self.balance_k_pf.is_finite() && self.balance_limit > 0.0) {
            return Err(OddError::InvalidGains(
                "balance k_pf must be finite and balance_limit positive".into(),
            ));
        }
        Ok(())
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSuite {
    pub gains: ControlGains,
    pub d_min: f64,
    pub d_max: f64,
    pub balance_pitch_mem: PidMemory,
    pub balance_velocity_mem: PidMemory,
    pub steering_mem: PidMemory,
    pub distance_outer_mem: PidMemory,
    pub distance_inner_mem: PidMemory,
    pub motor_mem: [PidMemory; 4],
}

impl ControllerSuite {
    pub fn new(gains: ControlGains, d_min: f64, d_max: f64) -> Result<Self> {
        gains.validate()?;
        Ok(ControllerSuite {
            gains,
            d_min,
            d_max,
            balance_pitch_mem: PidMemory::default(),
            balance_velocity_mem: PidMemory::default(),
            steering_mem: PidMemory::default(),
            distance_outer_mem: PidMemory::default(),
            distance_inner_mem: PidMemory::default(),
            motor_mem: [PidMemory::default(); 4],
        })
    }

    pub fn reset(&mut self) {
        self.balance_pitch_mem.reset();
        self.balance_velocity_mem.reset();
        self.steering_mem.reset();
        self.distance_outer_mem.reset();
        self.distance_inner_mem.reset();
        self.motor_mem.iter_mut().for_each(PidMemory::reset);
    }

    /// Forward-speed correction keeping the body upright.
    pub fn balancing_step(
        &mut self,
        sensors: &SensorFrame,
        velocity_setpoint: f64,
        dt: f64,
    ) -> Result<f64> {
        check_dt(dt)?;
        let g = &self.gains;
        let v = sensors.odometry.x_dot;
        let pd = pid_with_derivative(
            &g.balance_pitch,
            &mut self.balance_pitch_mem,
            sensors.pitch,
            sensors.pitch_rate,
            dt,
        );
        let e_v = v - velocity_setpoint;
        let pi = pid_with_derivative(&g.balance_velocity, &mut self.balance_velocity_mem, e_v, 0.0, dt);
        let lim = g.balance_limit;
        Ok((pd + pi + g.balance_k_pf * v).clamp(-lim, lim))
    }

    pub fn steering_step(&mut self, sensors: &SensorFrame, yaw_setpoint: f64, dt: f64) -> Result<f64> {
        self.steering_track(sensors, yaw_setpoint, 0.0, dt)
    }

    /// Steering with a yaw-rate feedforward for a moving setpoint.
    pub fn steering_track(
        &mut self,
        sensors: &SensorFrame,
        yaw_setpoint: f64,
        yaw_rate_setpoint: f64,
        dt: f64,
    ) -> Result<f64> {
        check_dt(dt)?;
        let g = &self.gains.steering;
        let e = wrap_angle(yaw_setpoint - sensors.yaw);
        let fb = pid_with_derivative(g, &mut self.steering_mem, e, yaw_rate_setpoint - sensors.yaw_rate, dt);
        Ok((yaw_rate_setpoint + fb).clamp(g.output_min, g.output_max))
    }

    pub fn distance_step(&mut self, sensors: &SensorFrame, d_setpoint: f64, dt: f64) -> Result<f64> {
        self.distance_track(sensors, d_setpoint, 0.0, dt)
    }

    /// Spacing control with a spacing-rate feedforward for a moving setpoint.
    /// The command never drives the measured spacing past its limits within
    /// one step.
    pub fn distance_track(
        &mut self,
        sensors: &SensorFrame,
        d_setpoint: f64,
        d_rate_setpoint: f64,
        dt: f64,
    ) -> Result<f64> {
        check_dt(dt)?;
        let outer = &self.gains.distance_outer;
        let inner = &self.gains.distance_inner;
        let d_sp = d_setpoint.clamp(self.d_min, self.d_max);
        let e = d_sp - sensors.d_measured;
        let rate_sp = (d_rate_setpoint
            + pid_with_derivative(
                outer,
                &mut self.distance_outer_mem,
                e,
                d_rate_setpoint - sensors.d_rate,
                dt,
            ))
        .clamp(outer.output_min, outer.output_max);
        let trim = pid_with_derivative(
            inner,
            &mut self.distance_inner_mem,
            rate_sp - sensors.d_rate,
            0.0,
            dt,
        );
        let hi = (self.d_max - sensors.d_measured) / dt;
        let lo = (self.d_min - sensors.d_measured) / dt;
        Ok((rate_sp + trim).min(hi).max(lo))
    }

    /// Wheel speed loop; `wheel_index` is 1-based.
    pub fn motor_step(
        &mut self,
        wheel_index: usize,
        speed_setpoint: f64,
        speed_measured: f64,
        dt: f64,
    ) -> Result<f64> {
        check_dt(dt)?;
        if !(1..=4).contains(&wheel_index) {
            return Err(OddError::BadWheelIndex(wheel_index));
        }
        let g = &self.gains.motor;
        let mem = &mut self.motor_mem[wheel_index - 1];
        let effort = pid_with_derivative(g, mem, speed_setpoint - speed_measured, 0.0, dt);
        Ok(effort.clamp(-1.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn zero_gains() -> ControlGains {
        let z = PidGains::new(0.0, 0.0, 0.0, 100.0);
        ControlGains {
            balance_pitch: z,
            balance_velocity: z,
            balance_k_pf: 0.0,
            balance_limit: 100.0,
            steering: z,
            distance_outer: z,
            distance_inner: z,
            motor: PidGains::new(0.0, 0.0, 0.0, 1.0),
        }
    }

    fn suite(g: ControlGains) -> ControllerSuite {
        ControllerSuite::new(g, 0.25, 0.8).unwrap()
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn balancing_examples() {
        let mut s = suite(ControlGains::default());
        let f = SensorFrame::default();
        assert_eq!(s.balancing_step(&f, 0.0, 0.005).unwrap(), 0.0);

        let mut g = zero_gains();
        g.balance_pitch.kp = 10.0;
        let mut s = suite(g);
        let f = SensorFrame {
            pitch: 0.1,
            ..Default::default()
        };
        assert!((s.balancing_step(&f, 0.0, 0.005).unwrap() - 1.0).abs() < 1e-12);

        let mut g = zero_gains();
        g.balance_k_pf = 0.2;
        let mut s = suite(g);
        let f = SensorFrame {
            odometry: OddRate::new(1.0, 0.0, 0.0, 0.0),
            ..Default::default()
        };
        assert!((s.balancing_step(&f, 0.0, 0.005).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn steering_examples() {
        let mut s = suite(ControlGains::default());
        let f = SensorFrame {
            yaw: 0.7,
            ..Default::default()
        };
        assert_eq!(s.steering_step(&f, 0.7, 0.005).unwrap(), 0.0);

        let mut g = zero_gains();
        g.steering.kp = 1.0;
        let mut s = suite(g);
        let out = s.steering_step(&SensorFrame::default(), FRAC_PI_2, 0.005).unwrap();
        assert!((out - FRAC_PI_2).abs() < 1e-12);

        let mut g = zero_gains();
        g.steering.kd = 0.5;
        let mut s = suite(g);
        let f = SensorFrame {
            yaw_rate: 1.0,
            ..Default::default()
        };
        assert!((s.steering_step(&f, 0.0, 0.005).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn steering_error_continuous_at_seam() {
        let mut g = zero_gains();
        g.steering.kp = 1.0;
        let eps = 1e-3;
        let a = suite(g)
            .steering_step(&SensorFrame { yaw: PI - eps, ..Default::default() }, 0.0, 0.01)
            .unwrap();
        let b = suite(g)
            .steering_step(&SensorFrame { yaw: -PI + eps, ..Default::default() }, 0.0, 0.01)
            .unwrap();
        assert!((a.abs() - b.abs()).abs() < 3.0 * eps);
    }

    #[test]
    fn distance_examples() {
        let mut s = suite(ControlGains::default());
        let f = SensorFrame {
            d_measured: 0.5,
            ..Default::default()
        };
        assert_eq!(s.distance_step(&f, 0.5, 0.005).unwrap(), 0.0);

        let f = SensorFrame {
            d_measured: 0.8,
            ..Default::default()
        };
        let mut s = suite(ControlGains::default());
        let cmd = s.distance_step(&f, 2.0, 0.005).unwrap();
        assert!(cmd <= 0.0);
    }

    #[test]
    fn motor_examples() {
        let mut s = suite(ControlGains::default());
        assert_eq!(s.motor_step(1, 3.0, 3.0, 0.005).unwrap(), 0.0);

        let mut g = zero_gains();
        g.motor.kp = 0.1;
        let mut s = suite(g);
        assert!((s.motor_step(2, 5.0, 0.0, 0.005).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(s.motor_step(0, 0.0, 0.0, 0.005), Err(OddError::BadWheelIndex(0))));
        assert!(matches!(s.motor_step(5, 0.0, 0.0, 0.005), Err(OddError::BadWheelIndex(5))));
        assert!(s.motor_step(1, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn motor_saturates_without_windup() {
        let mut g = zero_gains();
        g.motor = PidGains::new(0.0, 1.0, 0.0, 1.0).with_integral_limit(10.0);
        let mut s = suite(g);
        let mut last = 0.0;
        for _ in 0..1000 {
            let e = s.motor_step(3, 1.0, 0.0, 0.01).unwrap();
            assert!(e >= last && e <= 1.0);
            last = e;
        }
        assert_eq!(last, 1.0);
        assert!(s.motor_mem[2].integral_accum <= 1.0 + 0.01 + 1e-12);
    }

    #[test]
    fn loops_reject_bad_dt() {
        let mut s = suite(ControlGains::default());
        let f = SensorFrame::default();
        assert!(s.balancing_step(&f, 0.0, 0.0).is_err());
        assert!(s.steering_step(&f, 0.0, -1.0).is_err());
        assert!(s.distance_step(&f, 0.4, f64::NAN).is_err());
    }
}
