//! Simulation configuration and its flat TOML file form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{ControlGains, PidGains};
use crate::dynamics::MassPair;
use crate::error::{OddError, Result};
use crate::mecanum::RigGeometry;

use super::disturbance::Disturbance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Support casters pin pitch at zero.
    Caster,
    /// Self-balancing on the wheel line.
    Balance,
}

impl std::str::FromStr for Mode {
    type Err = OddError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "caster" => Ok(Mode::Caster),
            "balance" => Ok(Mode::Balance),
            other => Err(OddError::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plant {
    /// Wheel speeds are authoritative; body rates follow kinematically.
    Speed,
    /// Body rates are integrated from group forces.
    Force,
}

/// Standard deviations per sensor channel; zero disables a channel's noise.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorNoise {
    pub pitch: f64,
    pub pitch_rate: f64,
    pub yaw: f64,
    pub yaw_rate: f64,
    pub accel: f64,
    pub wheel_speed: f64,
    /// Relative error of the spacing sensor.
    pub draw_wire: f64,
    /// Encoder speed resolution, rad/s; 0 disables quantization.
    pub encoder_quantum: f64,
}

impl SensorNoise {
    pub fn is_silent(&self) -> bool {
        *self == SensorNoise::default()
    }
}

/// Operator command magnitude limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandLimits {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
    pub ddot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub mode: Mode,
    pub plant: Plant,
    pub seed: u64,
    pub geometry: RigGeometry,
    pub masses: MassPair,
    pub initial_d: f64,
    pub com_height: f64,
    /// Ground slope along world x and y, rad.
    pub ground_incline: [f64; 2],
    /// Fraction of total mass shifted to the left group.
    pub mass_asymmetry: f64,
    pub rolling_resistance: f64,
    /// Ground compliance, m/s of slip per g of specific load.
    pub slip_gain: f64,
    /// Group lateral speeds below this are held at zero; 0 disables.
    pub stiction_speed: f64,
    pub sensor_noise: SensorNoise,
    pub wheel_speed_tracking_tau: f64,
    pub force_tau: f64,
    pub disturbances: Vec<Disturbance>,
    pub gains: ControlGains,
    pub limits: CommandLimits,
}

impl Default for SimConfig {
    fn default() -> Self {
        ConfigFile::default()
            .into_config()
            .expect("default config is valid")
    }
}

impl SimConfig {
    /// Noise-free, lag-free, slip-free variant of the defaults.
    pub fn ideal() -> Self {
        SimConfig::default().idealized()
    }

    pub fn idealized(mut self) -> Self {
        self.sensor_noise = SensorNoise::default();
        self.wheel_speed_tracking_tau = 0.0;
        self.rolling_resistance = 0.0;
        self.slip_gain = 0.0;
        self.stiction_speed = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(OddError::NonPositiveDt(self.dt));
        }
        self.geometry.validate()?;
        MassPair::new(self.masses.left(), self.masses.right())?;
        let g = &self.geometry;
        if !(self.initial_d >= g.d_min && self.initial_d <= g.d_max) {
            return Err(OddError::SpacingOutOfRange {
                d: self.initial_d,
                min: g.d_min,
                max: g.d_max,
            });
        }
        if self.mode == Mode::Balance && !(self.com_height > 0.0) {
            return Err(OddError::Config("com_height must be positive in balance mode".into()));
        }
        let n = &self.sensor_noise;
        let non_neg = [
            ("noise_pitch", n.pitch),
            ("noise_pitch_rate", n.pitch_rate),
            ("noise_yaw", n.yaw),
            ("noise_yaw_rate", n.yaw_rate),
            ("noise_accel", n.accel),
            ("noise_wheel_speed", n.wheel_speed),
            ("noise_draw_wire", n.draw_wire),
            ("encoder_quantum", n.encoder_quantum),
            ("wheel_tau", self.wheel_speed_tracking_tau),
            ("force_tau", self.force_tau),
            ("rolling_resistance", self.rolling_resistance),
            ("slip_gain", self.slip_gain),
            ("stiction_speed", self.stiction_speed),
        ];
        for (name, v) in non_neg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(OddError::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.mass_asymmetry != 0.0 {
            self.masses.shifted(self.mass_asymmetry)?;
        }
        let l = &self.limits;
        if ![l.vx, l.vy, l.wz, l.ddot].iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(OddError::Config("command limits must be finite and >= 0".into()));
        }
        for d in &self.disturbances {
            d.validate()?;
        }
        self.gains.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        ConfigFile::load(path)?.into_config()
    }

    pub fn to_file(&self) -> ConfigFile {
        ConfigFile::from_config(self)
    }
}

/// Flat on-disk form. Angles are in degrees; everything else is SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub dt: f64,
    pub mode: Mode,
    pub plant: Plant,
    pub seed: u64,

    pub r: f64,
    pub w: f64,
    pub alpha1_deg: f64,
    pub alpha2_deg: f64,
    pub alpha3_deg: f64,
    pub alpha4_deg: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub d0: f64,

    pub m_left: f64,
    pub m_right: f64,
    pub com_height: f64,

    pub incline_x_deg: f64,
    pub incline_y_deg: f64,
    pub mass_asymmetry: f64,
    pub rolling_resistance: f64,
    pub slip_gain: f64,
    pub stiction_speed: f64,

    pub noise_pitch: f64,
    pub noise_pitch_rate: f64,
    pub noise_yaw: f64,
    pub noise_yaw_rate: f64,
    pub noise_accel: f64,
    pub noise_wheel_speed: f64,
    pub noise_draw_wire: f64,
    pub encoder_quantum: f64,

    pub wheel_tau: f64,
    pub force_tau: f64,

    pub balance_kp: f64,
    pub balance_kd: f64,
    pub balance_velocity_kp: f64,
    pub balance_velocity_ki: f64,
    pub balance_velocity_integral_limit: f64,
    pub balance_k_pf: f64,
    pub balance_limit: f64,
    pub steering_kp: f64,
    pub steering_kd: f64,
    pub steering_limit: f64,
    pub distance_kp: f64,
    pub distance_kd: f64,
    pub distance_rate_limit: f64,
    pub distance_inner_kp: f64,
    pub distance_inner_ki: f64,
    pub distance_inner_integral_limit: f64,
    pub motor_kp: f64,
    pub motor_ki: f64,
    pub motor_integral_limit: f64,

    pub limit_vx: f64,
    pub limit_vy: f64,
    pub limit_wz: f64,
    pub limit_ddot: f64,

    #[serde(rename = "disturbance", skip_serializing_if = "Vec::is_empty")]
    pub disturbances: Vec<Disturbance>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let g = ControlGains::default();
        ConfigFile {
            dt: 0.005,
            mode: Mode::Caster,
            plant: Plant::Speed,
            seed: 1,
            r: 0.05,
            w: 0.2,
            alpha1_deg: -45.0,
            alpha2_deg: 45.0,
            alpha3_deg: 45.0,
            alpha4_deg: -45.0,
            d_min: 0.25,
            d_max: 0.8,
            d0: 0.4,
            m_left: 6.0,
            m_right: 6.0,
            com_height: 0.3,
            incline_x_deg: 0.0,
            incline_y_deg: 0.0,
            mass_asymmetry: 0.0,
            rolling_resistance: 0.02,
            slip_gain: 0.05,
            stiction_speed: 0.0,
            noise_pitch: 5e-4,
            noise_pitch_rate: 1e-3,
            noise_yaw: 5e-4,
            noise_yaw_rate: 1e-3,
            noise_accel: 0.01,
            noise_wheel_speed: 0.0,
            noise_draw_wire: 0.001,
            encoder_quantum: 0.01,
            wheel_tau: 0.02,
            force_tau: 0.05,
            balance_kp: g.balance_pitch.kp,
            balance_kd: g.balance_pitch.kd,
            balance_velocity_kp: g.balance_velocity.kp,
            balance_velocity_ki: g.balance_velocity.ki,
            balance_velocity_integral_limit: g.balance_velocity.integral_limit,
            balance_k_pf: g.balance_k_pf,
            balance_limit: g.balance_limit,
            steering_kp: g.steering.kp,
            steering_kd: g.steering.kd,
            steering_limit: g.steering.output_max,
            distance_kp: g.distance_outer.kp,
            distance_kd: g.distance_outer.kd,
            distance_rate_limit: g.distance_outer.output_max,
            distance_inner_kp: g.distance_inner.kp,
            distance_inner_ki: g.distance_inner.ki,
            distance_inner_integral_limit: g.distance_inner.integral_limit,
            motor_kp: g.motor.kp,
            motor_ki: g.motor.ki,
            motor_integral_limit: g.motor.integral_limit,
            limit_vx: 1.0,
            limit_vy: 1.0,
            limit_wz: 2.0,
            limit_ddot: 0.3,
            disturbances: Vec::new(),
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| OddError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| OddError::Config(e.to_string()))
    }

    /// Overrides one key. `value` is parsed as a TOML value, falling back to
    /// a bare string.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut table = toml::Table::try_from(&*self).map_err(|e| OddError::Config(e.to_string()))?;
        if key == "disturbance" || !ConfigFile::is_key(key) {
            return Err(OddError::Config(format!("unknown config key {key:?}")));
        }
        let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        // Integers are accepted where floats are expected.
        let parsed = match (table.get(key), parsed) {
            (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, p) => p,
        };
        table.insert(key.to_string(), parsed);
        *self = table.try_into().map_err(|e: toml::de::Error| OddError::Config(e.to_string()))?;
        Ok(())
    }

    fn is_key(key: &str) -> bool {
        toml::Table::try_from(ConfigFile::default())
            .map(|t| t.contains_key(key))
            .unwrap_or(false)
    }

    pub fn into_config(self) -> Result<SimConfig> {
        let f = self;
        let sym = |kp: f64, ki: f64, kd: f64, lim: f64| PidGains::new(kp, ki, kd, lim);
        let gains = ControlGains {
            balance_pitch: sym(f.balance_kp, 0.0, f.balance_kd, f64::INFINITY),
            balance_velocity: sym(f.balance_velocity_kp, f.balance_velocity_ki, 0.0, f.balance_limit)
                .with_integral_limit(f.balance_velocity_integral_limit),
            balance_k_pf: f.balance_k_pf,
            balance_limit: f.balance_limit,
            steering: sym(f.steering_kp, 0.0, f.steering_kd, f.steering_limit),
            distance_outer: sym(f.distance_kp, 0.0, f.distance_kd, f.distance_rate_limit),
            distance_inner: sym(f.distance_inner_kp, f.distance_inner_ki, 0.0, f.limit_ddot)
                .with_integral_limit(f.distance_inner_integral_limit),
            motor: sym(f.motor_kp, f.motor_ki, 0.0, 1.0).with_integral_limit(f.motor_integral_limit),
        };
        let cfg = SimConfig {
            dt: f.dt,
            mode: f.mode,
            plant: f.plant,
            seed: f.seed,
            geometry: RigGeometry {
                wheel_radius: f.r,
                group_width: f.w,
                roller_angles: [f.alpha1_deg, f.alpha2_deg, f.alpha3_deg, f.alpha4_deg]
                    .map(f64::to_radians),
                d_min: f.d_min,
                d_max: f.d_max,
            },
            masses: MassPair::new(f.m_left, f.m_right)?,
            initial_d: f.d0,
            com_height: f.com_height,
            ground_incline: [f.incline_x_deg.to_radians(), f.incline_y_deg.to_radians()],
            mass_asymmetry: f.mass_asymmetry,
            rolling_resistance: f.rolling_resistance,
            slip_gain: f.slip_gain,
            stiction_speed: f.stiction_speed,
            sensor_noise: SensorNoise {
                pitch: f.noise_pitch,
                pitch_rate: f.noise_pitch_rate,
                yaw: f.noise_yaw,
                yaw_rate: f.noise_yaw_rate,
                accel: f.noise_accel,
                wheel_speed: f.noise_wheel_speed,
                draw_wire: f.noise_draw_wire,
                encoder_quantum: f.encoder_quantum,
            },
            wheel_speed_tracking_tau: f.wheel_tau,
            force_tau: f.force_tau,
            disturbances: f.disturbances,
            gains,
            limits: CommandLimits {
                vx: f.limit_vx,
                vy: f.limit_vy,
                wz: f.limit_wz,
                ddot: f.limit_ddot,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_config(c: &SimConfig) -> Self {
        let g = &c.gains;
        let a = c.geometry.roller_angles.map(f64::to_degrees);
        let n = &c.sensor_noise;
        ConfigFile {
            dt: c.dt,
            mode: c.mode,
            plant: c.plant,
            seed: c.seed,
            r: c.geometry.wheel_radius,
            w: c.geometry.group_width,
            alpha1_deg: a[0],
            alpha2_deg: a[1],
            alpha3_deg: a[2],
            alpha4_deg: a[3],
            d_min: c.geometry.d_min,
            d_max: c.geometry.d_max,
            d0: c.initial_d,
            m_left: c.masses.left(),
            m_right: c.masses.right(),
            com_height: c.com_height,
            incline_x_deg: c.ground_incline[0].to_degrees(),
            incline_y_deg: c.ground_incline[1].to_degrees(),
            mass_asymmetry: c.mass_asymmetry,
            rolling_resistance: c.rolling_resistance,
            slip_gain: c.slip_gain,
            stiction_speed: c.stiction_speed,
            noise_pitch: n.pitch,
            noise_pitch_rate: n.pitch_rate,
            noise_yaw: n.yaw,
            noise_yaw_rate: n.yaw_rate,
            noise_accel: n.accel,
            noise_wheel_speed: n.wheel_speed,
            noise_draw_wire: n.draw_wire,
            encoder_quantum: n.encoder_quantum,
            wheel_tau: c.wheel_speed_tracking_tau,
            force_tau: c.force_tau,
            balance_kp: g.balance_pitch.kp,
            balance_kd: g.balance_pitch.kd,
            balance_velocity_kp: g.balance_velocity.kp,
            balance_velocity_ki: g.balance_velocity.ki,
            balance_velocity_integral_limit: g.balance_velocity.integral_limit,
            balance_k_pf: g.balance_k_pf,
            balance_limit: g.balance_limit,
            steering_kp: g.steering.kp,
            steering_kd: g.steering.kd,
            steering_limit: g.steering.output_max,
            distance_kp: g.distance_outer.kp,
            distance_kd: g.distance_outer.kd,
            distance_rate_limit: g.distance_outer.output_max,
            distance_inner_kp: g.distance_inner.kp,
            distance_inner_ki: g.distance_inner.ki,
            distance_inner_integral_limit: g.distance_inner.integral_limit,
            motor_kp: g.motor.kp,
            motor_ki: g.motor.ki,
            motor_integral_limit: g.motor.integral_limit,
            limit_vx: c.limits.vx,
            limit_vy: c.limits.vy,
            limit_wz: c.limits.wz,
            limit_ddot: c.limits.ddot,
            disturbances: c.disturbances.clone(),
        }
    }
}
