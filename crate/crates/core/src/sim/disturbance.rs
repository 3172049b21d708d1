//! External loads and the ground-slip response they produce.

use serde::{Deserialize, Serialize};

use crate::drive::{OddRate, Spacing};
use crate::dynamics::{center_of_mass_offset, moment_of_inertia, MassPair, WheelGroupForces};
use crate::error::{OddError, Result};
use crate::mecanum::RigGeometry;

use super::config::SimConfig;

pub const GRAVITY: f64 = 9.81;
/// Wheel speed scale of the smoothed rolling-resistance sign, rad/s.
const ROLLING_SPEED_SCALE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceKind {
    /// Ground slope of `magnitude` rad rising toward world azimuth `azimuth`.
    Incline {
        #[serde(default)]
        azimuth: f64,
    },
    /// Mass fraction `magnitude` moved to the left group.
    MassAsymmetry,
    /// Body-lateral force `magnitude` N at the center of mass.
    LateralPush,
}

fn forever() -> f64 {
    f64::INFINITY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    #[serde(flatten)]
    pub kind: DisturbanceKind,
    pub magnitude: f64,
    #[serde(default)]
    pub start: f64,
    #[serde(default = "forever")]
    pub end: f64,
}

impl Disturbance {
    pub fn always(kind: DisturbanceKind, magnitude: f64) -> Self {
        Disturbance {
            kind,
            magnitude,
            start: 0.0,
            end: f64::INFINITY,
        }
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.magnitude != 0.0 && t >= self.start && t < self.end
    }

    pub fn validate(&self) -> Result<()> {
        if !self.magnitude.is_finite() || self.start.is_nan() || self.end.is_nan() || self.end < self.start {
            return Err(OddError::Config(format!("invalid disturbance {self:?}")));
        }
        Ok(())
    }
}

/// Loads in effect at one instant. Absent components are `None` so that
/// they contribute nothing, not even a signed zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveLoads {
    pub masses: MassPair,
    pub incline: Option<[f64; 2]>,
    pub lateral_push: Option<f64>,
}

pub fn active_loads(config: &SimConfig, t: f64) -> Result<ActiveLoads> {
    let mut asym = config.mass_asymmetry;
    let mut incline = config.ground_incline;
    let mut push = 0.0;
    let mut any_incline = incline != [0.0, 0.0];
    for d in config.disturbances.iter().filter(|d| d.is_active(t)) {
        match d.kind {
            DisturbanceKind::Incline { azimuth } => {
                incline[0] += d.magnitude * azimuth.cos();
                incline[1] += d.magnitude * azimuth.sin();
                any_incline = true;
            }
            DisturbanceKind::MassAsymmetry => asym += d.magnitude,
            DisturbanceKind::LateralPush => push += d.magnitude,
        }
    }
    let masses = if asym != 0.0 {
        config.masses.shifted(asym)?
    } else {
        config.masses
    };
    Ok(ActiveLoads {
        masses,
        incline: any_incline.then_some(incline),
        lateral_push: (push != 0.0).then_some(push),
    })
}

/// Body-frame ground forces at each wheel contact, or `None` when no load
/// is present.
pub fn wheel_forces(
    config: &SimConfig,
    loads: &ActiveLoads,
    phi: f64,
    wheel_speeds: &[f64; 4],
) -> Option<[[f64; 2]; 4]> {
    let rolling = config.rolling_resistance != 0.0 && wheel_speeds.iter().any(|w| *w != 0.0);
    if !rolling && loads.incline.is_none() && loads.lateral_push.is_none() {
        return None;
    }
    let m = loads.masses;
    let wheel_mass = [m.left() / 2.0, m.left() / 2.0, m.right() / 2.0, m.right() / 2.0];
    let mut f = [[0.0; 2]; 4];
    if let Some([sx, sy]) = loads.incline {
        let (s, c) = phi.sin_cos();
        for (fi, mi) in f.iter_mut().zip(wheel_mass) {
            let world = [-mi * GRAVITY * sx.sin(), -mi * GRAVITY * sy.sin()];
            fi[0] += c * world[0] + s * world[1];
            fi[1] += -s * world[0] + c * world[1];
        }
    }
    if rolling {
        let g: &RigGeometry = &config.geometry;
        for i in 0..4 {
            let n = wheel_mass[i] * GRAVITY;
            let mag = -config.rolling_resistance * n * (wheel_speeds[i] / ROLLING_SPEED_SCALE).tanh();
            let (s, c) = g.roller_angles[i].sin_cos();
            f[i][0] += mag * c;
            f[i][1] += mag * s;
        }
    }
    if let Some(p) = loads.lateral_push {
        for (fi, mi) in f.iter_mut().zip(wheel_mass) {
            fi[1] += p * mi / m.total();
        }
    }
    Some(f)
}

pub fn group_forces(f: &[[f64; 2]; 4]) -> WheelGroupForces {
    WheelGroupForces {
        fx_left: f[0][0] + f[1][0],
        fy_left: f[0][1] + f[1][1],
        fx_right: f[2][0] + f[3][0],
        fy_right: f[2][1] + f[3][1],
    }
}

/// Rate perturbation from ground compliance: translational slip
/// proportional to net force per weight, yaw slip proportional to torque
/// about the center of mass per `g · I`.
pub fn slip_rate(
    config: &SimConfig,
    masses: &MassPair,
    d: Spacing,
    forces: &[[f64; 2]; 4],
) -> OddRate {
    let offsets = config.geometry.wheel_offsets(d);
    let yc = center_of_mass_offset(masses, d);
    let (mut fx, mut fy, mut torque) = (0.0, 0.0, 0.0);
    for (f, y) in forces.iter().zip(offsets) {
        fx += f[0];
        fy += f[1];
        torque -= (y - yc) * f[0];
    }
    let k = config.slip_gain / GRAVITY;
    let w = k * torque / moment_of_inertia(masses, d);
    OddRate::new(k * fx / masses.total() + w * yc, k * fy / masses.total(), w, 0.0)
}
