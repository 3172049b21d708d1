//! Planar dynamics of the two-group platform.
//!
//! The wheel groups are modeled as point masses `m_L` at `y = +d/2` and `m_R`
//! at `y = −d/2` on the body `B_y` axis. Forces are per-group resultants in
//! the body frame.

use serde::{Deserialize, Serialize};

use crate::drive::{OddRate, Spacing};
use crate::error::{OddError, Result};

/// Group masses. `m_total` is cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassPair {
    m_left: f64,
    m_right: f64,
    m_total: f64,
}

impl MassPair {
    pub fn new(m_left: f64, m_right: f64) -> Result<Self> {
        let ok = |m: f64| m.is_finite() && m > 0.0;
        if !(ok(m_left) && ok(m_right)) {
            return Err(OddError::NonPositiveMass {
                left: m_left,
                right: m_right,
            });
        }
        Ok(MassPair {
            m_left,
            m_right,
            m_total: m_left + m_right,
        })
    }

    pub fn left(&self) -> f64 {
        self.m_left
    }

    pub fn right(&self) -> f64 {
        self.m_right
    }

    pub fn total(&self) -> f64 {
        self.m_total
    }

    /// Reduced mass `m_L m_R / m`.
    pub fn reduced(&self) -> f64 {
        self.m_left * self.m_right / self.m_total
    }

    /// Moves `fraction · m / 2` from the right group to the left group, keeping
    /// the total. A fraction of 0.05 yields `(m_L − m_R) / m` larger by 0.05.
    pub fn shifted(&self, fraction: f64) -> Result<Self> {
        let delta = fraction * self.m_total / 2.0;
        MassPair::new(self.m_left + delta, self.m_right - delta)
    }
}

impl<'de> Deserialize<'de> for MassPair {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            m_left: f64,
            m_right: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        MassPair::new(raw.m_left, raw.m_right).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynState {
    pub rate: OddRate,
    pub d: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelGroupForces {
    pub fx_left: f64,
    pub fy_left: f64,
    pub fx_right: f64,
    pub fy_right: f64,
}

impl WheelGroupForces {
    pub fn to_array(self) -> [f64; 4] {
        [self.fx_left, self.fy_left, self.fx_right, self.fy_right]
    }
}

impl std::ops::Add for WheelGroupForces {
    type Output = WheelGroupForces;
    fn add(self, o: WheelGroupForces) -> WheelGroupForces {
        WheelGroupForces {
            fx_left: self.fx_left + o.fx_left,
            fy_left: self.fy_left + o.fy_left,
            fx_right: self.fx_right + o.fx_right,
            fy_right: self.fy_right + o.fy_right,
        }
    }
}

/// Coriolis and centrifugal terms acting on each group.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PseudoForces {
    pub coriolis_left: f64,
    pub coriolis_right: f64,
    pub centrifugal_left: f64,
    pub centrifugal_right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OddAccel {
    pub x_ddot: f64,
    pub y_ddot: f64,
    pub phi_ddot: f64,
    pub d_ddot: f64,
}

impl OddAccel {
    pub fn to_array(self) -> [f64; 4] {
        [self.x_ddot, self.y_ddot, self.phi_ddot, self.d_ddot]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        OddAccel {
            x_ddot: v[0],
            y_ddot: v[1],
            phi_ddot: v[2],
            d_ddot: v[3],
        }
    }
}

/// Lateral position of the center of mass relative to `B`.
pub fn center_of_mass_offset(masses: &MassPair, d: Spacing) -> f64 {
    (masses.left() - masses.right()) * d.get() / (2.0 * masses.total())
}

/// Yaw inertia of the two point masses about their common center of mass.
pub fn moment_of_inertia(masses: &MassPair, d: Spacing) -> f64 {
    let d = d.get();
    masses.reduced() * d * d
}

/// Pseudo-forces from simultaneous rotation and translation/reconfiguration.
///
/// The centrifugal terms are evaluated as `m (ẋ φ̇ ∓ φ̇² d/2)`, which equals
/// `m φ̇² (ẋ/φ̇ ∓ d/2)` wherever the latter is defined and stays finite at
/// `φ̇ = 0`.
pub fn pseudo_forces(masses: &MassPair, state: &DynState) -> PseudoForces {
    let OddRate {
        x_dot,
        y_dot,
        phi_dot,
        d_dot,
    } = state.rate;
    let half_d = state.d.get() / 2.0;
    let (ml, mr) = (masses.left(), masses.right());
    PseudoForces {
        coriolis_left: ml * phi_dot * (2.0 * y_dot - d_dot),
        coriolis_right: mr * phi_dot * (2.0 * y_dot + d_dot),
        centrifugal_left: ml * (x_dot * phi_dot - phi_dot * phi_dot * half_d),
        centrifugal_right: mr * (x_dot * phi_dot + phi_dot * phi_dot * half_d),
    }
}

/// Accelerations produced by the given group forces.
pub fn forward_dynamics(
    masses: &MassPair,
    state: &DynState,
    forces: &WheelGroupForces,
) -> OddAccel {
    let p = pseudo_forces(masses, state);
    let d = state.d.get();
    let (ml, mr, m) = (masses.left(), masses.right(), masses.total());
    let inertia = moment_of_inertia(masses, state.d);

    let x_left = forces.fx_left - p.coriolis_left;
    let x_right = forces.fx_right + p.coriolis_right;
    let y_left = forces.fy_left - p.centrifugal_left;
    let y_right = forces.fy_right - p.centrifugal_right;

    OddAccel {
        x_ddot: (x_left + x_right) / m,
        y_ddot: (y_left + y_right) / m,
        phi_ddot: (x_right * ml * d / m - x_left * mr * d / m) / inertia,
        d_ddot: y_right / mr - y_left / ml,
    }
}

/// Group forces that produce `accel` from `state`; exact inverse of
/// [`forward_dynamics`].
pub fn inverse_dynamics(masses: &MassPair, state: &DynState, accel: &OddAccel) -> WheelGroupForces {
    let p = pseudo_forces(masses, state);
    let (ml, mr) = (masses.left(), masses.right());
    let mu = masses.reduced();
    let torque_share = moment_of_inertia(masses, state.d) * accel.phi_ddot / state.d.get();
    let spacing_share = mu * accel.d_ddot;

    WheelGroupForces {
        fx_left: ml * accel.x_ddot - torque_share + p.coriolis_left,
        fy_left: ml * accel.y_ddot - spacing_share + p.centrifugal_left,
        fx_right: mr * accel.x_ddot + torque_share - p.coriolis_right,
        fy_right: mr * accel.y_ddot + spacing_share + p.centrifugal_right,
    }
}
