//! Closed-form kinematics of the three planar drive models.
//!
//! * **DD**: differential drive, two wheels with longitudinal speed only.
//! * **OD**: omnidirectional drive at fixed spacing. Over-actuated in the
//!   lateral direction, so both groups must agree on `ẏ`.
//! * **ODD**: omni differential drive. The lateral speed difference between
//!   the two wheel groups drives the spacing rate `ḋ = ẏ_L − ẏ_R`, which makes
//!   the four group speeds map one-to-one onto `(ẋ, ẏ, φ̇, ḋ)`.
//!
//! All rates are expressed in the body frame `B`, whose origin sits midway
//! between the left group `L` (at `+d/2` on `B_y`) and the right group `R`
//! (at `−d/2`).

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{OddError, Result};

/// Default allowed `|ẏ_L − ẏ_R|` for the fixed-spacing model, m/s.
pub const DEFAULT_SLIP_TOLERANCE: f64 = 1e-9;

/// Distance between the left and right wheel-group centers, meters.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Spacing(f64);

impl Spacing {
    pub fn new(d: f64) -> Result<Self> {
        if d.is_finite() && d > 0.0 {
            Ok(Spacing(d))
        } else {
            Err(OddError::NonPositiveSpacing(d))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Spacing {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let d = f64::deserialize(deserializer)?;
        Spacing::new(d).map_err(serde::de::Error::custom)
    }
}

/// Longitudinal wheel speeds of a differential drive.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DdWheelRates {
    pub x_dot_left: f64,
    pub x_dot_right: f64,
}

/// Body-frame velocities of the left and right wheel-group centers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupRates {
    pub x_dot_left: f64,
    pub y_dot_left: f64,
    pub x_dot_right: f64,
    pub y_dot_right: f64,
}

impl GroupRates {
    pub fn to_array(self) -> [f64; 4] {
        [self.x_dot_left, self.y_dot_left, self.x_dot_right, self.y_dot_right]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        GroupRates {
            x_dot_left: v[0],
            y_dot_left: v[1],
            x_dot_right: v[2],
            y_dot_right: v[3],
        }
    }
}

/// Planar twist of the platform center.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyTwist {
    pub x_dot: f64,
    pub y_dot: f64,
    pub phi_dot: f64,
}

/// Body twist plus the spacing rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OddRate {
    pub x_dot: f64,
    pub y_dot: f64,
    pub phi_dot: f64,
    pub d_dot: f64,
}

impl OddRate {
    pub const ZERO: OddRate = OddRate {
        x_dot: 0.0,
        y_dot: 0.0,
        phi_dot: 0.0,
        d_dot: 0.0,
    };

    pub fn new(x_dot: f64, y_dot: f64, phi_dot: f64, d_dot: f64) -> Self {
        OddRate {
            x_dot,
            y_dot,
            phi_dot,
            d_dot,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x_dot, self.y_dot, self.phi_dot, self.d_dot]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        OddRate::new(v[0], v[1], v[2], v[3])
    }

    pub fn twist(self) -> BodyTwist {
        BodyTwist {
            x_dot: self.x_dot,
            y_dot: self.y_dot,
            phi_dot: self.phi_dot,
        }
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl Add for OddRate {
    type Output = OddRate;
    fn add(self, rhs: OddRate) -> OddRate {
        OddRate::new(
            self.x_dot + rhs.x_dot,
            self.y_dot + rhs.y_dot,
            self.phi_dot + rhs.phi_dot,
            self.d_dot + rhs.d_dot,
        )
    }
}

impl Sub for OddRate {
    type Output = OddRate;
    fn sub(self, rhs: OddRate) -> OddRate {
        OddRate::new(
            self.x_dot - rhs.x_dot,
            self.y_dot - rhs.y_dot,
            self.phi_dot - rhs.phi_dot,
            self.d_dot - rhs.d_dot,
        )
    }
}

impl Mul<f64> for OddRate {
    type Output = OddRate;
    fn mul(self, k: f64) -> OddRate {
        OddRate::new(self.x_dot * k, self.y_dot * k, self.phi_dot * k, self.d_dot * k)
    }
}

/// DD forward map: wheel speeds to `(ẋ, φ̇)`.
pub fn dd_forward(wheels: DdWheelRates, d: Spacing) -> (f64, f64) {
    let d = d.get();
    let x_dot = 0.5 * wheels.x_dot_left + 0.5 * wheels.x_dot_right;
    let phi_dot = (wheels.x_dot_right - wheels.x_dot_left) / d;
    (x_dot, phi_dot)
}

/// DD inverse map.
pub fn dd_inverse(x_dot: f64, phi_dot: f64, d: Spacing) -> DdWheelRates {
    let half = d.get() / 2.0;
    DdWheelRates {
        x_dot_left: x_dot - half * phi_dot,
        x_dot_right: x_dot + half * phi_dot,
    }
}

/// OD forward map with the default slip tolerance.
pub fn od_forward(groups: GroupRates, d: Spacing) -> Result<BodyTwist> {
    od_forward_with_tolerance(groups, d, DEFAULT_SLIP_TOLERANCE)
}

/// OD forward map. Fails when the two groups disagree on lateral speed, which
/// at fixed spacing can only be realized by slipping.
pub fn od_forward_with_tolerance(
    groups: GroupRates,
    d: Spacing,
    slip_tolerance: f64,
) -> Result<BodyTwist> {
    let diff = (groups.y_dot_left - groups.y_dot_right).abs();
    if !(diff <= slip_tolerance) {
        return Err(OddError::SlipInconsistency {
            diff,
            tolerance: slip_tolerance,
        });
    }
    Ok(odd_forward(groups, d).twist())
}

/// OD inverse map: both groups carry the body lateral speed.
pub fn od_inverse(twist: BodyTwist, d: Spacing) -> GroupRates {
    odd_inverse(
        OddRate::new(twist.x_dot, twist.y_dot, twist.phi_dot, 0.0),
        d,
    )
}

/// ODD forward map, group speeds to `(ẋ, ẏ, φ̇, ḋ)`.
pub fn odd_forward(groups: GroupRates, d: Spacing) -> OddRate {
    let d = d.get();
    let GroupRates {
        x_dot_left: xl,
        y_dot_left: yl,
        x_dot_right: xr,
        y_dot_right: yr,
    } = groups;
    OddRate {
        x_dot: 0.5 * xl + 0.5 * xr,
        y_dot: 0.5 * yl + 0.5 * yr,
        phi_dot: (xr - xl) / d,
        d_dot: yl - yr,
    }
}

/// ODD inverse map.
pub fn odd_inverse(rate: OddRate, d: Spacing) -> GroupRates {
    let half = d.get() / 2.0;
    GroupRates {
        x_dot_left: rate.x_dot - half * rate.phi_dot,
        y_dot_left: rate.y_dot + 0.5 * rate.d_dot,
        x_dot_right: rate.x_dot + half * rate.phi_dot,
        y_dot_right: rate.y_dot - 0.5 * rate.d_dot,
    }
}

/// Coefficient matrix of [`odd_forward`] (row-major, acting on
/// `(ẋ_L, ẏ_L, ẋ_R, ẏ_R)`).
pub fn odd_forward_matrix(d: Spacing) -> [[f64; 4]; 4] {
    let inv_d = 1.0 / d.get();
    [
        [0.5, 0.0, 0.5, 0.0],
        [0.0, 0.5, 0.0, 0.5],
        [-inv_d, 0.0, inv_d, 0.0],
        [0.0, 1.0, 0.0, -1.0],
    ]
}

/// Coefficient matrix of [`odd_inverse`] (row-major, acting on
/// `(ẋ, ẏ, φ̇, ḋ)`).
pub fn odd_inverse_matrix(d: Spacing) -> [[f64; 4]; 4] {
    let half = d.get() / 2.0;
    [
        [1.0, 0.0, -half, 0.0],
        [0.0, 1.0, 0.0, 0.5],
        [1.0, 0.0, half, 0.0],
        [0.0, 1.0, 0.0, -0.5],
    ]
}
