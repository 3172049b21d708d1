//! Kinematics of four collinear Mecanum wheels in two variable-spacing groups.
//!
//! Wheels are numbered 1 to 4 from left to right; wheels 1–2 form the left
//! group `L`, wheels 3–4 the right group `R`. Along `B_y` the contact points
//! sit at `±d/2 ± w/2`. Roller angles `α_i` are measured from `B_x`, and
//! `S_i, C_i, T_i` denote `sin α_i, cos α_i, tan α_i`.

use serde::{Deserialize, Serialize};

use crate::drive::{odd_inverse, GroupRates, OddRate, Spacing};
use crate::error::{OddError, Result};

/// `|σ₁|` below this is a singular configuration.
pub const SINGULAR_EPS: f64 = 1e-6;
/// `|cos α_i|` at or below this makes a roller unusable.
pub const ROLLER_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigGeometry {
    /// Wheel radius `r`, m.
    pub wheel_radius: f64,
    /// Wheel spacing inside one group `w`, m.
    pub group_width: f64,
    /// Roller angles `α₁…α₄`, rad.
    pub roller_angles: [f64; 4],
    pub d_min: f64,
    pub d_max: f64,
}

impl Default for RigGeometry {
    fn default() -> Self {
        let q = std::f64::consts::FRAC_PI_4;
        RigGeometry {
            wheel_radius: 0.05,
            group_width: 0.2,
            roller_angles: [-q, q, q, -q],
            d_min: 0.25,
            d_max: 0.8,
        }
    }
}

impl RigGeometry {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.wheel_radius) {
            return Err(OddError::InvalidGeometry(format!(
                "wheel radius must be positive, got {}",
                self.wheel_radius
            )));
        }
        if !pos(self.group_width) {
            return Err(OddError::InvalidGeometry(format!(
                "group width must be positive, got {}",
                self.group_width
            )));
        }
        if !(pos(self.d_min) && self.d_max.is_finite() && self.d_min <= self.d_max) {
            return Err(OddError::InvalidGeometry(format!(
                "spacing limits must satisfy 0 < d_min <= d_max, got [{}, {}]",
                self.d_min, self.d_max
            )));
        }
        self.check_rollers()
    }

    fn check_rollers(&self) -> Result<()> {
        for (i, a) in self.roller_angles.iter().enumerate() {
            if !(a.cos().abs() > ROLLER_EPS) {
                return Err(OddError::DegenerateRoller { wheel: i + 1 });
            }
        }
        Ok(())
    }

    pub fn check_spacing(&self, d: Spacing) -> Result<()> {
        let d = d.get();
        if d < self.d_min || d > self.d_max {
            return Err(OddError::SpacingOutOfRange {
                d,
                min: self.d_min,
                max: self.d_max,
            });
        }
        Ok(())
    }

    pub fn clamp_spacing(&self, d: f64) -> f64 {
        d.clamp(self.d_min, self.d_max)
    }

    fn tangents(&self) -> [f64; 4] {
        self.roller_angles.map(f64::tan)
    }

    /// Lateral contact-point positions of wheels 1–4 relative to `B`.
    pub fn wheel_offsets(&self, d: Spacing) -> [f64; 4] {
        let (hd, hw) = (d.get() / 2.0, self.group_width / 2.0);
        [hd + hw, hd - hw, -hd + hw, -hd - hw]
    }
}

/// Four wheel angular velocities, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelSpeeds {
    pub theta_dot: [f64; 4],
}

impl WheelSpeeds {
    pub fn new(theta_dot: [f64; 4]) -> Self {
        WheelSpeeds { theta_dot }
    }
}

/// Scalar terms of the symbolic inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaTerms {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sigma4: f64,
    pub sigma5: f64,
}

pub fn sigma_terms(geom: &RigGeometry, d: Spacing) -> SigmaTerms {
    let [t1, t2, t3, t4] = geom.tangents();
    let (d, w) = (d.get(), geom.group_width);
    SigmaTerms {
        sigma1: t1 * t3 * d - t1 * t4 * (d - w) - t2 * t3 * (d + w) + t2 * t4 * d,
        sigma2: 2.0 * d + w,
        sigma3: 2.0 * d - w,
        sigma4: d - w,
        sigma5: d + w,
    }
}

/// `σ₁`; the wheel-to-group map is singular where it vanishes.
pub fn singularity_metric(geom: &RigGeometry, d: Spacing) -> f64 {
    sigma_terms(geom, d).sigma1
}

fn nonsingular_sigmas(geom: &RigGeometry, d: Spacing) -> Result<SigmaTerms> {
    let s = sigma_terms(geom, d);
    if !(s.sigma1.abs() >= SINGULAR_EPS) {
        return Err(OddError::SingularConfiguration { sigma1: s.sigma1 });
    }
    Ok(s)
}

/// Coefficients of the wheel constraints written about the left group:
/// row `i` maps `(ẋ_L, ẏ_L, φ̇, ḋ)` to `r θ̇_i C_i`.
pub fn wheel_matrix_left(geom: &RigGeometry, d: Spacing) -> [[f64; 4]; 4] {
    let (d, w) = (d.get(), geom.group_width);
    let (s, c) = trig(geom);
    [
        [c[0], s[0], -w * c[0] / 2.0, 0.0],
        [c[1], s[1], w * c[1] / 2.0, 0.0],
        [c[2], s[2], (d - w / 2.0) * c[2], -s[2]],
        [c[3], s[3], (d + w / 2.0) * c[3], -s[3]],
    ]
}

/// Same constraints written about the right group, acting on
/// `(ẋ_R, ẏ_R, φ̇, ḋ)`.
pub fn wheel_matrix_right(geom: &RigGeometry, d: Spacing) -> [[f64; 4]; 4] {
    let (d, w) = (d.get(), geom.group_width);
    let (s, c) = trig(geom);
    [
        [c[0], s[0], -(d + w / 2.0) * c[0], s[0]],
        [c[1], s[1], -(d - w / 2.0) * c[1], s[1]],
        [c[2], s[2], -w * c[2] / 2.0, 0.0],
        [c[3], s[3], w * c[3] / 2.0, 0.0],
    ]
}

fn trig(geom: &RigGeometry) -> ([f64; 4], [f64; 4]) {
    (
        geom.roller_angles.map(f64::sin),
        geom.roller_angles.map(f64::cos),
    )
}

/// Symbolic wheel-speed to group-velocity matrix, prefactor `r / (2σ₁)`
/// already applied.
pub fn group_matrix(geom: &RigGeometry, d: Spacing) -> Result<[[f64; 4]; 4]> {
    let SigmaTerms {
        sigma1: s1,
        sigma2: s2,
        sigma3: s3,
        sigma4: s4,
        sigma5: s5,
    } = nonsingular_sigmas(geom, d)?;
    let [t1, t2, t3, t4] = geom.tangents();
    let (d, w) = (d.get(), geom.group_width);
    let k = geom.wheel_radius / (2.0 * s1);
    let m = [
        [
            -t2 * t3 * s2 + t2 * t4 * s3,
            t1 * t3 * s2 - t1 * t4 * s3,
            t4 * t1 * w + t4 * t2 * w,
            -t3 * t1 * w - t3 * t2 * w,
        ],
        [
            2.0 * (t3 * d - t4 * s4),
            -2.0 * (t3 * s5 - t4 * d),
            -2.0 * t4 * w,
            2.0 * t3 * w,
        ],
        [
            -t2 * t3 * w - t2 * t4 * w,
            t1 * t3 * w + t1 * t4 * w,
            -t4 * t1 * s3 + t4 * t2 * s2,
            t3 * t1 * s3 - t3 * t2 * s2,
        ],
        [
            2.0 * t2 * w,
            -2.0 * t1 * w,
            2.0 * (t1 * d - t2 * s5),
            -2.0 * (t1 * s4 - t2 * d),
        ],
    ];
    Ok(m.map(|row| row.map(|v| k * v)))
}

/// Symbolic wheel-speed to ODD-rate matrix, prefactor applied.
pub fn body_matrix(geom: &RigGeometry, d: Spacing) -> Result<[[f64; 4]; 4]> {
    let SigmaTerms {
        sigma1: s1,
        sigma4: s4,
        sigma5: s5,
        ..
    } = nonsingular_sigmas(geom, d)?;
    let [t1, t2, t3, t4] = geom.tangents();
    let (d, w) = (d.get(), geom.group_width);
    let k = geom.wheel_radius / (2.0 * s1);
    let m = [
        [
            -t2 * t3 * s5 + t2 * t4 * s4,
            t1 * t3 * s5 - t1 * t4 * s4,
            -t4 * t1 * s4 + t4 * t2 * s5,
            t3 * t1 * s4 - t3 * t2 * s5,
        ],
        [
            t2 * w + t3 * d - t4 * s4,
            -t1 * w - t3 * s5 + t4 * d,
            t1 * d - t2 * s5 - t4 * w,
            -t1 * s4 + t2 * d + t3 * w,
        ],
        [
            2.0 * t2 * (t3 - t4),
            2.0 * t1 * (-t3 + t4),
            2.0 * t4 * (-t1 + t2),
            2.0 * t3 * (t1 - t2),
        ],
        [
            2.0 * (-t2 * w + t3 * d - t4 * s4),
            2.0 * (t1 * w - t3 * s5 + t4 * d),
            2.0 * (-t1 * d + t2 * s5 - t4 * w),
            2.0 * (t1 * s4 - t2 * d + t3 * w),
        ],
    ];
    Ok(m.map(|row| row.map(|v| k * v)))
}

fn apply(m: &[[f64; 4]; 4], v: [f64; 4]) -> [f64; 4] {
    m.map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
}

/// Wheel speeds realizing `rate` at spacing `d`.
pub fn inverse_kinematics(geom: &RigGeometry, d: Spacing, rate: OddRate) -> Result<WheelSpeeds> {
    geom.check_rollers()?;
    geom.check_spacing(d)?;
    let g = odd_inverse(rate, d);
    let rhs = apply(
        &wheel_matrix_left(geom, d),
        [g.x_dot_left, g.y_dot_left, rate.phi_dot, rate.d_dot],
    );
    let mut theta_dot = [0.0; 4];
    for (i, v) in rhs.iter().enumerate() {
        theta_dot[i] = v / (geom.wheel_radius * geom.roller_angles[i].cos());
    }
    Ok(WheelSpeeds { theta_dot })
}

/// Group-center velocities produced by the given wheel speeds.
pub fn group_velocities_from_wheels(
    geom: &RigGeometry,
    d: Spacing,
    wheels: &WheelSpeeds,
) -> Result<GroupRates> {
    let m = group_matrix(geom, d)?;
    Ok(GroupRates::from_array(apply(&m, wheels.theta_dot)))
}

/// Body rates `(ẋ, ẏ, φ̇, ḋ)` produced by the given wheel speeds.
pub fn forward_kinematics(geom: &RigGeometry, d: Spacing, wheels: &WheelSpeeds) -> Result<OddRate> {
    let m = body_matrix(geom, d)?;
    Ok(OddRate::from_array(apply(&m, wheels.theta_dot)))
}
