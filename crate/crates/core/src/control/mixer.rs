use crate::drive::{BodyTwist, OddRate, Spacing};
use crate::error::Result;
use crate::mecanum::{inverse_kinematics, RigGeometry, WheelSpeeds};

/// Body-rate command assembled from the loop outputs and operator twist.
pub fn mixed_rate(balance_corr: f64, steer_cmd: f64, d_rate_cmd: f64, operator: BodyTwist) -> OddRate {
    OddRate::new(operator.x_dot + balance_corr, operator.y_dot, steer_cmd, d_rate_cmd)
}

/// Wheel speed setpoints for the motor loops. `d` is clamped to the rig's
/// spacing limits before mapping.
pub fn mix_commands(
    balance_corr: f64,
    steer_cmd: f64,
    d_rate_cmd: f64,
    operator: BodyTwist,
    geom: &RigGeometry,
    d: Spacing,
) -> Result<WheelSpeeds> {
    let rate = mixed_rate(balance_corr, steer_cmd, d_rate_cmd, operator);
    let d = Spacing::new(geom.clamp_spacing(d.get()))?;
    inverse_kinematics(geom, d, rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::odd_inverse;

    fn twist(x: f64, y: f64) -> BodyTwist {
        BodyTwist {
            x_dot: x,
            y_dot: y,
            phi_dot: 0.0,
        }
    }

    #[test]
    fn zero_inputs() {
        let g = RigGeometry::default();
        let w = mix_commands(0.0, 0.0, 0.0, twist(0.0, 0.0), &g, Spacing::new(0.4).unwrap()).unwrap();
        assert_eq!(w.theta_dot, [0.0; 4]);
    }

    #[test]
    fn operator_forward() {
        let g = RigGeometry::default();
        let w = mix_commands(0.0, 0.0, 0.0, twist(1.0, 0.0), &g, Spacing::new(0.4).unwrap()).unwrap();
        for v in w.theta_dot {
            assert!((v - 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spacing_rate_splits_between_groups() {
        let d = Spacing::new(0.4).unwrap();
        let groups = odd_inverse(mixed_rate(0.0, 0.0, 0.2, twist(0.0, 0.0)), d);
        assert!((groups.y_dot_left - 0.1).abs() < 1e-15);
        assert!((groups.y_dot_right + 0.1).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_spacing_is_clamped() {
        let g = RigGeometry::default();
        assert!(mix_commands(0.0, 0.0, 0.0, twist(1.0, 0.0), &g, Spacing::new(5.0).unwrap()).is_ok());
    }
}
