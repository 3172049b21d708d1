use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::drive::OddRate;
use crate::error::{OddError, Result};
use crate::mecanum::RigGeometry;
use crate::sim::Mode;

/// A span of constant or linearly varying reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    /// Rate reference at the segment start.
    pub from: OddRate,
    /// Rate reference at the segment end.
    pub to: OddRate,
    /// Absolute heading to hold instead of integrating `phi_dot`.
    #[serde(default)]
    pub yaw_setpoint: Option<f64>,
    /// Absolute spacing to hold instead of integrating `d_dot`.
    #[serde(default)]
    pub d_setpoint: Option<f64>,
}

impl Segment {
    pub fn constant(duration: f64, rate: OddRate) -> Self {
        Segment::ramp(duration, rate, rate)
    }

    pub fn ramp(duration: f64, from: OddRate, to: OddRate) -> Self {
        Segment {
            duration,
            from,
            to,
            yaw_setpoint: None,
            d_setpoint: None,
        }
    }

    /// Number of simulator steps covering this segment.
    pub fn steps(&self, dt: f64) -> usize {
        ((self.duration / dt).round() as usize).max(1)
    }

    /// Reference for step `k` of `n`, sampled at the step midpoint so that
    /// linear ramps integrate exactly.
    pub fn sample(&self, k: usize, n: usize) -> OddRate {
        if self.from == self.to {
            return self.from;
        }
        let s = (k as f64 + 0.5) / n as f64;
        self.from + (self.to - self.from) * s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandScript {
    pub name: String,
    pub segments: Vec<Segment>,
    /// Overrides the configured mode when set.
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Overrides the configured starting spacing when set.
    #[serde(default)]
    pub initial_d: Option<f64>,
}

impl CommandScript {
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(OddError::EmptyScript);
        }
        for s in &self.segments {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(OddError::Config(format!(
                    "segment duration must be positive and finite, got {}",
                    s.duration
                )));
            }
            if !(s.from.is_finite() && s.to.is_finite()) {
                return Err(OddError::Config("segment rates must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Magnitudes used by the builtin scripts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptParams {
    pub speed: f64,
    pub yaw_rate: f64,
    pub leg: f64,
    pub d_rate_peak: f64,
    pub d_ramp: f64,
    pub hold: f64,
    /// Distance kept from the spacing stops during sweeps.
    pub d_margin: f64,
    pub d_min: f64,
    pub d_max: f64,
}

impl Default for ScriptParams {
    fn default() -> Self {
        let g = RigGeometry::default();
        ScriptParams {
            speed: 0.5,
            yaw_rate: PI / 5.0,
            leg: 1.0,
            d_rate_peak: 0.2,
            d_ramp: 0.5,
            hold: 2.0,
            d_margin: 0.02,
            d_min: g.d_min,
            d_max: g.d_max,
        }
    }
}

impl ScriptParams {
    pub fn for_geometry(geom: &RigGeometry) -> Self {
        ScriptParams {
            d_min: geom.d_min,
            d_max: geom.d_max,
            ..ScriptParams::default()
        }
    }
}

pub const BUILTIN_SCRIPTS: [&str; 7] = [
    "square",
    "rhombus",
    "circle_xz",
    "circle_yz",
    "d_sweep_x",
    "d_sweep_y",
    "d_sweep_spin",
];

pub fn builtin_script(name: &str) -> Result<CommandScript> {
    builtin_script_with(name, &ScriptParams::default())
}

pub fn builtin_script_with(name: &str, p: &ScriptParams) -> Result<CommandScript> {
    let v = p.speed;
    let leg_time = p.leg / v;
    let rate = |x, y, w| OddRate::new(x, y, w, 0.0);
    let legs = |dirs: [(f64, f64); 4]| {
        dirs.iter()
            .map(|&(x, y)| Segment::constant(leg_time, rate(x, y, 0.0)))
            .collect::<Vec<_>>()
    };
    let s = FRAC_1_SQRT_2 * v;
    let (segments, initial_d) = match name {
        "square" => (legs([(v, 0.0), (0.0, v), (-v, 0.0), (0.0, -v)]), None),
        "rhombus" => (legs([(s, s), (-s, s), (-s, -s), (s, -s)]), None),
        "circle_xz" => (vec![Segment::constant(2.0 * PI / p.yaw_rate, rate(v, 0.0, p.yaw_rate))], None),
        "circle_yz" => (vec![Segment::constant(2.0 * PI / p.yaw_rate, rate(0.0, v, p.yaw_rate))], None),
        "d_sweep_x" => d_sweep(p, rate(v, 0.0, 0.0)),
        "d_sweep_y" => d_sweep(p, rate(0.0, v, 0.0)),
        "d_sweep_spin" => d_sweep(p, rate(0.0, 0.0, p.yaw_rate)),
        other => return Err(OddError::UnknownScript(other.to_string())),
    };
    Ok(CommandScript {
        name: name.to_string(),
        segments,
        mode: None,
        initial_d,
    })
}

/// Trapezoidal spacing-rate profile taking `d` from near `d_min` to near
/// `d_max` and back, on top of a constant base rate, then a hold.
fn d_sweep(p: &ScriptParams, base: OddRate) -> (Vec<Segment>, Option<f64>) {
    let start = p.d_min + p.d_margin;
    let travel = (p.d_max - p.d_margin) - start;
    let cruise = (travel - p.d_rate_peak * p.d_ramp) / p.d_rate_peak;
    let with = |dd: f64| OddRate { d_dot: dd, ..base };
    let mut segs = Vec::new();
    for sign in [1.0, -1.0] {
        let peak = sign * p.d_rate_peak;
        segs.push(Segment::ramp(p.d_ramp, with(0.0), with(peak)));
        if cruise > 0.0 {
            segs.push(Segment::constant(cruise, with(peak)));
        }
        segs.push(Segment::ramp(p.d_ramp, with(peak), with(0.0)));
    }
    segs.push(Segment::constant(p.hold, base));
    (segs, Some(start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_has_four_alternating_legs() {
        let s = builtin_script("square").unwrap();
        assert_eq!(s.segments.len(), 4);
        let r: Vec<_> = s.segments.iter().map(|g| (g.from.x_dot, g.from.y_dot)).collect();
        assert_eq!(r, vec![(0.5, 0.0), (0.0, 0.5), (-0.5, 0.0), (0.0, -0.5)]);
        assert!(s.segments.iter().all(|g| (g.duration - 2.0).abs() < 1e-12));
    }

    #[test]
    fn circle_is_one_ten_second_segment() {
        let s = builtin_script("circle_xz").unwrap();
        assert_eq!(s.segments.len(), 1);
        assert!((s.segments[0].duration - 10.0).abs() < 1e-12);
        assert_eq!(s.segments[0].from, OddRate::new(0.5, 0.0, PI / 5.0, 0.0));
    }

    #[test]
    fn d_sweep_traverses_range_and_returns() {
        let s = builtin_script("d_sweep_x").unwrap();
        let dt = 0.001;
        let mut d = s.initial_d.unwrap();
        let mut peak = d;
        for seg in &s.segments {
            let n = seg.steps(dt);
            for k in 0..n {
                let r = seg.sample(k, n);
                assert_eq!(r.x_dot, 0.5);
                d += r.d_dot * dt;
                peak = peak.max(d);
            }
        }
        assert!((d - s.initial_d.unwrap()).abs() < 1e-9);
        assert!((peak - 0.78).abs() < 1e-9);
        assert!(s.initial_d.unwrap() - 0.27 < 1e-12);
    }

    #[test]
    fn unknown_and_empty() {
        assert!(matches!(builtin_script("zigzag"), Err(OddError::UnknownScript(_))));
        let s = CommandScript {
            name: "none".into(),
            segments: vec![],
            mode: None,
            initial_d: None,
        };
        assert!(matches!(s.validate(), Err(OddError::EmptyScript)));
    }

    #[test]
    fn every_builtin_is_valid() {
        for name in BUILTIN_SCRIPTS {
            builtin_script(name).unwrap().validate().unwrap();
        }
    }
}
