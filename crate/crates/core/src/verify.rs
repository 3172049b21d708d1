//! Property suite behind the `verify` command.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::control::{pid_step, PidGains, PidMemory};
use crate::drive::{odd_forward, odd_forward_matrix, odd_inverse, odd_inverse_matrix, OddRate, Spacing};
use crate::dynamics::{
    forward_dynamics, inverse_dynamics, moment_of_inertia, pseudo_forces, DynState, MassPair, OddAccel,
    PseudoForces,
};
use crate::error::Result;
use crate::experiments::{builtin_script, compute_metrics, run_script, ClosedLoop, CommandScript, Reference, Segment};
use crate::mecanum::{body_matrix, forward_kinematics, group_matrix, inverse_kinematics, RigGeometry};
use crate::service::{CommandGate, CommandMessage};
use crate::sim::{Disturbance, DisturbanceKind, Mode, RobotState, SensorNoise, SimConfig};

const DRAWS: usize = 1000;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        odd_matrix_identity(&mut rng),
        mecanum_oracle(&mut rng),
        kinematic_roundtrips(&mut rng)?,
        dynamics_roundtrip(&mut rng)?,
        circle_closure()?,
        path_closure()?,
        d_sweep_return()?,
        spacing_clamp()?,
        disturbance_nullity()?,
        kinematic_consistency()?,
        heading_drift_ordering()?,
        incline_monotonicity()?,
        distance_step()?,
        balance_recovery()?,
        anti_windup()?,
        determinism()?,
        command_gate(),
    ])
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rate(rng: &mut ChaCha8Rng, scale: f64) -> OddRate {
    OddRate::from_array(std::array::from_fn(|_| rng.gen_range(-scale..scale)))
}

fn odd_matrix_identity(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..DRAWS {
        let d = Spacing::new(10.0 - rng.gen_range(0.0..10.0)).expect("positive");
        let a = Matrix4::from_fn(|i, j| odd_forward_matrix(d)[i][j]);
        let b = Matrix4::from_fn(|i, j| odd_inverse_matrix(d)[i][j]);
        worst = worst.max((a * b - Matrix4::identity()).amax());
    }
    check("odd_matrix_identity", worst < 1e-12, format!("max error {worst:.3e}"))
}

/// Wheel constraint system assembled directly from contact-point velocities:
/// row `i` maps `(ẋ, ẏ, φ̇, ḋ)` to `r θ̇_i cos α_i`.
fn constraint_system(geom: &RigGeometry, d: Spacing) -> Matrix4<f64> {
    let offsets = geom.wheel_offsets(d);
    Matrix4::from_fn(|i, j| {
        let (s, c) = geom.roller_angles[i].sin_cos();
        let side = if i < 2 { 0.5 } else { -0.5 };
        match j {
            0 => c,
            1 => s,
            2 => -offsets[i] * c,
            _ => side * s,
        }
    })
}

fn random_geometry(rng: &mut ChaCha8Rng) -> (RigGeometry, Spacing) {
    loop {
        let mut g = RigGeometry {
            wheel_radius: rng.gen_range(0.02..0.2),
            group_width: rng.gen_range(0.05..0.5),
            roller_angles: std::array::from_fn(|_| {
                let a = rng.gen_range(0.1..PI / 2.0 - 0.1);
                if rng.gen_bool(0.5) { a } else { -a }
            }),
            d_min: 0.0,
            d_max: 0.0,
        };
        let d = rng.gen_range(0.1..3.0);
        g.d_min = d / 2.0;
        g.d_max = d * 2.0;
        let sd = Spacing::new(d).expect("positive");
        let m = constraint_system(&g, sd);
        let sv = m.singular_values();
        if sv.min() / sv.max() > 1e-3 {
            return (g, sd);
        }
    }
}

fn mecanum_oracle(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..DRAWS {
        let (g, d) = random_geometry(rng);
        let Some(inv) = constraint_system(&g, d).try_inverse() else {
            continue;
        };
        let radial = Matrix4::from_diagonal(&nalgebra::Vector4::from_fn(|i, _| {
            g.wheel_radius * g.roller_angles[i].cos()
        }));
        let oracle_body = inv * radial;
        let to_groups = Matrix4::from_fn(|i, j| odd_inverse_matrix(d)[i][j]);
        let oracle_group = to_groups * oracle_body;
        let (Ok(body), Ok(group)) = (body_matrix(&g, d), group_matrix(&g, d)) else {
            worst = f64::INFINITY;
            break;
        };
        let body = Matrix4::from_fn(|i, j| body[i][j]);
        let group = Matrix4::from_fn(|i, j| group[i][j]);
        worst = worst
            .max((body - oracle_body).amax() / oracle_body.amax())
            .max((group - oracle_group).amax() / oracle_group.amax());
    }
    check("mecanum_oracle", worst < 1e-9, format!("max relative error {worst:.3e}"))
}

fn kinematic_roundtrips(rng: &mut ChaCha8Rng) -> Result<Check> {
    let geom = RigGeometry::default();
    let mut worst: f64 = 0.0;
    for _ in 0..DRAWS {
        let d = Spacing::new(rng.gen_range(geom.d_min..geom.d_max))?;
        let q = rate(rng, 2.0);
        let back = odd_forward(odd_inverse(q, d), d);
        worst = worst.max(max_abs_diff(&back.to_array(), &q.to_array()));
        let w = inverse_kinematics(&geom, d, q)?;
        let back = forward_kinematics(&geom, d, &w)?;
        worst = worst.max(max_abs_diff(&back.to_array(), &q.to_array()));
    }
    Ok(check("kinematic_roundtrips", worst < 1e-9, format!("max error {worst:.3e}")))
}

fn dynamics_roundtrip(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut inertia_err: f64 = 0.0;
    let mut pseudo_zero = true;
    for _ in 0..DRAWS {
        let m = MassPair::new(rng.gen_range(0.1..20.0), rng.gen_range(0.1..20.0))?;
        let d = Spacing::new(rng.gen_range(0.05..3.0))?;
        let state = DynState { rate: rate(rng, 3.0), d };
        let a = OddAccel::from_array(std::array::from_fn(|_| rng.gen_range(-5.0..5.0)));
        let back = forward_dynamics(&m, &state, &inverse_dynamics(&m, &state, &a));
        let scale = a.to_array().iter().fold(1.0f64, |s, v| s.max(v.abs()));
        worst = worst.max(max_abs_diff(&back.to_array(), &a.to_array()) / scale);

        let yc = (m.left() - m.right()) * d.get() / (2.0 * m.total());
        let brute = m.left() * (d.get() / 2.0 - yc).powi(2) + m.right() * (-d.get() / 2.0 - yc).powi(2);
        inertia_err = inertia_err.max((moment_of_inertia(&m, d) - brute).abs() / brute.max(1.0));

        let still = DynState {
            rate: OddRate { phi_dot: 0.0, ..state.rate },
            d,
        };
        pseudo_zero &= pseudo_forces(&m, &still) == PseudoForces::default();
    }
    Ok(check(
        "dynamics_roundtrip",
        worst < 1e-9 && inertia_err < 1e-12 && pseudo_zero,
        format!("roundtrip {worst:.3e}, inertia {inertia_err:.3e}, pseudo-forces zero at rest yaw: {pseudo_zero}"),
    ))
}

fn endpoint(name: &str, config: &SimConfig) -> Result<f64> {
    let log = run_script(&builtin_script(name)?, config)?;
    Ok(compute_metrics(&log)?.endpoint_deviation)
}

fn circle_closure() -> Result<Check> {
    let mut c = SimConfig::ideal();
    c.dt = 1e-3;
    let coarse = endpoint("circle_xz", &c)?;
    c.dt = 5e-4;
    let fine = endpoint("circle_xz", &c)?;
    let halves = fine <= coarse / 2.0;
    Ok(check(
        "circle_closure",
        coarse < 1e-3 && halves,
        format!("dt=1ms {coarse:.3e} m, dt=0.5ms {fine:.3e} m"),
    ))
}

fn path_closure() -> Result<Check> {
    let mut c = SimConfig::ideal();
    c.dt = 1e-3;
    let mut worst: f64 = 0.0;
    for name in ["square", "rhombus", "circle_xz", "circle_yz"] {
        worst = worst.max(endpoint(name, &c)?);
    }
    Ok(check("path_closure", worst < 1e-3, format!("worst endpoint {worst:.3e} m")))
}

fn d_sweep_return() -> Result<Check> {
    let mut c = SimConfig::ideal();
    c.dt = 1e-3;
    let mut worst: f64 = 0.0;
    for name in ["d_sweep_x", "d_sweep_y", "d_sweep_spin"] {
        let log = run_script(&builtin_script(name)?, &c)?;
        let (first, last) = (log.rows[0].d, log.rows[log.rows.len() - 1].d);
        worst = worst.max((last - first).abs());
    }
    Ok(check("d_sweep_return", worst < 1e-6, format!("worst spacing error {worst:.3e} m")))
}

fn spacing_clamp() -> Result<Check> {
    let c = SimConfig::default();
    let g = c.geometry;
    let mut lp = ClosedLoop::new(c.clone())?;
    let mut inside = true;
    for k in 0..2000 {
        let ddot = if (k / 400) % 2 == 0 { 5.0 } else { -5.0 };
        let d = if k % 3 == 0 { Some(if ddot > 0.0 { 10.0 } else { 0.01 }) } else { None };
        let r = Reference {
            rate: OddRate::new(0.3, -0.2, 1.0, ddot),
            yaw: None,
            d,
        };
        lp.tick(&r)?;
        let d = lp.state().d;
        inside &= d >= g.d_min && d <= g.d_max;
    }
    Ok(check("spacing_clamp", inside, format!("range [{}, {}]", g.d_min, g.d_max)))
}

fn disturbance_nullity() -> Result<Check> {
    let script = builtin_script("rhombus")?;
    let base = SimConfig::default();
    let mut zeroed = base.clone();
    zeroed.disturbances = vec![
        Disturbance::always(DisturbanceKind::Incline { azimuth: 0.7 }, 0.0),
        Disturbance::always(DisturbanceKind::MassAsymmetry, 0.0),
        Disturbance::always(DisturbanceKind::LateralPush, 0.0),
    ];
    let a = run_script(&script, &base)?.to_csv_string()?;
    let b = run_script(&script, &zeroed)?.to_csv_string()?;
    Ok(check("disturbance_nullity", a == b, format!("{} bytes compared", a.len())))
}

fn kinematic_consistency() -> Result<Check> {
    let mut c = SimConfig::ideal();
    c.ground_incline = [0.0; 2];
    c.mass_asymmetry = 0.0;
    let geom = c.geometry;
    let mut lp = ClosedLoop::new(c)?;
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let t = k as f64 * 0.005;
        let r = Reference::rate(OddRate::new(0.4 * t.sin(), 0.3 * t.cos(), 0.5, 0.05 * (2.0 * t).sin()));
        // Rates over a step come from the spacing at its start.
        let before = lp.tick(&r)?.row.d;
        let s = lp.state();
        let wheels = crate::mecanum::WheelSpeeds::new(s.wheel_speeds);
        let d = Spacing::new(before)?;
        let expected = forward_kinematics(&geom, d, &wheels)?;
        worst = worst.max(max_abs_diff(&expected.to_array(), &s.rate.to_array()));
    }
    Ok(check("kinematic_consistency", worst < 1e-12, format!("max error {worst:.3e}")))
}

/// Defaults with noise off, 0.5° incline along world x and 5% mass asymmetry.
pub fn ordering_config() -> SimConfig {
    let mut c = SimConfig::default();
    c.sensor_noise = SensorNoise::default();
    c.ground_incline = [0.5f64.to_radians(), 0.0];
    c.mass_asymmetry = 0.05;
    c
}

/// Heading drift per metre for a straight translation at `rate`.
pub fn drift_per_metre(config: &SimConfig, rate: OddRate, duration: f64) -> Result<f64> {
    let script = CommandScript {
        name: "straight".into(),
        segments: vec![Segment::constant(duration, rate)],
        mode: None,
        initial_d: None,
    };
    let m = compute_metrics(&run_script(&script, config)?)?;
    Ok(m.heading_drift / m.path_length)
}

fn heading_drift_ordering() -> Result<Check> {
    let c = ordering_config();
    let bx = drift_per_metre(&c, OddRate::new(0.5, 0.0, 0.0, 0.0), 4.0)?;
    let by = drift_per_metre(&c, OddRate::new(0.0, 0.5, 0.0, 0.0), 4.0)?;
    Ok(check(
        "heading_drift_ordering",
        by > bx,
        format!("B_x {bx:.3e} rad/m, B_y {by:.3e} rad/m"),
    ))
}

fn incline_monotonicity() -> Result<Check> {
    let mut c = ordering_config();
    c.wheel_speed_tracking_tau = 0.0;
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["circle_xz", "circle_yz"] {
        let mut prev = 0.0;
        for deg in [0.0, 0.1, 0.25, 0.5, 1.0, 2.0] {
            c.ground_incline = [f64::to_radians(deg), 0.0];
            let e = endpoint(name, &c)?;
            ok &= e >= prev;
            prev = e;
        }
        detail.push(format!("{name} at 2° {prev:.3e} m"));
    }
    Ok(check("incline_monotonicity", ok, detail.join(", ")))
}

fn distance_step() -> Result<Check> {
    let c = SimConfig::default();
    let start = c.initial_d;
    let target = start + 0.1;
    let mut lp = ClosedLoop::new(c.clone())?;
    let r = Reference {
        d: Some(target),
        ..Default::default()
    };
    let mut last_out = 0.0;
    for k in 0..(3.0 / c.dt) as usize {
        lp.tick(&r)?;
        if (lp.state().d - target).abs() > 0.02 * 0.1 {
            last_out = (k + 1) as f64 * c.dt;
        }
    }
    let err = (lp.state().d - target).abs();
    Ok(check(
        "distance_step",
        last_out < 3.0 && err < 1e-3,
        format!("settled by {last_out:.3} s, final error {err:.2e} m"),
    ))
}

fn balance_recovery() -> Result<Check> {
    let mut c = SimConfig::default();
    c.mode = Mode::Balance;
    let state = RobotState {
        pitch: 0.05,
        ..RobotState::initial(&c)
    };
    let mut lp = ClosedLoop::with_state(c.clone(), state)?;
    let mut recovered = None;
    for k in 0..(4.0 / c.dt) as usize {
        lp.tick(&Reference::default())?;
        let t = (k + 1) as f64 * c.dt;
        if lp.state().pitch.abs() >= 0.01 {
            recovered = None;
        } else if recovered.is_none() {
            recovered = Some(t);
        }
    }
    let ok = recovered.is_some_and(|t| t <= 2.0);
    Ok(check("balance_recovery", ok, format!("|pitch| < 0.01 from t = {recovered:?}")))
}

fn anti_windup() -> Result<Check> {
    let g = PidGains::new(1.0, 5.0, 0.0, 1.0).with_integral_limit(0.5);
    let mut mem = PidMemory::default();
    let mut max_out: f64 = 0.0;
    for _ in 0..10_000 {
        max_out = max_out.max(pid_step(&g, &mut mem, 10.0, 0.01)?.abs());
    }
    let integral = mem.integral_accum;
    // After the error reverses, the output must leave saturation at once.
    let u = pid_step(&g, &mut mem, -0.5, 0.01)?;
    let ok = max_out <= 1.0 && integral.abs() <= 0.5 && u < 1.0;
    Ok(check(
        "anti_windup",
        ok,
        format!("max |u| {max_out}, integral {integral:.3}, first output after reversal {u:.3}"),
    ))
}

fn determinism() -> Result<Check> {
    let c = SimConfig::default();
    let script = builtin_script("d_sweep_spin")?;
    let a = run_script(&script, &c)?.to_csv_string()?;
    let b = run_script(&script, &c)?.to_csv_string()?;
    Ok(check("determinism", a == b, format!("{} bytes", a.len())))
}

fn command_gate() -> Check {
    let c = SimConfig::default();
    let mut g = CommandGate::new(c.limits);
    let cmd = |seq, vx| CommandMessage {
        vx,
        ..CommandMessage::zero(seq)
    };
    g.offer(1, cmd(1, 0.1), 0.0);
    g.offer(1, cmd(3, 0.3), 0.0);
    let stale_dropped = !g.offer(1, cmd(2, 0.9), 0.0) && g.reference(0.0).rate.x_dot == 0.3;
    let zeroed = g.reference(0.5).rate == OddRate::ZERO;
    check(
        "command_gate",
        stale_dropped && zeroed,
        format!("stale dropped: {stale_dropped}, zero after 0.5 s: {zeroed}"),
    )
}
