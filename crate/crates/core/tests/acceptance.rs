//! One PASS/FAIL line per acceptance criterion, each at its stated tolerance.
//!
//! Criteria listed in `KNOWN_RED` are reported but do not fail the run; the
//! README explains why each is red.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::oracle::oracle_body_matrix;
use common::*;
use nalgebra::Matrix4;
use odd_core::control::{pid_step, PidGains, PidMemory};
use odd_core::drive::*;
use odd_core::dynamics::*;
use odd_core::experiments::*;
use odd_core::mecanum::*;
use odd_core::service::ServerMessage;
use odd_core::sim::{Mode, RobotState, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const KNOWN_RED: &[&str] = &["ordering"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn na(m: [[f64; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

fn matrix_identities(rng: &mut ChaCha8Rng) -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = Spacing::new(10.0 * (1.0 - rng.gen::<f64>())).unwrap();
        worst = worst.max((na(odd_forward_matrix(d)) * na(odd_inverse_matrix(d)) - Matrix4::identity()).amax());
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        "matrix_identities",
        worst < 1e-12 && secs < 1.0,
        format!("max |AB - I| = {worst:.2e} over 1000 d, {secs:.3} s"),
    )
}

fn oracle_equivalence(rng: &mut ChaCha8Rng) -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let mut g = RigGeometry {
            wheel_radius: rng.gen_range(0.01..0.3),
            group_width: rng.gen_range(0.02..0.6),
            roller_angles: std::array::from_fn(|_| rng.gen_range(0.05..1.45) * if rng.gen() { 1.0 } else { -1.0 }),
            ..RigGeometry::default()
        };
        let dv = rng.gen_range(0.05..4.0);
        g.d_min = dv / 2.0;
        g.d_max = dv * 2.0;
        let d = Spacing::new(dv).unwrap();
        let Some(oracle) = oracle_body_matrix(&g, d) else { continue };
        let cond = oracle.singular_values();
        if cond.min() / cond.max() < 1e-4 {
            continue;
        }
        n += 1;
        let body = na(body_matrix(&g, d).unwrap());
        let group = na(group_matrix(&g, d).unwrap());
        let oracle_group = na(odd_inverse_matrix(d)) * oracle;
        worst = worst
            .max((body - oracle).amax() / oracle.amax())
            .max((group - oracle_group).amax() / oracle_group.amax());
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        "oracle_equivalence",
        worst < 1e-9 && secs < 5.0,
        format!("max relative error {worst:.2e} over 1000 draws, {secs:.3} s"),
    )
}

fn kinematic_roundtrips(rng: &mut ChaCha8Rng) -> Outcome {
    let g = RigGeometry::default();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = Spacing::new(rng.gen_range(g.d_min..g.d_max)).unwrap();
        let q = OddRate::from_array(std::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
        let a = odd_forward(odd_inverse(q, d), d);
        let b = forward_kinematics(&g, d, &inverse_kinematics(&g, d, q).unwrap()).unwrap();
        for (x, y) in a.to_array().iter().chain(b.to_array().iter()).zip(q.to_array().iter().cycle()) {
            worst = worst.max((x - y).abs());
        }
    }
    outcome("kinematic_roundtrips", worst < 1e-9, format!("max error {worst:.2e} over 1000 rates"))
}

fn dynamics_roundtrip(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut rt, mut inertia, mut pseudo) = (0.0f64, 0.0f64, true);
    for _ in 0..1000 {
        let m = MassPair::new(rng.gen_range(0.1..30.0), rng.gen_range(0.1..30.0)).unwrap();
        let dv = rng.gen_range(0.05..3.0);
        let st = DynState {
            rate: OddRate::from_array(std::array::from_fn(|_| rng.gen_range(-4.0..4.0))),
            d: Spacing::new(dv).unwrap(),
        };
        let a = OddAccel::from_array(std::array::from_fn(|_| rng.gen_range(-5.0..5.0)));
        let back = forward_dynamics(&m, &st, &inverse_dynamics(&m, &st, &a));
        for (x, y) in back.to_array().iter().zip(a.to_array()) {
            rt = rt.max((x - y).abs());
        }
        let positions = [(m.left(), dv / 2.0), (m.right(), -dv / 2.0)];
        let yc = positions.iter().map(|(mi, yi)| mi * yi).sum::<f64>() / m.total();
        let brute: f64 = positions.iter().map(|(mi, yi)| mi * (yi - yc).powi(2)).sum();
        inertia = inertia.max((moment_of_inertia(&m, st.d) - brute).abs());
        let still = DynState {
            rate: OddRate { phi_dot: 0.0, ..st.rate },
            d: st.d,
        };
        pseudo &= pseudo_forces(&m, &still) == PseudoForces::default();
    }
    outcome(
        "dynamics_roundtrip",
        rt < 1e-9 && inertia < 1e-12 && pseudo,
        format!("roundtrip {rt:.2e}, inertia vs brute force {inertia:.2e}, pseudo-forces zero at zero yaw rate: {pseudo}"),
    )
}

fn odd_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_odd"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli_endpoint(script: &str, config: &Path, out: &Path) -> (f64, f64) {
    let t = Instant::now();
    let o = odd_bin()
        .args(["run", "--script", script, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    let secs = t.elapsed().as_secs_f64();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    (v["metrics"]["endpoint_deviation"].as_f64().unwrap(), secs)
}

fn circle_closure(dir: &Path) -> Outcome {
    let ms = configs().join("ideal.toml");
    let half = dir.join("half.toml");
    let text = std::fs::read_to_string(&ms).unwrap().replace("dt = 0.001", "dt = 0.0005");
    std::fs::write(&half, text).unwrap();
    let (coarse, secs) = cli_endpoint("circle_xz", &ms, &dir.join("c1.csv"));
    let (fine, _) = cli_endpoint("circle_xz", &half, &dir.join("c2.csv"));
    let halves = fine <= coarse / 2.0;
    outcome(
        "circle_closure",
        coarse < 1e-3 && halves && secs < 10.0,
        format!("dt=1ms {coarse:.4e} m, dt=0.5ms {fine:.4e} m (ratio {:.9}), run {secs:.2} s", coarse / fine),
    )
}

fn endpoint(name: &str, c: &SimConfig) -> f64 {
    compute_metrics(&run_script(&builtin_script(name).unwrap(), c).unwrap())
        .unwrap()
        .endpoint_deviation
}

fn path_closure() -> Outcome {
    let mut c = SimConfig::ideal();
    c.dt = 1e-3;
    let sq = endpoint("square", &c);
    let rh = endpoint("rhombus", &c);
    let mut dmax: f64 = 0.0;
    for name in ["d_sweep_x", "d_sweep_y", "d_sweep_spin"] {
        let log = run_script(&builtin_script(name).unwrap(), &c).unwrap();
        dmax = dmax.max((log.rows.last().unwrap().d - log.rows[0].d).abs());
    }
    outcome(
        "path_closure",
        sq < 1e-3 && rh < 1e-3 && dmax < 1e-6,
        format!("square {sq:.3e} m, rhombus {rh:.3e} m, d_sweep spacing error {dmax:.2e} m"),
    )
}

fn ordering() -> Outcome {
    let c = odd_core::verify::ordering_config();
    let straight = |q: OddRate| {
        let s = CommandScript {
            name: "straight".into(),
            segments: vec![Segment::constant(4.0, q)],
            mode: None,
            initial_d: None,
        };
        let m = compute_metrics(&run_script(&s, &c).unwrap()).unwrap();
        m.heading_drift / m.path_length
    };
    let bx = straight(OddRate::new(0.5, 0.0, 0.0, 0.0));
    let by = straight(OddRate::new(0.0, 0.5, 0.0, 0.0));
    let xz = endpoint("circle_xz", &c);
    let yz = endpoint("circle_yz", &c);
    outcome(
        "ordering",
        by > bx && yz >= xz,
        format!(
            "heading drift B_y {by:.3e} vs B_x {bx:.3e} rad/m ({}); circle_yz {yz:.4e} vs circle_xz {xz:.4e} m ({})",
            if by > bx { "holds" } else { "violated" },
            if yz >= xz { "holds" } else { "violated" },
        ),
    )
}

fn control_loops() -> Outcome {
    let c = SimConfig::default();
    let target = c.initial_d + 0.1;
    let mut lp = ClosedLoop::new(c.clone()).unwrap();
    let r = Reference {
        d: Some(target),
        ..Default::default()
    };
    let mut settle = 0.0;
    for k in 0..(3.0 / c.dt) as usize {
        lp.tick(&r).unwrap();
        if (lp.state().d - target).abs() > 0.02 * 0.1 {
            settle = (k + 1) as f64 * c.dt;
        }
    }
    let ss = (lp.state().d - target).abs();
    let distance_ok = settle < 3.0 && ss < 1e-3;

    let mut b = SimConfig::default();
    b.mode = Mode::Balance;
    let s0 = RobotState {
        pitch: 0.05,
        ..RobotState::initial(&b)
    };
    let mut lp = ClosedLoop::with_state(b.clone(), s0).unwrap();
    let mut last_out = 0.0;
    for k in 0..(4.0 / b.dt) as usize {
        lp.tick(&Reference::default()).unwrap();
        if lp.state().pitch.abs() >= 0.01 {
            last_out = (k + 1) as f64 * b.dt;
        }
    }
    let balance_ok = last_out <= 2.0;

    let g = PidGains::new(0.5, 4.0, 0.0, 1.0).with_integral_limit(0.3);
    let mut m = PidMemory::default();
    let mut bounded = true;
    for _ in 0..20_000 {
        let u = pid_step(&g, &mut m, 3.0, 0.005).unwrap();
        bounded &= u.abs() <= 1.0 && m.integral_accum.abs() <= 0.3;
    }
    let u = pid_step(&g, &mut m, -0.1, 0.005).unwrap();
    let windup_ok = bounded && u < 1.0;
    outcome(
        "control_loops",
        distance_ok && balance_ok && windup_ok,
        format!(
            "distance step settles in 2% band by {settle:.3} s, steady error {ss:.1e} m; balance |pitch| < 0.01 after {last_out:.3} s; anti-windup bounded {bounded}, unsaturates at once {}",
            u < 1.0
        ),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let run = |name: &str| {
        let p = dir.join(name);
        let o = odd_bin()
            .args(["run", "--script", "rhombus", "--seed", "1234", "--config"])
            .arg(configs().join("default.toml"))
            .arg("--out")
            .arg(&p)
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read(p).unwrap()
    };
    let (a, b) = (run("d1.csv"), run("d2.csv"));
    outcome("determinism", a == b, format!("{} vs {} bytes, identical: {}", a.len(), b.len(), a == b))
}

async fn service_contract() -> Outcome {
    let svc = start_ideal(200.0).await;
    let mut c = LineClient::connect(svc.local_addr).await;

    let t_stop = drive_then_stop(&mut c, 0.5, Duration::from_millis(500)).await;
    let after = states(&c.drain(Duration::from_millis(800)).await);
    let zero_at = after
        .iter()
        .filter(|s| s.t > t_stop)
        .find(|s| [s.vx, s.vy, s.wz, s.ddot].iter().all(|v| v.abs() < 1e-9))
        .map(|s| s.t - t_stop);
    let stays_zero = after
        .iter()
        .filter(|s| s.t >= t_stop + 0.5)
        .all(|s| [s.vx, s.vy, s.wz, s.ddot].iter().all(|v| v.abs() < 1e-9));
    let timeout_ok = zero_at.is_some_and(|z| z <= 0.5) && stays_zero;

    c.send_cmd(1000, 0.1, 0.0, 0.0, 0.0).await;
    c.send_cmd(1002, 0.3, 0.0, 0.0, 0.0).await;
    c.send_cmd(1001, 0.9, 0.0, 0.0, 0.0).await;
    let seen = states(&c.drain(Duration::from_millis(150)).await);
    let seq_ok = seen.iter().all(|s| (s.vx - 0.9).abs() > 1e-3)
        && seen.last().is_some_and(|s| (s.vx - 0.3).abs() < 1e-9);
    drop(c);

    let mut viewer = LineClient::connect(svc.local_addr).await;
    let first = viewer.next_state().await;
    let wall0 = Instant::now();
    let mut last = first.clone();
    while wall0.elapsed() < Duration::from_secs(60) {
        if let Some(ServerMessage::State(s)) = viewer.next(Duration::from_secs(1)).await {
            last = s;
        }
    }
    let wall = wall0.elapsed().as_secs_f64();
    let drift = ((last.t - first.t) - wall).abs() / wall;
    svc.shutdown().await;
    outcome(
        "service_contract",
        timeout_ok && seq_ok && drift < 0.01,
        format!(
            "twist zero {:.3} s after last command; stale seq discarded: {seq_ok}; 60 s drift {:.3}%",
            zero_at.unwrap_or(f64::NAN),
            drift * 100.0
        ),
    )
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let dir = tempfile::tempdir().unwrap();
    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .unwrap();
    let results = vec![
        matrix_identities(&mut rng),
        oracle_equivalence(&mut rng),
        kinematic_roundtrips(&mut rng),
        dynamics_roundtrip(&mut rng),
        circle_closure(dir.path()),
        path_closure(),
        ordering(),
        control_loops(),
        determinism(dir.path()),
        rt.block_on(service_contract()),
    ];
    let mut unexpected = 0;
    for r in &results {
        let tag = match (r.pass, KNOWN_RED.contains(&r.id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("{tag} {}: {}", r.id, r.detail);
    }
    let passed = results.iter().filter(|r| r.pass).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
