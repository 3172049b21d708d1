//! C ABI over `odd-core`.
//!
//! Every function returns an [`OddStatus`]. On failure the message is kept in
//! a thread-local slot readable through [`odd_last_error_message`]. Sessions
//! are opaque and must be released with [`odd_session_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use odd_core::drive::{self, GroupRates, Spacing};
use odd_core::experiments::{builtin_script, export_log, run_script, ClosedLoop, Reference};
use odd_core::mecanum::{self, RigGeometry, WheelSpeeds};
use odd_core::sim::{ConfigFile, SimConfig};
use odd_core::OddError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OddStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonPositiveSpacing = 3,
    SlipInconsistency = 4,
    NonPositiveMass = 5,
    SpacingOutOfRange = 6,
    DegenerateRoller = 7,
    SingularConfiguration = 8,
    InvalidGeometry = 9,
    NonPositiveDt = 10,
    BadWheelIndex = 11,
    InvalidGains = 12,
    ModeMismatch = 13,
    UnknownScript = 14,
    EmptyScript = 15,
    EmptyLog = 16,
    Config = 17,
    Io = 18,
    MalformedMessage = 19,
    PortUnavailable = 20,
    DriverSlotBusy = 21,
    Panic = 99,
}

impl From<&OddError> for OddStatus {
    fn from(e: &OddError) -> Self {
        match e {
            OddError::NonPositiveSpacing(_) => OddStatus::NonPositiveSpacing,
            OddError::SlipInconsistency { .. } => OddStatus::SlipInconsistency,
            OddError::NonPositiveMass { .. } => OddStatus::NonPositiveMass,
            OddError::SpacingOutOfRange { .. } => OddStatus::SpacingOutOfRange,
            OddError::DegenerateRoller { .. } => OddStatus::DegenerateRoller,
            OddError::SingularConfiguration { .. } => OddStatus::SingularConfiguration,
            OddError::InvalidGeometry(_) => OddStatus::InvalidGeometry,
            OddError::NonPositiveDt(_) => OddStatus::NonPositiveDt,
            OddError::BadWheelIndex(_) => OddStatus::BadWheelIndex,
            OddError::InvalidGains(_) => OddStatus::InvalidGains,
            OddError::ModeMismatch => OddStatus::ModeMismatch,
            OddError::UnknownScript(_) => OddStatus::UnknownScript,
            OddError::EmptyScript => OddStatus::EmptyScript,
            OddError::EmptyLog => OddStatus::EmptyLog,
            OddError::Config(_) => OddStatus::Config,
            OddError::Io(_) | OddError::Csv(_) => OddStatus::Io,
            OddError::MalformedMessage(_) => OddStatus::MalformedMessage,
            OddError::PortUnavailable { .. } => OddStatus::PortUnavailable,
            OddError::DriverSlotBusy => OddStatus::DriverSlotBusy,
        }
    }
}

/// Body-frame rates `(ẋ, ẏ, φ̇, ḋ)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OddRate {
    pub x_dot: f64,
    pub y_dot: f64,
    pub phi_dot: f64,
    pub d_dot: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OddGroupRates {
    pub x_dot_left: f64,
    pub y_dot_left: f64,
    pub x_dot_right: f64,
    pub y_dot_right: f64,
}

/// Roller angles in radians, wheels 1 to 4.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OddRigGeometry {
    pub wheel_radius: f64,
    pub group_width: f64,
    pub roller_angles: [f64; 4],
    pub d_min: f64,
    pub d_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OddState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub d: f64,
    pub pitch: f64,
    pub rate: OddRate,
    pub wheel_speeds: [f64; 4],
}

/// Closed-loop simulator handle.
pub struct OddSession {
    inner: ClosedLoop,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), OddStatus>) -> OddStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OddStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            OddStatus::Panic
        }
    }
}

fn fail(e: OddError) -> OddStatus {
    set_error(&e.to_string());
    OddStatus::from(&e)
}

fn null() -> OddStatus {
    set_error("null pointer argument");
    OddStatus::NullPointer
}

/// Safety: the caller guarantees `p` is null or valid for the access.
unsafe fn ref_or<'a, T>(p: *const T) -> Result<&'a T, OddStatus> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out_or<'a, T>(p: *mut T) -> Result<&'a mut T, OddStatus> {
    p.as_mut().ok_or_else(null)
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<Option<&'a str>, OddStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p).to_str().map(Some).map_err(|_| {
        set_error("string argument is not UTF-8");
        OddStatus::InvalidArgument
    })
}

fn spacing(d: f64) -> Result<Spacing, OddStatus> {
    Spacing::new(d).map_err(fail)
}

impl From<drive::OddRate> for OddRate {
    fn from(r: drive::OddRate) -> Self {
        OddRate {
            x_dot: r.x_dot,
            y_dot: r.y_dot,
            phi_dot: r.phi_dot,
            d_dot: r.d_dot,
        }
    }
}

impl From<OddRate> for drive::OddRate {
    fn from(r: OddRate) -> Self {
        drive::OddRate::new(r.x_dot, r.y_dot, r.phi_dot, r.d_dot)
    }
}

impl From<RigGeometry> for OddRigGeometry {
    fn from(g: RigGeometry) -> Self {
        OddRigGeometry {
            wheel_radius: g.wheel_radius,
            group_width: g.group_width,
            roller_angles: g.roller_angles,
            d_min: g.d_min,
            d_max: g.d_max,
        }
    }
}

fn geometry(g: &OddRigGeometry) -> Result<RigGeometry, OddStatus> {
    let g = RigGeometry {
        wheel_radius: g.wheel_radius,
        group_width: g.group_width,
        roller_angles: g.roller_angles,
        d_min: g.d_min,
        d_max: g.d_max,
    };
    g.validate().map_err(fail)?;
    Ok(g)
}

fn load_config(path: Option<&str>) -> Result<SimConfig, OddStatus> {
    let file = match path {
        Some(p) => ConfigFile::load(Path::new(p)).map_err(fail)?,
        None => ConfigFile::default(),
    };
    file.into_config().map_err(fail)
}

/// Message of the last failure on this thread, or an empty string. Valid
/// until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn odd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Stable name of a status code.
#[no_mangle]
pub extern "C" fn odd_status_name(status: OddStatus) -> *const c_char {
    let s: &'static CStr = match status {
        OddStatus::Ok => c"Ok",
        OddStatus::NullPointer => c"NullPointer",
        OddStatus::InvalidArgument => c"InvalidArgument",
        OddStatus::NonPositiveSpacing => c"NonPositiveSpacing",
        OddStatus::SlipInconsistency => c"SlipInconsistency",
        OddStatus::NonPositiveMass => c"NonPositiveMass",
        OddStatus::SpacingOutOfRange => c"SpacingOutOfRange",
        OddStatus::DegenerateRoller => c"DegenerateRoller",
        OddStatus::SingularConfiguration => c"SingularConfiguration",
        OddStatus::InvalidGeometry => c"InvalidGeometry",
        OddStatus::NonPositiveDt => c"NonPositiveDt",
        OddStatus::BadWheelIndex => c"BadWheelIndex",
        OddStatus::InvalidGains => c"InvalidGains",
        OddStatus::ModeMismatch => c"ModeMismatch",
        OddStatus::UnknownScript => c"UnknownScript",
        OddStatus::EmptyScript => c"EmptyScript",
        OddStatus::EmptyLog => c"EmptyLog",
        OddStatus::Config => c"Config",
        OddStatus::Io => c"IoFailure",
        OddStatus::MalformedMessage => c"MalformedMessage",
        OddStatus::PortUnavailable => c"PortUnavailable",
        OddStatus::DriverSlotBusy => c"DriverSlotBusy",
        OddStatus::Panic => c"Panic",
    };
    s.as_ptr()
}

/// Differential drive: wheel-group speeds to `(ẋ, φ̇)`.
///
/// # Safety
/// Output pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn odd_dd_forward(
    x_dot_left: f64,
    x_dot_right: f64,
    d: f64,
    out_x_dot: *mut f64,
    out_phi_dot: *mut f64,
) -> OddStatus {
    guard(|| {
        let d = spacing(d)?;
        let (x, p) = drive::dd_forward(
            drive::DdWheelRates {
                x_dot_left,
                x_dot_right,
            },
            d,
        );
        *out_or(out_x_dot)? = x;
        *out_or(out_phi_dot)? = p;
        Ok(())
    })
}

/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn odd_odd_forward(groups: *const OddGroupRates, d: f64, out: *mut OddRate) -> OddStatus {
    guard(|| {
        let g = ref_or(groups)?;
        let d = spacing(d)?;
        let r = drive::odd_forward(
            GroupRates::from_array([g.x_dot_left, g.y_dot_left, g.x_dot_right, g.y_dot_right]),
            d,
        );
        *out_or(out)? = r.into();
        Ok(())
    })
}

/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn odd_odd_inverse(rate: *const OddRate, d: f64, out: *mut OddGroupRates) -> OddStatus {
    guard(|| {
        let r = *ref_or(rate)?;
        let d = spacing(d)?;
        let [a, b, c, e] = drive::odd_inverse(r.into(), d).to_array();
        *out_or(out)? = OddGroupRates {
            x_dot_left: a,
            y_dot_left: b,
            x_dot_right: c,
            y_dot_right: e,
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn odd_rig_default(out: *mut OddRigGeometry) -> OddStatus {
    guard(|| {
        *out_or(out)? = RigGeometry::default().into();
        Ok(())
    })
}

/// Wheel speeds (rad/s) realizing `rate` at spacing `d`.
///
/// # Safety
/// `out_wheels` must be null or point to four writable doubles.
#[no_mangle]
pub unsafe extern "C" fn odd_mecanum_inverse(
    geom: *const OddRigGeometry,
    d: f64,
    rate: *const OddRate,
    out_wheels: *mut f64,
) -> OddStatus {
    guard(|| {
        let g = geometry(ref_or(geom)?)?;
        let r = *ref_or(rate)?;
        let w = mecanum::inverse_kinematics(&g, spacing(d)?, r.into()).map_err(fail)?;
        if out_wheels.is_null() {
            return Err(null());
        }
        std::slice::from_raw_parts_mut(out_wheels, 4).copy_from_slice(&w.theta_dot);
        Ok(())
    })
}

/// Body rates produced by four wheel speeds.
///
/// # Safety
/// `wheels` must be null or point to four readable doubles.
#[no_mangle]
pub unsafe extern "C" fn odd_mecanum_forward(
    geom: *const OddRigGeometry,
    d: f64,
    wheels: *const f64,
    out: *mut OddRate,
) -> OddStatus {
    guard(|| {
        let g = geometry(ref_or(geom)?)?;
        if wheels.is_null() {
            return Err(null());
        }
        let mut theta_dot = [0.0; 4];
        theta_dot.copy_from_slice(std::slice::from_raw_parts(wheels, 4));
        let w = WheelSpeeds::new(theta_dot);
        let r = mecanum::forward_kinematics(&g, spacing(d)?, &w).map_err(fail)?;
        *out_or(out)? = r.into();
        Ok(())
    })
}

/// Creates a closed-loop session from a config file, or the defaults when
/// `config_path` is null.
///
/// # Safety
/// `config_path` must be null or a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn odd_session_new(config_path: *const c_char, out: *mut *mut OddSession) -> OddStatus {
    guard(|| {
        let slot = out_or(out)?;
        *slot = std::ptr::null_mut();
        let cfg = load_config(str_arg(config_path)?)?;
        let inner = ClosedLoop::new(cfg).map_err(fail)?;
        *slot = Box::into_raw(Box::new(OddSession { inner }));
        Ok(())
    })
}

/// Releases a session. Null is accepted.
///
/// # Safety
/// `session` must come from [`odd_session_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn odd_session_free(session: *mut OddSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Advances one step with the operator command `cmd`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn odd_session_tick(session: *mut OddSession, cmd: *const OddRate) -> OddStatus {
    guard(|| {
        let s = out_or(session)?;
        let c = *ref_or(cmd)?;
        s.inner.tick(&Reference::rate(c.into())).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn odd_session_state(session: *const OddSession, out: *mut OddState) -> OddStatus {
    guard(|| {
        let s = ref_or(session)?.inner.state();
        *out_or(out)? = OddState {
            t: s.t,
            x: s.x,
            y: s.y,
            phi: s.phi,
            d: s.d,
            pitch: s.pitch,
            rate: s.rate.into(),
            wheel_speeds: s.wheel_speeds,
        };
        Ok(())
    })
}

/// Runs a builtin script and writes its CSV log.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `script` and `out_csv`
/// are required.
#[no_mangle]
pub unsafe extern "C" fn odd_run_script(
    script: *const c_char,
    config_path: *const c_char,
    out_csv: *const c_char,
) -> OddStatus {
    guard(|| {
        let name = str_arg(script)?.ok_or_else(null)?;
        let out = str_arg(out_csv)?.ok_or_else(null)?;
        let cfg = load_config(str_arg(config_path)?)?;
        let script = builtin_script(name).map_err(fail)?;
        let log = run_script(&script, &cfg).map_err(fail)?;
        export_log(&log, Path::new(out)).map_err(fail)
    })
}
