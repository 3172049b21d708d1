use thiserror::Error;

pub type Result<T, E = OddError> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum OddError {
    #[error("wheel-group spacing must be positive and finite, got {0}")]
    NonPositiveSpacing(f64),

    #[error("lateral group speeds differ by {diff} m/s at fixed spacing (tolerance {tolerance})")]
    SlipInconsistency { diff: f64, tolerance: f64 },

    #[error("masses must be positive and finite (left {left}, right {right})")]
    NonPositiveMass { left: f64, right: f64 },

    #[error("spacing {d} outside configured range [{min}, {max}]")]
    SpacingOutOfRange { d: f64, min: f64, max: f64 },

    #[error("roller angle of wheel {wheel} is (nearly) perpendicular to the drive axis")]
    DegenerateRoller { wheel: usize },

    #[error("singular wheel configuration (sigma1 = {sigma1})")]
    SingularConfiguration { sigma1: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),

    #[error("wheel index {0} out of range 1..=4")]
    BadWheelIndex(usize),

    #[error("invalid gains: {0}")]
    InvalidGains(String),

    #[error("operation requires balance mode")]
    ModeMismatch,

    #[error("unknown script `{0}`")]
    UnknownScript(String),

    #[error("script has no segments")]
    EmptyScript,

    #[error("trajectory log is empty")]
    EmptyLog,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed message: {0}")]
    MalformedMessage(String),

    #[error("port {port} unavailable: {reason}")]
    PortUnavailable { port: u16, reason: String },

    #[error("another driver is connected")]
    DriverSlotBusy,
}

impl OddError {
    /// Stable machine-readable identifier, used on the CLI error line and over the wire.
    pub fn code(&self) -> &'static str {
        match self {
            OddError::NonPositiveSpacing(_) => "NonPositiveSpacing",
            OddError::SlipInconsistency { .. } => "SlipInconsistency",
            OddError::NonPositiveMass { .. } => "NonPositiveMass",
            OddError::SpacingOutOfRange { .. } => "SpacingOutOfRange",
            OddError::DegenerateRoller { .. } => "DegenerateRoller",
            OddError::SingularConfiguration { .. } => "SingularConfiguration",
            OddError::InvalidGeometry(_) => "InvalidGeometry",
            OddError::NonPositiveDt(_) => "NonPositiveDt",
            OddError::BadWheelIndex(_) => "BadWheelIndex",
            OddError::InvalidGains(_) => "InvalidGains",
            OddError::ModeMismatch => "ModeMismatch",
            OddError::UnknownScript(_) => "UnknownScript",
            OddError::EmptyScript => "EmptyScript",
            OddError::EmptyLog => "EmptyLog",
            OddError::Config(_) => "Config",
            OddError::Io(_) => "IoFailure",
            OddError::Csv(_) => "IoFailure",
            OddError::MalformedMessage(_) => "MalformedMessage",
            OddError::PortUnavailable { .. } => "PortUnavailable",
            OddError::DriverSlotBusy => "DriverSlotBusy",
        }
    }
}
