use thiserror::Error;

/// Errors raised while designing or simulating a dual-band ring network.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequencies must be positive and finite (got f1={f1}, f2={f2})")]
    NonPositiveFrequency { f1: f64, f2: f64 },
    #[error("frequency ratio m={m} outside the supported range (1, 10]")]
    RatioOutOfRange { m: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no dual-band solution found on the admissible branch for m={m}, k={k}")]
    NoSolutionFound { m: f64, k: f64 },
    #[error("dual-band conditions are singular at m={m}, k={k}")]
    SingularPoint { m: f64, k: f64 },
    #[error("phase-shift argument {arg} lies outside [-1, 1]")]
    PhaseOutOfRange { arg: f64 },
    #[error("phase shift {phi_deg} deg is degenerate (too close to 0 or 180 deg)")]
    DegeneratePhase { phi_deg: f64 },
    #[error("electrical length {theta_deg} deg has a vanishing sine")]
    SingularLength { theta_deg: f64 },
    #[error("{what} evaluated to a non-positive impedance ({value} ohm)")]
    NegativeImpedance { what: &'static str, value: f64 },
    #[error("phase-shifter synthesis is singular at m={m}: {reason}")]
    SingularSynthesis { m: f64, reason: &'static str },
    #[error("element evaluation is singular at theta={theta_deg} deg")]
    EvaluationSingular { theta_deg: f64 },
    #[error("nodal matrix is singular at f={freq_hz} Hz")]
    SingularAssembly { freq_hz: f64 },
    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid port role map: {0}")]
    RoleMapInvalid(String),
    #[error("port {0} does not exist")]
    PortInvalid(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code used by the CLI and HTTP service.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveFrequency { .. } => "NonPositiveFrequency",
            Error::RatioOutOfRange { .. } => "RatioOutOfRange",
            Error::InvalidInput(_) => "InvalidInput",
            Error::NoSolutionFound { .. } => "NoSolutionFound",
            Error::SingularPoint { .. } => "SingularPoint",
            Error::PhaseOutOfRange { .. } => "PhaseOutOfRange",
            Error::DegeneratePhase { .. } => "DegeneratePhase",
            Error::SingularLength { .. } => "SingularLength",
            Error::NegativeImpedance { .. } => "NegativeImpedance",
            Error::SingularSynthesis { .. } => "SingularSynthesis",
            Error::EvaluationSingular { .. } => "EvaluationSingular",
            Error::SingularAssembly { .. } => "SingularAssembly",
            Error::TopologyMismatch(_) => "TopologyMismatch",
            Error::InvalidNetwork(_) => "InvalidNetwork",
            Error::RoleMapInvalid(_) => "RoleMapInvalid",
            Error::PortInvalid(_) => "PortInvalid",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
