use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid per-unit base: {0}")]
    InvalidBase(String),

    #[error("virtual impedance is zero (rv = lv = 0)")]
    DegenerateAdmittance,

    #[error("unstable operating point: synchronizing coefficient {ks} <= 0")]
    UnstableOperatingPoint { ks: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical divergence at t = {t:.6} s in state {state}")]
    NumericalDivergence { t: f64, state: String },

    #[error("dc link collapse on unit {unit} at t = {t:.6} s (vdc = {vdc:.4} pu)")]
    DcCollapse { unit: usize, t: f64, vdc: f64 },

    #[error("infeasible dispatch: {reason} (residual {residual:.3e})")]
    InfeasibleDispatch { reason: String, residual: f64 },

    #[error("scenario schema error: {0}")]
    Schema(String),

    #[error("window [{start}, {end}] s is not inside the ramp interval")]
    InvalidWindow { start: f64, end: f64 },

    #[error("channel {0} missing from time series")]
    ChannelMissing(String),

    #[error("time axes do not match: {0}")]
    AxisMismatch(String),

    #[error("unknown bus {name}; available: {available}")]
    UnknownBus { name: String, available: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidBase(_) => "invalid_base",
            Error::DegenerateAdmittance => "degenerate_admittance",
            Error::UnstableOperatingPoint { .. } => "unstable_operating_point",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NumericalDivergence { .. } => "numerical_divergence",
            Error::DcCollapse { .. } => "dc_collapse",
            Error::InfeasibleDispatch { .. } => "infeasible_dispatch",
            Error::Schema(_) => "schema",
            Error::InvalidWindow { .. } => "invalid_window",
            Error::ChannelMissing(_) => "channel_missing",
            Error::AxisMismatch(_) => "axis_mismatch",
            Error::UnknownBus { .. } => "unknown_bus",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
