use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("signal spec for {system} is inconsistent: {reason}")]
    InvalidSignalSpec { system: String, reason: String },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("inconsistent OFDM parameters: closed-form NMSB evaluates to {0}")]
    InconsistentOfdm(f64),

    #[error("endfire singularity: sin(beta) = 0 for beta = {0} rad")]
    EndfireSingularity(f64),

    #[error("no TLE records could be parsed ({} diagnostics)", .0.len())]
    NoTleRecords(Vec<crate::orbits::TleDiagnostic>),

    #[error("satellite {satellite_id} has decayed: {reason}")]
    Decayed { satellite_id: u64, reason: String },

    #[error("propagation failed for satellite {satellite_id}: {reason}")]
    Propagation { satellite_id: u64, reason: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("singular geometry (condition number {0:.3e})")]
    SingularGeometry(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("delay {delay_s:e} s outside the window [0, {window_s:e}] s")]
    DelayOutOfWindow { delay_s: f64, window_s: f64 },

    #[error("received signal is all zeros")]
    ZeroSignal,

    #[error("all {0} acquisition trials failed")]
    AllTrialsFailed(usize),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }
}
