use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{what} of {width} rad/ps is not resolvable on a grid with dw = {dw} rad/ps (needs at least {min_samples} samples)")]
    GridTooCoarse {
        what: &'static str,
        width: f64,
        dw: f64,
        min_samples: f64,
    },

    #[error("{what} at {value} lies outside the grid span [{lo}, {hi}]")]
    OutsideGrid {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("pass-bands {0} and {1} overlap or are out of order")]
    OverlappingBands(usize, usize),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("gate FWHM {fwhm} ps exceeds a quarter of the grid span {span} ps")]
    GateTooWide { fwhm: f64, span: f64 },

    #[error("envelope has zero mass inside the valid region")]
    ZeroMass,

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("too few usable samples: found {found}, need {needed}")]
    TooFewSamples { found: usize, needed: usize },

    #[error("dynamic range is undefined for a delta gate")]
    DeltaGate,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by a bad configuration or parameter set, as
    /// opposed to malformed input data or I/O failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::GridTooCoarse { .. }
                | Error::OutsideGrid { .. }
                | Error::OverlappingBands(..)
                | Error::GateTooWide { .. }
                | Error::DeltaGate
                | Error::InvalidParameter { .. }
                | Error::Config { .. }
        )
    }
}
