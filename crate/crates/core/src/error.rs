use thiserror::Error;

use crate::grid::Bc;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value {value} at coordinate {coordinate:?}")]
    NonFinite { coordinate: Vec<f64>, value: f64 },

    #[error("boundary tag mismatch: operation needs {expected:?}, field is tagged {found:?}")]
    TagMismatch { expected: Bc, found: Bc },

    #[error("multiplier `{0}` lacks Hermitian symmetry, real output impossible")]
    NonHermitian(String),

    #[error("imaginary residue {residue:e} exceeds tolerance after applying `{name}`")]
    ImaginaryResidue { name: String, residue: f64 },

    #[error("negative power needs a zero-mean field, mean is {mean:e}")]
    NonzeroMean { mean: f64 },

    #[error("dyadic band [{j_min}, {j_max}] spans fewer than 4 octaves; increase N")]
    BandTooNarrow { j_min: i32, j_max: i32 },

    #[error("dyadic index {j} outside resolved band [{j_min}, {j_max}]")]
    BlockOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("spectral energy fraction {fraction:e} outside the resolved band exceeds {tolerance:e}")]
    SpectralLeak { fraction: f64, tolerance: f64 },

    #[error("degenerate evaluation: {0}")]
    Degenerate(String),

    #[error("spectral and quadrature engines disagree by {max_relative:.3} in the fit region")]
    EngineDisagreement { max_relative: f64 },

    #[error("reconstruction residual {residual:e} exceeds {tolerance:e}")]
    Reconstruction { residual: f64, tolerance: f64 },

    #[error("field file format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that signal an untrustworthy numerical result rather than misuse.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::NonHermitian(_)
                | Error::ImaginaryResidue { .. }
                | Error::SpectralLeak { .. }
                | Error::Degenerate(_)
                | Error::EngineDisagreement { .. }
                | Error::Reconstruction { .. }
        )
    }
}
