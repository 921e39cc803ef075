//! Discretised vector-valued Hardy spaces on a tangent-mapped grid, the weighted model space
//! built on a characteristic function, and the model resolvent and wave maps acting on it.

mod grid;
mod model;
mod symbol;
mod wave;

pub mod corpus;
pub mod measures;

pub use grid::{Field, Grid, Sign};
pub use model::{
    compressed_resolvent, gamma_check, model_resolvent, smooth_partner_of_g,
    smooth_partner_of_g_tilde, smooth_vector, smooth_vector_from_g, ExportedVector, Masked,
    ModelVector,
};
pub use symbol::{FnSymbol, Symbol, SymbolTrack, WeylSymbol};
pub use wave::{
    scattering_map, scattering_representative, semigroup_step, wave_map, wave_representative,
    WaveDirection,
};

use thiserror::Error;

use crate::chartheta::ThetaError;
use crate::kernel::{KernelError, C64};
use crate::weyl::WeylError;

/// Relative spectral mass allowed in the top frequency band before a continuation is refused.
pub const EDGE_TOL: f64 = 1e-4;
/// Pointwise inverses larger than this are masked out.
pub const INVERSE_CAP: f64 = 1e6;
pub const TOL_SMOOTH_REL: f64 = 1e-6;
pub const TOL_NORM: f64 = 1e-12;
/// Relative K-defect accepted on input to the model resolvent.
pub const TOL_IN_K: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum HardyError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("point {0} lies in the wrong half-plane")]
    WrongHalfPlane(C64),
    #[error("spectral mass {0:.3e} near the band edge; refine the grid")]
    EdgeMass(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("symbol was built for a different alpha")]
    AlphaMismatch,
    #[error("sample {index} is not contractive (norm {norm})")]
    NotContractive { index: usize, norm: f64 },
    #[error("track has no analytic symbol")]
    NoAnalyticSymbol,
    #[error("model norm is negative ({0:.3e})")]
    NegativeNorm(f64),
    #[error("vector is not in K (defect {defect:.3e} > {tol:.3e})")]
    NotInK { defect: f64, tol: f64 },
    #[error("mask covers the whole support")]
    MaskedEverywhere,
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}
