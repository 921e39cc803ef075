use std::sync::Arc;

use super::grid::Grid;
use super::HardyError;
use crate::chartheta::{
    char_function, theta_from_s_star, theta_hat_from_s, theta_hat_inverse, theta_inverse,
};
use crate::kernel::{inverse, CMatrix, C64};
use crate::weyl::{ExtensionParams, HerglotzModel, Point};

/// A contractive analytic function on the upper half-plane, known on the boundary and inside.
pub trait Symbol: Send + Sync {
    fn dim(&self) -> usize;

    /// `S(k + i0)`.
    fn boundary(&self, k: f64) -> Result<CMatrix, HardyError>;

    /// `S(z)` for `Im z > 0`.
    fn upper(&self, z: C64) -> Result<CMatrix, HardyError>;

    /// `Θ_κ(z)⁻¹` for `z ∈ ℂ₋`, by default inverted from `I + (S(z̄)* - I)χ⁺`.
    fn theta_inverse(&self, ext: &ExtensionParams, z: C64) -> Result<CMatrix, HardyError> {
        if z.im >= 0.0 {
            return Err(HardyError::WrongHalfPlane(z));
        }
        let s_star = self.upper(z.conj())?.adjoint();
        Ok(inverse(&theta_from_s_star(ext, &s_star))?)
    }

    /// `Θ̂_κ(z)⁻¹` for `z ∈ ℂ₊`, by default inverted from `I + (S(z) - I)χ⁻`.
    fn theta_hat_inverse(&self, ext: &ExtensionParams, z: C64) -> Result<CMatrix, HardyError> {
        if z.im <= 0.0 {
            return Err(HardyError::WrongHalfPlane(z));
        }
        Ok(inverse(&theta_hat_from_s(ext, &self.upper(z)?))?)
    }
}

/// Characteristic function of a Weyl model for a fixed `α`.
#[derive(Debug, Clone)]
pub struct WeylSymbol {
    ext: ExtensionParams,
    model: HerglotzModel,
}

impl WeylSymbol {
    /// Only `α` of `ext` enters `S`; `κ` is ignored here.
    pub fn new(ext: ExtensionParams, model: HerglotzModel) -> Result<Self, HardyError> {
        if ext.dim() != model.dim() {
            return Err(HardyError::DimensionMismatch {
                expected: model.dim(),
                got: ext.dim(),
            });
        }
        Ok(Self { ext, model })
    }

    pub fn model(&self) -> &HerglotzModel {
        &self.model
    }

    fn same_alpha(&self, ext: &ExtensionParams) -> Result<(), HardyError> {
        if ext.alpha() != self.ext.alpha() {
            return Err(HardyError::AlphaMismatch);
        }
        Ok(())
    }
}

impl Symbol for WeylSymbol {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn boundary(&self, k: f64) -> Result<CMatrix, HardyError> {
        Ok(char_function(&self.ext, &self.model, Point::above(k))?.s)
    }

    fn upper(&self, z: C64) -> Result<CMatrix, HardyError> {
        Ok(char_function(&self.ext, &self.model, z)?.s)
    }

    fn theta_inverse(&self, ext: &ExtensionParams, z: C64) -> Result<CMatrix, HardyError> {
        self.same_alpha(ext)?;
        Ok(theta_inverse(ext, &self.model, z)?)
    }

    fn theta_hat_inverse(&self, ext: &ExtensionParams, z: C64) -> Result<CMatrix, HardyError> {
        self.same_alpha(ext)?;
        Ok(theta_hat_inverse(ext, &self.model, z)?)
    }
}

type AnalyticFn = dyn Fn(C64) -> CMatrix + Send + Sync;

/// Synthetic symbol given by a closed-form function analytic on the closed upper half-plane.
#[derive(Clone)]
pub struct FnSymbol {
    dim: usize,
    f: Arc<AnalyticFn>,
}

impl std::fmt::Debug for FnSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnSymbol").field("dim", &self.dim).finish()
    }
}

impl FnSymbol {
    pub fn new(dim: usize, f: impl Fn(C64) -> CMatrix + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f) }
    }

    pub fn constant(s: CMatrix) -> Self {
        let dim = s.rows();
        Self::new(dim, move |_| s.clone())
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(CMatrix::zeros(dim, dim))
    }
}

impl Symbol for FnSymbol {
    fn dim(&self) -> usize {
        self.dim
    }

    fn boundary(&self, k: f64) -> Result<CMatrix, HardyError> {
        Ok((self.f)(C64::new(k, 0.0)))
    }

    fn upper(&self, z: C64) -> Result<CMatrix, HardyError> {
        if z.im <= 0.0 {
            return Err(HardyError::WrongHalfPlane(z));
        }
        Ok((self.f)(z))
    }
}

/// Boundary values `S(k_j)` on a grid, with the analytic symbol they came from when known.
#[derive(Clone)]
pub struct SymbolTrack {
    grid: Arc<Grid>,
    dim: usize,
    s: Vec<CMatrix>,
    s_adj: Vec<CMatrix>,
    symbol: Option<Arc<dyn Symbol>>,
}

impl std::fmt::Debug for SymbolTrack {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolTrack")
            .field("grid", &self.grid)
            .field("dim", &self.dim)
            .field("analytic", &self.symbol.is_some())
            .finish()
    }
}

impl SymbolTrack {
    pub fn from_symbol(grid: Arc<Grid>, symbol: Arc<dyn Symbol>) -> Result<Self, HardyError> {
        let s = grid
            .k()
            .iter()
            .map(|&k| symbol.boundary(k))
            .collect::<Result<Vec<_>, _>>()?;
        let mut t = Self::from_samples(grid, s)?;
        t.symbol = Some(symbol);
        Ok(t)
    }

    /// Samples of `S(k_j) = I + iα(B*_{iI} - M(k_j + i0))⁻¹α` for a Weyl model.
    pub fn from_model(
        grid: Arc<Grid>,
        ext: &ExtensionParams,
        model: &HerglotzModel,
    ) -> Result<Self, HardyError> {
        let sym = WeylSymbol::new(ext.clone(), model.clone())?;
        Self::from_symbol(grid, Arc::new(sym))
    }

    /// A track with boundary samples only; operations that need `S` off the axis will fail.
    pub fn from_samples(grid: Arc<Grid>, s: Vec<CMatrix>) -> Result<Self, HardyError> {
        if s.len() != grid.n() {
            return Err(HardyError::DimensionMismatch {
                expected: grid.n(),
                got: s.len(),
            });
        }
        let dim = s[0].rows();
        for (j, m) in s.iter().enumerate() {
            if !m.is_square() || m.rows() != dim {
                return Err(HardyError::DimensionMismatch {
                    expected: dim,
                    got: m.rows(),
                });
            }
            let norm = m.op_norm();
            if !(norm <= 1.0 + crate::chartheta::TOL_CONTRACTION) {
                return Err(HardyError::NotContractive { index: j, norm });
            }
        }
        let s_adj = s.iter().map(|m| m.adjoint()).collect();
        Ok(Self {
            grid,
            dim,
            s,
            s_adj,
            symbol: None,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> &[CMatrix] {
        &self.s
    }

    pub fn s_adjoint(&self) -> &[CMatrix] {
        &self.s_adj
    }

    pub fn symbol(&self) -> Result<&Arc<dyn Symbol>, HardyError> {
        self.symbol.as_ref().ok_or(HardyError::NoAnalyticSymbol)
    }
}
