//! Scattering matrices for the pair `(A_κ, A_0)`, spectral weights and a plane-wave oracle.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chartheta::{cayley_from_m, ThetaError};
use crate::kernel::{psd_project, solve, solve_right, CMatrix, KernelError, C64, I};
use crate::weyl::{boundary_value, ExtensionParams, HerglotzModel, WeylError, DEFAULT_EPS_LADDER};

pub const TOL_UNITARY: f64 = 1e-8;
pub const TOL_WEIGHT: f64 = 1e-9;
/// Weighted unitarity is only meaningful where `‖W‖_max` exceeds this.
pub const WEIGHT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    /// `M - B_κ`
    MMinusKappa,
    /// `M*`
    MAdjoint,
    /// `M ± i`
    MShift,
    /// `I + S*`
    OnePlusSStar,
    /// `I + χ⁻(S - I)`
    ChiMinus,
    /// `ik - κ`
    Vertex,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatterError {
    #[error("singular factor {factor:?}: {source}")]
    Singular {
        factor: Factor,
        #[source]
        source: KernelError,
    },
    #[error("this formula needs α = √2 I")]
    RequiresSqrt2Alpha,
    #[error("momentum must be positive, got {0}")]
    NonPositiveMomentum(f64),
    #[error("model has dimension {model}, extension parameters {ext}")]
    DimensionMismatch { model: usize, ext: usize },
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

fn singular(factor: Factor) -> impl Fn(KernelError) -> ScatterError {
    move |source| ScatterError::Singular { factor, source }
}

fn check_dims(ext: &ExtensionParams, model: &HerglotzModel) -> Result<(), ScatterError> {
    if ext.dim() != model.dim() {
        return Err(ScatterError::DimensionMismatch {
            model: model.dim(),
            ext: ext.dim(),
        });
    }
    Ok(())
}

/// `Σ̂ = (M - B)⁻¹(M* - B)(M*)⁻¹M`.
pub fn scattering_matrix_from_m(m: &CMatrix, b: &CMatrix) -> Result<CMatrix, ScatterError> {
    let ms = m.adjoint();
    let x = solve(&ms, m).map_err(singular(Factor::MAdjoint))?;
    let y = &(&ms - b) * &x;
    solve(&(m - b), &y).map_err(singular(Factor::MMinusKappa))
}

/// `Σ̂(k)` from the boundary value `M(k + i0)`, with `B_κ = ακα/2` in the resolvent factors.
pub fn scattering_matrix(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    k: f64,
) -> Result<CMatrix, ScatterError> {
    check_dims(ext, model)?;
    let m = boundary_value(model, k, &DEFAULT_EPS_LADDER)?.sample.value;
    scattering_matrix_from_m(&m, ext.b_kappa())
}

/// `(I + χ⁻(S - I))⁻¹(I + χ⁺(S* - I))(I + S*)⁻¹(I + S)`.
pub fn model_form_product(ext: &ExtensionParams, s: &CMatrix) -> Result<CMatrix, ScatterError> {
    let id = CMatrix::identity(ext.dim());
    let ss = s.adjoint();
    let right = solve(&(&id + &ss), &(&id + s)).map_err(singular(Factor::OnePlusSStar))?;
    let mid = &(&id + &(ext.chi_plus() * &(&ss - &id))) * &right;
    solve(&(&id + &(ext.chi_minus() * &(s - &id))), &mid).map_err(singular(Factor::ChiMinus))
}

/// `(M + i)⁻¹ P (M + i)`.
pub fn g_conjugate(p: &CMatrix, m: &CMatrix) -> Result<CMatrix, ScatterError> {
    let shift = m + &CMatrix::scalar(m.rows(), I);
    let x = solve(&shift, p).map_err(singular(Factor::MShift))?;
    Ok(&x * &shift)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelForm {
    pub k: f64,
    /// the product acting on the model-side image
    pub product: CMatrix,
    /// the product carried to the weighted space, comparable to `Σ̂`
    pub conjugated: CMatrix,
}

/// Scattering matrix through the functional-model route, valid for `α = √2 I`.
pub fn scattering_via_model_form(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    k: f64,
) -> Result<ModelForm, ScatterError> {
    check_dims(ext, model)?;
    if !ext.is_sqrt2_alpha() {
        return Err(ScatterError::RequiresSqrt2Alpha);
    }
    let m = boundary_value(model, k, &DEFAULT_EPS_LADDER)?.sample.value;
    let s = cayley_from_m(&m)?;
    let product = model_form_product(ext, &s)?;
    let conjugated = g_conjugate(&product, &m)?;
    Ok(ModelForm {
        k,
        product,
        conjugated,
    })
}

/// `-2i(M - M*)`, which is `4 Im M`.
pub fn spectral_weight(m: &CMatrix) -> CMatrix {
    (m - &m.adjoint()).scale(C64::new(0.0, -2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair {
    pub k: f64,
    /// `I - S*S`
    pub w_left: CMatrix,
    /// `I - SS*`
    pub w_right: CMatrix,
    /// `-2i(M - M*)`
    pub spectral: CMatrix,
    /// `‖(I - S*S) - (-2i)(M* - i)⁻¹(M - M*)(M + i)⁻¹‖_max`
    pub identity_residual: f64,
    /// `‖(M* - i)(I - S*S)(M + i) - (-2i)(M - M*)‖_max`
    pub g_residual: f64,
}

/// Weights at a given value of `M`, with `S` its Cayley transform.
pub fn weights_from_m(k: f64, m: &CMatrix) -> Result<WeightPair, ScatterError> {
    let n = m.rows();
    let id = CMatrix::identity(n);
    let shift = CMatrix::scalar(n, I);
    let s = cayley_from_m(m)?;
    let ss = s.adjoint();
    let w_left = &id - &(&ss * &s);
    let w_right = &id - &(&s * &ss);
    let spectral = spectral_weight(m);
    let ms = m.adjoint();

    let diff = m - &ms;
    let left = solve(&(&ms - &shift), &diff).map_err(singular(Factor::MShift))?;
    let rhs = solve_right(&left, &(m + &shift))
        .map_err(singular(Factor::MShift))?
        .scale(C64::new(0.0, -2.0));
    let identity_residual = (&w_left - &rhs).max_norm();

    let g_side = &(&(&ms - &shift) * &w_left) * &(m + &shift);
    let g_residual = (&g_side - &spectral).max_norm();
    Ok(WeightPair {
        k,
        w_left,
        w_right,
        spectral,
        identity_residual,
        g_residual,
    })
}

pub fn weights(model: &HerglotzModel, k: f64) -> Result<WeightPair, ScatterError> {
    let m = boundary_value(model, k, &DEFAULT_EPS_LADDER)?.sample.value;
    weights_from_m(k, &m)
}

/// Vertex scattering matrix `(iq - κ)⁻¹(iq + κ)` from plane-wave matching, `q` a momentum.
pub fn vertex_scattering_oracle(kappa: &CMatrix, q: f64) -> Result<CMatrix, ScatterError> {
    if !(q > 0.0) {
        return Err(ScatterError::NonPositiveMomentum(q));
    }
    let iq = CMatrix::scalar(kappa.rows(), C64::new(0.0, q));
    solve(&(&iq - kappa), &(&iq + kappa)).map_err(singular(Factor::Vertex))
}

/// `‖Σ̂* W Σ̂ - W‖_max`.
pub fn unitarity_defect(sigma: &CMatrix, w: &CMatrix) -> f64 {
    (&(&(&sigma.adjoint() * w) * sigma) - w).max_norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkipReason {
    AtPole,
    NonConvergent,
    SingularMatrix(Factor),
    Other,
}

impl SkipReason {
    pub fn code(&self) -> String {
        match self {
            SkipReason::AtPole => "AtPole".into(),
            SkipReason::NonConvergent => "NonConvergent".into(),
            SkipReason::SingularMatrix(f) => format!("SingularMatrix:{f:?}"),
            SkipReason::Other => "Other".into(),
        }
    }

    fn from_error(e: &ScatterError) -> Self {
        match e {
            ScatterError::Weyl(WeylError::AtPole { .. }) => SkipReason::AtPole,
            ScatterError::Weyl(WeylError::NonConvergent { .. }) => SkipReason::NonConvergent,
            ScatterError::Singular { factor, .. } => SkipReason::SingularMatrix(*factor),
            _ => SkipReason::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSample {
    pub k: f64,
    pub sigma_hat: Option<CMatrix>,
    pub weight: Option<CMatrix>,
    pub unitarity_defect: Option<f64>,
    pub skipped: Option<SkipReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringCurve {
    pub dim: usize,
    pub alpha: CMatrix,
    pub kappa: CMatrix,
    pub self_adjoint: bool,
    pub samples: Vec<ScatterSample>,
}

fn scan_point(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    k: f64,
) -> Result<(CMatrix, CMatrix, f64), ScatterError> {
    let m = boundary_value(model, k, &DEFAULT_EPS_LADDER)?.sample.value;
    let sigma = scattering_matrix_from_m(&m, ext.b_kappa())?;
    let w = spectral_weight(&m);
    let wp = psd_project(&w).map_err(singular(Factor::MAdjoint))?;
    let defect = unitarity_defect(&sigma, &wp);
    Ok((sigma, w, defect))
}

/// Sweeps `Σ̂`, the spectral weight and the unitarity defect over `k_grid`.
/// Failing points are kept as skipped samples with a reason.
pub fn scan(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    k_grid: &[f64],
) -> Result<ScatteringCurve, ScatterError> {
    check_dims(ext, model)?;
    let samples = k_grid
        .iter()
        .map(|&k| match scan_point(ext, model, k) {
            Ok((sigma, w, d)) => ScatterSample {
                k,
                sigma_hat: Some(sigma),
                weight: Some(w),
                unitarity_defect: Some(d),
                skipped: None,
            },
            Err(e) => ScatterSample {
                k,
                sigma_hat: None,
                weight: None,
                unitarity_defect: None,
                skipped: Some(SkipReason::from_error(&e)),
            },
        })
        .collect();
    Ok(ScatteringCurve {
        dim: ext.dim(),
        alpha: ext.alpha().clone(),
        kappa: ext.kappa().clone(),
        self_adjoint: ext.is_self_adjoint(),
        samples,
    })
}

impl ScatteringCurve {
    pub fn skipped(&self) -> impl Iterator<Item = &ScatterSample> {
        self.samples.iter().filter(|s| s.skipped.is_some())
    }

    /// Largest unitarity defect over samples whose weight exceeds [`WEIGHT_FLOOR`].
    pub fn max_unitarity_defect(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.weight.as_ref().is_some_and(|w| w.max_norm() > WEIGHT_FLOOR))
            .filter_map(|s| s.unitarity_defect)
            .fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> String {
        let n = self.dim;
        let mut cols = vec!["k".to_string()];
        for prefix in ["sigma_re", "sigma_im", "weight_re", "weight_im"] {
            for i in 0..n {
                for j in 0..n {
                    cols.push(format!("{prefix}_{i}_{j}"));
                }
            }
        }
        cols.extend(["unitarity_defect", "skipped", "reason"].map(String::from));
        cols.join(",")
    }

    /// CSV with every float printed to 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.dim;
        let mut out = self.csv_header();
        out.push('\n');
        for s in &self.samples {
            let mut row = vec![fmt_f64(s.k)];
            let parts = |m: &Option<CMatrix>, re: bool| -> Vec<String> {
                (0..n * n)
                    .map(|idx| match m {
                        Some(m) => {
                            let z = m[(idx / n, idx % n)];
                            fmt_f64(if re { z.re } else { z.im })
                        }
                        None => String::new(),
                    })
                    .collect()
            };
            row.extend(parts(&s.sigma_hat, true));
            row.extend(parts(&s.sigma_hat, false));
            row.extend(parts(&s.weight, true));
            row.extend(parts(&s.weight, false));
            row.push(s.unitarity_defect.map(fmt_f64).unwrap_or_default());
            row.push(s.skipped.is_some().to_string());
            row.push(s.skipped.map(|r| r.code()).unwrap_or_default());
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
