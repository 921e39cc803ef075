//! Characteristic function `S(z)` and the Θ-calculus built on it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{solve, solve_right, CMatrix, KernelError, C64, I};
use crate::weyl::{
    eval_m, extrapolate_to_zero, ExtensionParams, HerglotzModel, Point, WeylError, TOL_BV,
};

pub const TOL_IDENTITY: f64 = 1e-10;
pub const TOL_CONTRACTION: f64 = 1e-10;

/// Which closed form a singular solve belonged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    CharFunction,
    Cayley,
    Theta,
    ThetaHat,
    ThetaInverse,
    ThetaHatInverse,
    /// `(I + S(z))⁻¹ = ½(I + iαM⁻¹α/2)`
    OnePlusS,
    /// `(I + S*(z̄))⁻¹ = ½(I - iαM⁻¹α/2)`
    OnePlusSStar,
    /// `(I + χ⁻(S - I))⁻¹ = I - iχ⁻α(B_κ - M)⁻¹α`
    ChiMinus,
    /// `(I + χ⁺(S*(z̄) - I))⁻¹ = I + iχ⁺α(B_κ - M)⁻¹α`
    ChiPlus,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("{z} is not in the {expected} half-plane")]
    WrongHalfPlane { z: C64, expected: &'static str },
    #[error("singular factor in {formula:?}: {source}")]
    Singular {
        formula: Formula,
        #[source]
        source: KernelError,
    },
    #[error("S is not contractive (‖S‖ = {0:.12})")]
    NotContractive(f64),
    #[error("model has dimension {model}, extension parameters {ext}")]
    DimensionMismatch { model: usize, ext: usize },
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

fn singular(formula: Formula) -> impl Fn(KernelError) -> ThetaError {
    move |source| ThetaError::Singular { formula, source }
}

fn require_upper(p: Point) -> Result<(), ThetaError> {
    if p.is_upper() {
        Ok(())
    } else {
        Err(ThetaError::WrongHalfPlane { z: p.z, expected: "upper" })
    }
}

fn require_lower(p: Point) -> Result<(), ThetaError> {
    if p.is_lower() {
        Ok(())
    } else {
        Err(ThetaError::WrongHalfPlane { z: p.z, expected: "lower" })
    }
}

fn check_dims(ext: &ExtensionParams, model: &HerglotzModel) -> Result<(), ThetaError> {
    if ext.dim() != model.dim() {
        return Err(ThetaError::DimensionMismatch {
            model: model.dim(),
            ext: ext.dim(),
        });
    }
    Ok(())
}

/// `α (b - M)⁻¹ α`
fn sandwich(
    ext: &ExtensionParams,
    b: &CMatrix,
    m: &CMatrix,
    formula: Formula,
) -> Result<CMatrix, ThetaError> {
    let x = solve(&(b - m), ext.alpha()).map_err(singular(formula))?;
    Ok(ext.alpha() * &x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharSample {
    pub point: Point,
    pub s: CMatrix,
}

/// `S(z) = I + iα(B*_{iI} - M(z))⁻¹α` for `z` in the upper half-plane (or `k + i0`).
pub fn char_function(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<CharSample, ThetaError> {
    let point = point.into();
    check_dims(ext, model)?;
    require_upper(point)?;
    let m = eval_m(model, point)?;
    let s = char_from_m(ext, &m)?;
    let norm = s.op_norm();
    if norm > 1.0 + TOL_CONTRACTION {
        return Err(ThetaError::NotContractive(norm));
    }
    Ok(CharSample { point, s })
}

/// `S` from a given value of `M`.
pub fn char_from_m(ext: &ExtensionParams, m: &CMatrix) -> Result<CMatrix, ThetaError> {
    let n = ext.dim();
    let t = sandwich(ext, &ext.b_ii_adjoint(), m, Formula::CharFunction)?;
    Ok(&CMatrix::identity(n) + &t.scale(I))
}

/// `S*(z̄)` for `z` in the lower half-plane: `S` evaluated at `z̄`, then adjointed.
pub fn char_reflected(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<CMatrix, ThetaError> {
    let point = point.into();
    require_lower(point)?;
    Ok(char_function(ext, model, point.conj())?.s.adjoint())
}

/// Cayley transform `(M - i)(M + i)⁻¹`.
pub fn cayley_from_m(m: &CMatrix) -> Result<CMatrix, ThetaError> {
    let n = m.rows();
    let shift = CMatrix::scalar(n, I);
    solve_right(&(m - &shift), &(m + &shift)).map_err(singular(Formula::Cayley))
}

/// `S` in Cayley form, valid when `α = √2 I`.
pub fn cayley_form(model: &HerglotzModel, point: impl Into<Point>) -> Result<CharSample, ThetaError> {
    let point = point.into();
    require_upper(point)?;
    let m = eval_m(model, point)?;
    Ok(CharSample {
        point,
        s: cayley_from_m(&m)?,
    })
}

/// `S(k + i0)` extrapolated from `S(k + iε)` down the ladder, with the convergence estimate.
pub fn char_boundary_value(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    k: f64,
    eps_ladder: &[f64],
) -> Result<(CMatrix, f64), ThetaError> {
    if eps_ladder.len() < 3 {
        return Err(WeylError::Invalid("the ε ladder needs at least three rungs".into()).into());
    }
    let values = eps_ladder
        .iter()
        .map(|&e| char_function(ext, model, C64::new(k, e)).map(|c| c.s))
        .collect::<Result<Vec<_>, _>>()?;
    let (s, est) = extrapolate_to_zero(eps_ladder, &values);
    if !(est <= TOL_BV) {
        return Err(WeylError::NonConvergent {
            estimate: est,
            tol: TOL_BV,
        }
        .into());
    }
    Ok((s, est))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaKind {
    /// `Θ_κ(z)`, lower half-plane
    Theta,
    /// `Θ̂_κ(z)`, upper half-plane
    ThetaHat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSample {
    pub point: Point,
    pub kind: ThetaKind,
    pub value: CMatrix,
    pub kappa: CMatrix,
}

/// `Θ_κ(z) = I - iα(B_{iI} - M(z))⁻¹αχ⁺`, `z ∈ ℂ₋`.
pub fn theta(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<ThetaSample, ThetaError> {
    let point = point.into();
    check_dims(ext, model)?;
    require_lower(point)?;
    let m = eval_m(model, point)?;
    let t = sandwich(ext, ext.b_ii(), &m, Formula::Theta)?;
    let value = &CMatrix::identity(ext.dim()) - &(&t * ext.chi_plus()).scale(I);
    Ok(ThetaSample {
        point,
        kind: ThetaKind::Theta,
        value,
        kappa: ext.kappa().clone(),
    })
}

/// `Θ̂_κ(z) = I + iα(B*_{iI} - M(z))⁻¹αχ⁻`, `z ∈ ℂ₊`.
pub fn theta_hat(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<ThetaSample, ThetaError> {
    let point = point.into();
    check_dims(ext, model)?;
    require_upper(point)?;
    let m = eval_m(model, point)?;
    let t = sandwich(ext, &ext.b_ii_adjoint(), &m, Formula::ThetaHat)?;
    let value = &CMatrix::identity(ext.dim()) + &(&t * ext.chi_minus()).scale(I);
    Ok(ThetaSample {
        point,
        kind: ThetaKind::ThetaHat,
        value,
        kappa: ext.kappa().clone(),
    })
}

/// `I + (S*(z̄) - I)χ⁺`, `z ∈ ℂ₋`.
pub fn theta_via_s(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<CMatrix, ThetaError> {
    let s_star = char_reflected(ext, model, point)?;
    Ok(theta_from_s_star(ext, &s_star))
}

/// `I + (S(z) - I)χ⁻`, `z ∈ ℂ₊`.
pub fn theta_hat_via_s(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<CMatrix, ThetaError> {
    let s = char_function(ext, model, point)?.s;
    Ok(theta_hat_from_s(ext, &s))
}

pub fn theta_from_s_star(ext: &ExtensionParams, s_star: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(ext.dim());
    &id + &(&(s_star - &id) * ext.chi_plus())
}

pub fn theta_hat_from_s(ext: &ExtensionParams, s: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(ext.dim());
    &id + &(&(s - &id) * ext.chi_minus())
}

/// `Θ_κ(z)⁻¹ = I + iα(B_κ - M(z))⁻¹αχ⁺`, `z ∈ ℂ₋`.
pub fn theta_inverse(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<CMatrix, ThetaError> {
    let point = point.into();
    check_dims(ext, model)?;
    require_lower(point)?;
    let m = eval_m(model, point)?;
    let t = sandwich(ext, ext.b_kappa(), &m, Formula::ThetaInverse)?;
    Ok(&CMatrix::identity(ext.dim()) + &(&t * ext.chi_plus()).scale(I))
}

/// `Θ̂_κ(z)⁻¹ = I - iα(B_κ - M(z))⁻¹αχ⁻`, `z ∈ ℂ₊`.
pub fn theta_hat_inverse(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<CMatrix, ThetaError> {
    let point = point.into();
    check_dims(ext, model)?;
    require_upper(point)?;
    let m = eval_m(model, point)?;
    let t = sandwich(ext, ext.b_kappa(), &m, Formula::ThetaHatInverse)?;
    Ok(&CMatrix::identity(ext.dim()) - &(&t * ext.chi_minus()).scale(I))
}

/// The inverse of `Θ̂_κ` with `B*_{iI}` in the resolvent factor in place of `B_κ`.
///
/// This is not an inverse of `Θ̂_κ` in general; it is kept so the discrepancy stays testable.
pub fn theta_hat_inverse_as_printed(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    point: impl Into<Point>,
) -> Result<CMatrix, ThetaError> {
    let point = point.into();
    check_dims(ext, model)?;
    require_upper(point)?;
    let m = eval_m(model, point)?;
    let t = sandwich(ext, &ext.b_ii_adjoint(), &m, Formula::ThetaHatInverse)?;
    Ok(&CMatrix::identity(ext.dim()) - &(&t * ext.chi_minus()).scale(I))
}

/// Closed-form inverses at `z ∈ ℂ₊` and at the mirror point `z̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventInverses {
    pub z: C64,
    /// `(I + S(z))⁻¹`
    pub one_plus_s: CMatrix,
    /// `(I + S*(w̄))⁻¹` at `w = z̄`, i.e. `(I + S(z)*)⁻¹`
    pub one_plus_s_star: CMatrix,
    /// `(I + χ⁻(S(z) - I))⁻¹`
    pub chi_minus: CMatrix,
    /// `(I + χ⁺(S*(w̄) - I))⁻¹` at `w = z̄`
    pub chi_plus: CMatrix,
}

/// The four inverse formulas built from `M` and `B_κ` alone.
pub fn resolvent_style_inverses(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    z: C64,
) -> Result<ResolventInverses, ThetaError> {
    check_dims(ext, model)?;
    let up = Point::new(z);
    require_upper(up)?;
    let n = ext.dim();
    let id = CMatrix::identity(n);
    let half_alpha = ext.alpha().scale_re(0.5);

    let m_up = eval_m(model, up)?;
    let m_lo = eval_m(model, up.conj())?;

    let minv_up = solve(&m_up, &half_alpha).map_err(singular(Formula::OnePlusS))?;
    let one_plus_s = (&id + &(ext.alpha() * &minv_up).scale(I)).scale_re(0.5);

    let minv_lo = solve(&m_lo, &half_alpha).map_err(singular(Formula::OnePlusSStar))?;
    let one_plus_s_star = (&id - &(ext.alpha() * &minv_lo).scale(I)).scale_re(0.5);

    let r_up = sandwich(ext, ext.b_kappa(), &m_up, Formula::ChiMinus)?;
    let chi_minus = &id - &(ext.chi_minus() * &r_up).scale(I);

    let r_lo = sandwich(ext, ext.b_kappa(), &m_lo, Formula::ChiPlus)?;
    let chi_plus = &id + &(ext.chi_plus() * &r_lo).scale(I);

    Ok(ResolventInverses {
        z,
        one_plus_s,
        one_plus_s_star,
        chi_minus,
        chi_plus,
    })
}

/// Residuals `‖X·T - I‖`, `‖T·X - I‖` of each closed form `X` against its target `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseResiduals {
    pub one_plus_s: f64,
    pub one_plus_s_star: f64,
    pub chi_minus: f64,
    pub chi_plus: f64,
}

impl InverseResiduals {
    pub fn max(&self) -> f64 {
        self.one_plus_s
            .max(self.one_plus_s_star)
            .max(self.chi_minus)
            .max(self.chi_plus)
    }
}

pub fn resolvent_style_residuals(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    z: C64,
) -> Result<InverseResiduals, ThetaError> {
    use crate::kernel::inverse_residual;
    let inv = resolvent_style_inverses(ext, model, z)?;
    let id = CMatrix::identity(ext.dim());
    let s = char_function(ext, model, z)?.s;
    let s_star = char_reflected(ext, model, z.conj())?;
    Ok(InverseResiduals {
        one_plus_s: inverse_residual(&inv.one_plus_s, &(&id + &s)),
        one_plus_s_star: inverse_residual(&inv.one_plus_s_star, &(&id + &s_star)),
        chi_minus: inverse_residual(&inv.chi_minus, &(&id + &(ext.chi_minus() * &(&s - &id)))),
        chi_plus: inverse_residual(&inv.chi_plus, &(&id + &(ext.chi_plus() * &(&s_star - &id)))),
    })
}

/// Largest entry of `∂_y S - i ∂_x S` by central differences with step `h`.
pub fn cauchy_riemann_residual(
    ext: &ExtensionParams,
    model: &HerglotzModel,
    z: C64,
    h: f64,
) -> Result<f64, ThetaError> {
    let s = |w: C64| char_function(ext, model, w).map(|c| c.s);
    let dx = (&s(z + h)? - &s(z - h)?).scale_re(0.5 / h);
    let dy = (&s(z + I * h)? - &s(z - I * h)?).scale_re(0.5 / h);
    Ok((&dy - &dx.scale(I)).max_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::inverse_residual;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn star(n: usize) -> HerglotzModel {
        HerglotzModel::star_graph(n).unwrap()
    }

    #[test]
    fn char_function_star_graph_at_i() {
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(1, 1)).unwrap();
        let s = char_function(&ext, &star(1), c(0.0, 1.0)).unwrap().s;
        assert!((s[(0, 0)].norm() - (2f64.sqrt() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn cayley_examples() {
        let id = CMatrix::identity(1);
        assert!(cayley_from_m(&id.scale(I)).unwrap().max_norm() < 1e-16);
        let s = cayley_from_m(&CMatrix::zeros(1, 1)).unwrap();
        assert!((s[(0, 0)] + 1.0).norm() < 1e-16);
        let big = cayley_from_m(&CMatrix::scalar(1, c(1e8, 0.0))).unwrap();
        assert!((big[(0, 0)] - 1.0).norm() < 1e-7);
        assert!((big[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn char_function_is_cayley_at_sqrt2() {
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(2, 2)).unwrap();
        let a = char_function(&ext, &star(2), c(0.0, 1.0)).unwrap().s;
        let b = cayley_form(&star(2), c(0.0, 1.0)).unwrap().s;
        assert!((&a - &b).max_norm() < 1e-12);
    }

    #[test]
    fn half_plane_is_enforced() {
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(1, 1)).unwrap();
        assert!(matches!(
            char_function(&ext, &star(1), c(0.0, -1.0)),
            Err(ThetaError::WrongHalfPlane { .. })
        ));
        assert!(theta(&ext, &star(1), c(0.0, 1.0)).is_err());
        assert!(theta_hat(&ext, &star(1), c(0.0, -1.0)).is_err());
    }

    #[test]
    fn theta_at_kappa_i_is_trivial() {
        let ext = ExtensionParams::sqrt2(CMatrix::scalar(2, I)).unwrap();
        let m = star(2);
        let z = c(0.4, -1.3);
        let t = theta(&ext, &m, z).unwrap().value;
        assert!((&t - &CMatrix::identity(2)).max_norm() < 1e-14);
        let th = theta_hat(&ext, &m, z.conj()).unwrap().value;
        let s = char_function(&ext, &m, z.conj()).unwrap().s;
        assert!((&th - &s).max_norm() < 1e-14);
        let inv = theta_inverse(&ext, &m, z).unwrap();
        assert!((&inv - &CMatrix::identity(2)).max_norm() < 1e-14);
    }

    #[test]
    fn theta_at_kappa_zero_is_average() {
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(1, 1)).unwrap();
        let m = star(1);
        let z = c(-0.7, -0.2);
        let t = theta(&ext, &m, z).unwrap().value;
        let s_star = char_reflected(&ext, &m, z).unwrap();
        let want = (&CMatrix::identity(1) + &s_star).scale_re(0.5);
        assert!((&t - &want).max_norm() < 1e-14);
    }

    #[test]
    fn theta_inverse_scalar_star() {
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(1, 1)).unwrap();
        let z = c(0.0, -1.0);
        let t = theta(&ext, &star(1), z).unwrap().value;
        let inv = theta_inverse(&ext, &star(1), z).unwrap();
        assert!(inverse_residual(&t, &inv) < 1e-14);
    }

    #[test]
    fn theta_hat_inverse_closed_form_inverts() {
        let kappa = CMatrix::from_rows(&[vec![c(0.5, 0.0), c(0.2, 0.3)], vec![c(0.2, -0.3), c(-1.0, 0.0)]])
            .unwrap();
        let ext = ExtensionParams::sqrt2(kappa).unwrap();
        let z = c(0.8, 0.6);
        let th = theta_hat(&ext, &star(2), z).unwrap().value;
        let inv = theta_hat_inverse(&ext, &star(2), z).unwrap();
        assert!(inverse_residual(&th, &inv) < 1e-12);
    }

    #[test]
    fn theta_hat_inverse_as_printed_does_not_invert() {
        let ext = ExtensionParams::sqrt2(CMatrix::scalar(1, c(1.0, 0.0))).unwrap();
        let z = c(0.8, 0.6);
        let th = theta_hat(&ext, &star(1), z).unwrap().value;
        let printed = theta_hat_inverse_as_printed(&ext, &star(1), z).unwrap();
        assert!(inverse_residual(&th, &printed) > 1e-2);
    }

    #[test]
    fn inverse_formulas_at_kappa_zero() {
        // (I + χ⁻(S - I))⁻¹ = 2(I + S)⁻¹ when χ⁻ = I/2
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(2, 2)).unwrap();
        let inv = resolvent_style_inverses(&ext, &star(2), c(0.3, 1.1)).unwrap();
        assert!((&inv.chi_minus - &inv.one_plus_s.scale_re(2.0)).max_norm() < 1e-13);
        assert!((&inv.chi_plus - &inv.one_plus_s_star.scale_re(2.0)).max_norm() < 1e-13);
    }

    #[test]
    fn inverse_formula_scalar_m_equal_i() {
        // M = i: S = 0, so (I + S)⁻¹ = 1
        let m = HerglotzModel::lead_rational(
            CMatrix::zeros(1, 1),
            CMatrix::zeros(1, 1),
            vec![crate::weyl::Pole { lambda: 0.0, residue: CMatrix::identity(1) }],
        )
        .unwrap();
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(1, 1)).unwrap();
        let inv = resolvent_style_inverses(&ext, &m, c(0.0, 1.0)).unwrap();
        assert!((inv.one_plus_s[(0, 0)] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn inverse_formulas_star2_diag_kappa() {
        let ext = ExtensionParams::sqrt2(CMatrix::from_real_diag(&[1.0, -1.0])).unwrap();
        let r = resolvent_style_residuals(&ext, &star(2), c(0.0, 3.0)).unwrap();
        assert!(r.max() < 1e-11, "{r:?}");
    }

    #[test]
    fn char_boundary_value_matches_one_sided_limit() {
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(1, 1)).unwrap();
        let (s, _) = char_boundary_value(&ext, &star(1), 2.0, &crate::weyl::DEFAULT_EPS_LADDER).unwrap();
        let exact = char_function(&ext, &star(1), Point::above(2.0)).unwrap().s;
        assert!((&s - &exact).max_norm() < 1e-11);
        assert!((exact[(0, 0)].norm() - 1.0).abs() > 1e-3);
    }

    #[test]
    fn cauchy_riemann_probe() {
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(3, 3)).unwrap();
        let r = cauchy_riemann_residual(&ext, &star(3), c(0.5, 0.8), 1e-4).unwrap();
        assert!(r < 1e-6, "{r}");
    }
}
