use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Field, Grid, Sign};
use super::symbol::SymbolTrack;
use super::{HardyError, TOL_IN_K, TOL_NORM};
use crate::kernel::{CMatrix, C64};
use crate::weyl::ExtensionParams;

/// A pair `(g̃, g)` in the weighted space with weight `[[I, S*], [S, I]]`.
#[derive(Debug, Clone)]
pub struct ModelVector {
    track: Arc<SymbolTrack>,
    pub g_tilde: Field,
    pub g: Field,
}

impl ModelVector {
    pub fn new(track: Arc<SymbolTrack>, g_tilde: Field, g: Field) -> Result<Self, HardyError> {
        let n = track.grid().n();
        for f in [&g_tilde, &g] {
            if f.points() != n || f.dim() != track.dim() {
                return Err(HardyError::DimensionMismatch {
                    expected: track.dim(),
                    got: f.dim(),
                });
            }
        }
        Ok(Self { track, g_tilde, g })
    }

    pub fn zero(track: Arc<SymbolTrack>) -> Self {
        let n = track.grid().n();
        let d = track.dim();
        Self {
            track,
            g_tilde: Field::zeros(n, d),
            g: Field::zeros(n, d),
        }
    }

    pub fn track(&self) -> &Arc<SymbolTrack> {
        &self.track
    }

    pub fn grid(&self) -> &Grid {
        self.track.grid()
    }

    fn with(&self, g_tilde: Field, g: Field) -> Self {
        Self {
            track: self.track.clone(),
            g_tilde,
            g,
        }
    }

    /// `g̃ + S*g`
    pub fn upper_data(&self) -> Field {
        self.g_tilde.add(&self.g.apply(self.track.s_adjoint()))
    }

    /// `Sg̃ + g`
    pub fn lower_data(&self) -> Field {
        self.g_tilde.apply(self.track.s()).add(&self.g)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.with(self.g_tilde.add(&other.g_tilde), self.g.add(&other.g))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with(self.g_tilde.sub(&other.g_tilde), self.g.sub(&other.g))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.with(self.g_tilde.scale(c), self.g.scale(c))
    }

    /// Multiplies both components by `m(k_j)`.
    pub fn multiply(&self, m: impl Fn(f64) -> C64) -> Self {
        let k = self.grid().k();
        self.with(
            self.g_tilde.mul_pointwise(|j| m(k[j])),
            self.g.mul_pointwise(|j| m(k[j])),
        )
    }

    pub fn masked(&self, mask: &[bool]) -> Self {
        self.with(self.g_tilde.masked(mask), self.g.masked(mask))
    }

    /// Model inner product `Σ_j [⟨g̃ + S*g, h̃⟩ + ⟨Sg̃ + g, h⟩] w_j`.
    pub fn inner(&self, other: &Self) -> C64 {
        let grid = self.grid();
        grid.inner(&self.upper_data(), &other.g_tilde) + grid.inner(&self.lower_data(), &other.g)
    }

    /// Squared model norm; round-off below zero is clipped.
    pub fn norm_sq(&self) -> Result<f64, HardyError> {
        let v = self.inner(self).re;
        let grid = self.grid();
        let scale = grid.norm(&self.g_tilde).powi(2) + grid.norm(&self.g).powi(2);
        if v < -TOL_NORM * scale.max(f64::MIN_POSITIVE) {
            return Err(HardyError::NegativeNorm(v));
        }
        Ok(v.max(0.0))
    }

    pub fn norm(&self) -> Result<f64, HardyError> {
        Ok(self.norm_sq()?.sqrt())
    }

    /// `(‖g̃‖² + ‖g‖²)^½` without the weight.
    pub fn plain_norm(&self) -> f64 {
        let grid = self.grid();
        grid.norm(&self.g_tilde).hypot(grid.norm(&self.g))
    }

    /// `(g̃ - P₊(g̃ + S*g), g - P₋(Sg̃ + g))`
    pub fn project_k(&self) -> Self {
        let grid = self.grid();
        let up = grid.riesz_project(&self.upper_data(), Sign::Plus);
        let lo = grid.riesz_project(&self.lower_data(), Sign::Minus);
        self.with(self.g_tilde.sub(&up), self.g.sub(&lo))
    }

    /// `(‖P₊(g̃ + S*g)‖, ‖P₋(Sg̃ + g)‖)`; both vanish exactly on `K`.
    pub fn k_defects(&self) -> (f64, f64) {
        let grid = self.grid();
        (
            grid.norm(&grid.riesz_project(&self.upper_data(), Sign::Plus)),
            grid.norm(&grid.riesz_project(&self.lower_data(), Sign::Minus)),
        )
    }

    /// Errors unless both K-defects are below `TOL_IN_K · ‖v‖`.
    pub fn check_in_k(&self) -> Result<(), HardyError> {
        let (a, b) = self.k_defects();
        let tol = TOL_IN_K * self.norm()?.max(f64::MIN_POSITIVE);
        let d = a.max(b);
        if d > tol {
            return Err(HardyError::NotInK { defect: d, tol });
        }
        Ok(())
    }

    /// `χ⁺(g̃ + S*g) + χ⁻(Sg̃ + g)`
    pub fn smooth_combination(&self, ext: &ExtensionParams) -> Field {
        let n = self.grid().n();
        let cp = vec![ext.chi_plus().clone(); n];
        let cm = vec![ext.chi_minus().clone(); n];
        self.upper_data().apply(&cp).add(&self.lower_data().apply(&cm))
    }

    /// `‖P_sign(χ⁺(g̃ + S*g) + χ⁻(Sg̃ + g))‖`
    pub fn smooth_defect(&self, ext: &ExtensionParams, sign: Sign) -> f64 {
        let grid = self.grid();
        grid.norm(&grid.riesz_project(&self.smooth_combination(ext), sign))
    }

    pub fn export(&self) -> ExportedVector {
        let k = self.grid().k();
        let components = (0..self.track.dim())
            .map(|c| {
                k.iter()
                    .enumerate()
                    .map(|(j, &k)| {
                        let a = self.g_tilde.at(j)[c];
                        let b = self.g.at(j)[c];
                        [k, a.re, a.im, b.re, b.im]
                    })
                    .collect()
            })
            .collect();
        ExportedVector { components }
    }

    pub fn import(track: Arc<SymbolTrack>, data: &ExportedVector) -> Result<Self, HardyError> {
        let n = track.grid().n();
        let d = track.dim();
        if data.components.len() != d || data.components.iter().any(|c| c.len() != n) {
            return Err(HardyError::DimensionMismatch {
                expected: d,
                got: data.components.len(),
            });
        }
        let mut gt = Field::zeros(n, d);
        let mut g = Field::zeros(n, d);
        for (c, rows) in data.components.iter().enumerate() {
            for (j, r) in rows.iter().enumerate() {
                gt.at_mut(j)[c] = C64::new(r[1], r[2]);
                g.at_mut(j)[c] = C64::new(r[3], r[4]);
            }
        }
        Self::new(track, gt, g)
    }
}

/// Rows of `(k, Re g̃, Im g̃, Re g, Im g)` per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedVector {
    pub components: Vec<Vec<[f64; 5]>>,
}

/// Output of a pointwise map with the 𝟙_n truncation: masked points are zero.
#[derive(Debug, Clone)]
pub struct Masked<T> {
    pub value: T,
    pub mask: Vec<bool>,
}

impl<T> Masked<T> {
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// `-A(j)⁻¹ B(j) f(j)` pointwise, masking points where `‖A⁻¹‖ > INVERSE_CAP` or `A` is singular.
pub(crate) fn pointwise_solve(
    a: impl Fn(usize) -> CMatrix,
    b: impl Fn(usize) -> CMatrix,
    f: &Field,
) -> Masked<Field> {
    let n = f.points();
    let mut out = Field::zeros(n, f.dim());
    let mut mask = vec![false; n];
    for j in 0..n {
        let aj = a(j);
        let inv = match crate::kernel::inverse(&aj) {
            Ok(inv) if inv.op_norm() <= super::INVERSE_CAP => inv,
            _ => {
                mask[j] = true;
                continue;
            }
        };
        let y = (&inv * &b(j)).apply(f.at(j));
        out.at_mut(j).iter_mut().zip(y).for_each(|(o, v)| *o = -v);
    }
    Masked { value: out, mask }
}

/// `g = -(χ⁻ + χ⁺S*)⁻¹(χ⁺ + χ⁻S) g̃`, the partner making `(g̃, g)` smooth for `A_κ`.
pub fn smooth_partner_of_g_tilde(
    track: &SymbolTrack,
    ext: &ExtensionParams,
    g_tilde: &Field,
) -> Masked<Field> {
    let (cp, cm) = (ext.chi_plus(), ext.chi_minus());
    pointwise_solve(
        |j| cm + &(cp * &track.s_adjoint()[j]),
        |j| cp + &(cm * &track.s()[j]),
        g_tilde,
    )
}

/// `g̃ = -(χ⁺ + χ⁻S)⁻¹(χ⁻ + χ⁺S*) g`, the partner making `(g̃, g)` smooth for `A_κ`.
pub fn smooth_partner_of_g(track: &SymbolTrack, ext: &ExtensionParams, g: &Field) -> Masked<Field> {
    let (cp, cm) = (ext.chi_plus(), ext.chi_minus());
    pointwise_solve(
        |j| cp + &(cm * &track.s()[j]),
        |j| cm + &(cp * &track.s_adjoint()[j]),
        g,
    )
}

/// Smooth vector for `A_κ` built from `g̃`, with the mask applied to both components.
pub fn smooth_vector(
    track: Arc<SymbolTrack>,
    ext: &ExtensionParams,
    g_tilde: &Field,
) -> Result<Masked<ModelVector>, HardyError> {
    let g = smooth_partner_of_g_tilde(&track, ext, g_tilde);
    let v = ModelVector::new(track, g_tilde.masked(&g.mask), g.value)?;
    Ok(Masked {
        value: v,
        mask: g.mask,
    })
}

/// Smooth vector for `A_κ` built from `g`.
pub fn smooth_vector_from_g(
    track: Arc<SymbolTrack>,
    ext: &ExtensionParams,
    g: &Field,
) -> Result<Masked<ModelVector>, HardyError> {
    let gt = smooth_partner_of_g(&track, ext, g);
    let v = ModelVector::new(track, gt.value, g.masked(&gt.mask))?;
    Ok(Masked {
        value: v,
        mask: gt.mask,
    })
}

/// Model resolvent of `A_κ` at `z` applied to `v ∈ K`.
pub fn model_resolvent(
    v: &ModelVector,
    ext: &ExtensionParams,
    z: C64,
) -> Result<ModelVector, HardyError> {
    if z.im == 0.0 {
        return Err(HardyError::WrongHalfPlane(z));
    }
    v.check_in_k()?;
    let grid = v.grid();
    let symbol = v.track().symbol()?;
    let (gt, g) = if z.im < 0.0 {
        let uz = grid.continuation_at_scale(&v.upper_data(), Sign::Minus, z, Some(v.plain_norm()))?;
        let corr = (ext.chi_plus() * &symbol.theta_inverse(ext, z)?).apply(&uz);
        (v.g_tilde.clone(), v.g.sub_constant(&corr))
    } else {
        let wz = grid.continuation_at_scale(&v.lower_data(), Sign::Plus, z, Some(v.plain_norm()))?;
        let corr = (ext.chi_minus() * &symbol.theta_hat_inverse(ext, z)?).apply(&wz);
        (v.g_tilde.sub_constant(&corr), v.g.clone())
    };
    let r = ModelVector::new(v.track().clone(), gt, g)?;
    Ok(r.multiply(|k| 1.0 / (k - z)).project_k())
}

/// `P_K (· - z)⁻¹ v`, the compressed multiplication resolvent.
pub fn compressed_resolvent(v: &ModelVector, z: C64) -> ModelVector {
    v.multiply(|k| 1.0 / (k - z)).project_k()
}

/// Residual `‖γ(z) + P₋(Sg̃ + g)(z)‖` with
/// `γ(z) = χ⁺Θ_κ(z)⁻¹[P₋(g̃ + S*g) - S*P₋(Sg̃ + g)](z)`, for `z ∈ ℂ₋`.
pub fn gamma_check(v: &ModelVector, ext: &ExtensionParams, z: C64) -> Result<f64, HardyError> {
    if z.im >= 0.0 {
        return Err(HardyError::WrongHalfPlane(z));
    }
    let grid = v.grid();
    let pu = grid.riesz_project(&v.upper_data(), Sign::Minus);
    let pw = grid.riesz_project(&v.lower_data(), Sign::Minus);
    let inner = pu.sub(&pw.apply(v.track().s_adjoint()));
    let scale = Some(v.plain_norm());
    let cont = grid.continuation_at_scale(&inner, Sign::Minus, z, scale)?;
    let symbol = v.track().symbol()?;
    let gamma = (ext.chi_plus() * &symbol.theta_inverse(ext, z)?).apply(&cont);
    let pwz = grid.continuation_at_scale(&pw, Sign::Minus, z, scale)?;
    Ok(gamma
        .iter()
        .zip(&pwz)
        .map(|(a, b)| (a + b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}
