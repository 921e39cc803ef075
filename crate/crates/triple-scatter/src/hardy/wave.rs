use serde::{Deserialize, Serialize};

use super::grid::Field;
use super::model::{pointwise_solve, Masked, ModelVector};
use super::HardyError;
use crate::kernel::{CMatrix, C64};
use crate::weyl::ExtensionParams;

/// The four wave operators between `A₀` and `A_κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveDirection {
    /// `W₋(A₀, A_κ)`: `g̃ ↦ -(I + S)⁻¹(I + S*)g`.
    MinusZeroKappa,
    /// `W₊(A₀, A_κ)`: `g ↦ -(I + S*)⁻¹(I + S)g̃`.
    PlusZeroKappa,
    /// `W₋(A_κ, A₀)`: `g̃ ↦ -(χ⁺ + χ⁻S)⁻¹(χ⁻ + χ⁺S*)g`.
    MinusKappaZero,
    /// `W₊(A_κ, A₀)`: `g ↦ -(χ⁻ + χ⁺S*)⁻¹(χ⁺ + χ⁻S)g̃`.
    PlusKappaZero,
}

impl WaveDirection {
    pub const ALL: [WaveDirection; 4] = [
        Self::MinusZeroKappa,
        Self::PlusZeroKappa,
        Self::MinusKappaZero,
        Self::PlusKappaZero,
    ];

    /// Whether the map rewrites `g̃` (from `g`) rather than `g` (from `g̃`).
    pub fn rewrites_g_tilde(self) -> bool {
        matches!(self, Self::MinusZeroKappa | Self::MinusKappaZero)
    }

    /// Whether the input should be smooth for `A_κ` (otherwise for `A₀`).
    pub fn source_is_kappa(self) -> bool {
        matches!(self, Self::MinusZeroKappa | Self::PlusZeroKappa)
    }
}

fn support_killed(f: &Field, mask: &[bool]) -> bool {
    let support: Vec<usize> = (0..f.points()).filter(|&j| !f.is_zero_at(j)).collect();
    !support.is_empty() && support.iter().all(|&j| mask[j])
}

/// Applies one of the closed-form wave maps pointwise, then `P_K`. Points where the
/// pointwise inverse is singular or larger than `INVERSE_CAP` are zeroed and reported.
pub fn wave_map(
    dir: WaveDirection,
    v: &ModelVector,
    ext: &ExtensionParams,
) -> Result<Masked<ModelVector>, HardyError> {
    let r = wave_representative(dir, v, ext)?;
    Ok(Masked {
        value: r.value.project_k(),
        mask: r.mask,
    })
}

/// The pointwise part of [`wave_map`], before `P_K`.
pub fn wave_representative(
    dir: WaveDirection,
    v: &ModelVector,
    ext: &ExtensionParams,
) -> Result<Masked<ModelVector>, HardyError> {
    let track = v.track();
    if ext.dim() != track.dim() {
        return Err(HardyError::DimensionMismatch {
            expected: track.dim(),
            got: ext.dim(),
        });
    }
    let s = track.s();
    let sa = track.s_adjoint();
    let id = CMatrix::identity(track.dim());
    let (cp, cm) = (ext.chi_plus(), ext.chi_minus());
    let (src, solved) = match dir {
        WaveDirection::MinusZeroKappa => (
            &v.g,
            pointwise_solve(|j| &id + &s[j], |j| &id + &sa[j], &v.g),
        ),
        WaveDirection::PlusZeroKappa => (
            &v.g_tilde,
            pointwise_solve(|j| &id + &sa[j], |j| &id + &s[j], &v.g_tilde),
        ),
        WaveDirection::MinusKappaZero => (
            &v.g,
            pointwise_solve(|j| cp + &(cm * &s[j]), |j| cm + &(cp * &sa[j]), &v.g),
        ),
        WaveDirection::PlusKappaZero => (
            &v.g_tilde,
            pointwise_solve(|j| cm + &(cp * &sa[j]), |j| cp + &(cm * &s[j]), &v.g_tilde),
        ),
    };
    if support_killed(src, &solved.mask) {
        return Err(HardyError::MaskedEverywhere);
    }
    let kept = src.masked(&solved.mask);
    let value = if dir.rewrites_g_tilde() {
        ModelVector::new(track.clone(), solved.value, kept)?
    } else {
        ModelVector::new(track.clone(), kept, solved.value)?
    };
    Ok(Masked {
        value,
        mask: solved.mask,
    })
}

/// Scattering operator in the model: `g̃' = -(χ⁺ + χ⁻S)⁻¹(χ⁻ + χ⁺S*)g` and
/// `g' = -(I + S*)⁻¹(I + S)g̃'`, then `P_K`.
pub fn scattering_map(
    v: &ModelVector,
    ext: &ExtensionParams,
) -> Result<Masked<ModelVector>, HardyError> {
    let r = scattering_representative(v, ext)?;
    Ok(Masked {
        value: r.value.project_k(),
        mask: r.mask,
    })
}

/// The pointwise part of [`scattering_map`], before `P_K`.
pub fn scattering_representative(
    v: &ModelVector,
    ext: &ExtensionParams,
) -> Result<Masked<ModelVector>, HardyError> {
    let track = v.track();
    if ext.dim() != track.dim() {
        return Err(HardyError::DimensionMismatch {
            expected: track.dim(),
            got: ext.dim(),
        });
    }
    let s = track.s();
    let sa = track.s_adjoint();
    let id = CMatrix::identity(track.dim());
    let (cp, cm) = (ext.chi_plus(), ext.chi_minus());
    let first = pointwise_solve(|j| cp + &(cm * &s[j]), |j| cm + &(cp * &sa[j]), &v.g);
    let second = pointwise_solve(|j| &id + &sa[j], |j| &id + &s[j], &first.value);
    let mask: Vec<bool> = first
        .mask
        .iter()
        .zip(&second.mask)
        .map(|(a, b)| *a || *b)
        .collect();
    if support_killed(&v.g, &mask) {
        return Err(HardyError::MaskedEverywhere);
    }
    let value = ModelVector::new(
        track.clone(),
        first.value.masked(&mask),
        second.value.masked(&mask),
    )?;
    Ok(Masked { value, mask })
}

/// `P_K e^{ikt} v`.
pub fn semigroup_step(v: &ModelVector, t: f64) -> ModelVector {
    v.multiply(|k| C64::new(0.0, k * t).exp()).project_k()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hardy::corpus::Rational;
    use crate::hardy::{smooth_vector, smooth_vector_from_g, Grid, Sign, SymbolTrack};
    use crate::scatter::scattering_via_model_form;
    use crate::weyl::HerglotzModel;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ext(kappa: f64) -> ExtensionParams {
        ExtensionParams::sqrt2(CMatrix::scalar(1, c(kappa, 0.0))).unwrap()
    }

    fn setup(n: usize) -> (Arc<Grid>, Arc<SymbolTrack>, Field) {
        let grid = Arc::new(Grid::new(50.0, n).unwrap());
        let model = HerglotzModel::star_graph(1).unwrap();
        let track = Arc::new(SymbolTrack::from_model(grid.clone(), &ext(1.0), &model).unwrap());
        let f = Rational::simple(c(1.0, 0.0), c(3.0, -0.7))
            .plus(Rational::simple(c(0.5, 0.2), c(2.0, 0.9)))
            .sample(&grid);
        (grid, track, f)
    }

    fn max_diff(a: &Field, b: &Field) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn linear_in_the_source_component() {
        let (grid, track, f) = setup(1024);
        let v = ModelVector::new(track, f, Field::zeros(grid.n(), 1)).unwrap();
        let w = wave_map(WaveDirection::MinusZeroKappa, &v, &ext(1.0)).unwrap();
        assert_eq!(w.value.norm().unwrap(), 0.0);
        let s = scattering_map(&v, &ext(1.0)).unwrap();
        assert_eq!(s.value.norm().unwrap(), 0.0);
    }

    #[test]
    fn zero_kappa_reduces_to_plain_form() {
        let (grid, track, f) = setup(1024);
        let v = ModelVector::new(track, Field::zeros(grid.n(), 1), f).unwrap();
        let a = wave_representative(WaveDirection::MinusZeroKappa, &v, &ext(0.0)).unwrap();
        let b = wave_representative(WaveDirection::MinusKappaZero, &v, &ext(0.0)).unwrap();
        assert!(max_diff(&a.value.g_tilde, &b.value.g_tilde) < 1e-14);
    }

    #[test]
    fn output_is_smooth_for_target() {
        let (_, track, f) = setup(4096);
        let e = ext(1.0);
        let e0 = ext(0.0);
        let v = smooth_vector_from_g(track, &e0, &f).unwrap().value;
        let r = wave_representative(WaveDirection::MinusKappaZero, &v, &e).unwrap().value;
        let n = r.norm().unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            assert!(r.smooth_defect(&e, sign) < 1e-12 * n);
        }
        let back = wave_representative(WaveDirection::PlusZeroKappa, &r, &e).unwrap().value;
        assert!(back.smooth_defect(&e0, Sign::Minus) < 1e-12 * n);
    }

    #[test]
    fn scattering_is_composition_of_wave_maps() {
        let (_, track, f) = setup(1024);
        let e = ext(1.0);
        let v = smooth_vector_from_g(track, &ext(0.0), &f).unwrap().value;
        let s = scattering_representative(&v, &e).unwrap().value;
        let undo = wave_representative(WaveDirection::PlusKappaZero, &s, &e).unwrap().value;
        let into = wave_representative(WaveDirection::MinusKappaZero, &v, &e).unwrap().value;
        assert!(max_diff(&undo.g, &into.g) < 1e-12);
        assert!(max_diff(&undo.g_tilde, &into.g_tilde) < 1e-12);
        let via = wave_representative(WaveDirection::PlusZeroKappa, &into, &e).unwrap().value;
        assert!(max_diff(&via.g, &s.g) < 1e-12);
    }

    #[test]
    fn scattering_is_identity_for_zero_kappa() {
        let (_, track, f) = setup(1024);
        let e0 = ext(0.0);
        let v = smooth_vector(track, &e0, &f).unwrap().value;
        let s = scattering_representative(&v, &e0).unwrap().value;
        assert!(max_diff(&s.g_tilde, &v.g_tilde) < 1e-12);
        assert!(max_diff(&s.g, &v.g) < 1e-12);
    }

    #[test]
    fn scattering_multiplier_matches_scatter_module() {
        let (grid, track, f) = setup(1024);
        let e = ext(1.0);
        let model = HerglotzModel::star_graph(1).unwrap();
        let v = smooth_vector(track, &ext(0.0), &f).unwrap().value;
        let s = scattering_representative(&v, &e).unwrap().value;
        let mut checked = 0;
        for (j, &k) in grid.k().iter().enumerate() {
            if !(0.5..5.0).contains(&k) {
                continue;
            }
            let mf = scattering_via_model_form(&e, &model, k).unwrap();
            let want = mf.product[(0, 0)] * v.g_tilde.at(j)[0];
            assert!((s.g_tilde.at(j)[0] - want).norm() < 1e-9);
            let q = k.sqrt();
            let oracle = c(1.0, q) / c(-1.0, q);
            assert!((mf.conjugated[(0, 0)] - oracle).norm() < 1e-9);
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn wave_map_preserves_norm() {
        let (_, track, f) = setup(4096);
        let e = ext(1.0);
        let v = smooth_vector_from_g(track, &ext(0.0), &f).unwrap().value;
        let before = v.project_k().norm().unwrap();
        let after = wave_map(WaveDirection::MinusKappaZero, &v, &e)
            .unwrap()
            .value
            .norm()
            .unwrap();
        assert!((after / before - 1.0).abs() < 0.05, "{before} {after}");
    }

    #[test]
    fn fully_masked_support_is_an_error() {
        let grid = Arc::new(Grid::new(50.0, 256).unwrap());
        let minus_one = crate::hardy::FnSymbol::constant(CMatrix::scalar(1, c(-1.0, 0.0)));
        let track = Arc::new(SymbolTrack::from_symbol(grid.clone(), Arc::new(minus_one)).unwrap());
        let f = Rational::simple(c(1.0, 0.0), c(0.0, -1.0)).sample(&grid);
        let v = ModelVector::new(track, Field::zeros(grid.n(), 1), f).unwrap();
        assert!(matches!(
            wave_map(WaveDirection::MinusZeroKappa, &v, &ext(0.0)),
            Err(HardyError::MaskedEverywhere)
        ));
    }

    #[test]
    fn group_property_before_projection() {
        let (_, track, f) = setup(1024);
        let v = ModelVector::new(track, f.clone(), f.clone()).unwrap();
        let a = v.multiply(|k| C64::new(0.0, 0.7 * k).exp()).multiply(|k| C64::new(0.0, -1.9 * k).exp());
        let b = v.multiply(|k| C64::new(0.0, -1.2 * k).exp());
        assert!(max_diff(&a.g_tilde, &b.g_tilde) < 1e-12);
        let w = v.project_k();
        let s0 = semigroup_step(&w, 0.0);
        assert!(s0.sub(&w).norm().unwrap() < 2e-2 * w.norm().unwrap());
    }

    #[test]
    fn laplace_transform_of_semigroup_gives_resolvent() {
        let (_, track, f) = setup(2048);
        let e = ext(1.0);
        let v = smooth_vector_from_g(track, &e, &f).unwrap().value;
        let w = v.project_k();
        let z = c(3.0, 1.0);
        let r = crate::hardy::model_resolvent(&w, &e, z).unwrap().scale(c(0.0, -1.0));
        let err = |t_max: f64, steps: usize| {
            // composite Simpson on [0, t_max]
            let h = t_max / steps as f64;
            let mut acc = ModelVector::zero(w.track().clone());
            for i in 0..=steps {
                let t = i as f64 * h;
                let wt = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                let term = semigroup_step(&v, -t).scale((C64::new(0.0, t) * z).exp() * (wt * h / 3.0));
                acc = acc.add(&term);
            }
            acc.sub(&r).norm().unwrap() / r.norm().unwrap()
        };
        let coarse = err(8.0, 400);
        let fine = err(20.0, 2000);
        assert!(fine < coarse, "{coarse} {fine}");
        assert!(fine < 5e-2, "{fine}");
    }
}
