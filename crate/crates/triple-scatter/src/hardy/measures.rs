//! Grid-convergence measures on the rational corpus, shared by tests, the CLI and the
//! acceptance run.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::corpus::{PoleTerm, Rational};
use super::grid::{Field, Grid, Sign};
use super::model::{
    compressed_resolvent, gamma_check, model_resolvent, smooth_vector, smooth_vector_from_g,
    ModelVector,
};
use super::symbol::SymbolTrack;
use super::HardyError;
use crate::kernel::{CMatrix, C64};
use crate::weyl::{ExtensionParams, HerglotzModel};

pub const DECAY_TIMES: [f64; 3] = [-5.0, -20.0, -80.0];

/// Model, extension and corpus placement for a convergence run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: HerglotzModel,
    pub ext: ExtensionParams,
    /// Real part around which the corpus poles and evaluation points sit.
    pub centre: f64,
}

impl Setup {
    /// `StarGraph(1)` with `α = √2`, `κ = 1`, corpus centred at 3.
    pub fn standard() -> Self {
        Self {
            model: HerglotzModel::star_graph(1).expect("valid model"),
            ext: ExtensionParams::sqrt2(CMatrix::scalar(1, C64::new(1.0, 0.0)))
                .expect("valid parameters"),
            centre: 3.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.ext.dim()
    }

    fn direction(&self) -> Vec<C64> {
        (0..self.dim())
            .map(|c| C64::from_polar(1.0 / (1.0 + c as f64), 0.5 * c as f64))
            .collect()
    }

    fn spread(&self, grid: &Grid, r: &Rational) -> Field {
        let e = self.direction();
        grid.field_from_fn(self.dim(), |k| {
            let v = r.eval(C64::new(k, 0.0));
            e.iter().map(|d| d * v).collect()
        })
    }

    fn at(&self, re: f64, im: f64) -> C64 {
        C64::new(self.centre + re, im)
    }

    /// Base function for smooth vectors.
    pub fn base(&self) -> Rational {
        let one = C64::new(1.0, 0.0);
        Rational::new(vec![PoleTerm::new(one, self.at(0.0, -0.7), 2)]).plus(Rational::pair(
            C64::new(0.5, 0.0),
            self.at(1.0, 0.6),
            self.at(-2.0, 0.9),
        ))
    }

    /// Spectral point for the resolvent checks, and the second point of the resolvent identity.
    pub fn points(&self) -> (C64, C64) {
        let z = self.at(0.3, -1.0);
        (z, z - C64::new(0.5, 1.0))
    }
}

/// Residuals at one grid size. All are relative to the model norm of the test vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    pub n: usize,
    pub half_width: f64,
    /// Inner product of `P_K v` against unit elements of `D₊` and `D₋`.
    pub orthogonality_leak: f64,
    /// Model resolvent against compressed multiplication on a smooth vector.
    pub smooth_resolvent: f64,
    /// `‖γ(z) + P₋(Sg̃ + g)(z)‖ / ‖P₋(Sg̃ + g)‖`.
    pub gamma: f64,
    /// `R(z) - R(ζ) - (z - ζ)R(z)R(ζ)`.
    pub resolvent_identity: f64,
    /// `|‖P_K v‖² - ⟨(I - S*S)g̃, g̃⟩| / ‖P_K v‖²` for an `A₀`-smooth vector.
    pub isometry: f64,
    /// Points masked while building the `A₀`-smooth vector.
    pub masked: usize,
}

fn unit(v: &ModelVector) -> Result<ModelVector, HardyError> {
    let n = v.norm()?;
    Ok(v.scale(C64::new(1.0 / n, 0.0)))
}

pub fn measures(setup: &Setup, n: usize, half_width: f64) -> Result<Measures, HardyError> {
    let grid = Arc::new(Grid::new(half_width, n)?);
    let track = Arc::new(SymbolTrack::from_model(grid.clone(), &setup.ext, &setup.model)?);
    let base = setup.spread(&grid, &setup.base());
    let v = smooth_vector(track.clone(), &setup.ext, &base)?.value;
    let vn = v.norm()?;
    let w = v.project_k();

    let zero = Field::zeros(n, setup.dim());
    let hp = grid.riesz_project(
        &setup.spread(&grid, &Rational::simple(C64::new(1.0, 0.0), setup.at(0.0, -0.8))),
        Sign::Plus,
    );
    let hm = grid.riesz_project(
        &setup.spread(&grid, &Rational::simple(C64::new(1.0, 0.0), setup.at(0.0, 0.5))),
        Sign::Minus,
    );
    let dp = unit(&ModelVector::new(track.clone(), hp, zero.clone())?)?;
    let dm = unit(&ModelVector::new(track.clone(), zero, hm)?)?;
    let orthogonality_leak = w.inner(&dp).norm().max(w.inner(&dm).norm()) / vn;

    let (z, zeta) = setup.points();
    let r1 = model_resolvent(&w, &setup.ext, z)?;
    let r2 = compressed_resolvent(&v, z);
    let smooth_resolvent = r1.sub(&r2).norm()? / vn;

    let a = r1;
    let b = model_resolvent(&w, &setup.ext, zeta)?;
    let c = model_resolvent(&b, &setup.ext, z)?;
    let resolvent_identity = a.sub(&b).sub(&c.scale(z - zeta)).norm()? / vn;

    let pw = grid.riesz_project(&v.lower_data(), Sign::Minus);
    let gamma = gamma_check(&v, &setup.ext, z)? / grid.norm(&pw);

    let ext0 = setup.ext.with_kappa(CMatrix::zeros(setup.dim(), setup.dim()))?;
    let v0 = smooth_vector(track.clone(), &ext0, &base)?;
    let w0 = v0.value.project_k();
    let n2 = w0.norm_sq()?;
    let gt = &v0.value.g_tilde;
    let weighted: f64 = (0..n)
        .map(|j| {
            let s = &track.s()[j];
            let d = &CMatrix::identity(setup.dim()) - &(&track.s_adjoint()[j] * s);
            let x = gt.at(j);
            let dx = d.apply(x);
            let q: C64 = dx.iter().zip(x).map(|(a, b)| a * b.conj()).sum();
            q.re * grid.weights()[j]
        })
        .sum();
    let isometry = (n2 - weighted).abs() / n2;

    Ok(Measures {
        n,
        half_width,
        orthogonality_leak,
        smooth_resolvent,
        gamma,
        resolvent_identity,
        isometry,
        masked: v0.masked_count(),
    })
}

/// `‖P₋ e^{-ikt}(g̃ - ĝ)‖` for the `A_κ`- and `A₀`-smooth partners of the same `g`.
pub fn decay(setup: &Setup, n: usize, half_width: f64, times: &[f64]) -> Result<Vec<f64>, HardyError> {
    let grid = Arc::new(Grid::new(half_width, n)?);
    let track = Arc::new(SymbolTrack::from_model(grid.clone(), &setup.ext, &setup.model)?);
    let g = setup.spread(
        &grid,
        &Rational::new(vec![PoleTerm::new(C64::new(1.0, 0.0), setup.at(0.0, -0.7), 2)]),
    );
    let vk = smooth_vector_from_g(track.clone(), &setup.ext, &g)?;
    let ext0 = setup.ext.with_kappa(CMatrix::zeros(setup.dim(), setup.dim()))?;
    let v0 = smooth_vector_from_g(track, &ext0, &g)?;
    let diff = vk.value.g_tilde.sub(&v0.value.g_tilde).masked(&v0.mask);
    let k = grid.k().to_vec();
    Ok(times
        .iter()
        .map(|&t| {
            let f = diff.mul_pointwise(|j| C64::new(0.0, -k[j] * t).exp());
            grid.norm(&grid.riesz_project(&f, Sign::Minus))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residuals_small_at_default_grid() {
        let m = measures(&Setup::standard(), 4096, 50.0).unwrap();
        assert!(m.orthogonality_leak < 1e-3, "{m:?}");
        assert!(m.smooth_resolvent < 1e-3, "{m:?}");
        assert!(m.gamma < 1e-3, "{m:?}");
        assert!(m.resolvent_identity < 1e-3, "{m:?}");
        assert!(m.isometry < 1e-3, "{m:?}");
    }
}
