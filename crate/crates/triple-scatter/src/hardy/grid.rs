use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::HardyError;
use crate::kernel::{CMatrix, C64};

/// Which Hardy space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Uniform grid `x_j = -L + (j + ½)·2L/N` in a computational coordinate, mapped onto the
/// whole real line by `k = (2L/π)·tan(πx / 2L)`.
///
/// In the computational coordinate the Riesz projections are exact frequency splits: after
/// multiplying by `ℓ - ik` (with `ℓ = 2L/π`), nonnegative frequencies `ω_m = πm/L` span the
/// image of `H²₊` and negative ones the image of `H²₋`. Near `k = 0` the spacing in `k` equals
/// `2L/N`.
#[derive(Clone)]
pub struct Grid {
    half_width: f64,
    n: usize,
    scale: f64,
    x: Vec<f64>,
    k: Vec<f64>,
    weight: Vec<f64>,
    factor: Vec<C64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_width", &self.half_width)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.half_width == other.half_width && self.n == other.n
    }
}

pub const MIN_POINTS: usize = 256;

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self, HardyError> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(HardyError::InvalidGrid(format!("half-width {half_width}")));
        }
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(HardyError::InvalidGrid(format!(
                "N = {n} must be a power of two and at least {MIN_POINTS}"
            )));
        }
        let dx = 2.0 * half_width / n as f64;
        let scale = 2.0 * half_width / PI;
        let x: Vec<f64> = (0..n).map(|j| -half_width + (j as f64 + 0.5) * dx).collect();
        let k: Vec<f64> = x.iter().map(|&x| scale * (PI * x / (2.0 * half_width)).tan()).collect();
        let weight = k.iter().map(|&k| (1.0 + (k / scale).powi(2)) * dx).collect();
        let factor = k.iter().map(|&k| C64::new(scale, -k)).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            half_width,
            n,
            scale,
            x,
            k,
            weight,
            factor,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `ℓ = 2L/π`, the `k`-scale of the tangent map.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Computational coordinates `x_j`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Spectral points `k_j` on the real line.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Quadrature weights for `∫ · dk`.
    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// Frequencies `ω_m = πm/L` in FFT bin order.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n as isize;
        (0..n)
            .map(|m| {
                let m = if m < n / 2 { m } else { m - n };
                PI * m as f64 / self.half_width
            })
            .collect()
    }

    fn bin_kept(&self, bin: usize, sign: Sign) -> bool {
        match sign {
            Sign::Plus => bin < self.n / 2,
            Sign::Minus => bin >= self.n / 2,
        }
    }

    fn transform(&self, f: &Field, c: usize) -> Vec<C64> {
        let mut buf: Vec<C64> = (0..self.n).map(|j| f.at(j)[c] * self.factor[j]).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Riesz projection onto `H²₊` (DC kept) or `H²₋`.
    pub fn riesz_project(&self, f: &Field, sign: Sign) -> Field {
        assert_eq!(f.points(), self.n, "field does not live on this grid");
        let mut out = Field::zeros(self.n, f.dim());
        let norm = 1.0 / self.n as f64;
        for c in 0..f.dim() {
            let mut buf = self.transform(f, c);
            for (bin, v) in buf.iter_mut().enumerate() {
                if !self.bin_kept(bin, sign) {
                    *v = C64::new(0.0, 0.0);
                }
            }
            self.inv.process(&mut buf);
            for j in 0..self.n {
                out.at_mut(j)[c] = buf[j] * norm / self.factor[j];
            }
        }
        out
    }

    /// Spectral energy of `f` in the outer 5% of the frequency band on each side, and in total.
    /// Both are scaled so that the total equals `‖f‖²`.
    fn band_energy(&self, f: &Field) -> (f64, f64) {
        let cut = (self.n as f64 * 0.45) as usize;
        let (mut edge, mut total) = (0.0, 0.0);
        for c in 0..f.dim() {
            let buf = self.transform(f, c);
            for (bin, v) in buf.iter().enumerate() {
                let m = if bin < self.n / 2 { bin } else { self.n - bin };
                let e = v.norm_sqr();
                total += e;
                if m >= cut {
                    edge += e;
                }
            }
        }
        // Parseval with weights w_j = |ℓ - ik_j|²·dx/ℓ²
        let unit = self.dx() / (self.n as f64 * self.scale * self.scale);
        (edge * unit, total * unit)
    }

    /// Share of the spectral energy of `f` in the outer 5% of the frequency band on each side.
    pub fn edge_fraction(&self, f: &Field) -> f64 {
        let (edge, total) = self.band_energy(f);
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    /// `∫ ⟨f, h⟩ dk` by the grid quadrature.
    pub fn inner(&self, f: &Field, h: &Field) -> C64 {
        assert_eq!(f.dim(), h.dim());
        (0..self.n)
            .map(|j| {
                let s: C64 = f.at(j).iter().zip(h.at(j)).map(|(a, b)| a * b.conj()).sum();
                s * self.weight[j]
            })
            .sum()
    }

    pub fn norm(&self, f: &Field) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }

    pub fn field_from_fn(&self, dim: usize, f: impl Fn(f64) -> Vec<C64>) -> Field {
        let mut out = Field::zeros(self.n, dim);
        for (j, &k) in self.k.iter().enumerate() {
            let v = f(k);
            assert_eq!(v.len(), dim);
            out.at_mut(j).copy_from_slice(&v);
        }
        out
    }

    pub fn scalar_field(&self, f: impl Fn(f64) -> C64) -> Field {
        self.field_from_fn(1, |k| vec![f(k)])
    }

    /// Continuation of `f ∈ H²_sign` to `z` by the Cauchy integral
    /// `±(1/2πi) ∫ f(s)/(s - z) ds`, with `+` for `H²₊` at `z ∈ ℂ₊`.
    pub fn analytic_continuation(
        &self,
        f: &Field,
        sign: Sign,
        z: C64,
    ) -> Result<Vec<C64>, HardyError> {
        self.continuation_at_scale(f, sign, z, None)
    }

    /// As [`Grid::analytic_continuation`], with the band-edge energy measured against
    /// `reference²` instead of `‖f‖²`.
    pub fn continuation_at_scale(
        &self,
        f: &Field,
        sign: Sign,
        z: C64,
        reference: Option<f64>,
    ) -> Result<Vec<C64>, HardyError> {
        match sign {
            Sign::Plus if z.im <= 0.0 => return Err(HardyError::WrongHalfPlane(z)),
            Sign::Minus if z.im >= 0.0 => return Err(HardyError::WrongHalfPlane(z)),
            _ => {}
        }
        let (band, total) = self.band_energy(f);
        let scale = reference.map_or(total, |r| r * r);
        let edge = if band == 0.0 { 0.0 } else { band / scale };
        if edge > super::EDGE_TOL {
            return Err(HardyError::EdgeMass(edge));
        }
        let pref = match sign {
            Sign::Plus => C64::new(0.0, -0.5 / PI),
            Sign::Minus => C64::new(0.0, 0.5 / PI),
        };
        let mut acc = vec![C64::new(0.0, 0.0); f.dim()];
        for j in 0..self.n {
            let w = self.weight[j] / (self.k[j] - z);
            for (a, v) in acc.iter_mut().zip(f.at(j)) {
                *a += v * w;
            }
        }
        Ok(acc.into_iter().map(|a| a * pref).collect())
    }
}

/// `E`-valued function on a grid, stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    dim: usize,
    data: Vec<C64>,
}

impl Field {
    pub fn zeros(points: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); points * dim],
        }
    }

    pub fn from_data(dim: usize, data: Vec<C64>) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim));
        Self { dim, data }
    }

    /// Stacks scalar fields as components.
    pub fn from_components(comps: &[Field]) -> Self {
        let points = comps[0].points();
        let mut out = Field::zeros(points, comps.len());
        for (c, f) in comps.iter().enumerate() {
            assert!(f.dim == 1 && f.points() == points);
            for j in 0..points {
                out.at_mut(j)[c] = f.data[j];
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn at(&self, j: usize) -> &[C64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn at_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn component(&self, c: usize) -> Field {
        Field {
            dim: 1,
            data: (0..self.points()).map(|j| self.at(j)[c]).collect(),
        }
    }

    fn zip(&self, other: &Field, f: impl Fn(C64, C64) -> C64) -> Field {
        assert_eq!(self.data.len(), other.data.len());
        assert_eq!(self.dim, other.dim);
        Field {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Field {
        Field {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * c).collect(),
        }
    }

    /// Pointwise scalar multiplier `m(j)`.
    pub fn mul_pointwise(&self, m: impl Fn(usize) -> C64) -> Field {
        let mut out = self.clone();
        for j in 0..self.points() {
            let f = m(j);
            out.at_mut(j).iter_mut().for_each(|v| *v *= f);
        }
        out
    }

    /// Pointwise matrix action `mats[j] · f(j)`.
    pub fn apply(&self, mats: &[CMatrix]) -> Field {
        assert_eq!(mats.len(), self.points());
        let mut out = Field::zeros(self.points(), mats[0].rows());
        for (j, m) in mats.iter().enumerate() {
            out.at_mut(j).copy_from_slice(&m.apply(self.at(j)));
        }
        out
    }

    /// Subtracts the constant vector `v` at every point.
    pub fn sub_constant(&self, v: &[C64]) -> Field {
        assert_eq!(v.len(), self.dim);
        let mut out = self.clone();
        for j in 0..self.points() {
            out.at_mut(j).iter_mut().zip(v).for_each(|(a, b)| *a -= b);
        }
        out
    }

    /// Zeroes the points where `mask` is set.
    pub fn masked(&self, mask: &[bool]) -> Field {
        let mut out = self.clone();
        for (j, &m) in mask.iter().enumerate() {
            if m {
                out.at_mut(j).iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            }
        }
        out
    }

    pub fn is_zero_at(&self, j: usize) -> bool {
        self.at(j).iter().all(|v| v.norm() == 0.0)
    }
}
