//! Dense complex matrices, a pivoted LU solver and the branched square root.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Relative pivot floor: a pivot below `PIVOT_FLOOR * ‖a‖_max` is treated as zero.
pub const PIVOT_FLOOR: f64 = 1e-13;
pub const TOL_SOLVE: f64 = 1e-10;
/// Hermiticity tolerance used as the precondition of [`psd_defect`], relative to `max(1, ‖a‖_max)`.
pub const TOL_HERM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("singular matrix: pivot {pivot:.3e} below floor {floor:.3e}")]
    SingularMatrix { pivot: f64, floor: f64 },
    #[error("z = {0} lies on the branch cut [0, inf) and no side was given")]
    OnCutWithoutSide(f64),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("non-finite entry in result")]
    NonFinite,
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, C64::new(1.0, 0.0))
    }

    /// `c * I_n`.
    pub fn scalar(n: usize, c: C64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c;
        }
        m
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let d: Vec<C64> = d.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, KernelError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(KernelError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, KernelError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(KernelError::Shape("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    /// Column vector.
    pub fn column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        self.to_nalgebra()
            .singular_values()
            .iter()
            .fold(0.0_f64, |m, &s| m.max(s))
    }

    /// `(a - a*) / 2i`, the imaginary part of a square matrix.
    pub fn im_part(&self) -> Self {
        (self - &self.adjoint()).scale(C64::new(0.0, -0.5))
    }

    pub fn re_part(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    /// Matrix-vector product on a raw slice.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, KernelError> {
        if self.cols != rhs.rows {
            return Err(KernelError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn check_same_shape(&self, rhs: &Self) {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, " {:+.6e}{:+.6e}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_shape(rhs);
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_shape(rhs);
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    /// Panics on inner-dimension mismatch; use [`CMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: CMatrix) -> CMatrix {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: &CMatrix) -> CMatrix {
                (&self).$m(rhs)
            }
        }
        impl $tr<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: CMatrix) -> CMatrix {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// LU factors with row pivoting, `P a = L U` stored compactly.
struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &CMatrix) -> Result<Self, KernelError> {
        let n = a.rows;
        let floor = PIVOT_FLOOR * a.max_norm();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmag > floor) {
                return Err(KernelError::SingularMatrix { pivot: pmag, floor });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    let t = lu[k * n + j];
                    lu[i * n + j] -= f * t;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    fn solve_in_place(&self, b: &CMatrix) -> CMatrix {
        let n = self.n;
        let m = b.cols;
        let mut x = CMatrix::zeros(n, m);
        for (i, &p) in self.perm.iter().enumerate() {
            for j in 0..m {
                x.data[i * m + j] = b.data[p * m + j];
            }
        }
        for j in 0..m {
            for i in 0..n {
                let mut s = x.data[i * m + j];
                for k in 0..i {
                    s -= self.lu[i * n + k] * x.data[k * m + j];
                }
                x.data[i * m + j] = s;
            }
            for i in (0..n).rev() {
                let mut s = x.data[i * m + j];
                for k in i + 1..n {
                    s -= self.lu[i * n + k] * x.data[k * m + j];
                }
                x.data[i * m + j] = s / self.lu[i * n + i];
            }
        }
        x
    }
}

/// Solves `a x = b` by row-pivoted elimination followed by one refinement step.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, KernelError> {
    if !a.is_square() || a.rows != b.rows {
        return Err(KernelError::Shape(format!(
            "solve with a {}x{} system and {}x{} right-hand side",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let lu = Lu::factor(a)?;
    let mut x = lu.solve_in_place(b);
    let r = b - &(a * &x);
    let dx = lu.solve_in_place(&r);
    x = &x + &dx;
    if !x.is_finite() {
        return Err(KernelError::NonFinite);
    }
    let resid = (&(a * &x) - b).max_norm();
    let bound = TOL_SOLVE * (1.0 + a.max_norm() * x.max_norm());
    if resid > bound {
        return Err(KernelError::SingularMatrix {
            pivot: resid,
            floor: bound,
        });
    }
    Ok(x)
}

/// Solves `x a = b`, i.e. returns `b a⁻¹`.
pub fn solve_right(b: &CMatrix, a: &CMatrix) -> Result<CMatrix, KernelError> {
    Ok(solve(&a.adjoint(), &b.adjoint())?.adjoint())
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix, KernelError> {
    solve(a, &CMatrix::identity(a.rows))
}

/// Which side of the real axis a boundary point is approached from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `k + i0`
    Above,
    /// `k - i0`
    Below,
}

/// Branch of the square root. Only `arg z ∈ (0, 2π)` is supported.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchedSqrt {
    #[default]
    ArgZeroTwoPi,
}

impl BranchedSqrt {
    pub fn eval(self, z: C64, side: Option<Side>) -> Result<C64, KernelError> {
        match self {
            BranchedSqrt::ArgZeroTwoPi => sqrt_branch(z, side),
        }
    }
}

/// Square root with `arg z ∈ (0, 2π)`, so that `Im √z > 0` off `[0, ∞)`.
///
/// Points on the cut need a side: `k + i0` gives `+√k`, `k - i0` gives `-√k`.
pub fn sqrt_branch(z: C64, side: Option<Side>) -> Result<C64, KernelError> {
    if z.im == 0.0 && z.re >= 0.0 {
        let r = z.re.sqrt();
        return match side {
            Some(Side::Above) => Ok(C64::new(r, 0.0)),
            Some(Side::Below) => Ok(C64::new(-r, 0.0)),
            None => Err(KernelError::OnCutWithoutSide(z.re)),
        };
    }
    let w = z.sqrt();
    Ok(if w.im > 0.0 { w } else { -w })
}

/// `‖a - a*‖_max`.
pub fn herm_defect(a: &CMatrix) -> f64 {
    assert!(a.is_square(), "herm_defect needs a square matrix");
    (a - &a.adjoint()).max_norm()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMatrix) -> Result<f64, KernelError> {
    let d = herm_defect(a);
    if d > TOL_HERM * a.max_norm().max(1.0) {
        return Err(KernelError::NotHermitian(d));
    }
    let h = a.re_part().to_nalgebra();
    let eig = h.symmetric_eigenvalues();
    Ok(eig.iter().fold(f64::INFINITY, |m, &x| m.min(x)))
}

/// `max(0, -λ_min(a))` for Hermitian `a`.
pub fn psd_defect(a: &CMatrix) -> Result<f64, KernelError> {
    Ok((-min_eigenvalue(a)?).max(0.0))
}

/// Eigen-decomposition based projection onto the PSD cone.
pub fn psd_project(a: &CMatrix) -> Result<CMatrix, KernelError> {
    let d = herm_defect(a);
    if d > TOL_HERM * a.max_norm().max(1.0) {
        return Err(KernelError::NotHermitian(d));
    }
    let eig = a.re_part().to_nalgebra().symmetric_eigen();
    let n = a.rows;
    let mut out = CMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[i] * v[j].conj() * lam;
            }
        }
    }
    Ok(out)
}

/// `max(‖a b - I‖_max, ‖b a - I‖_max)`.
pub fn inverse_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    let id = CMatrix::identity(a.rows);
    (&(a * b) - &id).max_norm().max((&(b * a) - &id).max_norm())
}
