//! Test functions with known Hardy-class splits and continuations.

use serde::{Deserialize, Serialize};

use super::grid::{Field, Grid, Sign};
use crate::kernel::C64;

/// `c / (k - p)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub coef: C64,
    pub pole: C64,
    pub order: u32,
}

impl PoleTerm {
    pub fn new(coef: C64, pole: C64, order: u32) -> Self {
        assert!(order >= 1, "pole order must be positive");
        assert!(pole.im != 0.0, "pole on the real axis");
        Self { coef, pole, order }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coef / (z - self.pole).powi(self.order as i32)
    }

    /// A pole in `ℂ₋` makes the term analytic in `ℂ₊`.
    pub fn sign(&self) -> Sign {
        if self.pole.im < 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Sum of pole terms vanishing at infinity.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Rational {
    pub terms: Vec<PoleTerm>,
}

impl Rational {
    pub fn new(terms: Vec<PoleTerm>) -> Self {
        Self { terms }
    }

    pub fn simple(coef: C64, pole: C64) -> Self {
        Self::new(vec![PoleTerm::new(coef, pole, 1)])
    }

    /// `c / ((k - a)(k - b))` split into partial fractions.
    pub fn pair(coef: C64, a: C64, b: C64) -> Self {
        let r = coef / (a - b);
        Self::new(vec![PoleTerm::new(r, a, 1), PoleTerm::new(-r, b, 1)])
    }

    pub fn plus(mut self, other: Rational) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    /// Exact Riesz projection: the terms analytic in the matching half-plane.
    pub fn part(&self, sign: Sign) -> Rational {
        Self::new(
            self.terms
                .iter()
                .copied()
                .filter(|t| t.sign() == sign)
                .collect(),
        )
    }

    /// Smallest distance from a pole to the real axis.
    pub fn pole_margin(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.pole.im.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sample(&self, grid: &Grid) -> Field {
        grid.scalar_field(|k| self.eval(C64::new(k, 0.0)))
    }
}

/// `a·e^{iωk}·exp(-(k - c)²/2σ²)`, whose spectrum is a Gaussian around `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatedGaussian {
    pub amplitude: C64,
    pub centre: f64,
    pub width: f64,
    pub omega: f64,
}

impl ModulatedGaussian {
    pub fn eval(&self, z: C64) -> C64 {
        let d = z - self.centre;
        self.amplitude * (C64::new(0.0, self.omega) * z - d * d / (2.0 * self.width.powi(2))).exp()
    }

    /// Hardy space holding all but `exp(-(ωσ)²/2)` of the mass.
    pub fn dominant_sign(&self) -> Sign {
        if self.omega >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Relative size of the part outside `dominant_sign`, up to a constant factor.
    pub fn leak_bound(&self) -> f64 {
        (-(self.omega * self.width).powi(2) / 2.0).exp()
    }

    pub fn sample(&self, grid: &Grid) -> Field {
        grid.scalar_field(|k| self.eval(C64::new(k, 0.0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CorpusFunction {
    Rational(Rational),
    Gaussian(ModulatedGaussian),
}

impl CorpusFunction {
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Self::Rational(r) => r.eval(z),
            Self::Gaussian(g) => g.eval(z),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Field {
        grid.scalar_field(|k| self.eval(C64::new(k, 0.0)))
    }
}

/// Spreads scalar functions over components: component `c` gets `f_c`.
pub fn vector_field(grid: &Grid, fs: &[CorpusFunction]) -> Field {
    grid.field_from_fn(fs.len(), |k| {
        fs.iter().map(|f| f.eval(C64::new(k, 0.0))).collect()
    })
}

/// The default corpus centred at `c`: rationals with poles at least 0.5 from the axis
/// and two modulated Gaussians.
pub fn standard(centre: f64) -> Vec<(String, CorpusFunction)> {
    let c = C64::new(centre, 0.0);
    let i = |re: f64, im: f64| c + C64::new(re, im);
    vec![
        (
            "double-upper-pair".into(),
            CorpusFunction::Rational(
                Rational::new(vec![PoleTerm::new(C64::new(1.0, 0.0), i(0.0, -0.7), 2)]).plus(
                    Rational::pair(C64::new(0.5, 0.0), i(1.0, 0.6), i(-2.0, 0.9)),
                ),
            ),
        ),
        (
            "plus-simple".into(),
            CorpusFunction::Rational(Rational::simple(C64::new(1.0, 0.0), i(0.0, -0.8))),
        ),
        (
            "minus-simple".into(),
            CorpusFunction::Rational(Rational::simple(C64::new(1.0, 0.0), i(0.0, 0.5))),
        ),
        (
            "mixed".into(),
            CorpusFunction::Rational(
                Rational::simple(C64::new(0.7, 0.2), i(-1.0, -0.6))
                    .plus(Rational::simple(C64::new(-0.3, 0.5), i(1.5, 1.1))),
            ),
        ),
        (
            "gauss-plus".into(),
            CorpusFunction::Gaussian(ModulatedGaussian {
                amplitude: C64::new(1.0, 0.0),
                centre,
                width: 2.0,
                omega: 4.0,
            }),
        ),
        (
            "gauss-minus".into(),
            CorpusFunction::Gaussian(ModulatedGaussian {
                amplitude: C64::new(1.0, 0.0),
                centre,
                width: 2.0,
                omega: -4.0,
            }),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parts_match_projection() {
        let grid = Grid::new(50.0, 4096).unwrap();
        for (name, f) in standard(0.0) {
            let CorpusFunction::Rational(r) = f else {
                continue;
            };
            let field = r.sample(&grid);
            let total = grid.norm(&field);
            for sign in [Sign::Plus, Sign::Minus] {
                let exact = r.part(sign).sample(&grid);
                let err = grid.norm(&grid.riesz_project(&field, sign).sub(&exact));
                assert!(err < 1e-3 * total, "{name} {sign:?}: {err}");
            }
        }
    }

    #[test]
    fn pair_partial_fractions() {
        let a = C64::new(1.0, 0.6);
        let b = C64::new(-2.0, -0.9);
        let r = Rational::pair(C64::new(0.5, 0.0), a, b);
        let z = C64::new(0.3, 0.2);
        let direct = 0.5 / ((z - a) * (z - b));
        assert!((r.eval(z) - direct).norm() < 1e-14);
    }

    #[test]
    fn rational_continuation_matches_formula() {
        let grid = Grid::new(50.0, 4096).unwrap();
        let r = Rational::simple(C64::new(1.0, 0.0), C64::new(0.0, -0.8))
            .plus(Rational::pair(C64::new(1.0, 0.0), C64::new(1.0, -0.6), C64::new(-1.0, -1.2)));
        let z = C64::new(0.4, 1.0);
        let got = grid
            .analytic_continuation(&r.sample(&grid), Sign::Plus, z)
            .unwrap()[0];
        assert!((got - r.eval(z)).norm() < 1e-3, "{got} vs {}", r.eval(z));
    }

    #[test]
    fn gaussian_mostly_on_one_side() {
        let grid = Grid::new(50.0, 4096).unwrap();
        for (_, f) in standard(1.0) {
            let CorpusFunction::Gaussian(g) = f else {
                continue;
            };
            let field = g.sample(&grid);
            let other = match g.dominant_sign() {
                Sign::Plus => Sign::Minus,
                Sign::Minus => Sign::Plus,
            };
            let leak = grid.norm(&grid.riesz_project(&field, other)) / grid.norm(&field);
            assert!(leak < 1e-4, "{leak}");
            assert!(g.leak_bound() < 1e-10);
        }
    }
}
