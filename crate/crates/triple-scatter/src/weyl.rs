//! Matrix-valued Herglotz functions `M(z)` and extension parameters `(α, κ)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{
    herm_defect, min_eigenvalue, psd_defect, BranchedSqrt, CMatrix, KernelError, Side, C64, I,
    TOL_HERM,
};

pub const POLE_FLOOR: f64 = 1e-8;
pub const TOL_HERGLOTZ: f64 = 1e-9;
pub const TOL_BV: f64 = 1e-6;
pub const DEFAULT_EPS_LADDER: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeylError {
    #[error("z = {z} is within the pole floor of a pole at {pole}")]
    AtPole { z: C64, pole: f64 },
    #[error("boundary value did not converge (estimate {estimate:.3e} > {tol:.1e})")]
    NonConvergent { estimate: f64, tol: f64 },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Evaluation point: either off the real axis, or a real point with a side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z: C64,
    pub side: Option<Side>,
}

impl Point {
    pub fn new(z: C64) -> Self {
        Self { z, side: None }
    }

    pub fn above(k: f64) -> Self {
        Self {
            z: C64::new(k, 0.0),
            side: Some(Side::Above),
        }
    }

    pub fn below(k: f64) -> Self {
        Self {
            z: C64::new(k, 0.0),
            side: Some(Side::Below),
        }
    }

    /// The mirror point `z̄`, with the side flipped for boundary points.
    pub fn conj(self) -> Self {
        Self {
            z: self.z.conj(),
            side: self.side.map(|s| match s {
                Side::Above => Side::Below,
                Side::Below => Side::Above,
            }),
        }
    }

    /// True for `Im z > 0` and for `k + i0`.
    pub fn is_upper(self) -> bool {
        self.z.im > 0.0 || (self.z.im == 0.0 && self.side == Some(Side::Above))
    }

    pub fn is_lower(self) -> bool {
        self.z.im < 0.0 || (self.z.im == 0.0 && self.side == Some(Side::Below))
    }
}

impl From<C64> for Point {
    fn from(z: C64) -> Self {
        Point::new(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    M,
    S,
    Theta,
    ThetaHat,
    SigmaHat,
    Weight,
}

/// A matrix tagged with where it was evaluated and what it represents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSample {
    pub point: Point,
    pub quantity: Quantity,
    pub value: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub lambda: f64,
    pub residue: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// `M(z) = i√z I_n`
    StarGraph,
    /// `M(z) = V + i√z W + Σ A_j / (λ_j - z)`
    LeadRational {
        w: CMatrix,
        v: CMatrix,
        poles: Vec<Pole>,
    },
    /// Weyl matrix of `-d²/dx²` on `[0, ℓ]` with values and inward derivatives at both ends.
    Interval { length: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzModel {
    dim: usize,
    kind: ModelKind,
    branch: BranchedSqrt,
}

fn check_psd(name: &str, a: &CMatrix) -> Result<(), WeylError> {
    let tol = TOL_HERM * a.max_norm().max(1.0);
    let d = psd_defect(a).map_err(|_| WeylError::Invalid(format!("{name} is not Hermitian")))?;
    if d > tol {
        return Err(WeylError::Invalid(format!(
            "{name} is not positive semidefinite (λ_min = {:.3e})",
            -d
        )));
    }
    Ok(())
}

impl HerglotzModel {
    pub fn star_graph(n: usize) -> Result<Self, WeylError> {
        if n == 0 {
            return Err(WeylError::Invalid("star graph needs at least one lead".into()));
        }
        Ok(Self {
            dim: n,
            kind: ModelKind::StarGraph,
            branch: BranchedSqrt::ArgZeroTwoPi,
        })
    }

    pub fn lead_rational(w: CMatrix, v: CMatrix, poles: Vec<Pole>) -> Result<Self, WeylError> {
        let n = w.rows();
        let square_n = |m: &CMatrix| m.is_square() && m.rows() == n;
        if n == 0 || !square_n(&w) || !square_n(&v) || poles.iter().any(|p| !square_n(&p.residue)) {
            return Err(WeylError::Invalid(
                "W, V and all residues must be square of one size".into(),
            ));
        }
        check_psd("W", &w)?;
        if herm_defect(&v) > TOL_HERM * v.max_norm().max(1.0) {
            return Err(WeylError::Invalid("V is not Hermitian".into()));
        }
        for (j, p) in poles.iter().enumerate() {
            if !p.lambda.is_finite() {
                return Err(WeylError::Invalid(format!("pole {j} is not finite")));
            }
            check_psd(&format!("A_{j}"), &p.residue)?;
            if poles[..j].iter().any(|q| q.lambda == p.lambda) {
                return Err(WeylError::Invalid(format!("pole {} repeated", p.lambda)));
            }
        }
        Ok(Self::lead_rational_unchecked(w, v, poles))
    }

    /// Builds a lead model without validating `W`, `V` or the residues.
    ///
    /// Meant for exercising the validators on deliberately broken input.
    pub fn lead_rational_unchecked(w: CMatrix, v: CMatrix, poles: Vec<Pole>) -> Self {
        Self {
            dim: w.rows(),
            kind: ModelKind::LeadRational { w, v, poles },
            branch: BranchedSqrt::ArgZeroTwoPi,
        }
    }

    pub fn interval(length: f64) -> Result<Self, WeylError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(WeylError::Invalid(format!("interval length {length}")));
        }
        Ok(Self {
            dim: 2,
            kind: ModelKind::Interval { length },
            branch: BranchedSqrt::ArgZeroTwoPi,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn branch(&self) -> BranchedSqrt {
        self.branch
    }

    /// Real poles of `M`, for the rational and interval kinds. Interval poles are listed up to `k_max`.
    pub fn real_poles(&self, k_max: f64) -> Vec<f64> {
        match &self.kind {
            ModelKind::StarGraph => Vec::new(),
            ModelKind::LeadRational { poles, .. } => poles.iter().map(|p| p.lambda).collect(),
            ModelKind::Interval { length } => (1..)
                .map(|m| (std::f64::consts::PI * m as f64 / length).powi(2))
                .take_while(|&k| k <= k_max)
                .collect(),
        }
    }
}

/// `sin t / t`, accurate near 0.
fn sinc(t: C64) -> C64 {
    if t.norm() < 1e-3 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// Evaluates `M` at `point`.
pub fn eval_weyl(model: &HerglotzModel, point: Point) -> Result<OperatorSample, WeylError> {
    let z = point.z;
    let n = model.dim;
    let value = match &model.kind {
        ModelKind::StarGraph => {
            let s = model.branch.eval(z, point.side)?;
            CMatrix::scalar(n, I * s)
        }
        ModelKind::LeadRational { w, v, poles } => {
            let mut m = v.clone();
            if w.max_norm() > 0.0 {
                let s = model.branch.eval(z, point.side)?;
                m = &m + &w.scale(I * s);
            }
            for p in poles {
                let d = C64::new(p.lambda, 0.0) - z;
                if d.norm() < POLE_FLOOR {
                    return Err(WeylError::AtPole { z, pole: p.lambda });
                }
                m = &m + &p.residue.scale(d.inv());
            }
            m
        }
        ModelKind::Interval { length } => {
            // even in √z, so the side of the cut does not matter
            let s = model.branch.eval(z, point.side.or(Some(Side::Above)))?;
            let t = s * *length;
            let sc = sinc(t);
            if sc.norm() < POLE_FLOOR {
                let m = (t.re / std::f64::consts::PI).round();
                return Err(WeylError::AtPole {
                    z,
                    pole: (std::f64::consts::PI * m / length).powi(2),
                });
            }
            let q = (sc * *length).inv();
            let c = t.cos();
            CMatrix::from_rows(&[vec![-q * c, q], vec![q, -q * c]])?
        }
    };
    if !value.is_finite() {
        return Err(KernelError::NonFinite.into());
    }
    Ok(OperatorSample {
        point,
        quantity: Quantity::M,
        value,
    })
}

pub fn eval_m(model: &HerglotzModel, point: impl Into<Point>) -> Result<CMatrix, WeylError> {
    Ok(eval_weyl(model, point.into())?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub points: usize,
    /// max of `‖M(z)* - M(z̄)‖_max`
    pub reflection_defect: f64,
    /// max of `psd_defect(Im M(z))`
    pub psd_defect: f64,
    /// smallest eigenvalue of `Im M(z)` seen on the grid
    pub min_im_eigenvalue: f64,
    pub pass: bool,
}

/// Checks `M(z)* = M(z̄)` and `Im M(z) ⪰ 0` on points of the open upper half-plane.
pub fn validate_herglotz(
    model: &HerglotzModel,
    z_grid: &[C64],
) -> Result<ValidationReport, WeylError> {
    let mut refl = 0.0_f64;
    let mut psd = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    for &z in z_grid {
        if z.im <= 0.0 {
            return Err(WeylError::Invalid(format!("{z} is not in the upper half-plane")));
        }
        let m = eval_m(model, z)?;
        let mb = eval_m(model, z.conj())?;
        refl = refl.max((&m.adjoint() - &mb).max_norm());
        let lam = min_eigenvalue(&m.im_part())?;
        min_eig = min_eig.min(lam);
        psd = psd.max((-lam).max(0.0));
    }
    Ok(ValidationReport {
        points: z_grid.len(),
        reflection_defect: refl,
        psd_defect: psd,
        min_im_eigenvalue: min_eig,
        pass: refl <= TOL_HERGLOTZ && psd <= TOL_HERGLOTZ,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValue {
    pub sample: OperatorSample,
    /// Difference between the two highest-order extrapolants.
    pub estimate: f64,
}

/// Neville extrapolation to `ε = 0` of samples `f(ε_j)`. Returns the limit and the
/// difference between the two highest-order extrapolants.
pub fn extrapolate_to_zero(eps: &[f64], values: &[CMatrix]) -> (CMatrix, f64) {
    let m = eps.len();
    assert!(m >= 2 && values.len() == m);
    // tail[j] is the degree-j extrapolant through the j + 1 smallest ε
    let mut row: Vec<CMatrix> = values.to_vec();
    let mut tail = vec![values[m - 1].clone()];
    for j in 1..m {
        let mut next = Vec::with_capacity(m - j);
        for i in j..m {
            let (xi, xl) = (eps[i], eps[i - j]);
            let num = &row[i - j].scale_re(xi) - &row[i - j + 1].scale_re(xl);
            next.push(num.scale_re(1.0 / (xi - xl)));
        }
        tail.push(next[next.len() - 1].clone());
        row = next;
    }
    let best = tail[m - 1].clone();
    let est = (&best - &tail[m - 2]).max_norm();
    (best, est)
}

/// Boundary value `M(k + i0)` from samples `M(k + iε)` down the ladder.
pub fn boundary_value(
    model: &HerglotzModel,
    k: f64,
    eps_ladder: &[f64],
) -> Result<BoundaryValue, WeylError> {
    if eps_ladder.len() < 3 {
        return Err(WeylError::Invalid("the ε ladder needs at least three rungs".into()));
    }
    if eps_ladder.iter().any(|&e| !(e > 0.0)) || eps_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(WeylError::Invalid("the ε ladder must be positive and decreasing".into()));
    }
    // pole check on the axis itself
    if let Err(e @ WeylError::AtPole { .. }) = eval_weyl(model, Point::above(k)) {
        return Err(e);
    }
    let values = eps_ladder
        .iter()
        .map(|&e| eval_m(model, C64::new(k, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let (limit, estimate) = extrapolate_to_zero(eps_ladder, &values);
    let tol = TOL_BV * limit.max_norm().max(1.0);
    if !(estimate <= tol) {
        return Err(WeylError::NonConvergent { estimate, tol });
    }
    Ok(BoundaryValue {
        sample: OperatorSample {
            point: Point::above(k),
            quantity: Quantity::M,
            value: limit,
        },
        estimate,
    })
}

/// Extension parameters `(α, κ)` with `α ≻ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionParams {
    alpha: CMatrix,
    kappa: CMatrix,
    b_kappa: CMatrix,
    b_ii: CMatrix,
    chi_plus: CMatrix,
    chi_minus: CMatrix,
}

impl ExtensionParams {
    pub fn new(alpha: CMatrix, kappa: CMatrix) -> Result<Self, WeylError> {
        let n = alpha.rows();
        if !alpha.is_square() || !kappa.is_square() || kappa.rows() != n {
            return Err(WeylError::Invalid("α and κ must be square of one size".into()));
        }
        if !alpha.is_finite() || !kappa.is_finite() {
            return Err(WeylError::Invalid("non-finite entries in α or κ".into()));
        }
        let scale = alpha.max_norm().max(1.0);
        if herm_defect(&alpha) > TOL_HERM * scale {
            return Err(WeylError::Invalid("α is not Hermitian".into()));
        }
        let lam = min_eigenvalue(&alpha)?;
        if !(lam > 1e-12 * scale) {
            return Err(WeylError::Invalid(format!(
                "α must be positive definite (λ_min = {lam:.3e})"
            )));
        }
        let id = CMatrix::identity(n);
        let b_kappa = (&(&alpha * &kappa) * &alpha).scale_re(0.5);
        let b_ii = (&alpha * &alpha).scale(I * 0.5);
        let ik = kappa.scale(I);
        let chi_plus = (&id + &ik).scale_re(0.5);
        let chi_minus = (&id - &ik).scale_re(0.5);
        Ok(Self {
            alpha,
            kappa,
            b_kappa,
            b_ii,
            chi_plus,
            chi_minus,
        })
    }

    /// `α = √2 I`, for which `B_κ = κ` and `S` is the Cayley transform of `M`.
    pub fn sqrt2(kappa: CMatrix) -> Result<Self, WeylError> {
        let n = kappa.rows();
        Self::new(CMatrix::scalar(n, C64::new(2f64.sqrt(), 0.0)), kappa)
    }

    pub fn dim(&self) -> usize {
        self.alpha.rows()
    }

    pub fn alpha(&self) -> &CMatrix {
        &self.alpha
    }

    pub fn kappa(&self) -> &CMatrix {
        &self.kappa
    }

    /// `B_κ = ακα / 2`
    pub fn b_kappa(&self) -> &CMatrix {
        &self.b_kappa
    }

    /// `B_{iI} = iα² / 2`
    pub fn b_ii(&self) -> &CMatrix {
        &self.b_ii
    }

    /// `B*_{iI} = -iα² / 2`
    pub fn b_ii_adjoint(&self) -> CMatrix {
        self.b_ii.adjoint()
    }

    /// `χ⁺ = (I + iκ) / 2`
    pub fn chi_plus(&self) -> &CMatrix {
        &self.chi_plus
    }

    /// `χ⁻ = (I - iκ) / 2`
    pub fn chi_minus(&self) -> &CMatrix {
        &self.chi_minus
    }

    pub fn is_self_adjoint(&self) -> bool {
        herm_defect(&self.kappa) <= 1e-12 * self.kappa.max_norm().max(1.0)
    }

    pub fn is_sqrt2_alpha(&self) -> bool {
        let target = CMatrix::scalar(self.dim(), C64::new(2f64.sqrt(), 0.0));
        (&self.alpha - &target).max_norm() <= 1e-14
    }

    /// Same α, different κ.
    pub fn with_kappa(&self, kappa: CMatrix) -> Result<Self, WeylError> {
        Self::new(self.alpha.clone(), kappa)
    }
}

/// A small catalog of models used by the validation suites.
pub fn catalog() -> Vec<(String, HerglotzModel)> {
    let c = C64::new;
    let w = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.2, 0.1)], vec![c(0.2, -0.1), c(0.5, 0.0)]])
        .expect("static shape");
    let v = CMatrix::from_rows(&[vec![c(0.3, 0.0), c(0.0, 0.1)], vec![c(0.0, -0.1), c(-0.2, 0.0)]])
        .expect("static shape");
    let a1 = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.5, 0.0)], vec![c(0.5, 0.0), c(0.25, 0.0)]])
        .expect("static shape");
    let a2 = CMatrix::from_real_diag(&[0.3, 0.7]);
    let lead = HerglotzModel::lead_rational(
        w,
        v,
        vec![
            Pole { lambda: -1.5, residue: a1 },
            Pole { lambda: 2.0, residue: a2 },
        ],
    )
    .expect("catalog lead model is valid");
    vec![
        ("star-1".into(), HerglotzModel::star_graph(1).expect("n > 0")),
        ("star-2".into(), HerglotzModel::star_graph(2).expect("n > 0")),
        ("star-3".into(), HerglotzModel::star_graph(3).expect("n > 0")),
        ("lead-2".into(), lead),
        ("interval-1".into(), HerglotzModel::interval(1.0).expect("ℓ > 0")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_pole_model() -> HerglotzModel {
        HerglotzModel::lead_rational(
            CMatrix::zeros(1, 1),
            CMatrix::zeros(1, 1),
            vec![Pole {
                lambda: 0.0,
                residue: CMatrix::identity(1),
            }],
        )
        .unwrap()
    }

    #[test]
    fn star_graph_examples() {
        let m = HerglotzModel::star_graph(1).unwrap();
        let a = eval_m(&m, Point::above(1.0)).unwrap();
        assert!((a[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        let b = eval_m(&m, c(0.0, 1.0)).unwrap();
        let want = c(-1.0, 1.0) / 2f64.sqrt();
        assert!((b[(0, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn lead_rational_single_pole() {
        let m = eval_m(&scalar_pole_model(), c(0.0, 1.0)).unwrap();
        assert!((m[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn at_pole_is_reported() {
        let err = eval_m(&scalar_pole_model(), c(0.0, 1e-9)).unwrap_err();
        assert!(matches!(err, WeylError::AtPole { .. }));
        let iv = HerglotzModel::interval(1.0).unwrap();
        let pole = std::f64::consts::PI.powi(2);
        let err = eval_m(&iv, Point::above(pole)).unwrap_err();
        assert!(matches!(err, WeylError::AtPole { pole: p, .. } if (p - pole).abs() < 1e-12));
    }

    #[test]
    fn star_graph_needs_side_on_cut() {
        let m = HerglotzModel::star_graph(1).unwrap();
        assert!(matches!(
            eval_m(&m, c(2.0, 0.0)),
            Err(WeylError::Kernel(KernelError::OnCutWithoutSide(_)))
        ));
        // negative axis is off the cut
        let v = eval_m(&m, c(-4.0, 0.0)).unwrap();
        assert!((v[(0, 0)] - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn interval_at_zero_is_finite() {
        let m = eval_m(&HerglotzModel::interval(2.0).unwrap(), Point::above(0.0)).unwrap();
        assert!((m[(0, 0)] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((m[(0, 1)] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn interval_matches_shooting_at_negative_energy() {
        // z = -q²: u = cosh, sinh solutions; M11 = -q coth(qℓ), M12 = q / sinh(qℓ)
        let (q, l) = (1.3, 0.8);
        let m = eval_m(&HerglotzModel::interval(l).unwrap(), c(-q * q, 0.0)).unwrap();
        assert!((m[(0, 0)].re + q / (q * l).tanh()).abs() < 1e-13);
        assert!((m[(0, 1)].re - q / (q * l).sinh()).abs() < 1e-13);
        assert!(m.max_norm() > 0.0 && m.im_part().max_norm() < 1e-15);
    }

    #[test]
    fn validate_detects_negative_residue() {
        let bad = HerglotzModel::lead_rational_unchecked(
            CMatrix::zeros(1, 1),
            CMatrix::zeros(1, 1),
            vec![Pole {
                lambda: 0.0,
                residue: CMatrix::scalar(1, c(-1.0, 0.0)),
            }],
        );
        let r = validate_herglotz(&bad, &[c(0.5, 1.0), c(-1.0, 0.3)]).unwrap();
        assert!(!r.pass);
        assert!(r.psd_defect > 0.1);
    }

    #[test]
    fn construction_rejects_invalid_data() {
        let neg = CMatrix::from_real_diag(&[-1.0]);
        assert!(HerglotzModel::lead_rational(neg.clone(), CMatrix::zeros(1, 1), vec![]).is_err());
        let nh = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        assert!(HerglotzModel::lead_rational(CMatrix::zeros(2, 2), nh, vec![]).is_err());
        let dup = vec![
            Pole { lambda: 1.0, residue: CMatrix::identity(1) },
            Pole { lambda: 1.0, residue: CMatrix::identity(1) },
        ];
        assert!(HerglotzModel::lead_rational(CMatrix::zeros(1, 1), CMatrix::zeros(1, 1), dup).is_err());
        assert!(HerglotzModel::interval(0.0).is_err());
        assert!(HerglotzModel::star_graph(0).is_err());
    }

    #[test]
    fn boundary_value_examples() {
        let star = HerglotzModel::star_graph(1).unwrap();
        let bv = boundary_value(&star, 4.0, &DEFAULT_EPS_LADDER).unwrap();
        assert!((bv.sample.value[(0, 0)] - c(0.0, 2.0)).norm() < 1e-10);
        let bv = boundary_value(&star, -1.0, &DEFAULT_EPS_LADDER).unwrap();
        assert!((bv.sample.value[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-10);
        let bv = boundary_value(&scalar_pole_model(), 1.0, &DEFAULT_EPS_LADDER).unwrap();
        assert!((bv.sample.value[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-10);
        assert!(bv.sample.value.im_part().max_norm() < 1e-10);
    }

    #[test]
    fn boundary_value_is_accurate_near_small_energies() {
        let star = HerglotzModel::star_graph(1).unwrap();
        let bv = boundary_value(&star, 0.1, &DEFAULT_EPS_LADDER).unwrap();
        let exact = eval_m(&star, Point::above(0.1)).unwrap();
        assert!((&bv.sample.value - &exact).max_norm() < 1e-11);
    }

    #[test]
    fn boundary_value_flags_threshold_and_poles() {
        let star = HerglotzModel::star_graph(1).unwrap();
        assert!(matches!(
            boundary_value(&star, 0.0, &DEFAULT_EPS_LADDER),
            Err(WeylError::NonConvergent { .. })
        ));
        assert!(matches!(
            boundary_value(&scalar_pole_model(), 0.0, &DEFAULT_EPS_LADDER),
            Err(WeylError::AtPole { .. })
        ));
        assert!(boundary_value(&star, 1.0, &[1e-2, 1e-3]).is_err());
        assert!(boundary_value(&star, 1.0, &[1e-3, 1e-2, 1e-4]).is_err());
    }

    #[test]
    fn neville_is_exact_for_polynomials() {
        let eps = [0.4, 0.2, 0.1, 0.05];
        let f = |e: f64| CMatrix::scalar(1, c(1.0 + 2.0 * e - 3.0 * e * e, -e));
        let vals: Vec<_> = eps.iter().map(|&e| f(e)).collect();
        let (lim, est) = extrapolate_to_zero(&eps, &vals);
        assert!((lim[(0, 0)] - c(1.0, 0.0)).norm() < 1e-13);
        assert!(est < 1e-13);
    }

    #[test]
    fn extension_params_derived_quantities() {
        let kappa = CMatrix::from_real_diag(&[1.0, -1.0]);
        let e = ExtensionParams::sqrt2(kappa.clone()).unwrap();
        assert!((e.b_kappa() - &kappa).max_norm() < 1e-15);
        assert!((e.b_ii() - &CMatrix::scalar(2, I)).max_norm() < 1e-15);
        let sum = e.chi_plus() + e.chi_minus();
        assert_eq!(sum, CMatrix::identity(2));
        assert!(e.is_self_adjoint() && e.is_sqrt2_alpha());
    }

    #[test]
    fn extension_params_reject_singular_alpha() {
        let alpha = CMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(ExtensionParams::new(alpha, CMatrix::zeros(2, 2)).is_err());
        let alpha = CMatrix::from_real_diag(&[1.0, -1.0]);
        assert!(ExtensionParams::new(alpha, CMatrix::zeros(2, 2)).is_err());
        assert!(ExtensionParams::new(CMatrix::identity(2), CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn catalog_models_are_valid() {
        for (name, m) in catalog() {
            let r = validate_herglotz(&m, &[c(0.3, 0.7), c(-2.0, 0.1), c(5.0, 3.0)]).unwrap();
            assert!(r.pass, "{name}: {r:?}");
        }
    }
}
