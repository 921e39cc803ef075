//! Verification suites. Each suite returns residual checks against fixed tolerances.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use triple_scatter::chartheta::{
    cayley_form, char_function, resolvent_style_residuals, theta, theta_hat, theta_hat_inverse,
    theta_hat_via_s, theta_inverse, theta_via_s,
};
use triple_scatter::hardy::measures::{decay, measures, Measures, Setup, DECAY_TIMES};
use triple_scatter::kernel::inverse_residual;
use triple_scatter::scatter::{
    scan, scattering_matrix, scattering_matrix_from_m, scattering_via_model_form,
    vertex_scattering_oracle, weights_from_m,
};
use triple_scatter::weyl::{boundary_value, catalog, validate_herglotz, DEFAULT_EPS_LADDER};
use triple_scatter::{CMatrix, ExtensionParams, HerglotzModel, C64};

use crate::config::{random_hermitian, rng, HardyGrid};

pub const SUITES: [&str; 12] = [
    "herglotz",
    "cayley",
    "theta-identities",
    "inverse-formulas",
    "weight-identity",
    "oracle-equivalence",
    "hardy-convergence",
    "gamma-identity",
    "resolvent-identity",
    "isometry",
    "decay",
    "wave-maps",
];

pub const TOL_HERGLOTZ: f64 = 1e-10;
pub const TOL_CAYLEY: f64 = 1e-11;
pub const TOL_THETA: f64 = 1e-10;
pub const TOL_WEIGHT: f64 = 1e-10;
pub const TOL_MODEL_FORM: f64 = 1e-9;
pub const TOL_ORACLE: f64 = 1e-9;
pub const TOL_IDENTITY_PAIR: f64 = 1e-12;
pub const TOL_UNITARITY: f64 = 1e-8;
pub const TOL_HARDY: f64 = 1e-3;
pub const TOL_WAVE_NORM: f64 = 0.05;
pub const TOL_POINTWISE: f64 = 1e-10;
/// Trend checks report the largest ratio of consecutive values; strictly decreasing means below 1.
pub const TOL_TREND: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub tag: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(tag: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self {
            tag: tag.into(),
            residual,
            tol,
            pass: residual < tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub suite: String,
    pub tag: String,
    pub at: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub skipped: Vec<Skip>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            checks: Vec::new(),
            skipped: Vec::new(),
        }
    }

    fn skip(&mut self, tag: &str, at: String, reason: impl ToString) {
        self.skipped.push(Skip {
            suite: self.name.clone(),
            tag: tag.into(),
            at,
            reason: reason.to_string(),
        });
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Everything a suite may need. Hardy measures are computed once and shared.
pub struct Context {
    pub model: HerglotzModel,
    pub ext: ExtensionParams,
    pub seed: u64,
    pub k_values: Vec<f64>,
    pub hardy: HardyGrid,
    /// Flips the sign of κ fed to the plane-wave oracle.
    pub sabotage_kappa_sign: bool,
    hardy_runs: OnceLock<Result<Vec<Measures>, String>>,
}

impl Context {
    pub fn new(
        model: HerglotzModel,
        ext: ExtensionParams,
        seed: u64,
        k_values: Vec<f64>,
        hardy: HardyGrid,
    ) -> Self {
        Self {
            model,
            ext,
            seed,
            k_values,
            hardy,
            sabotage_kappa_sign: false,
            hardy_runs: OnceLock::new(),
        }
    }

    fn hardy_sizes(&self) -> [usize; 3] {
        let n = self.hardy.n;
        [n / 2, n, 2 * n]
    }

    fn hardy_measures(&self) -> &Result<Vec<Measures>, String> {
        self.hardy_runs.get_or_init(|| {
            let setup = Setup::standard();
            self.hardy_sizes()
                .iter()
                .map(|&n| measures(&setup, n, self.hardy.l).map_err(|e| e.to_string()))
                .collect()
        })
    }
}

pub fn run_suite(name: &str, ctx: &Context) -> SuiteResult {
    let mut r = SuiteResult::new(name);
    match name {
        "herglotz" => herglotz(ctx, &mut r),
        "cayley" => cayley(ctx, &mut r),
        "theta-identities" => theta_identities(ctx, &mut r),
        "inverse-formulas" => inverse_formulas(ctx, &mut r),
        "weight-identity" => weight_identity(ctx, &mut r),
        "oracle-equivalence" => oracle_equivalence(ctx, &mut r),
        "hardy-convergence" => hardy_trend(ctx, &mut r, &[("k-orthogonality", |m| m.orthogonality_leak), ("smooth-resolvent", |m| m.smooth_resolvent)]),
        "gamma-identity" => hardy_trend(ctx, &mut r, &[("gamma-identity", |m| m.gamma)]),
        "resolvent-identity" => hardy_trend(ctx, &mut r, &[("resolvent-identity", |m| m.resolvent_identity)]),
        "isometry" => isometry(ctx, &mut r),
        "decay" => decay_trend(ctx, &mut r),
        "wave-maps" => wave_maps(ctx, &mut r),
        _ => r.checks.push(Check::new(format!("unknown-suite/{name}"), f64::INFINITY, 0.0)),
    }
    r
}

/// Runs suites on scoped threads, returning results in the requested order.
pub fn run_all(names: &[String], ctx: &Context) -> Vec<SuiteResult> {
    std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|n| s.spawn(move || run_suite(n, ctx)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    })
}

fn fmt_z(z: C64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

/// 100 points of the open upper half-plane.
pub fn upper_grid() -> Vec<C64> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        let x = -5.0 + 10.0 * i as f64 / 9.0 + 0.013;
        for j in 0..10 {
            let y = 10f64.powf(-2.0 + 3.0 * j as f64 / 9.0);
            out.push(C64::new(x, y));
        }
    }
    out
}

fn models(ctx: &Context) -> Vec<(String, HerglotzModel)> {
    let mut m = catalog();
    m.push(("config".into(), ctx.model.clone()));
    m
}

/// A Hermitian positive definite α that is not a multiple of the identity.
fn generic_alpha(n: usize) -> CMatrix {
    let rows: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        C64::new(1.0 + 0.25 * i as f64, 0.0)
                    } else if i < j {
                        C64::new(0.1, 0.05)
                    } else {
                        C64::new(0.1, -0.05)
                    }
                })
                .collect()
        })
        .collect();
    CMatrix::from_rows(&rows).expect("square")
}

/// Extension parameters for the Θ suites: the configured ones for the configured model,
/// a generic α with a seeded κ for catalog models.
fn theta_ext(ctx: &Context, name: &str, idx: usize, n: usize) -> ExtensionParams {
    if name == "config" {
        return ctx.ext.clone();
    }
    let kappa = random_hermitian(n, &mut rng(ctx.seed.wrapping_add(1000 + idx as u64)));
    ExtensionParams::new(generic_alpha(n), kappa).expect("α is positive definite")
}

fn herglotz(ctx: &Context, r: &mut SuiteResult) {
    let grid = upper_grid();
    for (name, model) in models(ctx) {
        match validate_herglotz(&model, &grid) {
            Ok(v) => {
                r.checks.push(Check::new(format!("herglotz-reflection/{name}"), v.reflection_defect, TOL_HERGLOTZ));
                r.checks.push(Check::new(format!("herglotz-positivity/{name}"), v.psd_defect, TOL_HERGLOTZ));
            }
            Err(e) => r.skip(&format!("herglotz/{name}"), "grid".into(), e),
        }
    }
}

fn cayley(ctx: &Context, r: &mut SuiteResult) {
    for (name, model) in models(ctx) {
        let n = model.dim();
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(n, n)).expect("valid");
        let tag = format!("cayley/{name}");
        let mut worst = 0.0_f64;
        for z in upper_grid() {
            match (char_function(&ext, &model, z), cayley_form(&model, z)) {
                (Ok(a), Ok(b)) => worst = worst.max((&a.s - &b.s).max_norm()),
                (Err(e), _) | (_, Err(e)) => r.skip(&tag, fmt_z(z), e),
            }
        }
        r.checks.push(Check::new(tag, worst, TOL_CAYLEY));
    }
}

fn theta_identities(ctx: &Context, r: &mut SuiteResult) {
    for (idx, (name, model)) in models(ctx).into_iter().enumerate() {
        let ext = theta_ext(ctx, &name, idx, model.dim());
        let mut worst = [0.0_f64; 4];
        let tags = ["theta-from-s", "theta-hat-from-s", "theta-inverse", "theta-hat-inverse"];
        for up in upper_grid() {
            let lo = up.conj();
            let lower = (|| {
                let t = theta(&ext, &model, lo)?.value;
                let via = theta_via_s(&ext, &model, lo)?;
                let inv = theta_inverse(&ext, &model, lo)?;
                Ok::<_, triple_scatter::chartheta::ThetaError>(((&t - &via).max_norm(), inverse_residual(&inv, &t)))
            })();
            match lower {
                Ok((a, b)) => {
                    worst[0] = worst[0].max(a);
                    worst[2] = worst[2].max(b);
                }
                Err(e) => r.skip(&format!("theta/{name}"), fmt_z(lo), e),
            }
            let upper = (|| {
                let t = theta_hat(&ext, &model, up)?.value;
                let via = theta_hat_via_s(&ext, &model, up)?;
                let inv = theta_hat_inverse(&ext, &model, up)?;
                Ok::<_, triple_scatter::chartheta::ThetaError>(((&t - &via).max_norm(), inverse_residual(&inv, &t)))
            })();
            match upper {
                Ok((a, b)) => {
                    worst[1] = worst[1].max(a);
                    worst[3] = worst[3].max(b);
                }
                Err(e) => r.skip(&format!("theta-hat/{name}"), fmt_z(up), e),
            }
        }
        for (tag, w) in tags.iter().zip(worst) {
            r.checks.push(Check::new(format!("{tag}/{name}"), w, TOL_THETA));
        }
    }
}

fn inverse_formulas(ctx: &Context, r: &mut SuiteResult) {
    for (idx, (name, model)) in models(ctx).into_iter().enumerate() {
        let ext = theta_ext(ctx, &name, idx, model.dim());
        let mut worst = [0.0_f64; 4];
        for z in upper_grid() {
            match resolvent_style_residuals(&ext, &model, z) {
                Ok(v) => {
                    for (w, x) in worst.iter_mut().zip([v.one_plus_s, v.one_plus_s_star, v.chi_minus, v.chi_plus]) {
                        *w = w.max(x);
                    }
                }
                Err(e) => r.skip(&format!("inverse/{name}"), fmt_z(z), e),
            }
        }
        let tags = ["inverse-one-plus-s", "inverse-one-plus-s-star", "inverse-chi-minus", "inverse-chi-plus"];
        for (tag, w) in tags.iter().zip(worst) {
            r.checks.push(Check::new(format!("{tag}/{name}"), w, TOL_THETA));
        }
    }
}

fn weight_identity(ctx: &Context, r: &mut SuiteResult) {
    let mut list: Vec<(String, HerglotzModel)> = catalog()
        .into_iter()
        .filter(|(n, _)| n.starts_with("star") || n.starts_with("lead"))
        .collect();
    list.push(("config".into(), ctx.model.clone()));
    for (idx, (name, model)) in list.into_iter().enumerate() {
        let n = model.dim();
        let ext = if name == "config" && ctx.ext.is_sqrt2_alpha() {
            ctx.ext.clone()
        } else {
            let kappa = random_hermitian(n, &mut rng(ctx.seed.wrapping_add(2000 + idx as u64)));
            ExtensionParams::sqrt2(kappa).expect("valid")
        };
        let (mut wi, mut wg, mut mf) = (0.0_f64, 0.0_f64, 0.0_f64);
        for &k in &ctx.k_values {
            let at = format!("k={k:.6}");
            let m = match boundary_value(&model, k, &DEFAULT_EPS_LADDER) {
                Ok(b) => b.sample.value,
                Err(e) => {
                    r.skip(&format!("weight/{name}"), at, e);
                    continue;
                }
            };
            match weights_from_m(k, &m) {
                Ok(w) => {
                    wi = wi.max(w.identity_residual);
                    let scale = (1.0 + m.max_norm()).powi(2);
                    wg = wg.max(w.g_residual / scale);
                }
                Err(e) => r.skip(&format!("weight-identity/{name}"), at.clone(), e),
            }
            let sigma = scattering_matrix_from_m(&m, ext.b_kappa());
            let form = scattering_via_model_form(&ext, &model, k);
            match (sigma, form) {
                (Ok(s), Ok(f)) => mf = mf.max((&s - &f.conjugated).max_norm()),
                (Err(e), _) => r.skip(&format!("sigma-vs-model-form/{name}"), at, e),
                (_, Err(e)) => r.skip(&format!("sigma-vs-model-form/{name}"), at, e),
            }
        }
        r.checks.push(Check::new(format!("weight-identity/{name}"), wi, TOL_WEIGHT));
        r.checks.push(Check::new(format!("weight-g-consistency/{name}"), wg, TOL_WEIGHT));
        r.checks.push(Check::new(format!("sigma-vs-model-form/{name}"), mf, TOL_MODEL_FORM));
    }
}

/// The fixed oracle sweep: star graphs with 1, 2, 3 and 5 leads, five seeded κ each,
/// 40 points in `[0.1, 10]`.
pub fn oracle_sweep(seed: u64) -> Vec<(usize, CMatrix)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for n in [1, 2, 3, 5] {
        for _ in 0..5 {
            out.push((n, random_hermitian(n, &mut r)));
        }
    }
    out
}

pub fn oracle_k_grid() -> Vec<f64> {
    (0..40).map(|i| 0.1 + 9.9 * i as f64 / 39.0).collect()
}

fn oracle_equivalence(ctx: &Context, r: &mut SuiteResult) {
    let ks = oracle_k_grid();
    let mut sweep = oracle_sweep(ctx.seed);
    if matches!(ctx.model.kind(), triple_scatter::weyl::ModelKind::StarGraph)
        && ctx.ext.is_sqrt2_alpha()
        && ctx.ext.is_self_adjoint()
    {
        sweep.push((ctx.model.dim(), ctx.ext.kappa().clone()));
    }
    let (mut oracle, mut unit, mut ident) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (n, kappa) in sweep {
        let model = HerglotzModel::star_graph(n).expect("n > 0");
        let ext = ExtensionParams::sqrt2(kappa.clone()).expect("valid");
        let fed = if ctx.sabotage_kappa_sign { kappa.scale_re(-1.0) } else { kappa };
        for &k in &ks {
            let at = format!("n={n},k={k:.6}");
            match (scattering_matrix(&ext, &model, k), vertex_scattering_oracle(&fed, k.sqrt())) {
                (Ok(s), Ok(o)) => oracle = oracle.max((&s - &o).max_norm()),
                (Err(e), _) => r.skip("sigma-vs-oracle", at, e),
                (_, Err(e)) => r.skip("sigma-vs-oracle", at, e),
            }
        }
        match scan(&ext, &model, &ks) {
            Ok(curve) => {
                unit = unit.max(curve.max_unitarity_defect());
                for s in curve.skipped() {
                    r.skip("weighted-unitarity", format!("n={n},k={:.6}", s.k), s.skipped.map(|x| x.code()).unwrap_or_default());
                }
            }
            Err(e) => r.skip("weighted-unitarity", format!("n={n}"), e),
        }
        let zero = ExtensionParams::sqrt2(CMatrix::zeros(n, n)).expect("valid");
        for &k in &ks {
            match scattering_matrix(&zero, &model, k) {
                Ok(s) => ident = ident.max((&s - &CMatrix::identity(n)).max_norm()),
                Err(e) => r.skip("identity-pair", format!("n={n},k={k:.6}"), e),
            }
        }
    }
    r.checks.push(Check::new("sigma-vs-oracle", oracle, TOL_ORACLE));
    r.checks.push(Check::new("identity-pair", ident, TOL_IDENTITY_PAIR));
    r.checks.push(Check::new("weighted-unitarity", unit, TOL_UNITARITY));
}

/// Largest ratio of consecutive values; below 1 iff strictly decreasing.
pub fn max_ratio(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

type Pick = fn(&Measures) -> f64;

fn hardy_trend(ctx: &Context, r: &mut SuiteResult, picks: &[(&str, Pick)]) {
    let runs = match ctx.hardy_measures() {
        Ok(m) => m,
        Err(e) => {
            for (tag, _) in picks {
                r.skip(tag, format!("N={}", ctx.hardy.n), e);
                r.checks.push(Check::new(*tag, f64::INFINITY, TOL_HARDY));
            }
            return;
        }
    };
    for (tag, pick) in picks {
        let vals: Vec<f64> = runs.iter().map(pick).collect();
        r.checks.push(Check::new(*tag, vals[1], TOL_HARDY));
        r.checks.push(Check::new(format!("{tag}-trend"), max_ratio(&vals), TOL_TREND));
    }
    for m in runs {
        if m.masked > 0 {
            r.skip("masked-points", format!("N={}", m.n), format!("{} points", m.masked));
        }
    }
}

fn isometry(ctx: &Context, r: &mut SuiteResult) {
    hardy_trend(ctx, r, &[("isometry", |m| m.isometry)]);
    // only the value at the configured size is a criterion
    r.checks.retain(|c| c.tag == "isometry");
}

fn decay_trend(ctx: &Context, r: &mut SuiteResult) {
    match decay(&Setup::standard(), ctx.hardy.n, ctx.hardy.l, &DECAY_TIMES) {
        Ok(v) => r.checks.push(Check::new("decay-trend", max_ratio(&v), TOL_TREND)),
        Err(e) => {
            r.skip("decay-trend", format!("N={}", ctx.hardy.n), e);
            r.checks.push(Check::new("decay-trend", f64::INFINITY, TOL_TREND));
        }
    }
}

fn wave_maps(ctx: &Context, r: &mut SuiteResult) {
    match crate::wave::wave_checks(ctx.hardy.n, ctx.hardy.l) {
        Ok(w) => {
            r.checks.push(Check::new("wave-composition", w.composition, TOL_POINTWISE));
            r.checks.push(Check::new("scattering-zero-kappa", w.zero_kappa, TOL_POINTWISE));
            r.checks.push(Check::new("scattering-vs-model-form", w.model_form, TOL_MODEL_FORM));
            r.checks.push(Check::new("wave-norm", w.norm_change, TOL_WAVE_NORM));
            if w.masked > 0 {
                r.skip("wave-maps", format!("N={}", ctx.hardy.n), format!("{} masked points", w.masked));
            }
        }
        Err(e) => {
            r.skip("wave-maps", format!("N={}", ctx.hardy.n), &e);
            r.checks.push(Check::new("wave-maps", f64::INFINITY, TOL_POINTWISE));
        }
    }
}
