//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};
use triple_scatter::hardy::measures::{decay, measures, Setup, DECAY_TIMES};
use triple_scatter::scatter::{scan, scattering_matrix};
use triple_scatter::{CMatrix, ExtensionParams, HerglotzModel, C64};
use triple_scatter_cli::config::{parse, HardyGrid};
use triple_scatter_cli::run::{verify_report, Options};
use triple_scatter_cli::suites::{oracle_k_grid, oracle_sweep, run_suite, Check, Context};

const SEED: u64 = 20240611;
const TOL_ORACLE: f64 = 1e-9;
const TOL_IDENTITY: f64 = 1e-12;
const TOL_UNITARY: f64 = 1e-8;
const WEIGHT_FLOOR: f64 = 1e-8;
const TOL_HARDY: f64 = 1e-3;
const L: f64 = 50.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail.push_str(&format!("; over the {:.0?} budget", limit));
        }
    }
    (o, took)
}

/// Plane-wave matching at a vertex joining `n` half-lines: `ψ_j = e^{-iqx} δ + S e^{iqx}`,
/// vertex condition `ψ'(0) = κ ψ(0)` gives `S = (iqI - κ)⁻¹(iqI + κ)`.
fn plane_wave(kappa: &CMatrix, q: f64) -> DMatrix<C64> {
    let n = kappa.rows();
    let k = DMatrix::from_fn(n, n, |i, j| kappa[(i, j)]);
    let iq = DMatrix::<C64>::identity(n, n) * C64::new(0.0, q);
    (&iq - &k).lu().solve(&(&iq + &k)).expect("iq - κ is invertible for Hermitian κ")
}

fn max_diff(a: &CMatrix, b: &DMatrix<C64>) -> f64 {
    let mut m = 0.0_f64;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0_f64;
    let mut points = 0;
    for (n, kappa) in oracle_sweep(SEED) {
        let model = HerglotzModel::star_graph(n).unwrap();
        let ext = ExtensionParams::sqrt2(kappa.clone()).unwrap();
        for k in oracle_k_grid() {
            match scattering_matrix(&ext, &model, k) {
                Ok(s) => worst = worst.max(max_diff(&s, &plane_wave(&kappa, k.sqrt()))),
                Err(e) => return outcome(false, format!("n={n} k={k}: {e}")),
            }
            points += 1;
        }
    }
    outcome(worst < TOL_ORACLE, format!("max |Σ̂ - S_v| = {worst:.2e} over {points} points"))
}

fn identity_pair() -> Outcome {
    let mut worst = 0.0_f64;
    for n in [1, 2, 3, 5] {
        let model = HerglotzModel::star_graph(n).unwrap();
        let ext = ExtensionParams::sqrt2(CMatrix::zeros(n, n)).unwrap();
        for k in oracle_k_grid() {
            let s = scattering_matrix(&ext, &model, k).unwrap();
            worst = worst.max((&s - &CMatrix::identity(n)).max_norm());
        }
    }
    outcome(worst < TOL_IDENTITY, format!("max |Σ̂ - I| = {worst:.2e}"))
}

fn weighted_unitarity() -> Outcome {
    let mut worst = 0.0_f64;
    let mut used = 0;
    for (n, kappa) in oracle_sweep(SEED) {
        let model = HerglotzModel::star_graph(n).unwrap();
        let ext = ExtensionParams::sqrt2(kappa).unwrap();
        let curve = scan(&ext, &model, &oracle_k_grid()).unwrap();
        for s in &curve.samples {
            let (Some(sigma), Some(w)) = (&s.sigma_hat, &s.weight) else {
                return outcome(false, format!("n={n} k={} skipped", s.k));
            };
            if w.max_norm() <= WEIGHT_FLOOR {
                continue;
            }
            let d = (&(&sigma.adjoint() * w) * sigma - w.clone()).max_norm();
            worst = worst.max(d);
            used += 1;
        }
    }
    outcome(worst < TOL_UNITARY, format!("max |Σ̂*WΣ̂ - W| = {worst:.2e} at {used} points"))
}

fn context() -> Context {
    let model = HerglotzModel::star_graph(2).unwrap();
    let ext = ExtensionParams::sqrt2(CMatrix::from_real_diag(&[1.0, -1.0])).unwrap();
    let ks = (0..40).map(|i| 0.1 + 9.9 * i as f64 / 39.0).collect();
    Context::new(model, ext, SEED, ks, HardyGrid::default())
}

fn from_suites(names: &[&str]) -> Outcome {
    let ctx = context();
    let mut checks: Vec<Check> = Vec::new();
    let mut skipped = 0;
    for n in names {
        let r = run_suite(n, &ctx);
        skipped += r.skipped.len();
        checks.extend(r.checks);
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} = {:.2e}", c.tag, c.residual))
        .collect();
    let worst = checks.iter().max_by(|a, b| (a.residual / a.tol).total_cmp(&(b.residual / b.tol))).unwrap();
    if failed.is_empty() && skipped == 0 {
        outcome(true, format!("{} checks, worst {} = {:.2e} (tol {:.0e})", checks.len(), worst.tag, worst.residual, worst.tol))
    } else {
        outcome(false, format!("failed: [{}], skipped points: {skipped}", failed.join(", ")))
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn hardy_convergence() -> Outcome {
    let setup = Setup::standard();
    let runs: Vec<_> = match [2048, 4096, 8192].iter().map(|&n| measures(&setup, n, L)).collect() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let series: [(&str, Vec<f64>); 4] = [
        ("k-orthogonality", runs.iter().map(|m| m.orthogonality_leak).collect()),
        ("smooth-resolvent", runs.iter().map(|m| m.smooth_resolvent).collect()),
        ("gamma-identity", runs.iter().map(|m| m.gamma).collect()),
        ("resolvent-identity", runs.iter().map(|m| m.resolvent_identity).collect()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v) in &series {
        pass &= strictly_decreasing(v) && v[1] < TOL_HARDY;
        parts.push(format!("{name} {:.1e}/{:.1e}/{:.1e}", v[0], v[1], v[2]));
    }
    outcome(pass, parts.join(", "))
}

fn isometry() -> Outcome {
    match measures(&Setup::standard(), 4096, L) {
        Ok(m) => outcome(m.isometry < TOL_HARDY, format!("relative defect {:.2e} at N = 4096", m.isometry)),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn decay_trend() -> Outcome {
    match decay(&Setup::standard(), 4096, L, &DECAY_TIMES) {
        Ok(v) => outcome(
            strictly_decreasing(&v),
            format!("t = {DECAY_TIMES:?}: {:.3e}, {:.3e}, {:.3e}", v[0], v[1], v[2]),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn determinism() -> Outcome {
    let config = parse(
        r#"{"model": {"kind": "star_graph", "n": 2}, "kappa": "random", "suites": ["all"]}"#,
        true,
    )
    .unwrap();
    let opts = Options {
        out: None,
        seed: SEED,
        sabotage_kappa_sign: false,
    };
    let hash = || {
        let r = verify_report(&config, &opts).unwrap();
        (hex_digest(&r.to_json()), r.pass)
    };
    let (a, pass_a) = hash();
    let (b, _) = hash();
    outcome(a == b && pass_a, format!("report sha256 {} / {}", &a[..16], &b[..16]))
}

fn hex_digest(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

type Criterion = (&'static str, Option<Duration>, Box<dyn FnOnce() -> Outcome>);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", Some(Duration::from_secs(5)), Box::new(oracle_equivalence)),
        ("identity pair", Some(Duration::from_secs(1)), Box::new(identity_pair)),
        ("weighted unitarity", None, Box::new(weighted_unitarity)),
        (
            "theta calculus",
            Some(Duration::from_secs(5)),
            Box::new(|| from_suites(&["theta-identities", "inverse-formulas", "cayley"])),
        ),
        ("weight identity", None, Box::new(|| from_suites(&["weight-identity"]))),
        ("herglotz validation", None, Box::new(|| from_suites(&["herglotz"]))),
        ("hardy convergence", Some(Duration::from_secs(60)), Box::new(hardy_convergence)),
        ("isometry", None, Box::new(isometry)),
        ("decay trend", None, Box::new(decay_trend)),
        ("determinism", None, Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let (o, took) = timed(limit, f);
        println!(
            "{} {:>2} {:<20} {:>8.2?}  {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            took,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("all criteria passed");
        ExitCode::SUCCESS
    }
}
