//! Subcommand drivers. All file output happens here, on the calling thread.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;
use triple_scatter::hardy::corpus::standard;
use triple_scatter::hardy::measures::Setup;
use triple_scatter::hardy::{smooth_vector, ExportedVector, Grid, HardyError, ModelVector, SymbolTrack};
use triple_scatter::scatter::{scan, ScatterError};

use crate::config::{matrix_to_rows, ConfigError, Format, MatrixRows, RunConfig};
use crate::report::Report;
use crate::suites::{run_all, Context, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SKIPPED: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Hardy(#[from] HardyError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_FAILED,
        }
    }
}

pub struct Options {
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Corrupts the κ sign fed to the oracle; for exercising the failure path.
    pub sabotage_kappa_sign: bool,
}

fn out_dir(config: &RunConfig, opts: &Options) -> PathBuf {
    opts.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, text))
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

#[derive(Serialize)]
struct ScanSample {
    k: f64,
    sigma_hat: Option<MatrixRows>,
    weight: Option<MatrixRows>,
    unitarity_defect: Option<f64>,
    skipped: Option<String>,
}

#[derive(Serialize)]
struct ScanFile {
    version: &'static str,
    seed: u64,
    dim: usize,
    alpha: MatrixRows,
    kappa: MatrixRows,
    self_adjoint: bool,
    samples: Vec<ScanSample>,
}

/// Runs the scattering scan. Exit 0 when every point was computed, 2 when any was skipped.
pub fn run_scan(config: &RunConfig, opts: &Options) -> Result<i32, CliError> {
    let model = config.build_model()?;
    let ext = config.build_ext(model.dim(), opts.seed)?;
    let curve = scan(&ext, &model, &config.k_values())?;
    let dir = out_dir(config, opts);
    for f in &config.output.formats {
        match f {
            Format::Csv => write(&dir, "scattering.csv", &curve.to_csv())?,
            Format::Json => {
                let file = ScanFile {
                    version: env!("CARGO_PKG_VERSION"),
                    seed: opts.seed,
                    dim: curve.dim,
                    alpha: matrix_to_rows(&curve.alpha),
                    kappa: matrix_to_rows(&curve.kappa),
                    self_adjoint: curve.self_adjoint,
                    samples: curve
                        .samples
                        .iter()
                        .map(|s| ScanSample {
                            k: s.k,
                            sigma_hat: s.sigma_hat.as_ref().map(matrix_to_rows),
                            weight: s.weight.as_ref().map(matrix_to_rows),
                            unitarity_defect: s.unitarity_defect,
                            skipped: s.skipped.map(|r| r.code()),
                        })
                        .collect(),
                };
                let text = serde_json::to_string_pretty(&file).expect("scan serializes");
                write(&dir, "scattering.json", &text)?;
            }
        }
    }
    let skipped = curve.skipped().count();
    if skipped > 0 {
        log::warn!("{skipped} of {} points skipped", curve.samples.len());
        return Ok(EXIT_SKIPPED);
    }
    Ok(EXIT_OK)
}

/// Suite names with `all` expanded, in a fixed order.
pub fn expand_suites(names: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        let list: Vec<&str> = if n == "all" { SUITES.to_vec() } else { vec![n.as_str()] };
        for s in list {
            if !out.iter().any(|o| o == s) {
                out.push(s.to_string());
            }
        }
    }
    out
}

pub fn verify_report(config: &RunConfig, opts: &Options) -> Result<Report, CliError> {
    let suites = expand_suites(&config.suites);
    if suites.is_empty() {
        return Err(ConfigError::Invalid {
            field: "suites".into(),
            message: "verify needs at least one suite".into(),
        }
        .into());
    }
    let model = config.build_model()?;
    let ext = config.build_ext(model.dim(), opts.seed)?;
    let mut ctx = Context::new(model, ext, opts.seed, config.k_values(), config.hardy_grid());
    ctx.sabotage_kappa_sign = opts.sabotage_kappa_sign;
    let results = run_all(&suites, &ctx);
    Ok(Report::new(config, opts.seed, results))
}

/// Runs the verification suites and writes `report.json` and `report.txt`.
pub fn run_verify(config: &RunConfig, opts: &Options) -> Result<i32, CliError> {
    let report = verify_report(config, opts)?;
    let dir = out_dir(config, opts);
    write(&dir, "report.json", &report.to_json())?;
    write(&dir, "report.txt", &report.to_text())?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct CorpusEntry {
    name: String,
    /// `(g̃, g) = (f, 0)`
    raw: ExportedVector,
    /// `A₀`-smooth vector with `g̃ = f`
    smooth: ExportedVector,
    masked: usize,
}

#[derive(Serialize)]
struct CorpusFile {
    version: &'static str,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    l: f64,
    centre: f64,
    entries: Vec<CorpusEntry>,
}

/// Writes the Hardy-space test corpus on the standard star-graph symbol.
pub fn run_corpus(config: &RunConfig, opts: &Options) -> Result<i32, CliError> {
    let h = config.hardy_grid();
    let setup = Setup::standard();
    let grid = Arc::new(Grid::new(h.l, h.n)?);
    let track = Arc::new(SymbolTrack::from_model(grid.clone(), &setup.ext, &setup.model)?);
    let mut entries = Vec::new();
    for (name, f) in standard(setup.centre) {
        let field = f.sample(&grid);
        let raw = ModelVector::new(track.clone(), field.clone(), triple_scatter::hardy::Field::zeros(grid.n(), 1))?;
        let smooth = smooth_vector(track.clone(), &setup.ext, &field)?;
        entries.push(CorpusEntry {
            name,
            raw: raw.export(),
            masked: smooth.masked_count(),
            smooth: smooth.value.export(),
        });
    }
    let file = CorpusFile {
        version: env!("CARGO_PKG_VERSION"),
        n: h.n,
        l: h.l,
        centre: setup.centre,
        entries,
    };
    let text = serde_json::to_string(&file).expect("corpus serializes");
    write(&out_dir(config, opts), "corpus.json", &text)?;
    Ok(EXIT_OK)
}

/// JSON schema of the run configuration.
pub fn schema() -> serde_json::Value {
    let matrix = serde_json::json!({
        "type": "array",
        "description": "rows of [re, im] pairs",
        "items": {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}}
    });
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "RunConfig",
        "type": "object",
        "additionalProperties": false,
        "required": ["model"],
        "properties": {
            "model": {
                "oneOf": [
                    {"type": "object", "additionalProperties": false, "required": ["kind", "n"],
                     "properties": {"kind": {"const": "star_graph"}, "n": {"type": "integer", "minimum": 1}}},
                    {"type": "object", "additionalProperties": false, "required": ["kind", "w", "v"],
                     "properties": {"kind": {"const": "lead_rational"}, "w": matrix, "v": matrix,
                        "poles": {"type": "array", "items": {"type": "object", "additionalProperties": false,
                            "required": ["lambda", "residue"],
                            "properties": {"lambda": {"type": "number"}, "residue": matrix}}}}},
                    {"type": "object", "additionalProperties": false, "required": ["kind", "length"],
                     "properties": {"kind": {"const": "interval"}, "length": {"type": "number", "exclusiveMinimum": 0}}},
                    {"type": "object", "additionalProperties": false, "required": ["kind", "name"],
                     "properties": {"kind": {"const": "catalog"}, "name": {"type": "string"}}}
                ]
            },
            "alpha": {"oneOf": [{"const": "sqrt2I"}, matrix], "default": "sqrt2I"},
            "kappa": {"oneOf": [{"type": "string", "pattern": "^(zero|iI|random|diag:\\[.*\\])$"}, matrix], "default": "zero"},
            "k_grid": {"type": "object", "additionalProperties": false,
                "properties": {"min": {"type": "number"}, "max": {"type": "number"},
                    "count": {"type": "integer", "minimum": 1},
                    "spacing": {"enum": ["linear", "log"]}}},
            "hardy": {"type": "object", "additionalProperties": false, "required": ["N", "L"],
                "properties": {"N": {"type": "integer", "minimum": 512}, "L": {"type": "number", "exclusiveMinimum": 0}}},
            "suites": {"type": "array", "items": {"enum": SUITES.iter().copied().chain(["all"]).collect::<Vec<_>>()}},
            "output": {"type": "object", "additionalProperties": false,
                "properties": {"dir": {"type": "string"},
                    "formats": {"type": "array", "items": {"enum": ["csv", "json"]}, "minItems": 1}}}
        }
    })
}
