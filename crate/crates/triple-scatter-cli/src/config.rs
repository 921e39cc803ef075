//! Run configuration: parsing, validation and construction of models and parameters.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use triple_scatter::weyl::{catalog, Pole};
use triple_scatter::{CMatrix, ExtensionParams, HerglotzModel, C64};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse {
        path: String,
        message: String,
        line: usize,
        column: usize,
    },
    #[error("unknown fields: {}", .0.join(", "))]
    UnknownFields(Vec<String>),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// Nested rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelDesc {
    StarGraph {
        n: usize,
    },
    LeadRational {
        w: MatrixRows,
        v: MatrixRows,
        #[serde(default)]
        poles: Vec<PoleDesc>,
    },
    Interval {
        length: f64,
    },
    Catalog {
        name: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleDesc {
    pub lambda: f64,
    pub residue: MatrixRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamDesc {
    Named(String),
    Matrix(MatrixRows),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for KGrid {
    fn default() -> Self {
        Self {
            min: 0.1,
            max: 10.0,
            count: 40,
            spacing: Spacing::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyGrid {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

impl Default for HardyGrid {
    fn default() -> Self {
        Self { n: 4096, l: 50.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Output {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

fn default_alpha() -> ParamDesc {
    ParamDesc::Named("sqrt2I".into())
}

fn default_kappa() -> ParamDesc {
    ParamDesc::Named("zero".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelDesc,
    #[serde(default = "default_alpha")]
    pub alpha: ParamDesc,
    #[serde(default = "default_kappa")]
    pub kappa: ParamDesc,
    #[serde(default)]
    pub k_grid: KGrid,
    #[serde(default)]
    pub hardy: Option<HardyGrid>,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub output: Output,
}

/// Parses a config, collecting unknown fields. In strict mode they are an error,
/// otherwise they are logged and ignored.
pub fn parse(text: &str, strict: bool) -> Result<RunConfig, ConfigError> {
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let mut record = |path: serde_ignored::Path<'_>| unknown.push(path.to_string());
    let ignored = serde_ignored::Deserializer::new(&mut de, &mut record);
    let cfg: RunConfig = serde_path_to_error::deserialize(ignored).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            path,
            message: inner.to_string(),
            line: inner.line(),
            column: inner.column(),
        }
    })?;
    de.end().map_err(|e| ConfigError::Parse {
        path: ".".into(),
        message: e.to_string(),
        line: e.line(),
        column: e.column(),
    })?;
    if !unknown.is_empty() {
        if strict {
            return Err(ConfigError::UnknownFields(unknown));
        }
        for u in &unknown {
            log::warn!("ignoring unknown field {u}");
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &str, strict: bool) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    parse(&text, strict)
}

fn matrix(field: &str, rows: &MatrixRows) -> Result<CMatrix, ConfigError> {
    let parsed: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|p| C64::new(p[0], p[1])).collect())
        .collect();
    let m = CMatrix::from_rows(&parsed).map_err(|e| invalid(field, e.to_string()))?;
    if !m.is_square() || m.rows() == 0 {
        return Err(invalid(
            field,
            format!("matrix must be square, got {}×{}", m.rows(), m.cols()),
        ));
    }
    if !m.is_finite() {
        return Err(invalid(field, "non-finite entry"));
    }
    Ok(m)
}

/// A seeded random Hermitian matrix with entries of order one.
pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut rows = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        rows[i][i] = C64::new(rng.random_range(-2.0..2.0), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            rows[i][j] = z;
            rows[j][i] = z.conj();
        }
    }
    CMatrix::from_rows(&rows).expect("square by construction")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn kappa_preset(name: &str, n: usize, seed: u64) -> Result<CMatrix, ConfigError> {
    match name {
        "zero" => Ok(CMatrix::zeros(n, n)),
        "iI" => Ok(CMatrix::scalar(n, C64::new(0.0, 1.0))),
        "random" => Ok(random_hermitian(n, &mut rng(seed))),
        _ => {
            let Some(list) = name.strip_prefix("diag:") else {
                return Err(invalid("kappa", format!("unknown preset {name:?}")));
            };
            let vals: Vec<f64> = serde_json::from_str(list)
                .map_err(|e| invalid("kappa", format!("bad diag list: {e}")))?;
            if vals.len() != n {
                return Err(invalid(
                    "kappa",
                    format!("diag has {} entries, model dimension is {n}", vals.len()),
                ));
            }
            Ok(CMatrix::from_real_diag(&vals))
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.k_grid;
        if !(g.min.is_finite() && g.max.is_finite() && g.min <= g.max) {
            return Err(invalid("k_grid", "need finite min ≤ max"));
        }
        if g.count == 0 {
            return Err(invalid("k_grid.count", "must be positive"));
        }
        if g.spacing == Spacing::Log && g.min <= 0.0 {
            return Err(invalid("k_grid.min", "log spacing needs min > 0"));
        }
        if let Some(h) = &self.hardy {
            if h.n < 512 || !h.n.is_power_of_two() {
                return Err(invalid("hardy.N", "must be a power of two ≥ 512"));
            }
            if !(h.l > 0.0 && h.l.is_finite()) {
                return Err(invalid("hardy.L", "must be positive"));
            }
        }
        for s in &self.suites {
            if s != "all" && !crate::suites::SUITES.contains(&s.as_str()) {
                return Err(invalid("suites", format!("unknown suite {s:?}")));
            }
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "at least one format"));
        }
        let model = self.build_model()?;
        self.build_ext(model.dim(), 0)?;
        Ok(())
    }

    pub fn build_model(&self) -> Result<HerglotzModel, ConfigError> {
        let built = match &self.model {
            ModelDesc::StarGraph { n } => HerglotzModel::star_graph(*n),
            ModelDesc::Interval { length } => HerglotzModel::interval(*length),
            ModelDesc::LeadRational { w, v, poles } => {
                let poles = poles
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        Ok(Pole {
                            lambda: p.lambda,
                            residue: matrix(&format!("model.poles[{j}].residue"), &p.residue)?,
                        })
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                HerglotzModel::lead_rational(matrix("model.w", w)?, matrix("model.v", v)?, poles)
            }
            ModelDesc::Catalog { name } => {
                return catalog()
                    .into_iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, m)| m)
                    .ok_or_else(|| invalid("model.name", format!("no catalog model {name:?}")))
            }
        };
        built.map_err(|e| invalid("model", e.to_string()))
    }

    pub fn build_ext(&self, n: usize, seed: u64) -> Result<ExtensionParams, ConfigError> {
        let alpha = match &self.alpha {
            ParamDesc::Named(s) if s == "sqrt2I" => CMatrix::scalar(n, C64::new(2f64.sqrt(), 0.0)),
            ParamDesc::Named(s) => return Err(invalid("alpha", format!("unknown preset {s:?}"))),
            ParamDesc::Matrix(m) => matrix("alpha", m)?,
        };
        let kappa = match &self.kappa {
            ParamDesc::Named(s) => kappa_preset(s, n, seed)?,
            ParamDesc::Matrix(m) => matrix("kappa", m)?,
        };
        for (name, m) in [("alpha", &alpha), ("kappa", &kappa)] {
            if m.rows() != n {
                return Err(invalid(
                    name,
                    format!("dimension {} does not match the model ({n})", m.rows()),
                ));
            }
        }
        ExtensionParams::new(alpha, kappa).map_err(|e| invalid("alpha/kappa", e.to_string()))
    }

    pub fn k_values(&self) -> Vec<f64> {
        let g = &self.k_grid;
        if g.count == 1 {
            return vec![g.min];
        }
        let steps = (g.count - 1) as f64;
        (0..g.count)
            .map(|i| {
                let t = i as f64 / steps;
                match g.spacing {
                    Spacing::Linear => g.min + t * (g.max - g.min),
                    Spacing::Log => (g.min.ln() + t * (g.max.ln() - g.min.ln())).exp(),
                }
            })
            .collect()
    }

    pub fn hardy_grid(&self) -> HardyGrid {
        self.hardy.clone().unwrap_or_default()
    }

    /// Canonical JSON used for the config hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}
