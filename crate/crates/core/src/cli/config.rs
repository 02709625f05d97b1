use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::coefficients::{CoefficientModel, CubicSpline};
use crate::error::{Error, Result};
use crate::evolution::InitialPreset;

/// A number or the word `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AutoOr {
    #[default]
    Auto,
    Value(f64),
}

impl AutoOr {
    pub fn or_else(self, f: impl FnOnce() -> f64) -> f64 {
        match self {
            AutoOr::Auto => f(),
            AutoOr::Value(v) => v,
        }
    }
}

impl<'de> Deserialize<'de> for AutoOr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = AutoOr;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"auto\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<AutoOr, E> {
                Ok(AutoOr::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<AutoOr, E> {
                Ok(AutoOr::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<AutoOr, E> {
                Ok(AutoOr::Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<AutoOr, E> {
                if v == "auto" {
                    Ok(AutoOr::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientsConfig {
    /// `a = x^K_exp`, `b = b_scale x^h_exp`
    Power {
        #[serde(rename = "K_exp")]
        k_exp: f64,
        #[serde(default)]
        h_exp: f64,
        #[serde(default)]
        b_scale: f64,
    },
    /// `a = Σ c x^p`, `b = Σ c x^p` as `[c, p]` pairs
    SumPower {
        a_terms: Vec<[f64; 2]>,
        #[serde(default)]
        b_terms: Vec<[f64; 2]>,
    },
    /// Two-column `x value` tables, paths relative to the config file
    Tabulated { a_table: PathBuf, b_table: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub gamma: AutoOr,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n: 256, gamma: AutoOr::Auto }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default)]
    pub dt: AutoOr,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    10
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t: 10.0, dt: AutoOr::Auto, stride: default_stride() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub delta: AutoOr,
    /// Replace `delta` by the minimizer of `M(δ)`.
    #[serde(default)]
    pub optimize_delta: bool,
    /// Defaults to `(T/20, T/2)`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_discard")]
    pub discard_fraction: f64,
}

fn default_discard() -> f64 {
    0.1
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { delta: AutoOr::Auto, optimize_delta: false, window: None, discard_fraction: default_discard() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Plot,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Plot]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: default_directory(), formats: default_formats() }
    }
}

fn default_initial() -> InitialPreset {
    InitialPreset::Poly { y0: vec![0.0, 2.0, -1.0], y1: vec![] }
}

/// A scenario file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub coefficients: CoefficientsConfig,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default = "default_initial")]
    pub initial: InitialPreset,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    /// Directory that relative table paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_beta() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {}", e.message())))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidInput(format!("config: {what}")));
        let mut numbers: Vec<(&str, f64)> = vec![
            ("beta", self.beta),
            ("time.T", self.time.t),
            ("analysis.discard_fraction", self.analysis.discard_fraction),
        ];
        if let AutoOr::Value(v) = self.mesh.gamma {
            numbers.push(("mesh.gamma", v));
        }
        if let AutoOr::Value(v) = self.time.dt {
            numbers.push(("time.dt", v));
        }
        if let Some([s, t]) = self.analysis.window {
            numbers.extend([("analysis.window[0]", s), ("analysis.window[1]", t)]);
        }
        if let AutoOr::Value(v) = self.analysis.delta {
            numbers.push(("analysis.delta", v));
        }
        match &self.coefficients {
            CoefficientsConfig::Power { k_exp, h_exp, b_scale } => {
                numbers.extend([("coefficients.K_exp", *k_exp), ("coefficients.h_exp", *h_exp), ("coefficients.b_scale", *b_scale)]);
            }
            CoefficientsConfig::SumPower { a_terms, b_terms } => {
                if a_terms.is_empty() {
                    return bad("coefficients.a_terms must not be empty".into());
                }
                for [c, p] in a_terms.iter().chain(b_terms) {
                    numbers.extend([("coefficients term", *c), ("coefficients term", *p)]);
                }
            }
            CoefficientsConfig::Tabulated { .. } => {}
        }
        if let Some((name, v)) = numbers.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{name} = {v} is not finite"));
        }
        if self.mesh.n < 4 {
            return bad(format!("mesh.N = {} must be at least 4", self.mesh.n));
        }
        if !(self.time.t > 0.0) {
            return bad(format!("time.T = {} must be positive", self.time.t));
        }
        if self.beta < 0.0 {
            return bad(format!("beta = {} must be nonnegative", self.beta));
        }
        if let AutoOr::Value(dt) = self.time.dt {
            if !(dt > 0.0) || dt > self.time.t {
                return bad(format!("time.dt = {dt} must lie in (0, T]"));
            }
        }
        if !(0.0..1.0).contains(&self.analysis.discard_fraction) {
            return bad("analysis.discard_fraction must lie in [0, 1)".into());
        }
        let [s, t] = self.window();
        if !(0.0 <= s && s < t && t <= self.time.t) {
            return bad(format!("analysis.window ({s}, {t}) must satisfy 0 <= s < T <= time.T"));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<CoefficientModel> {
        Ok(match &self.coefficients {
            CoefficientsConfig::Power { k_exp, h_exp, b_scale } => CoefficientModel::power(*k_exp, *h_exp, *b_scale),
            CoefficientsConfig::SumPower { a_terms, b_terms } => CoefficientModel::sum_power(
                a_terms.iter().map(|[c, p]| (*c, *p)).collect(),
                b_terms.iter().map(|[c, p]| (*c, *p)).collect(),
            ),
            CoefficientsConfig::Tabulated { a_table, b_table } => {
                let read = |p: &PathBuf| -> Result<CubicSpline> {
                    let path = self.base_dir.join(p);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::InvalidInput(format!("cannot read table {}: {e}", path.display())))?;
                    CubicSpline::parse(&text)
                        .map_err(|e| Error::InvalidInput(format!("table {}: {e}", path.display())))
                };
                CoefficientModel::tabulated(read(a_table)?, read(b_table)?)?
            }
        })
    }

    /// Seed for random test functions, overridable by the environment.
    pub fn effective_seed(&self) -> u64 {
        std::env::var(crate::function_spaces::SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(self.seed)
    }

    pub fn window(&self) -> [f64; 2] {
        self.analysis.window.unwrap_or([self.time.t / 20.0, self.time.t / 2.0])
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}
