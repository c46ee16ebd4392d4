//! Experiment configuration files (TOML) and their canonical `key=value` form.
//!
//! ```toml
//! m_values = "5..25"
//! max_harvesters = 5
//! snr_db = 10
//! seed = 7
//!
//! [coupling]
//! kind = "scalar"
//! alpha_db = -15
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use recyc_miso::{
    db_to_linear, CouplingMatrix, CouplingSpec, Error as CoreError, ExperimentConfig, LayoutKind, SchedulerKind,
};

use crate::range::{format_values, parse_values};

/// A configuration problem, tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub kind: Option<String>,
    pub alpha_db: Option<f64>,
    pub alpha: Option<f64>,
    pub file: Option<PathBuf>,
    pub layout: Option<String>,
    pub spacing: Option<f64>,
    pub alpha_ref_db: Option<f64>,
    pub d_ref: Option<f64>,
    pub exponent: Option<f64>,
}

/// Harvester cap setting: a count or `none` for no cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cap {
    Limit(usize),
    Unlimited,
}

impl Cap {
    pub fn as_option(self) -> Option<usize> {
        match self {
            Cap::Limit(n) => Some(n),
            Cap::Unlimited => None,
        }
    }
}

impl FromStr for Cap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" => Ok(Cap::Unlimited),
            t => t
                .parse()
                .map(Cap::Limit)
                .map_err(|_| format!("expected a count or `none`, got `{s}`")),
        }
    }
}

impl<'de> Deserialize<'de> for Cap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(usize),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Count(n) => Ok(Cap::Limit(n)),
            Repr::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Every settable key. Unset keys fall back to defaults when resolved, so a
/// file and a set of flag overrides are both just partial `RawConfig`s.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub m: Option<usize>,
    pub m_values: Option<String>,
    pub cap_values: Option<String>,
    pub max_harvesters: Option<Cap>,
    pub mean_gain_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub scheduler: Option<String>,
    pub deterministic_symbol: Option<bool>,
    #[serde(default)]
    pub coupling: CouplingSection,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($field:ident),+) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )+
    };
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1));
            let message = e.message().replace('\n', " ");
            let key = unknown_key(&message).unwrap_or_else(|| "config".to_string());
            match line {
                Some(line) => ConfigError::new(key, format!("{message} (line {line})")),
                None => ConfigError::new(key, message),
            }
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Values set in `other` replace ours.
    pub fn overlay(&mut self, other: &RawConfig) {
        overlay!(
            self,
            other,
            m,
            m_values,
            cap_values,
            max_harvesters,
            mean_gain_db,
            snr_db,
            n_samples,
            seed,
            scheduler,
            deterministic_symbol
        );
        // picking one scalar form clears the other
        if other.coupling.alpha_db.is_some() {
            self.coupling.alpha = None;
        }
        if other.coupling.alpha.is_some() {
            self.coupling.alpha_db = None;
        }
        overlay!(
            self.coupling,
            other.coupling,
            kind,
            alpha_db,
            alpha,
            file,
            layout,
            spacing,
            alpha_ref_db,
            d_ref,
            exponent
        );
    }
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

/// A configuration with every default filled in and every value checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub m_values: Vec<usize>,
    pub cap_values: Vec<usize>,
    canonical: BTreeMap<&'static str, String>,
}

impl Resolved {
    /// Sorted `key=value` pairs joined by single spaces.
    pub fn canonical(&self) -> String {
        self.canonical
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

const DEFAULT_ALPHA_DB: f64 = -15.0;
const DEFAULT_ALPHA_REF_DB: f64 = -10.3;
const DEFAULT_SPACING: f64 = 1.0 / 3.0;
const DEFAULT_D_REF: f64 = 1.0 / 3.0;
const DEFAULT_EXPONENT: f64 = 2.0;

fn parse_scheduler(s: &str) -> Result<SchedulerKind, ConfigError> {
    match s {
        "fast" => Ok(SchedulerKind::Fast),
        "exhaustive" => Ok(SchedulerKind::Exhaustive),
        other => Err(ConfigError::new(
            "scheduler",
            format!("expected `fast` or `exhaustive`, got `{other}`"),
        )),
    }
}

fn parse_layout(s: &str) -> Result<LayoutKind, ConfigError> {
    match s {
        "hex" => Ok(LayoutKind::Hex),
        "ula" => Ok(LayoutKind::Ula),
        other => Err(ConfigError::new(
            "coupling.layout",
            format!("expected `hex` or `ula`, got `{other}`"),
        )),
    }
}

fn finite(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::new(key, format!("must be finite, got {x}")))
    }
}

fn negative_db(key: &str, db: f64) -> Result<f64, ConfigError> {
    if db.is_nan() || db >= 0.0 {
        return Err(ConfigError::new(
            key,
            format!("{db} dB is a linear coupling >= 1; coupling must be below 0 dB"),
        ));
    }
    Ok(db)
}

fn positive(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::new(key, format!("must be > 0, got {x}")))
    }
}

/// Reads a coupling matrix: one row per line, comma-separated linear ratios.
pub fn read_matrix(path: &Path) -> Result<CouplingMatrix, ConfigError> {
    let key = "coupling.file";
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ConfigError::new(key, format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ConfigError::new(key, format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::new(key, format!("{} row {}: {e}", path.display(), i + 1)))?;
        rows.push(row);
    }
    CouplingMatrix::from_rows(&rows).map_err(|e| ConfigError::new(key, e.to_string()))
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

impl RawConfig {
    /// Fills defaults, checks every key and builds the experiment
    /// configuration. `m_hint` is the antenna count implied by the command
    /// (for example the length of an explicit channel vector).
    pub fn resolve(&self, m_hint: Option<usize>) -> Result<Resolved, ConfigError> {
        let r = self.build(m_hint)?;
        let largest = r
            .m_values
            .iter()
            .copied()
            .chain([r.experiment.m])
            .max()
            .unwrap_or(r.experiment.m);
        r.experiment
            .validate()
            .and_then(|_| r.experiment.validate_for(largest))
            .map_err(core_to_config)?;
        Ok(r)
    }

    /// Like [`RawConfig::resolve`] but without the scheduler/size checks
    /// that only matter for Monte Carlo runs.
    pub fn build(&self, m_hint: Option<usize>) -> Result<Resolved, ConfigError> {
        let defaults = ExperimentConfig::default();
        let mut canonical = BTreeMap::new();

        let m_values = match &self.m_values {
            Some(s) => parse_values(s).map_err(|e| ConfigError::new("m_values", e))?,
            None => vec![self.m.or(m_hint).unwrap_or(defaults.m)],
        };
        if m_values.contains(&0) {
            return Err(ConfigError::new("m_values", "antenna counts must be >= 1"));
        }
        let m = match (m_hint, self.m) {
            (Some(h), _) => h,
            (None, Some(m)) => m,
            (None, None) => *m_values.iter().max().expect("parse_values never returns an empty list"),
        };
        if m == 0 {
            return Err(ConfigError::new("m", "antenna count must be >= 1"));
        }
        canonical.insert("m", m.to_string());
        canonical.insert("m_values", format_values(&m_values));

        let cap_values = match &self.cap_values {
            Some(s) => parse_values(s).map_err(|e| ConfigError::new("cap_values", e))?,
            None => (0..m).collect(),
        };
        canonical.insert("cap_values", format_values(&cap_values));

        let max_harvesters = self.max_harvesters.map_or(defaults.max_harvesters, Cap::as_option);
        canonical.insert(
            "max_harvesters",
            max_harvesters.map_or("none".to_string(), |c| c.to_string()),
        );

        let mean_gain_db = finite("mean_gain_db", self.mean_gain_db.unwrap_or(defaults.mean_gain_db))?;
        canonical.insert("mean_gain_db", fmt_f(mean_gain_db));
        let snr_db = finite("snr_db", self.snr_db.unwrap_or(defaults.snr_db))?;
        canonical.insert("snr_db", fmt_f(snr_db));

        let n_samples = self.n_samples.unwrap_or(defaults.n_samples);
        if n_samples == 0 {
            return Err(ConfigError::new("n_samples", "must be >= 1"));
        }
        canonical.insert("n_samples", n_samples.to_string());
        let seed = self.seed.unwrap_or(defaults.seed);
        canonical.insert("seed", seed.to_string());

        let scheduler = match &self.scheduler {
            Some(s) => parse_scheduler(s)?,
            None => defaults.scheduler,
        };
        canonical.insert("scheduler", scheduler.as_str().to_string());
        let deterministic_symbol = self.deterministic_symbol.unwrap_or(false);
        canonical.insert("deterministic_symbol", deterministic_symbol.to_string());

        let coupling = self.resolve_coupling(&mut canonical)?;

        let experiment = ExperimentConfig {
            m,
            max_harvesters,
            coupling,
            mean_gain_db,
            snr_db,
            n_samples,
            seed,
            scheduler,
            deterministic_symbol,
        };
        Ok(Resolved {
            experiment,
            m_values,
            cap_values,
            canonical,
        })
    }

    fn resolve_coupling(&self, canonical: &mut BTreeMap<&'static str, String>) -> Result<CouplingSpec, ConfigError> {
        let c = &self.coupling;
        let kind = match &c.kind {
            Some(k) => k.as_str(),
            None if c.file.is_some() => "matrix",
            None if c.layout.is_some() => "geometry",
            None => "scalar",
        };
        canonical.insert("coupling.kind", kind.to_string());
        match kind {
            "scalar" => {
                let alpha = match (c.alpha, c.alpha_db) {
                    (Some(a), _) => {
                        if !(0.0..1.0).contains(&a) {
                            return Err(ConfigError::new("alpha", format!("must lie in [0, 1), got {a}")));
                        }
                        canonical.insert("coupling.alpha", fmt_f(a));
                        a
                    }
                    (None, db) => {
                        let db = negative_db("alpha_db", db.unwrap_or(DEFAULT_ALPHA_DB))?;
                        canonical.insert("coupling.alpha_db", fmt_f(db));
                        db_to_linear(db)
                    }
                };
                Ok(CouplingSpec::Scalar { alpha })
            }
            "matrix" => {
                let path = c
                    .file
                    .as_ref()
                    .ok_or_else(|| ConfigError::new("coupling.file", "matrix coupling needs a file"))?;
                canonical.insert("coupling.file", path.display().to_string());
                Ok(CouplingSpec::Matrix(read_matrix(path)?))
            }
            "geometry" => {
                let layout_name = c.layout.as_deref().unwrap_or("hex");
                let layout = parse_layout(layout_name)?;
                let spacing = positive("coupling.spacing", c.spacing.unwrap_or(DEFAULT_SPACING))?;
                let alpha_ref_db = negative_db("alpha_ref_db", c.alpha_ref_db.unwrap_or(DEFAULT_ALPHA_REF_DB))?;
                let d_ref = positive("coupling.d_ref", c.d_ref.unwrap_or(DEFAULT_D_REF))?;
                let exponent = c.exponent.unwrap_or(DEFAULT_EXPONENT);
                if !(exponent >= 0.0) || !exponent.is_finite() {
                    return Err(ConfigError::new(
                        "coupling.exponent",
                        format!("must be >= 0, got {exponent}"),
                    ));
                }
                canonical.insert("coupling.layout", layout_name.to_string());
                canonical.insert("coupling.spacing", fmt_f(spacing));
                canonical.insert("coupling.alpha_ref_db", fmt_f(alpha_ref_db));
                canonical.insert("coupling.d_ref", fmt_f(d_ref));
                canonical.insert("coupling.exponent", fmt_f(exponent));
                Ok(CouplingSpec::Geometry {
                    layout,
                    spacing,
                    alpha_ref: db_to_linear(alpha_ref_db),
                    d_ref,
                    exponent,
                })
            }
            other => Err(ConfigError::new(
                "coupling.kind",
                format!("expected `scalar`, `matrix` or `geometry`, got `{other}`"),
            )),
        }
    }
}

pub fn core_to_config(e: CoreError) -> ConfigError {
    match e {
        CoreError::InvalidParameter { name, reason } => ConfigError::new(name, reason),
        CoreError::SizeLimitExceeded { .. } => ConfigError::new("m", e.to_string()),
        other => ConfigError::new("config", other.to_string()),
    }
}
