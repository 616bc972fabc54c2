//! The TOML pipeline configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use ris_core::changepoint::{PenaltyConfig, DEFAULT_SCAN_CS};
use ris_core::corpus::{FieldMap, SamplingCaps};
use ris_core::lexshift::TfidfParams;
use ris_core::stats::IndicatorTransform;
use ris_core::{Month, MonthRange};
use serde::Deserialize;
use sha2::{Digest, Sha256};

/// Rejected configuration. Reported with its own error kind so callers can
/// tell bad input from failed analysis.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: Paths,
    #[serde(default, rename = "indicator")]
    pub indicators: Vec<IndicatorSpec>,
    pub corpus: CorpusSection,
    #[serde(default)]
    pub sampling: SamplingCaps,
    #[serde(default)]
    pub index: IndexSection,
    #[serde(default)]
    pub classifier: ClassifierSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub changepoint: ChangepointSection,
    pub lexshift: LexshiftSection,

    /// SHA-256 of the config file bytes.
    #[serde(skip)]
    pub hash: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: Vec<PathBuf>,
    #[serde(default)]
    pub labels: Vec<PathBuf>,
    pub lexicon: PathBuf,
    pub stopwords: Option<PathBuf>,
    /// Sectioned keyword file; the built-in lists are used when absent.
    pub keywords: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorSpec {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub transform: IndicatorTransform,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub range: MonthRange,
    /// Communities reported even when they have no posts.
    #[serde(default)]
    pub communities: Vec<String>,
    #[serde(default)]
    pub fields: FieldMap,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSection {
    pub smoothing_window: usize,
}

impl Default for IndexSection {
    fn default() -> Self {
        Self {
            smoothing_window: 3,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum ClassifierSection {
    /// Labels looked up in `paths.labels`.
    #[default]
    Labels,
    Remote(RemoteSection),
}

#[derive(Debug, Clone, Deserialize)]
pub struct RemoteSection {
    pub url: String,
    /// Environment variable holding the bearer token.
    #[serde(default = "default_token_env")]
    pub token_env: String,
    #[serde(default = "default_attempts")]
    pub attempts: u32,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    pub requests_per_second: Option<f64>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

fn default_token_env() -> String {
    "RIS_CLASSIFIER_TOKEN".into()
}
fn default_attempts() -> u32 {
    3
}
fn default_in_flight() -> usize {
    4
}
fn default_timeout() -> u64 {
    60
}
fn default_backoff() -> u64 {
    500
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub window: Option<MonthRange>,
    pub lags: Vec<usize>,
    /// Compare the moving average of the scores rather than the raw series.
    pub smoothed: bool,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            window: None,
            lags: vec![1, 2, 3],
            smoothed: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChangepointSection {
    pub cs: Vec<f64>,
    pub ms: Vec<usize>,
    /// Setting drawn in charts and used for the focus lookup.
    pub reference: PenaltySetting,
    pub focus: Option<Month>,
    pub smoothed: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySetting {
    pub c: f64,
    pub m: usize,
}

impl From<PenaltySetting> for PenaltyConfig {
    fn from(p: PenaltySetting) -> Self {
        PenaltyConfig { c: p.c, m: p.m }
    }
}

impl Default for ChangepointSection {
    fn default() -> Self {
        let d = PenaltyConfig::default();
        Self {
            cs: DEFAULT_SCAN_CS.to_vec(),
            ms: vec![d.m],
            reference: PenaltySetting { c: d.c, m: d.m },
            focus: None,
            smoothed: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexshiftSection {
    #[serde(default = "default_min_df")]
    pub min_df: usize,
    #[serde(default = "default_max_df_ratio")]
    pub max_df_ratio: f64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    pub before: MonthRange,
    pub after: MonthRange,
    /// Restrict to one community; all communities are pooled otherwise.
    pub community: Option<String>,
}

fn default_min_df() -> usize {
    TfidfParams::default().min_df
}
fn default_max_df_ratio() -> f64 {
    TfidfParams::default().max_df_ratio
}
fn default_top_k() -> usize {
    20
}

impl LexshiftSection {
    pub fn params(&self) -> TfidfParams {
        TfidfParams {
            min_df: self.min_df,
            max_df_ratio: self.max_df_ratio,
        }
    }
}

impl PipelineConfig {
    /// Reads, resolves and validates a config file. Relative paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| invalid(format!("{} is not UTF-8", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::parse(text, base)?;
        cfg.hash = hex(&Sha256::digest(&bytes));
        Ok(cfg)
    }

    /// Parses config text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut cfg: Self =
            toml::from_str(text).map_err(|e| invalid(e.message().replace('\n', " ")))?;
        cfg.resolve(base);
        cfg.validate()?;
        cfg.hash = hex(&Sha256::digest(text.as_bytes()));
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let paths = &mut self.paths;
        paths.corpus.iter_mut().for_each(join);
        paths.labels.iter_mut().for_each(join);
        join(&mut paths.lexicon);
        paths.stopwords.iter_mut().for_each(join);
        paths.keywords.iter_mut().for_each(join);
        for ind in &mut self.indicators {
            join(&mut ind.path);
        }
    }

    fn validate(&self) -> anyhow::Result<()> {
        let p = &self.paths;
        if p.corpus.is_empty() {
            return Err(invalid("paths.corpus lists no files"));
        }
        if matches!(self.classifier, ClassifierSection::Labels) && p.labels.is_empty() {
            return Err(invalid("classifier backend \"labels\" needs paths.labels"));
        }
        let all = p
            .corpus
            .iter()
            .chain(&p.labels)
            .chain([&p.lexicon])
            .chain(&p.stopwords)
            .chain(&p.keywords)
            .chain(self.indicators.iter().map(|i| &i.path));
        for path in all {
            if !path.is_file() {
                return Err(invalid(format!("missing input {}", path.display())));
            }
        }
        let mut names: Vec<&str> = self.indicators.iter().map(|i| i.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("indicator names must be unique"));
        }
        if let Some(bad) = names.iter().find(|n| !is_identifier(n)) {
            return Err(invalid(format!(
                "indicator name {bad:?} must be lowercase letters, digits or _"
            )));
        }

        let ranges = [
            ("corpus.range", Some(self.corpus.range)),
            ("analysis.window", self.analysis.window),
            ("lexshift.before", Some(self.lexshift.before)),
            ("lexshift.after", Some(self.lexshift.after)),
        ];
        for (name, range) in ranges {
            if let Some(r) = range {
                if r.start >= r.end {
                    return Err(invalid(format!(
                        "{name}: start {} must be before end {}",
                        r.start, r.end
                    )));
                }
            }
        }
        if self.lexshift.before.end >= self.lexshift.after.start {
            return Err(invalid(
                "lexshift.before must end before lexshift.after starts",
            ));
        }
        if self.lexshift.top_k == 0 {
            return Err(invalid("lexshift.top_k must be positive"));
        }
        if !(self.lexshift.max_df_ratio > 0.0 && self.lexshift.max_df_ratio <= 1.0) {
            return Err(invalid("lexshift.max_df_ratio must be in (0, 1]"));
        }
        if self.sampling.submissions == 0 || self.sampling.comments == 0 {
            return Err(invalid("sampling caps must be positive"));
        }
        if self.index.smoothing_window == 0 {
            return Err(invalid("index.smoothing_window must be at least 1"));
        }
        if self.analysis.lags.is_empty() || self.analysis.lags.contains(&0) {
            return Err(invalid("analysis.lags must be non-empty and positive"));
        }
        let cp = &self.changepoint;
        if cp.cs.is_empty() || cp.ms.is_empty() {
            return Err(invalid(
                "changepoint.cs and changepoint.ms must be non-empty",
            ));
        }
        if let Some(c) = cp
            .cs
            .iter()
            .chain([&cp.reference.c])
            .find(|c| !(**c > 0.0 && c.is_finite()))
        {
            return Err(invalid(format!(
                "changepoint penalty factor {c} must be positive"
            )));
        }
        if cp.ms.contains(&0) || cp.reference.m == 0 {
            return Err(invalid(
                "changepoint minimum segment length must be positive",
            ));
        }
        if let ClassifierSection::Remote(r) = &self.classifier {
            if !(r.url.starts_with("http://") || r.url.starts_with("https://")) {
                return Err(invalid(format!(
                    "classifier url {:?} is not http(s)",
                    r.url
                )));
            }
            if r.attempts == 0 || r.max_in_flight == 0 {
                return Err(invalid(
                    "classifier attempts and max_in_flight must be positive",
                ));
            }
        }
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
