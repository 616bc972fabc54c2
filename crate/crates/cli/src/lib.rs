//! Orchestrates the inflation-score pipeline over on-disk artifacts.
//!
//! Every stage reads its inputs from the config and the output directory,
//! writes its artifacts there, and returns a small summary. Artifacts carry a
//! provenance header with the config hash, seed and crate versions; given the
//! same inputs, every artifact is byte-identical across runs.

pub mod config;
pub mod provenance;
pub mod stages;
pub mod svg;

use std::fmt;
use std::str::FromStr;

use anyhow::Result;
use ris_core::Month;
use serde_json::{json, Value};

pub use config::{ConfigError, PipelineConfig};
pub use stages::{Layout, MissingArtifact};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Classify,
    Score,
    Validate,
    Changepoint,
    Lexshift,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Classify,
        Stage::Score,
        Stage::Validate,
        Stage::Changepoint,
        Stage::Lexshift,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Classify => "classify",
            Stage::Score => "score",
            Stage::Validate => "validate",
            Stage::Changepoint => "changepoint",
            Stage::Lexshift => "lexshift",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

/// Command-line overrides of config settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    /// Forces smoothed (`true`) or raw (`false`) scores in `validate`.
    pub smoothed: Option<bool>,
    pub focus: Option<Month>,
}

/// Runs one stage and returns its summary.
pub fn run(stage: Stage, cfg: &PipelineConfig, out: &Layout, ov: Overrides) -> Result<Value> {
    let summary = match stage {
        Stage::Ingest => serde_json::to_value(stages::ingest(cfg, out)?),
        Stage::Classify => serde_json::to_value(stages::classify(cfg, out)?),
        Stage::Score => serde_json::to_value(stages::score(cfg, out)?),
        Stage::Validate => serde_json::to_value(stages::validate(cfg, out, ov.smoothed)?),
        Stage::Changepoint => serde_json::to_value(stages::changepoint(cfg, out, ov.focus)?),
        Stage::Lexshift => serde_json::to_value(stages::lexshift(cfg, out)?),
        Stage::Report => serde_json::to_value(stages::report(cfg, out, ov.focus)?),
    }?;
    Ok(json!({ "stage": stage.name(), "status": "ok", "summary": summary }))
}

/// Runs every stage in order, stopping at the first failure.
pub fn run_all(
    cfg: &PipelineConfig,
    out: &Layout,
    ov: Overrides,
) -> Result<Vec<Value>, (Stage, anyhow::Error)> {
    Stage::ALL
        .into_iter()
        .map(|stage| run(stage, cfg, out, ov).map_err(|e| (stage, e)))
        .collect()
}

/// Coarse error class for the machine-readable error line.
pub fn error_kind(err: &anyhow::Error) -> &'static str {
    if err.downcast_ref::<ConfigError>().is_some() {
        return "config";
    }
    for cause in err.chain() {
        if cause.is::<MissingArtifact>() {
            return "missing_artifact";
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::NotFound {
                return "missing_input";
            }
            return "io";
        }
    }
    "failed"
}

/// One-line JSON error record.
pub fn error_line(stage: Option<&str>, err: &anyhow::Error) -> String {
    let message = format!("{err:#}").replace(['\n', '\r'], " ");
    json!({
        "status": "error",
        "stage": stage,
        "kind": error_kind(err),
        "message": message,
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("bogus".parse::<Stage>().is_err());
    }

    #[test]
    fn error_lines_are_single_line_json() {
        let err = anyhow::Error::new(ConfigError("bad\nthing".into()));
        let line = error_line(Some("score"), &err);
        assert!(!line.contains('\n'));
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["kind"], "config");
        assert_eq!(v["stage"], "score");
        assert_eq!(v["message"], "invalid config: bad thing");

        let io = anyhow::Error::new(std::io::Error::from(std::io::ErrorKind::NotFound))
            .context("opening x");
        assert_eq!(error_kind(&io), "missing_input");
        assert_eq!(error_kind(&anyhow::anyhow!("boom")), "failed");
    }
}
