//! Headers identifying the configuration and code behind every artifact.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::PipelineConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub stage: String,
    pub config_sha256: String,
    pub seed: u64,
    pub ris_core: String,
    pub ris_cli: String,
}

pub const CORE_VERSION: &str = ris_core::VERSION;
pub const CLI_VERSION: &str = env!("CARGO_PKG_VERSION");

impl Provenance {
    pub fn new(stage: &str, cfg: &PipelineConfig) -> Self {
        Self {
            stage: stage.to_string(),
            config_sha256: cfg.hash.clone(),
            seed: cfg.seed,
            ris_core: CORE_VERSION.to_string(),
            ris_cli: CLI_VERSION.to_string(),
        }
    }

    fn fields(&self) -> [(&'static str, String); 5] {
        [
            ("stage", self.stage.clone()),
            ("config_sha256", self.config_sha256.clone()),
            ("seed", self.seed.to_string()),
            ("ris_core", self.ris_core.clone()),
            ("ris_cli", self.ris_cli.clone()),
        ]
    }

    /// `# key: value` lines for CSV artifacts.
    pub fn csv_header(&self) -> String {
        self.fields()
            .iter()
            .map(|(k, v)| format!("# {k}: {v}\n"))
            .collect()
    }

    /// First line of a JSONL artifact.
    pub fn jsonl_line(&self) -> String {
        let line = serde_json::json!({ "_provenance": self });
        format!("{line}\n")
    }

    /// XML comment placed after the SVG root element opens.
    pub fn svg_comment(&self) -> String {
        let body: Vec<String> = self
            .fields()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("<!-- {} -->\n", body.join(" "))
    }

    /// Object embedded under `"provenance"` in JSON artifacts.
    pub fn json_value(&self) -> Value {
        serde_json::to_value(self).expect("plain struct")
    }

    /// Reads the header back from a JSONL line, if it is one.
    pub fn from_jsonl_line(line: &str) -> Option<Self> {
        let v: Value = serde_json::from_str(line).ok()?;
        serde_json::from_value(v.get("_provenance")?.clone()).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Provenance {
        Provenance {
            stage: "score".into(),
            config_sha256: "ab".repeat(32),
            seed: 42,
            ris_core: "0.1.0".into(),
            ris_cli: "0.1.0".into(),
        }
    }

    #[test]
    fn csv_lines_are_comments() {
        let h = sample().csv_header();
        assert_eq!(h.lines().count(), 5);
        assert!(h.lines().all(|l| l.starts_with("# ")));
        assert!(h.contains("# seed: 42\n"));
    }

    #[test]
    fn jsonl_round_trip() {
        let p = sample();
        let line = p.jsonl_line();
        assert!(line.ends_with('\n') && line.matches('\n').count() == 1);
        assert_eq!(Provenance::from_jsonl_line(&line), Some(p));
        assert_eq!(Provenance::from_jsonl_line(r#"{"id":"x"}"#), None);
    }

    #[test]
    fn svg_comment_has_no_double_dash_inside() {
        let c = sample().svg_comment();
        let inner = &c[4..c.len() - 5];
        assert!(!inner.contains("--"));
    }
}
