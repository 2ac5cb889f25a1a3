use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use polyscot::analysis::Weights;
use polyscot::evalharness::{LangRunner, RunnerSpec};
use polyscot::par::Exec;
use polyscot::sig_ir::LanguageId;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Live,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentsConfig {
    pub backend: BackendKind,
    pub endpoint: String,
    pub model: String,
    pub retries: u32,
    pub timeout_secs: u64,
    /// JSONL log of live request/response pairs, token redacted.
    pub transcript: Option<PathBuf>,
}

impl Default for AgentsConfig {
    fn default() -> Self {
        AgentsConfig {
            backend: BackendKind::Mock,
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            retries: 2,
            timeout_secs: 60,
            transcript: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub seed: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub bench: Option<PathBuf>,
    pub cots: Option<PathBuf>,
    pub code_script: Option<PathBuf>,
    pub reports: Option<PathBuf>,
    pub rubric: Option<PathBuf>,
    pub export: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub agents: AgentsConfig,
    /// Subset of the twelve; empty means all of them.
    pub languages: Vec<LanguageId>,
    /// Per-language overrides merged onto the built-in runner table.
    pub runners: BTreeMap<LanguageId, LangRunner>,
    pub paths: Paths,
    pub weights: Weights,
    pub seed: u64,
    pub exec: Exec,
    pub max_in_flight: usize,
    pub parity: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            agents: AgentsConfig::default(),
            languages: Vec::new(),
            runners: BTreeMap::new(),
            paths: Paths::default(),
            weights: Weights::default(),
            seed: 42,
            exec: Exec::default(),
            max_in_flight: 8,
            parity: false,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, String> {
        let Some(p) = path else { return Ok(Config::default()) };
        let text = fs::read_to_string(p).map_err(|e| format!("config {}: {e}", p.display()))?;
        let cfg: Config = serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", p.display()))?;
        if cfg.max_in_flight == 0 {
            return Err(format!("config {}: max_in_flight must be at least 1", p.display()));
        }
        Ok(cfg)
    }

    pub fn languages(&self) -> Vec<LanguageId> {
        if self.languages.is_empty() {
            LanguageId::ALL.to_vec()
        } else {
            let mut l = self.languages.clone();
            l.sort();
            l.dedup();
            l
        }
    }

    pub fn runner_spec(&self) -> RunnerSpec {
        let mut spec = RunnerSpec::default();
        for (l, r) in &self.runners {
            spec.runners.insert(*l, r.clone());
        }
        spec
    }

    /// Hash of the effective configuration, recorded in dataset manifests.
    pub fn hash(&self) -> String {
        polyscot::dataset::sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}
