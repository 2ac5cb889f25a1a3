use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::mock;
use super::SeedSample;
use crate::sig_ir::{Header, LanguageId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("http status {code}: {body}")]
    Status { code: u16, body: String },
    #[error("MSCOT_API_KEY is not set")]
    MissingKey,
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("mock has no rule for {0}")]
    NoRule(String),
    #[error("backend unavailable for {0}")]
    Unavailable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub temperature: f64,
    pub max_new_tokens: u32,
}

impl Default for Decoding {
    fn default() -> Self {
        Decoding { temperature: 0.0, max_new_tokens: 512 }
    }
}

/// Structured view of what a prompt asks for. Remote backends ignore it; the mock
/// answers from it instead of reading the prompt text.
#[derive(Debug, Clone)]
pub enum Hint {
    Cq(SeedSample),
    Ct { header: Header, target: LanguageId },
    Scot(Header),
    Code { task_id: String, phase: u8 },
}

impl Hint {
    /// Stable key for fixture lookup and fault injection.
    pub fn key(&self) -> String {
        match self {
            Hint::Cq(s) => format!("cq:{}", s.task_id),
            Hint::Ct { header, target } => format!("ct:{}:{}", header.signature.name, target),
            Hint::Scot(h) => format!("scot:{}", h.signature.name),
            Hint::Code { task_id, phase } => format!("code:{task_id}:{phase}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub system: String,
    pub user: String,
    pub decoding: Decoding,
    pub attempt: u32,
    pub hint: Option<Hint>,
}

pub trait ChatBackend: Send + Sync {
    fn kind(&self) -> &'static str;
    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError>;
}

/// Deterministic offline backend. Replies are a pure function of the request hint, the
/// attempt number and `seed`.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    pub seed: u64,
    /// Scripted replies by hint key; entry `i` answers attempt `i`, the last one repeats.
    pub fixtures: BTreeMap<String, Vec<String>>,
    /// Fraction of requests that fail with `Unavailable`, chosen by hashing (seed, key, attempt).
    pub failure_rate: f64,
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        MockBackend { seed, ..Default::default() }
    }

    pub fn with_fixture(mut self, key: impl Into<String>, replies: Vec<String>) -> Self {
        self.fixtures.insert(key.into(), replies);
        self
    }

    fn injected_failure(&self, key: &str, attempt: u32) -> bool {
        if self.failure_rate <= 0.0 {
            return false;
        }
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(key.as_bytes());
        h.update(attempt.to_le_bytes());
        let d = h.finalize();
        let x = u64::from_le_bytes(d[..8].try_into().unwrap());
        (x as f64 / u64::MAX as f64) < self.failure_rate
    }
}

impl ChatBackend for MockBackend {
    fn kind(&self) -> &'static str {
        "mock"
    }

    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let hint = req
            .hint
            .as_ref()
            .ok_or_else(|| BackendError::NoRule("request without hint".into()))?;
        let key = hint.key();
        if self.injected_failure(&key, req.attempt) {
            return Err(BackendError::Unavailable(key));
        }
        if let Some(replies) = self.fixtures.get(&key) {
            let i = (req.attempt as usize).min(replies.len().saturating_sub(1));
            return replies.get(i).cloned().ok_or(BackendError::NoRule(key));
        }
        match hint {
            Hint::Cq(s) => Ok(if mock::cq_rule(s) { "True" } else { "False" }.to_string()),
            Hint::Ct { header, target } => crate::sig_ir::translate_header(header, *target)
                .map(|h| h.raw_text)
                .map_err(|e| BackendError::Malformed(e.to_string())),
            Hint::Scot(h) => crate::scot::render_scot(&mock::scot_template(h))
                .map_err(|e| BackendError::Malformed(e.to_string())),
            Hint::Code { .. } => Err(BackendError::NoRule(key)),
        }
    }
}
