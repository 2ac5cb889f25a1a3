//! The three construction agents over a pluggable chat backend.

mod backend;
mod mock;
mod prompt;
mod remote;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backend::{BackendError, ChatBackend, ChatRequest, Decoding, Hint, MockBackend};
pub use mock::{cq_rule, scot_template};
pub use prompt::{ct_exemplar, render_prompt, AgentKind, SCOT_DEMO_INPUT, SCOT_DEMO_OUTPUT, TEMPLATE_VERSION};
pub use remote::{RemoteEndpoint, API_KEY_ENV};

use crate::scot::{parse_scot, validate, ScotDocument, ScotError};
use crate::sig_ir::{parse_header, Header, LanguageId, SigError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("verdict is neither True nor False: {0:?}")]
    UnparseableVerdict(String),
    #[error("translation failed validation: {}", .0.join("; "))]
    ValidationFailed(Vec<String>),
    #[error("cot failed to parse: {0}")]
    ScotParseFailed(ScotError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("missing prompt binding {0}")]
    MissingBinding(String),
    #[error("seed header: {0}")]
    Header(#[from] SigError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSample {
    pub task_id: String,
    pub language: LanguageId,
    pub docstring: String,
    pub signature: String,
    pub solution: String,
    pub tests: String,
}

impl SeedSample {
    /// Docstring and signature joined into one header in the seed language.
    pub fn header(&self) -> Result<Header, SigError> {
        let doc = self.docstring.trim_matches('\n');
        let text = if self.language == LanguageId::Python {
            let body: Vec<String> = doc
                .lines()
                .map(|l| if l.trim().is_empty() { String::new() } else { format!("    {}", l.trim()) })
                .collect();
            format!("{}\n    '''\n{}\n    '''", self.signature.trim_end(), body.join("\n"))
        } else {
            format!("{doc}\n{}", self.signature.trim())
        };
        parse_header(self.language, &text)
    }
}

#[derive(Clone)]
pub struct AgentConfig {
    pub backend: Arc<dyn ChatBackend>,
    pub max_retries: u32,
    pub decoding: Decoding,
    pub max_input_tokens: usize,
}

impl AgentConfig {
    pub fn new(backend: Arc<dyn ChatBackend>) -> Self {
        AgentConfig { backend, max_retries: 2, decoding: Decoding::default(), max_input_tokens: 512 }
    }
}

/// Cut `text` after its first `n` whitespace-separated tokens, keeping original spacing.
pub fn truncate_tokens(text: &str, n: usize) -> &str {
    let mut count = 0;
    let mut in_tok = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if in_tok && count == n {
                return &text[..i];
            }
            in_tok = false;
        } else if !in_tok {
            in_tok = true;
            count += 1;
            if count > n {
                return text[..i].trim_end();
            }
        }
    }
    text
}

/// Content of the first fenced code block, or the whole reply when there is none.
pub fn first_code_block(reply: &str) -> String {
    let Some(open) = reply.find("```") else { return reply.trim().to_string() };
    let after = &reply[open + 3..];
    let body = match after.find('\n') {
        Some(nl) => &after[nl + 1..],
        None => return reply.trim().to_string(),
    };
    let end = body.find("```").unwrap_or(body.len());
    body[..end].trim_end_matches(['\n', '\r']).to_string()
}

/// Call the backend up to `1 + max_retries` times until `accept` succeeds.
fn with_retries<T>(
    cfg: &AgentConfig,
    kind: AgentKind,
    bindings: &BTreeMap<&str, String>,
    hint: Hint,
    mut accept: impl FnMut(&str) -> Result<T, AgentError>,
) -> Result<T, AgentError> {
    let (system, user) = render_prompt(kind, bindings)?;
    let mut last = None;
    for attempt in 0..=cfg.max_retries {
        let req = ChatRequest {
            system: system.clone(),
            user: user.clone(),
            decoding: Decoding { temperature: 0.0, ..cfg.decoding },
            attempt,
            hint: Some(hint.clone()),
        };
        let reply = cfg.backend.complete(&req)?;
        let reply = truncate_tokens(&reply, cfg.decoding.max_new_tokens as usize);
        match accept(reply) {
            Ok(v) => return Ok(v),
            Err(e) => {
                log::debug!("{} attempt {attempt} rejected: {e}", kind.name());
                last = Some(e);
            }
        }
    }
    Err(last.expect("at least one attempt is made"))
}

pub fn cq_check(sample: &SeedSample, cfg: &AgentConfig) -> Result<bool, AgentError> {
    let header = sample.header()?;
    let code = format!("{}\n{}", header.raw_text, sample.solution.trim_end());
    let mut b = BTreeMap::new();
    b.insert("input", truncate_tokens(&code, cfg.max_input_tokens).to_string());
    with_retries(cfg, AgentKind::Cq, &b, Hint::Cq(sample.clone()), |reply| {
        match reply.trim().to_ascii_lowercase().as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(AgentError::UnparseableVerdict(reply.trim().to_string())),
        }
    })
}

/// Check a translated header against its source; empty means it passes.
pub fn translation_report(src: &Header, tgt: LanguageId, reply: &str) -> Result<Header, Vec<String>> {
    let h = parse_header(tgt, reply).map_err(|e| vec![format!("parse: {e}")])?;
    let mut report = Vec::new();
    if h.signature.name != src.signature.name {
        report.push(format!(
            "name preservation: expected {}, got {}",
            src.signature.name, h.signature.name
        ));
    }
    if h.signature.arity() != src.signature.arity() {
        report.push(format!(
            "arity preservation: expected {}, got {}",
            src.signature.arity(),
            h.signature.arity()
        ));
    }
    let names = |x: &Header| x.signature.params.iter().map(|p| p.name.clone()).collect::<Vec<_>>();
    if report.is_empty() && names(&h) != names(src) {
        report.push("parameter order preservation".into());
    }
    if report.is_empty() {
        Ok(h)
    } else {
        Err(report)
    }
}

pub fn ct_translate(src: &Header, tgt: LanguageId, cfg: &AgentConfig) -> Result<Header, AgentError> {
    let (ex_in, ex_out) = ct_exemplar(src.language, tgt);
    let mut b = BTreeMap::new();
    b.insert("source", src.language.to_string());
    b.insert("target", tgt.to_string());
    b.insert("example_input", ex_in);
    b.insert("example_output", ex_out);
    b.insert("input", truncate_tokens(&src.raw_text, cfg.max_input_tokens).to_string());
    let hint = Hint::Ct { header: src.clone(), target: tgt };
    with_retries(cfg, AgentKind::Ct, &b, hint, |reply| {
        let text = first_code_block(reply);
        translation_report(src, tgt, &text).map_err(AgentError::ValidationFailed)
    })
}

pub fn scot_generate(header: &Header, cfg: &AgentConfig) -> Result<ScotDocument, AgentError> {
    let mut b = BTreeMap::new();
    b.insert("demo_input", SCOT_DEMO_INPUT.trim_end().to_string());
    b.insert("demo_output", SCOT_DEMO_OUTPUT.trim_end().to_string());
    b.insert("input", truncate_tokens(&header.raw_text, cfg.max_input_tokens).to_string());
    with_retries(cfg, AgentKind::Scot, &b, Hint::Scot(header.clone()), |reply| {
        let doc = parse_scot(reply).map_err(AgentError::ScotParseFailed)?;
        let v = validate(&doc);
        if !v.is_empty() {
            return Err(AgentError::ScotParseFailed(ScotError::InvalidDocument(v)));
        }
        Ok(doc)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scot::structure_fingerprint;
    use std::sync::atomic::{AtomicU32, Ordering};

    pub(crate) fn seed(task: &str, doc: &str, sig: &str, sol: &str) -> SeedSample {
        SeedSample {
            task_id: task.into(),
            language: LanguageId::Python,
            docstring: doc.into(),
            signature: sig.into(),
            solution: sol.into(),
            tests: "assert True".into(),
        }
    }

    fn mock() -> AgentConfig {
        AgentConfig::new(Arc::new(MockBackend::new(0)))
    }

    fn scripted(key: &str, replies: &[&str]) -> AgentConfig {
        let m = MockBackend::new(0).with_fixture(key, replies.iter().map(|s| s.to_string()).collect());
        AgentConfig::new(Arc::new(m))
    }

    /// Counts calls and always answers `reply`.
    struct Counting(AtomicU32, String);
    impl ChatBackend for Counting {
        fn kind(&self) -> &'static str {
            "counting"
        }
        fn complete(&self, _: &ChatRequest) -> Result<String, BackendError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok(self.1.clone())
        }
    }

    #[test]
    fn cq_mock_rule() {
        let good = seed("a", "Add x and y.", "def add(x, y):", "    return x + y");
        let empty = seed("b", "Add x and y.", "def add(x, y):", "    pass");
        let undocumented = seed("c", "Add two numbers.", "def add(x, y):", "    return x + y");
        assert!(cq_check(&good, &mock()).unwrap());
        assert!(!cq_check(&empty, &mock()).unwrap());
        assert!(!cq_check(&undocumented, &mock()).unwrap());
    }

    #[test]
    fn cq_strict_verdict_parse() {
        let s = seed("a", "Add x and y.", "def add(x, y):", "    return x + y");
        assert!(cq_check(&s, &scripted("cq:a", &["True"])).unwrap());
        assert!(!cq_check(&s, &scripted("cq:a", &["  false\n"])).unwrap());
        assert_eq!(
            cq_check(&s, &scripted("cq:a", &["Yes"])).unwrap_err(),
            AgentError::UnparseableVerdict("Yes".into())
        );
        assert!(cq_check(&s, &scripted("cq:a", &["Yes", "maybe", "TRUE"])).unwrap());
    }

    #[test]
    fn retry_bound() {
        let b = Arc::new(Counting(AtomicU32::new(0), "nope".into()));
        let mut cfg = AgentConfig::new(b.clone());
        cfg.max_retries = 3;
        let s = seed("a", "Add x and y.", "def add(x, y):", "    return x + y");
        assert!(cq_check(&s, &cfg).is_err());
        assert_eq!(b.0.load(Ordering::SeqCst), 4);
    }

    fn published_input() -> Header {
        parse_header(LanguageId::Python, "def below_zero(operations) -> bool:\n``` You're given a list of (more information)\n'''").unwrap()
    }

    #[test]
    fn ct_mock_reproduces_published_example() {
        let h = ct_translate(&published_input(), LanguageId::TypeScript, &mock()).unwrap();
        assert_eq!(
            h.raw_text,
            "/**\n * You're an expert TypeScript programmer\n * You're given a list of (more information)\n */\nconst below_zero = function (operations): boolean {"
        );
    }

    #[test]
    fn ct_same_language_is_canonical_identity() {
        let src = published_input();
        let h = ct_translate(&src, LanguageId::Python, &mock()).unwrap();
        assert_eq!(h.signature, src.signature);
        assert_eq!(h.docstring, src.docstring);
    }

    #[test]
    fn ct_renamed_function_fails_validation() {
        let bad = "/**\n * x\n */\nconst above_zero = function (operations): boolean {";
        let cfg = scripted("ct:below_zero:TypeScript", &[bad]);
        match ct_translate(&published_input(), LanguageId::TypeScript, &cfg).unwrap_err() {
            AgentError::ValidationFailed(r) => assert!(r[0].starts_with("name preservation"), "{r:?}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn ct_accepts_fenced_reply() {
        let good = "```typescript\n/**\n * x\n */\nconst below_zero = function (operations): boolean {\n```";
        let cfg = scripted("ct:below_zero:TypeScript", &[good]);
        let h = ct_translate(&published_input(), LanguageId::TypeScript, &cfg).unwrap();
        assert_eq!(h.signature.name, "below_zero");
    }

    #[test]
    fn scot_mock_template_for_below_zero() {
        let s = seed(
            "HumanEval/3",
            "You're given a list of deposit and withdrawal operations on a bank account that starts with zero balance. Your task is to detect if at any point the balance of account falls below zero, and at that point function should return True. Otherwise it should return False.",
            "def below_zero(operations: List[int]) -> bool:",
            "    return False",
        );
        let doc = scot_generate(&s.header().unwrap(), &mock()).unwrap();
        assert_eq!(structure_fingerprint(&doc), "S L( S B( S ) ) S");
    }

    #[test]
    fn scot_mock_floor_is_single_step() {
        let h = parse_header(LanguageId::Python, "def f():").unwrap();
        let doc = scot_generate(&h, &mock()).unwrap();
        assert_eq!(structure_fingerprint(&doc), "S");
        assert_eq!(crate::scot::render_scot(&doc).unwrap().lines().count(), 4);
    }

    #[test]
    fn scot_reply_without_preamble() {
        let h = parse_header(LanguageId::Python, "def f():").unwrap();
        let cfg = scripted("scot:f", &["Input: x\nOutput: y\n1. return x"]);
        match scot_generate(&h, &cfg).unwrap_err() {
            AgentError::ScotParseFailed(e) => assert_eq!(e.name(), "MissingPreamble"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn truncation_keeps_spacing() {
        assert_eq!(truncate_tokens("a  b\nc d", 3), "a  b\nc");
        assert_eq!(truncate_tokens("a b", 5), "a b");
        assert_eq!(truncate_tokens("a b ", 2), "a b");
    }

    #[test]
    fn fence_extraction() {
        assert_eq!(first_code_block("```\ncode\n```"), "code");
        assert_eq!(first_code_block("Here you go:\n```rust\nfn x() {}\n```\ntrailing"), "fn x() {}");
        assert_eq!(first_code_block("plain"), "plain");
    }

    #[test]
    fn mock_is_deterministic_and_injects_by_seed() {
        let s = seed("a", "Add x and y.", "def add(x, y):", "    return x + y");
        let mut m = MockBackend::new(9);
        m.failure_rate = 0.5;
        let cfg = AgentConfig::new(Arc::new(m));
        let runs: Vec<_> = (0..3).map(|_| cq_check(&s, &cfg)).collect();
        assert!(runs.windows(2).all(|w| w[0] == w[1]));
    }
}
