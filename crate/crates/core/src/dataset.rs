//! Construction pipeline, on-disk store, manifest checks and instruction export.
//!
//! Store layout: `records/<Language>.jsonl`, `rejects.jsonl`, `manifest.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::{cq_check, ct_translate, scot_generate, AgentConfig, AgentError, SeedSample, TEMPLATE_VERSION};
use crate::lora::Hyperparams;
use crate::par::Exec;
use crate::scot::{render_scot, ScotDocument};
use crate::sig_ir::{parse_header, Header, LanguageId};

const SEED_FIELDS: [&str; 6] = ["task_id", "language", "docstring", "signature", "solution", "tests"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaIssue {
    pub line: usize,
    pub field: String,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error on {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("seed schema errors: {}", fmt_issues(.0))]
    SchemaError(Vec<SchemaIssue>),
    #[error("pipeline aborted: {failures} of {total} seeds hit backend failures")]
    PipelineAborted { failures: usize, total: usize, partial: Box<BuildOutput> },
    #[error("integrity violations: {}", .0.join("; "))]
    IntegrityViolation(Vec<String>),
    #[error("no target languages given")]
    NoLanguages,
}

fn fmt_issues(v: &[SchemaIssue]) -> String {
    v.iter()
        .map(|i| format!("line {} field {}: {}", i.line, i.field, i.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |e| DatasetError::Io { path: path.to_path_buf(), reason: e.to_string() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub backend: String,
    pub templates: String,
    /// Seconds since the Unix epoch; always 0 for the mock backend so builds are byte-stable.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RecordRow", into = "RecordRow")]
pub struct CotRecord {
    pub task_id: String,
    pub language: LanguageId,
    pub header: Header,
    pub cot: ScotDocument,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct RecordRow {
    task_id: String,
    language: LanguageId,
    header: String,
    cot: ScotDocument,
    provenance: Provenance,
}

impl From<CotRecord> for RecordRow {
    fn from(r: CotRecord) -> Self {
        RecordRow {
            task_id: r.task_id,
            language: r.language,
            header: r.header.raw_text,
            cot: r.cot,
            provenance: r.provenance,
        }
    }
}

impl TryFrom<RecordRow> for CotRecord {
    type Error = String;
    fn try_from(r: RecordRow) -> Result<Self, String> {
        let header = parse_header(r.language, &r.header).map_err(|e| format!("{}: {e}", r.task_id))?;
        Ok(CotRecord { task_id: r.task_id, language: r.language, header, cot: r.cot, provenance: r.provenance })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub task_id: String,
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildOutput {
    pub records: Vec<CotRecord>,
    pub rejects: Vec<Reject>,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub languages: Vec<LanguageId>,
    pub counts: BTreeMap<LanguageId, usize>,
    pub total: usize,
    pub seeds: usize,
    pub rejected: usize,
    pub seed_hash: String,
    pub config_hash: String,
    pub complete: bool,
}

#[derive(Debug, Clone)]
pub struct Ingest {
    pub samples: Vec<SeedSample>,
    pub warnings: Vec<String>,
}

pub fn ingest_seed(path: &Path) -> Result<Ingest, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut issues = Vec::new();
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                issues.push(SchemaIssue { line: n, field: "-".into(), reason: e.to_string() });
                continue;
            }
        };
        let before = issues.len();
        for f in SEED_FIELDS {
            match v.get(f) {
                Some(Value::String(s)) if s.trim().is_empty() && matches!(f, "task_id" | "docstring" | "signature") => {
                    issues.push(SchemaIssue { line: n, field: f.into(), reason: "empty".into() })
                }
                Some(Value::String(_)) => {}
                Some(_) => issues.push(SchemaIssue { line: n, field: f.into(), reason: "not a string".into() }),
                None => issues.push(SchemaIssue { line: n, field: f.into(), reason: "missing".into() }),
            }
        }
        if issues.len() > before {
            continue;
        }
        match serde_json::from_value::<SeedSample>(v) {
            Ok(s) => samples.push(s),
            Err(e) => issues.push(SchemaIssue { line: n, field: "language".into(), reason: e.to_string() }),
        }
    }
    if !issues.is_empty() {
        return Err(DatasetError::SchemaError(issues));
    }
    let mut seen = BTreeSet::new();
    let mut warnings = Vec::new();
    samples.retain(|s| {
        let fresh = seen.insert(s.task_id.clone());
        if !fresh {
            warnings.push(format!("duplicate task_id {} dropped", s.task_id));
        }
        fresh
    });
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Ingest { samples, warnings })
}

pub struct BuildConfig {
    pub agents: AgentConfig,
    pub exec: Exec,
    pub max_in_flight: usize,
    /// Abort when more than this fraction of seeds hit a backend error.
    pub abort_threshold: f64,
}

impl BuildConfig {
    pub fn new(agents: AgentConfig) -> Self {
        BuildConfig { agents, exec: Exec::default(), max_in_flight: 8, abort_threshold: 0.2 }
    }
}

enum SeedOutcome {
    Kept(Vec<CotRecord>),
    Rejected(Reject, bool),
}

fn reject(task: &str, stage: &str, e: &AgentError) -> SeedOutcome {
    let backend = matches!(e, AgentError::Backend(_));
    SeedOutcome::Rejected(Reject { task_id: task.into(), stage: stage.into(), reason: e.to_string() }, backend)
}

fn run_seed(seed: &SeedSample, languages: &[LanguageId], cfg: &AgentConfig, prov: &Provenance) -> SeedOutcome {
    let tid = &seed.task_id;
    match cq_check(seed, cfg) {
        Ok(true) => {}
        Ok(false) => {
            return SeedOutcome::Rejected(
                Reject { task_id: tid.clone(), stage: "cq".into(), reason: "quality check returned False".into() },
                false,
            )
        }
        Err(e) => return reject(tid, "cq", &e),
    }
    let src = match seed.header() {
        Ok(h) => h,
        Err(e) => return reject(tid, "header", &AgentError::Header(e)),
    };
    let cot = match scot_generate(&src, cfg) {
        Ok(d) => d,
        Err(e) => return reject(tid, "scot", &e),
    };
    let mut out = Vec::with_capacity(languages.len());
    for &lang in languages {
        match ct_translate(&src, lang, cfg) {
            Ok(header) => out.push(CotRecord {
                task_id: tid.clone(),
                language: lang,
                header,
                cot: cot.clone(),
                provenance: prov.clone(),
            }),
            Err(e) => return reject(tid, &format!("ct:{lang}"), &e),
        }
    }
    SeedOutcome::Kept(out)
}

/// Filter, generate one CoT per seed from its own header, and fan it out across `languages`.
pub fn build_dataset(
    seeds: &[SeedSample],
    languages: &[LanguageId],
    cfg: &BuildConfig,
) -> Result<BuildOutput, DatasetError> {
    if languages.is_empty() {
        return Err(DatasetError::NoLanguages);
    }
    let mut langs = languages.to_vec();
    langs.sort();
    langs.dedup();
    let kind = cfg.agents.backend.kind();
    let prov = Provenance {
        backend: kind.to_string(),
        templates: format!("cq.{v},ct.{v},scot.{v}", v = TEMPLATE_VERSION),
        timestamp: if kind == "mock" {
            0
        } else {
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        },
    };
    let outcomes = cfg
        .exec
        .map_bounded(seeds, cfg.max_in_flight, |s| run_seed(s, &langs, &cfg.agents, &prov));
    let mut out = BuildOutput { seeds: seeds.len(), ..Default::default() };
    let mut failures = 0;
    for o in outcomes {
        match o {
            SeedOutcome::Kept(r) => out.records.extend(r),
            SeedOutcome::Rejected(r, backend) => {
                failures += usize::from(backend);
                out.rejects.push(r);
            }
        }
    }
    out.records.sort_by(|a, b| (&a.task_id, a.language).cmp(&(&b.task_id, b.language)));
    out.rejects.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    if !seeds.is_empty() && failures as f64 / seeds.len() as f64 > cfg.abort_threshold {
        return Err(DatasetError::PipelineAborted { failures, total: seeds.len(), partial: Box::new(out) });
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn seed_hash(seeds: &[SeedSample]) -> String {
    sha256_hex(&serde_json::to_vec(seeds).expect("seed samples serialize"))
}

fn counts(records: &[CotRecord]) -> BTreeMap<LanguageId, usize> {
    let mut c = BTreeMap::new();
    for r in records {
        *c.entry(r.language).or_insert(0) += 1;
    }
    c
}

pub fn manifest_for(
    out: &BuildOutput,
    languages: &[LanguageId],
    seed_hash: String,
    config_hash: String,
    complete: bool,
) -> DatasetManifest {
    let mut langs = languages.to_vec();
    langs.sort();
    langs.dedup();
    let mut c = counts(&out.records);
    for l in &langs {
        c.entry(*l).or_insert(0);
    }
    DatasetManifest {
        languages: langs,
        total: out.records.len(),
        counts: c,
        seeds: out.seeds,
        rejected: out.rejects.len(),
        seed_hash,
        config_hash,
        complete,
    }
}

fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<usize, DatasetError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    let mut n = 0;
    for r in rows {
        let line = serde_json::to_string(&r).expect("rows serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
        n += 1;
    }
    w.flush().map_err(io_err(path))?;
    Ok(n)
}

fn shard_path(dir: &Path, lang: LanguageId) -> PathBuf {
    dir.join("records").join(format!("{lang}.jsonl"))
}

pub fn write_store(dir: &Path, out: &BuildOutput, manifest: &DatasetManifest) -> Result<(), DatasetError> {
    let records_dir = dir.join("records");
    fs::create_dir_all(&records_dir).map_err(io_err(&records_dir))?;
    for &lang in &manifest.languages {
        let rows = out.records.iter().filter(|r| r.language == lang).cloned();
        write_jsonl(&shard_path(dir, lang), rows)?;
    }
    write_jsonl(&dir.join("rejects.jsonl"), &out.rejects)?;
    let mpath = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&mpath, text + "\n").map_err(io_err(&mpath))
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest, DatasetError> {
    let p = dir.join("manifest.json");
    let text = fs::read_to_string(&p).map_err(io_err(&p))?;
    serde_json::from_str(&text).map_err(|e| DatasetError::IntegrityViolation(vec![format!("manifest.json: {e}")]))
}

/// Load every shard; rows that fail to decode are reported, not skipped.
fn read_records(dir: &Path, languages: &[LanguageId]) -> Result<(Vec<CotRecord>, Vec<String>), DatasetError> {
    let mut records = Vec::new();
    let mut bad = Vec::new();
    for &lang in languages {
        let p = shard_path(dir, lang);
        let text = match fs::read_to_string(&p) {
            Ok(t) => t,
            Err(e) => {
                bad.push(format!("shard {lang}: {e}"));
                continue;
            }
        };
        for (i, line) in text.lines().enumerate() {
            match serde_json::from_str::<CotRecord>(line) {
                Ok(r) if r.language != lang => bad.push(format!("{}: {} row in {lang} shard", r.task_id, r.language)),
                Ok(r) if r.header.language != r.language => bad.push(format!("{}: header language mismatch", r.task_id)),
                Ok(r) => records.push(r),
                Err(e) => bad.push(format!("{lang} shard line {}: {e}", i + 1)),
            }
        }
    }
    Ok((records, bad))
}

pub fn load_records(dir: &Path) -> Result<Vec<CotRecord>, DatasetError> {
    let m = read_manifest(dir)?;
    let (mut records, bad) = read_records(dir, &m.languages)?;
    if !bad.is_empty() {
        return Err(DatasetError::IntegrityViolation(bad));
    }
    records.sort_by(|a, b| (&a.task_id, a.language).cmp(&(&b.task_id, b.language)));
    Ok(records)
}

/// Recompute counts and the one-to-many property from the shards.
pub fn verify_manifest(dir: &Path) -> Result<DatasetManifest, DatasetError> {
    let stored = read_manifest(dir)?;
    let (records, mut v) = read_records(dir, &stored.languages)?;
    if !stored.complete {
        v.push("manifest marked incomplete".into());
    }
    let mut by_task: BTreeMap<&str, BTreeMap<LanguageId, &CotRecord>> = BTreeMap::new();
    for r in &records {
        if by_task.entry(&r.task_id).or_default().insert(r.language, r).is_some() {
            v.push(format!("{}: duplicate row for {}", r.task_id, r.language));
        }
    }
    for (task, rows) in &by_task {
        let missing: Vec<String> = stored
            .languages
            .iter()
            .filter(|l| !rows.contains_key(l))
            .map(|l| l.to_string())
            .collect();
        if !missing.is_empty() {
            v.push(format!("{task}: fan-out incomplete, missing {}", missing.join(", ")));
        }
        let rendered: BTreeSet<String> = rows
            .values()
            .map(|r| render_scot(&r.cot).unwrap_or_else(|e| format!("invalid: {e}")))
            .collect();
        if rendered.len() > 1 {
            v.push(format!("{task}: CoT differs across languages"));
        }
    }
    let c = counts(&records);
    let mut recomputed = stored.clone();
    recomputed.counts = stored.languages.iter().map(|l| (*l, c.get(l).copied().unwrap_or(0))).collect();
    recomputed.total = records.len();
    if recomputed.counts != stored.counts || recomputed.total != stored.total {
        v.push(format!(
            "counts differ from manifest: stored total {}, found {}",
            stored.total, recomputed.total
        ));
    }
    if recomputed.counts.values().collect::<BTreeSet<_>>().len() > 1 {
        v.push("per-language counts are not equal".into());
    }
    let rejects = fs::read_to_string(dir.join("rejects.jsonl")).map(|t| t.lines().count()).unwrap_or(0);
    if stored.seeds != by_task.len() + rejects {
        v.push(format!(
            "seed accounting: {} seeds, {} kept tasks, {} rejects",
            stored.seeds,
            by_task.len(),
            rejects
        ));
    }
    if v.is_empty() {
        Ok(recomputed)
    } else {
        Err(DatasetError::IntegrityViolation(v))
    }
}

pub fn instruction(lang: LanguageId) -> String {
    format!(
        "You are a helpful {} code assistant.\nPlease understand the requirement and write a rough solving process.",
        lang.name()
    )
}

#[derive(Serialize)]
struct ExportRow<'a> {
    task_id: &'a str,
    language: LanguageId,
    instruction: String,
    input: &'a str,
    output: String,
}

pub fn export_instruction_jsonl(records: &[CotRecord], path: &Path) -> Result<usize, DatasetError> {
    let mut sorted: Vec<&CotRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (&a.task_id, a.language).cmp(&(&b.task_id, b.language)));
    let mut rows = Vec::with_capacity(sorted.len());
    for r in sorted {
        let output = render_scot(&r.cot)
            .map_err(|e| DatasetError::IntegrityViolation(vec![format!("{}: {e}", r.task_id)]))?;
        rows.push(ExportRow {
            task_id: &r.task_id,
            language: r.language,
            instruction: instruction(r.language),
            input: &r.header.raw_text,
            output,
        });
    }
    write_jsonl(path, rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExportManifest {
    pub rows: usize,
    pub dataset: DatasetManifest,
    pub hyperparams: Hyperparams,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::MockBackend;
    use std::sync::Arc;

    fn seed(id: &str) -> SeedSample {
        SeedSample {
            task_id: id.into(),
            language: LanguageId::Python,
            docstring: "Add x and y.".into(),
            signature: "def add(x: int, y: int) -> int:".into(),
            solution: "    return x + y".into(),
            tests: "assert add(1, 2) == 3".into(),
        }
    }

    fn cfg() -> BuildConfig {
        BuildConfig::new(AgentConfig::new(Arc::new(MockBackend::new(0))))
    }

    #[test]
    fn one_seed_one_language() {
        let out = build_dataset(&[seed("t")], &[LanguageId::Go], &cfg()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].language, LanguageId::Go);
        assert_eq!(out.records[0].header.signature.name, "add");
    }

    #[test]
    fn record_json_round_trip() {
        let out = build_dataset(&[seed("t")], &[LanguageId::Kotlin], &cfg()).unwrap();
        let r = &out.records[0];
        let text = serde_json::to_string(r).unwrap();
        assert!(text.contains("\"header\":\""));
        assert_eq!(&serde_json::from_str::<CotRecord>(&text).unwrap(), r);
    }

    #[test]
    fn backend_failures_abort() {
        let mut m = MockBackend::new(1);
        m.failure_rate = 1.0;
        let c = BuildConfig::new(AgentConfig::new(Arc::new(m)));
        match build_dataset(&[seed("a"), seed("b")], &[LanguageId::Go], &c) {
            Err(DatasetError::PipelineAborted { failures: 2, total: 2, partial }) => {
                assert_eq!(partial.rejects.len(), 2)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn instruction_line() {
        assert!(instruction(LanguageId::Go).starts_with("You are a helpful Go code assistant."));
        assert!(instruction(LanguageId::CSharp).starts_with("You are a helpful CSharp code assistant."));
    }
}
