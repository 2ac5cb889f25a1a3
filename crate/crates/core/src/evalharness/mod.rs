//! Two-phase Pass@1 / CoT-Pass@1 evaluation over sandboxed runs.

mod sandbox;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

pub use sandbox::{
    missing_tools, run_candidate, CancelToken, LangRunner, RunResult, RunnerSpec, Status, ENV_ALLOWLIST, OUTPUT_CAP,
};

use crate::agents::{first_code_block, scot_generate, AgentConfig, BackendError, ChatBackend, ChatRequest, Decoding, Hint};
use crate::par::Exec;
use crate::scot::{render_scot, ScotDocument};
use crate::sig_ir::{parse_header, LanguageId};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no results to score")]
    EmptyInput,
    #[error("missing languages for parity mode: {0:?}")]
    MissingLanguage(Vec<LanguageId>),
    #[error("backend error on {task_id}: {error}")]
    Backend { task_id: String, error: BackendError, partial: Vec<LedgerEntry> },
    #[error("no CoT available for {0}")]
    MissingCot(String),
    #[error("benchmark line {line}: {reason}")]
    Bench { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Exact hundredths, for presenting percentages at two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Centi(pub i64);

impl Centi {
    /// Half-up; the small bias absorbs binary representation error on exact ties.
    pub fn from_f64(x: f64) -> Centi {
        Centi((x * 100.0 + 0.5 + 1e-9).floor() as i64)
    }

    /// `num / den` in hundredths, half-up, computed in integers.
    pub fn ratio(num: u64, den: u64) -> Centi {
        assert!(den > 0);
        Centi(((200 * num as u128 + den as u128) / (2 * den as u128)) as i64)
    }

    /// `100 * num / den` in hundredths.
    pub fn percent(num: u64, den: u64) -> Centi {
        Self::ratio(100 * num, den)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Centi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        write!(f, "{sign}{}.{:02}", self.0.abs() / 100, self.0.abs() % 100)
    }
}

impl Serialize for Centi {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchTask {
    pub task_id: String,
    pub language: LanguageId,
    pub prompt: String,
    pub tests: String,
    pub entry_point: String,
}

pub fn load_bench(path: &Path) -> Result<Vec<BenchTask>, EvalError> {
    let text = fs::read_to_string(path).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: BenchTask =
            serde_json::from_str(line).map_err(|e| EvalError::Bench { line: i + 1, reason: e.to_string() })?;
        if !t.tests.contains(&t.entry_point) {
            return Err(EvalError::Bench { line: i + 1, reason: format!("tests never reference {}", t.entry_point) });
        }
        out.push(t);
    }
    Ok(out)
}

pub fn pass_at_1(results: &[RunResult]) -> Result<f64, EvalError> {
    let scored: Vec<&RunResult> = results.iter().filter(|r| r.status != Status::Skipped).collect();
    if scored.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let pass = scored.iter().filter(|r| r.status == Status::Pass).count();
    Ok(100.0 * pass as f64 / scored.len() as f64)
}

/// Mean over the given languages. Parity mode demands all twelve.
pub fn aggregate(per_language: &BTreeMap<LanguageId, f64>, parity: bool) -> Result<f64, EvalError> {
    if parity {
        let missing: Vec<LanguageId> =
            LanguageId::ALL.iter().filter(|l| !per_language.contains_key(l)).copied().collect();
        if !missing.is_empty() {
            return Err(EvalError::MissingLanguage(missing));
        }
    }
    if per_language.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(per_language.values().sum::<f64>() / per_language.len() as f64)
}

pub const CODE_SYSTEM: &str = "You are a helpful code assistant.";

/// One greedy generation; with a CoT the user text is the prompt, a newline, then the CoT.
pub fn generate_code(
    backend: &dyn ChatBackend,
    task: &BenchTask,
    cot: Option<&ScotDocument>,
    phase: u8,
) -> Result<String, BackendError> {
    let user = match cot {
        Some(c) => format!(
            "{}\n{}",
            task.prompt,
            render_scot(c).map_err(|e| BackendError::Malformed(e.to_string()))?
        ),
        None => task.prompt.clone(),
    };
    let req = ChatRequest {
        system: CODE_SYSTEM.into(),
        user,
        decoding: Decoding::default(),
        attempt: 0,
        hint: Some(Hint::Code { task_id: task.task_id.clone(), phase }),
    };
    backend.complete(&req).map(|r| first_code_block(&r))
}

/// Mock code model: replies by (task_id, phase), falling back to the phase-1 script when
/// phase 2 has none (a model that ignores the CoT). Counts calls per phase.
#[derive(Debug, Default)]
pub struct ScriptedCodeBackend {
    scripts: BTreeMap<(String, u8), String>,
    calls: [AtomicUsize; 2],
}

impl ScriptedCodeBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn script(mut self, task_id: &str, phase: u8, code: &str) -> Self {
        self.scripts.insert((task_id.to_string(), phase), code.to_string());
        self
    }

    /// `{"task_id": {"1": code, "2": code}}`
    pub fn from_json(text: &str) -> Result<Self, String> {
        let m: BTreeMap<String, BTreeMap<String, String>> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut s = Self::new();
        for (tid, phases) in m {
            for (p, code) in phases {
                let phase: u8 = p.parse().map_err(|_| format!("{tid}: phase {p:?} is not 1 or 2"))?;
                if !(1..=2).contains(&phase) {
                    return Err(format!("{tid}: phase {p:?} is not 1 or 2"));
                }
                s.scripts.insert((tid.clone(), phase), code);
            }
        }
        Ok(s)
    }

    pub fn calls(&self, phase: u8) -> usize {
        self.calls[usize::from(phase.clamp(1, 2) - 1)].load(Ordering::SeqCst)
    }
}

impl ChatBackend for ScriptedCodeBackend {
    fn kind(&self) -> &'static str {
        "scripted"
    }

    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let Some(Hint::Code { task_id, phase }) = &req.hint else {
            return Err(BackendError::NoRule("scripted backend only answers code requests".into()));
        };
        self.calls[usize::from((*phase).clamp(1, 2) - 1)].fetch_add(1, Ordering::SeqCst);
        self.scripts
            .get(&(task_id.clone(), *phase))
            .or_else(|| self.scripts.get(&(task_id.clone(), 1)))
            .map(|c| format!("```\n{c}\n```"))
            .ok_or_else(|| BackendError::NoRule(format!("code:{task_id}:{phase}")))
    }
}

pub trait Executor: Sync {
    fn execute(&self, task: &BenchTask, code: &str) -> RunResult;
}

pub struct Sandbox {
    pub spec: RunnerSpec,
    pub cancel: CancelToken,
}

impl Executor for Sandbox {
    fn execute(&self, task: &BenchTask, code: &str) -> RunResult {
        run_candidate(task.language, code, &task.tests, &self.spec, &self.cancel)
    }
}

pub trait CotProvider: Sync {
    fn cot(&self, task: &BenchTask) -> Result<ScotDocument, EvalError>;
}

/// CoTs keyed by task id, e.g. loaded from a dataset store or a baseline file.
impl CotProvider for BTreeMap<String, ScotDocument> {
    fn cot(&self, task: &BenchTask) -> Result<ScotDocument, EvalError> {
        self.get(&task.task_id).cloned().ok_or_else(|| EvalError::MissingCot(task.task_id.clone()))
    }
}

/// Generate the CoT on demand from the task prompt through the SCoT agent.
pub struct AgentCots(pub AgentConfig);

impl CotProvider for AgentCots {
    fn cot(&self, task: &BenchTask) -> Result<ScotDocument, EvalError> {
        let h = parse_header(task.language, &task.prompt)
            .map_err(|e| EvalError::Bench { line: 0, reason: format!("{}: {e}", task.task_id) })?;
        scot_generate(&h, &self.0).map_err(|e| EvalError::MissingCot(format!("{}: {e}", task.task_id)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub task_id: String,
    pub language: LanguageId,
    pub phase1: RunResult,
    pub phase2: Option<RunResult>,
}

impl LedgerEntry {
    pub fn skipped(&self) -> bool {
        self.phase1.status == Status::Skipped
    }
    pub fn pass1(&self) -> bool {
        self.phase1.status == Status::Pass
    }
    /// Union semantics: a phase-1 pass counts, otherwise the phase-2 outcome decides.
    pub fn pass_either(&self) -> bool {
        self.pass1() || self.phase2.as_ref().is_some_and(|r| r.status == Status::Pass)
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub ledger: Vec<LedgerEntry>,
    pub phase2_generations: usize,
}

impl Evaluation {
    fn scored(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.ledger.iter().filter(|e| !e.skipped())
    }

    pub fn pass_at_1(&self) -> Result<f64, EvalError> {
        let n = self.scored().count();
        if n == 0 {
            return Err(EvalError::EmptyInput);
        }
        Ok(100.0 * self.scored().filter(|e| e.pass1()).count() as f64 / n as f64)
    }

    pub fn cot_pass_at_1(&self) -> Result<f64, EvalError> {
        let n = self.scored().count();
        if n == 0 {
            return Err(EvalError::EmptyInput);
        }
        Ok(100.0 * self.scored().filter(|e| e.pass_either()).count() as f64 / n as f64)
    }

    pub fn report(&self, parity: bool) -> Result<MetricsReport, EvalError> {
        let mut by_lang: BTreeMap<LanguageId, Vec<&LedgerEntry>> = BTreeMap::new();
        for e in &self.ledger {
            by_lang.entry(e.language).or_default().push(e);
        }
        let mut per_language = BTreeMap::new();
        for (lang, rows) in by_lang {
            let scored: Vec<&&LedgerEntry> = rows.iter().filter(|e| !e.skipped()).collect();
            let n = scored.len() as u64;
            let p1 = scored.iter().filter(|e| e.pass1()).count() as u64;
            let p2 = scored.iter().filter(|e| e.pass_either()).count() as u64;
            per_language.insert(
                lang,
                LangCounts { tasks: rows.len() as u64, skipped: rows.len() as u64 - n, pass1: p1, pass_either: p2 },
            );
        }
        MetricsReport::from_counts(&per_language, parity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LangCounts {
    pub tasks: u64,
    pub skipped: u64,
    pub pass1: u64,
    pub pass_either: u64,
}

pub struct EvalOptions {
    pub exec: Exec,
    pub max_procs: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            exec: Exec::default(),
            max_procs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

/// Phase 1 on every task; phase 2 with CoT only on the scored phase-1 failures.
pub fn cot_pass_at_1(
    tasks: &[BenchTask],
    backend: &dyn ChatBackend,
    cots: &dyn CotProvider,
    executor: &dyn Executor,
    opts: &EvalOptions,
) -> Result<Evaluation, EvalError> {
    let phase1 = opts.exec.map_bounded(tasks, opts.max_procs, |t| {
        generate_code(backend, t, None, 1).map(|code| executor.execute(t, &code))
    });
    let mut ledger = Vec::with_capacity(tasks.len());
    let mut first_err = None;
    for (t, r) in tasks.iter().zip(phase1) {
        match r {
            Ok(res) => ledger.push(LedgerEntry {
                task_id: t.task_id.clone(),
                language: t.language,
                phase1: res,
                phase2: None,
            }),
            Err(e) => {
                first_err.get_or_insert((t.task_id.clone(), e));
            }
        }
    }
    if let Some((task_id, error)) = first_err {
        return Err(EvalError::Backend { task_id, error, partial: ledger });
    }
    let retry: Vec<usize> = (0..ledger.len()).filter(|&i| !ledger[i].skipped() && !ledger[i].pass1()).collect();
    let phase2 = opts.exec.map_bounded(&retry, opts.max_procs, |&i| {
        let t = &tasks[i];
        let cot = cots.cot(t)?;
        let code = generate_code(backend, t, Some(&cot), 2)
            .map_err(|error| EvalError::Backend { task_id: t.task_id.clone(), error, partial: vec![] })?;
        Ok::<_, EvalError>(executor.execute(t, &code))
    });
    let mut generations = 0;
    let mut failure = None;
    for (&i, r) in retry.iter().zip(phase2) {
        match r {
            Ok(res) => {
                generations += 1;
                ledger[i].phase2 = Some(res);
            }
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    if let Some(e) = failure {
        return Err(match e {
            EvalError::Backend { task_id, error, .. } => EvalError::Backend { task_id, error, partial: ledger },
            other => other,
        });
    }
    Ok(Evaluation { ledger, phase2_generations: generations })
}

pub fn write_ledger(path: &Path, ledger: &[LedgerEntry]) -> Result<(), EvalError> {
    let mut f = fs::File::create(path).map_err(|e| EvalError::Io(e.to_string()))?;
    for e in ledger {
        let line = serde_json::to_string(e).expect("ledger entries serialize");
        writeln!(f, "{line}").map_err(|e| EvalError::Io(e.to_string()))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LangMetrics {
    pub tasks: u64,
    pub skipped: u64,
    pub pass_at_1: Option<Centi>,
    pub cot_pass_at_1: Option<Centi>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub per_language: BTreeMap<LanguageId, LangMetrics>,
    /// Average CoT-Pass@1.
    pub avg: Centi,
    /// Average Pass@1.
    pub baseline_avg: Centi,
    pub delta: Centi,
    pub skipped_languages: Vec<LanguageId>,
}

impl MetricsReport {
    /// Build from per-language percentages. Averages use unrounded means; the delta is taken
    /// between the two presented averages, as published tables do.
    pub fn from_values(
        pass: &BTreeMap<LanguageId, f64>,
        cot: &BTreeMap<LanguageId, f64>,
        parity: bool,
    ) -> Result<MetricsReport, EvalError> {
        let baseline_avg = Centi::from_f64(aggregate(pass, parity)?);
        let avg = Centi::from_f64(aggregate(cot, parity)?);
        let per_language = pass
            .keys()
            .chain(cot.keys())
            .map(|l| {
                (
                    *l,
                    LangMetrics {
                        tasks: 0,
                        skipped: 0,
                        pass_at_1: pass.get(l).map(|v| Centi::from_f64(*v)),
                        cot_pass_at_1: cot.get(l).map(|v| Centi::from_f64(*v)),
                    },
                )
            })
            .collect();
        Ok(MetricsReport { per_language, avg, baseline_avg, delta: Centi(avg.0 - baseline_avg.0), skipped_languages: vec![] })
    }

    pub fn from_counts(counts: &BTreeMap<LanguageId, LangCounts>, parity: bool) -> Result<MetricsReport, EvalError> {
        let scored = |c: &&LangCounts| c.tasks > c.skipped;
        let pct = |num: u64, c: &LangCounts| 100.0 * num as f64 / (c.tasks - c.skipped) as f64;
        let pass: BTreeMap<LanguageId, f64> =
            counts.iter().filter(|(_, c)| scored(c)).map(|(l, c)| (*l, pct(c.pass1, c))).collect();
        let cot: BTreeMap<LanguageId, f64> =
            counts.iter().filter(|(_, c)| scored(c)).map(|(l, c)| (*l, pct(c.pass_either, c))).collect();
        let skipped_languages: Vec<LanguageId> =
            counts.iter().filter(|(_, c)| !scored(c)).map(|(l, _)| *l).collect();
        for l in &skipped_languages {
            log::warn!("{l}: every task was skipped; language excluded from averages");
        }
        let mut report = Self::from_values(&pass, &cot, parity)?;
        report.skipped_languages = skipped_languages;
        for (l, c) in counts {
            let n = c.tasks - c.skipped;
            report.per_language.insert(
                *l,
                LangMetrics {
                    tasks: c.tasks,
                    skipped: c.skipped,
                    pass_at_1: (n > 0).then(|| Centi::percent(c.pass1, n)),
                    cot_pass_at_1: (n > 0).then(|| Centi::percent(c.pass_either, n)),
                },
            );
        }
        Ok(report)
    }

    /// Two rows in the shape of the published table: Pass@1 then CoT-Pass@1.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let langs: Vec<&LanguageId> = self.per_language.keys().collect();
        let mut head = vec!["Method".to_string()];
        head.extend(langs.iter().map(|l| l.to_string()));
        head.extend(["Avg.".to_string(), "Delta".to_string()]);
        w.write_record(&head).expect("in-memory write");
        let cell = |v: Option<Centi>| v.map(|c| c.to_string()).unwrap_or_else(|| "skipped".into());
        let mut row = vec!["Pass@1".to_string()];
        row.extend(langs.iter().map(|l| cell(self.per_language[l].pass_at_1)));
        row.extend([self.baseline_avg.to_string(), String::new()]);
        w.write_record(&row).expect("in-memory write");
        let mut row = vec!["CoT-Pass@1".to_string()];
        row.extend(langs.iter().map(|l| cell(self.per_language[l].cot_pass_at_1)));
        let sign = if self.delta.0 >= 0 { "+" } else { "" };
        row.extend([self.avg.to_string(), format!("{sign}{}", self.delta)]);
        w.write_record(&row).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn write(&self, json_path: &Path, csv_path: &Path) -> Result<(), EvalError> {
        let json = serde_json::to_string_pretty(self).expect("report serializes") + "\n";
        fs::write(json_path, json).map_err(|e| EvalError::Io(e.to_string()))?;
        fs::write(csv_path, self.to_csv()).map_err(|e| EvalError::Io(e.to_string()))
    }
}
