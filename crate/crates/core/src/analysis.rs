//! Cross-language CoT similarity matrices and human-study rubric aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::CotRecord;
use crate::evalharness::Centi;
use crate::par::Exec;
use crate::scot::{fingerprint_tokens, ScotDocument, ScotNode};
use crate::sig_ir::LanguageId;

pub const RUBRIC_SCALE_NOTE: &str = "scores on an assumed 1-5 scale";

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no shared tasks between {0} and {1}")]
    NoSharedTasks(LanguageId, LanguageId),
    #[error("no rubric rows for system {0:?}")]
    EmptyInput(String),
    #[error("rubric line {line}: {reason}")]
    Schema { line: usize, reason: String },
    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },
}

fn io(path: &Path, e: std::io::Error) -> AnalysisError {
    AnalysisError::Io { path: path.display().to_string(), reason: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub lexical: f64,
    pub structural: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { lexical: 0.5, structural: 0.5 }
    }
}

fn collect_text<'a>(nodes: &'a [ScotNode], out: &mut Vec<&'a str>) {
    for n in nodes {
        match n {
            ScotNode::Step { text } => out.push(text),
            ScotNode::Branch { condition, then, otherwise } => {
                out.push(condition);
                collect_text(then, out);
                collect_text(otherwise, out);
            }
            ScotNode::Loop { header, body } => {
                out.push(header);
                collect_text(body, out);
            }
        }
    }
}

/// Lowercased alphanumeric tokens of the document's own text. The fixed preamble, the
/// Input/Output labels and step numbers are left out so they do not inflate every score.
pub fn content_tokens(doc: &ScotDocument) -> BTreeMap<String, u64> {
    let mut parts = vec![doc.input.as_str(), doc.output.as_str()];
    collect_text(&doc.body, &mut parts);
    let mut counts = BTreeMap::new();
    for p in parts {
        for t in p.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            *counts.entry(t.to_lowercase()).or_insert(0) += 1;
        }
    }
    counts
}

fn cosine(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> f64 {
    if a == b {
        return if a.is_empty() { 0.0 } else { 1.0 };
    }
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for k in keys {
        let x = *a.get(k).unwrap_or(&0) as f64;
        let y = *b.get(k).unwrap_or(&0) as f64;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
}

fn levenshtein(a: &[&str], b: &[&str]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = Vec::with_capacity(b.len() + 1);
        cur.push(i + 1);
        for (j, y) in b.iter().enumerate() {
            cur.push((prev[j] + usize::from(x != y)).min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Channels {
    pub lexical: f64,
    pub structural: f64,
}

impl Channels {
    pub fn blend(&self, w: Weights) -> f64 {
        (w.lexical * self.lexical + w.structural * self.structural).clamp(0.0, 1.0)
    }
}

pub fn similarity_channels(a: &ScotDocument, b: &ScotDocument) -> Channels {
    let lexical = cosine(&content_tokens(a), &content_tokens(b));
    let (fa, fb) = (fingerprint_tokens(a), fingerprint_tokens(b));
    let structural = if fa == fb {
        1.0
    } else {
        1.0 - levenshtein(&fa, &fb) as f64 / fa.len().max(fb.len()) as f64
    };
    Channels { lexical, structural }
}

pub fn cot_similarity(a: &ScotDocument, b: &ScotDocument, w: Weights) -> f64 {
    similarity_channels(a, b).blend(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityMatrix {
    pub labels: Vec<LanguageId>,
    pub cells: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i][j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixSet {
    pub blend: SimilarityMatrix,
    pub lexical: SimilarityMatrix,
    pub structural: SimilarityMatrix,
}

/// Cell (i, j) is the mean similarity over task ids present in both languages, summed in
/// task-id order. Only i < j is computed; the rest is mirrored and the diagonal is 1.
pub fn build_matrices(
    records: &[CotRecord],
    languages: &[LanguageId],
    w: Weights,
    exec: Exec,
) -> Result<MatrixSet, AnalysisError> {
    let mut by_lang: BTreeMap<LanguageId, BTreeMap<&str, &ScotDocument>> = BTreeMap::new();
    for r in records {
        by_lang.entry(r.language).or_default().insert(&r.task_id, &r.cot);
    }
    let empty = BTreeMap::new();
    let pairs: Vec<(usize, usize)> = (0..languages.len())
        .flat_map(|i| (i + 1..languages.len()).map(move |j| (i, j)))
        .collect();
    let results = exec.map(&pairs, |&(i, j)| {
        let a = by_lang.get(&languages[i]).unwrap_or(&empty);
        let b = by_lang.get(&languages[j]).unwrap_or(&empty);
        let shared: Vec<&str> = a.keys().filter(|t| b.contains_key(*t)).copied().collect();
        if shared.is_empty() {
            return Err(AnalysisError::NoSharedTasks(languages[i], languages[j]));
        }
        let (mut s, mut lx, mut st) = (0.0, 0.0, 0.0);
        for t in &shared {
            let c = similarity_channels(a[t], b[t]);
            s += c.blend(w);
            lx += c.lexical;
            st += c.structural;
        }
        let n = shared.len() as f64;
        Ok((s / n, lx / n, st / n))
    });
    let n = languages.len();
    let mut cells = [vec![vec![1.0; n]; n], vec![vec![1.0; n]; n], vec![vec![1.0; n]; n]];
    for (&(i, j), r) in pairs.iter().zip(results) {
        let (s, lx, st) = r?;
        for (m, v) in cells.iter_mut().zip([s, lx, st]) {
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    let [blend, lexical, structural] = cells;
    let mk = |cells| SimilarityMatrix { labels: languages.to_vec(), cells };
    Ok(MatrixSet { blend: mk(blend), lexical: mk(lexical), structural: mk(structural) })
}

pub fn build_matrix(records: &[CotRecord], languages: &[LanguageId], w: Weights) -> Result<SimilarityMatrix, AnalysisError> {
    build_matrices(records, languages, w, Exec::default()).map(|m| m.blend)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapFormat {
    Csv,
    Svg,
}

pub fn heatmap_csv(m: &SimilarityMatrix) -> String {
    let mut out = String::from("language");
    for l in &m.labels {
        write!(out, ",{l}").unwrap();
    }
    out.push('\n');
    for (l, row) in m.labels.iter().zip(&m.cells) {
        out.push_str(l.name());
        for v in row {
            write!(out, ",{v:.4}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Gray level for a value: 1.0 is black, 0.0 is white.
pub fn gray(v: f64) -> u8 {
    (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8
}

pub fn heatmap_svg(m: &SimilarityMatrix) -> String {
    const CELL: usize = 48;
    const MARGIN: usize = 96;
    let n = m.labels.len();
    let size = MARGIN + n * CELL + 8;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    for (i, l) in m.labels.iter().enumerate() {
        let c = MARGIN + i * CELL + CELL / 2;
        writeln!(s, r#"<text x="{}" y="{c}" text-anchor="end" dominant-baseline="middle">{l}</text>"#, MARGIN - 6).unwrap();
        writeln!(
            s,
            r#"<text x="{c}" y="{}" text-anchor="start" transform="rotate(-60 {c} {})">{l}</text>"#,
            MARGIN - 6,
            MARGIN - 6
        )
        .unwrap();
    }
    for (i, row) in m.cells.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let (x, y) = (MARGIN + j * CELL, MARGIN + i * CELL);
            let g = gray(v);
            let ink = if v > 0.5 { "#ffffff" } else { "#000000" };
            writeln!(s, r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({g},{g},{g})"/>"#).unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{ink}">{v:.2}</text>"#,
                x + CELL / 2,
                y + CELL / 2
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_heatmap(m: &SimilarityMatrix, path: &Path, format: HeatmapFormat) -> Result<(), AnalysisError> {
    let text = match format {
        HeatmapFormat::Csv => heatmap_csv(m),
        HeatmapFormat::Svg => heatmap_svg(m),
    };
    fs::write(path, text).map_err(|e| io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricScore {
    pub rater: String,
    pub task_id: String,
    pub system: String,
    pub similarity: u8,
    pub naturalness: u8,
    pub educational_value: u8,
}

pub fn load_rubric(path: &Path) -> Result<Vec<RubricScore>, AnalysisError> {
    let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| AnalysisError::Schema { line: 1, reason: e.to_string() })?.clone();
    let want = ["rater", "task_id", "system", "similarity", "naturalness", "educational_value"];
    if headers.iter().collect::<Vec<_>>() != want {
        return Err(AnalysisError::Schema { line: 1, reason: format!("header must be {}", want.join(",")) });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RubricScore>().enumerate() {
        let line = i + 2;
        let s = row.map_err(|e| AnalysisError::Schema { line, reason: e.to_string() })?;
        for (name, v) in [("similarity", s.similarity), ("naturalness", s.naturalness), ("educational_value", s.educational_value)] {
            if !(1..=5).contains(&v) {
                return Err(AnalysisError::Schema { line, reason: format!("{name} {v} outside 1..5") });
            }
        }
        out.push(s);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RubricMeans {
    pub n: u64,
    pub similarity: Centi,
    pub naturalness: Centi,
    pub educational_value: Centi,
}

/// Per-aspect means over one system's rows, in exact hundredths.
pub fn aggregate_rubric(scores: &[RubricScore], system: &str) -> Result<RubricMeans, AnalysisError> {
    let rows: Vec<&RubricScore> = scores.iter().filter(|s| s.system == system).collect();
    if rows.is_empty() {
        return Err(AnalysisError::EmptyInput(system.to_string()));
    }
    let n = rows.len() as u64;
    let mean = |f: fn(&RubricScore) -> u8| {
        let sum: u64 = rows.iter().map(|r| u64::from(f(r))).sum();
        Centi::ratio(sum, n)
    };
    Ok(RubricMeans {
        n,
        similarity: mean(|r| r.similarity),
        naturalness: mean(|r| r.naturalness),
        educational_value: mean(|r| r.educational_value),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RubricReport {
    pub scale: &'static str,
    pub systems: BTreeMap<String, RubricMeans>,
}

pub fn rubric_report(scores: &[RubricScore]) -> Result<RubricReport, AnalysisError> {
    let systems: BTreeSet<&str> = scores.iter().map(|s| s.system.as_str()).collect();
    let mut out = BTreeMap::new();
    for s in systems {
        out.insert(s.to_string(), aggregate_rubric(scores, s)?);
    }
    Ok(RubricReport { scale: RUBRIC_SCALE_NOTE, systems: out })
}
