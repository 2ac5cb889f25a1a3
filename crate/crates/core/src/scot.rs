//! Structured chain-of-thought documents: a preamble, an input/output spec, and a body of
//! steps, branches and loops nested by indentation.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PREAMBLE: &str = "Let's think step by step.";
const INDENT: &str = "    ";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScotNode {
    Step {
        text: String,
    },
    Branch {
        condition: String,
        then: Vec<ScotNode>,
        #[serde(rename = "else", default)]
        otherwise: Vec<ScotNode>,
    },
    Loop {
        header: String,
        body: Vec<ScotNode>,
    },
}

impl ScotNode {
    pub fn step(text: impl Into<String>) -> Self {
        ScotNode::Step { text: text.into() }
    }

    pub fn branch(condition: impl Into<String>, then: Vec<ScotNode>, otherwise: Vec<ScotNode>) -> Self {
        ScotNode::Branch {
            condition: condition.into(),
            then,
            otherwise,
        }
    }

    pub fn lp(header: impl Into<String>, body: Vec<ScotNode>) -> Self {
        ScotNode::Loop {
            header: header.into(),
            body,
        }
    }
}

/// The preamble is fixed, so only the input/output spec and body are stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScotDocument {
    pub input: String,
    pub output: String,
    pub body: Vec<ScotNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScotError {
    #[error("line {line}: MissingPreamble (expected \"{PREAMBLE}\")")]
    MissingPreamble { line: usize },
    #[error("line {line}: MissingIOSpec (expected \"{expected}:\")")]
    MissingIOSpec { line: usize, expected: &'static str },
    #[error("line {line}: IndentationError ({reason})")]
    IndentationError { line: usize, reason: String },
    #[error("line {line}: EmptyBody")]
    EmptyBody { line: usize },
    #[error("line {line}: EmptyBlock ({construct} has no body)")]
    EmptyBlock { line: usize, construct: &'static str },
    #[error("line {line}: EmptyStep")]
    EmptyStep { line: usize },
    #[error("line {line}: OrphanElse")]
    OrphanElse { line: usize },
    #[error("InvalidDocument: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDocument(Vec<Violation>),
}

impl ScotError {
    /// Short variant name, as printed by the CLI and matched by fixtures.
    pub fn name(&self) -> &'static str {
        match self {
            ScotError::MissingPreamble { .. } => "MissingPreamble",
            ScotError::MissingIOSpec { .. } => "MissingIOSpec",
            ScotError::IndentationError { .. } => "IndentationError",
            ScotError::EmptyBody { .. } => "EmptyBody",
            ScotError::EmptyBlock { .. } => "EmptyBlock",
            ScotError::EmptyStep { .. } => "EmptyStep",
            ScotError::OrphanElse { .. } => "OrphanElse",
            ScotError::InvalidDocument(_) => "InvalidDocument",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

// ---------------------------------------------------------------------------
// Parsing

struct Line<'a> {
    no: usize,
    depth: usize,
    text: &'a str,
}

fn is_preamble(line: &str) -> bool {
    let l = line.trim();
    let l = l.strip_suffix('.').unwrap_or(l);
    l.eq_ignore_ascii_case(&PREAMBLE[..PREAMBLE.len() - 1])
}

fn io_line<'a>(line: &'a str, label: &str) -> Option<&'a str> {
    let l = line.trim();
    let head = l.get(..label.len() + 1)?;
    if !head.eq_ignore_ascii_case(&format!("{label}:")) {
        return None;
    }
    let rest = l[label.len() + 1..].trim();
    (!rest.is_empty()).then_some(rest)
}

/// Drop a leading step number such as `12.` or `3)`.
fn strip_number(text: &str) -> &str {
    let digits = text.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return text;
    }
    let rest = &text[digits..];
    match rest.as_bytes().first() {
        Some(b'.') | Some(b')') => {
            let after = &rest[1..];
            if after.is_empty() || after.starts_with(char::is_whitespace) {
                after.trim_start()
            } else {
                text
            }
        }
        _ => text,
    }
}

fn starts_with_word(text: &str, word: &str) -> bool {
    text.len() >= word.len()
        && text[..word.len()].eq_ignore_ascii_case(word)
        && text[word.len()..]
            .chars()
            .next()
            .is_none_or(|c| !c.is_alphanumeric() && c != '_')
}

fn block_kind(text: &str) -> Option<&'static str> {
    if !text.ends_with(':') {
        return None;
    }
    if starts_with_word(text, "if") {
        Some("branch")
    } else if starts_with_word(text, "for") || starts_with_word(text, "while") {
        Some("loop")
    } else {
        None
    }
}

fn is_else(text: &str) -> bool {
    let t = text.trim_end_matches(':').trim();
    text.ends_with(':') && t.eq_ignore_ascii_case("else")
}

/// `else if c:` / `elif c:` opens an else arm holding a nested branch on `if c`.
fn else_if(text: &str) -> Option<String> {
    let text = text.strip_suffix(':')?.trim_end();
    if starts_with_word(text, "else") {
        let rest = text[4..].trim_start();
        if starts_with_word(rest, "if") {
            return Some(rest.to_string());
        }
    }
    if starts_with_word(text, "elif") {
        return Some(format!("if {}", text[4..].trim_start()));
    }
    None
}

fn indentation(raw: &str, no: usize) -> Result<usize, ScotError> {
    let mut width = 0;
    for c in raw.chars() {
        match c {
            ' ' => width += 1,
            '\t' => width += 4,
            _ => break,
        }
    }
    if width % 4 != 0 {
        return Err(ScotError::IndentationError {
            line: no,
            reason: format!("indent of {width} columns is not a multiple of 4"),
        });
    }
    Ok(width / 4)
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn block(&mut self, depth: usize, opener: Option<(usize, &'static str)>) -> Result<Vec<ScotNode>, ScotError> {
        let mut out = Vec::new();
        while let Some(line) = self.lines.get(self.pos) {
            if line.depth < depth {
                break;
            }
            if line.depth > depth {
                return Err(ScotError::IndentationError {
                    line: line.no,
                    reason: "unexpected indent".into(),
                });
            }
            let (no, text) = (line.no, line.text);
            self.pos += 1;
            if is_else(text) || else_if(text).is_some() {
                return Err(ScotError::OrphanElse { line: no });
            }
            let node = match block_kind(text) {
                Some("branch") => {
                    let condition = text[..text.len() - 1].trim_end().to_string();
                    let then = self.block(depth + 1, Some((no, "branch")))?;
                    let otherwise = self.else_arm(depth)?;
                    ScotNode::Branch {
                        condition,
                        then,
                        otherwise,
                    }
                }
                Some(_) => {
                    let header = text[..text.len() - 1].trim_end().to_string();
                    let body = self.block(depth + 1, Some((no, "loop")))?;
                    ScotNode::Loop { header, body }
                }
                None => {
                    if text.is_empty() {
                        return Err(ScotError::EmptyStep { line: no });
                    }
                    ScotNode::step(text)
                }
            };
            out.push(node);
        }
        if out.is_empty() {
            if let Some((line, construct)) = opener {
                return Err(ScotError::EmptyBlock { line, construct });
            }
        }
        Ok(out)
    }

    fn else_arm(&mut self, depth: usize) -> Result<Vec<ScotNode>, ScotError> {
        let Some(line) = self.lines.get(self.pos) else {
            return Ok(Vec::new());
        };
        if line.depth != depth {
            return Ok(Vec::new());
        }
        let no = line.no;
        if is_else(line.text) {
            self.pos += 1;
            return self.block(depth + 1, Some((no, "else")));
        }
        if let Some(condition) = else_if(line.text) {
            self.pos += 1;
            let then = self.block(depth + 1, Some((no, "branch")))?;
            let otherwise = self.else_arm(depth)?;
            return Ok(vec![ScotNode::Branch {
                condition,
                then,
                otherwise,
            }]);
        }
        Ok(Vec::new())
    }
}

pub fn parse_scot(text: &str) -> Result<ScotDocument, ScotError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty());
    let last_line = text.lines().count().max(1);

    let (no, first) = lines.next().ok_or(ScotError::MissingPreamble { line: 1 })?;
    if !is_preamble(first) {
        return Err(ScotError::MissingPreamble { line: no });
    }
    let mut io = |label: &'static str| -> Result<String, ScotError> {
        match lines.next() {
            Some((no, l)) => io_line(l, label)
                .map(str::to_string)
                .ok_or(ScotError::MissingIOSpec { line: no, expected: label }),
            None => Err(ScotError::MissingIOSpec {
                line: last_line + 1,
                expected: label,
            }),
        }
    };
    let input = io("Input")?;
    let output = io("Output")?;

    let mut body_lines = Vec::new();
    for (no, raw) in lines {
        let depth = indentation(raw, no)?;
        body_lines.push(Line {
            no,
            depth,
            text: strip_number(raw.trim()),
        });
    }
    if body_lines.is_empty() {
        return Err(ScotError::EmptyBody { line: last_line + 1 });
    }
    if body_lines[0].depth != 0 {
        return Err(ScotError::IndentationError {
            line: body_lines[0].no,
            reason: "first step is indented".into(),
        });
    }
    let mut p = Parser {
        lines: body_lines,
        pos: 0,
    };
    let body = p.block(0, None)?;
    debug_assert_eq!(p.pos, p.lines.len());
    Ok(ScotDocument {
        input,
        output,
        body,
    })
}

// ---------------------------------------------------------------------------
// Validation

fn check_text(path: &str, what: &str, text: &str, out: &mut Vec<Violation>) {
    if text.trim().is_empty() {
        out.push(Violation {
            path: path.to_string(),
            message: format!("{what} is empty"),
        });
    } else if text.contains('\n') || text.contains('\r') {
        out.push(Violation {
            path: path.to_string(),
            message: format!("{what} spans several lines"),
        });
    } else if text != text.trim() {
        out.push(Violation {
            path: path.to_string(),
            message: format!("{what} has surrounding whitespace"),
        });
    }
}

fn validate_nodes(nodes: &[ScotNode], path: &str, out: &mut Vec<Violation>) {
    for (i, node) in nodes.iter().enumerate() {
        let here = format!("{path}[{i}]");
        match node {
            ScotNode::Step { text } => {
                check_text(&here, "step text", text, out);
                if block_kind(text).is_some() || is_else(text) || else_if(text).is_some() {
                    out.push(Violation {
                        path: here.clone(),
                        message: "step text would read back as a block header".into(),
                    });
                }
                if strip_number(text) != text {
                    out.push(Violation {
                        path: here.clone(),
                        message: "step text starts with a step number".into(),
                    });
                }
            }
            ScotNode::Branch {
                condition,
                then,
                otherwise,
            } => {
                check_text(&here, "branch condition", condition, out);
                if !starts_with_word(condition, "if") || condition.ends_with(':') {
                    out.push(Violation {
                        path: here.clone(),
                        message: "branch condition must start with `if` and carry no colon".into(),
                    });
                }
                if then.is_empty() {
                    out.push(Violation {
                        path: format!("{here}.then"),
                        message: "branch has an empty then-body".into(),
                    });
                }
                validate_nodes(then, &format!("{here}.then"), out);
                validate_nodes(otherwise, &format!("{here}.else"), out);
            }
            ScotNode::Loop { header, body } => {
                check_text(&here, "loop header", header, out);
                let keyword = starts_with_word(header, "for") || starts_with_word(header, "while");
                if !keyword || header.ends_with(':') {
                    out.push(Violation {
                        path: here.clone(),
                        message: "loop header must start with `for` or `while` and carry no colon".into(),
                    });
                }
                if body.is_empty() {
                    out.push(Violation {
                        path: format!("{here}.body"),
                        message: "loop has an empty body".into(),
                    });
                }
                validate_nodes(body, &format!("{here}.body"), out);
            }
        }
    }
}

/// Every invariant violation in `doc`; empty means valid.
pub fn validate(doc: &ScotDocument) -> Vec<Violation> {
    let mut out = Vec::new();
    check_text("input", "input spec", &doc.input, &mut out);
    check_text("output", "output spec", &doc.output, &mut out);
    if doc.body.is_empty() {
        out.push(Violation {
            path: "body".into(),
            message: "body has no nodes".into(),
        });
    }
    validate_nodes(&doc.body, "body", &mut out);
    out
}

// ---------------------------------------------------------------------------
// Printing

fn push_line(depth: usize, text: &str, n: &mut usize, out: &mut String) {
    *n += 1;
    out.push('\n');
    out.push_str(&INDENT.repeat(depth));
    out.push_str(&format!("{n}. {text}"));
}

fn render_nodes(nodes: &[ScotNode], depth: usize, n: &mut usize, out: &mut String) {
    for node in nodes {
        match node {
            ScotNode::Step { text } => push_line(depth, text, n, out),
            ScotNode::Branch {
                condition,
                then,
                otherwise,
            } => {
                push_line(depth, &format!("{condition}:"), n, out);
                render_nodes(then, depth + 1, n, out);
                if !otherwise.is_empty() {
                    push_line(depth, "else:", n, out);
                    render_nodes(otherwise, depth + 1, n, out);
                }
            }
            ScotNode::Loop { header, body } => {
                push_line(depth, &format!("{header}:"), n, out);
                render_nodes(body, depth + 1, n, out);
            }
        }
    }
}

/// Canonical text: preamble, Input/Output lines, then sequentially numbered steps.
pub fn render_scot(doc: &ScotDocument) -> Result<String, ScotError> {
    let violations = validate(doc);
    if !violations.is_empty() {
        return Err(ScotError::InvalidDocument(violations));
    }
    let mut out = format!("{PREAMBLE}\nInput: {}\nOutput: {}", doc.input, doc.output);
    let mut n = 0;
    render_nodes(&doc.body, 0, &mut n, &mut out);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Fingerprint

fn fingerprint_into(nodes: &[ScotNode], out: &mut Vec<&'static str>) {
    for node in nodes {
        match node {
            ScotNode::Step { .. } => out.push("S"),
            ScotNode::Branch { then, otherwise, .. } => {
                out.push("B(");
                fingerprint_into(then, out);
                out.push(")");
                if !otherwise.is_empty() {
                    out.push("(");
                    fingerprint_into(otherwise, out);
                    out.push(")");
                }
            }
            ScotNode::Loop { body, .. } => {
                out.push("L(");
                fingerprint_into(body, out);
                out.push(")");
            }
        }
    }
}

/// Structure-only tokens: `S`, `B(`, `L(`, `(` (else arm) and `)`.
pub fn fingerprint_tokens(doc: &ScotDocument) -> Vec<&'static str> {
    let mut out = Vec::new();
    fingerprint_into(&doc.body, &mut out);
    out
}

pub fn structure_fingerprint(doc: &ScotDocument) -> String {
    fingerprint_tokens(doc).join(" ")
}
