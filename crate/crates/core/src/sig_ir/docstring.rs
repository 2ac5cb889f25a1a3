use serde::{Deserialize, Serialize};

use super::{CommentStyle, LanguageId, SigError, TagStyle};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamDoc {
    pub name: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DocstringIR {
    pub summary: Vec<String>,
    pub param_docs: Vec<ParamDoc>,
    pub returns_doc: Option<String>,
    pub examples: Option<Vec<String>>,
}

/// Collapse whitespace runs to single spaces and trim.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn normalize_lines(lines: &[String]) -> Vec<String> {
    lines
        .iter()
        .map(|l| normalize_ws(l))
        .filter(|l| !l.is_empty())
        .collect()
}

impl DocstringIR {
    pub fn from_summary<S: Into<String>>(lines: impl IntoIterator<Item = S>) -> Self {
        DocstringIR {
            summary: lines.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.normalized() == DocstringIR::default()
    }

    /// The form parse_docstring returns: trimmed lines, single spaces, no blank lines.
    pub fn normalized(&self) -> DocstringIR {
        let examples = self
            .examples
            .as_ref()
            .map(|e| normalize_lines(e))
            .filter(|e| !e.is_empty());
        DocstringIR {
            summary: normalize_lines(&self.summary),
            param_docs: self
                .param_docs
                .iter()
                .map(|p| ParamDoc {
                    name: p.name.trim().to_string(),
                    text: normalize_ws(&p.text),
                })
                .collect(),
            returns_doc: self.returns_doc.as_deref().map(normalize_ws),
            examples,
        }
    }
}

// ---------------------------------------------------------------------------
// Rendering

fn body_lines(lang: LanguageId, ir: &DocstringIR) -> Vec<String> {
    let mut out: Vec<String> = ir.summary.clone();
    let section = |out: &mut Vec<String>, lines: Vec<String>| {
        if !out.is_empty() && !lines.is_empty() {
            out.push(String::new());
        }
        out.extend(lines);
    };
    match lang.tag_style() {
        TagStyle::Sections => {
            if !ir.param_docs.is_empty() {
                let mut s = vec!["Args:".to_string()];
                s.extend(ir.param_docs.iter().map(|p| format!("    {}: {}", p.name, p.text)));
                section(&mut out, s);
            }
            if let Some(r) = &ir.returns_doc {
                section(&mut out, vec!["Returns:".into(), format!("    {r}")]);
            }
            if let Some(ex) = &ir.examples {
                let mut s = vec!["Examples:".to_string()];
                s.extend(ex.iter().map(|l| format!("    {l}")));
                section(&mut out, s);
            }
        }
        TagStyle::AtTags { returns_tag, sigil } => {
            let mut s: Vec<String> = ir
                .param_docs
                .iter()
                .map(|p| format!("@param {sigil}{} {}", p.name, p.text).trim_end().to_string())
                .collect();
            if let Some(r) = &ir.returns_doc {
                s.push(format!("{returns_tag} {r}").trim_end().to_string());
            }
            if let Some(ex) = &ir.examples {
                s.push("@example".into());
                s.extend(ex.iter().cloned());
            }
            section(&mut out, s);
        }
        TagStyle::SwiftMarkup => {
            let mut s: Vec<String> = ir
                .param_docs
                .iter()
                .map(|p| format!("- Parameter {}: {}", p.name, p.text).trim_end().to_string())
                .collect();
            if let Some(r) = &ir.returns_doc {
                s.push(format!("- Returns: {r}").trim_end().to_string());
            }
            if let Some(ex) = &ir.examples {
                s.push("- Example:".into());
                s.extend(ex.iter().cloned());
            }
            section(&mut out, s);
        }
        TagStyle::XmlDoc => {
            let mut s = Vec::new();
            if !ir.summary.is_empty() {
                s.push("<summary>".to_string());
                s.extend(ir.summary.iter().map(|l| xml_escape(l)));
                s.push("</summary>".to_string());
            }
            for p in &ir.param_docs {
                s.push(format!("<param name=\"{}\">{}</param>", p.name, xml_escape(&p.text)));
            }
            if let Some(r) = &ir.returns_doc {
                s.push(format!("<returns>{}</returns>", xml_escape(r)));
            }
            if let Some(ex) = &ir.examples {
                s.push("<example>".into());
                s.extend(ex.iter().map(|l| xml_escape(l)));
                s.push("</example>".into());
            }
            out = s;
        }
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn xml_unescape(s: &str) -> String {
    s.replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
}

/// Render in `lang`'s comment convention. An empty docstring renders as the empty string.
pub fn render_docstring(lang: LanguageId, ir: &DocstringIR) -> String {
    if ir.is_empty() {
        return String::new();
    }
    let lines = body_lines(lang, ir);
    match lang.comment_style() {
        CommentStyle::TripleQuote => format!("'''\n{}\n'''", lines.join("\n")),
        CommentStyle::StarBlock => {
            let mut out = vec!["/**".to_string()];
            out.extend(lines.iter().map(|l| {
                if l.is_empty() {
                    " *".to_string()
                } else {
                    format!(" * {l}")
                }
            }));
            out.push(" */".into());
            out.join("\n")
        }
        CommentStyle::LinePrefix(p) => lines
            .iter()
            .map(|l| {
                if l.is_empty() {
                    p.to_string()
                } else {
                    format!("{p} {l}")
                }
            })
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

// ---------------------------------------------------------------------------
// Parsing

const QUOTES: [&str; 3] = ["'''", "\"\"\"", "```"];

/// Strip comment delimiters, returning trimmed content lines.
fn strip_comment(lang: LanguageId, text: &str) -> Result<Vec<String>, SigError> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let inner: String = match lang.comment_style() {
        CommentStyle::TripleQuote => {
            // Some agent replies open with backticks and close with quotes; accept either.
            let opener = QUOTES
                .iter()
                .find(|q| t.starts_with(**q))
                .ok_or_else(|| SigError::MalformedDocstring("expected opening triple quote".into()))?;
            let rest = &t[opener.len()..];
            let closer = QUOTES
                .iter()
                .find(|q| rest.ends_with(**q))
                .ok_or_else(|| SigError::MalformedDocstring("unterminated triple quote".into()))?;
            let inner = &rest[..rest.len() - closer.len()];
            if QUOTES.iter().any(|q| inner.contains(q)) {
                return Err(SigError::MalformedDocstring("stray triple quote inside docstring".into()));
            }
            inner.to_string()
        }
        CommentStyle::StarBlock => {
            if !t.starts_with("/*") {
                return Err(SigError::MalformedDocstring("expected `/**`".into()));
            }
            if t.len() < 4 || !t.ends_with("*/") {
                return Err(SigError::MalformedDocstring("unterminated block comment".into()));
            }
            let inner = &t[2..t.len() - 2];
            let inner = inner.strip_prefix('*').unwrap_or(inner);
            if inner.contains("*/") || inner.contains("/*") {
                return Err(SigError::MalformedDocstring("nested block comment delimiter".into()));
            }
            inner
                .lines()
                .map(|l| {
                    let l = l.trim();
                    l.strip_prefix('*').unwrap_or(l)
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
        CommentStyle::LinePrefix(p) => {
            let mut out = Vec::new();
            for (i, l) in t.lines().enumerate() {
                let l = l.trim();
                if l.is_empty() {
                    continue;
                }
                let rest = l.strip_prefix(p).ok_or_else(|| {
                    SigError::MalformedDocstring(format!("line {} lacks the `{p}` prefix", i + 1))
                })?;
                out.push(rest);
            }
            out.join("\n")
        }
    };
    Ok(inner.lines().map(|l| l.trim().to_string()).collect())
}

#[derive(Clone, Copy, PartialEq)]
enum Open {
    None,
    Param,
    Returns,
}

fn append(target: &mut String, text: &str) {
    if !text.is_empty() {
        if !target.is_empty() {
            target.push(' ');
        }
        target.push_str(text);
    }
}

#[derive(Default)]
struct Builder {
    ir: DocstringIR,
}

impl Builder {
    fn param(&mut self, name: &str, text: &str) {
        self.ir.param_docs.push(ParamDoc {
            name: name.to_string(),
            text: text.trim().to_string(),
        });
    }

    fn continue_open(&mut self, open: Open, text: &str) -> bool {
        match open {
            Open::Param => {
                if let Some(p) = self.ir.param_docs.last_mut() {
                    append(&mut p.text, text);
                }
                true
            }
            Open::Returns => {
                append(self.ir.returns_doc.get_or_insert_with(String::new), text);
                true
            }
            Open::None => false,
        }
    }

    fn example(&mut self, line: &str) {
        let ex = self.ir.examples.get_or_insert_with(Vec::new);
        if !line.trim().is_empty() {
            ex.push(line.trim().to_string());
        }
    }
}

fn parse_sections(lines: &[String], b: &mut Builder) {
    #[derive(PartialEq)]
    enum Sec {
        Summary,
        Args,
        Returns,
        Examples,
    }
    let mut sec = Sec::Summary;
    for line in lines {
        let l = line.trim();
        match l {
            "Args:" | "Arguments:" | "Parameters:" => {
                sec = Sec::Args;
                continue;
            }
            "Returns:" | "Return:" => {
                sec = Sec::Returns;
                b.ir.returns_doc.get_or_insert_with(String::new);
                continue;
            }
            "Examples:" | "Example:" => {
                sec = Sec::Examples;
                b.ir.examples.get_or_insert_with(Vec::new);
                continue;
            }
            _ => {}
        }
        if sec != Sec::Examples && l.starts_with(">>>") {
            sec = Sec::Examples;
        }
        if l.is_empty() {
            continue;
        }
        match sec {
            Sec::Summary => b.ir.summary.push(l.to_string()),
            Sec::Args => {
                let head = l.split_once(':').and_then(|(lhs, rhs)| {
                    let name = lhs.split_once('(').map_or(lhs, |(n, _)| n).trim();
                    super::is_identifier(name).then_some((name, rhs))
                });
                match head {
                    Some((name, rhs)) => b.param(name, rhs),
                    None => {
                        b.continue_open(Open::Param, l);
                    }
                }
            }
            Sec::Returns => {
                b.continue_open(Open::Returns, l);
            }
            Sec::Examples => b.example(l),
        }
    }
}

fn is_tag_at(s: &str, i: usize, tag: &str) -> bool {
    s[i..].starts_with(tag)
        && (i == 0 || s[..i].ends_with(char::is_whitespace))
        && s[i + tag.len()..]
            .chars()
            .next()
            .is_none_or(char::is_whitespace)
}

const KNOWN_TAGS: [&str; 4] = ["@param", "@returns", "@return", "@example"];

/// Split a line into (tag, rest) segments at known tags; a leading untagged segment has tag "".
fn tag_segments(line: &str) -> Vec<(&'static str, &str)> {
    let mut cuts: Vec<(usize, &'static str)> = Vec::new();
    for (i, _) in line.char_indices() {
        if let Some(tag) = KNOWN_TAGS.iter().find(|t| is_tag_at(line, i, t)) {
            let after_example = cuts.last().is_some_and(|(_, t)| *t == "@example");
            if !after_example {
                cuts.push((i, tag));
            }
        }
    }
    let mut out = Vec::new();
    let first = cuts.first().map_or(line.len(), |c| c.0);
    if !line[..first].trim().is_empty() {
        out.push(("", line[..first].trim()));
    }
    for (n, &(i, tag)) in cuts.iter().enumerate() {
        let end = cuts.get(n + 1).map_or(line.len(), |c| c.0);
        out.push((tag, line[i + tag.len()..end].trim()));
    }
    out
}

fn parse_at_tags(lines: &[String], sigil: &str, b: &mut Builder) {
    let mut open = Open::None;
    let mut in_examples = false;
    for line in lines {
        if in_examples {
            b.example(line);
            continue;
        }
        if line.is_empty() {
            continue;
        }
        for (tag, rest) in tag_segments(line) {
            if in_examples {
                b.example(rest);
                continue;
            }
            match tag {
                "" => {
                    if rest.starts_with('@') {
                        // Unknown tag: keep it verbatim in the summary.
                        open = Open::None;
                        b.ir.summary.push(rest.to_string());
                    } else if !b.continue_open(open, rest) {
                        b.ir.summary.push(rest.to_string());
                    }
                }
                "@param" => {
                    let mut words = rest.splitn(2, char::is_whitespace);
                    let mut name = words.next().unwrap_or("");
                    let mut text = words.next().unwrap_or("").trim();
                    // `@param int $x text`: skip a leading type word.
                    if !sigil.is_empty() && !name.starts_with(sigil) && text.starts_with(sigil) {
                        let mut w = text.splitn(2, char::is_whitespace);
                        name = w.next().unwrap_or("");
                        text = w.next().unwrap_or("").trim();
                    }
                    let name = name.strip_prefix(sigil).unwrap_or(name);
                    b.param(name, text);
                    open = Open::Param;
                }
                "@return" | "@returns" => {
                    b.ir.returns_doc = Some(String::new());
                    b.continue_open(Open::Returns, rest);
                    open = Open::Returns;
                }
                "@example" => {
                    in_examples = true;
                    b.example(rest);
                    b.ir.examples.get_or_insert_with(Vec::new);
                }
                _ => unreachable!(),
            }
        }
    }
}

fn parse_swift(lines: &[String], b: &mut Builder) {
    let mut open = Open::None;
    let mut in_examples = false;
    for line in lines {
        let l = line.trim();
        if in_examples {
            b.example(l);
            continue;
        }
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix("- Parameter ") {
            let (name, text) = rest.split_once(':').unwrap_or((rest, ""));
            b.param(name.trim(), text);
            open = Open::Param;
        } else if let Some(rest) = l.strip_prefix("- Returns:") {
            b.ir.returns_doc = Some(String::new());
            b.continue_open(Open::Returns, rest.trim());
            open = Open::Returns;
        } else if let Some(rest) = l.strip_prefix("- Example:") {
            in_examples = true;
            b.ir.examples.get_or_insert_with(Vec::new);
            b.example(rest);
        } else if !b.continue_open(open, l) {
            b.ir.summary.push(l.to_string());
        }
    }
}

fn parse_xml(lines: &[String], b: &mut Builder) -> Result<(), SigError> {
    let text = lines.join("\n");
    #[derive(PartialEq, Clone, Copy, Debug)]
    enum El {
        Summary,
        Param,
        Returns,
        Example,
    }
    let mut current: Option<(El, String, String)> = None;
    let mut loose = String::new();
    let mut i = 0;
    let bad = |m: &str| SigError::MalformedDocstring(m.to_string());
    while i < text.len() {
        let rest = &text[i..];
        let open_tag = [("<summary>", El::Summary), ("<returns>", El::Returns), ("<example>", El::Example)]
            .into_iter()
            .find(|(t, _)| rest.starts_with(t));
        let close_tag = [
            ("</summary>", El::Summary),
            ("</param>", El::Param),
            ("</returns>", El::Returns),
            ("</example>", El::Example),
        ]
        .into_iter()
        .find(|(t, _)| rest.starts_with(t));
        if let Some((t, el)) = open_tag {
            if current.is_some() {
                return Err(bad("nested documentation element"));
            }
            current = Some((el, String::new(), String::new()));
            i += t.len();
        } else if let Some(after) = rest.strip_prefix("<param name=\"") {
            if current.is_some() {
                return Err(bad("nested documentation element"));
            }
            let q = after.find("\">").ok_or_else(|| bad("unterminated <param> tag"))?;
            current = Some((El::Param, after[..q].to_string(), String::new()));
            i += "<param name=\"".len() + q + 2;
        } else if let Some((t, el)) = close_tag {
            let (open_el, name, body) = current.take().ok_or_else(|| bad("closing tag without opening tag"))?;
            if open_el != el {
                return Err(bad("mismatched closing tag"));
            }
            let body = xml_unescape(&body);
            match el {
                El::Summary => b.ir.summary.extend(body.lines().map(|l| l.trim().to_string())),
                El::Param => b.param(&name, &normalize_ws(&body)),
                El::Returns => b.ir.returns_doc = Some(normalize_ws(&body)),
                El::Example => {
                    b.ir.examples.get_or_insert_with(Vec::new);
                    for l in body.lines() {
                        b.example(l);
                    }
                }
            }
            i += t.len();
        } else {
            let c = rest.chars().next().unwrap();
            match &mut current {
                Some((_, _, body)) => body.push(c),
                None => loose.push(c),
            }
            i += c.len_utf8();
        }
    }
    if current.is_some() {
        return Err(bad("unclosed documentation element"));
    }
    // Text outside known elements is kept as summary.
    b.ir.summary.extend(xml_unescape(&loose).lines().map(|l| l.trim().to_string()));
    Ok(())
}

pub fn parse_docstring(lang: LanguageId, text: &str) -> Result<DocstringIR, SigError> {
    let lines = strip_comment(lang, text)?;
    let mut b = Builder::default();
    match lang.tag_style() {
        TagStyle::Sections => parse_sections(&lines, &mut b),
        TagStyle::AtTags { sigil, .. } => parse_at_tags(&lines, sigil, &mut b),
        TagStyle::SwiftMarkup => parse_swift(&lines, &mut b),
        TagStyle::XmlDoc => parse_xml(&lines, &mut b)?,
    }
    Ok(b.ir.normalized())
}
