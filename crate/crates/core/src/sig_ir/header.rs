use serde::{Deserialize, Serialize};

use super::docstring::{normalize_ws, parse_docstring, render_docstring, DocstringIR};
use super::signature::{parse_signature, render_signature, Param, SignatureIR};
use super::types::{canonical_type, render_type, TypeRef, TypeSlot};
use super::{CommentStyle, LanguageId, SigError};

pub const PERSONA_PREFIX: &str = "You're an expert ";

/// Docstring plus signature, as an agent would emit it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub language: LanguageId,
    pub docstring: DocstringIR,
    pub signature: SignatureIR,
    pub raw_text: String,
}

impl Header {
    /// Re-render from the IR in canonical form.
    pub fn canonical_text(&self) -> Result<String, SigError> {
        render_header(self.language, &self.docstring, &self.signature)
    }
}

pub fn render_header(
    lang: LanguageId,
    doc: &DocstringIR,
    sig: &SignatureIR,
) -> Result<String, SigError> {
    let sig_text = render_signature(lang, sig)?;
    let doc_text = render_docstring(lang, doc);
    if doc_text.is_empty() {
        return Ok(sig_text);
    }
    if lang.docstring_after_signature() {
        let indented: Vec<String> = doc_text
            .lines()
            .map(|l| if l.is_empty() { String::new() } else { format!("    {l}") })
            .collect();
        Ok(format!("{sig_text}\n{}", indented.join("\n")))
    } else {
        Ok(format!("{doc_text}\n{sig_text}"))
    }
}

/// Split raw header text into (docstring text, signature text).
fn split_header(lang: LanguageId, text: &str) -> Result<(String, String), SigError> {
    let lines: Vec<&str> = text.lines().collect();
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| SigError::MalformedSignature {
            offset: 0,
            reason: "empty header".into(),
        })?;
    if lang.docstring_after_signature() {
        return Ok((lines[first + 1..].join("\n"), lines[first].to_string()));
    }
    let doc_end = match lang.comment_style() {
        CommentStyle::StarBlock => {
            if lines[first].trim_start().starts_with("/*") {
                let close = lines[first..]
                    .iter()
                    .position(|l| l.contains("*/"))
                    .ok_or_else(|| SigError::MalformedDocstring("unterminated block comment".into()))?;
                first + close + 1
            } else {
                first
            }
        }
        CommentStyle::LinePrefix(p) => {
            first
                + lines[first..]
                    .iter()
                    .take_while(|l| l.trim().is_empty() || l.trim_start().starts_with(p))
                    .count()
        }
        CommentStyle::TripleQuote => first,
    };
    Ok((lines[first..doc_end].join("\n"), lines[doc_end..].join("\n")))
}

pub fn parse_header(lang: LanguageId, text: &str) -> Result<Header, SigError> {
    let (doc_text, sig_text) = split_header(lang, text)?;
    Ok(Header {
        language: lang,
        docstring: parse_docstring(lang, &doc_text)?,
        signature: parse_signature(lang, sig_text.trim())?,
        raw_text: text.to_string(),
    })
}

fn is_persona_line(line: &str) -> bool {
    let l = normalize_ws(line);
    l.starts_with(PERSONA_PREFIX) && l.ends_with(" programmer") && l.len() > PERSONA_PREFIX.len() + 11
}

/// Map a type into `tgt`, or carry its source spelling as opaque text.
fn carry_type(src: LanguageId, tgt: LanguageId, ty: &TypeRef, slot: TypeSlot) -> Option<TypeRef> {
    match canonical_type(tgt, ty, slot) {
        Ok(t) => t,
        Err(_) => {
            let text = render_type(src, ty, slot)
                .ok()
                .flatten()
                .unwrap_or_else(|| ty.to_string());
            Some(TypeRef::opaque(text))
        }
    }
}

/// Translate a header into `tgt`: signature through the type lattice, docstring into the
/// target's comment convention with the persona line swapped for the target language.
pub fn translate_header(src: &Header, tgt: LanguageId) -> Result<Header, SigError> {
    let from = src.language;
    let sig = SignatureIR {
        name: src.signature.name.clone(),
        params: src
            .signature
            .params
            .iter()
            .map(|p| {
                let ty = p.ty.as_ref().and_then(|t| carry_type(from, tgt, t, TypeSlot::Param));
                Param::new(p.name.clone(), ty)
            })
            .collect(),
        return_type: src
            .signature
            .return_type
            .as_ref()
            .and_then(|t| carry_type(from, tgt, t, TypeSlot::Return)),
    };
    let mut doc = src.docstring.clone();
    if tgt != from {
        doc.summary.retain(|l| !is_persona_line(l));
        doc.summary.insert(0, format!("{PERSONA_PREFIX}{tgt} programmer"));
    }
    let text = render_header(tgt, &doc, &sig)?;
    parse_header(tgt, &text)
}
