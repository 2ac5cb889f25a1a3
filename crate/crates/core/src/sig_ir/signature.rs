use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::types::{
    canonical_type, dynamic_param_spelling, dynamic_return_spelling, parse_type, render_type,
    TypeRef, TypeSlot,
};
use super::{LanguageId, SigError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: Option<TypeRef>,
}

impl Param {
    pub fn new(name: impl Into<String>, ty: Option<TypeRef>) -> Self {
        Param {
            name: name.into(),
            ty,
        }
    }
}

/// A function header stripped of language syntax.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignatureIR {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: Option<TypeRef>,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SignatureIR {
    /// Invariant violations, empty when the IR is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !is_identifier(&self.name) {
            out.push(format!("function name `{}` is not an identifier", self.name));
        }
        let mut seen = HashSet::new();
        for p in &self.params {
            if !is_identifier(&p.name) {
                out.push(format!("parameter name `{}` is not an identifier", p.name));
            }
            if !seen.insert(p.name.as_str()) {
                out.push(format!("duplicate parameter `{}`", p.name));
            }
            if let Some(t) = &p.ty {
                if !t.is_well_formed() {
                    out.push(format!("parameter `{}` has a malformed type", p.name));
                }
            }
        }
        if let Some(t) = &self.return_type {
            if !t.is_well_formed() {
                out.push("return type is malformed".to_string());
            }
        }
        out
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn has_opaque(&self) -> bool {
        self.params
            .iter()
            .filter_map(|p| p.ty.as_ref())
            .chain(self.return_type.as_ref())
            .any(TypeRef::contains_opaque)
    }
}

/// Project every type in `sig` onto what `lang` can spell.
pub fn canonical_signature(lang: LanguageId, sig: &SignatureIR) -> Result<SignatureIR, SigError> {
    let params = sig
        .params
        .iter()
        .map(|p| {
            let ty = match &p.ty {
                Some(t) => canonical_type(lang, t, TypeSlot::Param)?,
                None => None,
            };
            Ok(Param::new(p.name.clone(), ty))
        })
        .collect::<Result<_, SigError>>()?;
    let return_type = match &sig.return_type {
        Some(t) => canonical_type(lang, t, TypeSlot::Return)?,
        None => None,
    };
    Ok(SignatureIR {
        name: sig.name.clone(),
        params,
        return_type,
    })
}

// ---------------------------------------------------------------------------
// Rendering

fn param_type(lang: LanguageId, p: &Param) -> Result<Option<String>, SigError> {
    match &p.ty {
        Some(t) => render_type(lang, t, TypeSlot::Param),
        None => Ok(None),
    }
}

pub fn render_signature(lang: LanguageId, ir: &SignatureIR) -> Result<String, SigError> {
    use LanguageId as L;
    let violations = ir.violations();
    if !violations.is_empty() {
        return Err(SigError::InvalidIr(violations.join("; ")));
    }
    let mut params = Vec::with_capacity(ir.params.len());
    for p in &ir.params {
        let ty = param_type(lang, p)?;
        let dynamic = dynamic_param_spelling(lang);
        let n = &p.name;
        let rendered = match lang {
            L::Python | L::TypeScript => match ty {
                Some(t) => format!("{n}: {t}"),
                None => n.clone(),
            },
            L::JavaScript | L::Ruby => n.clone(),
            L::Perl => format!("${n}"),
            L::PHP => match ty {
                Some(t) => format!("{t} ${n}"),
                None => format!("${n}"),
            },
            L::Go => format!("{n} {}", ty.as_deref().or(dynamic).unwrap_or("any")),
            L::Java | L::CSharp => format!("{} {n}", ty.as_deref().or(dynamic).unwrap_or("Object")),
            L::Kotlin | L::Scala | L::Swift => {
                format!("{n}: {}", ty.as_deref().or(dynamic).unwrap_or("Any"))
            }
        };
        params.push(rendered);
    }
    let params = params.join(", ");
    let ret = match &ir.return_type {
        Some(t) => render_type(lang, t, TypeSlot::Return)?,
        None => None,
    };
    let name = &ir.name;
    let out = match lang {
        L::Python => match ret {
            Some(r) => format!("def {name}({params}) -> {r}:"),
            None => format!("def {name}({params}):"),
        },
        L::Go => match ret {
            Some(r) => format!("func {name}({params}) {r} {{"),
            None => format!("func {name}({params}) {{"),
        },
        L::Java | L::CSharp => {
            let r = ret
                .or_else(|| dynamic_return_spelling(lang).map(str::to_string))
                .unwrap_or_default();
            format!("public static {r} {name}({params}) {{")
        }
        L::JavaScript => format!("const {name} = function ({params}) {{"),
        L::TypeScript => match ret {
            Some(r) => format!("const {name} = function ({params}): {r} {{"),
            None => format!("const {name} = function ({params}) {{"),
        },
        L::Kotlin => match ret {
            Some(r) => format!("fun {name}({params}): {r} {{"),
            None => format!("fun {name}({params}) {{"),
        },
        L::Scala => match ret {
            Some(r) => format!("def {name}({params}): {r} = {{"),
            None => format!("def {name}({params}) = {{"),
        },
        L::Swift => match ret {
            Some(r) => format!("func {name}({params}) -> {r} {{"),
            None => format!("func {name}({params}) {{"),
        },
        L::PHP => match ret {
            Some(r) => format!("function {name}({params}): {r} {{"),
            None => format!("function {name}({params}) {{"),
        },
        L::Ruby => format!("def {name}({params})"),
        L::Perl => format!("sub {name}({params}) {{"),
    };
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parsing

const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "internal",
    "static",
    "final",
    "abstract",
    "override",
    "open",
    "suspend",
    "inline",
    "async",
    "export",
    "synchronized",
    "virtual",
    "sealed",
    "unsafe",
    "extern",
    "fileprivate",
    "mutating",
    "default",
];

fn malformed(offset: usize, reason: impl Into<String>) -> SigError {
    SigError::MalformedSignature {
        offset,
        reason: reason.into(),
    }
}

fn unsupported(offset: usize, what: impl Into<String>) -> SigError {
    SigError::UnsupportedConstruct {
        offset,
        what: what.into(),
    }
}

/// Index of the bracket closing the one opened at `open`, counting `()[]{}`.
fn matching_close(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s[open..].char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Split a parameter list on top-level commas, returning (offset, text) pairs.
fn split_params(s: &str, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' | '<' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            '>' => {
                let arrow = i > 0 && (bytes[i - 1] == b'-' || bytes[i - 1] == b'=');
                if !arrow {
                    depth -= 1;
                }
            }
            ',' if depth == 0 => {
                out.push((base + start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() || !out.is_empty() {
        out.push((base + start, &s[start..]));
    }
    out
}

/// Offset of the first non-whitespace char of `piece` within the original text.
fn lead(offset: usize, piece: &str) -> usize {
    offset + (piece.len() - piece.trim_start().len())
}

/// Strip a trailing opener token (`{`, `=`, `:`) and return the end index of the header proper.
fn header_end(text: &str) -> usize {
    let mut s = text.trim_end();
    if let Some(r) = s.strip_suffix('{') {
        s = r.trim_end();
    }
    if let Some(r) = s.strip_suffix('=') {
        s = r.trim_end();
    } else if let Some(r) = s.strip_suffix(':') {
        s = r.trim_end();
    }
    s.len()
}

/// Consume leading whitespace-separated modifier words; returns the offset after them.
fn skip_modifiers(text: &str, mut pos: usize) -> usize {
    loop {
        let rest = &text[pos..];
        let trimmed = rest.trim_start();
        let ws = rest.len() - trimmed.len();
        let word_len = trimmed
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(trimmed.len());
        let word = &trimmed[..word_len];
        if MODIFIERS.contains(&word) {
            pos += ws + word_len;
        } else {
            return pos + ws;
        }
    }
}

/// Read an identifier at `pos` (after whitespace); returns (name, start, end).
fn read_ident(text: &str, pos: usize) -> Option<(&str, usize, usize)> {
    let rest = &text[pos..];
    let start = pos + (rest.len() - rest.trim_start().len());
    let len = text[start..]
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(text.len() - start);
    if len == 0 {
        return None;
    }
    let word = &text[start..start + len];
    is_identifier(word).then_some((word, start, start + len))
}

fn expect_keyword(text: &str, pos: usize, kws: &[&str]) -> Option<usize> {
    let (word, _, end) = read_ident(text, pos)?;
    kws.contains(&word).then_some(end)
}

fn skip_ws(text: &str, pos: usize) -> usize {
    let rest = &text[pos..];
    pos + (rest.len() - rest.trim_start().len())
}

struct Parts<'a> {
    name: String,
    params: Vec<(usize, &'a str)>,
    rest: &'a str,
    rest_offset: usize,
}

/// `keyword name(params) rest` headers.
fn keyword_led<'a>(
    text: &'a str,
    end: usize,
    keywords: &[&str],
) -> Result<Parts<'a>, SigError> {
    let pos = skip_modifiers(text, 0);
    let after_kw = expect_keyword(text, pos, keywords)
        .ok_or_else(|| malformed(pos, format!("expected `{}`", keywords.join("` or `"))))?;
    let (name, _, after_name) =
        read_ident(text, after_kw).ok_or_else(|| malformed(after_kw, "expected function name"))?;
    let open = skip_ws(text, after_name);
    match text.as_bytes()[..end].get(open) {
        Some(b'(') => {}
        Some(b'<') | Some(b'[') => return Err(unsupported(open, "generic type parameters")),
        _ => return Err(malformed(open, "expected `(`")),
    }
    let close = matching_close(&text[..end], open).ok_or_else(|| malformed(open, "unbalanced `(`"))?;
    Ok(Parts {
        name: name.to_string(),
        params: split_params(&text[open + 1..close], open + 1),
        rest: &text[close + 1..end],
        rest_offset: close + 1,
    })
}

/// `const name = function (params) rest` or `const name = (params) rest =>`.
fn const_bound<'a>(text: &'a str, end: usize) -> Result<Parts<'a>, SigError> {
    let pos = skip_modifiers(text, 0);
    let after_kw = expect_keyword(text, pos, &["const", "let", "var"])
        .ok_or_else(|| malformed(pos, "expected `function` or `const`"))?;
    let (name, _, after_name) =
        read_ident(text, after_kw).ok_or_else(|| malformed(after_kw, "expected binding name"))?;
    let eq = skip_ws(text, after_name);
    if text.as_bytes().get(eq) != Some(&b'=') {
        return Err(malformed(eq, "expected `=`"));
    }
    let mut pos = skip_modifiers(text, eq + 1);
    if let Some(after_fn) = expect_keyword(text, pos, &["function"]) {
        pos = after_fn;
        if let Some((_, _, after_inner)) = read_ident(text, pos) {
            pos = after_inner;
        }
    }
    let open = skip_ws(text, pos);
    if text.as_bytes()[..end].get(open) != Some(&b'(') {
        return Err(unsupported(open, "arrow function without parenthesised parameters"));
    }
    let close = matching_close(&text[..end], open).ok_or_else(|| malformed(open, "unbalanced `(`"))?;
    let mut rest = text[close + 1..end].trim_end();
    if let Some(r) = rest.strip_suffix("=>") {
        rest = r;
    }
    Ok(Parts {
        name: name.to_string(),
        params: split_params(&text[open + 1..close], open + 1),
        rest,
        rest_offset: close + 1,
    })
}

fn check_plain_param(raw: &str, offset: usize) -> Result<(), SigError> {
    let t = raw.trim();
    if t.starts_with('{') || t.starts_with('[') {
        return Err(unsupported(offset, "destructuring parameter"));
    }
    if t.starts_with("...") || t.starts_with('*') || t.starts_with('&') || t.starts_with('@') || t.starts_with('%') {
        return Err(unsupported(offset, "variadic or reference parameter"));
    }
    if t.contains('=') && !t.contains("=>") {
        return Err(unsupported(offset, "default parameter value"));
    }
    Ok(())
}

fn param_name(raw: &str, offset: usize) -> Result<String, SigError> {
    let t = raw.trim();
    if is_identifier(t) {
        Ok(t.to_string())
    } else {
        Err(malformed(offset, format!("invalid parameter name `{t}`")))
    }
}

/// `name: type` parameters (Python, TypeScript, Kotlin, Scala, Swift).
fn colon_param(lang: LanguageId, raw: &str, offset: usize) -> Result<Param, SigError> {
    check_plain_param(raw, offset)?;
    let t = raw.trim();
    if lang == LanguageId::Kotlin && t.starts_with("vararg") {
        return Err(unsupported(offset, "vararg parameter"));
    }
    let (lhs, ty) = match t.find(':') {
        Some(i) => (&t[..i], parse_type(lang, &t[i + 1..], TypeSlot::Param)),
        None => (t, None),
    };
    let mut lhs = lhs.trim();
    let mut optional = false;
    if lang == LanguageId::TypeScript {
        if let Some(r) = lhs.strip_suffix('?') {
            lhs = r.trim_end();
            optional = true;
        }
    }
    // Swift argument labels: `_ name` or `label name`.
    let name_part = lhs.rsplit(char::is_whitespace).next().unwrap_or(lhs);
    let name = param_name(name_part, offset)?;
    let ty = match (optional, ty) {
        (true, Some(t)) if !matches!(t, TypeRef::Optional(_)) => Some(TypeRef::optional(t)),
        (_, ty) => ty,
    };
    Ok(Param::new(name, ty))
}

/// `Type name` parameters (Java, C#).
fn type_first_param(lang: LanguageId, raw: &str, offset: usize) -> Result<Param, SigError> {
    let mut t = raw.trim();
    if t.contains('=') && !t.contains("=>") {
        return Err(unsupported(offset, "default parameter value"));
    }
    for prefix in ["final ", "in "] {
        if let Some(r) = t.strip_prefix(prefix) {
            t = r.trim_start();
        }
    }
    for prefix in ["ref ", "out ", "params ", "this "] {
        if t.starts_with(prefix) {
            return Err(unsupported(offset, format!("`{}` parameter", prefix.trim())));
        }
    }
    if t.contains("...") {
        return Err(unsupported(offset, "variadic parameter"));
    }
    let split = t
        .rfind(char::is_whitespace)
        .ok_or_else(|| malformed(offset, format!("parameter `{t}` lacks a type")))?;
    let name = param_name(&t[split..], offset)?;
    let ty = parse_type(lang, &t[..split], TypeSlot::Param);
    Ok(Param::new(name, ty))
}

fn sigil_param(raw: &str, offset: usize, with_type: Option<LanguageId>) -> Result<Param, SigError> {
    let t = raw.trim();
    if t.contains("...") || t.contains('&') {
        return Err(unsupported(offset, "variadic or reference parameter"));
    }
    if t.contains('=') {
        return Err(unsupported(offset, "default parameter value"));
    }
    let dollar = t
        .rfind('$')
        .ok_or_else(|| {
            if t.starts_with('@') || t.starts_with('%') {
                unsupported(offset, "array or hash parameter")
            } else {
                malformed(offset, format!("parameter `{t}` lacks `$`"))
            }
        })?;
    let name = param_name(&t[dollar + 1..], offset)?;
    let ty = match with_type {
        Some(lang) => parse_type(lang, &t[..dollar], TypeSlot::Param),
        None => None,
    };
    Ok(Param::new(name, ty))
}

fn go_params(raw: &[(usize, &str)]) -> Result<Vec<Param>, SigError> {
    let mut named: Vec<(String, Option<TypeRef>, usize)> = Vec::new();
    for &(offset, piece) in raw {
        let t = piece.trim();
        let off = lead(offset, piece);
        if t.contains("...") {
            return Err(unsupported(off, "variadic parameter"));
        }
        match t.find(char::is_whitespace) {
            Some(i) => {
                let name = param_name(&t[..i], off)?;
                named.push((name, parse_type(LanguageId::Go, &t[i..], TypeSlot::Param), off));
            }
            None => {
                let name = param_name(t, off)?;
                named.push((name, None, off));
            }
        }
    }
    // `a, b int`: untyped names take the next declared type.
    let mut pending: Option<Option<TypeRef>> = None;
    let mut out: Vec<Param> = Vec::with_capacity(named.len());
    for (i, (name, ty, off)) in named.iter().enumerate().rev() {
        let has_type = raw[i].1.trim().contains(char::is_whitespace);
        if has_type {
            pending = Some(ty.clone());
            out.push(Param::new(name.clone(), ty.clone()));
        } else {
            match &pending {
                Some(t) => out.push(Param::new(name.clone(), t.clone())),
                None => return Err(malformed(*off, format!("parameter `{name}` lacks a type"))),
            }
        }
    }
    out.reverse();
    Ok(out)
}

fn parse_return(lang: LanguageId, rest: &str, offset: usize) -> Result<Option<TypeRef>, SigError> {
    use LanguageId as L;
    let mut r = rest.trim();
    if r.is_empty() {
        return Ok(None);
    }
    match lang {
        L::Python | L::Swift => {
            for kw in ["async", "throws", "rethrows"] {
                if let Some(x) = r.strip_prefix(kw) {
                    r = x.trim_start();
                }
            }
            if r.is_empty() {
                return Ok(None);
            }
            let t = r
                .strip_prefix("->")
                .ok_or_else(|| malformed(lead(offset, rest), "expected `->`"))?;
            Ok(parse_type(lang, t, TypeSlot::Return))
        }
        L::Kotlin | L::Scala | L::TypeScript | L::PHP => {
            let t = r
                .strip_prefix(':')
                .ok_or_else(|| malformed(lead(offset, rest), "expected `:` before return type"))?;
            Ok(parse_type(lang, t, TypeSlot::Return))
        }
        L::Go => Ok(parse_type(lang, r, TypeSlot::Return)),
        _ => Err(malformed(lead(offset, rest), "unexpected text after parameters")),
    }
}

fn finish(name: String, params: Vec<Param>, return_type: Option<TypeRef>) -> Result<SignatureIR, SigError> {
    let mut seen = HashSet::new();
    for p in &params {
        if !seen.insert(p.name.clone()) {
            return Err(malformed(0, format!("duplicate parameter `{}`", p.name)));
        }
    }
    Ok(SignatureIR {
        name,
        params,
        return_type,
    })
}

/// Parse one function header in `lang`'s surface syntax.
pub fn parse_signature(lang: LanguageId, text: &str) -> Result<SignatureIR, SigError> {
    use LanguageId as L;
    if lang == L::Perl {
        return parse_perl(text);
    }
    let end = header_end(text);
    if end == 0 {
        return Err(malformed(0, "empty header"));
    }
    let collect = |parts: &Parts, f: &dyn Fn(&str, usize) -> Result<Param, SigError>| {
        parts
            .params
            .iter()
            .map(|&(off, piece)| f(piece, lead(off, piece)))
            .collect::<Result<Vec<_>, _>>()
    };
    match lang {
        L::Python => {
            let parts = keyword_led(text, end, &["def"])?;
            let params = collect(&parts, &|p, o| {
                if p.trim() == "/" {
                    return Err(unsupported(o, "positional-only marker"));
                }
                colon_param(lang, p, o)
            })?;
            let ret = parse_return(lang, parts.rest, parts.rest_offset)?;
            finish(parts.name, params, ret)
        }
        L::Kotlin | L::Scala | L::Swift => {
            let kw: &[&str] = match lang {
                L::Kotlin => &["fun"],
                L::Scala => &["def"],
                _ => &["func"],
            };
            let parts = keyword_led(text, end, kw)?;
            let params = collect(&parts, &|p, o| colon_param(lang, p, o))?;
            let ret = parse_return(lang, parts.rest, parts.rest_offset)?;
            finish(parts.name, params, ret)
        }
        L::JavaScript | L::TypeScript => {
            let pos = skip_modifiers(text, 0);
            let parts = if expect_keyword(text, pos, &["function"]).is_some() {
                keyword_led(text, end, &["function"])?
            } else {
                const_bound(text, end)?
            };
            let params = if lang == L::JavaScript {
                collect(&parts, &|p, o| {
                    check_plain_param(p, o)?;
                    Ok(Param::new(param_name(p, o)?, None))
                })?
            } else {
                collect(&parts, &|p, o| colon_param(lang, p, o))?
            };
            let ret = if lang == L::TypeScript {
                parse_return(lang, parts.rest, parts.rest_offset)?
            } else {
                if !parts.rest.trim().is_empty() {
                    return Err(malformed(lead(parts.rest_offset, parts.rest), "unexpected text after parameters"));
                }
                None
            };
            finish(parts.name, params, ret)
        }
        L::Go => {
            let parts = keyword_led(text, end, &["func"])?;
            let params = go_params(&parts.params)?;
            let ret = parse_return(lang, parts.rest, parts.rest_offset)?;
            finish(parts.name, params, ret)
        }
        L::PHP => {
            let parts = keyword_led(text, end, &["function"])?;
            let params = collect(&parts, &|p, o| sigil_param(p, o, Some(L::PHP)))?;
            let ret = parse_return(lang, parts.rest, parts.rest_offset)?;
            finish(parts.name, params, ret)
        }
        L::Ruby => {
            let pos = skip_modifiers(text, 0);
            let after_kw =
                expect_keyword(text, pos, &["def"]).ok_or_else(|| malformed(pos, "expected `def`"))?;
            let (name, _, after_name) = read_ident(text, after_kw)
                .ok_or_else(|| malformed(after_kw, "expected method name"))?;
            let mut name_end = after_name;
            if matches!(text.as_bytes().get(name_end), Some(b'?') | Some(b'!')) {
                return Err(unsupported(name_end, "predicate or bang method name"));
            }
            let open = skip_ws(text, name_end);
            let params = if text.as_bytes()[..end].get(open) == Some(&b'(') {
                let close = matching_close(&text[..end], open)
                    .ok_or_else(|| malformed(open, "unbalanced `(`"))?;
                name_end = close + 1;
                split_params(&text[open + 1..close], open + 1)
                    .into_iter()
                    .map(|(off, p)| {
                        let o = lead(off, p);
                        check_plain_param(p, o)?;
                        if p.trim().ends_with(':') {
                            return Err(unsupported(o, "keyword argument"));
                        }
                        Ok(Param::new(param_name(p, o)?, None))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                Vec::new()
            };
            if !text[name_end..end].trim().is_empty() {
                return Err(malformed(skip_ws(text, name_end), "unexpected text after parameters"));
            }
            finish(name.to_string(), params, None)
        }
        L::Java | L::CSharp => parse_type_led(lang, text, end),
        L::Perl => unreachable!(),
    }
}

fn parse_type_led(lang: LanguageId, text: &str, end: usize) -> Result<SignatureIR, SigError> {
    let mut head = &text[..end];
    if let Some(i) = head.find(" throws ") {
        head = head[..i].trim_end();
    }
    let close = head
        .rfind(')')
        .filter(|&i| head[i + 1..].trim().is_empty())
        .ok_or_else(|| malformed(head.len(), "expected `)` closing the parameter list"))?;
    // Walk back to the `(` that matches the final `)`.
    let mut depth = 0i32;
    let mut open = None;
    for (i, c) in head[..=close].char_indices().rev() {
        match c {
            ')' | ']' | '}' => depth += 1,
            '(' | '[' | '{' => {
                depth -= 1;
                if depth == 0 {
                    open = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    let open = open.ok_or_else(|| malformed(close, "unbalanced `)`"))?;
    let prefix = head[..open].trim_end();
    let name_start = prefix
        .rfind(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .map(|i| i + 1)
        .unwrap_or(0);
    let name = &prefix[name_start..];
    if !is_identifier(name) {
        return Err(malformed(name_start, "expected method name before `(`"));
    }
    let ret_start = skip_modifiers(text, 0);
    if ret_start > name_start {
        return Err(malformed(name_start, "missing return type"));
    }
    let ret_text = text[ret_start..name_start].trim();
    if ret_text.starts_with('<') {
        return Err(unsupported(ret_start, "generic type parameters"));
    }
    if ret_text.is_empty() {
        return Err(malformed(ret_start, "missing return type"));
    }
    let return_type = parse_type(lang, ret_text, TypeSlot::Return);
    let params = split_params(&head[open + 1..close], open + 1)
        .into_iter()
        .map(|(off, p)| type_first_param(lang, p, lead(off, p)))
        .collect::<Result<Vec<_>, _>>()?;
    finish(name.to_string(), params, return_type)
}

/// `sub name($a, $b) {` or `sub name {` followed by `my ($a, $b) = @_;`.
fn parse_perl(text: &str) -> Result<SignatureIR, SigError> {
    let first_end = text.find('\n').unwrap_or(text.len());
    let first = &text[..first_end];
    let end = header_end(first);
    let pos = skip_ws(text, 0);
    let after_kw = expect_keyword(text, pos, &["sub"]).ok_or_else(|| malformed(pos, "expected `sub`"))?;
    let (name, _, after_name) =
        read_ident(text, after_kw).ok_or_else(|| malformed(after_kw, "expected sub name"))?;
    let open = skip_ws(first, after_name);
    let sigil = |pieces: Vec<(usize, &str)>| {
        pieces
            .into_iter()
            .map(|(off, p)| sigil_param(p, lead(off, p), None))
            .collect::<Result<Vec<_>, _>>()
    };
    if open < end && first.as_bytes()[open] == b'(' {
        let close =
            matching_close(&first[..end], open).ok_or_else(|| malformed(open, "unbalanced `(`"))?;
        if !first[close + 1..end].trim().is_empty() {
            return Err(malformed(close + 1, "unexpected text after parameters"));
        }
        let params = sigil(split_params(&first[open + 1..close], open + 1))?;
        if !text[first_end..].trim().is_empty() {
            return Err(malformed(first_end, "unexpected text after signature"));
        }
        return finish(name.to_string(), params, None);
    }
    if !first[after_name..end].trim().is_empty() {
        return Err(malformed(after_name, "expected `(` or `{`"));
    }
    let rest = &text[first_end..];
    let body = rest.trim();
    if body.is_empty() {
        return finish(name.to_string(), Vec::new(), None);
    }
    let base = first_end + (rest.len() - rest.trim_start().len());
    let unpack = body
        .strip_prefix("my")
        .map(str::trim_start)
        .and_then(|b| b.strip_prefix('('))
        .ok_or_else(|| malformed(base, "expected `my (...) = @_;`"))?;
    let close = unpack
        .find(')')
        .ok_or_else(|| malformed(base, "unbalanced `(` in argument unpacking"))?;
    let tail = unpack[close + 1..].trim();
    if tail != "= @_;" && tail != "= @_" {
        return Err(malformed(base, "expected `= @_;` after argument list"));
    }
    let inner_off = base + (body.len() - unpack.len());
    let params = sigil(split_params(&unpack[..close], inner_off))?;
    finish(name.to_string(), params, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use LanguageId as L;

    fn sig(name: &str, params: Vec<(&str, Option<TypeRef>)>, ret: Option<TypeRef>) -> SignatureIR {
        SignatureIR {
            name: name.into(),
            params: params.into_iter().map(|(n, t)| Param::new(n, t)).collect(),
            return_type: ret,
        }
    }

    #[test]
    fn python_below_zero() {
        let ir = parse_signature(L::Python, "def below_zero(operations) -> bool:").unwrap();
        assert_eq!(ir, sig("below_zero", vec![("operations", None)], Some(TypeRef::Bool)));
    }

    #[test]
    fn python_empty_params() {
        assert_eq!(parse_signature(L::Python, "def f():").unwrap(), sig("f", vec![], None));
    }

    #[test]
    fn java_sum() {
        let ir = parse_signature(L::Java, "public static long sum(List<Integer> xs, int k)").unwrap();
        assert_eq!(
            ir,
            sig(
                "sum",
                vec![("xs", Some(TypeRef::list(TypeRef::Int))), ("k", Some(TypeRef::Int))],
                Some(TypeRef::Long)
            )
        );
    }

    #[test]
    fn go_render_sum() {
        let ir = sig(
            "sum",
            vec![("xs", Some(TypeRef::list(TypeRef::Int))), ("k", Some(TypeRef::Int))],
            Some(TypeRef::Long),
        );
        assert_eq!(render_signature(L::Go, &ir).unwrap(), "func sum(xs []int, k int) int64 {");
    }

    #[test]
    fn typescript_render_published_form() {
        let ir = sig("below_zero", vec![("operations", None)], Some(TypeRef::Bool));
        assert_eq!(
            render_signature(L::TypeScript, &ir).unwrap(),
            "const below_zero = function (operations): boolean {"
        );
    }

    #[test]
    fn go_shared_parameter_types() {
        let ir = parse_signature(L::Go, "func add(a, b int) int {").unwrap();
        assert_eq!(
            ir,
            sig("add", vec![("a", Some(TypeRef::Int)), ("b", Some(TypeRef::Int))], Some(TypeRef::Int))
        );
    }

    #[test]
    fn perl_unpacking_form() {
        let ir = parse_signature(L::Perl, "sub below_zero {\n    my ($operations) = @_;").unwrap();
        assert_eq!(ir, sig("below_zero", vec![("operations", None)], None));
    }

    #[test]
    fn csharp_tuple_return() {
        let ir = parse_signature(L::CSharp, "public static (int, string) Split((int, int) pair) {").unwrap();
        assert_eq!(ir.name, "Split");
        assert_eq!(ir.return_type, Some(TypeRef::Tuple(vec![TypeRef::Int, TypeRef::Str])));
        assert_eq!(ir.params[0].ty, Some(TypeRef::Tuple(vec![TypeRef::Int, TypeRef::Int])));
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_signature(L::Python, "  below_zero(x):") {
            Err(SigError::MalformedSignature { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_signature(L::JavaScript, "function f({a, b}) {") {
            Err(SigError::UnsupportedConstruct { offset, .. }) => assert_eq!(offset, 11),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_signature(L::Python, "def f(*args):"),
            Err(SigError::UnsupportedConstruct { .. })
        ));
    }

    #[test]
    fn unrenderable_tuple_in_java() {
        let ir = sig("f", vec![("p", Some(TypeRef::Tuple(vec![TypeRef::Int, TypeRef::Int])))], None);
        assert!(matches!(
            render_signature(L::Java, &ir),
            Err(SigError::UnrenderableType { .. })
        ));
    }

    #[test]
    fn invalid_ir_is_rejected() {
        let ir = sig("f", vec![("a", None), ("a", None)], None);
        assert!(render_signature(L::Python, &ir).is_err());
    }
}
