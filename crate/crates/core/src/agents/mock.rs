//! Rules the mock backend answers with.

use super::SeedSample;
use crate::scot::{ScotDocument, ScotNode};
use crate::sig_ir::{render_type, Header, TypeRef, TypeSlot, PERSONA_PREFIX};

fn words(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|w| !w.is_empty())
}

/// Keep a seed when its solution has real code and its docstring names every parameter.
pub fn cq_rule(s: &SeedSample) -> bool {
    let has_body = s.solution.lines().map(str::trim).any(|l| {
        !l.is_empty() && l != "pass" && !l.starts_with('#') && !l.starts_with("...")
    });
    if !has_body {
        return false;
    }
    let Ok(h) = s.header() else { return false };
    let doc_words: Vec<&str> = words(&s.docstring).collect();
    h.signature.params.iter().all(|p| doc_words.contains(&p.name.as_str()))
}

fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        cur.push(c);
        let end = matches!(c, '.' | '!' | '?') && chars.get(i + 1).is_none_or(|n| n.is_whitespace());
        if end {
            out.push(std::mem::take(&mut cur));
        }
    }
    out.push(cur);
    out.into_iter()
        .map(|s| s.trim().trim_end_matches(':').trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Template CoT built from the header alone.
///
/// First sentence opens, last closes, the ones between become core steps. A summary that
/// says "if" adds a branch to the core; a list parameter wraps the core in a loop.
pub fn scot_template(h: &Header) -> ScotDocument {
    let summary: Vec<&str> = h
        .docstring
        .summary
        .iter()
        .map(String::as_str)
        .filter(|l| !l.starts_with(PERSONA_PREFIX))
        .collect();
    let sents = sentences(&summary.join(" "));
    let params = &h.signature.params;
    let input = if params.is_empty() {
        "no arguments".to_string()
    } else {
        params
            .iter()
            .map(|p| match &p.ty {
                Some(t) => {
                    let spelled = render_type(h.language, t, TypeSlot::Param).ok().flatten();
                    format!("{} ({})", p.name, spelled.unwrap_or_else(|| t.to_string()))
                }
                None => p.name.clone(),
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    let output = match &h.signature.return_type {
        Some(t) => {
            let spelled = render_type(h.language, t, TypeSlot::Return).ok().flatten();
            format!("a value of type {}", spelled.unwrap_or_else(|| t.to_string()))
        }
        None => "the result".to_string(),
    };
    if sents.is_empty() {
        return ScotDocument { input, output, body: vec![ScotNode::step("return the result")] };
    }
    let head = ScotNode::step(sents[0].clone());
    let (middle, tail) = if sents.len() == 1 {
        (&sents[1..], ScotNode::step("return the result"))
    } else {
        (&sents[1..sents.len() - 1], ScotNode::step(sents[sents.len() - 1].clone()))
    };
    let mut core: Vec<ScotNode> = middle.iter().cloned().map(ScotNode::step).collect();
    if sents.iter().any(|s| words(s).any(|w| w.eq_ignore_ascii_case("if"))) {
        core.push(ScotNode::branch(
            "if the condition described above holds",
            vec![ScotNode::step("return the corresponding result")],
            vec![],
        ));
    }
    let list = params.iter().find(|p| matches!(p.ty, Some(TypeRef::List(_))));
    if let Some(p) = list {
        if core.is_empty() {
            core.push(ScotNode::step("process the current element"));
        }
        core = vec![ScotNode::lp(format!("for each element in {}", p.name), core)];
    }
    let mut body = vec![head];
    body.extend(core);
    body.push(tail);
    ScotDocument { input, output, body }
}
