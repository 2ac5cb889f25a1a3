use std::collections::BTreeMap;

use serde::Deserialize;

use super::AgentError;
use crate::sig_ir::LanguageId;

pub const TEMPLATE_VERSION: &str = "v1";

const CQ: &str = include_str!("../../templates/cq.v1.txt");
const CT: &str = include_str!("../../templates/ct.v1.txt");
const SCOT: &str = include_str!("../../templates/scot.v1.txt");
const EXEMPLARS: &str = include_str!("../../templates/ct_exemplars.json");
pub const SCOT_DEMO_INPUT: &str = include_str!("../../templates/scot_demo_input.txt");
pub const SCOT_DEMO_OUTPUT: &str = include_str!("../../templates/scot_demo_output.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Cq,
    Ct,
    Scot,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Cq => "cq",
            AgentKind::Ct => "ct",
            AgentKind::Scot => "scot",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            AgentKind::Cq => CQ,
            AgentKind::Ct => CT,
            AgentKind::Scot => SCOT,
        }
    }
}

/// Fill `{{name}}` slots in one pass; bound values are never rescanned.
/// The `Role:` line becomes the system text and the rest the user text.
pub fn render_prompt(kind: AgentKind, bindings: &BTreeMap<&str, String>) -> Result<(String, String), AgentError> {
    let tpl = kind.template();
    let mut out = String::with_capacity(tpl.len());
    let mut rest = tpl;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find("}}")
            .ok_or_else(|| AgentError::MissingBinding("unterminated placeholder".into()))?;
        let name = &after[..end];
        let value = bindings
            .get(name)
            .ok_or_else(|| AgentError::MissingBinding(name.to_string()))?;
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    let (role, user) = out.split_once('\n').unwrap_or((&out, ""));
    let system = role.strip_prefix("Role: ").unwrap_or(role).to_string();
    Ok((system, user.trim_end().to_string()))
}

#[derive(Deserialize)]
struct Pair {
    source: LanguageId,
    target: LanguageId,
    input: String,
    output: String,
}

#[derive(Deserialize)]
struct ExemplarTable {
    headers: BTreeMap<LanguageId, String>,
    pairs: Vec<Pair>,
}

/// Few-shot pair for `src -> tgt`: a dedicated pair if one is committed, else the
/// per-language below_zero headers.
pub fn ct_exemplar(src: LanguageId, tgt: LanguageId) -> (String, String) {
    let table: ExemplarTable = serde_json::from_str(EXEMPLARS).expect("committed exemplar table is valid");
    if let Some(p) = table.pairs.into_iter().find(|p| p.source == src && p.target == tgt) {
        return (p.input, p.output);
    }
    (table.headers[&src].clone(), table.headers[&tgt].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig_ir::parse_header;

    fn b(pairs: &[(&'static str, &str)]) -> BTreeMap<&'static str, String> {
        pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
    }

    #[test]
    fn cq_prompt_role_and_task() {
        let (sys, user) = render_prompt(AgentKind::Cq, &b(&[("input", "def f(): pass")])).unwrap();
        assert!(sys.starts_with("You are a helpful code assistant."));
        assert!(user.contains("Output True if both conditions are met, otherwise output False."));
        assert!(user.ends_with("def f(): pass"));
    }

    #[test]
    fn ct_prompt_substitutes_languages() {
        let (ei, eo) = ct_exemplar(LanguageId::Python, LanguageId::Go);
        let (_, user) = render_prompt(
            AgentKind::Ct,
            &b(&[("source", "Python"), ("target", "Go"), ("example_input", &ei), ("example_output", &eo), ("input", "x")]),
        )
        .unwrap();
        assert!(user.contains("from Python to Go"));
    }

    #[test]
    fn scot_prompt_names_the_three_structures() {
        let (_, user) = render_prompt(
            AgentKind::Scot,
            &b(&[("demo_input", SCOT_DEMO_INPUT), ("demo_output", SCOT_DEMO_OUTPUT), ("input", "x")]),
        )
        .unwrap();
        assert!(user.contains("sequences, branches, and loops"));
        assert!(user.contains("It starts with Let's think step by step and then a input-output structure."));
    }

    #[test]
    fn missing_binding_is_named() {
        let err = render_prompt(AgentKind::Ct, &b(&[("source", "Python")])).unwrap_err();
        assert!(matches!(err, AgentError::MissingBinding(ref n) if n == "target"));
    }

    #[test]
    fn bound_values_are_not_rescanned() {
        let (_, user) = render_prompt(AgentKind::Cq, &b(&[("input", "{{input}}")])).unwrap();
        assert!(user.ends_with("{{input}}"));
    }

    #[test]
    fn every_exemplar_parses_in_its_language() {
        for s in LanguageId::ALL {
            for t in LanguageId::ALL {
                let (i, o) = ct_exemplar(s, t);
                parse_header(s, &i).unwrap();
                parse_header(t, &o).unwrap();
            }
        }
    }
}
