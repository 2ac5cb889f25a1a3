use polyscot::sig_ir::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Ir {
    signature: SignatureIR,
    docstring: DocstringIR,
}

#[derive(Deserialize)]
struct Row {
    language: LanguageId,
    raw_header: String,
    ir: Ir,
}

fn corpus() -> Vec<Row> {
    include_str!("../fixtures/sig_corpus.jsonl")
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn corpus_covers_every_language() {
    let rows = corpus();
    assert!(rows.len() >= 60);
    for lang in LanguageId::ALL {
        assert!(rows.iter().filter(|r| r.language == lang).count() >= 5, "{lang}");
    }
}

#[test]
fn every_header_parses_to_its_hand_written_ir() {
    for r in corpus() {
        let h = parse_header(r.language, &r.raw_header)
            .unwrap_or_else(|e| panic!("{}: {e}\n{}", r.language, r.raw_header));
        assert_eq!(h.signature, r.ir.signature, "{}\n{}", r.language, r.raw_header);
        assert_eq!(h.docstring, r.ir.docstring, "{}\n{}", r.language, r.raw_header);
    }
}

#[test]
fn parse_render_parse_is_stable() {
    for r in corpus() {
        let h = parse_header(r.language, &r.raw_header).unwrap();
        let text = h.canonical_text().unwrap();
        let again = parse_header(r.language, &text).unwrap();
        assert_eq!(again.signature, h.signature, "{text}");
        assert_eq!(again.docstring, h.docstring, "{text}");
        assert_eq!(again.canonical_text().unwrap(), text);
    }
}

#[test]
fn names_survive_every_translation_chain() {
    for r in corpus() {
        let h = parse_header(r.language, &r.raw_header).unwrap();
        for a in LanguageId::ALL {
            let ha = translate_header(&h, a).unwrap();
            for b in LanguageId::ALL {
                let hb = translate_header(&ha, b).unwrap();
                assert_eq!(hb.signature.name, h.signature.name);
                assert_eq!(hb.signature.arity(), h.signature.arity());
                assert_eq!(parse_header(b, &hb.raw_text).unwrap(), hb);
            }
        }
    }
}
