use polyscot::sig_ir::*;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = TypeRef> {
    prop_oneof![
        Just(TypeRef::Int),
        Just(TypeRef::Long),
        Just(TypeRef::Float),
        Just(TypeRef::Double),
        Just(TypeRef::Bool),
        Just(TypeRef::Str),
        Just(TypeRef::Char),
        Just(TypeRef::opaque("Widget")),
    ]
}

fn type_ref() -> impl Strategy<Value = TypeRef> {
    leaf().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(TypeRef::list),
            (inner.clone(), inner.clone()).prop_map(|(k, v)| TypeRef::map(k, v)),
            inner.clone().prop_map(TypeRef::optional),
            prop::collection::vec(inner, 2..4).prop_map(TypeRef::Tuple),
        ]
    })
}

fn ident() -> impl Strategy<Value = String> {
    "v[a-z0-9_]{0,6}"
}

fn signature() -> impl Strategy<Value = SignatureIR> {
    (
        ident(),
        prop::collection::vec((ident(), prop::option::of(type_ref())), 0..4),
        prop::option::of(type_ref()),
    )
        .prop_map(|(name, params, return_type)| {
            let mut seen = std::collections::HashSet::new();
            let params = params
                .into_iter()
                .filter(|(n, _)| seen.insert(n.clone()))
                .map(|(n, t)| Param::new(n, t))
                .collect();
            SignatureIR {
                name,
                params,
                return_type,
            }
        })
}

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-z]{1,8}", 1..6).prop_map(|w| w.join(" "))
}

fn docstring() -> impl Strategy<Value = DocstringIR> {
    (
        prop::collection::vec(words(), 0..3),
        prop::collection::vec((ident(), words()), 0..3),
        prop::option::of(words()),
        prop::option::of(prop::collection::vec(
            prop_oneof![words(), Just("f(1) < 2 && x".to_string())],
            1..3,
        )),
    )
        .prop_map(|(summary, params, returns_doc, examples)| DocstringIR {
            summary,
            param_docs: params
                .into_iter()
                .map(|(name, text)| ParamDoc { name, text })
                .collect(),
            returns_doc,
            examples,
        })
}

fn lang() -> impl Strategy<Value = LanguageId> {
    prop::sample::select(LanguageId::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn signature_round_trip(lang in lang(), sig in signature()) {
        let Ok(canon) = canonical_signature(lang, &sig) else { return Ok(()); };
        let text = render_signature(lang, &sig).unwrap();
        let back = parse_signature(lang, &text).unwrap();
        prop_assert_eq!(&back, &canon, "{}", text);
        prop_assert_eq!(render_signature(lang, &back).unwrap(), text);
    }

    #[test]
    fn docstring_round_trip(lang in lang(), doc in docstring()) {
        let text = render_docstring(lang, &doc);
        prop_assert_eq!(parse_docstring(lang, &text).unwrap(), doc.normalized(), "{}", text);
    }

    #[test]
    fn translation_preserves_name_and_arity(
        a in lang(), b in lang(), sig in signature(), doc in docstring()
    ) {
        let Ok(text) = render_header(a, &doc, &sig) else { return Ok(()); };
        let h = parse_header(a, &text).unwrap();
        let t = translate_header(&h, b).unwrap();
        prop_assert_eq!(&t.signature.name, &sig.name);
        let names: Vec<_> = t.signature.params.iter().map(|p| &p.name).collect();
        let orig: Vec<_> = sig.params.iter().map(|p| &p.name).collect();
        prop_assert_eq!(names, orig);
        prop_assert_eq!(translate_header(&h, b).unwrap(), t);
    }
}
