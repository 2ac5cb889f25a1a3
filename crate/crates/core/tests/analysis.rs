use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use polyscot::agents::{AgentConfig, MockBackend};
use polyscot::analysis::*;
use polyscot::dataset::{build_dataset, ingest_seed, BuildConfig, CotRecord, Provenance};
use polyscot::par::Exec;
use polyscot::scot::{parse_scot, ScotDocument, ScotNode};
use polyscot::sig_ir::{parse_header, translate_header, Header, LanguageId};
use proptest::prelude::*;

fn fixture(p: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(p)
}

fn headers() -> BTreeMap<LanguageId, Header> {
    let py = parse_header(LanguageId::Python, "def f(x: int) -> int:\n    '''Return x.'''").unwrap();
    LanguageId::ALL.iter().map(|&l| (l, translate_header(&py, l).unwrap())).collect()
}

fn record(h: &BTreeMap<LanguageId, Header>, task: &str, lang: LanguageId, cot: ScotDocument) -> CotRecord {
    CotRecord {
        task_id: task.into(),
        language: lang,
        header: h[&lang].clone(),
        cot,
        provenance: Provenance { backend: "test".into(), templates: "v1".into(), timestamp: 0 },
    }
}

fn steps(n: usize) -> ScotDocument {
    ScotDocument { input: "x".into(), output: "y".into(), body: vec![ScotNode::step("go"); n] }
}

#[test]
fn one_to_many_store_gives_all_ones() {
    let seeds = ingest_seed(&fixture("seeds/seeds20.jsonl")).unwrap().samples;
    let cfg = BuildConfig::new(AgentConfig::new(Arc::new(MockBackend::new(42))));
    let out = build_dataset(&seeds, &LanguageId::ALL, &cfg).unwrap();
    let m = build_matrix(&out.records, &LanguageId::ALL, Weights::default()).unwrap();
    assert_eq!(m.cells.len(), 12);
    assert!(m.cells.iter().flatten().all(|&v| v == 1.0));
}

#[test]
fn off_diagonal_is_mean_over_tasks() {
    let h = headers();
    let (a, b) = (LanguageId::Python, LanguageId::Go);
    // structural only: 5 vs 4 steps gives 0.8, 5 vs 3 gives 0.6
    let recs = vec![
        record(&h, "t1", a, steps(5)),
        record(&h, "t1", b, steps(4)),
        record(&h, "t2", a, steps(5)),
        record(&h, "t2", b, steps(3)),
    ];
    let w = Weights { lexical: 0.0, structural: 1.0 };
    let m = build_matrix(&recs, &[a, b], w).unwrap();
    assert!((m.get(0, 1) - 0.7).abs() < 1e-12);
    assert_eq!(m.get(0, 1), m.get(1, 0));
    assert_eq!((m.get(0, 0), m.get(1, 1)), (1.0, 1.0));

    let single = build_matrix(&recs, &[a], w).unwrap();
    assert_eq!(single.cells, vec![vec![1.0]]);
}

#[test]
fn no_shared_tasks_is_an_error() {
    let h = headers();
    let recs = vec![record(&h, "t1", LanguageId::Python, steps(1)), record(&h, "t2", LanguageId::Go, steps(1))];
    let err = build_matrix(&recs, &[LanguageId::Python, LanguageId::Go], Weights::default()).unwrap_err();
    assert!(matches!(err, AnalysisError::NoSharedTasks(LanguageId::Python, LanguageId::Go)));
}

#[test]
fn pair_fixture_matches_hand_computation() {
    let a = parse_scot(&fs::read_to_string(fixture("analysis/pair_a.txt")).unwrap()).unwrap();
    let b = parse_scot(&fs::read_to_string(fixture("analysis/pair_b.txt")).unwrap()).unwrap();
    let want: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture("analysis/pair_expected.json")).unwrap()).unwrap();
    let c = similarity_channels(&a, &b);
    assert!((c.lexical - want["lexical"].as_f64().unwrap()).abs() < 1e-12);
    assert!((c.structural - want["structural"].as_f64().unwrap()).abs() < 1e-12);
    assert!((cot_similarity(&a, &b, Weights::default()) - want["blend"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn heatmaps() {
    let labels = LanguageId::ALL.to_vec();
    let ones = SimilarityMatrix { labels: labels.clone(), cells: vec![vec![1.0; 12]; 12] };
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    emit_heatmap(&ones, &csv, HeatmapFormat::Csv).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.lines().nth(1).unwrap().ends_with(",1.0000"));

    let svg = dir.path().join("m.svg");
    emit_heatmap(&ones, &svg, HeatmapFormat::Svg).unwrap();
    let first = fs::read(&svg).unwrap();
    let s = String::from_utf8(first.clone()).unwrap();
    assert_eq!(s.matches("<rect").count(), 144);
    assert_eq!(s.matches(r#"fill="rgb(0,0,0)""#).count(), 144);
    emit_heatmap(&ones, &svg, HeatmapFormat::Svg).unwrap();
    assert_eq!(fs::read(&svg).unwrap(), first);
}

#[test]
fn rubric_fixture_reproduces_table() {
    let scores = load_rubric(&fixture("analysis/rubric.csv")).unwrap();
    let show = |m: RubricMeans| [m.similarity, m.naturalness, m.educational_value].map(|c| c.to_string());
    let ms = aggregate_rubric(&scores, "MSCoT").unwrap();
    assert_eq!(ms.n, 60);
    assert_eq!(show(ms), ["3.47", "3.33", "3.28"]);
    assert_eq!(show(aggregate_rubric(&scores, "COTTON").unwrap()), ["2.78", "2.57", "2.50"]);
    assert!(matches!(aggregate_rubric(&scores, "GPT4"), Err(AnalysisError::EmptyInput(_))));
    let report = rubric_report(&scores).unwrap();
    assert_eq!(report.scale, RUBRIC_SCALE_NOTE);
}

#[test]
fn rubric_rejects_out_of_range() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");
    fs::write(&p, "rater,task_id,system,similarity,naturalness,educational_value\nr,t,A,3,6,1\n").unwrap();
    assert!(matches!(load_rubric(&p), Err(AnalysisError::Schema { line: 2, .. })));
    fs::write(&p, "rater,task,system,similarity,naturalness,educational_value\n").unwrap();
    assert!(matches!(load_rubric(&p), Err(AnalysisError::Schema { line: 1, .. })));
}

const WORDS: &[&str] = &["add", "total", "list", "return", "sum", "count", "index", "swap", "the", "value"];

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..4).prop_map(|w| w.join(" "))
}

fn node() -> impl Strategy<Value = ScotNode> {
    let leaf = text().prop_map(ScotNode::step);
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (text(), prop::collection::vec(inner.clone(), 1..3)).prop_map(|(h, b)| ScotNode::lp(format!("for {h}"), b)),
            (text(), prop::collection::vec(inner, 1..3))
                .prop_map(|(c, t)| ScotNode::branch(format!("if {c}"), t, vec![])),
        ]
    })
}

fn document() -> impl Strategy<Value = ScotDocument> {
    (text(), text(), prop::collection::vec(node(), 1..4)).prop_map(|(input, output, body)| ScotDocument {
        input,
        output,
        body,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarity_reflexive_and_symmetric(a in document(), b in document()) {
        prop_assert_eq!(cot_similarity(&a, &a, Weights::default()), 1.0);
        let (x, y) = (cot_similarity(&a, &b, Weights::default()), cot_similarity(&b, &a, Weights::default()));
        prop_assert_eq!(x, y);
        prop_assert!((0.0..=1.0).contains(&x));
    }

    #[test]
    fn matrix_symmetric_with_unit_diagonal(
        docs in prop::collection::vec(document(), 12 * 3),
        drop in prop::collection::vec(any::<bool>(), 12 * 3),
    ) {
        let h = headers();
        let mut recs = Vec::new();
        for (i, (d, skip)) in docs.into_iter().zip(drop).enumerate() {
            // task t0 is always present so every pair shares at least one task
            let task = i / 12;
            if skip && task > 0 {
                continue;
            }
            recs.push(record(&h, &format!("t{task}"), LanguageId::ALL[i % 12], d));
        }
        for exec in [Exec::Sequential, Exec::Parallel] {
            let m = build_matrices(&recs, &LanguageId::ALL, Weights::default(), exec).unwrap();
            for mat in [&m.blend, &m.lexical, &m.structural] {
                for i in 0..12 {
                    prop_assert_eq!(mat.get(i, i), 1.0);
                    for j in 0..12 {
                        prop_assert_eq!(mat.get(i, j), mat.get(j, i));
                        prop_assert!((0.0..=1.0).contains(&mat.get(i, j)));
                    }
                }
            }
        }
    }

    #[test]
    fn rubric_permutation_invariant(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut scores = load_rubric(&fixture("analysis/rubric.csv")).unwrap();
        let base = aggregate_rubric(&scores, "MSCoT").unwrap();
        scores.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(aggregate_rubric(&scores, "MSCoT").unwrap(), base);
    }
}
