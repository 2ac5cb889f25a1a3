use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(p: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(p).display().to_string()
}

fn polyscot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyscot"))
        .args(args)
        .env_remove("MSCOT_API_KEY")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn build_store(dir: &Path) -> PathBuf {
    let store = dir.join("store");
    let o = polyscot(&["build", "--seed-file", &fixture("seeds/seeds20.jsonl"), "--out", p(&store), "--mock"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    store
}

#[test]
fn build_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let store = build_store(dir.path());
    let first = fs::read(store.join("records/Python.jsonl")).unwrap();
    assert!(stdout(&polyscot(&["build", "--seed-file", &fixture("seeds/seeds20.jsonl"), "--out", p(&store)]))
        .contains("records 204"));
    assert_eq!(fs::read(store.join("records/Python.jsonl")).unwrap(), first);

    let out = dir.path().join("export");
    let o = polyscot(&["export", "--store", p(&store), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = fs::read(out.join("instructions.jsonl")).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("export_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["rows"], 204);
    assert_eq!(manifest["hyperparams"]["lora_r"], 32);
    assert_eq!(manifest["hyperparams"]["seed"], 42);
    assert_eq!(code(&polyscot(&["export", "--store", p(&store), "--out", p(&out)])), 0);
    assert_eq!(fs::read(out.join("instructions.jsonl")).unwrap(), rows);

    // drop one row from a shard: the store no longer fans out completely
    let shard = store.join("records/Ruby.jsonl");
    let text = fs::read_to_string(&shard).unwrap();
    fs::write(&shard, text.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    let o = polyscot(&["export", "--store", p(&store), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("fan-out incomplete"));
}

#[test]
fn build_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.jsonl");
    let o = polyscot(&["build", "--seed-file", p(&missing), "--out", p(&dir.path().join("s"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.jsonl"));

    let o = polyscot(&["build", "--seed-file", &fixture("seeds/seeds20.jsonl"), "--out", p(&dir.path().join("s")), "--live"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("MSCOT_API_KEY"));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"languages": ["Rust"]}"#).unwrap();
    assert_eq!(code(&polyscot(&["--config", p(&cfg), "check", "--scot", &fixture("scot/canonical.txt")])), 2);
}

#[test]
fn config_file_supplies_paths_and_languages() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let cfg = dir.path().join("cfg.json");
    let body = serde_json::json!({
        "languages": ["Python", "Go"],
        "paths": {"seed": fixture("seeds/seeds20.jsonl"), "store": p(&store)},
    });
    fs::write(&cfg, body.to_string()).unwrap();
    let o = polyscot(&["--config", p(&cfg), "build"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("records 34"));
    assert!(!store.join("records/Ruby.jsonl").exists());
}

#[test]
fn eval_mock_two_phase() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep");
    let args = [
        "eval",
        "--bench",
        &fixture("eval/bench8.jsonl"),
        "--code-script",
        &fixture("eval/scripted8.json"),
        "--report",
        p(&rep),
    ];
    let o = polyscot(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("Pass@1,75.00,75.00,"));
    assert!(out.contains("CoT-Pass@1,87.50,87.50,+12.50"));
    assert!(out.contains("phase-2 generations: 2"));
    let csv = fs::read(rep.join("report.csv")).unwrap();
    assert_eq!(code(&polyscot(&args)), 0);
    assert_eq!(fs::read(rep.join("report.csv")).unwrap(), csv);
    assert_eq!(fs::read_to_string(rep.join("ledger.jsonl")).unwrap().lines().count(), 8);

    // a Python-only benchmark cannot satisfy parity
    let mut parity = args.to_vec();
    parity.push("--parity");
    assert_eq!(code(&polyscot(&parity)), 1);

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let o = polyscot(&["eval", "--bench", p(&empty), "--code-script", &fixture("eval/scripted8.json"), "--report", p(&rep)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn eval_parity_fails_when_a_language_is_all_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let ids = ["CSharp", "Go", "Java", "JavaScript", "Kotlin", "Perl", "PHP", "Python", "Ruby", "Scala", "Swift", "TypeScript"];
    let mut bench = String::new();
    let mut script = serde_json::Map::new();
    for (i, l) in ids.iter().enumerate() {
        let row = serde_json::json!({
            "task_id": format!("t/{i}"), "language": l, "prompt": "p", "tests": "assert f() == 1", "entry_point": "f"
        });
        bench.push_str(&format!("{row}\n"));
        script.insert(format!("t/{i}"), serde_json::json!({"1": "x"}));
    }
    fs::write(dir.path().join("b.jsonl"), bench).unwrap();
    fs::write(dir.path().join("s.json"), serde_json::Value::Object(script).to_string()).unwrap();
    // every runner points at a binary that does not exist, so every language is Skipped
    let runners: serde_json::Map<String, serde_json::Value> = ids
        .iter()
        .map(|l| (l.to_string(), serde_json::json!({"file": "m", "run": ["polyscot-no-such-tool", "{src}"]})))
        .collect();
    fs::write(dir.path().join("c.json"), serde_json::json!({ "runners": runners }).to_string()).unwrap();
    let cots = dir.path().join("cots.json");
    let doc = fs::read_to_string(fixture("scot/canonical.txt")).unwrap();
    let cmap: serde_json::Map<String, serde_json::Value> =
        (0..12).map(|i| (format!("t/{i}"), serde_json::Value::String(doc.clone()))).collect();
    fs::write(&cots, serde_json::Value::Object(cmap).to_string()).unwrap();
    let o = polyscot(&[
        "--config",
        p(&dir.path().join("c.json")),
        "eval",
        "--bench",
        p(&dir.path().join("b.jsonl")),
        "--code-script",
        p(&dir.path().join("s.json")),
        "--cots",
        p(&cots),
        "--report",
        p(&dir.path().join("r")),
        "--parity",
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn analyze_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let store = build_store(dir.path());
    let (csv, svg) = (dir.path().join("h.csv"), dir.path().join("h.svg"));
    let o = polyscot(&["analyze", "--store", p(&store), "--heatmap", p(&csv), "--heatmap", p(&svg), "--rubric", &fixture("analysis/rubric.csv")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.lines().skip(1).all(|l| l.split(',').skip(1).all(|v| v == "1.0000")));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let out = stdout(&o);
    assert!(out.contains("Similarity,2.78,3.47"));
    assert!(out.contains("Naturalness,2.57,3.33"));
    assert!(out.contains("Educational Value,2.50,3.28"));
    assert!(out.contains("1-5 scale"));

    assert_eq!(code(&polyscot(&["analyze", "--rubric", p(&dir.path().join("none.csv"))])), 2);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "rater,task_id,system,similarity,naturalness,educational_value\nr,t,A,0,1,1\n").unwrap();
    assert_eq!(code(&polyscot(&["analyze", "--rubric", p(&bad)])), 2);
}

#[test]
fn check_scot_and_headers() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&polyscot(&["check", "--scot", &fixture("scot/canonical.txt")])), 0);
    let o = polyscot(&["check", "--scot", &fixture("scot/invalid/missing_preamble.txt")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("MissingPreamble"));

    let src = dir.path().join("src.py");
    fs::write(&src, "def add(a: int, b: int) -> int:\n    '''Add two numbers.'''\n").unwrap();
    let good = dir.path().join("good.ts");
    fs::write(&good, "/**\n * Add two numbers.\n */\nfunction add(a: number, b: number): number {\n").unwrap();
    let renamed = dir.path().join("renamed.ts");
    fs::write(&renamed, "/**\n * Add two numbers.\n */\nfunction plus(a: number, b: number): number {\n").unwrap();
    let base = ["check", "--lang", "TypeScript", "--reference", p(&src), "--reference-lang", "Python", "--header"];
    let with = |f: &Path| {
        let mut a = base.to_vec();
        a.push(p(f));
        polyscot(&a)
    };
    let o = with(&good);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = with(&renamed);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("name preservation"));
    assert_eq!(code(&polyscot(&["check", "--header", p(&src), "--lang", "Python"])), 0);
    assert_eq!(code(&polyscot(&["check"])), 2);
}
