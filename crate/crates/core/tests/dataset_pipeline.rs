use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use polyscot::agents::{AgentConfig, MockBackend};
use polyscot::dataset::*;
use polyscot::par::Exec;
use polyscot::sig_ir::LanguageId;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/seeds").join(name)
}

fn build_into(dir: &Path, exec: Exec) -> BuildOutput {
    let seeds = ingest_seed(&fixture("seeds20.jsonl")).unwrap().samples;
    let mut cfg = BuildConfig::new(AgentConfig::new(Arc::new(MockBackend::new(42))));
    cfg.exec = exec;
    let out = build_dataset(&seeds, &LanguageId::ALL, &cfg).unwrap();
    let m = manifest_for(&out, &LanguageId::ALL, seed_hash(&seeds), "test".into(), true);
    write_store(dir, &out, &m).unwrap();
    out
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn ingest_counts_and_errors() {
    assert_eq!(ingest_seed(&fixture("seeds20.jsonl")).unwrap().samples.len(), 20);
    let dup = ingest_seed(&fixture("seeds_dup.jsonl")).unwrap();
    assert_eq!((dup.samples.len(), dup.warnings.len()), (18, 2));
    match ingest_seed(&fixture("bad_schema.jsonl")).unwrap_err() {
        DatasetError::SchemaError(issues) => {
            assert_eq!(issues.len(), 1);
            assert_eq!((issues[0].line, issues[0].field.as_str()), (2, "tests"));
        }
        e => panic!("{e}"),
    }
}

#[test]
fn mock_build_matches_frozen_keep_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = build_into(dir.path(), Exec::Parallel);
    let keep: Vec<String> = fs::read_to_string(fixture("keep_set.txt"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(keep.len(), 17);
    assert_eq!(out.records.len(), 17 * 12);
    let mut kept: Vec<String> = out.records.iter().map(|r| r.task_id.clone()).collect();
    kept.dedup();
    let mut want = keep.clone();
    want.sort();
    assert_eq!(kept, want);
    assert_eq!(out.seeds, out.records.len() / 12 + out.rejects.len());
    let m = verify_manifest(dir.path()).unwrap();
    assert!(m.counts.values().all(|&c| c == 17));
    assert_eq!(m.total, 204);
}

#[test]
fn builds_are_byte_identical_across_runs_and_modes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    build_into(a.path(), Exec::Parallel);
    build_into(b.path(), Exec::Sequential);
    assert_eq!(tree_bytes(a.path()), tree_bytes(b.path()));
}

#[test]
fn export_is_stable_and_uses_the_template() {
    let dir = tempfile::tempdir().unwrap();
    build_into(dir.path(), Exec::Parallel);
    let records = load_records(dir.path()).unwrap();
    let p1 = dir.path().join("a.jsonl");
    let p2 = dir.path().join("b.jsonl");
    assert_eq!(export_instruction_jsonl(&records, &p1).unwrap(), 204);
    export_instruction_jsonl(&records, &p2).unwrap();
    let text = fs::read_to_string(&p1).unwrap();
    assert_eq!(text, fs::read_to_string(&p2).unwrap());
    assert_eq!(text.lines().count(), 204);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["language"] == "Go" {
            assert!(v["instruction"].as_str().unwrap().starts_with("You are a helpful Go code assistant."));
        }
        assert!(v["output"].as_str().unwrap().starts_with("Let's think step by step.\nInput: "));
    }
}

fn rewrite_shard(dir: &Path, lang: &str, f: impl Fn(Vec<String>) -> Vec<String>) {
    let p = dir.join("records").join(format!("{lang}.jsonl"));
    let lines: Vec<String> = fs::read_to_string(&p).unwrap().lines().map(str::to_string).collect();
    fs::write(&p, f(lines).join("\n") + "\n").unwrap();
}

#[test]
fn mutated_cot_is_named() {
    let dir = tempfile::tempdir().unwrap();
    build_into(dir.path(), Exec::Parallel);
    rewrite_shard(dir.path(), "Go", |mut lines| {
        let mut v: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
        v["cot"]["output"] = "something else".into();
        lines[0] = v.to_string();
        lines
    });
    match verify_manifest(dir.path()).unwrap_err() {
        DatasetError::IntegrityViolation(v) => {
            assert!(v.iter().any(|m| m.starts_with("seed/0: CoT differs")), "{v:?}")
        }
        e => panic!("{e}"),
    }
}

#[test]
fn missing_row_breaks_fan_out() {
    let dir = tempfile::tempdir().unwrap();
    build_into(dir.path(), Exec::Parallel);
    rewrite_shard(dir.path(), "Ruby", |lines| lines[1..].to_vec());
    match verify_manifest(dir.path()).unwrap_err() {
        DatasetError::IntegrityViolation(v) => {
            assert!(v.iter().any(|m| m.contains("fan-out incomplete, missing Ruby")), "{v:?}")
        }
        e => panic!("{e}"),
    }
}
