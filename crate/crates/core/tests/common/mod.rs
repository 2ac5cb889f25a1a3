//! Independent oracles shared by integration tests.
#![allow(dead_code)]

/// Numeric rank by Gaussian elimination with partial pivoting.
pub fn rank(rows: usize, cols: usize, data: &[f64], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = data.chunks(cols).map(|r| r.to_vec()).collect();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (p, best) = (rank..rows)
            .map(|i| (i, m[i][c].abs()))
            .fold((rank, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[c] / pivot[c];
            for (x, p) in row.iter_mut().zip(&pivot).skip(c) {
                *x -= f * p;
            }
        }
        rank += 1;
    }
    rank
}

/// Plain triple-loop product, kept separate from the library's matmul.
pub fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            out[i * m + j] = (0..k).map(|p| a[i * k + p] * b[p * m + j]).sum();
        }
    }
    out
}

/// Parse a decimal string like "52.92" or "-3.5" into integer hundredths.
pub fn cents(s: &str) -> i64 {
    let s = s.trim().trim_start_matches('+');
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let frac = format!("{frac:0<2}");
    assert!(frac.len() == 2, "more than two decimals: {s}");
    let v = int.parse::<i64>().unwrap() * 100 + frac.parse::<i64>().unwrap();
    if neg { -v } else { v }
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

use polyscot::evalharness::{BenchTask, Executor, RunResult, Status};
use polyscot::sig_ir::LanguageId;

/// Decides outcomes from the code text alone: "PASS" passes, anything else fails.
pub struct StubExecutor;

impl Executor for StubExecutor {
    fn execute(&self, _task: &BenchTask, code: &str) -> RunResult {
        let status = if code.trim() == "PASS" { Status::Pass } else { Status::Fail };
        RunResult { status, duration_ms: 0, stdout: String::new(), stderr: String::new() }
    }
}

pub fn stub_tasks(n: usize) -> Vec<BenchTask> {
    (1..=n)
        .map(|i| BenchTask {
            task_id: format!("task/{i}"),
            language: LanguageId::ALL[i % 12],
            prompt: format!("def f{i}():"),
            tests: format!("f{i}"),
            entry_point: format!("f{i}"),
        })
        .collect()
}

pub fn python3_available() -> bool {
    std::process::Command::new("python3").arg("--version").output().is_ok()
}
