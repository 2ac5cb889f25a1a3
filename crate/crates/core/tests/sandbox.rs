use std::path::Path;
use std::time::{Duration, Instant};

use polyscot::evalharness::*;
use polyscot::sig_ir::LanguageId;

fn spec_with_timeout(secs: f64) -> RunnerSpec {
    let mut s = RunnerSpec::default();
    for r in s.runners.values_mut() {
        r.timeout_secs = secs;
    }
    s
}

fn available(lang: LanguageId) -> bool {
    missing_tools(&RunnerSpec::default().runners[&lang]).is_empty()
}

fn run(lang: LanguageId, code: &str, spec: &RunnerSpec) -> Option<RunResult> {
    if !available(lang) {
        eprintln!("{lang}: toolchain missing, skipped");
        return None;
    }
    Some(run_candidate(lang, code, "", spec, &CancelToken::new()))
}

fn process_gone(pid: u32) -> bool {
    match std::fs::read_to_string(format!("/proc/{pid}/stat")) {
        Err(_) => true,
        // a reparented child may linger as a zombie if PID 1 does not reap
        Ok(stat) => stat.rsplit(')').next().unwrap().trim_start().starts_with('Z'),
    }
}

#[test]
fn trivially_true_programs_pass() {
    let s = RunnerSpec::default();
    let cases = [
        (LanguageId::Python, "assert True"),
        (LanguageId::JavaScript, "if (1 !== 1) throw new Error('x');"),
        (LanguageId::Perl, "die unless 1;"),
        (LanguageId::TypeScript, "const x: number = 1; if (x !== 1) { throw new Error('x'); }"),
    ];
    for (lang, code) in cases {
        if let Some(r) = run(lang, code, &s) {
            assert_eq!(r.status, Status::Pass, "{lang}: {}", r.stderr);
        }
    }
}

#[test]
fn failing_assertion_is_fail() {
    if let Some(r) = run(LanguageId::Python, "assert 1 == 2", &RunnerSpec::default()) {
        assert_eq!(r.status, Status::Fail);
        assert!(r.stderr.contains("AssertionError"));
    }
}

#[test]
fn abnormal_exit_is_runtime_error() {
    if let Some(r) = run(LanguageId::Python, "import os\nos.kill(os.getpid(), 9)", &RunnerSpec::default()) {
        assert_eq!(r.status, Status::RuntimeError);
    }
}

#[test]
fn broken_compiled_program_is_compile_error() {
    if let Some(r) = run(LanguageId::TypeScript, "const x: number = ;", &RunnerSpec::default()) {
        assert_eq!(r.status, Status::CompileError);
    }
}

#[test]
fn infinite_loops_time_out_and_leave_nothing_behind() {
    let spec = spec_with_timeout(1.0);
    let programs = [
        (
            LanguageId::Python,
            "import os, subprocess, sys\np = subprocess.Popen(['sleep', '300'])\nprint(os.getcwd(), p.pid, flush=True)\nwhile True:\n    pass",
        ),
        (
            LanguageId::JavaScript,
            "const cp = require('child_process');\nconst p = cp.spawn('sleep', ['300']);\nconsole.log(process.cwd(), p.pid);\nwhile (true) {}",
        ),
        (
            LanguageId::Perl,
            "use Cwd;\n$| = 1;\nmy $pid = fork();\nif ($pid == 0) { exec('sleep', '300'); }\nprint getcwd(), ' ', $pid, \"\\n\";\nwhile (1) {}",
        ),
    ];
    let mut checked = 0;
    for (lang, code) in programs {
        let start = Instant::now();
        let Some(r) = run(lang, code, &spec) else { continue };
        let wall = start.elapsed();
        assert_eq!(r.status, Status::Timeout, "{lang}: {}", r.stderr);
        assert!(r.duration_ms >= 1000, "{lang}: {}", r.duration_ms);
        assert!(wall <= Duration::from_secs(3), "{lang}: {wall:?}");
        let mut parts = r.stdout.split_whitespace();
        let dir = parts.next().expect("program printed its cwd");
        let pid: u32 = parts.next().unwrap().parse().unwrap();
        assert!(!Path::new(dir).exists(), "{lang}: temp dir {dir} survived");
        let deadline = Instant::now() + Duration::from_secs(2);
        while !process_gone(pid) && Instant::now() < deadline {
            std::thread::sleep(Duration::from_millis(20));
        }
        assert!(process_gone(pid), "{lang}: grandchild {pid} survived");
        checked += 1;
    }
    eprintln!("timeout hygiene checked on {checked} runtimes");
}

#[test]
fn environment_is_allowlisted() {
    std::env::set_var("POLYSCOT_SECRET_PROBE", "leak");
    let code = "import os\nassert 'POLYSCOT_SECRET_PROBE' not in os.environ\nassert set(os.environ) <= {'PATH', 'HOME', 'TMPDIR', 'LC_CTYPE'}";
    if let Some(r) = run(LanguageId::Python, code, &RunnerSpec::default()) {
        assert_eq!(r.status, Status::Pass, "{}", r.stderr);
    }
}

#[test]
fn output_is_capped() {
    if let Some(r) = run(LanguageId::Python, "import sys\nsys.stdout.write('x' * 200000)", &RunnerSpec::default()) {
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.stdout.len(), OUTPUT_CAP);
    }
}

#[test]
fn missing_toolchain_or_runner_is_skipped() {
    let mut spec = RunnerSpec::default();
    spec.runners.get_mut(&LanguageId::Swift).unwrap().run = vec!["definitely-not-a-tool-xyz".into()];
    spec.runners.get_mut(&LanguageId::Swift).unwrap().compile = None;
    let r = run_candidate(LanguageId::Swift, "", "", &spec, &CancelToken::new());
    assert_eq!(r.status, Status::Skipped);
    spec.runners.remove(&LanguageId::Go);
    assert_eq!(run_candidate(LanguageId::Go, "", "", &spec, &CancelToken::new()).status, Status::Skipped);
}

#[test]
fn cancellation_stops_a_run() {
    if !available(LanguageId::Python) {
        return;
    }
    let spec = spec_with_timeout(30.0);
    let token = CancelToken::new();
    let t2 = token.clone();
    let h = std::thread::spawn(move || {
        std::thread::sleep(Duration::from_millis(300));
        t2.cancel();
    });
    let start = Instant::now();
    let r = run_candidate(LanguageId::Python, "while True:\n    pass", "", &spec, &token);
    h.join().unwrap();
    assert_eq!(r.status, Status::Skipped);
    assert!(start.elapsed() < Duration::from_secs(5));
}
