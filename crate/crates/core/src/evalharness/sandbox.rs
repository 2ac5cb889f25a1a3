//! Run one candidate program in a throwaway directory as its own process group.

use std::collections::BTreeMap;
use std::io::Read;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::sig_ir::LanguageId;

pub const OUTPUT_CAP: usize = 64 * 1024;
pub const ENV_ALLOWLIST: [&str; 3] = ["PATH", "HOME", "TMPDIR"];
const POLL: Duration = Duration::from_millis(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
    Timeout,
    CompileError,
    RuntimeError,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: Status,
    pub duration_ms: u64,
    pub stdout: String,
    pub stderr: String,
}

impl RunResult {
    pub fn skipped(reason: impl Into<String>) -> Self {
        RunResult { status: Status::Skipped, duration_ms: 0, stdout: String::new(), stderr: reason.into() }
    }
}

/// Commands are argv lists; `{src}`, `{bin}` and `{dir}` are substituted in every element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangRunner {
    pub file: String,
    #[serde(default)]
    pub compile: Option<Vec<String>>,
    pub run: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Exit codes that mean "tests failed"; any other non-zero exit is a runtime error.
    #[serde(default = "default_fail_codes")]
    pub fail_exit_codes: Vec<i32>,
}

fn default_timeout() -> f64 {
    30.0
}

fn default_fail_codes() -> Vec<i32> {
    vec![1]
}

fn argv(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl LangRunner {
    pub fn new(file: &str, compile: Option<&[&str]>, run: &[&str]) -> Self {
        LangRunner {
            file: file.into(),
            compile: compile.map(argv),
            run: argv(run),
            timeout_secs: default_timeout(),
            fail_exit_codes: default_fail_codes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunnerSpec {
    pub runners: BTreeMap<LanguageId, LangRunner>,
}

impl Default for RunnerSpec {
    fn default() -> Self {
        use LanguageId as L;
        let r = LangRunner::new;
        let runners = BTreeMap::from([
            (L::Python, r("main.py", None, &["python3", "{src}"])),
            (L::JavaScript, r("main.js", None, &["node", "{src}"])),
            (
                L::TypeScript,
                r(
                    "main.ts",
                    Some(&["tsc", "--target", "es2020", "--lib", "es2020,dom", "--outDir", "{dir}", "{src}"]),
                    &["node", "{dir}/main.js"],
                ),
            ),
            (L::Perl, r("main.pl", None, &["perl", "{src}"])),
            (L::Ruby, r("main.rb", None, &["ruby", "{src}"])),
            (L::PHP, r("main.php", None, &["php", "{src}"])),
            (L::Go, r("main.go", Some(&["go", "build", "-o", "{bin}", "{src}"]), &["{bin}"])),
            (L::Java, r("Main.java", Some(&["javac", "-d", "{dir}", "{src}"]), &["java", "-cp", "{dir}", "Main"])),
            (
                L::Kotlin,
                r("main.kt", Some(&["kotlinc", "{src}", "-include-runtime", "-d", "{bin}.jar"]), &["java", "-jar", "{bin}.jar"]),
            ),
            (L::Scala, r("main.scala", None, &["scala-cli", "run", "{src}"])),
            (L::Swift, r("main.swift", Some(&["swiftc", "-o", "{bin}", "{src}"]), &["{bin}"])),
            (L::CSharp, r("main.csx", None, &["dotnet-script", "{src}"])),
        ]);
        RunnerSpec { runners }
    }
}

/// Shared flag that stops in-flight runs; set from a Ctrl-C handler.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }
    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

fn find_on_path(prog: &str) -> bool {
    if prog.contains('/') {
        return Path::new(prog).is_file();
    }
    std::env::var_os("PATH")
        .map(|p| std::env::split_paths(&p).any(|d| d.join(prog).is_file()))
        .unwrap_or(false)
}

/// Names of the external programs a runner needs that are missing from PATH.
pub fn missing_tools(r: &LangRunner) -> Vec<String> {
    r.compile
        .iter()
        .chain(std::iter::once(&r.run))
        .filter_map(|c| c.first())
        .filter(|p| !p.contains('{') && !find_on_path(p))
        .cloned()
        .collect()
}

fn substitute(cmd: &[String], src: &Path, bin: &Path, dir: &Path) -> Vec<String> {
    cmd.iter()
        .map(|a| {
            a.replace("{src}", &src.display().to_string())
                .replace("{bin}", &bin.display().to_string())
                .replace("{dir}", &dir.display().to_string())
        })
        .collect()
}

fn capture(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut buf = [0u8; 8192];
        loop {
            match r.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = OUTPUT_CAP.saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        String::from_utf8_lossy(&kept).into_owned()
    })
}

fn kill_group(child: &Child) {
    // SAFETY: killpg only sends a signal; the group id is our own child's pid.
    unsafe {
        libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
    }
}

enum Exit {
    Code(i32),
    Signal,
    Timeout,
    Cancelled,
    SpawnFailed(String),
}

struct Outcome {
    exit: Exit,
    stdout: String,
    stderr: String,
}

fn run_process(cmd: &[String], dir: &Path, limit: Duration, cancel: &CancelToken) -> Outcome {
    let mut c = Command::new(&cmd[0]);
    c.args(&cmd[1..])
        .current_dir(dir)
        .env_clear()
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);
    for k in ENV_ALLOWLIST {
        if let Some(v) = std::env::var_os(k) {
            c.env(k, v);
        }
    }
    let mut child = match c.spawn() {
        Ok(ch) => ch,
        Err(e) => return Outcome { exit: Exit::SpawnFailed(e.to_string()), stdout: String::new(), stderr: String::new() },
    };
    let out = capture(child.stdout.take().expect("stdout is piped"));
    let err = capture(child.stderr.take().expect("stderr is piped"));
    let start = Instant::now();
    let exit = loop {
        match child.try_wait() {
            Ok(Some(st)) => break st.code().map(Exit::Code).unwrap_or(Exit::Signal),
            Ok(None) => {}
            Err(e) => break Exit::SpawnFailed(e.to_string()),
        }
        if cancel.is_cancelled() {
            kill_group(&child);
            let _ = child.wait();
            break Exit::Cancelled;
        }
        if start.elapsed() >= limit {
            kill_group(&child);
            let _ = child.wait();
            break Exit::Timeout;
        }
        thread::sleep(POLL);
    };
    // Reap anything the program left behind in its group.
    kill_group(&child);
    Outcome { exit, stdout: out.join().unwrap_or_default(), stderr: err.join().unwrap_or_default() }
}

pub fn run_candidate(lang: LanguageId, code: &str, tests: &str, spec: &RunnerSpec, cancel: &CancelToken) -> RunResult {
    let Some(r) = spec.runners.get(&lang) else {
        return RunResult::skipped(format!("no runner configured for {lang}"));
    };
    let missing = missing_tools(r);
    if !missing.is_empty() {
        return RunResult::skipped(format!("toolchain not found: {}", missing.join(", ")));
    }
    if cancel.is_cancelled() {
        return RunResult::skipped("cancelled");
    }
    let tmp = match tempfile::Builder::new().prefix("polyscot-run-").tempdir() {
        Ok(t) => t,
        Err(e) => return RunResult { status: Status::RuntimeError, duration_ms: 0, stdout: String::new(), stderr: e.to_string() },
    };
    let dir = tmp.path().to_path_buf();
    let src = dir.join(&r.file);
    let bin: PathBuf = dir.join("main.bin");
    let start = Instant::now();
    let limit = Duration::from_secs_f64(r.timeout_secs);
    let finish = |status, o: Outcome| RunResult {
        status,
        duration_ms: start.elapsed().as_millis() as u64,
        stdout: o.stdout,
        stderr: o.stderr,
    };
    if let Err(e) = std::fs::write(&src, format!("{code}\n{tests}\n")) {
        return RunResult { status: Status::RuntimeError, duration_ms: 0, stdout: String::new(), stderr: e.to_string() };
    }
    if let Some(compile) = &r.compile {
        let o = run_process(&substitute(compile, &src, &bin, &dir), &dir, limit, cancel);
        match o.exit {
            Exit::Code(0) => {}
            Exit::Timeout => return finish(Status::Timeout, o),
            Exit::Cancelled => return RunResult::skipped("cancelled"),
            Exit::SpawnFailed(ref e) => {
                let e = e.clone();
                return RunResult { stderr: e, ..finish(Status::CompileError, o) };
            }
            _ => return finish(Status::CompileError, o),
        }
    }
    let remaining = limit.saturating_sub(start.elapsed());
    let o = run_process(&substitute(&r.run, &src, &bin, &dir), &dir, remaining, cancel);
    let status = match o.exit {
        Exit::Code(0) => Status::Pass,
        Exit::Code(c) if r.fail_exit_codes.contains(&c) => Status::Fail,
        Exit::Code(_) | Exit::Signal | Exit::SpawnFailed(_) => Status::RuntimeError,
        Exit::Timeout => Status::Timeout,
        Exit::Cancelled => return RunResult::skipped("cancelled"),
    };
    let res = finish(status, o);
    drop(tmp);
    res
}
