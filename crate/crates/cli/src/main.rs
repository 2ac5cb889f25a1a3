mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use polyscot::agents::{AgentConfig, ChatBackend, MockBackend, RemoteEndpoint};
use polyscot::analysis::{self, AnalysisError, HeatmapFormat};
use polyscot::dataset::{self, DatasetError, ExportManifest};
use polyscot::evalharness::{self as eval, AgentCots, CancelToken, CotProvider, EvalError, EvalOptions, Sandbox};
use polyscot::lora::paper_hyperparams;
use polyscot::scot::{parse_scot, validate, ScotDocument};
use polyscot::sig_ir::{parse_header, LanguageId};

use config::{BackendKind, Config};

#[derive(Parser)]
#[command(name = "polyscot", version, about = "Multi-language structured CoT dataset, evaluation and analysis tools")]
struct Cli {
    /// JSON configuration file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress at info level (RUST_LOG overrides)
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct BackendFlags {
    /// Use the deterministic offline backend (default)
    #[arg(long, conflicts_with = "live")]
    mock: bool,
    /// Use a live chat-completions endpoint; the key is read from MSCOT_API_KEY
    #[arg(long)]
    live: bool,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Filter seeds, generate CoTs and fan them out into a dataset store
    Build {
        #[arg(long)]
        seed_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendFlags,
    },
    /// Write instruction-tuning JSON Lines from a verified store
    Export {
        #[arg(long)]
        store: Option<PathBuf>,
        /// Output directory for instructions.jsonl and export_manifest.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-phase Pass@1 / CoT-Pass@1 evaluation
    Eval {
        #[arg(long)]
        bench: Option<PathBuf>,
        /// Dataset store directory or JSON map of task_id to SCoT text; omitted means generate
        #[arg(long)]
        cots: Option<PathBuf>,
        /// Output directory for report.json, report.csv and ledger.jsonl
        #[arg(long)]
        report: Option<PathBuf>,
        /// Scripted replies for the mock code model: {"task_id": {"1": code, "2": code}}
        #[arg(long)]
        code_script: Option<PathBuf>,
        /// Require all twelve languages to be scored
        #[arg(long)]
        parity: bool,
        #[command(flatten)]
        backend: BackendFlags,
    },
    /// Similarity heatmaps and human-study rubric means
    Analyze {
        #[arg(long)]
        store: Option<PathBuf>,
        /// Heatmap output; the .csv or .svg extension picks the format. Repeatable.
        #[arg(long)]
        heatmap: Vec<PathBuf>,
        #[arg(long)]
        rubric: Option<PathBuf>,
        /// Write the rubric report as JSON here
        #[arg(long)]
        rubric_out: Option<PathBuf>,
    },
    /// Validate a SCoT document or a function header
    Check {
        #[arg(long, conflicts_with = "header", required_unless_present = "header")]
        scot: Option<PathBuf>,
        #[arg(long, requires = "lang")]
        header: Option<PathBuf>,
        #[arg(long)]
        lang: Option<LanguageId>,
        /// Source header the checked one should be a translation of
        #[arg(long, requires_all = ["header", "reference_lang"])]
        reference: Option<PathBuf>,
        #[arg(long)]
        reference_lang: Option<LanguageId>,
    },
}

enum Failure {
    /// Exit 1: the inputs were understood and the result is negative.
    Domain(String),
    /// Exit 2: bad flags, config or unreadable inputs.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn domain(msg: impl Into<String>) -> Failure {
    Failure::Domain(msg.into())
}

fn require(flag: Option<PathBuf>, cfg: &Option<PathBuf>, name: &str) -> Result<PathBuf, Failure> {
    flag.or_else(|| cfg.clone()).ok_or_else(|| usage(format!("--{name} is required (or set it in the config)")))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn mkdir(path: &Path) -> Outcome {
    fs::create_dir_all(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn apply_backend(cfg: &mut Config, b: &BackendFlags) {
    if b.live {
        cfg.agents.backend = BackendKind::Live;
    } else if b.mock {
        cfg.agents.backend = BackendKind::Mock;
    }
    if let Some(e) = &b.endpoint {
        cfg.agents.endpoint = e.clone();
    }
    if let Some(m) = &b.model {
        cfg.agents.model = m.clone();
    }
}

fn live_backend(cfg: &Config) -> Result<Arc<dyn ChatBackend>, Failure> {
    let timeout = Duration::from_secs(cfg.agents.timeout_secs);
    let ep = RemoteEndpoint::from_env(&cfg.agents.endpoint, &cfg.agents.model, timeout)
        .map_err(|e| usage(format!("--live: {e}")))?;
    let ep = match &cfg.agents.transcript {
        Some(p) => ep.with_transcript(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => ep,
    };
    Ok(Arc::new(ep))
}

fn agent_config(cfg: &Config) -> Result<AgentConfig, Failure> {
    let backend: Arc<dyn ChatBackend> = match cfg.agents.backend {
        BackendKind::Mock => Arc::new(MockBackend::new(cfg.seed)),
        BackendKind::Live => live_backend(cfg)?,
    };
    let mut a = AgentConfig::new(backend);
    a.max_retries = cfg.agents.retries;
    Ok(a)
}

fn cmd_build(mut cfg: Config, seed_file: Option<PathBuf>, out: Option<PathBuf>, b: BackendFlags) -> Outcome {
    apply_backend(&mut cfg, &b);
    let seed_path = require(seed_file, &cfg.paths.seed, "seed-file")?;
    let out = require(out, &cfg.paths.store, "out")?;
    let agents = agent_config(&cfg)?;
    let ingest = dataset::ingest_seed(&seed_path).map_err(|e| match e {
        DatasetError::SchemaError(issues) => usage(
            issues
                .iter()
                .map(|i| format!("{}: line {}: {}: {}", seed_path.display(), i.line, i.field, i.reason))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        other => usage(other.to_string()),
    })?;
    for w in &ingest.warnings {
        log::warn!("{w}");
    }
    let langs = cfg.languages();
    let mut bc = dataset::BuildConfig::new(agents);
    bc.exec = cfg.exec;
    bc.max_in_flight = cfg.max_in_flight;
    let seed_hash = dataset::seed_hash(&ingest.samples);
    let (output, complete, aborted) = match dataset::build_dataset(&ingest.samples, &langs, &bc) {
        Ok(o) => (o, true, None),
        Err(DatasetError::PipelineAborted { failures, total, partial }) => {
            (*partial, false, Some(format!("aborted: {failures} of {total} seeds hit backend errors")))
        }
        Err(e) => return Err(domain(e.to_string())),
    };
    let manifest = dataset::manifest_for(&output, &langs, seed_hash, cfg.hash(), complete);
    dataset::write_store(&out, &output, &manifest).map_err(|e| usage(e.to_string()))?;
    if let Some(msg) = aborted {
        return Err(domain(format!("{msg}; partial store written to {}", out.display())));
    }
    let m = dataset::verify_manifest(&out).map_err(|e| domain(integrity(e)))?;
    println!(
        "seeds {}  kept {}  rejected {}  records {}  languages {}",
        m.seeds,
        m.seeds - m.rejected,
        m.rejected,
        m.total,
        m.languages.len()
    );
    println!("store {}", out.display());
    Ok(())
}

fn integrity(e: DatasetError) -> String {
    match e {
        DatasetError::IntegrityViolation(v) => format!("integrity violation:\n  {}", v.join("\n  ")),
        other => other.to_string(),
    }
}

fn verified_store(store: &Path) -> Result<dataset::DatasetManifest, Failure> {
    if !store.join("manifest.json").is_file() {
        return Err(usage(format!("{}: not a dataset store (no manifest.json)", store.display())));
    }
    dataset::verify_manifest(store).map_err(|e| domain(integrity(e)))
}

fn cmd_export(cfg: Config, store: Option<PathBuf>, out: Option<PathBuf>) -> Outcome {
    let store = require(store, &cfg.paths.store, "store")?;
    let out = require(out, &cfg.paths.export, "out")?;
    let manifest = verified_store(&store)?;
    let records = dataset::load_records(&store).map_err(|e| domain(integrity(e)))?;
    mkdir(&out)?;
    let rows = dataset::export_instruction_jsonl(&records, &out.join("instructions.jsonl"))
        .map_err(|e| usage(e.to_string()))?;
    let em = ExportManifest { rows, dataset: manifest, hyperparams: paper_hyperparams() };
    write(&out.join("export_manifest.json"), &(serde_json::to_string_pretty(&em).expect("serializes") + "\n"))?;
    println!("exported {rows} rows to {}", out.display());
    Ok(())
}

fn load_cots(path: &Path) -> Result<BTreeMap<String, ScotDocument>, Failure> {
    if path.is_dir() {
        verified_store(path)?;
        let records = dataset::load_records(path).map_err(|e| domain(integrity(e)))?;
        return Ok(records.into_iter().map(|r| (r.task_id, r.cot)).collect());
    }
    let raw: BTreeMap<String, String> =
        serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    raw.into_iter()
        .map(|(k, v)| parse_scot(&v).map(|d| (k.clone(), d)).map_err(|e| usage(format!("{}: {k}: {e}", path.display()))))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    mut cfg: Config,
    bench: Option<PathBuf>,
    cots: Option<PathBuf>,
    report: Option<PathBuf>,
    code_script: Option<PathBuf>,
    parity: bool,
    b: BackendFlags,
    cancel: CancelToken,
) -> Outcome {
    apply_backend(&mut cfg, &b);
    let parity = parity || cfg.parity;
    let bench = require(bench, &cfg.paths.bench, "bench")?;
    let report = require(report, &cfg.paths.reports, "report")?;
    let tasks = eval::load_bench(&bench).map_err(|e| usage(format!("{}: {e}", bench.display())))?;
    if tasks.is_empty() {
        return Err(usage(format!("{}: no benchmark tasks", bench.display())));
    }
    let code_backend: Arc<dyn ChatBackend> = match cfg.agents.backend {
        BackendKind::Live => live_backend(&cfg)?,
        BackendKind::Mock => {
            let p = code_script.or_else(|| cfg.paths.code_script.clone()).ok_or_else(|| {
                usage("mock evaluation needs --code-script (a scripted code model) or --live")
            })?;
            Arc::new(eval::ScriptedCodeBackend::from_json(&read(&p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?)
        }
    };
    let provider: Box<dyn CotProvider> = match cots.or_else(|| cfg.paths.cots.clone()) {
        Some(p) => Box::new(load_cots(&p)?),
        None => Box::new(AgentCots(agent_config(&cfg)?)),
    };
    let sandbox = Sandbox { spec: cfg.runner_spec(), cancel: cancel.clone() };
    let opts = EvalOptions { exec: cfg.exec, ..EvalOptions::default() };
    let ev = eval::cot_pass_at_1(&tasks, code_backend.as_ref(), provider.as_ref(), &sandbox, &opts)
        .map_err(|e| match e {
            EvalError::MissingCot(_) | EvalError::Backend { .. } => domain(e.to_string()),
            other => usage(other.to_string()),
        })?;
    if cancel.is_cancelled() {
        return Err(domain("interrupted; in-flight runs were stopped"));
    }
    mkdir(&report)?;
    eval::write_ledger(&report.join("ledger.jsonl"), &ev.ledger).map_err(|e| usage(e.to_string()))?;
    let r = ev.report(parity).map_err(|e| domain(e.to_string()))?;
    r.write(&report.join("report.json"), &report.join("report.csv")).map_err(|e| usage(e.to_string()))?;
    print!("{}", r.to_csv());
    println!("phase-2 generations: {}", ev.phase2_generations);
    if parity && !r.skipped_languages.is_empty() {
        let names: Vec<String> = r.skipped_languages.iter().map(|l| l.to_string()).collect();
        return Err(domain(format!("parity mode: no scored tasks for {}", names.join(", "))));
    }
    Ok(())
}

fn cmd_analyze(
    cfg: Config,
    store: Option<PathBuf>,
    heatmaps: Vec<PathBuf>,
    rubric: Option<PathBuf>,
    rubric_out: Option<PathBuf>,
    verbose: bool,
) -> Outcome {
    let store = store.or_else(|| cfg.paths.store.clone());
    let rubric = rubric.or_else(|| cfg.paths.rubric.clone());
    if store.is_none() && rubric.is_none() {
        return Err(usage("nothing to analyze: pass --store and/or --rubric"));
    }
    if !heatmaps.is_empty() && store.is_none() {
        return Err(usage("--heatmap needs --store"));
    }
    let formats = heatmaps
        .iter()
        .map(|p| match p.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(HeatmapFormat::Csv),
            Some("svg") => Ok(HeatmapFormat::Svg),
            _ => Err(usage(format!("{}: heatmap path must end in .csv or .svg", p.display()))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(store) = store {
        if !store.join("manifest.json").is_file() {
            return Err(usage(format!("{}: not a dataset store (no manifest.json)", store.display())));
        }
        let manifest = dataset::read_manifest(&store).map_err(|e| usage(e.to_string()))?;
        let records = dataset::load_records(&store).map_err(|e| usage(integrity(e)))?;
        let langs: Vec<LanguageId> = if cfg.languages.is_empty() { manifest.languages } else { cfg.languages() };
        let m = analysis::build_matrices(&records, &langs, cfg.weights, cfg.exec).map_err(|e| match e {
            AnalysisError::NoSharedTasks(..) => domain(e.to_string()),
            other => usage(other.to_string()),
        })?;
        for (p, f) in heatmaps.iter().zip(formats) {
            analysis::emit_heatmap(&m.blend, p, f).map_err(|e| usage(e.to_string()))?;
            println!("heatmap {}", p.display());
        }
        if heatmaps.is_empty() || verbose {
            print!("{}", analysis::heatmap_csv(&m.blend));
        }
        if verbose {
            println!("lexical channel");
            print!("{}", analysis::heatmap_csv(&m.lexical));
            println!("structural channel");
            print!("{}", analysis::heatmap_csv(&m.structural));
        }
    }
    if let Some(r) = rubric {
        let scores = analysis::load_rubric(&r).map_err(|e| match e {
            AnalysisError::Io { .. } => usage(e.to_string()),
            other => usage(format!("{}: {other}", r.display())),
        })?;
        let report = analysis::rubric_report(&scores).map_err(|e| usage(e.to_string()))?;
        println!("# {}", report.scale);
        let systems: Vec<&String> = report.systems.keys().collect();
        println!("Aspect,{}", systems.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","));
        type Pick = fn(&analysis::RubricMeans) -> polyscot::evalharness::Centi;
        let aspects: [(&str, Pick); 3] = [
            ("Similarity", |m| m.similarity),
            ("Naturalness", |m| m.naturalness),
            ("Educational Value", |m| m.educational_value),
        ];
        for (name, pick) in aspects {
            let cells: Vec<String> = systems.iter().map(|s| pick(&report.systems[*s]).to_string()).collect();
            println!("{name},{}", cells.join(","));
        }
        if let Some(out) = rubric_out {
            write(&out, &(serde_json::to_string_pretty(&report).expect("serializes") + "\n"))?;
        }
    }
    Ok(())
}

fn cmd_check(
    scot: Option<PathBuf>,
    header: Option<PathBuf>,
    lang: Option<LanguageId>,
    reference: Option<PathBuf>,
    reference_lang: Option<LanguageId>,
) -> Outcome {
    if let Some(p) = scot {
        let doc = parse_scot(&read(&p)?).map_err(|e| domain(format!("{}: {e}", p.display())))?;
        let v = validate(&doc);
        if !v.is_empty() {
            let lines: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            return Err(domain(format!("{}:\n  {}", p.display(), lines.join("\n  "))));
        }
        println!("{}: ok", p.display());
        return Ok(());
    }
    let (Some(p), Some(lang)) = (header, lang) else {
        return Err(usage("pass --scot FILE or --header FILE --lang LANG"));
    };
    let text = read(&p)?;
    match (reference, reference_lang) {
        (Some(r), Some(rl)) => {
            let src = parse_header(rl, &read(&r)?).map_err(|e| usage(format!("{}: {e}", r.display())))?;
            polyscot::agents::translation_report(&src, lang, &text)
                .map_err(|v| domain(format!("{}:\n  {}", p.display(), v.join("\n  "))))?;
        }
        _ => {
            parse_header(lang, &text).map_err(|e| domain(format!("{}: {e}", p.display())))?;
        }
    }
    println!("{}: ok", p.display());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let cfg = Config::load(cli.config.as_deref()).map_err(Failure::Usage)?;
    match cli.cmd {
        Cmd::Build { seed_file, out, backend } => cmd_build(cfg, seed_file, out, backend),
        Cmd::Export { store, out } => cmd_export(cfg, store, out),
        Cmd::Eval { bench, cots, report, code_script, parity, backend } => {
            let cancel = CancelToken::default();
            let c = cancel.clone();
            // first Ctrl-C stops sandboxed runs and lets the harness drain; a second one exits
            let installed = ctrlc::set_handler(move || {
                if c.is_cancelled() {
                    std::process::exit(130);
                }
                eprintln!("interrupt: stopping in-flight runs");
                c.cancel();
            });
            if let Err(e) = installed {
                log::warn!("could not install Ctrl-C handler: {e}");
            }
            cmd_eval(cfg, bench, cots, report, code_script, parity, backend, cancel)
        }
        Cmd::Analyze { store, heatmap, rubric, rubric_out } => {
            cmd_analyze(cfg, store, heatmap, rubric, rubric_out, cli.verbose)
        }
        Cmd::Check { scot, header, lang, reference, reference_lang } => {
            cmd_check(scot, header, lang, reference, reference_lang)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
