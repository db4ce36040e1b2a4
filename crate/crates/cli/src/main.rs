mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rulesmith::agents::golden::ground_truth_script;
use rulesmith::agents::{text_samples, to_jsonl, AgentConfig, Agents, PipelineError, Transcript};
use rulesmith::datagen::{generate, Dataset, GenConfig, Split, Task};
use rulesmith::eval::{
    reports_csv, run_llm, run_symbolic, sweep, write_reports, Axis, EvalReport, ExperimentConfig,
    Mode, RunResult,
};
use rulesmith::ilp::{LearnError, Learner, SearchBudget};
use rulesmith::llm::{backend_from_config, BackendConfig, LlmBackend, LlmError};
use rulesmith::logic::{parse_bias, parse_facts, FactBase, LogicError};

use config::{expand_config, Echo};

#[derive(Parser)]
#[command(
    name = "rulesmith",
    version,
    about = "Generate rule-learning tasks, learn rules from text with LLM agents and an MDL rule learner, and evaluate them"
)]
struct Cli {
    /// File of `key = value` lines used for flags not given on the command line.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with its ground-truth encodings.
    Generate(GenerateArgs),
    /// Learn a program from bias, background and example files.
    Learn(LearnArgs),
    /// Translate a dataset's texts into facts with a given bias.
    Translate(TranslateArgs),
    /// Run the agent pipeline (or the symbolic baseline) on a dataset and score it.
    Pipeline(PipelineArgs),
    /// Run experiments over values of one dataset variable.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    /// shoes or zendo.
    #[arg(long)]
    task: Option<Task>,
    /// Rule number.
    #[arg(long)]
    rules: Option<usize>,
    /// Number of text templates.
    #[arg(long)]
    templates: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    pos_ratio: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl GenArgs {
    fn resolve(&self, echo: &mut Echo) -> GenConfig {
        let d = GenConfig::default();
        let c = GenConfig {
            task: self.task.unwrap_or(d.task),
            rule_num: self.rules.unwrap_or(d.rule_num),
            template_num: self.templates.unwrap_or(d.template_num),
            sample_size: self.samples.unwrap_or(d.sample_size),
            positive_ratio: self.pos_ratio.unwrap_or(d.positive_ratio),
            noise_ratio: self.noise.unwrap_or(d.noise_ratio),
            seed: self.seed.unwrap_or(d.seed),
        };
        echo.set("task", c.task);
        echo.set("rules", c.rule_num);
        echo.set("templates", c.template_num);
        echo.set("samples", c.sample_size);
        echo.set("pos-ratio", c.positive_ratio);
        echo.set("noise", c.noise_ratio);
        echo.set("seed", c.seed);
        c
    }
}

#[derive(Args)]
struct BudgetArgs {
    /// Search time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    max_candidates: Option<usize>,
    /// Candidate pools at most this large are searched exactly.
    #[arg(long)]
    exact_threshold: Option<usize>,
}

impl BudgetArgs {
    fn resolve(&self, echo: &mut Echo) -> Result<SearchBudget, Failure> {
        let d = SearchBudget::default();
        let b = SearchBudget {
            time_limit: seconds(self.time_limit, d.time_limit, "time-limit")?,
            max_candidates: self.max_candidates.unwrap_or(d.max_candidates),
            exact_threshold: self.exact_threshold.unwrap_or(d.exact_threshold),
        };
        echo.set("time-limit", b.time_limit.as_secs_f64());
        echo.set("max-candidates", b.max_candidates);
        echo.set("exact-threshold", b.exact_threshold);
        Ok(b)
    }
}

#[derive(Args)]
struct BackendArgs {
    /// Answer LLM calls from a JSON script instead of a live endpoint.
    #[arg(long, value_name = "PATH", conflicts_with = "endpoint")]
    scripted: Option<PathBuf>,
    /// Base URL of an OpenAI-compatible chat completions API.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    /// Per-request timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    max_retries: Option<u32>,
    /// Samples per translation request.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Actor/Critic rounds per bias.
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl BackendArgs {
    fn backend(&self, echo: &mut Echo) -> Result<Option<BackendConfig>, Failure> {
        let mut cfg = match (&self.scripted, &self.endpoint) {
            (Some(p), _) => BackendConfig::scripted(p),
            (None, Some(e)) => BackendConfig::http(e.clone()),
            (None, None) => return Ok(None),
        };
        if let Some(env) = &self.api_key_env {
            cfg.api_key_env = env.clone();
        }
        cfg.timeout = seconds(self.timeout, cfg.timeout, "timeout")?;
        if let Some(n) = self.max_retries {
            cfg.max_retries = n;
        }
        echo.set_opt("scripted", cfg.script_path.as_ref().map(|p| p.display()));
        echo.set_opt("endpoint", cfg.endpoint.as_ref());
        if cfg.endpoint.is_some() {
            echo.set("api-key-env", &cfg.api_key_env);
            echo.set("timeout", cfg.timeout.as_secs_f64());
            echo.set("max-retries", cfg.max_retries);
        }
        Ok(Some(cfg))
    }

    fn agents(&self, budget: SearchBudget, echo: &mut Echo) -> AgentConfig {
        let d = AgentConfig::default();
        let c = AgentConfig {
            model: self.model.clone().unwrap_or(d.model),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            budget,
            ..AgentConfig::default()
        };
        echo.set("model", &c.model);
        echo.set("batch-size", c.batch_size);
        echo.set("max-iterations", c.max_iterations);
        c
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    gen: GenArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write golden_script.json, a script that plays the agents with
    /// ground-truth answers.
    #[arg(long)]
    golden_script: bool,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    bias: Option<PathBuf>,
    #[arg(long)]
    bk: Option<PathBuf>,
    #[arg(long)]
    exs: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Train,
    Test,
    All,
}

impl SplitArg {
    fn name(self) -> &'static str {
        match self {
            SplitArg::Train => "train",
            SplitArg::Test => "test",
            SplitArg::All => "all",
        }
    }
}

#[derive(Args)]
struct TranslateArgs {
    /// dataset.jsonl, or a directory holding it; config.json must sit next to it.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    bias: Option<PathBuf>,
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    #[command(flatten)]
    backend: BackendArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// dataset.jsonl, or a directory holding it; config.json must sit next to it.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Learn from ground-truth encodings without any LLM.
    #[arg(long, conflicts_with_all = ["scripted", "endpoint"])]
    symbolic_only: bool,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// rule_num, template_num, sample_size, positive_ratio or noise_ratio
    /// (or the matching flag name).
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[command(flatten)]
    gen: GenArgs,
    /// Seeds per value, counting up from --seed.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, conflicts_with_all = ["scripted", "endpoint"])]
    symbolic_only: bool,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Why a command stopped, and its exit code.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Failed(anyhow::Error),
    Backend(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Failed(_) => 2,
            Failure::Backend(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<LlmError> for Failure {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::InvalidConfig(_) => Failure::Usage(e.into()),
            _ => Failure::Backend(e.into()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Llm(e) => e.into(),
            PipelineError::InvalidInput(_) => Failure::Usage(e.into()),
            _ => Failure::Failed(e.into()),
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn seconds(v: Option<f64>, default: Duration, name: &str) -> Result<Duration, Failure> {
    match v {
        None => Ok(default),
        Some(s) => Duration::try_from_secs_f64(s)
            .map_err(|_| usage(format!("--{name} must be a non-negative number of seconds"))),
    }
}

fn out_dir(arg: &Option<PathBuf>, echo: &mut Echo) -> PathBuf {
    let dir = arg.clone().unwrap_or_else(|| PathBuf::from("out"));
    echo.set("out-dir", dir.display());
    dir
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?)
}

fn in_file(path: &Path, e: LogicError) -> Failure {
    usage(format!("{}: {e}", path.display()))
}

/// Loads a dataset from `dataset.jsonl` (or a directory holding it) and the
/// `config.json` beside it.
fn load_dataset(path: &Path) -> Result<Dataset, Failure> {
    let (dir, file) = if path.is_dir() {
        (path.to_path_buf(), path.join("dataset.jsonl"))
    } else {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (dir, path.to_path_buf())
    };
    let cfg_path = dir.join("config.json");
    let cfg: GenConfig = serde_json::from_str(&read(&cfg_path)?)
        .with_context(|| format!("{}: not a dataset config", cfg_path.display()))?;
    Dataset::from_jsonl(cfg, &read(&file)?)
        .with_context(|| format!("{}: not a dataset", file.display()))
        .map_err(Failure::Usage)
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    v.as_ref()
        .ok_or_else(|| usage(format!("--{flag} is required")))
}

fn cmd_generate(a: &GenerateArgs, echo: &mut Echo) -> Result<(), Failure> {
    let cfg = a.gen.resolve(echo);
    let dir = out_dir(&a.out_dir, echo);
    echo.set("golden-script", a.golden_script);
    print!("{}", echo.render("generate"));
    let ds = generate(&cfg).map_err(usage)?;
    ds.write_to(&dir)
        .with_context(|| format!("cannot write dataset to {}", dir.display()))?;
    if a.golden_script {
        let script = ground_truth_script(&ds, AgentConfig::default().batch_size);
        write(
            &dir.join("golden_script.json"),
            serde_json::to_string_pretty(&script).context("script")?,
        )?;
    }
    let positives = ds.samples.iter().filter(|s| s.clean_label).count();
    let flipped = ds.samples.iter().filter(|s| s.noise_flag).count();
    println!(
        "samples: {} (train {}, test {})",
        ds.samples.len(),
        ds.train().count(),
        ds.test().count()
    );
    println!("positives: {positives}");
    println!("negatives: {}", ds.samples.len() - positives);
    println!("flipped labels: {flipped}");
    println!("wrote {}", dir.display());
    Ok(())
}

fn cost_json(
    h: &rulesmith::ilp::Hypothesis,
    facts: &FactBase,
    ms: u64,
    reason: Option<&str>,
) -> String {
    serde_json::to_string_pretty(&json!({
        "cost": h.cost,
        "size": h.size,
        "fp": h.fp,
        "fn": h.fn_,
        "optimal": h.optimal,
        "n_pos": facts.pos.len(),
        "n_neg": facts.neg.len(),
        "failed": reason.is_some(),
        "reason": reason,
        "runtime_ms": ms,
    }))
    .expect("json value serializes")
}

fn cmd_learn(a: &LearnArgs, echo: &mut Echo) -> Result<(), Failure> {
    let bias_path = a.bias.clone().unwrap_or_else(|| "bias.pl".into());
    let bk_path = a.bk.clone().unwrap_or_else(|| "bk.pl".into());
    let exs_path = a.exs.clone().unwrap_or_else(|| "exs.pl".into());
    echo.set("bias", bias_path.display());
    echo.set("bk", bk_path.display());
    echo.set("exs", exs_path.display());
    let budget = a.budget.resolve(echo)?;
    let dir = out_dir(&a.out_dir, echo);
    print!("{}", echo.render("learn"));

    let bias = parse_bias(&read(&bias_path)?).map_err(|e| in_file(&bias_path, e))?;
    let mut facts = parse_facts(&read(&bk_path)?, Some(&bias)).map_err(|e| in_file(&bk_path, e))?;
    let exs = parse_facts(&read(&exs_path)?, Some(&bias)).map_err(|e| in_file(&exs_path, e))?;
    facts.merge(&exs).map_err(|e| in_file(&exs_path, e))?;

    let start = Instant::now();
    let result = Learner::new(budget).learn(&bias, &facts);
    let ms = start.elapsed().as_millis() as u64;
    match result {
        Ok(h) => {
            write(&dir.join("program.pl"), h.program.to_string())?;
            write(&dir.join("cost.json"), cost_json(&h, &facts, ms, None))?;
            print!("{}", h.program);
            println!(
                "cost {} (size {}, fp {}, fn {}){}",
                h.cost,
                h.size,
                h.fp,
                h.fn_,
                if h.optimal { ", optimal" } else { "" }
            );
            Ok(())
        }
        Err(LearnError::Failed { reason, hypothesis }) => {
            write(&dir.join("program.pl"), hypothesis.program.to_string())?;
            write(
                &dir.join("cost.json"),
                cost_json(&hypothesis, &facts, ms, Some(&reason)),
            )?;
            Err(Failure::Failed(anyhow!("rule search failed: {reason}")))
        }
        Err(e) => Err(Failure::Failed(e.into())),
    }
}

fn open_backend(cfg: Option<BackendConfig>, choices: &str) -> Result<Arc<dyn LlmBackend>, Failure> {
    let cfg = cfg.ok_or_else(|| usage(format!("no backend: pass {choices}")))?;
    Ok(backend_from_config(&cfg)?)
}

fn cmd_translate(a: &TranslateArgs, echo: &mut Echo) -> Result<(), Failure> {
    let dataset_path = required(&a.dataset, "dataset")?;
    let bias_path = required(&a.bias, "bias")?;
    let split = a.split.unwrap_or(SplitArg::Train);
    echo.set("dataset", dataset_path.display());
    echo.set("bias", bias_path.display());
    echo.set("split", split.name());
    let backend_cfg = a.backend.backend(echo)?;
    let agent_cfg = a.backend.agents(SearchBudget::default(), echo);
    let dir = out_dir(&a.out_dir, echo);
    print!("{}", echo.render("translate"));

    let ds = load_dataset(dataset_path)?;
    let bias = parse_bias(&read(bias_path)?).map_err(|e| in_file(bias_path, e))?;
    let backend = open_backend(backend_cfg, "--endpoint or --scripted")?;
    let picked = ds.samples.iter().filter(|s| match split {
        SplitArg::Train => s.split == Split::Train,
        SplitArg::Test => s.split == Split::Test,
        SplitArg::All => true,
    });
    let samples = text_samples(picked, true);
    let transcript = Transcript::new();
    let result =
        Agents::new(backend.as_ref(), &agent_cfg, &transcript).translate_all(&samples, &bias);
    write(
        &dir.join("transcript.jsonl"),
        to_jsonl(&transcript.records()),
    )?;
    let translation = result?;
    let facts = translation.facts();
    write(&dir.join("bk.pl"), facts.render_background())?;
    write(&dir.join("exs.pl"), facts.render_examples())?;
    for w in &translation.warnings {
        log::warn!("{w}");
    }
    println!(
        "translated {} of {} samples ({} facts); dropped {}",
        translation.per_sample.len(),
        samples.len(),
        facts.background.len(),
        translation.dropped.len()
    );
    println!("wrote {}", dir.display());
    Ok(())
}

fn print_run(r: &RunResult) {
    if r.failed {
        println!("failed: {}", r.error.as_deref().unwrap_or("unknown error"));
        return;
    }
    print!("{}", r.hypothesis_text);
    println!("acc {:.4} f1 {:.4}", r.acc, r.f1);
}

fn cmd_pipeline(a: &PipelineArgs, echo: &mut Echo) -> Result<(), Failure> {
    let dataset_path = required(&a.dataset, "dataset")?;
    echo.set("dataset", dataset_path.display());
    echo.set("symbolic-only", a.symbolic_only);
    let budget = a.budget.resolve(echo)?;
    let backend_cfg = if a.symbolic_only {
        None
    } else {
        a.backend.backend(echo)?
    };
    let agent_cfg = a.backend.agents(budget.clone(), echo);
    let dir = out_dir(&a.out_dir, echo);
    print!("{}", echo.render("pipeline"));

    let ds = load_dataset(dataset_path)?;
    let report = |r: RunResult, mode| EvalReport::new(ds.config.clone(), mode, vec![r]);
    if a.symbolic_only {
        let r = run_symbolic(&ds, &budget);
        write(&dir.join("program.pl"), &r.hypothesis_text)?;
        print_run(&r);
        let failed = r.error.clone();
        write_reports(&[report(r, Mode::Symbolic)], &dir).context("report")?;
        println!("wrote {}", dir.display());
        return match failed {
            Some(e) => Err(Failure::Failed(anyhow!(e))),
            None => Ok(()),
        };
    }

    let backend = open_backend(backend_cfg, "--endpoint, --scripted or --symbolic-only")?;
    let transcript = Transcript::new();
    let start = Instant::now();
    let outcome = run_llm(&ds, backend.as_ref(), &agent_cfg, &transcript);
    write(
        &dir.join("transcript.jsonl"),
        to_jsonl(&transcript.records()),
    )?;
    let (r, err) = match outcome {
        Ok((r, run)) => {
            write(&dir.join("bias.pl"), &run.bias_text)?;
            for w in &run.warnings {
                log::warn!("{w}");
            }
            (r, None)
        }
        Err(e) => (
            RunResult::failed(
                ds.config.seed,
                e.to_string(),
                start.elapsed().as_millis() as u64,
            ),
            Some(e),
        ),
    };
    write(&dir.join("program.pl"), &r.hypothesis_text)?;
    print_run(&r);
    write_reports(&[report(r, Mode::Llm)], &dir).context("report")?;
    println!("wrote {}", dir.display());
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn cmd_sweep(a: &SweepArgs, echo: &mut Echo) -> Result<(), Failure> {
    let axis_name = required(&a.axis, "axis")?;
    let axis: Axis = axis_name.parse().map_err(usage)?;
    let values = required(&a.values, "values")?;
    if values.is_empty() {
        return Err(usage("--values needs at least one value"));
    }
    echo.set("axis", axis);
    echo.set(
        "values",
        values
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    let gen = a.gen.resolve(echo);
    let n_seeds = a.seeds.unwrap_or(ExperimentConfig::default().n_seeds);
    if n_seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    echo.set("seeds", n_seeds);
    echo.set("symbolic-only", a.symbolic_only);
    let budget = a.budget.resolve(echo)?;
    let backend_cfg = if a.symbolic_only {
        None
    } else {
        a.backend.backend(echo)?
    };
    let agents = a.backend.agents(budget, echo);
    let dir = out_dir(&a.out_dir, echo);
    print!("{}", echo.render("sweep"));

    let mode = if a.symbolic_only {
        Mode::Symbolic
    } else {
        Mode::Llm
    };
    let backend = match mode {
        Mode::Symbolic => None,
        Mode::Llm => Some(open_backend(
            backend_cfg,
            "--endpoint, --scripted or --symbolic-only",
        )?),
    };
    let base = ExperimentConfig {
        gen,
        n_seeds,
        mode,
        agents,
    };
    let reports = sweep(&base, axis, values, backend.as_deref(), Some(&dir)).map_err(usage)?;
    write_reports(&reports, &dir).context("report")?;
    write(
        &dir.join("sweep.csv"),
        reports_csv(&reports).context("csv")?,
    )?;
    for (v, rep) in values.iter().zip(&reports) {
        let show = |m: Option<f64>| m.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{axis}={v}: mean acc {} mean f1 {} failed {}/{}",
            show(rep.mean_acc),
            show(rep.mean_f1),
            rep.n_failed,
            rep.per_run.len()
        );
    }
    println!("wrote {}", dir.display());
    if reports.iter().all(|r| r.n_failed == r.per_run.len()) {
        return Err(Failure::Failed(anyhow!("every run failed")));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut echo = Echo::default();
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, &mut echo),
        Command::Learn(a) => cmd_learn(a, &mut echo),
        Command::Translate(a) => cmd_translate(a, &mut echo),
        Command::Pipeline(a) => cmd_pipeline(a, &mut echo),
        Command::Sweep(a) => cmd_sweep(a, &mut echo),
    }
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(e) | Failure::Failed(e) | Failure::Backend(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
