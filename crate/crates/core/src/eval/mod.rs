//! Test-set prediction, accuracy and positive-class F1, multi-seed
//! experiments and one-variable sweeps.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::prompts::slugify;
use crate::agents::{
    run_pipeline, text_samples, to_jsonl, AgentConfig, Agents, PipelineError, PipelineRun,
    Transcript,
};
use crate::datagen::{encode_instance, generate, DatagenError, Dataset, GenConfig, Sample};
use crate::ilp::{Hypothesis, Learner, SearchBudget};
use crate::llm::LlmBackend;
use crate::logic::{program_proves, Atom, BiasSpec, FactBase, FactIndex};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no predictions to score")]
    EmptyPredictions,
    #[error("unknown sweep axis `{0}` (expected rule_num, template_num, sample_size, positive_ratio or noise_ratio)")]
    InvalidAxis(String),
    #[error("invalid sweep value {value} for {axis}")]
    InvalidValue { axis: Axis, value: f64 },
    #[error("LLM mode needs a backend")]
    MissingBackend,
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub sample_id: String,
    pub predicted: bool,
    /// The clean label.
    pub gold: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

/// Accuracy and positive-class F1; F1 is 0 when there is no true positive.
pub fn metrics(preds: &[Prediction]) -> Result<Metrics, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    let count = |p: bool, g: bool| {
        preds
            .iter()
            .filter(|x| x.predicted == p && x.gold == g)
            .count()
    };
    let (tp, fp, fn_, tn) = (
        count(true, true),
        count(true, false),
        count(false, true),
        count(false, false),
    );
    let acc = (tp + tn) as f64 / preds.len() as f64;
    let f1 = if tp == 0 {
        0.0
    } else {
        let p = tp as f64 / (tp + fp) as f64;
        let r = tp as f64 / (tp + fn_) as f64;
        2.0 * p * r / (p + r)
    };
    Ok(Metrics {
        acc,
        f1,
        tp,
        fp,
        fn_,
        tn,
    })
}

/// Whether the program proves `head(sample)` from the sample's facts.
pub fn predict(hypothesis: &Hypothesis, bias: &BiasSpec, facts: &FactBase, sample: &str) -> bool {
    let idx = FactIndex::from_facts(facts);
    program_proves(
        &hypothesis.program,
        &idx,
        &Atom::ground(bias.head.name.as_str(), &[sample]),
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Ground-truth bias and encodings; no LLM.
    #[default]
    Symbolic,
    Llm,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "symbolic" => Ok(Mode::Symbolic),
            "llm" => Ok(Mode::Llm),
            _ => Err(format!("unknown mode `{s}` (expected symbolic or llm)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Dataset settings; `gen.seed` is the first seed.
    pub gen: GenConfig,
    pub n_seeds: usize,
    pub mode: Mode,
    pub agents: AgentConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            gen: GenConfig::default(),
            n_seeds: 3,
            mode: Mode::Symbolic,
            agents: AgentConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn budget(&self) -> &SearchBudget {
        &self.agents.budget
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub acc: f64,
    pub f1: f64,
    pub hypothesis_text: String,
    pub cost: Option<usize>,
    pub size: Option<usize>,
    pub fp: Option<usize>,
    #[serde(rename = "fn")]
    pub fn_: Option<usize>,
    pub optimal: bool,
    pub failed: bool,
    pub error: Option<String>,
    pub attempts: usize,
    pub dropped_train: usize,
    pub dropped_test: usize,
    pub runtime_ms: u64,
    pub predictions: Vec<Prediction>,
}

impl RunResult {
    pub fn failed(seed: u64, error: String, runtime_ms: u64) -> Self {
        RunResult {
            seed,
            acc: 0.0,
            f1: 0.0,
            hypothesis_text: String::new(),
            cost: None,
            size: None,
            fp: None,
            fn_: None,
            optimal: false,
            failed: true,
            error: Some(error),
            attempts: 0,
            dropped_train: 0,
            dropped_test: 0,
            runtime_ms,
            predictions: Vec::new(),
        }
    }

    fn scored(seed: u64, h: &Hypothesis, preds: Vec<Prediction>, runtime_ms: u64) -> Self {
        let m = metrics(&preds).expect("test split is non-empty");
        RunResult {
            seed,
            acc: m.acc,
            f1: m.f1,
            hypothesis_text: h.program.to_string(),
            cost: Some(h.cost),
            size: Some(h.size),
            fp: Some(h.fp),
            fn_: Some(h.fn_),
            optimal: h.optimal,
            failed: false,
            error: None,
            attempts: 1,
            dropped_train: 0,
            dropped_test: 0,
            runtime_ms,
            predictions: preds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: GenConfig,
    pub mode: Mode,
    pub per_run: Vec<RunResult>,
    /// Means over runs that did not fail; `None` when all failed.
    pub mean_acc: Option<f64>,
    pub mean_f1: Option<f64>,
    pub n_failed: usize,
}

impl EvalReport {
    pub fn new(config: GenConfig, mode: Mode, mut per_run: Vec<RunResult>) -> Self {
        per_run.sort_by_key(|r| r.seed);
        let ok: Vec<&RunResult> = per_run.iter().filter(|r| !r.failed).collect();
        let mean = |f: fn(&RunResult) -> f64| {
            (!ok.is_empty()).then(|| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64)
        };
        EvalReport {
            mean_acc: mean(|r| r.acc),
            mean_f1: mean(|r| r.f1),
            n_failed: per_run.len() - ok.len(),
            config,
            mode,
            per_run,
        }
    }
}

fn gold_predictions<'a>(
    test: impl Iterator<Item = &'a Sample>,
    mut predicted: impl FnMut(&Sample) -> bool,
) -> Vec<Prediction> {
    test.map(|s| Prediction {
        sample_id: s.id.clone(),
        predicted: predicted(s),
        gold: s.clean_label,
    })
    .collect()
}

/// Learns from ground-truth encodings of the training split and scores the
/// test split.
pub fn run_symbolic(dataset: &Dataset, budget: &SearchBudget) -> RunResult {
    let start = Instant::now();
    let seed = dataset.config.seed;
    let bias = dataset
        .config
        .task
        .ground_truth_bias(dataset.config.rule_num);
    let head = dataset.head_predicate();
    let facts = dataset.encode(dataset.train());
    let h = match Learner::new(budget.clone()).learn(&bias, &facts) {
        Ok(h) => h,
        Err(e) => {
            return RunResult::failed(seed, e.to_string(), start.elapsed().as_millis() as u64)
        }
    };
    let preds = gold_predictions(dataset.test(), |s| {
        let fb = encode_instance(&s.instance, &head, None);
        predict(&h, &bias, &fb, &s.instance.id())
    });
    RunResult::scored(seed, &h, preds, start.elapsed().as_millis() as u64)
}

/// Runs the agent pipeline on the training split, translates the test split
/// with the learned bias, and scores it. Samples the Translator could not
/// encode are predicted negative.
pub fn run_llm(
    dataset: &Dataset,
    backend: &dyn LlmBackend,
    config: &AgentConfig,
    transcript: &Transcript,
) -> Result<(RunResult, PipelineRun), PipelineError> {
    let start = Instant::now();
    let (h, run) = run_pipeline(dataset, backend, config, transcript)?;
    let agents = Agents::new(backend, config, transcript).with_attempt(run.attempt);
    let test = text_samples(dataset.test(), false);
    let translation = agents.translate_all(&test, &run.bias)?;
    let empty = FactBase::new();
    let preds = gold_predictions(dataset.test(), |s| {
        let slug = slugify(&s.id);
        let fb = translation.per_sample.get(&slug).unwrap_or(&empty);
        predict(&h, &run.bias, fb, &slug)
    });
    let mut r = RunResult::scored(
        dataset.config.seed,
        &h,
        preds,
        start.elapsed().as_millis() as u64,
    );
    r.attempts = run.attempt;
    r.dropped_train = run.dropped.len();
    r.dropped_test = translation.dropped.len();
    Ok((r, run))
}

/// Runs `n_seeds` datasets with consecutive seeds. Symbolic runs go in
/// parallel; LLM runs are sequential so a script is consumed in seed
/// order. Transcripts are written to `out_dir/transcripts` when given.
pub fn run_experiment(
    config: &ExperimentConfig,
    backend: Option<&dyn LlmBackend>,
    out_dir: Option<&Path>,
) -> Result<EvalReport, EvalError> {
    config.gen.validate()?;
    let seeds: Vec<u64> = (0..config.n_seeds as u64)
        .map(|i| config.gen.seed + i)
        .collect();
    let datasets = seeds
        .iter()
        .map(|&seed| {
            generate(&GenConfig {
                seed,
                ..config.gen.clone()
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let runs = match config.mode {
        Mode::Symbolic => datasets
            .par_iter()
            .map(|d| run_symbolic(d, config.budget()))
            .collect(),
        Mode::Llm => {
            let backend = backend.ok_or(EvalError::MissingBackend)?;
            let mut runs = Vec::new();
            for d in &datasets {
                let transcript = Transcript::new();
                let start = Instant::now();
                let r = match run_llm(d, backend, &config.agents, &transcript) {
                    Ok((r, _)) => r,
                    Err(e) => RunResult::failed(
                        d.config.seed,
                        e.to_string(),
                        start.elapsed().as_millis() as u64,
                    ),
                };
                if let Some(dir) = out_dir {
                    let tdir = dir.join("transcripts");
                    std::fs::create_dir_all(&tdir)?;
                    std::fs::write(
                        tdir.join(format!("{}.jsonl", run_tag(&d.config))),
                        to_jsonl(&transcript.records()),
                    )?;
                }
                runs.push(r);
            }
            runs
        }
    };
    Ok(EvalReport::new(config.gen.clone(), config.mode, runs))
}

fn run_tag(c: &GenConfig) -> String {
    format!(
        "{}_r{}_t{}_n{}_p{}_e{}_s{}",
        c.task, c.rule_num, c.template_num, c.sample_size, c.positive_ratio, c.noise_ratio, c.seed
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    RuleNum,
    TemplateNum,
    SampleSize,
    PositiveRatio,
    NoiseRatio,
}

impl FromStr for Axis {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, EvalError> {
        // The CLI flag names are accepted too.
        Ok(match s.replace('-', "_").as_str() {
            "rule_num" | "rules" => Axis::RuleNum,
            "template_num" | "templates" => Axis::TemplateNum,
            "sample_size" | "samples" => Axis::SampleSize,
            "positive_ratio" | "pos_ratio" => Axis::PositiveRatio,
            "noise_ratio" | "noise" => Axis::NoiseRatio,
            _ => return Err(EvalError::InvalidAxis(s.to_string())),
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::RuleNum => "rule_num",
            Axis::TemplateNum => "template_num",
            Axis::SampleSize => "sample_size",
            Axis::PositiveRatio => "positive_ratio",
            Axis::NoiseRatio => "noise_ratio",
        })
    }
}

impl Axis {
    /// `base` with this variable set to `value`.
    pub fn apply(&self, base: &GenConfig, value: f64) -> Result<GenConfig, EvalError> {
        let whole = || {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(EvalError::InvalidValue { axis: *self, value })
            }
        };
        let mut c = base.clone();
        match self {
            Axis::RuleNum => c.rule_num = whole()?,
            Axis::TemplateNum => c.template_num = whole()?,
            Axis::SampleSize => c.sample_size = whole()?,
            Axis::PositiveRatio => c.positive_ratio = value,
            Axis::NoiseRatio => c.noise_ratio = value,
        }
        c.validate()?;
        Ok(c)
    }
}

/// One experiment per value of `axis`, everything else as in `base`.
pub fn sweep(
    base: &ExperimentConfig,
    axis: Axis,
    values: &[f64],
    backend: Option<&dyn LlmBackend>,
    out_dir: Option<&Path>,
) -> Result<Vec<EvalReport>, EvalError> {
    let configs = values
        .iter()
        .map(|&v| axis.apply(&base.gen, v))
        .collect::<Result<Vec<_>, _>>()?;
    configs
        .into_iter()
        .map(|gen| {
            run_experiment(
                &ExperimentConfig {
                    gen,
                    ..base.clone()
                },
                backend,
                out_dir,
            )
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow {
    task: String,
    rule_num: usize,
    template_num: usize,
    n: usize,
    pos_ratio: f64,
    noise: f64,
    seed: u64,
    acc: f64,
    f1: f64,
    cost: Option<usize>,
    optimal: bool,
    failed: bool,
}

/// One CSV row per run.
pub fn reports_csv(reports: &[EvalReport]) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rep in reports {
        let c = &rep.config;
        for r in &rep.per_run {
            w.serialize(CsvRow {
                task: c.task.to_string(),
                rule_num: c.rule_num,
                template_num: c.template_num,
                n: c.sample_size,
                pos_ratio: c.positive_ratio,
                noise: c.noise_ratio,
                seed: r.seed,
                acc: r.acc,
                f1: r.f1,
                cost: r.cost,
                optimal: r.optimal,
                failed: r.failed,
            })?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.json` and `report.csv` into `dir`.
pub fn write_reports(reports: &[EvalReport], dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(reports)?,
    )?;
    std::fs::write(dir.join("report.csv"), reports_csv(reports)?)?;
    Ok(())
}
