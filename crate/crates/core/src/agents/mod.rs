//! LLM agents: an Actor/Critic pair that designs the language bias, a
//! Translator that turns sample text into facts, and the controller that
//! chains them with rule learning.

pub mod golden;
pub mod prompts;
mod transcript;
mod translate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{Dataset, Sample};
use crate::ilp::{Hypothesis, LearnError, Learner, SearchBudget};
use crate::llm::{LlmBackend, LlmError, LlmRequest, DEFAULT_MODEL};
use crate::logic::{parse_bias_with, parse_facts, BiasOptions, BiasSpec, FactBase, Violation};

pub use transcript::{from_jsonl, replay_script, to_jsonl, Role, Transcript, TranscriptRecord};
pub use translate::TextSample;

use prompts::{fill, slugify, strip_fences};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("no usable bias after {iterations} iteration(s): {}", .issues.join("; "))]
    BiasConstruction {
        iterations: usize,
        issues: Vec<String>,
    },
    #[error("pipeline failed in every attempt: {}", .reasons.join("; "))]
    Failure { reasons: Vec<String> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub model: String,
    pub max_tokens: u32,
    /// Samples shown to the Actor and Critic.
    pub actor_subset: usize,
    pub batch_size: usize,
    pub max_iterations: usize,
    pub max_translation_attempts: usize,
    pub max_pipeline_attempts: usize,
    /// Translation batches sent to the backend at once.
    pub parallel_batches: usize,
    /// When false, a bias missing `max_vars`/`max_body`/`max_clauses` is a
    /// syntax violation instead of getting defaults.
    pub bias_defaults: bool,
    pub fewshots: Vec<String>,
    pub budget: SearchBudget,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            model: DEFAULT_MODEL.to_string(),
            max_tokens: 4096,
            actor_subset: 10,
            batch_size: 10,
            max_iterations: 5,
            max_translation_attempts: 2,
            max_pipeline_attempts: 2,
            parallel_batches: 4,
            bias_defaults: true,
            fewshots: Vec::new(),
            budget: SearchBudget::default(),
        }
    }
}

impl AgentConfig {
    pub fn bias_options(&self) -> BiasOptions {
        BiasOptions {
            apply_defaults: self.bias_defaults,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasProposal {
    /// The Actor's response, verbatim.
    pub bias_text: String,
    pub parsed: Option<BiasSpec>,
    pub parse_error: Option<String>,
    pub iteration: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CritiqueReport {
    pub semantic_issues: Vec<String>,
    pub syntactic_violations: Vec<Violation>,
    /// The Critic's verdict, `None` when it could not be read.
    pub verdict: Option<bool>,
    pub accepted: bool,
}

impl CritiqueReport {
    /// Feedback text for the next Actor prompt.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if !self.syntactic_violations.is_empty() {
            s.push_str("Syntax problems found by the checker:\n");
            for v in &self.syntactic_violations {
                s.push_str(&format!("- {}: {}\n", v.kind, v.detail));
            }
        }
        if !self.semantic_issues.is_empty() {
            s.push_str("Issues raised by the reviewer:\n");
            for i in &self.semantic_issues {
                s.push_str(&format!("- {i}\n"));
            }
        }
        if s.is_empty() {
            s.push_str("The reviewer found no specific issue but did not accept the design.\n");
        }
        s
    }
}

/// Structural defects of an Actor response; empty iff it parses into a
/// valid bias.
pub fn validate_bias_syntax(text: &str, opts: BiasOptions) -> Vec<Violation> {
    crate::logic::validate_bias_text(&strip_fences(text), opts)
}

/// Reads `VERDICT:` and `ISSUE:` lines. The verdict is `None` unless
/// exactly one of satisfactory/unsatisfactory is given.
pub fn parse_verdict(response: &str) -> (Option<bool>, Vec<String>) {
    let mut verdicts = BTreeSet::new();
    let mut unreadable = false;
    let mut issues = Vec::new();
    for line in response.lines() {
        let line = line.trim().trim_start_matches(['-', '*', ' ']);
        let upper = line.to_ascii_uppercase();
        if let Some(rest) = upper.strip_prefix("VERDICT:") {
            match rest.trim().trim_matches(|c: char| !c.is_ascii_alphabetic()) {
                "SATISFACTORY" => {
                    verdicts.insert(true);
                }
                "UNSATISFACTORY" => {
                    verdicts.insert(false);
                }
                _ => unreadable = true,
            }
        } else if upper.starts_with("ISSUE:") {
            let issue = line["ISSUE:".len()..].trim();
            if !issue.is_empty() && !issue.eq_ignore_ascii_case("none") {
                issues.push(issue.to_string());
            }
        }
    }
    let verdict = match verdicts.len() {
        1 if !unreadable => verdicts.into_iter().next(),
        _ => None,
    };
    (verdict, issues)
}

/// The accepted (or last usable) bias of a refine loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineOutcome {
    pub bias: BiasSpec,
    pub bias_text: String,
    pub iterations: usize,
    pub accepted: bool,
}

/// Result of translating one batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationBatch {
    pub sample_ids: Vec<String>,
    /// The last response, verbatim.
    pub facts_text: String,
    /// Per-sample facts keyed by sample constant; `None` when the batch
    /// was dropped.
    pub parsed: Option<BTreeMap<String, FactBase>>,
    pub attempt: usize,
    pub warnings: Vec<String>,
}

/// Facts for a set of samples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub per_sample: BTreeMap<String, FactBase>,
    /// Ids of samples in dropped batches.
    pub dropped: Vec<String>,
    pub warnings: Vec<String>,
    pub retried_batches: usize,
}

impl Translation {
    pub fn facts(&self) -> FactBase {
        let mut fb = FactBase::new();
        for f in self.per_sample.values() {
            fb.merge(f).expect("each sample has one label");
        }
        fb
    }
}

/// One pipeline attempt that got at least as far as rule search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub attempt: usize,
    pub bias: BiasSpec,
    pub bias_text: String,
    pub facts: FactBase,
    pub hypothesis: Option<Hypothesis>,
    pub dropped: Vec<String>,
    pub warnings: Vec<String>,
    /// Why earlier attempts failed.
    pub failures: Vec<String>,
    pub transcript: Vec<TranscriptRecord>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn samples_block(texts: &[String]) -> String {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{}. {t}\n", i + 1))
        .collect()
}

/// Agents bound to a backend, a configuration and a transcript, acting for
/// one pipeline attempt.
pub struct Agents<'a> {
    backend: &'a dyn LlmBackend,
    config: &'a AgentConfig,
    transcript: &'a Transcript,
    attempt: usize,
}

impl<'a> Agents<'a> {
    pub fn new(
        backend: &'a dyn LlmBackend,
        config: &'a AgentConfig,
        transcript: &'a Transcript,
    ) -> Self {
        Agents {
            backend,
            config,
            transcript,
            attempt: 1,
        }
    }

    pub fn with_attempt(mut self, attempt: usize) -> Self {
        self.attempt = attempt;
        self
    }

    fn call(&self, system: &str, user: String) -> Result<(String, String), PipelineError> {
        let req = LlmRequest::new(system, user)
            .model(self.config.model.clone())
            .max_tokens(self.config.max_tokens);
        let resp = self.backend.complete(&req)?;
        Ok((req.user_prompt, resp.text))
    }

    fn record(
        &self,
        role: Role,
        iteration: usize,
        batch: Option<usize>,
        system: &str,
        prompt: String,
        response: &str,
    ) -> TranscriptRecord {
        TranscriptRecord {
            role,
            attempt: self.attempt,
            iteration,
            batch,
            system: system.to_string(),
            prompt,
            response: response.to_string(),
            timestamp: now(),
        }
    }

    /// One Actor call. A response that does not parse is kept with its
    /// error rather than failing.
    pub fn actor_propose(
        &self,
        samples: &[String],
        feedback: Option<(&BiasProposal, &CritiqueReport)>,
        iteration: usize,
    ) -> Result<BiasProposal, PipelineError> {
        if samples.is_empty() {
            return Err(PipelineError::InvalidInput(
                "the Actor needs at least one sample".into(),
            ));
        }
        let shown = &samples[..samples.len().min(self.config.actor_subset)];
        let fewshots = if self.config.fewshots.is_empty() {
            "(none)".to_string()
        } else {
            self.config.fewshots.join("\n\n")
        };
        let feedback = match feedback {
            None => "(none, this is the first design)".to_string(),
            Some((prev, report)) => format!(
                "Previous design:\n```prolog\n{}\n```\n{}",
                strip_fences(&prev.bias_text),
                report.render()
            ),
        };
        let user = fill(
            prompts::ACTOR,
            &[
                ("samples", &samples_block(shown)),
                ("fewshots", &fewshots),
                ("feedback", &feedback),
            ],
        );
        let (prompt, text) = self.call(prompts::ACTOR_SYSTEM, user)?;
        self.transcript.push(self.record(
            Role::Actor,
            iteration,
            None,
            prompts::ACTOR_SYSTEM,
            prompt,
            &text,
        ));
        let (parsed, parse_error) =
            match parse_bias_with(&strip_fences(&text), self.config.bias_options()) {
                Ok(b) => (Some(b), None),
                Err(e) => (None, Some(e.to_string())),
            };
        Ok(BiasProposal {
            bias_text: text,
            parsed,
            parse_error,
            iteration,
        })
    }

    /// Programmatic syntax check plus one Critic call. Accepted only when
    /// both pass.
    pub fn critic_review(
        &self,
        proposal: &BiasProposal,
        samples: &[String],
    ) -> Result<CritiqueReport, PipelineError> {
        let syntactic_violations =
            validate_bias_syntax(&proposal.bias_text, self.config.bias_options());
        let shown = &samples[..samples.len().min(self.config.actor_subset)];
        let user = fill(
            prompts::CRITIC,
            &[
                ("bias", &strip_fences(&proposal.bias_text)),
                ("samples", &samples_block(shown)),
            ],
        );
        let (prompt, text) = self.call(prompts::CRITIC_SYSTEM, user)?;
        self.transcript.push(self.record(
            Role::Critic,
            proposal.iteration,
            None,
            prompts::CRITIC_SYSTEM,
            prompt,
            &text,
        ));
        let (verdict, mut semantic_issues) = parse_verdict(&text);
        if verdict.is_none() {
            semantic_issues.push("the review did not contain a readable verdict".to_string());
        }
        let accepted = verdict == Some(true) && syntactic_violations.is_empty();
        Ok(CritiqueReport {
            semantic_issues,
            syntactic_violations,
            verdict,
            accepted,
        })
    }

    /// Alternates Actor and Critic until the Critic accepts or the
    /// iteration limit is hit, in which case the last syntactically clean
    /// proposal is used.
    pub fn refine_loop(&self, samples: &[String]) -> Result<RefineOutcome, PipelineError> {
        let max_iter = self.config.max_iterations.max(1);
        let mut last_valid: Option<(BiasSpec, String, usize)> = None;
        let mut feedback: Option<(BiasProposal, CritiqueReport)> = None;
        for it in 1..=max_iter {
            let proposal =
                self.actor_propose(samples, feedback.as_ref().map(|(p, r)| (p, r)), it)?;
            let report = self.critic_review(&proposal, samples)?;
            if report.syntactic_violations.is_empty() {
                if let Some(b) = &proposal.parsed {
                    if report.accepted {
                        return Ok(RefineOutcome {
                            bias: b.clone(),
                            bias_text: strip_fences(&proposal.bias_text),
                            iterations: it,
                            accepted: true,
                        });
                    }
                    last_valid = Some((b.clone(), strip_fences(&proposal.bias_text), it));
                }
            }
            log::info!(
                "iteration {it}: {} violation(s), {} issue(s)",
                report.syntactic_violations.len(),
                report.semantic_issues.len()
            );
            feedback = Some((proposal, report));
        }
        match last_valid {
            Some((bias, bias_text, _)) => Ok(RefineOutcome {
                bias,
                bias_text,
                iterations: max_iter,
                accepted: false,
            }),
            None => {
                let issues = feedback
                    .map(|(_, r)| {
                        r.syntactic_violations
                            .iter()
                            .map(|v| v.to_string())
                            .chain(r.semantic_issues)
                            .collect()
                    })
                    .unwrap_or_default();
                Err(PipelineError::BiasConstruction {
                    iterations: max_iter,
                    issues,
                })
            }
        }
    }

    /// Translates one batch, retrying once on unparseable output or a
    /// sample without facts. A batch that fails every attempt is dropped.
    /// Labels come from `samples`, never from the response.
    pub fn translate_batch(
        &self,
        batch_index: usize,
        samples: &[TextSample],
        bias: &BiasSpec,
    ) -> Result<(TranslationBatch, Vec<TranscriptRecord>), PipelineError> {
        if samples.len() > self.config.batch_size {
            return Err(PipelineError::InvalidInput(format!(
                "batch of {} exceeds the limit of {}",
                samples.len(),
                self.config.batch_size
            )));
        }
        let slugs: Vec<String> = samples.iter().map(|s| slugify(&s.id)).collect();
        let block: String = samples
            .iter()
            .zip(&slugs)
            .map(|(s, slug)| format!("[{slug}] {}\n", s.text))
            .collect();
        let bias_text = bias.to_string();
        let mut records = Vec::new();
        let mut warnings = Vec::new();
        let mut problem: Option<String> = None;
        let mut last_text = String::new();
        let max_attempts = self.config.max_translation_attempts.max(1);
        for attempt in 1..=max_attempts {
            let feedback = match &problem {
                None => String::new(),
                Some(p) => format!("## Problem with your previous answer\n\n{p}\n\n"),
            };
            let user = fill(
                prompts::TRANSLATOR,
                &[
                    ("bias", &bias_text),
                    ("samples", &block),
                    ("feedback", &feedback),
                ],
            );
            let (prompt, text) = self.call(prompts::TRANSLATOR_SYSTEM, user)?;
            records.push(self.record(
                Role::Translator,
                attempt,
                Some(batch_index),
                prompts::TRANSLATOR_SYSTEM,
                prompt,
                &text,
            ));
            last_text = text;
            let facts = match parse_facts(&strip_fences(&last_text), Some(bias)) {
                Ok(f) => f,
                Err(e) => {
                    problem = Some(format!("The facts could not be parsed: {e}"));
                    continue;
                }
            };
            let at = translate::attribute(&facts, bias, &slugs);
            let empty: Vec<&str> = slugs
                .iter()
                .zip(&at.per_sample)
                .filter(|(_, f)| f.background.is_empty())
                .map(|(s, _)| s.as_str())
                .collect();
            if !empty.is_empty() {
                problem = Some(format!(
                    "No usable facts were given for: {}",
                    empty.join(", ")
                ));
                continue;
            }
            warnings.extend(
                at.warnings
                    .iter()
                    .map(|w| format!("batch {batch_index}: {w}")),
            );
            let parsed = translate::with_labels(at, samples, &slugs, &bias.head.name);
            return Ok((
                TranslationBatch {
                    sample_ids: samples.iter().map(|s| s.id.clone()).collect(),
                    facts_text: last_text,
                    parsed: Some(parsed),
                    attempt,
                    warnings,
                },
                records,
            ));
        }
        warnings.push(format!(
            "batch {batch_index} dropped after {max_attempts} attempt(s): {}",
            problem.unwrap_or_default()
        ));
        log::warn!("{}", warnings.last().expect("just pushed"));
        Ok((
            TranslationBatch {
                sample_ids: samples.iter().map(|s| s.id.clone()).collect(),
                facts_text: last_text,
                parsed: None,
                attempt: max_attempts,
                warnings,
            },
            records,
        ))
    }

    /// Translates samples in batches (sorted by id), several batches at a
    /// time. The transcript gets the batches' records in batch order.
    pub fn translate_all(
        &self,
        samples: &[TextSample],
        bias: &BiasSpec,
    ) -> Result<Translation, PipelineError> {
        let mut sorted: Vec<&TextSample> = samples.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        let batches: Vec<Vec<TextSample>> = sorted
            .chunks(self.config.batch_size.max(1))
            .map(|c| c.iter().map(|s| (*s).clone()).collect())
            .collect();
        let mut results = Vec::with_capacity(batches.len());
        for group in batches.chunks(self.config.parallel_batches.max(1)) {
            let base = results.len();
            let out: Vec<_> = std::thread::scope(|scope| {
                let handles: Vec<_> = group
                    .iter()
                    .enumerate()
                    .map(|(j, b)| scope.spawn(move || self.translate_batch(base + j, b, bias)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("translation thread panicked"))
                    .collect()
            });
            for r in out {
                results.push(r?);
            }
        }
        let mut t = Translation::default();
        for (batch, records) in results {
            self.transcript.extend(records);
            if batch.attempt > 1 {
                t.retried_batches += 1;
            }
            t.warnings.extend(batch.warnings);
            match batch.parsed {
                Some(parsed) => t.per_sample.extend(parsed),
                None => t.dropped.extend(batch.sample_ids),
            }
        }
        Ok(t)
    }
}

/// Texts of up to `k` training samples for the Actor, alternating
/// positives and negatives, starting at `offset` in that order.
pub fn actor_samples(train: &[&Sample], k: usize, offset: usize) -> Vec<String> {
    let mut sorted = train.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let (pos, neg): (Vec<&Sample>, Vec<&Sample>) = sorted.into_iter().partition(|s| s.label);
    let mut mixed = Vec::with_capacity(pos.len() + neg.len());
    let (mut p, mut n) = (pos.into_iter(), neg.into_iter());
    loop {
        match (p.next(), n.next()) {
            (None, None) => break,
            (a, b) => mixed.extend(a.into_iter().chain(b)),
        }
    }
    if mixed.len() <= k {
        return mixed.iter().map(|s| s.text.clone()).collect();
    }
    (0..k)
        .map(|i| mixed[(offset + i) % mixed.len()].text.clone())
        .collect()
}

pub fn text_samples<'s>(
    samples: impl IntoIterator<Item = &'s Sample>,
    with_labels: bool,
) -> Vec<TextSample> {
    samples
        .into_iter()
        .map(|s| TextSample {
            id: s.id.clone(),
            text: s.text.clone(),
            label: with_labels.then_some(s.label),
        })
        .collect()
}

/// Bias design, translation of the training split, and rule learning, with
/// one restart from bias design when an attempt fails. Returns the
/// lowest-cost hypothesis among completed attempts. Every exchange is
/// appended to `transcript`, including those of failed runs.
pub fn run_pipeline(
    dataset: &Dataset,
    backend: &dyn LlmBackend,
    config: &AgentConfig,
    transcript: &Transcript,
) -> Result<(Hypothesis, PipelineRun), PipelineError> {
    let train: Vec<&Sample> = dataset.train().collect();
    if train.is_empty() {
        return Err(PipelineError::InvalidInput("no training samples".into()));
    }
    let train_text = text_samples(train.iter().copied(), true);
    let learner = Learner::new(config.budget.clone());
    let mut failures = Vec::new();
    let mut best: Option<(Hypothesis, PipelineRun)> = None;
    for attempt in 1..=config.max_pipeline_attempts.max(1) {
        let agents = Agents::new(backend, config, transcript).with_attempt(attempt);
        let shown = actor_samples(
            &train,
            config.actor_subset,
            (attempt - 1) * config.actor_subset,
        );
        let outcome = match agents.refine_loop(&shown) {
            Ok(o) => o,
            Err(e @ PipelineError::BiasConstruction { .. }) => {
                failures.push(format!("attempt {attempt}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        if outcome.bias.head.arity() != 1 {
            failures.push(format!(
                "attempt {attempt}: head predicate {} has arity {}, expected 1",
                outcome.bias.head.name,
                outcome.bias.head.arity()
            ));
            continue;
        }
        let translation = agents.translate_all(&train_text, &outcome.bias)?;
        let facts = translation.facts();
        if facts.pos.is_empty() && facts.neg.is_empty() {
            failures.push(format!(
                "attempt {attempt}: no training sample could be translated"
            ));
            continue;
        }
        let mut run = PipelineRun {
            attempt,
            bias: outcome.bias.clone(),
            bias_text: outcome.bias_text,
            facts,
            hypothesis: None,
            dropped: translation.dropped,
            warnings: translation.warnings,
            failures: Vec::new(),
            transcript: Vec::new(),
        };
        match learner.learn(&outcome.bias, &run.facts) {
            Ok(h) => {
                run.hypothesis = Some(h.clone());
                if best.as_ref().is_none_or(|(b, _)| h.cost < b.cost) {
                    best = Some((h, run));
                }
                break;
            }
            Err(LearnError::UnusableBias(m)) => {
                failures.push(format!("attempt {attempt}: unusable bias: {m}"))
            }
            Err(LearnError::Failed { reason, .. }) => {
                failures.push(format!("attempt {attempt}: {reason}"))
            }
        }
    }
    match best {
        Some((h, mut run)) => {
            run.failures = failures;
            run.transcript = transcript.records();
            Ok((h, run))
        }
        None => Err(PipelineError::Failure { reasons: failures }),
    }
}
