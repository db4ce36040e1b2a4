//! Property tests for metrics, the LLM client and the agent protocol.

use std::time::Duration;

use proptest::prelude::*;

use rulesmith::agents::golden::translator_entries;
use rulesmith::agents::prompts::slugify;
use rulesmith::agents::{
    text_samples, validate_bias_syntax, AgentConfig, Agents, Role, Transcript,
};
use rulesmith::datagen::{generate, GenConfig, Task};
use rulesmith::eval::{metrics, EvalReport, Mode, Prediction, RunResult};
use rulesmith::llm::{
    BackendConfig, HttpBackend, LlmBackend, LlmError, LlmRequest, ScriptEntry, ScriptMatch,
    ScriptedBackend,
};
use rulesmith::logic::Atom;

fn predictions() -> impl Strategy<Value = Vec<Prediction>> {
    prop::collection::vec((any::<bool>(), any::<bool>()), 1..60).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (predicted, gold))| Prediction {
                sample_id: format!("s{i}"),
                predicted,
                gold,
            })
            .collect()
    })
}

fn ok_run(seed: u64, acc: f64, f1: f64) -> RunResult {
    RunResult {
        acc,
        f1,
        failed: false,
        error: None,
        ..RunResult::failed(seed, String::new(), 0)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metrics_ignore_order(preds in predictions(), shuffle in any::<u64>()) {
        let m = metrics(&preds).unwrap();
        let mut shuffled = preds.clone();
        let n = shuffled.len();
        for i in 0..n {
            shuffled.swap(i, (shuffle as usize).wrapping_add(i * 7919) % n);
        }
        let s = metrics(&shuffled).unwrap();
        prop_assert_eq!((m.acc, m.f1), (s.acc, s.f1));
        prop_assert_eq!(m.tp + m.fp + m.fn_ + m.tn, n);
        prop_assert!((0.0..=1.0).contains(&m.f1));
    }

    #[test]
    fn complement_predictor_flips_accuracy(preds in predictions()) {
        let flipped: Vec<Prediction> = preds
            .iter()
            .map(|p| Prediction { predicted: !p.predicted, ..p.clone() })
            .collect();
        let a = metrics(&preds).unwrap().acc;
        let b = metrics(&flipped).unwrap().acc;
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_means_recompute(runs in prop::collection::vec((0u32..=100, 0u32..=100, any::<bool>()), 1..8)) {
        let per_run: Vec<RunResult> = runs
            .iter()
            .enumerate()
            .map(|(i, &(a, f, failed))| {
                if failed {
                    RunResult::failed(i as u64, "x".into(), 0)
                } else {
                    ok_run(i as u64, a as f64 / 100.0, f as f64 / 100.0)
                }
            })
            .rev()
            .collect();
        let rep = EvalReport::new(GenConfig::default(), Mode::Symbolic, per_run);
        let ok: Vec<&RunResult> = rep.per_run.iter().filter(|r| !r.failed).collect();
        prop_assert_eq!(rep.n_failed, rep.per_run.len() - ok.len());
        prop_assert!(rep.per_run.windows(2).all(|w| w[0].seed < w[1].seed));
        if ok.is_empty() {
            prop_assert_eq!(rep.mean_acc, None);
        } else {
            let mean = ok.iter().map(|r| r.acc).sum::<f64>() / ok.len() as f64;
            prop_assert_eq!(rep.mean_acc, Some(mean));
        }
    }

    #[test]
    fn backoff_never_shrinks(
        retries in 0u32..10,
        initial_ms in 0u64..2000,
        mult in 1.0f64..4.0,
    ) {
        let mut c = BackendConfig::http("http://localhost");
        c.max_retries = retries;
        c.backoff_initial = Duration::from_millis(initial_ms);
        c.backoff_multiplier = mult;
        let d = c.backoff_delays();
        prop_assert_eq!(d.len(), retries as usize);
        prop_assert!(d.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn scripted_backend_is_deterministic(
        entries in prop::collection::vec(
            (prop::option::of(prop_oneof![
                (1usize..6).prop_map(ScriptMatch::Ordinal),
                "[ab]{1,2}".prop_map(ScriptMatch::Substring),
            ]), "[a-z]{0,4}"),
            0..8,
        ),
        prompts in prop::collection::vec("[abc]{0,4}", 1..8),
    ) {
        let script: Vec<ScriptEntry> = entries
            .into_iter()
            .map(|(matcher, response)| ScriptEntry { matcher, response })
            .collect();
        let run = || {
            let b = ScriptedBackend::new(script.clone());
            prompts
                .iter()
                .map(|p| b.complete(&LlmRequest::new("sys", p.clone())).map(|r| r.text))
                .map(|r| r.map_err(|e| e.to_string()))
                .collect::<Vec<_>>()
        };
        let first = run();
        prop_assert_eq!(&first, &run());
        // Each entry answers at most once.
        let answered = first.iter().filter(|r| r.is_ok()).count();
        prop_assert!(answered <= script.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn retries_are_bounded(retries in 0u32..4) {
        // Nothing listens on port 1: every attempt is a transport error.
        let mut c = BackendConfig::http("http://127.0.0.1:1");
        c.api_key_env = String::new();
        c.max_retries = retries;
        c.backoff_initial = Duration::from_millis(1);
        c.timeout = Duration::from_secs(5);
        let b = HttpBackend::new(c).unwrap();
        match b.complete(&LlmRequest::new("s", "u")) {
            Err(LlmError::Transport { attempts, .. }) => prop_assert_eq!(attempts, retries + 1),
            other => prop_assert!(false, "{:?}", other.map(|r| r.text)),
        }
    }
}

/// A valid bias, sometimes with lines dropped or directions and arities
/// altered.
fn damaged_bias() -> impl Strategy<Value = String> {
    let lines: Vec<String> = Task::Shoes
        .ground_truth_bias(1)
        .to_string()
        .lines()
        .map(String::from)
        .collect();
    let n = lines.len();
    let rate = prop_oneof![Just(0u8), 1u8..=40];
    (rate, prop::collection::vec(0u8..=255, n)).prop_map(move |(rate, rolls)| {
        let ops = rolls.iter().map(|r| if r % 100 < rate { r % 3 } else { 3 });
        let mut out = String::new();
        for (l, op) in lines.iter().zip(ops) {
            match op {
                0 => {}
                1 => out.push_str(&l.replace("(in,)", "(out,)")),
                2 => out.push_str(&l.replace(",1)", ",2)")),
                _ => out.push_str(l),
            }
            out.push('\n');
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn critic_acceptance_implies_clean_syntax(bias_text in damaged_bias()) {
        let ds = generate(&GenConfig { sample_size: 20, ..GenConfig::default() }).unwrap();
        let samples: Vec<String> = ds.train().take(4).map(|s| s.text.clone()).collect();
        let backend = ScriptedBackend::new(vec![
            ScriptEntry::any(format!("```prolog\n{bias_text}```")),
            ScriptEntry::any("VERDICT: satisfactory"),
        ]);
        let cfg = AgentConfig::default();
        let transcript = Transcript::new();
        let agents = Agents::new(&backend, &cfg, &transcript);
        let proposal = agents.actor_propose(&samples, None, 1).unwrap();
        let report = agents.critic_review(&proposal, &samples).unwrap();
        if report.accepted {
            prop_assert!(validate_bias_syntax(&proposal.bias_text, cfg.bias_options()).is_empty());
            prop_assert!(proposal.parsed.is_some());
        }
    }

    #[test]
    fn refinement_is_bounded(responses in prop::collection::vec(prop_oneof![
        Just("not a bias".to_string()),
        Just("VERDICT: unsatisfactory\nISSUE: too vague".to_string()),
        Just("VERDICT: satisfactory".to_string()),
        Just(format!("```prolog\n{}```", Task::Shoes.ground_truth_bias(1))),
    ], 12)) {
        let ds = generate(&GenConfig { sample_size: 20, ..GenConfig::default() }).unwrap();
        let samples: Vec<String> = ds.train().take(4).map(|s| s.text.clone()).collect();
        let backend = ScriptedBackend::new(responses.into_iter().map(ScriptEntry::any).collect());
        let cfg = AgentConfig::default();
        let transcript = Transcript::new();
        let _ = Agents::new(&backend, &cfg, &transcript).refine_loop(&samples);
        prop_assert!(transcript.count(Role::Actor) <= cfg.max_iterations);
        prop_assert!(transcript.count(Role::Critic) <= cfg.max_iterations);
        prop_assert!(backend.calls() <= 2 * cfg.max_iterations);
    }

    #[test]
    fn translator_cannot_change_labels(flip in prop::collection::vec(any::<u8>(), 16), seed in 1u64..500) {
        let ds = generate(&GenConfig {
            task: Task::Shoes,
            rule_num: 1,
            sample_size: 20,
            noise_ratio: 0.2,
            seed,
            ..GenConfig::default()
        })
        .unwrap();
        let head = ds.head_predicate();
        let train: Vec<_> = ds.train().collect();
        // Golden facts, plus label claims that may contradict the data.
        let mut script = translator_entries(train.iter().copied(), &head, 10);
        for entry in &mut script {
            let mut extra = String::new();
            for (s, f) in train.iter().zip(&flip) {
                let slug = slugify(&s.id);
                if entry.response.contains(&format!("({slug})")) && f % 3 != 0 {
                    let claim = if f % 3 == 1 { "pos" } else { "neg" };
                    extra.push_str(&format!("{claim}({head}({slug})).\n"));
                }
            }
            entry.response = entry.response.replace("\n```", &format!("\n{extra}```"));
        }
        let backend = ScriptedBackend::new(script);
        let cfg = AgentConfig::default();
        let transcript = Transcript::new();
        let bias = Task::Shoes.ground_truth_bias(1);
        let t = Agents::new(&backend, &cfg, &transcript)
            .translate_all(&text_samples(train.iter().copied(), true), &bias)
            .unwrap();
        prop_assert!(t.dropped.is_empty());
        for s in &train {
            let slug = slugify(&s.id);
            let fb = &t.per_sample[&slug];
            let atom = Atom::ground(&head, &[&slug]);
            prop_assert_eq!(fb.pos.contains(&atom), s.label);
            prop_assert_eq!(fb.neg.contains(&atom), !s.label);
            prop_assert_eq!(fb.pos.len() + fb.neg.len(), 1);
        }
    }
}
