//! End-to-end acceptance suite. Runs every criterion, prints one PASS/FAIL
//! line each, and exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rulesmith::agents::golden::translator_entries;
use rulesmith::agents::prompts::{ACTOR_MARKER, CRITIC_MARKER};
use rulesmith::agents::{
    from_jsonl, replay_script, run_pipeline, text_samples, AgentConfig, Agents, PipelineError,
    Role, TextSample, Transcript,
};
use rulesmith::datagen::shoes::{self, ShoeSample};
use rulesmith::datagen::{encode_instance, generate, Dataset, GenConfig, Split, Task};
use rulesmith::eval::{metrics, run_experiment, run_symbolic, ExperimentConfig, Mode, Prediction};
use rulesmith::ilp::{mdl_cost, search_exact, search_greedy, CoverageVector, SearchBudget};
use rulesmith::llm::{ScriptEntry, ScriptedBackend};
use rulesmith::logic::bias::{BiasOptions, Direction, PredicateSignature, Role as PredRole};
use rulesmith::logic::{
    clause_entails, parse_clause, parse_facts, parse_program, program_covers, program_proves,
    validate_bias_text, Atom, BiasSpec, Clause, FactBase, FactIndex, Program, Term, ViolationKind,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("shoes symbolic exact recovery", shoes_recovery),
        ("zendo1 recovery", zendo_recovery),
        ("exact search equals brute force", mdl_oracle),
        ("noise tolerance", noise_tolerance),
        ("protocol bounds", protocol_bounds),
        ("bias validator completeness", validator_completeness),
        ("generator exactness", generator_exactness),
        ("metrics", metrics_check),
        ("scripted end-to-end", scripted_end_to_end),
        ("logic property suites", logic_properties),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({:.1}s)",
            i + 1,
            name,
            if out.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for line in out.detail.lines() {
            println!("    {line}");
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// (cost, size, fp, fn) of `program` on the labelled examples of `facts`.
fn program_cost(program: &Program, facts: &FactBase) -> (usize, usize, usize, usize) {
    let (pos, neg) = program_covers(program, facts);
    let size: usize = program.clauses().iter().map(Clause::size).sum();
    let fn_ = facts.pos.len() - pos.len();
    (size + neg.len() + fn_, size, neg.len(), fn_)
}

fn proves(program: &Program, facts: &FactBase, head: &str, id: &str) -> bool {
    program_proves(
        program,
        &FactIndex::from_facts(facts),
        &Atom::ground(head, &[id]),
    )
}

fn shoes_recovery() -> Outcome {
    let grid = ShoeSample::all();
    let mut pass = grid.len() == 720;
    let mut detail = format!("attribute grid: {} shoes\n", grid.len());
    for rule in 1..=3 {
        for seed in 1..=3 {
            let ds = generate(&GenConfig {
                task: Task::Shoes,
                rule_num: rule,
                sample_size: 100,
                noise_ratio: 0.0,
                seed,
                ..GenConfig::default()
            })
            .unwrap();
            let start = Instant::now();
            let r = run_symbolic(&ds, &SearchBudget::default());
            let secs = start.elapsed().as_secs_f64();
            if r.failed {
                pass = false;
                detail += &format!("rule {rule} seed {seed}: learner failed: {:?}\n", r.error);
                continue;
            }
            let learned = parse_program(&r.hypothesis_text).unwrap();
            let mismatches = grid
                .iter()
                .filter(|s| {
                    let fb = shoes::encode(s, None);
                    proves(&learned, &fb, shoes::HEAD, &s.id) != shoes::label_shoes(s, rule)
                })
                .count();
            let ok = mismatches == 0 && r.acc == 1.0 && secs < 60.0;
            pass &= ok;
            detail += &format!(
                "rule {rule} seed {seed}: grid mismatches {mismatches}, test acc {:.3}, {secs:.2}s{}\n",
                r.acc,
                if ok { "" } else { ", differs from the generating rules" }
            );
            if !ok {
                let train = ds.encode(ds.train());
                let truth = program_cost(&shoes::ground_truth_program(rule), &train);
                detail += &format!(
                    "  learned cost {} (size {}, fp {}, fn {}) vs generating rules {} (size {}, fp {}, fn {}) on train\n",
                    r.cost.unwrap(),
                    r.size.unwrap(),
                    r.fp.unwrap(),
                    r.fn_.unwrap(),
                    truth.0,
                    truth.1,
                    truth.2,
                    truth.3
                );
                for l in r.hypothesis_text.lines() {
                    detail += &format!("  learned: {l}\n");
                }
            }
        }
    }
    Outcome::new(pass, detail)
}

fn zendo_recovery() -> Outcome {
    let ds = generate(&GenConfig {
        task: Task::Zendo,
        rule_num: 1,
        sample_size: 100,
        noise_ratio: 0.0,
        seed: 1,
        ..GenConfig::default()
    })
    .unwrap();
    let start = Instant::now();
    let r = run_symbolic(&ds, &SearchBudget::default());
    let secs = start.elapsed().as_secs_f64();
    if r.failed {
        return Outcome::new(false, format!("learner failed: {:?}", r.error));
    }
    let learned = parse_program(&r.hypothesis_text).unwrap();
    let truth = Task::Zendo.ground_truth_program(1);
    let head = ds.head_predicate();
    let fresh = generate(&GenConfig {
        task: Task::Zendo,
        rule_num: 1,
        sample_size: 500,
        noise_ratio: 0.0,
        seed: 1_000_001,
        ..GenConfig::default()
    })
    .unwrap();
    let mismatches = fresh
        .samples
        .iter()
        .filter(|s| {
            let fb = encode_instance(&s.instance, &head, None);
            let id = s.instance.id();
            proves(&learned, &fb, &head, &id) != proves(&truth, &fb, &head, &id)
        })
        .count();
    let pass = mismatches == 0 && r.acc == 1.0 && secs < 300.0;
    let mut detail = format!(
        "fresh worlds {}, mismatches {mismatches}, test acc {:.3}, {secs:.2}s\n",
        fresh.samples.len(),
        r.acc
    );
    for l in r.hypothesis_text.lines() {
        detail += &format!("learned: {l}\n");
    }
    Outcome::new(pass, detail)
}

fn unary_bias(max_clauses: usize) -> BiasSpec {
    BiasSpec {
        head: PredicateSignature::new("h", &["t"], &[Direction::In], PredRole::Head),
        body: vec![PredicateSignature::new(
            "p",
            &["t"],
            &[Direction::In],
            PredRole::Body,
        )],
        max_vars: 1,
        max_body: 1,
        max_clauses,
    }
}

fn random_vector(rng: &mut ChaCha8Rng, i: usize, n_pos: usize, n_neg: usize) -> CoverageVector {
    let size = rng.gen_range(2..=6);
    let body = (0..size - 1)
        .map(|j| Atom::new(format!("c{i:02}_{j}"), vec![Term::var("A")]))
        .collect();
    let clause = Clause::new(Atom::new("h", vec![Term::var("A")]), body);
    let mut bits = |n: usize, p: f64| {
        let mut s = FixedBitSet::with_capacity(n);
        for k in 0..n {
            s.set(k, rng.gen_bool(p));
        }
        s
    };
    let pos = bits(n_pos, 0.4);
    let neg = bits(n_neg, 0.2);
    CoverageVector::new(clause, pos, neg)
}

fn mdl_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let budget = SearchBudget {
        time_limit: Duration::from_secs(600),
        ..SearchBudget::default()
    };
    let (mut equal, mut greedy_ok) = (0, 0);
    let mut detail = String::new();
    for case in 0..50 {
        let n_pos = rng.gen_range(1..=20);
        let n_neg = rng.gen_range(0..=20);
        let n_vec = rng.gen_range(1..=15);
        let max_clauses = rng.gen_range(1..=4);
        let pool: Vec<CoverageVector> = (0..n_vec)
            .map(|i| random_vector(&mut rng, i, n_pos, n_neg))
            .collect();
        let brute = (0..=max_clauses.min(n_vec))
            .flat_map(|k| pool.iter().combinations(k))
            .map(|sel| mdl_cost(&sel, n_pos, n_neg).cost)
            .min()
            .unwrap();
        let bias = unary_bias(max_clauses);
        let exact = search_exact(&pool, n_pos, n_neg, &bias, &budget);
        let greedy = search_greedy(&pool, n_pos, n_neg, &bias);
        if exact.cost == brute && exact.optimal {
            equal += 1;
        } else {
            detail += &format!("case {case}: exact {} vs brute force {brute}\n", exact.cost);
        }
        if greedy.cost >= exact.cost {
            greedy_ok += 1;
        } else {
            detail += &format!(
                "case {case}: greedy {} below exact {}\n",
                greedy.cost, exact.cost
            );
        }
    }
    detail.insert_str(
        0,
        &format!("exact = brute force in {equal}/50, greedy >= exact in {greedy_ok}/50\n"),
    );
    Outcome::new(equal == 50 && greedy_ok == 50, detail)
}

fn noise_tolerance() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for seed in 1..=3 {
        let ds = generate(&GenConfig {
            task: Task::Shoes,
            rule_num: 1,
            sample_size: 100,
            noise_ratio: 0.1,
            seed,
            ..GenConfig::default()
        })
        .unwrap();
        let flips = ds.train().filter(|s| s.label != s.clean_label).count();
        let r = run_symbolic(&ds, &SearchBudget::default());
        let truth = program_cost(&shoes::ground_truth_program(1), &ds.encode(ds.train()));
        let learned = r.cost.unwrap_or(usize::MAX);
        let ok = flips == 8 && !r.failed && learned <= truth.0 && r.acc >= 0.95;
        pass &= ok;
        detail += &format!(
            "seed {seed}: {flips} flipped train labels, learned cost {learned} vs generating rule {}, clean test acc {:.3}\n",
            truth.0, r.acc
        );
    }
    Outcome::new(pass, detail)
}

fn shoe_text(id: &str, text: &str, label: bool) -> TextSample {
    TextSample {
        id: id.into(),
        text: text.into(),
        label: Some(label),
    }
}

fn protocol_bounds() -> Outcome {
    let config = AgentConfig::default();
    let iters = config.max_iterations;
    let mut checks: Vec<(String, bool)> = Vec::new();

    // The Actor never produces a bias: failure after max_iterations rounds,
    // one Actor and one Critic call per round.
    let mut script = Vec::new();
    for _ in 0..iters {
        script.push(ScriptEntry::on(
            ACTOR_MARKER,
            "I am not sure what you mean.",
        ));
        script.push(ScriptEntry::on(CRITIC_MARKER, "VERDICT: unsatisfactory"));
    }
    let backend = ScriptedBackend::new(script);
    let t = Transcript::new();
    let samples = vec![
        "This is a black formal shoes made of leather, expensive in price and very comfortable to wear. This shoe is suitable for business.".to_string(),
        "This is a red sneakers made of mesh, cheap in price and fairly comfortable to wear. This shoe is not suitable for business.".to_string(),
    ];
    let res = Agents::new(&backend, &config, &t).refine_loop(&samples);
    checks.push((
        format!(
            "refinement: {:?} after {} calls (expected failure after {iters} iterations, {} calls)",
            res.as_ref().err().map(ToString::to_string),
            backend.calls(),
            2 * iters
        ),
        matches!(res, Err(PipelineError::BiasConstruction { iterations, .. }) if iterations == iters)
            && backend.calls() == 2 * iters
            && t.count(Role::Actor) == iters,
    ));

    // A batch that fails twice is dropped after its second attempt.
    let bias = shoes::ground_truth_bias();
    let batch = [
        shoe_text("shoe_001", "x", true),
        shoe_text("shoe_002", "y", false),
    ];
    let backend = ScriptedBackend::new(vec![
        ScriptEntry::any("black(shoe_001)."),
        ScriptEntry::any("garbage(("),
        ScriptEntry::any("black(shoe_001). red(shoe_002)."),
    ]);
    let t = Transcript::new();
    let (b, _) = Agents::new(&backend, &config, &t)
        .translate_batch(0, &batch, &bias)
        .unwrap();
    checks.push((
        format!(
            "translation: attempt {}, dropped {}, {} calls (expected 2, true, 2)",
            b.attempt,
            b.parsed.is_none(),
            backend.calls()
        ),
        b.attempt == 2 && b.parsed.is_none() && backend.calls() == 2,
    ));

    // One retried batch costs one extra call over ceil(n / batch_size).
    let ds = golden_dataset();
    let head = ds.head_predicate();
    let mut script = translator_entries(ds.train(), &head, config.batch_size);
    let first = ds.train().map(|s| s.id.clone()).min().unwrap();
    script.insert(0, ScriptEntry::on(format!("[{first}]"), "nonsense ((("));
    let backend = ScriptedBackend::new(script);
    let t = Transcript::new();
    let train = text_samples(ds.train(), true);
    let tr = Agents::new(&backend, &config, &t)
        .translate_all(&train, &bias)
        .unwrap();
    let expected = train.len().div_ceil(config.batch_size) + 1;
    checks.push((
        format!(
            "batched translation: {} calls for {} samples (expected {expected}), {} dropped",
            backend.calls(),
            train.len(),
            tr.dropped.len()
        ),
        backend.calls() == expected && tr.dropped.is_empty() && tr.retried_batches == 1,
    ));

    // Both pipeline attempts exhaust the refinement loop.
    let mut script = Vec::new();
    for _ in 0..2 * iters {
        script.push(ScriptEntry::on(ACTOR_MARKER, "no idea"));
        script.push(ScriptEntry::on(CRITIC_MARKER, "VERDICT: unsatisfactory"));
    }
    let backend = ScriptedBackend::new(script);
    let t = Transcript::new();
    let res = run_pipeline(&ds, &backend, &config, &t);
    checks.push((
        format!(
            "pipeline: {:?} after {} calls (expected failure after 2 attempts, {} calls)",
            res.as_ref().err().map(ToString::to_string),
            backend.calls(),
            4 * iters
        ),
        matches!(res, Err(PipelineError::Failure { ref reasons }) if reasons.len() == 2)
            && backend.calls() == 4 * iters
            && t.records().iter().all(|r| r.attempt <= 2),
    ));

    let pass = checks.iter().all(|(_, ok)| *ok);
    let detail = checks.into_iter().map(|(d, _)| d).join("\n");
    Outcome::new(pass, detail)
}

fn golden_dataset() -> Dataset {
    generate(&GenConfig {
        task: Task::Shoes,
        rule_num: 1,
        template_num: 1,
        sample_size: 50,
        positive_ratio: 0.5,
        noise_ratio: 0.0,
        seed: 1,
    })
    .unwrap()
}

fn validator_completeness() -> Outcome {
    let clean = shoes::ground_truth_bias_text();
    let strict = BiasOptions {
        apply_defaults: false,
    };
    let corpus: Vec<(ViolationKind, String)> = vec![
        (
            ViolationKind::HeadTypeUncovered,
            clean.replace("(shoes,)", "(item,)").replacen(
                "type(suitable_for_business,(item,))",
                "type(suitable_for_business,(shoes,))",
                1,
            ),
        ),
        (
            ViolationKind::ArityMismatch,
            clean.replace("body_pred(red,1)", "body_pred(red,2)"),
        ),
        (
            ViolationKind::MissingTypeDecl,
            clean.replace("type(mesh,(shoes,)).\n", ""),
        ),
        (
            ViolationKind::MissingDirectionDecl,
            clean.replace("direction(cheap,(in,)).\n", ""),
        ),
        (
            ViolationKind::DuplicatePredicate,
            format!("{clean}body_pred(black,1).\n"),
        ),
        (
            ViolationKind::BadIdentifier,
            clean.replace("direction(gray,(in,))", "direction(gray,(sideways,))"),
        ),
        (
            ViolationKind::MissingGlobalConstraint,
            clean.replace("max_clauses(4).\n", ""),
        ),
    ];
    let mut detail = String::new();
    let mut flagged = 0;
    for (kind, text) in &corpus {
        let found: Vec<ViolationKind> = validate_bias_text(text, strict)
            .into_iter()
            .map(|v| v.kind)
            .collect();
        let ok = found.contains(kind);
        flagged += ok as usize;
        detail += &format!(
            "{kind}: {} (reported {})\n",
            if ok { "flagged" } else { "missed" },
            found.iter().map(ToString::to_string).join(", ")
        );
    }
    let all_kinds = ViolationKind::ALL
        .iter()
        .all(|k| corpus.iter().any(|(c, _)| c == k));
    let clean_violations = validate_bias_text(&clean, strict);
    detail += &format!(
        "clean shoes bias: {} violations\nflagged {flagged}/{}",
        clean_violations.len(),
        corpus.len()
    );
    Outcome::new(
        all_kinds && flagged == corpus.len() && corpus.len() >= 7 && clean_violations.is_empty(),
        detail,
    )
}

fn generator_exactness() -> Outcome {
    let mut n_configs = 0;
    let mut bad = Vec::new();
    for task in [Task::Shoes, Task::Zendo] {
        for rule_num in 1..=3 {
            for template_num in 1..=3 {
                for n in [50, 100, 200] {
                    for pos in [0.2, 0.3, 0.5] {
                        for noise in [0.0, 0.1, 0.2] {
                            n_configs += 1;
                            let cfg = GenConfig {
                                task,
                                rule_num,
                                template_num,
                                sample_size: n,
                                positive_ratio: pos,
                                noise_ratio: noise,
                                seed: 1,
                            };
                            if let Err(e) = check_dataset(&cfg) {
                                bad.push(format!("{cfg:?}: {e}"));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut detail = format!("{n_configs} configs, {} mismatched\n", bad.len());
    for b in bad.iter().take(10) {
        detail += &format!("{b}\n");
    }
    Outcome::new(bad.is_empty(), detail)
}

fn check_dataset(cfg: &GenConfig) -> Result<(), String> {
    let ds = generate(cfg).map_err(|e| e.to_string())?;
    let n = cfg.sample_size;
    let n_test = n / 5;
    let n_train = n - n_test;
    let want = |what: &str, got: usize, expected: usize| {
        if got == expected {
            Ok(())
        } else {
            Err(format!("{what}: {got}, expected {expected}"))
        }
    };
    want("samples", ds.samples.len(), n)?;
    want("test", ds.test().count(), n_test)?;
    want("train", ds.train().count(), n_train)?;
    want(
        "positives",
        ds.samples.iter().filter(|s| s.clean_label).count(),
        (cfg.positive_ratio * n as f64).round() as usize,
    )?;
    want(
        "train flips",
        ds.train().filter(|s| s.label != s.clean_label).count(),
        (cfg.noise_ratio * n_train as f64).round() as usize,
    )?;
    want(
        "test flips",
        ds.test().filter(|s| s.label != s.clean_label).count(),
        0,
    )?;
    if ds
        .samples
        .iter()
        .any(|s| s.noise_flag != (s.label != s.clean_label) || s.template_id >= cfg.template_num)
    {
        return Err("noise flag or template id out of line".into());
    }
    if ds.samples.iter().filter(|s| s.split == Split::Test).count() != n_test {
        return Err("split field disagrees with the test view".into());
    }
    let again = generate(cfg).map_err(|e| e.to_string())?;
    if again.to_jsonl() != ds.to_jsonl() {
        return Err("regeneration differs".into());
    }
    Ok(())
}

fn predictions(cells: &[(bool, bool, usize)]) -> Vec<Prediction> {
    cells
        .iter()
        .flat_map(|&(predicted, gold, k)| std::iter::repeat_n((predicted, gold), k))
        .enumerate()
        .map(|(i, (predicted, gold))| Prediction {
            sample_id: format!("s{i}"),
            predicted,
            gold,
        })
        .collect()
}

fn metrics_check() -> Outcome {
    let cases = [
        (
            "TP 3, FP 1, FN 1, TN 5",
            predictions(&[
                (true, true, 3),
                (true, false, 1),
                (false, true, 1),
                (false, false, 5),
            ]),
            0.8,
            0.75,
        ),
        (
            "all correct",
            predictions(&[(true, true, 4), (false, false, 6)]),
            1.0,
            1.0,
        ),
        (
            "all negative on a balanced set",
            predictions(&[(false, true, 5), (false, false, 5)]),
            0.5,
            0.0,
        ),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (name, preds, acc, f1) in cases {
        let m = metrics(&preds).unwrap();
        let ok = (m.acc - acc).abs() <= 1e-12 && (m.f1 - f1).abs() <= 1e-12;
        pass &= ok;
        detail += &format!("{name}: acc {} f1 {} (expected {acc}, {f1})\n", m.acc, m.f1);
    }
    Outcome::new(pass, detail)
}

fn scripted_end_to_end() -> Outcome {
    let start = Instant::now();
    let fixture =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden_shoes_rule1.jsonl");
    let records = from_jsonl(&std::fs::read_to_string(fixture).unwrap()).unwrap();
    let roles: Vec<Role> = records.iter().map(|r| r.role).unique().collect();
    let backend = ScriptedBackend::new(replay_script(&records));
    let config = ExperimentConfig {
        gen: golden_dataset().config,
        n_seeds: 1,
        mode: Mode::Llm,
        agents: AgentConfig::default(),
    };
    let report = run_experiment(&config, Some(&backend), None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let run = &report.per_run[0];
    let pass = !run.failed
        && run.acc == 1.0
        && backend.remaining() == 0
        && roles == [Role::Actor, Role::Critic, Role::Translator]
        && secs < 30.0;
    Outcome::new(
        pass,
        format!(
            "{} replayed calls ({} left), test acc {:.3}, {secs:.2}s\nlearned: {}",
            backend.calls(),
            backend.remaining(),
            run.acc,
            run.hypothesis_text.trim()
        ),
    )
}

fn check<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Result<(), String> {
    r.map_err(|e| format!("{e:?}"))
}

fn logic_properties() -> Outcome {
    const CASES: u32 = 1000;
    let mut detail = String::new();
    let mut pass = true;
    let mut record = |name: &str, r: Result<(), String>| {
        pass &= r.is_ok();
        detail += &format!(
            "{name}: {}\n",
            match r {
                Ok(()) => format!("{CASES} cases passed"),
                Err(e) => format!("failed: {e}"),
            }
        );
    };
    let runner = || {
        TestRunner::new(Config {
            failure_persistence: None,
            ..Config::with_cases(CASES)
        })
    };

    record(
        "clause round trip",
        check(runner().run(&common::clause(4, 4), |c| {
            prop_assert_eq!(parse_clause(&c.to_string()).unwrap(), c);
            Ok(())
        })),
    );
    record(
        "program round trip",
        check(
            runner().run(&prop::collection::vec(common::clause(4, 3), 0..4), |cs| {
                let p = Program::new(cs.into_iter().map(|mut c| {
                    c.head = Atom::new("h", vec![c.head.args[0].clone()]);
                    c
                }));
                prop_assert_eq!(parse_program(&p.to_string()).unwrap(), p);
                Ok(())
            }),
        ),
    );
    record(
        "fact base round trip",
        check(
            runner().run(&(common::fact_base(6), any::<u64>()), |(fb, mask)| {
                let fb = common::examples_for(&fb, 3, mask);
                prop_assert_eq!(parse_facts(&fb.to_string(), None).unwrap(), fb);
                Ok(())
            }),
        ),
    );
    record(
        "entailment against brute force",
        check(
            runner().run(&(common::fact_base(6), common::clause(6, 4)), |(fb, c)| {
                prop_assert_eq!(clause_entails(&c, &fb), common::brute_entails(&c, &fb));
                Ok(())
            }),
        ),
    );
    record(
        "coverage monotone in clauses",
        check(runner().run(
            &(
                common::fact_base(5),
                prop::collection::vec(common::clause(5, 3), 0..3),
                common::clause(5, 3),
                any::<u64>(),
            ),
            |(fb, cs, c, mask)| {
                let facts = common::examples_for(&fb, 5, mask);
                let p = Program::new(cs.clone());
                let q = Program::new(cs.into_iter().chain(std::iter::once(c)));
                let (pp, pn) = program_covers(&p, &facts);
                let (qp, qn) = program_covers(&q, &facts);
                prop_assert!(pp.is_subset(&qp) && pn.is_subset(&qn));
                Ok(())
            },
        )),
    );
    record(
        "coverage antitone in literals",
        check(runner().run(
            &(
                common::fact_base(5),
                common::clause(5, 3),
                common::body_atom(5),
            ),
            |(fb, c, extra)| {
                let mut longer = c.clone();
                longer.body.push(extra);
                prop_assert!(clause_entails(&longer, &fb).is_subset(&clause_entails(&c, &fb)));
                Ok(())
            },
        )),
    );
    Outcome::new(pass, detail)
}
