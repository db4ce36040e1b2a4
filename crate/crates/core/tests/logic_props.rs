//! Property tests for terms, parsing and clause evaluation.

mod common;

use proptest::prelude::*;

use common::{body_atom, brute_entails, clause, constant, examples_for, fact_base};
use rulesmith::datagen::Task;
use rulesmith::logic::{
    canonicalize, clause_entails, parse_bias, parse_clause, parse_facts, parse_program,
    program_covers, Atom, FactIndex, Program,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn clause_render_parse_round_trip(c in clause(4, 4)) {
        let parsed = parse_clause(&c.to_string()).unwrap();
        prop_assert_eq!(&parsed, &c);
        let canon = canonicalize(&c);
        prop_assert_eq!(canonicalize(&parse_clause(&canon.to_string()).unwrap()), canon.clone());
        prop_assert_eq!(canonicalize(&canon), canon);
    }

    #[test]
    fn program_render_parse_round_trip(cs in prop::collection::vec(clause(4, 3), 0..4)) {
        let p = Program::new(cs.into_iter().map(|c| {
            let mut c = c;
            c.head = Atom::new("h", vec![c.head.args[0].clone()]);
            c
        }));
        prop_assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn facts_render_parse_round_trip(fb in fact_base(6), mask in any::<u64>()) {
        let with_examples = examples_for(&fb, 3, mask);
        prop_assert_eq!(parse_facts(&with_examples.to_string(), None).unwrap(), with_examples);
    }

    #[test]
    fn entailment_matches_brute_force(fb in fact_base(6), c in clause(6, 4)) {
        prop_assert_eq!(clause_entails(&c, &fb), brute_entails(&c, &fb));
    }

    #[test]
    fn entailed_atoms_are_ground_heads(fb in fact_base(5), c in clause(5, 4)) {
        for a in clause_entails(&c, &fb) {
            prop_assert!(a.is_ground());
            prop_assert_eq!(&a.predicate, "h");
            prop_assert_eq!(a.arity(), c.head.arity());
        }
    }

    #[test]
    fn extra_literal_never_adds_coverage(
        fb in fact_base(5),
        c in clause(5, 3),
        extra in body_atom(5),
    ) {
        let mut longer = c.clone();
        longer.body.push(extra);
        let narrow = clause_entails(&longer, &fb);
        let wide = clause_entails(&c, &fb);
        prop_assert!(narrow.is_subset(&wide));
    }

    #[test]
    fn extra_clause_never_removes_coverage(
        fb in fact_base(5),
        cs in prop::collection::vec(clause(5, 3), 0..3),
        c in clause(5, 3),
        mask in any::<u64>(),
    ) {
        let facts = examples_for(&fb, 5, mask);
        let p = Program::new(cs.clone());
        let q = Program::new(cs.into_iter().chain(std::iter::once(c)));
        let (pp, pn) = program_covers(&p, &facts);
        let (qp, qn) = program_covers(&q, &facts);
        prop_assert!(pp.is_subset(&qp));
        prop_assert!(pn.is_subset(&qn));
    }

    #[test]
    fn proving_one_atom_agrees_with_entailment(
        fb in fact_base(5),
        c in clause(5, 4),
        a in 0usize..5,
        b in 0usize..5,
    ) {
        let idx = FactIndex::from_facts(&fb);
        let target = if c.head.arity() == 1 {
            Atom::ground("h", &[constant(a)])
        } else {
            Atom::ground("h", &[constant(a), constant(b)])
        };
        prop_assert_eq!(idx.proves(&c, &target), brute_entails(&c, &fb).contains(&target));
    }

    #[test]
    fn examples_are_not_background(fb in fact_base(4), c in clause(4, 3)) {
        // Labelled `p/1` atoms must not satisfy a `p` body atom.
        let mut with_examples = fb.clone();
        for i in 0..4 {
            let a = Atom::ground("p", &[constant(i)]);
            if !fb.background.contains(&a) {
                with_examples.add_example(a, true).unwrap();
            }
        }
        prop_assert_eq!(clause_entails(&c, &with_examples), clause_entails(&c, &fb));
    }
}

#[test]
fn ground_truth_biases_round_trip() {
    for (task, rules) in [(Task::Shoes, 1..=3), (Task::Zendo, 1..=3)] {
        for r in rules {
            let bias = task.ground_truth_bias(r);
            assert_eq!(
                parse_bias(&bias.to_string()).unwrap(),
                bias,
                "{task} rule {r}"
            );
            let program = task.ground_truth_program(r);
            assert_eq!(parse_program(&program.to_string()).unwrap(), program);
        }
    }
}
