//! Random terms, clauses and fact bases shared by the logic property suites,
//! with a brute-force substitution enumerator as the entailment oracle.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use rulesmith::logic::{Atom, Clause, FactBase, Term};

/// Predicates with their arities.
pub const PREDS: &[(&str, usize)] = &[("p", 1), ("q", 2), ("r", 2), ("s", 1), ("t", 3)];
pub const VARS: &[&str] = &["A", "B", "C", "D"];

pub fn constant(i: usize) -> String {
    format!("c{i}")
}

pub fn fact_base(n_consts: usize) -> impl Strategy<Value = FactBase> {
    let atom = (0..PREDS.len(), prop::collection::vec(0..n_consts, 3)).prop_map(|(p, args)| {
        let (name, arity) = PREDS[p];
        Atom::ground(
            name,
            &args[..arity]
                .iter()
                .map(|&i| constant(i))
                .collect::<Vec<_>>(),
        )
    });
    prop::collection::vec(atom, 0..30).prop_map(|atoms| {
        let mut fb = FactBase::new();
        for a in atoms {
            fb.add_background(a).unwrap();
        }
        fb
    })
}

/// A term: mostly variables, sometimes a known or unknown constant.
pub fn term(n_consts: usize) -> impl Strategy<Value = Term> {
    prop_oneof![
        6 => (0..VARS.len()).prop_map(|i| Term::var(VARS[i])),
        1 => (0..n_consts).prop_map(|i| Term::constant(constant(i))),
        1 => Just(Term::constant("zz")),
    ]
}

pub fn body_atom(n_consts: usize) -> impl Strategy<Value = Atom> {
    (0..PREDS.len(), prop::collection::vec(term(n_consts), 3)).prop_map(|(p, args)| {
        let (name, arity) = PREDS[p];
        Atom::new(name, args[..arity].to_vec())
    })
}

/// A range-restricted clause with head `h/1` or `h/2` over body variables.
pub fn clause(n_consts: usize, max_body: usize) -> impl Strategy<Value = Clause> {
    (
        prop::collection::vec(body_atom(n_consts), 1..=max_body),
        1usize..=2,
        any::<prop::sample::Index>(),
        any::<prop::sample::Index>(),
    )
        .prop_filter_map("body binds no variable", |(body, arity, i, j)| {
            let vars: Vec<String> = body
                .iter()
                .flat_map(|a| a.vars().map(String::from).collect::<Vec<_>>())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if vars.is_empty() {
                return None;
            }
            let mut head = vec![Term::var(&vars[i.index(vars.len())])];
            if arity == 2 {
                head.push(Term::var(&vars[j.index(vars.len())]));
            }
            Some(Clause::new(Atom::new("h", head), body))
        })
}

/// Every ground head instance of `clause`, by trying all substitutions of
/// its variables with constants of the background.
pub fn brute_entails(clause: &Clause, facts: &FactBase) -> BTreeSet<Atom> {
    let consts: Vec<String> = facts
        .background
        .iter()
        .flat_map(|a| a.args.iter().map(|t| t.name().to_string()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let vars = clause.vars();
    let mut out = BTreeSet::new();
    if consts.is_empty() {
        return out;
    }
    let ground = |a: &Atom, sub: &BTreeMap<&str, &str>| {
        Atom::new(
            a.predicate.clone(),
            a.args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => Term::constant(sub[v.as_str()]),
                    c => c.clone(),
                })
                .collect(),
        )
    };
    let mut idx = vec![0usize; vars.len()];
    loop {
        let sub: BTreeMap<&str, &str> = vars
            .iter()
            .zip(&idx)
            .map(|(v, &i)| (v.as_str(), consts[i].as_str()))
            .collect();
        if clause
            .body
            .iter()
            .all(|a| facts.background.contains(&ground(a, &sub)))
        {
            out.insert(ground(&clause.head, &sub));
        }
        // Next substitution, odometer style.
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < consts.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            return out;
        }
    }
}

pub fn examples_for(facts: &FactBase, n_consts: usize, pos_mask: u64) -> FactBase {
    let mut fb = facts.clone();
    let mut bit = 0;
    for a in 0..n_consts {
        for b in 0..n_consts {
            let atom = Atom::ground("h", &[constant(a), constant(b)]);
            fb.add_example(atom, pos_mask >> (bit % 64) & 1 == 1)
                .unwrap();
            bit += 1;
        }
    }
    fb
}
