//! Canonical forms of clauses modulo variable renaming and body order.
//!
//! Head variables keep their head positions. The remaining variables are
//! partitioned by a renaming-invariant structural signature (colour
//! refinement over the atoms they occur in); only variables with equal
//! signatures are permuted against each other, and the lexicographically
//! least sorted body over those permutations is the canonical key.

use std::collections::HashMap;

use itertools::Itertools;

use super::term::{Atom, Clause, Term};

/// Argument of a compact literal. Variables sort before constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Arg {
    V(u32),
    C(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Lit {
    pub pred: u32,
    pub args: Vec<Arg>,
}

/// Canonical body for a clause whose head variables are `0..n_head`.
/// Returns the sorted body with non-head variables renumbered
/// `n_head..`; two inputs equal modulo renaming of non-head variables and
/// body order produce identical outputs.
pub(crate) fn canonical_body(n_head: u32, body: &[Lit]) -> Vec<Lit> {
    let mut free: Vec<u32> = Vec::new();
    for lit in body {
        for a in &lit.args {
            if let Arg::V(v) = *a {
                if v >= n_head && !free.contains(&v) {
                    free.push(v);
                }
            }
        }
    }
    if free.is_empty() {
        let mut out = body.to_vec();
        out.sort();
        return out;
    }

    let ranks = refine_ranks(n_head, body, &free);
    // Group free variables by rank; classes ordered by rank.
    let mut classes: Vec<Vec<u32>> = Vec::new();
    let mut order: Vec<(usize, u32)> = free.iter().map(|v| (ranks[v], *v)).collect();
    order.sort();
    for (_, group) in &order.iter().chunk_by(|(r, _)| *r) {
        classes.push(group.map(|(_, v)| *v).collect());
    }

    let mut best: Option<Vec<Lit>> = None;
    let class_perms: Vec<Vec<Vec<u32>>> = classes
        .iter()
        .map(|c| c.iter().copied().permutations(c.len()).collect())
        .collect();
    let mut mapping: HashMap<u32, u32> = HashMap::with_capacity(free.len());
    for choice in class_perms.iter().multi_cartesian_product() {
        mapping.clear();
        let mut next = n_head;
        for perm in choice {
            for v in perm {
                mapping.insert(*v, next);
                next += 1;
            }
        }
        let mut renamed: Vec<Lit> = body
            .iter()
            .map(|l| Lit {
                pred: l.pred,
                args: l
                    .args
                    .iter()
                    .map(|a| match *a {
                        Arg::V(v) if v >= n_head => Arg::V(mapping[&v]),
                        other => other,
                    })
                    .collect(),
            })
            .collect();
        renamed.sort();
        if best.as_ref().is_none_or(|b| renamed < *b) {
            best = Some(renamed);
        }
    }
    best.unwrap_or_default()
}

/// Colour refinement over free variables. Returns a dense rank per
/// variable that is invariant under renaming.
fn refine_ranks(n_head: u32, body: &[Lit], free: &[u32]) -> HashMap<u32, usize> {
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum Tok {
        Head(u32),
        Free(usize),
        Const(u32),
    }

    let mut ranks: HashMap<u32, usize> = free.iter().map(|v| (*v, 0)).collect();
    let mut n_classes = 1;
    loop {
        let mut sigs: Vec<(Vec<(u32, usize, Vec<Tok>)>, u32)> = Vec::with_capacity(free.len());
        for v in free {
            let mut occ: Vec<(u32, usize, Vec<Tok>)> = Vec::new();
            for lit in body {
                for (pos, a) in lit.args.iter().enumerate() {
                    if *a == Arg::V(*v) {
                        let toks = lit
                            .args
                            .iter()
                            .map(|b| match *b {
                                Arg::V(w) if w < n_head => Tok::Head(w),
                                Arg::V(w) => Tok::Free(ranks[&w]),
                                Arg::C(c) => Tok::Const(c),
                            })
                            .collect();
                        occ.push((lit.pred, pos, toks));
                    }
                }
            }
            occ.sort();
            sigs.push((occ, *v));
        }
        let mut distinct: Vec<&Vec<(u32, usize, Vec<Tok>)>> = sigs.iter().map(|(s, _)| s).collect();
        distinct.sort();
        distinct.dedup();
        let count = distinct.len();
        let new_ranks: HashMap<u32, usize> = sigs
            .iter()
            .map(|(s, v)| (*v, distinct.binary_search(&s).expect("signature present")))
            .collect();
        ranks = new_ranks;
        if count == n_classes || count == free.len() {
            break;
        }
        n_classes = count;
    }
    ranks
}

/// Name for the i-th variable in canonical order: A..Z, then V26, V27...
pub fn var_name(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("V{i}")
    }
}

/// Canonical representative of a clause: body sorted by predicate name
/// and argument pattern, variables renamed A, B, C... in first-occurrence
/// order. Idempotent; equal for clauses equal up to renaming and body
/// permutation.
pub fn canonicalize(clause: &Clause) -> Clause {
    let mut preds: Vec<&str> = std::iter::once(clause.head.predicate.as_str())
        .chain(clause.body.iter().map(|a| a.predicate.as_str()))
        .collect();
    preds.sort();
    preds.dedup();
    let mut consts: Vec<&str> = std::iter::once(&clause.head)
        .chain(clause.body.iter())
        .flat_map(|a| a.args.iter())
        .filter_map(|t| match t {
            Term::Const(c) => Some(c.as_str()),
            Term::Var(_) => None,
        })
        .collect();
    consts.sort();
    consts.dedup();

    let mut var_ids: HashMap<&str, u32> = HashMap::new();
    for v in clause.head.vars() {
        let n = var_ids.len() as u32;
        var_ids.entry(v).or_insert(n);
    }
    let n_head = var_ids.len() as u32;
    for a in &clause.body {
        for v in a.vars() {
            let n = var_ids.len() as u32;
            var_ids.entry(v).or_insert(n);
        }
    }
    let pred_id = |p: &str| preds.binary_search(&p).expect("pred interned") as u32;
    let to_arg = |t: &Term| match t {
        Term::Var(v) => Arg::V(var_ids[v.as_str()]),
        Term::Const(c) => Arg::C(consts.binary_search(&c.as_str()).expect("const interned") as u32),
    };
    let body: Vec<Lit> = clause
        .body
        .iter()
        .map(|a| Lit {
            pred: pred_id(&a.predicate),
            args: a.args.iter().map(to_arg).collect(),
        })
        .collect();
    let head_args: Vec<Arg> = clause.head.args.iter().map(to_arg).collect();
    let canon = canonical_body(n_head, &body);

    // First-occurrence renaming over head then canonical body.
    let mut names: HashMap<u32, String> = HashMap::new();
    let name_of = |v: u32, names: &mut HashMap<u32, String>| -> String {
        let n = names.len();
        names.entry(v).or_insert_with(|| var_name(n)).clone()
    };
    let render_args = |args: &[Arg], names: &mut HashMap<u32, String>| -> Vec<Term> {
        args.iter()
            .map(|a| match *a {
                Arg::V(v) => Term::Var(name_of(v, names)),
                Arg::C(c) => Term::Const(consts[c as usize].to_string()),
            })
            .collect()
    };
    let head = Atom::new(
        clause.head.predicate.clone(),
        render_args(&head_args, &mut names),
    );
    let body = canon
        .iter()
        .map(|l| Atom::new(preds[l.pred as usize], render_args(&l.args, &mut names)))
        .collect();
    Clause::new(head, body)
}
