//! Candidate clause generation under a language bias.
//!
//! Clauses are grown one body literal at a time. A literal may be added
//! when its `in` arguments are already bound (head `in` variables or any
//! body variable), it shares at least one variable with the clause so far,
//! its argument types match, and the variable budget allows any fresh `out`
//! variables. Every level is deduplicated by canonical form, so each clause
//! up to renaming and body order is produced once, in increasing body size.

use std::collections::{HashMap, HashSet};

use crate::logic::bias::{BiasSpec, Direction};
use crate::logic::canon::{canonical_body, canonicalize, var_name, Arg, Lit};
use crate::logic::term::{Atom, Clause, Term};

use super::{IlpError, SearchBudget};

#[derive(Clone, Debug)]
pub(crate) struct Sig {
    pub name: String,
    pub types: Vec<u32>,
    pub dirs: Vec<Direction>,
}

/// A bias compiled to integer ids: body predicates sorted by name so that
/// id order matches name order, types interned.
#[derive(Clone, Debug)]
pub(crate) struct Vocab {
    pub head: Sig,
    pub body: Vec<Sig>,
    pub max_vars: usize,
    pub max_body: usize,
}

impl Vocab {
    pub fn new(bias: &BiasSpec) -> Self {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut intern = |types: &[String]| -> Vec<u32> {
            types
                .iter()
                .map(|t| {
                    let n = ids.len() as u32;
                    *ids.entry(t.clone()).or_insert(n)
                })
                .collect()
        };
        let head = Sig {
            name: bias.head.name.clone(),
            types: intern(&bias.head.arg_types),
            dirs: bias.head.directions.clone(),
        };
        let mut body: Vec<Sig> = bias
            .body
            .iter()
            .filter(|s| s.name != bias.head.name)
            .map(|s| Sig {
                name: s.name.clone(),
                types: intern(&s.arg_types),
                dirs: s.directions.clone(),
            })
            .collect();
        body.sort_by(|a, b| a.name.cmp(&b.name));
        Vocab {
            head,
            body,
            max_vars: bias.max_vars,
            max_body: bias.max_body,
        }
    }

    pub fn n_head(&self) -> u32 {
        self.head.types.len() as u32
    }

    /// Type of each variable, derived from its occurrences.
    pub fn var_types(&self, body: &[Lit]) -> Vec<u32> {
        let mut types: Vec<u32> = self.head.types.clone();
        for lit in body {
            for (pos, a) in lit.args.iter().enumerate() {
                if let Arg::V(v) = *a {
                    let v = v as usize;
                    if v >= types.len() {
                        types.resize(v + 1, u32::MAX);
                    }
                    types[v] = self.body[lit.pred as usize].types[pos];
                }
            }
        }
        types
    }

    pub fn is_range_restricted(&self, body: &[Lit]) -> bool {
        (0..self.n_head()).all(|h| body.iter().any(|l| l.args.contains(&Arg::V(h))))
    }

    /// All one-literal extensions of `body` allowed by the bias.
    pub fn refinements(&self, body: &[Lit]) -> Vec<Vec<Lit>> {
        if body.len() >= self.max_body {
            return Vec::new();
        }
        let types = self.var_types(body);
        let n_vars = types.len() as u32;
        let n_head = self.n_head();
        let in_body: HashSet<u32> = body
            .iter()
            .flat_map(|l| l.args.iter())
            .filter_map(|a| match *a {
                Arg::V(v) => Some(v),
                Arg::C(_) => None,
            })
            .collect();
        let bound = |v: u32| -> bool {
            in_body.contains(&v) || (v < n_head && self.head.dirs[v as usize] == Direction::In)
        };

        let mut out = Vec::new();
        for (pid, sig) in self.body.iter().enumerate() {
            let mut args: Vec<Arg> = Vec::with_capacity(sig.types.len());
            self.fill_args(sig, 0, n_vars, &types, &bound, &mut args, &mut |args| {
                let lit = Lit {
                    pred: pid as u32,
                    args: args.to_vec(),
                };
                let shares = lit
                    .args
                    .iter()
                    .any(|a| matches!(*a, Arg::V(v) if v < n_vars));
                if shares && !body.contains(&lit) {
                    let mut child = body.to_vec();
                    child.push(lit);
                    out.push(child);
                }
            });
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_args(
        &self,
        sig: &Sig,
        pos: usize,
        next_var: u32,
        types: &[u32],
        bound: &dyn Fn(u32) -> bool,
        args: &mut Vec<Arg>,
        emit: &mut dyn FnMut(&[Arg]),
    ) {
        if pos == sig.types.len() {
            emit(args);
            return;
        }
        let t = sig.types[pos];
        let n_existing = types.len() as u32;
        for v in 0..n_existing {
            if types[v as usize] != t {
                continue;
            }
            if sig.dirs[pos] == Direction::In && !bound(v) {
                continue;
            }
            args.push(Arg::V(v));
            self.fill_args(sig, pos + 1, next_var, types, bound, args, emit);
            args.pop();
        }
        if sig.dirs[pos] == Direction::Out {
            // Fresh variables introduced earlier in this same literal.
            for v in n_existing..next_var {
                let same_type = sig.types[..pos]
                    .iter()
                    .zip(args.iter())
                    .any(|(pt, a)| *a == Arg::V(v) && *pt == t);
                if same_type {
                    args.push(Arg::V(v));
                    self.fill_args(sig, pos + 1, next_var, types, bound, args, emit);
                    args.pop();
                }
            }
            if (next_var as usize) < self.max_vars {
                args.push(Arg::V(next_var));
                self.fill_args(sig, pos + 1, next_var + 1, types, bound, args, emit);
                args.pop();
            }
        }
    }

    pub fn to_clause(&self, body: &[Lit]) -> Clause {
        let head = Atom::new(
            self.head.name.clone(),
            (0..self.n_head() as usize)
                .map(|i| Term::Var(var_name(i)))
                .collect(),
        );
        canonicalize(&Clause::new(head, self.atoms(body)))
    }

    pub fn atoms(&self, body: &[Lit]) -> Vec<Atom> {
        body.iter()
            .map(|l| {
                Atom::new(
                    self.body[l.pred as usize].name.clone(),
                    l.args
                        .iter()
                        .map(|a| match *a {
                            Arg::V(v) => Term::Var(var_name(v as usize)),
                            Arg::C(_) => unreachable!("bias clauses carry no constants"),
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

/// Canonical, deduplicated one-literal extensions of every body in
/// `level`, in sorted order.
pub(crate) fn next_level(vocab: &Vocab, level: &[Vec<Lit>]) -> Vec<Vec<Lit>> {
    let n_head = vocab.n_head();
    let mut seen: HashSet<Vec<Lit>> = HashSet::new();
    for body in level {
        for child in vocab.refinements(body) {
            seen.insert(canonical_body(n_head, &child));
        }
    }
    let mut next: Vec<Vec<Lit>> = seen.into_iter().collect();
    next.sort();
    next
}

/// Every range-restricted, connected, mode-respecting clause allowed by
/// the bias, shortest bodies first, truncated at `budget.max_candidates`.
pub fn enumerate_candidates(
    bias: &BiasSpec,
    budget: &SearchBudget,
) -> Result<Vec<Clause>, IlpError> {
    let violations = bias.violations();
    if !violations.is_empty() {
        return Err(IlpError::UnusableBias(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    let vocab = Vocab::new(bias);
    let mut out: Vec<Clause> = Vec::new();
    let mut level: Vec<Vec<Lit>> = vec![Vec::new()];
    'levels: for _ in 0..vocab.max_body {
        level = next_level(&vocab, &level);
        if level.is_empty() {
            break;
        }
        for body in &level {
            if vocab.is_range_restricted(body) {
                if out.len() >= budget.max_candidates {
                    break 'levels;
                }
                out.push(vocab.to_clause(body));
            }
        }
    }
    if out.is_empty() {
        return Err(IlpError::UnusableBias(
            "the bias admits no range-restricted clause".to_string(),
        ));
    }
    Ok(out)
}
