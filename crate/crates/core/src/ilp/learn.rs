//! End-to-end rule learning: guided enumeration, scoring, search and
//! specialization of the selected clauses.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::logic::canon::{canonical_body, var_name, Arg, Lit};
use crate::logic::{Atom, BiasSpec, Clause, FactBase, Program, Term};

use super::enumerate::{next_level, Vocab};
use super::search::{mdl_cost, reduce_pool, search_exact, search_greedy};
use super::{CoverageVector, Examples, Hypothesis, LearnError, SearchBudget};

/// Configurable learner. [`learn`] uses the defaults.
#[derive(Clone, Debug)]
pub struct Learner {
    budget: SearchBudget,
    specialize: bool,
}

impl Default for Learner {
    fn default() -> Self {
        Learner::new(SearchBudget::default())
    }
}

impl Learner {
    pub fn new(budget: SearchBudget) -> Self {
        Learner {
            budget,
            specialize: true,
        }
    }

    /// After search, extend each selected clause with literals that keep
    /// its training coverage unchanged but restrict its variable bindings.
    /// On by default.
    pub fn specialize(mut self, on: bool) -> Self {
        self.specialize = on;
        self
    }

    pub fn budget(&self) -> &SearchBudget {
        &self.budget
    }

    pub fn learn(&self, bias: &BiasSpec, facts: &FactBase) -> Result<Hypothesis, LearnError> {
        let violations = bias.violations();
        if !violations.is_empty() {
            return Err(LearnError::UnusableBias(
                violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            ));
        }
        if facts.pos.is_empty() && facts.neg.is_empty() {
            return Ok(Hypothesis::empty(0));
        }
        let start = Instant::now();
        let deadline = start + self.budget.time_limit;
        let vocab = Vocab::new(bias);
        let ex = Examples::new(facts);
        let (n_pos, n_neg) = (ex.pos.len(), ex.neg.len());

        let pool = guided_pool(&vocab, &ex, &self.budget, deadline);
        if !pool.any_clause {
            return Err(LearnError::UnusableBias(
                "the bias admits no range-restricted clause".to_string(),
            ));
        }
        log::info!(
            "{} useful candidates from {} evaluated{}",
            pool.entries.len(),
            pool.evaluated,
            if pool.truncated { " (truncated)" } else { "" }
        );
        let bodies: HashMap<String, Vec<Lit>> = pool
            .entries
            .iter()
            .map(|(b, v)| (v.clause.to_string(), b.clone()))
            .collect();
        let vectors = reduce_pool(pool.entries.into_iter().map(|(_, v)| v).collect());
        log::info!("{} candidates after dominance reduction", vectors.len());

        let mut hyp = if vectors.len() <= self.budget.exact_threshold {
            let remaining = SearchBudget {
                time_limit: deadline
                    .saturating_duration_since(Instant::now())
                    .max(Duration::from_millis(1)),
                ..self.budget.clone()
            };
            search_exact(&vectors, n_pos, n_neg, bias, &remaining)
        } else {
            search_greedy(&vectors, n_pos, n_neg, bias)
        };
        if pool.truncated {
            hyp.optimal = false;
        }

        if self.specialize && !hyp.program.is_empty() {
            let mut selected: Vec<CoverageVector> = hyp
                .program
                .clauses()
                .iter()
                .map(|c| {
                    vectors
                        .iter()
                        .find(|v| v.clause == *c)
                        .expect("selected clause comes from the pool")
                        .clone()
                })
                .collect();
            for i in 0..selected.len() {
                let mut others = FixedBitSet::with_capacity(n_neg);
                for (j, v) in selected.iter().enumerate() {
                    if j != i {
                        others.union_with(&v.neg_bits);
                    }
                }
                let body = &bodies[&selected[i].clause.to_string()];
                selected[i] = specialize(&vocab, &ex, body, &selected[i], &others);
            }
            let refs: Vec<&CoverageVector> = selected.iter().collect();
            let cost = mdl_cost(&refs, n_pos, n_neg);
            hyp = Hypothesis {
                program: Program::new(selected.iter().map(|v| v.clause.clone())),
                cost: cost.cost,
                size: cost.size,
                fp: cost.fp,
                fn_: cost.fn_,
                optimal: hyp.optimal,
            };
        }
        log::info!(
            "learned cost {} (size {}, fp {}, fn {}) in {:.2?}",
            hyp.cost,
            hyp.size,
            hyp.fp,
            hyp.fn_,
            start.elapsed()
        );

        if hyp.is_failure(n_pos) {
            let reason = if hyp.program.is_empty() {
                "no clause pays for itself on the training examples".to_string()
            } else {
                "search stopped early without beating the empty program".to_string()
            };
            return Err(LearnError::Failed {
                reason,
                hypothesis: Box::new(hyp),
            });
        }
        Ok(hyp)
    }
}

/// Learns a minimum description length program for the examples in
/// `facts` using clauses allowed by `bias`.
pub fn learn(
    bias: &BiasSpec,
    facts: &FactBase,
    budget: &SearchBudget,
) -> Result<Hypothesis, LearnError> {
    Learner::new(budget.clone()).learn(bias, facts)
}

struct Pool {
    entries: Vec<(Vec<Lit>, CoverageVector)>,
    evaluated: usize,
    truncated: bool,
    any_clause: bool,
}

/// Level-wise enumeration that skips the refinements of a clause when no
/// refinement could enter an optimal program: a refinement covers a subset
/// of its parent's positives and negatives and is one literal longer, so
/// it is useless when the parent covers no negatives (the parent is at
/// least as good) or covers at most `size + 1` positives (the refinement
/// cannot cover more positives than its own size).
fn guided_pool(vocab: &Vocab, ex: &Examples, budget: &SearchBudget, deadline: Instant) -> Pool {
    let mut pool = Pool {
        entries: Vec::new(),
        evaluated: 0,
        truncated: false,
        any_clause: false,
    };
    let mut frontier: Vec<Vec<Lit>> = vec![Vec::new()];
    for _ in 0..vocab.max_body {
        if frontier.is_empty() {
            break;
        }
        let mut level = next_level(vocab, &frontier);
        let room = budget.max_candidates.saturating_sub(pool.evaluated);
        if level.len() > room {
            level.truncate(room);
            pool.truncated = true;
        }
        pool.evaluated += level.len();
        let scored: Vec<Option<CoverageVector>> = level
            .par_iter()
            .map(|b| {
                vocab
                    .is_range_restricted(b)
                    .then(|| ex.cover(vocab.to_clause(b)))
            })
            .collect();
        frontier.clear();
        for (body, cov) in level.into_iter().zip(scored) {
            let Some(v) = cov else {
                frontier.push(body);
                continue;
            };
            pool.any_clause = true;
            let (p, n) = (v.n_pos(), v.n_neg());
            if p > v.size + 1 && n > 0 {
                frontier.push(body.clone());
            }
            if p > v.size {
                pool.entries.push((body, v));
            }
        }
        if pool.truncated {
            break;
        }
        if Instant::now() >= deadline {
            pool.truncated = true;
            break;
        }
    }
    pool
}

fn n_vars(body: &[Lit], n_head: u32) -> u32 {
    body.iter()
        .flat_map(|l| l.args.iter())
        .filter_map(|a| match *a {
            Arg::V(v) => Some(v + 1),
            Arg::C(_) => None,
        })
        .max()
        .unwrap_or(0)
        .max(n_head)
}

/// Number of distinct bindings of variables `0..k` satisfying `body`.
fn bindings(vocab: &Vocab, ex: &Examples, body: &[Lit], k: u32) -> usize {
    let head = Atom::new(
        "binding",
        (0..k as usize).map(|i| Term::Var(var_name(i))).collect(),
    );
    ex.index
        .entails(&Clause::new(head, vocab.atoms(body)))
        .len()
}

/// Extensions of `body` by one literal over existing variables, or by a
/// literal introducing one fresh variable plus a literal constraining it.
fn extensions(vocab: &Vocab, body: &[Lit]) -> Vec<Vec<Lit>> {
    let k = n_vars(body, vocab.n_head());
    let mut out = Vec::new();
    for child in vocab.refinements(body) {
        let ck = n_vars(&child, vocab.n_head());
        if ck == k {
            out.push(child);
        } else if ck == k + 1 {
            for grand in vocab.refinements(&child) {
                let last = grand.last().expect("refinement adds a literal");
                if n_vars(&grand, vocab.n_head()) == k + 1 && last.args.contains(&Arg::V(k)) {
                    out.push(grand);
                }
            }
        }
    }
    let mut seen = HashSet::new();
    out.retain(|b| {
        let mut key = b.clone();
        key.sort();
        seen.insert(key)
    });
    out
}

/// Narrows a selected clause in two greedy phases, never losing a
/// covered positive.
///
/// First, literals are added while each addition removes at least as many
/// program-level false positives as literals it adds, so the cost does not
/// rise (`others_neg` holds the negatives covered by the other clauses).
/// Then literals are added that leave the training coverage unchanged but
/// restrict the clause: the extension must reduce the bindings of the
/// clause's current variables, unless it is a single unary literal on an
/// existing variable. Attribute tests are how the least general clause
/// over the covered examples is reached when every object is itself an
/// example, whereas a relational literal that restricts nothing (such as
/// the mirror of a symmetric relation) is redundant.
///
/// Each step prefers the extension that removes the most false positives,
/// then leaves the fewest bindings, then adds fewer literals, then comes
/// first in canonical order.
fn specialize(
    vocab: &Vocab,
    ex: &Examples,
    body: &[Lit],
    cov: &CoverageVector,
    others_neg: &FixedBitSet,
) -> CoverageVector {
    let n_head = vocab.n_head();
    let mut body = canonical_body(n_head, body);
    let mut best = cov.clone();
    let fp_with = |neg: &FixedBitSet| others_neg.union_count(neg);
    for trim in [true, false] {
        loop {
            let k = n_vars(&body, n_head);
            let current = bindings(vocab, ex, &body, k);
            let fp_now = fp_with(&best.neg_bits);
            let scored: Vec<Option<(usize, usize, usize, Vec<Lit>, CoverageVector)>> =
                extensions(vocab, &body)
                    .par_iter()
                    .map(|ext| {
                        let v = ex.cover(vocab.to_clause(ext));
                        if v.pos_bits != best.pos_bits {
                            return None;
                        }
                        let added = ext.len() - body.len();
                        let b = bindings(vocab, ex, ext, k);
                        let removed = fp_now - fp_with(&v.neg_bits);
                        let ok = if trim {
                            removed > 0 && removed >= added
                        } else {
                            let attribute = added == 1 && ext[body.len()].args.len() == 1;
                            v.neg_bits == best.neg_bits && (b < current || attribute)
                        };
                        ok.then(|| {
                            (
                                usize::MAX - removed,
                                b,
                                ext.len(),
                                canonical_body(n_head, ext),
                                v,
                            )
                        })
                    })
                    .collect();
            let Some((_, _, _, next, v)) = scored
                .into_iter()
                .flatten()
                .min_by(|a, b| (a.0, a.1, a.2, &a.3).cmp(&(b.0, b.1, b.2, &b.3)))
            else {
                break;
            };
            log::debug!("specialized to {}", v.clause);
            body = next;
            best = v;
        }
    }
    best
}
