//! Subset selection over a scored candidate pool.

use std::cmp::Ordering;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::logic::{BiasSpec, Program};

use super::{CoverageVector, Hypothesis, SearchBudget};

/// Cost breakdown of a selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cost {
    pub cost: usize,
    pub size: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

pub fn mdl_cost(selection: &[&CoverageVector], n_pos: usize, n_neg: usize) -> Cost {
    let mut pos = FixedBitSet::with_capacity(n_pos);
    let mut neg = FixedBitSet::with_capacity(n_neg);
    let mut size = 0;
    for v in selection {
        pos.union_with(&v.pos_bits);
        neg.union_with(&v.neg_bits);
        size += v.size;
    }
    let fp = neg.count_ones(..);
    let fn_ = n_pos - pos.count_ones(..);
    Cost {
        cost: size + fp + fn_,
        size,
        fp,
        fn_,
    }
}

/// Ordering key for selections: cost, then size, then the sorted list of
/// clause renderings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    cost: usize,
    size: usize,
    render: Vec<String>,
}

struct Item {
    /// Index into the caller's vectors.
    src: usize,
    pos: FixedBitSet,
    neg: FixedBitSet,
    size: usize,
    render: String,
}

fn key_of(items: &[Item], sel: &[usize], n_pos: usize) -> Key {
    let mut pos = FixedBitSet::with_capacity(n_pos);
    let mut neg = FixedBitSet::new();
    let mut size = 0;
    let mut render = Vec::with_capacity(sel.len());
    for &i in sel {
        pos.union_with(&items[i].pos);
        neg.union_with(&items[i].neg);
        size += items[i].size;
        render.push(items[i].render.clone());
    }
    render.sort();
    Key {
        cost: size + neg.count_ones(..) + n_pos - pos.count_ones(..),
        size,
        render,
    }
}

fn items_of(vectors: &[CoverageVector]) -> Vec<Item> {
    vectors
        .iter()
        .enumerate()
        .map(|(src, v)| Item {
            src,
            pos: v.pos_bits.clone(),
            neg: v.neg_bits.clone(),
            size: v.size,
            render: v.clause.to_string(),
        })
        .collect()
}

/// Drops clauses that can never appear in a least (cost, size) selection:
/// those covering no more positives than their own size, all but the
/// least rendering among clauses with identical coverage and size, and
/// clauses dominated by another (covers a superset of positives, a subset
/// of negatives, no larger, and differs in at least one of the three).
fn reduce(mut items: Vec<Item>) -> Vec<Item> {
    items.retain(|it| it.pos.count_ones(..) > it.size);
    items.sort_by(|a, b| (a.size, &a.render).cmp(&(b.size, &b.render)));
    let mut keep: Vec<Item> = Vec::with_capacity(items.len());
    for it in items {
        if keep
            .iter()
            .any(|k| k.pos == it.pos && k.neg == it.neg && k.size <= it.size)
        {
            continue;
        }
        keep.push(it);
    }
    let n = keep.len();
    let mut dominated = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || dominated[j] {
                continue;
            }
            let (c, d) = (&keep[i], &keep[j]);
            if d.size <= c.size && c.pos.is_subset(&d.pos) && d.neg.is_subset(&c.neg) {
                let strict = d.size < c.size || c.pos != d.pos || c.neg != d.neg;
                if strict {
                    dominated[i] = true;
                    break;
                }
            }
        }
    }
    keep.into_iter()
        .zip(dominated)
        .filter_map(|(it, d)| (!d).then_some(it))
        .collect()
}

/// The clauses of `vectors` that survive [`reduce`], in input order.
pub(crate) fn reduce_pool(vectors: Vec<CoverageVector>) -> Vec<CoverageVector> {
    let mut keep: Vec<usize> = reduce(items_of(&vectors)).iter().map(|it| it.src).collect();
    keep.sort_unstable();
    let mut vectors: Vec<Option<CoverageVector>> = vectors.into_iter().map(Some).collect();
    keep.into_iter()
        .map(|i| vectors[i].take().expect("kept once"))
        .collect()
}

fn greedy_select(items: &[Item], n_pos: usize, max_clauses: usize) -> Vec<usize> {
    let mut sel: Vec<usize> = Vec::new();
    let mut pos = FixedBitSet::with_capacity(n_pos);
    let mut neg = FixedBitSet::new();
    let mut size = 0usize;
    let mut cost = n_pos;
    while sel.len() < max_clauses {
        let mut best: Option<(usize, usize, &str, usize)> = None;
        for (i, it) in items.iter().enumerate() {
            if sel.contains(&i) {
                continue;
            }
            let new_pos = pos.union_count(&it.pos);
            let new_neg = neg.union_count(&it.neg);
            let c = size + it.size + new_neg + n_pos - new_pos;
            let cand = (c, it.size, it.render.as_str(), i);
            if best.is_none_or(|b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2)) {
                best = Some(cand);
            }
        }
        match best {
            Some((c, _, _, i)) if c < cost => {
                pos.union_with(&items[i].pos);
                neg.union_with(&items[i].neg);
                size += items[i].size;
                cost = c;
                sel.push(i);
            }
            _ => break,
        }
    }
    sel
}

fn hypothesis(
    vectors: &[CoverageVector],
    chosen: impl IntoIterator<Item = usize>,
    n_pos: usize,
    n_neg: usize,
    optimal: bool,
) -> Hypothesis {
    let sel: Vec<&CoverageVector> = chosen.into_iter().map(|i| &vectors[i]).collect();
    let c = mdl_cost(&sel, n_pos, n_neg);
    Hypothesis {
        program: Program::new(sel.iter().map(|v| v.clause.clone())),
        cost: c.cost,
        size: c.size,
        fp: c.fp,
        fn_: c.fn_,
        optimal,
    }
}

/// Adds the clause with the largest cost decrease until none decreases
/// the cost or `max_clauses` is reached.
pub fn search_greedy(
    vectors: &[CoverageVector],
    n_pos: usize,
    n_neg: usize,
    bias: &BiasSpec,
) -> Hypothesis {
    let items = items_of(vectors);
    let sel = greedy_select(&items, n_pos, bias.max_clauses);
    hypothesis(
        vectors,
        sel.iter().map(|&i| items[i].src),
        n_pos,
        n_neg,
        false,
    )
}

struct BranchAndBound<'a> {
    items: &'a [Item],
    /// For each positive example, the items covering it.
    covering: Vec<Vec<usize>>,
    n_pos: usize,
    max_clauses: usize,
    best: Key,
    best_sel: Vec<usize>,
    deadline: Instant,
    nodes: u64,
    timed_out: bool,
}

impl BranchAndBound<'_> {
    fn visit(
        &mut self,
        sel: &mut Vec<usize>,
        pos: &FixedBitSet,
        neg: &FixedBitSet,
        size: usize,
        allowed: &FixedBitSet,
    ) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(256) && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        let fp = neg.count_ones(..);
        let covered = pos.count_ones(..);
        let cost = size + fp + self.n_pos - covered;
        if cost <= self.best.cost {
            let key = key_of(self.items, sel, self.n_pos);
            if key < self.best {
                self.best = key;
                self.best_sel = sel.clone();
            }
        }
        let slots = self.max_clauses - sel.len();
        if slots == 0 {
            return;
        }

        // Per-clause price per newly covered positive, counting new false
        // positives at 1/slots since at most `slots` clauses share each.
        let mut ratio = vec![f64::INFINITY; self.items.len()];
        let mut min_size = usize::MAX;
        for i in allowed.ones() {
            let it = &self.items[i];
            let gain = it.pos.difference_count(pos);
            if gain == 0 {
                continue;
            }
            let fp_new = it.neg.difference_count(neg);
            ratio[i] = (it.size as f64 + fp_new as f64 / slots as f64) / gain as f64;
            min_size = min_size.min(it.size);
        }
        if min_size == usize::MAX {
            return;
        }

        let mut bound = (size + fp) as f64;
        let mut branch_on: Option<(usize, usize)> = None;
        for e in 0..self.n_pos {
            if pos.contains(e) {
                continue;
            }
            let mut m = 1.0f64;
            let mut n_cov = 0;
            for &i in &self.covering[e] {
                if ratio[i].is_finite() {
                    n_cov += 1;
                    m = m.min(ratio[i]);
                }
            }
            bound += m;
            if n_cov > 0 && branch_on.is_none_or(|(_, n)| n_cov < n) {
                branch_on = Some((e, n_cov));
            }
        }
        let lb = (bound - 1e-9).ceil() as usize;
        if lb > self.best.cost || (lb == self.best.cost && size + min_size > self.best.size) {
            return;
        }
        let Some((e, _)) = branch_on else {
            return;
        };

        let mut options: Vec<usize> = self.covering[e]
            .iter()
            .copied()
            .filter(|&i| ratio[i].is_finite())
            .collect();
        options.sort_by(|&a, &b| {
            ratio[a]
                .partial_cmp(&ratio[b])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });

        let mut child_allowed = allowed.clone();
        for &c in &options {
            child_allowed.set(c, false);
            let it = &self.items[c];
            let mut p = pos.clone();
            p.union_with(&it.pos);
            let mut n = neg.clone();
            n.union_with(&it.neg);
            sel.push(c);
            self.visit(sel, &p, &n, size + it.size, &child_allowed);
            sel.pop();
            if self.timed_out {
                return;
            }
        }
        // Leave `e` uncovered: every clause covering it is now excluded.
        self.visit(sel, pos, neg, size, &child_allowed);
    }
}

/// Least (cost, size, rendering) selection of at most `max_clauses`
/// clauses, by branch-and-bound. On timeout returns the best selection
/// found with `optimal = false`.
pub fn search_exact(
    vectors: &[CoverageVector],
    n_pos: usize,
    n_neg: usize,
    bias: &BiasSpec,
    budget: &SearchBudget,
) -> Hypothesis {
    let deadline = Instant::now() + budget.time_limit;
    let items = reduce(items_of(vectors));
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); n_pos];
    for (i, it) in items.iter().enumerate() {
        for e in it.pos.ones() {
            covering[e].push(i);
        }
    }
    let greedy = greedy_select(&items, n_pos, bias.max_clauses);
    let mut bb = BranchAndBound {
        items: &items,
        covering,
        n_pos,
        max_clauses: bias.max_clauses,
        best: key_of(&items, &greedy, n_pos),
        best_sel: greedy,
        deadline,
        nodes: 0,
        timed_out: false,
    };
    let mut allowed = FixedBitSet::with_capacity(items.len());
    allowed.insert_range(..);
    bb.visit(
        &mut Vec::new(),
        &FixedBitSet::with_capacity(n_pos),
        &FixedBitSet::with_capacity(n_neg),
        0,
        &allowed,
    );
    log::debug!(
        "exact search: {} of {} candidates after reduction, {} nodes{}",
        items.len(),
        vectors.len(),
        bb.nodes,
        if bb.timed_out { ", timed out" } else { "" }
    );
    let optimal = !bb.timed_out;
    let chosen: Vec<usize> = bb.best_sel.iter().map(|&i| items[i].src).collect();
    hypothesis(vectors, chosen, n_pos, n_neg, optimal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_bias, parse_clause};

    fn bits(n: usize, ones: &[usize]) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        for &i in ones {
            b.insert(i);
        }
        b
    }

    fn vector(
        body: &str,
        n_pos: usize,
        pos: &[usize],
        n_neg: usize,
        neg: &[usize],
    ) -> CoverageVector {
        let clause = parse_clause(&format!("h(A):- {body}.")).unwrap();
        CoverageVector::new(clause, bits(n_pos, pos), bits(n_neg, neg))
    }

    fn bias(max_clauses: usize) -> BiasSpec {
        parse_bias(&format!(
            "head_pred(h,1). type(h,(t,)). body_pred(p,1). type(p,(t,)). direction(p,(in,)). max_clauses({max_clauses})."
        ))
        .unwrap()
    }

    #[test]
    fn empty_selection_costs_all_positives() {
        let c = mdl_cost(&[], 10, 10);
        assert_eq!((c.cost, c.size, c.fp, c.fn_), (10, 0, 0, 10));
    }

    #[test]
    fn perfect_clause_costs_its_size() {
        let v = vector("p(A),q(A)", 10, &(0..10).collect::<Vec<_>>(), 10, &[]);
        assert_eq!(mdl_cost(&[&v], 10, 10).cost, 3);
    }

    #[test]
    fn empty_pool() {
        let h = search_exact(&[], 7, 3, &bias(4), &SearchBudget::default());
        assert!(h.program.is_empty());
        assert_eq!(h.cost, 7);
        assert!(h.optimal);
    }

    #[test]
    fn prefers_covering_clause() {
        let all: Vec<usize> = (0..10).collect();
        let pool = vec![
            vector("p(A),q(A)", 10, &all, 4, &[0]),
            vector("p(A)", 10, &[0, 1, 2, 3, 4], 4, &[]),
        ];
        let h = search_exact(&pool, 10, 4, &bias(4), &SearchBudget::default());
        assert_eq!(h.program.to_string().trim_end(), "h(A):- p(A),q(A).");
        assert_eq!(h.cost, 4);
    }

    #[test]
    fn greedy_trap() {
        // One broad clause with false positives versus two exact halves.
        let pool = vec![
            vector(
                "a(A)",
                12,
                &(0..12).collect::<Vec<_>>(),
                6,
                &[0, 1, 2, 3, 4],
            ),
            vector("b(A),c(A)", 12, &(0..6).collect::<Vec<_>>(), 6, &[]),
            vector("d(A),e(A)", 12, &(6..12).collect::<Vec<_>>(), 6, &[]),
        ];
        let exact = search_exact(&pool, 12, 6, &bias(4), &SearchBudget::default());
        let greedy = search_greedy(&pool, 12, 6, &bias(4));
        assert_eq!(exact.cost, 6);
        assert_eq!(greedy.cost, 7);
        assert!(greedy.cost >= exact.cost);
    }
}
