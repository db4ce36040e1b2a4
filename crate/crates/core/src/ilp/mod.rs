//! Candidate enumeration and minimum description length rule-set search.
//!
//! The cost of a program is its literal count plus the number of negative
//! examples it covers plus the number of positive examples it misses.

mod enumerate;
mod learn;
mod search;

use std::fmt;
use std::time::Duration;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Atom, Clause, FactBase, FactIndex, Program};

pub use enumerate::enumerate_candidates;
pub use learn::{learn, Learner};
pub use search::{mdl_cost, search_exact, search_greedy, Cost};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IlpError {
    #[error("unusable bias: {0}")]
    UnusableBias(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LearnError {
    #[error("unusable bias: {0}")]
    UnusableBias(String),
    #[error("rule search failed: {reason}")]
    Failed {
        reason: String,
        hypothesis: Box<Hypothesis>,
    },
}

impl From<IlpError> for LearnError {
    fn from(e: IlpError) -> Self {
        match e {
            IlpError::UnusableBias(m) => LearnError::UnusableBias(m),
        }
    }
}

/// Limits on enumeration and search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_candidates: usize,
    pub time_limit: Duration,
    /// Pools at most this large are searched exactly.
    pub exact_threshold: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_candidates: 200_000,
            time_limit: Duration::from_secs(60),
            exact_threshold: 5_000,
        }
    }
}

/// A clause with the examples it covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageVector {
    pub clause: Clause,
    pub pos_bits: FixedBitSet,
    pub neg_bits: FixedBitSet,
    pub size: usize,
}

impl CoverageVector {
    pub fn new(clause: Clause, pos_bits: FixedBitSet, neg_bits: FixedBitSet) -> Self {
        let size = clause.size();
        CoverageVector {
            clause,
            pos_bits,
            neg_bits,
            size,
        }
    }

    pub fn n_pos(&self) -> usize {
        self.pos_bits.count_ones(..)
    }

    pub fn n_neg(&self) -> usize {
        self.neg_bits.count_ones(..)
    }
}

/// A learned program with its cost breakdown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub program: Program,
    pub cost: usize,
    pub size: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// True iff exact search ran to completion.
    pub optimal: bool,
}

impl Hypothesis {
    pub fn empty(n_pos: usize) -> Self {
        Hypothesis {
            program: Program::empty(),
            cost: n_pos,
            size: 0,
            fp: 0,
            fn_: n_pos,
            optimal: true,
        }
    }

    /// Whether this result counts as a failed search: nothing learned
    /// despite positives, or an incomplete search that did no better than
    /// the empty program.
    pub fn is_failure(&self, n_pos: usize) -> bool {
        (self.program.is_empty() && n_pos > 0) || (!self.optimal && self.cost >= n_pos)
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.program)?;
        write!(
            f,
            "% cost={} size={} fp={} fn={} optimal={}",
            self.cost, self.size, self.fp, self.fn_, self.optimal
        )
    }
}

/// Examples of a fact base in a fixed order, with the index used to cover
/// them.
pub(crate) struct Examples {
    pub index: FactIndex,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
}

impl Examples {
    pub fn new(facts: &FactBase) -> Self {
        Examples {
            index: FactIndex::from_facts(facts),
            pos: facts.pos.iter().cloned().collect(),
            neg: facts.neg.iter().cloned().collect(),
        }
    }

    pub fn cover(&self, clause: Clause) -> CoverageVector {
        let bits = |examples: &[Atom]| {
            let mut set = FixedBitSet::with_capacity(examples.len());
            for (i, hit) in self
                .index
                .entailed_among(&clause, examples)
                .into_iter()
                .enumerate()
            {
                set.set(i, hit);
            }
            set
        };
        let pos_bits = bits(&self.pos);
        let neg_bits = bits(&self.neg);
        CoverageVector::new(clause, pos_bits, neg_bits)
    }
}

/// Coverage of each candidate over the examples of `facts` (bits follow
/// the sorted order of `facts.pos` and `facts.neg`). Output order matches
/// input order.
pub fn score_candidates(candidates: &[Clause], facts: &FactBase) -> Vec<CoverageVector> {
    let ex = Examples::new(facts);
    candidates.par_iter().map(|c| ex.cover(c.clone())).collect()
}
