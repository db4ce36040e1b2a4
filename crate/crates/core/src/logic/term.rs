use std::fmt;

use serde::{Deserialize, Serialize};

/// A first-order term. Variables start with an uppercase letter (or `_`),
/// constants with a lowercase letter or a digit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `true` for names usable as predicate names or symbolic constants.
pub fn is_lower_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Constants are lowercase identifiers or non-negative integers.
pub fn is_constant_name(s: &str) -> bool {
    is_lower_ident(s) || (!s.is_empty() && s.chars().all(|c| c.is_ascii_digit()))
}

pub fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Builds a ground atom from constant names.
    pub fn ground<S: AsRef<str>>(predicate: impl Into<String>, consts: &[S]) -> Self {
        Atom::new(
            predicate,
            consts.iter().map(|c| Term::constant(c.as_ref())).collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A definite Horn clause `head :- body`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Atom>) -> Self {
        Clause { head, body }
    }

    /// Literal count: the head plus every body atom.
    pub fn size(&self) -> usize {
        1 + self.body.len()
    }

    /// Distinct variables in first-occurrence order (head first).
    pub fn vars(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for atom in std::iter::once(&self.head).chain(self.body.iter()) {
            for v in atom.vars() {
                if !seen.iter().any(|s| s == v) {
                    seen.push(v.to_string());
                }
            }
        }
        seen
    }

    /// Every head variable occurs in the body.
    pub fn is_range_restricted(&self) -> bool {
        self.head
            .vars()
            .all(|hv| self.body.iter().any(|b| b.vars().any(|v| v == hv)))
    }

    /// The variable graph of head and body is a single component anchored
    /// at the head (every body atom reachable from the head through shared
    /// variables). Ground body atoms count as disconnected.
    pub fn is_connected(&self) -> bool {
        let mut reached: Vec<&str> = self.head.vars().collect();
        let mut done = vec![false; self.body.len()];
        loop {
            let mut progress = false;
            for (i, atom) in self.body.iter().enumerate() {
                if done[i] {
                    continue;
                }
                if atom.vars().any(|v| reached.contains(&v)) {
                    done[i] = true;
                    progress = true;
                    for v in atom.vars() {
                        if !reached.contains(&v) {
                            reached.push(v);
                        }
                    }
                }
            }
            if !progress {
                break;
            }
        }
        done.iter().all(|d| *d)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(":- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{b}")?;
            }
        }
        f.write_str(".")
    }
}

/// A disjunction of clauses sharing one head predicate, kept in canonical
/// order with duplicates (modulo renaming and body order) removed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Program {
    clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: impl IntoIterator<Item = Clause>) -> Self {
        let mut canon: Vec<Clause> = clauses
            .into_iter()
            .map(|c| super::canon::canonicalize(&c))
            .collect();
        canon.sort_by_cached_key(|c| c.to_string());
        canon.dedup();
        Program { clauses: canon }
    }

    pub fn empty() -> Self {
        Program::default()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    /// Total literal count over all clauses.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Clause::size).sum()
    }

    pub fn head_predicate(&self) -> Option<&str> {
        self.clauses.first().map(|c| c.head.predicate.as_str())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
