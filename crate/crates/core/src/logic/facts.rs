use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::bias::BiasSpec;
use super::parse::{expr_to_atom, parse_statements, Expr};
use super::term::Atom;
use super::LogicError;

/// Ground background facts plus labelled example atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactBase {
    pub background: BTreeSet<Atom>,
    pub pos: BTreeSet<Atom>,
    pub neg: BTreeSet<Atom>,
}

impl FactBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.background.is_empty() && self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn add_background(&mut self, atom: Atom) -> Result<(), LogicError> {
        if !atom.is_ground() {
            return Err(LogicError::NotGround(atom.to_string()));
        }
        self.background.insert(atom);
        Ok(())
    }

    pub fn add_example(&mut self, atom: Atom, positive: bool) -> Result<(), LogicError> {
        if !atom.is_ground() {
            return Err(LogicError::NotGround(atom.to_string()));
        }
        let (this, other) = if positive {
            (&mut self.pos, &self.neg)
        } else {
            (&mut self.neg, &self.pos)
        };
        if other.contains(&atom) {
            return Err(LogicError::ConflictingLabel(atom.to_string()));
        }
        this.insert(atom);
        Ok(())
    }

    /// Union of two fact bases; fails if an example gets both labels.
    pub fn merge(&mut self, other: &FactBase) -> Result<(), LogicError> {
        self.background.extend(other.background.iter().cloned());
        for a in &other.pos {
            self.add_example(a.clone(), true)?;
        }
        for a in &other.neg {
            self.add_example(a.clone(), false)?;
        }
        Ok(())
    }

    /// Background-only copy (examples stripped).
    pub fn background_only(&self) -> FactBase {
        FactBase {
            background: self.background.clone(),
            ..FactBase::default()
        }
    }

    pub fn render_background(&self) -> String {
        self.background.iter().map(|a| format!("{a}.\n")).collect()
    }

    pub fn render_examples(&self) -> String {
        let mut s = String::new();
        for a in &self.pos {
            s.push_str(&format!("pos({a}).\n"));
        }
        for a in &self.neg {
            s.push_str(&format!("neg({a}).\n"));
        }
        s
    }
}

impl fmt::Display for FactBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_background())?;
        f.write_str(&self.render_examples())
    }
}

/// Parses ground facts. `pos(atom).` / `neg(atom).` statements become
/// examples, everything else background. With a bias in scope, atoms of a
/// declared predicate must match its arity.
pub fn parse_facts(text: &str, bias: Option<&BiasSpec>) -> Result<FactBase, LogicError> {
    let mut fb = FactBase::new();
    for stmt in parse_statements(text)? {
        if !stmt.body.is_empty() {
            return Err(LogicError::syntax(
                stmt.line,
                "rules are not allowed in a fact file",
            ));
        }
        let (atom, label) = match &stmt.head {
            Expr::Compound(w, inner) if (w == "pos" || w == "neg") && inner.len() == 1 => {
                (expr_to_atom(&inner[0], stmt.line)?, Some(w == "pos"))
            }
            other => (expr_to_atom(other, stmt.line)?, None),
        };
        if !atom.is_ground() {
            return Err(LogicError::syntax(
                stmt.line,
                format!("`{atom}` is not ground"),
            ));
        }
        if let Some(b) = bias {
            if let Some(sig) = b.signature(&atom.predicate) {
                if sig.arity() != atom.arity() {
                    return Err(LogicError::ArityClash {
                        line: stmt.line,
                        predicate: atom.predicate.clone(),
                        declared: sig.arity(),
                        found: atom.arity(),
                    });
                }
            }
        }
        match label {
            Some(positive) => fb
                .add_example(atom, positive)
                .map_err(|e| LogicError::syntax(stmt.line, e.to_string()))?,
            None => {
                fb.background.insert(atom);
            }
        }
    }
    Ok(fb)
}
