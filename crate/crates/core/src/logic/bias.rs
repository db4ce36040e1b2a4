//! Language bias: predicate declarations, argument types and modes, and
//! global clause-size limits, in `head_pred/body_pred/type/direction`
//! directive syntax.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::parse::{parse_statements, Expr, Statement};
use super::term::is_lower_ident;
use super::LogicError;

pub const DEFAULT_MAX_VARS: usize = 6;
pub const DEFAULT_MAX_BODY: usize = 6;
pub const DEFAULT_MAX_CLAUSES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::In => "in",
            Direction::Out => "out",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Head,
    Body,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredicateSignature {
    pub name: String,
    pub arg_types: Vec<String>,
    pub directions: Vec<Direction>,
    pub role: Role,
}

impl PredicateSignature {
    pub fn new(name: &str, arg_types: &[&str], directions: &[Direction], role: Role) -> Self {
        assert_eq!(arg_types.len(), directions.len(), "types/directions length");
        PredicateSignature {
            name: name.to_string(),
            arg_types: arg_types.iter().map(|s| s.to_string()).collect(),
            directions: directions.to_vec(),
            role,
        }
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasSpec {
    pub head: PredicateSignature,
    pub body: Vec<PredicateSignature>,
    pub max_vars: usize,
    pub max_body: usize,
    pub max_clauses: usize,
}

impl BiasSpec {
    pub fn signature(&self, name: &str) -> Option<&PredicateSignature> {
        if self.head.name == name {
            Some(&self.head)
        } else {
            self.body.iter().find(|s| s.name == name)
        }
    }

    /// Re-checks every invariant; empty when the bias is usable.
    pub fn violations(&self) -> Vec<Violation> {
        validate_bias_text(&self.to_string(), BiasOptions::default())
    }
}

fn render_tuple<T: fmt::Display>(items: &[T]) -> String {
    let inner: Vec<String> = items.iter().map(|t| t.to_string()).collect();
    if inner.len() == 1 {
        format!("({},)", inner[0])
    } else {
        format!("({})", inner.join(","))
    }
}

impl fmt::Display for BiasSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sig in std::iter::once(&self.head).chain(self.body.iter()) {
            let directive = match sig.role {
                Role::Head => "head_pred",
                Role::Body => "body_pred",
            };
            writeln!(f, "{directive}({},{}).", sig.name, sig.arity())?;
            writeln!(f, "type({},{}).", sig.name, render_tuple(&sig.arg_types))?;
            writeln!(
                f,
                "direction({},{}).",
                sig.name,
                render_tuple(&sig.directions)
            )?;
        }
        writeln!(f, "max_vars({}).", self.max_vars)?;
        writeln!(f, "max_body({}).", self.max_body)?;
        writeln!(f, "max_clauses({}).", self.max_clauses)
    }
}

/// Closed set of structural defects a bias can have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    HeadTypeUncovered,
    ArityMismatch,
    MissingTypeDecl,
    MissingDirectionDecl,
    DuplicatePredicate,
    BadIdentifier,
    MissingGlobalConstraint,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 7] = [
        ViolationKind::HeadTypeUncovered,
        ViolationKind::ArityMismatch,
        ViolationKind::MissingTypeDecl,
        ViolationKind::MissingDirectionDecl,
        ViolationKind::DuplicatePredicate,
        ViolationKind::BadIdentifier,
        ViolationKind::MissingGlobalConstraint,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::HeadTypeUncovered => "head_type_uncovered",
            ViolationKind::ArityMismatch => "arity_mismatch",
            ViolationKind::MissingTypeDecl => "missing_type_decl",
            ViolationKind::MissingDirectionDecl => "missing_direction_decl",
            ViolationKind::DuplicatePredicate => "duplicate_predicate",
            ViolationKind::BadIdentifier => "bad_identifier",
            ViolationKind::MissingGlobalConstraint => "missing_global_constraint",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Violation {
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BiasOptions {
    /// Fill in `max_vars`/`max_body`/`max_clauses` when omitted instead of
    /// reporting them missing.
    pub apply_defaults: bool,
}

impl Default for BiasOptions {
    fn default() -> Self {
        BiasOptions {
            apply_defaults: true,
        }
    }
}

/// Raw directives collected from a bias file before validation.
#[derive(Default)]
struct Draft {
    heads: Vec<(String, i64)>,
    bodies: Vec<(String, i64)>,
    types: Vec<(String, Vec<String>)>,
    directions: Vec<(String, Vec<String>)>,
    max_vars: Option<i64>,
    max_body: Option<i64>,
    max_clauses: Option<i64>,
    problems: Vec<Violation>,
}

fn expr_word(e: &Expr) -> Option<String> {
    match e {
        Expr::Name(n) | Expr::Var(n) | Expr::Num(n) => Some(n.clone()),
        _ => None,
    }
}

fn expr_int(e: &Expr) -> Option<i64> {
    match e {
        Expr::Num(n) => n.parse().ok(),
        _ => None,
    }
}

fn tuple_words(e: &Expr) -> Option<Vec<String>> {
    match e {
        Expr::Tuple(items) => items.iter().map(expr_word).collect(),
        // `type(p, t)` without parentheses for a unary predicate.
        other => expr_word(other).map(|w| vec![w]),
    }
}

impl Draft {
    fn collect(stmts: &[Statement]) -> Draft {
        use ViolationKind::*;
        let mut d = Draft::default();
        for s in stmts {
            let line = s.line;
            if !s.body.is_empty() {
                d.problems.push(Violation::new(
                    BadIdentifier,
                    format!("line {line}: rules are not allowed in a bias"),
                ));
                continue;
            }
            let (name, args) = match &s.head {
                Expr::Compound(n, a) => (n.as_str(), a.as_slice()),
                other => {
                    d.problems.push(Violation::new(
                        BadIdentifier,
                        format!("line {line}: unexpected statement {other:?}"),
                    ));
                    continue;
                }
            };
            let malformed = |d: &mut Draft| {
                d.problems.push(Violation::new(
                    BadIdentifier,
                    format!("line {line}: malformed `{name}` directive"),
                ))
            };
            match (name, args) {
                ("head_pred" | "body_pred", [p, a]) => match (expr_word(p), expr_int(a)) {
                    (Some(p), Some(a)) => {
                        if name == "head_pred" {
                            d.heads.push((p, a))
                        } else {
                            d.bodies.push((p, a))
                        }
                    }
                    _ => malformed(&mut d),
                },
                ("type" | "direction", [p, t]) => match (expr_word(p), tuple_words(t)) {
                    (Some(p), Some(t)) => {
                        if name == "type" {
                            d.types.push((p, t))
                        } else {
                            d.directions.push((p, t))
                        }
                    }
                    _ => malformed(&mut d),
                },
                ("max_vars" | "max_body" | "max_clauses", [n]) => match expr_int(n) {
                    Some(n) => {
                        let slot = match name {
                            "max_vars" => &mut d.max_vars,
                            "max_body" => &mut d.max_body,
                            _ => &mut d.max_clauses,
                        };
                        *slot = Some(n);
                    }
                    None => malformed(&mut d),
                },
                _ => d.problems.push(Violation::new(
                    BadIdentifier,
                    format!("line {line}: unknown directive `{name}/{}`", args.len()),
                )),
            }
        }
        d
    }

    /// Validates the draft; returns the spec when no violation was found.
    fn check(mut self, opts: BiasOptions) -> (Option<BiasSpec>, Vec<Violation>) {
        use ViolationKind::*;
        let mut v = std::mem::take(&mut self.problems);

        let all_preds: Vec<(&String, i64, Role)> = self
            .heads
            .iter()
            .map(|(n, a)| (n, *a, Role::Head))
            .chain(self.bodies.iter().map(|(n, a)| (n, *a, Role::Body)))
            .collect();
        for (n, a, _) in &all_preds {
            if !is_lower_ident(n) {
                v.push(Violation::new(
                    BadIdentifier,
                    format!("predicate name `{n}`"),
                ));
            }
            if *a < 1 {
                v.push(Violation::new(
                    ArityMismatch,
                    format!("`{n}` declared with arity {a}"),
                ));
            }
        }
        match self.heads.len() {
            0 => v.push(Violation::new(MissingTypeDecl, "no head_pred declaration")),
            1 => {}
            k => v.push(Violation::new(
                DuplicatePredicate,
                format!("{k} head_pred declarations"),
            )),
        }
        for (i, (n, _, _)) in all_preds.iter().enumerate() {
            if all_preds[..i].iter().any(|(m, _, _)| m == n) {
                v.push(Violation::new(
                    DuplicatePredicate,
                    format!("`{n}` declared more than once"),
                ));
            }
        }
        for (p, ts) in &self.types {
            for t in ts {
                if !is_lower_ident(t) {
                    v.push(Violation::new(
                        BadIdentifier,
                        format!("type name `{t}` in type({p},...)"),
                    ));
                }
            }
            if !all_preds.iter().any(|(n, _, _)| *n == p) {
                v.push(Violation::new(
                    BadIdentifier,
                    format!("type/2 for undeclared predicate `{p}`"),
                ));
            }
        }
        for (p, ds) in &self.directions {
            for d in ds {
                if d != "in" && d != "out" {
                    v.push(Violation::new(
                        BadIdentifier,
                        format!("direction `{d}` in direction({p},...)"),
                    ));
                }
            }
            if !all_preds.iter().any(|(n, _, _)| *n == p) {
                v.push(Violation::new(
                    BadIdentifier,
                    format!("direction/2 for undeclared predicate `{p}`"),
                ));
            }
        }

        let mut sigs: Vec<PredicateSignature> = Vec::new();
        for (n, a, role) in &all_preds {
            let types: Vec<&Vec<String>> = self
                .types
                .iter()
                .filter(|(p, _)| p == *n)
                .map(|(_, t)| t)
                .collect();
            let dirs: Vec<&Vec<String>> = self
                .directions
                .iter()
                .filter(|(p, _)| p == *n)
                .map(|(_, d)| d)
                .collect();
            let arity = (*a).max(0) as usize;
            let arg_types = match types.as_slice() {
                [] => {
                    v.push(Violation::new(
                        MissingTypeDecl,
                        format!("no type/2 for `{n}`"),
                    ));
                    None
                }
                [t] => {
                    if t.len() != arity {
                        v.push(Violation::new(
                            ArityMismatch,
                            format!("type({n},...) has {} entries, arity is {arity}", t.len()),
                        ));
                        None
                    } else {
                        Some((*t).clone())
                    }
                }
                _ => {
                    v.push(Violation::new(
                        DuplicatePredicate,
                        format!("multiple type/2 for `{n}`"),
                    ));
                    None
                }
            };
            let directions = match dirs.as_slice() {
                [] if *role == Role::Head => Some(vec![Direction::In; arity]),
                [] => {
                    v.push(Violation::new(
                        MissingDirectionDecl,
                        format!("no direction/2 for `{n}`"),
                    ));
                    None
                }
                [d] => {
                    if d.len() != arity {
                        v.push(Violation::new(
                            ArityMismatch,
                            format!(
                                "direction({n},...) has {} entries, arity is {arity}",
                                d.len()
                            ),
                        ));
                        None
                    } else {
                        d.iter()
                            .map(|s| match s.as_str() {
                                "in" => Some(Direction::In),
                                "out" => Some(Direction::Out),
                                _ => None,
                            })
                            .collect()
                    }
                }
                _ => {
                    v.push(Violation::new(
                        DuplicatePredicate,
                        format!("multiple direction/2 for `{n}`"),
                    ));
                    None
                }
            };
            if let (Some(arg_types), Some(directions)) = (arg_types, directions) {
                sigs.push(PredicateSignature {
                    name: (*n).clone(),
                    arg_types,
                    directions,
                    role: *role,
                });
            }
        }

        let global = |val: Option<i64>,
                      name: &str,
                      default: usize,
                      min: i64,
                      v: &mut Vec<Violation>|
         -> usize {
            match val {
                Some(x) if x >= min => x as usize,
                Some(x) => {
                    v.push(Violation::new(
                        MissingGlobalConstraint,
                        format!("{name}({x}) must be at least {min}"),
                    ));
                    default
                }
                None if opts.apply_defaults => default,
                None => {
                    v.push(Violation::new(
                        MissingGlobalConstraint,
                        format!("no {name}/1 declaration"),
                    ));
                    default
                }
            }
        };
        let head_arity = self.heads.first().map(|(_, a)| (*a).max(1)).unwrap_or(1);
        let max_vars = global(
            self.max_vars,
            "max_vars",
            DEFAULT_MAX_VARS.max(head_arity as usize),
            head_arity,
            &mut v,
        );
        let max_body = global(self.max_body, "max_body", DEFAULT_MAX_BODY, 1, &mut v);
        let max_clauses = global(
            self.max_clauses,
            "max_clauses",
            DEFAULT_MAX_CLAUSES,
            1,
            &mut v,
        );

        let head = sigs.iter().find(|s| s.role == Role::Head).cloned();
        let body: Vec<PredicateSignature> =
            sigs.into_iter().filter(|s| s.role == Role::Body).collect();
        if let Some(h) = &head {
            for t in &h.arg_types {
                if !body.iter().any(|b| b.arg_types.contains(t)) {
                    v.push(Violation::new(
                        HeadTypeUncovered,
                        format!("head type `{t}` is not an argument type of any body predicate"),
                    ));
                }
            }
        }

        match head {
            Some(head) if v.is_empty() => (
                Some(BiasSpec {
                    head,
                    body,
                    max_vars,
                    max_body,
                    max_clauses,
                }),
                v,
            ),
            _ => (None, v),
        }
    }
}

/// Parses and validates a bias with default global constraints.
pub fn parse_bias(text: &str) -> Result<BiasSpec, LogicError> {
    parse_bias_with(text, BiasOptions::default())
}

pub fn parse_bias_with(text: &str, opts: BiasOptions) -> Result<BiasSpec, LogicError> {
    let stmts = parse_statements(text)?;
    match Draft::collect(&stmts).check(opts) {
        (Some(spec), _) => Ok(spec),
        (None, violations) => Err(LogicError::InvalidBias(violations)),
    }
}

/// Every structural defect in `text`, in a deterministic order. Empty iff
/// [`parse_bias_with`] succeeds.
pub fn validate_bias_text(text: &str, opts: BiasOptions) -> Vec<Violation> {
    match parse_statements(text) {
        Err(e) => vec![Violation::new(
            ViolationKind::BadIdentifier,
            format!("unparseable bias: {e}"),
        )],
        Ok(stmts) => Draft::collect(&stmts).check(opts).1,
    }
}
