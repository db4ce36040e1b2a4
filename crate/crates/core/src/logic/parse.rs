//! Lexer and parser for the Prolog subset used by bias, background and
//! example files: atoms, numbers, variables, compound terms, tuples and
//! `head :- body.` clauses. `%` starts a line comment.

use super::term::{Atom, Clause, Program, Term};
use super::LogicError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Num(String),
    LParen,
    RParen,
    Comma,
    Neck,
    End,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, LogicError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push(Spanned {
                    tok: Tok::LParen,
                    line,
                });
                i += 1;
            }
            ')' => {
                out.push(Spanned {
                    tok: Tok::RParen,
                    line,
                });
                i += 1;
            }
            ',' => {
                out.push(Spanned {
                    tok: Tok::Comma,
                    line,
                });
                i += 1;
            }
            '.' => {
                out.push(Spanned {
                    tok: Tok::End,
                    line,
                });
                i += 1;
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                out.push(Spanned {
                    tok: Tok::Neck,
                    line,
                });
                i += 2;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = if c.is_ascii_digit() {
                    if !word.chars().all(|d| d.is_ascii_digit()) {
                        return Err(LogicError::syntax(
                            line,
                            format!("malformed number `{word}`"),
                        ));
                    }
                    Tok::Num(word)
                } else if c.is_ascii_uppercase() || c == '_' {
                    Tok::Var(word)
                } else {
                    Tok::Name(word)
                };
                out.push(Spanned { tok, line });
            }
            other => {
                return Err(LogicError::syntax(
                    line,
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    Ok(out)
}

/// Untyped term tree produced by the parser.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Expr {
    Compound(String, Vec<Expr>),
    Name(String),
    Var(String),
    Num(String),
    Tuple(Vec<Expr>),
}

/// One `.`-terminated statement.
#[derive(Clone, Debug)]
pub(crate) struct Statement {
    pub head: Expr,
    pub body: Vec<Expr>,
    pub line: usize,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.line)
            .unwrap_or(self.last_line)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), LogicError> {
        let line = self.line();
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(LogicError::syntax(
                line,
                format!("expected {what}, found {t:?}"),
            )),
            None => Err(LogicError::syntax(
                line,
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn statement(&mut self) -> Result<Statement, LogicError> {
        let line = self.line();
        let head = self.term()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Neck) {
            self.pos += 1;
            body.push(self.term()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                body.push(self.term()?);
            }
        }
        self.expect(Tok::End, "`.`")?;
        Ok(Statement { head, body, line })
    }

    fn term(&mut self) -> Result<Expr, LogicError> {
        let line = self.line();
        match self.next() {
            Some(Tok::Name(n)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let args = self.args()?;
                    if args.is_empty() {
                        return Err(LogicError::syntax(
                            line,
                            format!("`{n}()` has no arguments"),
                        ));
                    }
                    Ok(Expr::Compound(n, args))
                } else {
                    Ok(Expr::Name(n))
                }
            }
            Some(Tok::Var(v)) => Ok(Expr::Var(v)),
            Some(Tok::Num(n)) => Ok(Expr::Num(n)),
            Some(Tok::LParen) => Ok(Expr::Tuple(self.args()?)),
            Some(t) => Err(LogicError::syntax(line, format!("unexpected token {t:?}"))),
            None => Err(LogicError::syntax(line, "unexpected end of input")),
        }
    }

    /// Comma-separated terms up to `)`; a trailing comma is allowed so that
    /// one-element tuples read as `(shoes,)`.
    fn args(&mut self) -> Result<Vec<Expr>, LogicError> {
        let mut args = Vec::new();
        loop {
            if self.peek() == Some(&Tok::RParen) {
                self.pos += 1;
                return Ok(args);
            }
            args.push(self.term()?);
            match self.peek() {
                Some(Tok::Comma) => {
                    self.pos += 1;
                }
                Some(Tok::RParen) => {}
                _ => {
                    let line = self.line();
                    return Err(LogicError::syntax(line, "expected `,` or `)`"));
                }
            }
        }
    }
}

pub(crate) fn parse_statements(text: &str) -> Result<Vec<Statement>, LogicError> {
    let toks = lex(text)?;
    let last_line = toks.last().map(|t| t.line).unwrap_or(1);
    let mut p = Parser {
        toks,
        pos: 0,
        last_line,
    };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.statement()?);
    }
    Ok(out)
}

pub(crate) fn expr_to_term(e: &Expr, line: usize) -> Result<Term, LogicError> {
    match e {
        Expr::Var(v) => Ok(Term::Var(v.clone())),
        Expr::Name(n) | Expr::Num(n) => Ok(Term::Const(n.clone())),
        other => Err(LogicError::syntax(
            line,
            format!("expected a variable or constant, found {other:?}"),
        )),
    }
}

pub(crate) fn expr_to_atom(e: &Expr, line: usize) -> Result<Atom, LogicError> {
    match e {
        Expr::Compound(p, args) => Ok(Atom::new(
            p.clone(),
            args.iter()
                .map(|a| expr_to_term(a, line))
                .collect::<Result<_, _>>()?,
        )),
        other => Err(LogicError::syntax(
            line,
            format!("expected an atom `p(...)`, found {other:?}"),
        )),
    }
}

fn statement_to_clause(s: &Statement) -> Result<Clause, LogicError> {
    let head = expr_to_atom(&s.head, s.line)?;
    let body = s
        .body
        .iter()
        .map(|b| expr_to_atom(b, s.line))
        .collect::<Result<_, _>>()?;
    Ok(Clause::new(head, body))
}

pub fn parse_atom(text: &str) -> Result<Atom, LogicError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        last_line: 1,
    };
    let e = p.term()?;
    if p.peek() == Some(&Tok::End) {
        p.pos += 1;
    }
    if let Some(t) = p.peek() {
        let line = p.line();
        return Err(LogicError::syntax(line, format!("trailing input {t:?}")));
    }
    expr_to_atom(&e, 1)
}

/// Parses exactly one clause.
pub fn parse_clause(text: &str) -> Result<Clause, LogicError> {
    let stmts = parse_statements(text)?;
    match stmts.as_slice() {
        [s] => statement_to_clause(s),
        _ => Err(LogicError::syntax(
            1,
            format!("expected one clause, found {}", stmts.len()),
        )),
    }
}

pub fn parse_clauses(text: &str) -> Result<Vec<Clause>, LogicError> {
    parse_statements(text)?
        .iter()
        .map(statement_to_clause)
        .collect()
}

/// Parses a rule set. All clause heads must share one predicate.
pub fn parse_program(text: &str) -> Result<Program, LogicError> {
    let clauses = parse_clauses(text)?;
    if let Some(first) = clauses.first() {
        if let Some(bad) = clauses
            .iter()
            .find(|c| c.head.predicate != first.head.predicate)
        {
            return Err(LogicError::MixedHeads {
                expected: first.head.predicate.clone(),
                found: bad.head.predicate.clone(),
            });
        }
    }
    Ok(Program::new(clauses))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_clause_with_comments() {
        let c = parse_clause("% rule one\nh(A) :- p(A), % inline\n q(A, b).").unwrap();
        assert_eq!(c.to_string(), "h(A):- p(A),q(A,b).");
    }

    #[test]
    fn tuple_with_trailing_comma() {
        let s = parse_statements("type(black,(shoes,)).").unwrap();
        assert_eq!(
            s[0].head,
            Expr::Compound(
                "type".into(),
                vec![
                    Expr::Name("black".into()),
                    Expr::Tuple(vec![Expr::Name("shoes".into())])
                ]
            )
        );
    }

    #[test]
    fn numbers_are_constants() {
        let a = parse_atom("coord1(p36_0,4)").unwrap();
        assert_eq!(a.args[1], Term::constant("4"));
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_clauses("p(a).\nq(b).\nr(c\n").unwrap_err();
        match err {
            LogicError::Syntax { line, .. } => assert!(line >= 3, "line {line}"),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_clauses("p(a).\nq(b)\nr(c).").unwrap_err();
        assert!(matches!(err, LogicError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn rejects_mixed_heads() {
        assert!(parse_program("h(A):- p(A).\ng(A):- p(A).").is_err());
    }
}
