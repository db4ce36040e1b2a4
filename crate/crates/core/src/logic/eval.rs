//! Join-based evaluation of clause bodies over ground background facts.
//!
//! Body atoms are joined by backtracking: at every step the pending atom
//! with the fewest candidate tuples (given the current bindings) is joined
//! next. Once all head variables are bound the remaining body is only
//! checked for satisfiability.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::facts::FactBase;
use super::term::{Atom, Clause, Program, Term};

#[derive(Debug, Default)]
struct Relation {
    arity: usize,
    /// Flat tuple storage, `arity` symbols per tuple.
    tuples: Vec<u32>,
    /// Per argument position: symbol -> ids of tuples carrying it there.
    by_arg: Vec<HashMap<u32, Vec<u32>>>,
}

impl Relation {
    fn len(&self) -> usize {
        self.tuples.len() / self.arity.max(1)
    }

    fn tuple(&self, id: u32) -> &[u32] {
        let s = id as usize * self.arity;
        &self.tuples[s..s + self.arity]
    }
}

/// Background facts indexed for joins. Example atoms are never part of an
/// index.
#[derive(Debug, Default)]
pub struct FactIndex {
    symbols: HashMap<String, u32>,
    names: Vec<String>,
    relations: HashMap<String, Relation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Var(usize),
    Const(u32),
    /// A constant absent from the index: the atom can never match.
    Unknown,
}

struct CompiledAtom<'a> {
    rel: Option<&'a Relation>,
    args: Vec<Slot>,
}

struct Compiled<'a> {
    n_vars: usize,
    head: Vec<Slot>,
    body: Vec<CompiledAtom<'a>>,
}

impl FactIndex {
    pub fn new<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Self {
        let mut idx = FactIndex::default();
        let mut seen: HashSet<(String, Vec<u32>)> = HashSet::new();
        for atom in atoms {
            debug_assert!(atom.is_ground());
            let syms: Vec<u32> = atom.args.iter().map(|t| idx.intern(t.name())).collect();
            if !seen.insert((atom.predicate.clone(), syms.clone())) {
                continue;
            }
            let rel = idx
                .relations
                .entry(atom.predicate.clone())
                .or_insert_with(|| Relation {
                    arity: atom.arity(),
                    tuples: Vec::new(),
                    by_arg: vec![HashMap::new(); atom.arity()],
                });
            if rel.arity != atom.arity() {
                // Same name, different arity: treat as unrelated facts and skip.
                continue;
            }
            let id = rel.len() as u32;
            for (pos, s) in syms.iter().enumerate() {
                rel.by_arg[pos].entry(*s).or_default().push(id);
            }
            rel.tuples.extend_from_slice(&syms);
        }
        idx
    }

    pub fn from_facts(facts: &FactBase) -> Self {
        FactIndex::new(facts.background.iter())
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&s) = self.symbols.get(name) {
            return s;
        }
        let s = self.names.len() as u32;
        self.names.push(name.to_string());
        self.symbols.insert(name.to_string(), s);
        s
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        let Some(rel) = self.relations.get(&atom.predicate) else {
            return false;
        };
        if rel.arity != atom.arity() {
            return false;
        }
        let Some(syms) = atom
            .args
            .iter()
            .map(|t| self.symbols.get(t.name()).copied())
            .collect::<Option<Vec<u32>>>()
        else {
            return false;
        };
        match rel.by_arg.first().and_then(|m| m.get(&syms[0])) {
            Some(ids) => ids.iter().any(|id| rel.tuple(*id) == syms.as_slice()),
            None => false,
        }
    }

    fn compile<'a>(&'a self, clause: &Clause) -> Compiled<'a> {
        let slot = |t: &Term, vars: &mut HashMap<String, usize>| -> Slot {
            match t {
                Term::Var(v) => {
                    let n = vars.len();
                    Slot::Var(*vars.entry(v.clone()).or_insert(n))
                }
                Term::Const(c) => match self.symbols.get(c.as_str()) {
                    Some(s) => Slot::Const(*s),
                    None => Slot::Unknown,
                },
            }
        };
        let mut owned: HashMap<String, usize> = HashMap::new();
        let head: Vec<Slot> = clause
            .head
            .args
            .iter()
            .map(|t| slot(t, &mut owned))
            .collect();
        let body = clause
            .body
            .iter()
            .map(|a| CompiledAtom {
                rel: self
                    .relations
                    .get(&a.predicate)
                    .filter(|r| r.arity == a.arity()),
                args: a.args.iter().map(|t| slot(t, &mut owned)).collect(),
            })
            .collect();
        Compiled {
            n_vars: owned.len(),
            head,
            body,
        }
    }

    fn head_key(c: &Compiled, bind: &[Option<u32>]) -> Option<Vec<u32>> {
        c.head
            .iter()
            .map(|s| match *s {
                Slot::Var(v) => bind[v],
                Slot::Const(k) => Some(k),
                Slot::Unknown => None,
            })
            .collect()
    }

    /// Index of the pending atom with the fewest candidate tuples.
    fn pick(c: &Compiled, bind: &[Option<u32>], done: &[bool]) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for (i, atom) in c.body.iter().enumerate() {
            if done[i] {
                continue;
            }
            let est = match atom.rel {
                None => 0,
                Some(rel) => {
                    let mut est = rel.len();
                    for (pos, s) in atom.args.iter().enumerate() {
                        let sym = match *s {
                            Slot::Var(v) => bind[v],
                            Slot::Const(k) => Some(k),
                            Slot::Unknown => return Some((i, 0)),
                        };
                        if let Some(sym) = sym {
                            est = est.min(rel.by_arg[pos].get(&sym).map_or(0, Vec::len));
                        }
                    }
                    est
                }
            };
            if best.is_none_or(|(_, b)| est < b) {
                best = Some((i, est));
            }
            if est == 0 {
                break;
            }
        }
        best
    }

    /// Calls `f` for every extension of `bind` that matches body atom `i`.
    /// `f` returns `true` to stop early; the return value reports whether
    /// it did.
    fn for_each_match(
        atom: &CompiledAtom,
        bind: &mut [Option<u32>],
        f: &mut dyn FnMut(&mut [Option<u32>]) -> bool,
    ) -> bool {
        let Some(rel) = atom.rel else { return false };
        let mut bound_arg: Option<(usize, u32)> = None;
        let mut best_len = usize::MAX;
        for (pos, s) in atom.args.iter().enumerate() {
            let sym = match *s {
                Slot::Var(v) => bind[v],
                Slot::Const(k) => Some(k),
                Slot::Unknown => return false,
            };
            if let Some(sym) = sym {
                let len = rel.by_arg[pos].get(&sym).map_or(0, Vec::len);
                if len < best_len {
                    best_len = len;
                    bound_arg = Some((pos, sym));
                }
            }
        }
        let all: Vec<u32>;
        let ids: &[u32] = match bound_arg {
            Some((pos, sym)) => match rel.by_arg[pos].get(&sym) {
                Some(ids) => ids,
                None => return false,
            },
            None => {
                all = (0..rel.len() as u32).collect();
                &all
            }
        };
        let mut newly: Vec<usize> = Vec::with_capacity(atom.args.len());
        for &id in ids {
            let tuple = rel.tuple(id);
            newly.clear();
            let mut ok = true;
            for (s, &val) in atom.args.iter().zip(tuple) {
                match *s {
                    Slot::Const(k) => {
                        if k != val {
                            ok = false;
                            break;
                        }
                    }
                    Slot::Var(v) => match bind[v] {
                        Some(b) if b != val => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            bind[v] = Some(val);
                            newly.push(v);
                        }
                    },
                    Slot::Unknown => {
                        ok = false;
                        break;
                    }
                }
            }
            let stop = ok && f(bind);
            for v in &newly {
                bind[*v] = None;
            }
            if stop {
                return true;
            }
        }
        false
    }

    fn exists(c: &Compiled, bind: &mut [Option<u32>], done: &mut [bool], left: usize) -> bool {
        if left == 0 {
            return true;
        }
        let Some((i, est)) = Self::pick(c, bind, done) else {
            return true;
        };
        if est == 0 {
            return false;
        }
        done[i] = true;
        let found = Self::for_each_match(&c.body[i], bind, &mut |b| {
            Self::exists(c, b, done, left - 1)
        });
        done[i] = false;
        found
    }

    fn enumerate(
        c: &Compiled,
        bind: &mut [Option<u32>],
        done: &mut [bool],
        left: usize,
        found: &mut HashSet<Vec<u32>>,
    ) {
        if let Some(key) = Self::head_key(c, bind) {
            if !found.contains(&key) && Self::exists(c, bind, done, left) {
                found.insert(key);
            }
            return;
        }
        if left == 0 {
            return;
        }
        let Some((i, est)) = Self::pick(c, bind, done) else {
            return;
        };
        if est == 0 {
            return;
        }
        done[i] = true;
        Self::for_each_match(&c.body[i], bind, &mut |b| {
            Self::enumerate(c, b, done, left - 1, found);
            false
        });
        done[i] = false;
    }

    /// Interned tuples of all head instances entailed by `clause`.
    fn entailed_keys(&self, clause: &Clause) -> HashSet<Vec<u32>> {
        let c = self.compile(clause);
        let mut found = HashSet::new();
        if c.head.contains(&Slot::Unknown) {
            return found;
        }
        let mut bind = vec![None; c.n_vars];
        let mut done = vec![false; c.body.len()];
        Self::enumerate(&c, &mut bind, &mut done, c.body.len(), &mut found);
        found
    }

    fn key_to_atom(&self, predicate: &str, key: &[u32]) -> Atom {
        Atom::new(
            predicate,
            key.iter()
                .map(|s| Term::Const(self.names[*s as usize].clone()))
                .collect(),
        )
    }

    /// All ground head instances whose body is satisfied by the indexed
    /// facts.
    pub fn entails(&self, clause: &Clause) -> BTreeSet<Atom> {
        self.entailed_keys(clause)
            .iter()
            .map(|k| self.key_to_atom(&clause.head.predicate, k))
            .collect()
    }

    /// Subset of `examples` whose atoms are entailed by `clause`.
    pub fn entailed_among(&self, clause: &Clause, examples: &[Atom]) -> Vec<bool> {
        let keys = self.entailed_keys(clause);
        examples
            .iter()
            .map(|e| {
                e.predicate == clause.head.predicate
                    && e.args
                        .iter()
                        .map(|t| self.symbols.get(t.name()).copied())
                        .collect::<Option<Vec<u32>>>()
                        .is_some_and(|k| keys.contains(&k))
            })
            .collect()
    }

    /// Whether `clause` proves the ground atom `target`: the head is unified
    /// with `target` and the body checked for one satisfying substitution.
    pub fn proves(&self, clause: &Clause, target: &Atom) -> bool {
        if clause.head.predicate != target.predicate || clause.head.arity() != target.arity() {
            return false;
        }
        let c = self.compile(clause);
        let mut bind = vec![None; c.n_vars];
        for (slot, t) in c.head.iter().zip(&target.args) {
            let Some(&sym) = self.symbols.get(t.name()) else {
                // Unknown constant: provable only by an empty body that
                // merely restates the head.
                return false;
            };
            match *slot {
                Slot::Const(k) if k != sym => return false,
                Slot::Const(_) => {}
                Slot::Unknown => return false,
                Slot::Var(v) => match bind[v] {
                    Some(b) if b != sym => return false,
                    _ => bind[v] = Some(sym),
                },
            }
        }
        let mut done = vec![false; c.body.len()];
        Self::exists(&c, &mut bind, &mut done, c.body.len())
    }
}

/// Ground head instances of `clause` over the background of `facts`.
/// Example atoms are not usable as body facts.
pub fn clause_entails(clause: &Clause, facts: &FactBase) -> BTreeSet<Atom> {
    FactIndex::from_facts(facts).entails(clause)
}

/// Positive and negative examples covered by at least one clause.
pub fn program_covers(program: &Program, facts: &FactBase) -> (BTreeSet<Atom>, BTreeSet<Atom>) {
    let idx = FactIndex::from_facts(facts);
    let mut entailed: BTreeSet<Atom> = BTreeSet::new();
    for c in program.clauses() {
        entailed.extend(idx.entails(c));
    }
    (
        facts.pos.intersection(&entailed).cloned().collect(),
        facts.neg.intersection(&entailed).cloned().collect(),
    )
}

/// Whether some clause of `program` proves `target` from `idx`.
pub fn program_proves(program: &Program, idx: &FactIndex, target: &Atom) -> bool {
    program.clauses().iter().any(|c| idx.proves(c, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::facts::parse_facts;
    use crate::logic::parse::{parse_clause, parse_program};

    fn set(atoms: &[&str]) -> BTreeSet<Atom> {
        atoms
            .iter()
            .map(|s| crate::logic::parse::parse_atom(s).unwrap())
            .collect()
    }

    #[test]
    fn rule_one_over_shoe_001() {
        let fb = parse_facts(
            "expensive(shoe_001). formal_shoes(shoe_001). black(shoe_001).",
            None,
        )
        .unwrap();
        let c = parse_clause("suitable_for_business(A):- expensive(A),formal_shoes(A).").unwrap();
        assert_eq!(
            clause_entails(&c, &fb),
            set(&["suitable_for_business(shoe_001)"])
        );
    }

    #[test]
    fn unsatisfiable_body() {
        let fb = parse_facts("expensive(shoe_002).", None).unwrap();
        let c = parse_clause("suitable_for_business(A):- expensive(A),formal_shoes(A).").unwrap();
        assert!(clause_entails(&c, &fb).is_empty());
    }

    #[test]
    fn examples_are_not_background() {
        let fb = parse_facts("pos(p(a)). q(a).", None).unwrap();
        let c = parse_clause("r(A):- p(A), q(A).").unwrap();
        assert!(clause_entails(&c, &fb).is_empty());
    }

    #[test]
    fn binary_join() {
        let fb = parse_facts(
            "has_piece(w1,p1). has_piece(w1,p2). has_piece(w2,p3). \
             contacts(p1,p2). contacts(p2,p1). blue(p2). blue(p3).",
            None,
        )
        .unwrap();
        let c = parse_clause("zendo(A):- has_piece(A,C), contacts(C,B), blue(B).").unwrap();
        assert_eq!(clause_entails(&c, &fb), set(&["zendo(w1)"]));
        let idx = FactIndex::from_facts(&fb);
        assert!(idx.proves(&c, &set(&["zendo(w1)"]).into_iter().next().unwrap()));
        assert!(!idx.proves(&c, &set(&["zendo(w2)"]).into_iter().next().unwrap()));
    }

    #[test]
    fn empty_program_covers_nothing() {
        let fb = parse_facts("a(x). pos(h(x)). neg(h(y)).", None).unwrap();
        let (p, n) = program_covers(&Program::empty(), &fb);
        assert!(p.is_empty() && n.is_empty());
    }

    #[test]
    fn shoes_two_rule_program() {
        let fb = parse_facts(
            "black(shoe_001). formal_shoes(shoe_001). leather(shoe_001). expensive(shoe_001). \
             very_comfortable(shoe_001). pos(suitable_for_business(shoe_001)).",
            None,
        )
        .unwrap();
        let prog = parse_program(
            "suitable_for_business(A):- expensive(A),formal_shoes(A).\n\
             suitable_for_business(A):- synthetic_leather(A),very_comfortable(A).",
        )
        .unwrap();
        let (p, n) = program_covers(&prog, &fb);
        assert_eq!(p, set(&["suitable_for_business(shoe_001)"]));
        assert!(n.is_empty());
    }

    #[test]
    fn repeated_variable_in_atom() {
        let fb = parse_facts("e(a,a). e(a,b). e(b,c).", None).unwrap();
        let c = parse_clause("loop(A):- e(A,A).").unwrap();
        assert_eq!(clause_entails(&c, &fb), set(&["loop(a)"]));
    }
}
