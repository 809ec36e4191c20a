//! First-order resolution without equality.
//!
//! [`to_cnf`] reads an S-expression formula first-order style: connectives
//! and quantifiers are logical, any other compound in wff position is a
//! predicate application and everything below a predicate is a term.
//! [`saturate`] runs a given-clause loop (smallest clause first, FIFO on
//! ties) with binary resolution and factoring until it derives the empty
//! clause, runs out of work, or hits the clause budget.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::formula::{Formula, AND, BOT, EXISTS, FORALL, IFF, IMPLIES, NOT, OR};

pub type Sym = Arc<str>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(u32),
    /// Constants are 0-ary functions.
    Fn(Sym, Vec<Term>),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Fn(name.into(), Vec::new())
    }

    pub fn func(name: &str, args: Vec<Term>) -> Self {
        Term::Fn(name.into(), args)
    }

    fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Fn(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    fn shifted(&self, by: u32) -> Term {
        match self {
            Term::Var(v) => Term::Var(v + by),
            Term::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| a.shifted(by)).collect()),
        }
    }

    fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Fn(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "X{v}"),
            Term::Fn(name, args) if args.is_empty() => write!(f, "{name}"),
            Term::Fn(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub positive: bool,
    pub predicate: Sym,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(positive: bool, predicate: &str, args: Vec<Term>) -> Self {
        Literal {
            positive,
            predicate: predicate.into(),
            args,
        }
    }

    pub fn negated(&self) -> Literal {
        Literal {
            positive: !self.positive,
            ..self.clone()
        }
    }

    fn apply(&self, s: &Substitution) -> Literal {
        Literal {
            positive: self.positive,
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| s.apply(t)).collect(),
        }
    }

    fn shifted(&self, by: u32) -> Literal {
        Literal {
            positive: self.positive,
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| t.shifted(by)).collect(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("~")?;
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Caller-supplied tag, e.g. the index of the premise the clause came from.
    Input(usize),
    Resolvent(usize, usize),
    Factor(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub id: usize,
    /// Sorted, duplicate-free; variables numbered from 0 per clause.
    pub literals: Vec<Literal>,
    pub origin: Origin,
}

impl Clause {
    pub fn input(literals: Vec<Literal>, tag: usize) -> Self {
        Clause {
            id: 0,
            literals,
            origin: Origin::Input(tag),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    fn max_var(&self) -> Option<u32> {
        self.literals
            .iter()
            .flat_map(|l| l.args.iter().filter_map(Term::max_var))
            .max()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("[]");
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Idempotent variable bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<u32, Term>,
}

impl Substitution {
    pub fn bindings(&self) -> &BTreeMap<u32, Term> {
        &self.bindings
    }

    pub fn get(&self, v: u32) -> Option<&Term> {
        self.bindings.get(&v)
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        l.apply(self)
    }

    pub fn from_bindings(bindings: BTreeMap<u32, Term>) -> Self {
        Substitution { bindings }
    }
}

fn walk<'a>(t: &'a Term, env: &'a HashMap<u32, Term>) -> &'a Term {
    let mut cur = t;
    while let Term::Var(v) = cur {
        match env.get(v) {
            Some(next) => cur = next,
            None => break,
        }
    }
    cur
}

fn occurs_deep(v: u32, t: &Term, env: &HashMap<u32, Term>) -> bool {
    match walk(t, env) {
        Term::Var(w) => *w == v,
        Term::Fn(_, args) => args.iter().any(|a| occurs_deep(v, a, env)),
    }
}

fn unify_into(a: &Term, b: &Term, env: &mut HashMap<u32, Term>) -> bool {
    let a = walk(a, env).clone();
    let b = walk(b, env).clone();
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), t) | (t, Term::Var(x)) => {
            if occurs_deep(*x, t, env) {
                return false;
            }
            env.insert(*x, t.clone());
            true
        }
        (Term::Fn(f, fa), Term::Fn(g, ga)) => {
            f == g && fa.len() == ga.len() && fa.iter().zip(ga).all(|(x, y)| unify_into(x, y, env))
        }
    }
}

fn resolve_fully(t: &Term, env: &HashMap<u32, Term>) -> Term {
    match walk(t, env) {
        Term::Var(v) => Term::Var(*v),
        Term::Fn(f, args) => Term::Fn(
            f.clone(),
            args.iter().map(|a| resolve_fully(a, env)).collect(),
        ),
    }
}

fn finish(env: HashMap<u32, Term>) -> Substitution {
    let bindings = env
        .keys()
        .map(|&v| (v, resolve_fully(&Term::Var(v), &env)))
        .filter(|(v, t)| *t != Term::Var(*v))
        .collect();
    Substitution { bindings }
}

fn unify_args(a: &[Term], b: &[Term]) -> Option<Substitution> {
    if a.len() != b.len() {
        return None;
    }
    let mut env = HashMap::new();
    a.iter()
        .zip(b)
        .all(|(x, y)| unify_into(x, y, &mut env))
        .then(|| finish(env))
}

/// Most general unifier of two terms, with occurs check.
pub fn unify_terms(a: &Term, b: &Term) -> Option<Substitution> {
    unify_args(std::slice::from_ref(a), std::slice::from_ref(b))
}

/// Most general unifier of the atoms of two literals (polarity is ignored).
pub fn unify(a: &Literal, b: &Literal) -> Option<Substitution> {
    if a.predicate != b.predicate {
        return None;
    }
    unify_args(&a.args, &b.args)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("equality is not supported by the resolution backend")]
    EqualityUnsupported,
    #[error("not a first-order wff: {0}")]
    NotFirstOrder(String),
}

#[derive(Debug, Clone)]
enum Fol {
    Atom(Literal),
    Not(Box<Fol>),
    And(Vec<Fol>),
    Or(Vec<Fol>),
    Imp(Box<Fol>, Box<Fol>),
    Iff(Box<Fol>, Box<Fol>),
    Forall(u32, Box<Fol>),
    Exists(u32, Box<Fol>),
    True,
    False,
}

/// Converts formulas to clauses, sharing the Skolem and variable counters
/// across calls so clauses from several formulas never collide.
#[derive(Debug, Default)]
pub struct CnfBuilder {
    next_var: u32,
    next_skolem: usize,
}

impl CnfBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// CNF of `f`, each clause tagged `Origin::Input(tag)`.
    pub fn clauses(&mut self, f: &Formula, tag: usize) -> Result<Vec<Clause>, CnfError> {
        let fol = self.read_wff(f, &mut Vec::new())?;
        let nnf = nnf(elim(fol), true);
        let std = self.standardize(nnf, &mut Vec::new());
        let sk = self.skolemize(std, &mut Vec::new(), &mut BTreeMap::new());
        let mut out = Vec::new();
        for lits in distribute(&sk) {
            if let Some(c) = normalize(lits) {
                out.push(Clause::input(c, tag));
            }
        }
        Ok(out)
    }

    fn fresh_var(&mut self) -> u32 {
        self.next_var += 1;
        self.next_var - 1
    }

    fn read_wff(&mut self, f: &Formula, env: &mut Vec<(String, u32)>) -> Result<Fol, CnfError> {
        match f {
            Formula::Atom(a) if a == BOT => Ok(Fol::False),
            Formula::Atom(a) => {
                if env.iter().any(|(v, _)| v == a) {
                    return Err(CnfError::NotFirstOrder(format!(
                        "variable `{a}` used as a formula"
                    )));
                }
                Ok(Fol::Atom(Literal::new(true, a, Vec::new())))
            }
            Formula::Compound { head, args } => {
                let wffs = |me: &mut Self, env: &mut Vec<(String, u32)>| {
                    args.iter()
                        .map(|a| me.read_wff(a, env))
                        .collect::<Result<Vec<_>, _>>()
                };
                match (head.as_str(), args.len()) {
                    (NOT, 1) => Ok(Fol::Not(Box::new(self.read_wff(&args[0], env)?))),
                    (AND, _) => Ok(Fol::And(wffs(self, env)?)),
                    (OR, _) => Ok(Fol::Or(wffs(self, env)?)),
                    (IMPLIES, 2) => {
                        let mut w = wffs(self, env)?;
                        let b = w.pop().unwrap();
                        let a = w.pop().unwrap();
                        Ok(Fol::Imp(Box::new(a), Box::new(b)))
                    }
                    (IFF, 2) => {
                        let mut w = wffs(self, env)?;
                        let b = w.pop().unwrap();
                        let a = w.pop().unwrap();
                        Ok(Fol::Iff(Box::new(a), Box::new(b)))
                    }
                    (FORALL | EXISTS, 2) => {
                        let Some(v) = args[0].as_atom() else {
                            return Err(CnfError::NotFirstOrder(f.to_string()));
                        };
                        let id = self.fresh_var();
                        env.push((v.to_string(), id));
                        let body = self.read_wff(&args[1], env);
                        env.pop();
                        let body = Box::new(body?);
                        Ok(if head == FORALL {
                            Fol::Forall(id, body)
                        } else {
                            Fol::Exists(id, body)
                        })
                    }
                    (NOT | IMPLIES | IFF | FORALL | EXISTS, _) => {
                        Err(CnfError::NotFirstOrder(f.to_string()))
                    }
                    ("=", _) => Err(CnfError::EqualityUnsupported),
                    (p, _) => {
                        let terms = args
                            .iter()
                            .map(|a| read_term(a, env))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(Fol::Atom(Literal::new(true, p, terms)))
                    }
                }
            }
        }
    }

    fn standardize(&mut self, f: Fol, env: &mut Vec<(u32, u32)>) -> Fol {
        match f {
            Fol::Atom(l) => Fol::Atom(Literal {
                args: l.args.iter().map(|t| rename_vars(t, env)).collect(),
                ..l
            }),
            Fol::Not(a) => Fol::Not(Box::new(self.standardize(*a, env))),
            Fol::And(v) => Fol::And(v.into_iter().map(|x| self.standardize(x, env)).collect()),
            Fol::Or(v) => Fol::Or(v.into_iter().map(|x| self.standardize(x, env)).collect()),
            Fol::Forall(v, b) => {
                let fresh = self.fresh_var();
                env.push((v, fresh));
                let body = self.standardize(*b, env);
                env.pop();
                Fol::Forall(fresh, Box::new(body))
            }
            Fol::Exists(v, b) => {
                let fresh = self.fresh_var();
                env.push((v, fresh));
                let body = self.standardize(*b, env);
                env.pop();
                Fol::Exists(fresh, Box::new(body))
            }
            other => other,
        }
    }

    fn skolemize(
        &mut self,
        f: Fol,
        universals: &mut Vec<u32>,
        sk: &mut BTreeMap<u32, Term>,
    ) -> Fol {
        match f {
            Fol::Atom(l) => Fol::Atom(Literal {
                args: l.args.iter().map(|t| replace_vars(t, sk)).collect(),
                ..l
            }),
            Fol::Not(a) => Fol::Not(Box::new(self.skolemize(*a, universals, sk))),
            Fol::And(v) => Fol::And(
                v.into_iter()
                    .map(|x| self.skolemize(x, universals, sk))
                    .collect(),
            ),
            Fol::Or(v) => Fol::Or(
                v.into_iter()
                    .map(|x| self.skolemize(x, universals, sk))
                    .collect(),
            ),
            Fol::Forall(v, b) => {
                universals.push(v);
                let body = self.skolemize(*b, universals, sk);
                universals.pop();
                body
            }
            Fol::Exists(v, b) => {
                let name = format!("sk{}", self.next_skolem);
                self.next_skolem += 1;
                let term = Term::Fn(
                    name.into(),
                    universals.iter().map(|u| Term::Var(*u)).collect(),
                );
                sk.insert(v, term);
                let body = self.skolemize(*b, universals, sk);
                sk.remove(&v);
                body
            }
            other => other,
        }
    }
}

/// Convenience wrapper around a fresh [`CnfBuilder`].
pub fn to_cnf(f: &Formula) -> Result<Vec<Clause>, CnfError> {
    CnfBuilder::new().clauses(f, 0)
}

fn read_term(f: &Formula, env: &[(String, u32)]) -> Result<Term, CnfError> {
    match f {
        Formula::Atom(a) => Ok(match env.iter().rev().find(|(v, _)| v == a) {
            Some((_, id)) => Term::Var(*id),
            None => Term::constant(a),
        }),
        Formula::Compound { head, args } => {
            // Formulas encoded as terms keep their own binders as constants.
            if (head == FORALL || head == EXISTS) && args.len() == 2 {
                if let Some(v) = args[0].as_atom() {
                    let inner: Vec<(String, u32)> =
                        env.iter().filter(|(n, _)| n != v).cloned().collect();
                    return Ok(Term::func(
                        head,
                        vec![Term::constant(v), read_term(&args[1], &inner)?],
                    ));
                }
            }
            Ok(Term::func(
                head,
                args.iter()
                    .map(|a| read_term(a, env))
                    .collect::<Result<_, _>>()?,
            ))
        }
    }
}

fn rename_vars(t: &Term, env: &[(u32, u32)]) -> Term {
    match t {
        Term::Var(v) => Term::Var(
            env.iter()
                .rev()
                .find(|(o, _)| o == v)
                .map(|(_, n)| *n)
                .unwrap_or(*v),
        ),
        Term::Fn(f, args) => Term::Fn(
            f.clone(),
            args.iter().map(|a| rename_vars(a, env)).collect(),
        ),
    }
}

fn replace_vars(t: &Term, sk: &BTreeMap<u32, Term>) -> Term {
    match t {
        Term::Var(v) => sk.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Fn(f, args) => Term::Fn(
            f.clone(),
            args.iter().map(|a| replace_vars(a, sk)).collect(),
        ),
    }
}

fn elim(f: Fol) -> Fol {
    match f {
        Fol::Imp(a, b) => Fol::Or(vec![Fol::Not(Box::new(elim(*a))), elim(*b)]),
        Fol::Iff(a, b) => {
            let (a, b) = (elim(*a), elim(*b));
            Fol::And(vec![
                Fol::Or(vec![Fol::Not(Box::new(a.clone())), b.clone()]),
                Fol::Or(vec![Fol::Not(Box::new(b)), a]),
            ])
        }
        Fol::Not(a) => Fol::Not(Box::new(elim(*a))),
        Fol::And(v) => Fol::And(v.into_iter().map(elim).collect()),
        Fol::Or(v) => Fol::Or(v.into_iter().map(elim).collect()),
        Fol::Forall(v, b) => Fol::Forall(v, Box::new(elim(*b))),
        Fol::Exists(v, b) => Fol::Exists(v, Box::new(elim(*b))),
        other => other,
    }
}

/// Negation normal form of `f` (or of its negation when `positive` is false).
fn nnf(f: Fol, positive: bool) -> Fol {
    match (f, positive) {
        (Fol::Atom(l), true) => Fol::Atom(l),
        (Fol::Atom(l), false) => Fol::Atom(l.negated()),
        (Fol::Not(a), p) => nnf(*a, !p),
        (Fol::And(v), true) => Fol::And(v.into_iter().map(|x| nnf(x, true)).collect()),
        (Fol::And(v), false) => Fol::Or(v.into_iter().map(|x| nnf(x, false)).collect()),
        (Fol::Or(v), true) => Fol::Or(v.into_iter().map(|x| nnf(x, true)).collect()),
        (Fol::Or(v), false) => Fol::And(v.into_iter().map(|x| nnf(x, false)).collect()),
        (Fol::Forall(x, b), true) => Fol::Forall(x, Box::new(nnf(*b, true))),
        (Fol::Forall(x, b), false) => Fol::Exists(x, Box::new(nnf(*b, false))),
        (Fol::Exists(x, b), true) => Fol::Exists(x, Box::new(nnf(*b, true))),
        (Fol::Exists(x, b), false) => Fol::Forall(x, Box::new(nnf(*b, false))),
        (Fol::True, true) | (Fol::False, false) => Fol::True,
        (Fol::True, false) | (Fol::False, true) => Fol::False,
        (f @ (Fol::Imp(..) | Fol::Iff(..)), p) => nnf(elim(f), p),
    }
}

/// Clause sets of a quantifier-free NNF formula.
fn distribute(f: &Fol) -> Vec<Vec<Literal>> {
    match f {
        Fol::Atom(l) => vec![vec![l.clone()]],
        Fol::True => Vec::new(),
        Fol::False => vec![Vec::new()],
        Fol::And(v) => v.iter().flat_map(distribute).collect(),
        Fol::Or(v) => {
            let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
            for part in v {
                let cs = distribute(part);
                let mut next = Vec::with_capacity(acc.len() * cs.len());
                for a in &acc {
                    for c in &cs {
                        let mut merged = a.clone();
                        merged.extend(c.iter().cloned());
                        next.push(merged);
                    }
                }
                acc = next;
            }
            acc
        }
        Fol::Not(_) | Fol::Imp(..) | Fol::Iff(..) | Fol::Forall(..) | Fol::Exists(..) => {
            unreachable!("distribute expects skolemized NNF")
        }
    }
}

/// Sorts and dedups literals and renumbers variables from 0; `None` for tautologies.
fn normalize(mut lits: Vec<Literal>) -> Option<Vec<Literal>> {
    lits.sort();
    lits.dedup();
    for w in 0..lits.len() {
        for v in w + 1..lits.len() {
            if lits[w].predicate == lits[v].predicate
                && lits[w].positive != lits[v].positive
                && lits[w].args == lits[v].args
            {
                return None;
            }
        }
    }
    let mut map: HashMap<u32, u32> = HashMap::new();
    fn renum(t: &Term, map: &mut HashMap<u32, u32>) -> Term {
        match t {
            Term::Var(v) => {
                let n = map.len() as u32;
                Term::Var(*map.entry(*v).or_insert(n))
            }
            Term::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| renum(a, map)).collect()),
        }
    }
    let mut out: Vec<Literal> = lits
        .iter()
        .map(|l| Literal {
            positive: l.positive,
            predicate: l.predicate.clone(),
            args: l.args.iter().map(|t| renum(t, &mut map)).collect(),
        })
        .collect();
    out.sort();
    out.dedup();
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofDag {
    /// The empty clause and all its ancestors, by ascending id.
    pub clauses: Vec<Clause>,
    pub empty_clause: usize,
}

impl ProofDag {
    /// Input tags of the leaves of the refutation.
    pub fn input_tags(&self) -> BTreeSet<usize> {
        self.clauses
            .iter()
            .filter_map(|c| match c.origin {
                Origin::Input(t) => Some(t),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Refutation(ProofDag),
    Saturated,
    LimitExceeded,
    TimedOut,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Refutation(_) => "Refutation",
            Verdict::Saturated => "Saturated",
            Verdict::LimitExceeded => "LimitExceeded",
            Verdict::TimedOut => "TimedOut",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdict: Verdict,
    /// Retained clauses, inputs included.
    pub clauses_generated: usize,
    pub clauses: Vec<Clause>,
}

impl Outcome {
    pub fn is_refutation(&self) -> bool {
        matches!(self.verdict, Verdict::Refutation(_))
    }

    pub fn proof(&self) -> Option<&ProofDag> {
        match &self.verdict {
            Verdict::Refutation(p) => Some(p),
            _ => None,
        }
    }

    /// Numbered clause list with parent ids, one clause per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.clauses {
            let from = match c.origin {
                Origin::Input(t) => format!("input {t}"),
                Origin::Resolvent(a, b) => format!("{a},{b}"),
                Origin::Factor(a) => format!("factor {a}"),
            };
            out.push_str(&format!("{}: {}  [{}]\n", c.id, c, from));
        }
        out
    }
}

struct Prover {
    clauses: Vec<Clause>,
    seen: HashSet<Vec<Literal>>,
    passive: BinaryHeap<Reverse<(usize, usize)>>,
    active: Vec<usize>,
    index: HashMap<(Sym, bool), Vec<(usize, usize)>>,
    limit: usize,
}

enum Step {
    Continue,
    Empty(usize),
    Limit,
}

impl Prover {
    fn retain(&mut self, lits: Vec<Literal>, origin: Origin) -> Step {
        let Some(lits) = normalize(lits) else {
            return Step::Continue;
        };
        if !self.seen.insert(lits.clone()) {
            return Step::Continue;
        }
        let id = self.clauses.len();
        let empty = lits.is_empty();
        // The empty clause is always kept; anything else must fit the limit.
        if !empty && id >= self.limit {
            return Step::Limit;
        }
        let len = lits.len();
        self.clauses.push(Clause {
            id,
            literals: lits,
            origin,
        });
        if empty {
            return Step::Empty(id);
        }
        self.passive.push(Reverse((len, id)));
        Step::Continue
    }

    fn activate(&mut self, id: usize) {
        self.active.push(id);
        for (k, l) in self.clauses[id].literals.iter().enumerate() {
            self.index
                .entry((l.predicate.clone(), l.positive))
                .or_default()
                .push((id, k));
        }
    }

    /// Resolvents of `given` against the active set (itself included) and its factors.
    fn infer(&self, given: usize) -> Vec<(Vec<Literal>, Origin)> {
        let mut out = Vec::new();
        let g = &self.clauses[given];
        for i in 0..g.literals.len() {
            for j in i + 1..g.literals.len() {
                let (a, b) = (&g.literals[i], &g.literals[j]);
                if a.positive == b.positive {
                    if let Some(s) = unify(a, b) {
                        let lits = g.literals.iter().map(|l| l.apply(&s)).collect();
                        out.push((lits, Origin::Factor(given)));
                    }
                }
            }
        }
        let shift = g.max_var().map(|m| m + 1).unwrap_or(0);
        for (gi, gl) in g.literals.iter().enumerate() {
            let Some(partners) = self.index.get(&(gl.predicate.clone(), !gl.positive)) else {
                continue;
            };
            for &(other, oi) in partners {
                let o = &self.clauses[other];
                let ol = o.literals[oi].shifted(shift);
                let Some(s) = unify(gl, &ol) else {
                    continue;
                };
                let mut lits: Vec<Literal> =
                    Vec::with_capacity(g.literals.len() + o.literals.len() - 2);
                lits.extend(
                    g.literals
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != gi)
                        .map(|(_, l)| l.apply(&s)),
                );
                lits.extend(
                    o.literals
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != oi)
                        .map(|(_, l)| l.shifted(shift).apply(&s)),
                );
                out.push((lits, Origin::Resolvent(given, other)));
            }
        }
        out
    }

    fn proof(&self, empty: usize) -> ProofDag {
        let mut keep = BTreeSet::new();
        let mut stack = vec![empty];
        while let Some(c) = stack.pop() {
            if !keep.insert(c) {
                continue;
            }
            match self.clauses[c].origin {
                Origin::Input(_) => {}
                Origin::Resolvent(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Origin::Factor(a) => stack.push(a),
            }
        }
        ProofDag {
            clauses: keep.into_iter().map(|c| self.clauses[c].clone()).collect(),
            empty_clause: empty,
        }
    }
}

/// Given-clause saturation. `clause_limit` bounds the retained clauses
/// (inputs included); `deadline` aborts with [`Verdict::TimedOut`].
pub fn saturate(input: Vec<Clause>, clause_limit: usize, deadline: Option<Instant>) -> Outcome {
    let mut p = Prover {
        clauses: Vec::new(),
        seen: HashSet::new(),
        passive: BinaryHeap::new(),
        active: Vec::new(),
        index: HashMap::new(),
        limit: clause_limit.max(1),
    };
    let finish = |p: Prover, verdict: Verdict| Outcome {
        verdict,
        clauses_generated: p.clauses.len(),
        clauses: p.clauses,
    };
    for c in input {
        match p.retain(c.literals, c.origin) {
            Step::Continue => {}
            Step::Empty(e) => {
                let dag = p.proof(e);
                return finish(p, Verdict::Refutation(dag));
            }
            Step::Limit => return finish(p, Verdict::LimitExceeded),
        }
    }
    let mut steps = 0usize;
    while let Some(Reverse((_, given))) = p.passive.pop() {
        steps += 1;
        if steps.is_multiple_of(16) && deadline.is_some_and(|d| Instant::now() >= d) {
            return finish(p, Verdict::TimedOut);
        }
        p.activate(given);
        for (lits, origin) in p.infer(given) {
            match p.retain(lits, origin) {
                Step::Continue => {}
                Step::Empty(e) => {
                    let dag = p.proof(e);
                    return finish(p, Verdict::Refutation(dag));
                }
                Step::Limit => return finish(p, Verdict::LimitExceeded),
            }
        }
    }
    finish(p, Verdict::Saturated)
}

/// Symbol count of a clause; handy for reporting.
pub fn clause_weight(c: &Clause) -> usize {
    c.literals
        .iter()
        .map(|l| 1 + l.args.iter().map(Term::size).sum::<usize>())
        .sum()
}
