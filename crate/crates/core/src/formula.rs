//! S-expression formulas shared by the first-order and metalogic layers.
//!
//! Surface syntax:
//!
//! | notation            | spelling                  |
//! |---------------------|---------------------------|
//! | φ → ψ, φ ↔ ψ        | `(-> f g)`, `(<-> f g)`   |
//! | ¬, ∧, ∨             | `not`, `and`, `or`        |
//! | ∀x φ, ∃x φ          | `(forall x f)`, `(exists x f)` |
//! | □(p, f)             | `(box p f)`               |
//! | ⌜φ⌝                 | `(quote f)`               |
//! | ⊥                   | `bot`                     |
//! | Prv_PA, Con_PA      | `Prv`, `ConPA`            |
//!
//! Identifiers match `[A-Za-z][A-Za-z0-9_]*`, integers `[0-9]+`, and the
//! operator tokens `->`, `<->`, `+`, `*`, `=` are atoms as well.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const AND: &str = "and";
pub const OR: &str = "or";
pub const NOT: &str = "not";
pub const IMPLIES: &str = "->";
pub const IFF: &str = "<->";
pub const FORALL: &str = "forall";
pub const EXISTS: &str = "exists";
pub const BOX: &str = "box";
pub const QUOTE: &str = "quote";
pub const BOT: &str = "bot";

/// Heads with fixed meaning; they can never be declared by a signature.
pub const RESERVED: &[&str] = &[AND, OR, NOT, IMPLIES, IFF, FORALL, EXISTS, BOX, QUOTE, BOT];

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    Compound { head: String, args: Vec<Formula> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    /// `offset` is the 1-based byte position of the offending token, or
    /// `len + 1` when the input ends early.
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("sort mismatch: cannot replace {var} ({expected:?}) with {replacement} ({found:?})")]
    SortMismatch {
        var: String,
        expected: Sort,
        replacement: String,
        found: Sort,
    },
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn app(head: impl Into<String>, args: Vec<Formula>) -> Self {
        Formula::Compound {
            head: head.into(),
            args,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::app(NOT, vec![f])
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::app(IMPLIES, vec![a, b])
    }

    pub fn and(args: Vec<Formula>) -> Self {
        Formula::app(AND, args)
    }

    pub fn bot() -> Self {
        Formula::atom(BOT)
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Formula::Compound { head, .. } => Some(head),
            Formula::Atom(_) => None,
        }
    }

    pub fn args(&self) -> &[Formula] {
        match self {
            Formula::Compound { args, .. } => args,
            Formula::Atom(_) => &[],
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Formula::Atom(a) => Some(a),
            Formula::Compound { .. } => None,
        }
    }

    pub fn is_atom(&self, name: &str) -> bool {
        self.as_atom() == Some(name)
    }

    /// Matches `(head a b ...)` with exactly `arity` arguments.
    pub fn as_app(&self, head: &str, arity: usize) -> Option<&[Formula]> {
        match self {
            Formula::Compound { head: h, args } if h == head && args.len() == arity => Some(args),
            _ => None,
        }
    }

    /// `(-> a b)` as `(a, b)`.
    pub fn as_implication(&self) -> Option<(&Formula, &Formula)> {
        self.as_app(IMPLIES, 2).map(|a| (&a[0], &a[1]))
    }

    /// `(forall v body)` / `(exists v body)` as `(v, body)`.
    pub fn as_quantifier(&self, quantifier: &str) -> Option<(&str, &Formula)> {
        let args = self.as_app(quantifier, 2)?;
        Some((args[0].as_atom()?, &args[1]))
    }

    /// `(box T f)` as `(T, f)`.
    pub fn as_box(&self) -> Option<(&str, &Formula)> {
        let args = self.as_app(BOX, 2)?;
        Some((args[0].as_atom()?, &args[1]))
    }

    pub fn boxed(theory: &str, f: Formula) -> Self {
        Formula::app(BOX, vec![Formula::atom(theory), f])
    }

    /// Every atom occurring anywhere in the formula, including binders.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Compound { head, args } => {
                out.insert(head.clone());
                for a in args {
                    a.collect_atoms(out);
                }
            }
        }
    }

    /// Atoms that are not bound by a quantifier inside the formula.
    pub fn free_atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            Formula::Compound { head, args } => {
                if (head == FORALL || head == EXISTS) && args.len() == 2 {
                    if let Some(v) = args[0].as_atom() {
                        bound.push(v.to_string());
                        args[1].collect_free(bound, out);
                        bound.pop();
                        return;
                    }
                }
                for a in args {
                    a.collect_free(bound, out);
                }
            }
        }
    }

    /// All subformulas in pre-order, the formula itself first.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            out.extend(out[i].args().iter());
            i += 1;
        }
        out
    }

    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Formula::depth).max().unwrap_or(0)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Compound { head, args } => {
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Canonical single-space form. `parse(&print(f)) == Ok(f)`.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

impl FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                out.push((start, Token::Open));
                i += 1;
                continue;
            }
            b')' => {
                out.push((start, Token::Close));
                i += 1;
                continue;
            }
            b'A'..=b'Z' | b'a'..=b'z' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    return Err(syntax(i, "identifier may not start with a digit"));
                }
            }
            b'-' if text[i..].starts_with("->") => i += 2,
            b'<' if text[i..].starts_with("<->") => i += 3,
            b'+' | b'*' | b'=' => i += 1,
            _ => return Err(syntax(start, "illegal character")),
        }
        out.push((start, Token::Atom(text[start..i].to_string())));
    }
    Ok(out)
}

fn syntax(zero_based: usize, message: &str) -> FormulaError {
    FormulaError::Syntax {
        offset: zero_based + 1,
        message: message.to_string(),
    }
}

/// Parses exactly one formula.
pub fn parse(text: &str) -> Result<Formula, FormulaError> {
    let tokens = tokenize(text)?;
    let mut pos = 0;
    let f = parse_one(&tokens, &mut pos, text.len())?;
    if let Some((off, _)) = tokens.get(pos) {
        return Err(syntax(*off, "trailing input after formula"));
    }
    Ok(f)
}

fn parse_one(
    tokens: &[(usize, Token)],
    pos: &mut usize,
    len: usize,
) -> Result<Formula, FormulaError> {
    let Some((off, tok)) = tokens.get(*pos) else {
        return Err(syntax(len, "unexpected end of input"));
    };
    *pos += 1;
    match tok {
        Token::Atom(a) => Ok(Formula::Atom(a.clone())),
        Token::Close => Err(syntax(*off, "unbalanced `)`")),
        Token::Open => {
            let head = match tokens.get(*pos) {
                None => return Err(syntax(len, "unexpected end of input")),
                Some((o, Token::Close)) => return Err(syntax(*o, "empty compound")),
                Some((o, Token::Open)) => return Err(syntax(*o, "compound head must be an atom")),
                Some((_, Token::Atom(h))) => h.clone(),
            };
            *pos += 1;
            let mut args = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(syntax(len, "unbalanced `(`")),
                    Some((_, Token::Close)) => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => args.push(parse_one(tokens, pos, len)?),
                }
            }
            if args.is_empty() {
                return Err(syntax(*off, "compound needs at least one argument"));
            }
            Ok(Formula::Compound { head, args })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sort {
    PaTerm,
    PaWff,
    MlWff,
    FormulaSym,
    TheorySym,
    IllSorted,
}

impl Sort {
    /// Accepted where a (metalogic) wff is required.
    pub fn is_wff(self) -> bool {
        matches!(self, Sort::PaWff | Sort::MlWff | Sort::FormulaSym)
    }
}

/// Declares what every identifier denotes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct Signature {
    pub theories: BTreeSet<String>,
    pub formula_symbols: BTreeSet<String>,
    /// PA numeric variables.
    pub variables: BTreeSet<String>,
    pub predicates: BTreeMap<String, usize>,
    pub functions: BTreeMap<String, usize>,
}

impl Signature {
    /// PA arithmetic: `0` (any numeral), `S`, `+`, `*`, `=`.
    pub fn peano() -> Self {
        let mut sig = Signature::default();
        sig.functions.insert("S".into(), 1);
        sig.functions.insert("+".into(), 2);
        sig.functions.insert("*".into(), 2);
        sig.predicates.insert("=".into(), 2);
        sig
    }

    /// Union with `other`; `other` wins on arity conflicts.
    pub fn merged(mut self, other: &Signature) -> Self {
        self.theories.extend(other.theories.iter().cloned());
        self.formula_symbols
            .extend(other.formula_symbols.iter().cloned());
        self.variables.extend(other.variables.iter().cloned());
        self.predicates
            .extend(other.predicates.iter().map(|(k, v)| (k.clone(), *v)));
        self.functions
            .extend(other.functions.iter().map(|(k, v)| (k.clone(), *v)));
        self
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.theories.contains(name)
            || self.formula_symbols.contains(name)
            || self.variables.contains(name)
            || self.predicates.contains_key(name)
            || self.functions.contains_key(name)
    }

    /// Sort a variable of this name ranges over when bound.
    pub fn variable_sort(&self, name: &str) -> Sort {
        if self.formula_symbols.contains(name) {
            Sort::FormulaSym
        } else {
            Sort::PaTerm
        }
    }
}

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn is_identifier(s: &str) -> bool {
    s.bytes().next().is_some_and(|b| b.is_ascii_alphabetic())
}

/// Total classification; `Err` only for undeclared, unbound identifiers.
pub fn classify(f: &Formula, sig: &Signature) -> Result<Sort, FormulaError> {
    classify_in(f, sig, &mut Vec::new())
}

fn classify_in(
    f: &Formula,
    sig: &Signature,
    env: &mut Vec<(String, Sort)>,
) -> Result<Sort, FormulaError> {
    match f {
        Formula::Atom(a) => classify_atom(a, sig, env),
        Formula::Compound { head, args } => match head.as_str() {
            NOT | AND | OR | IMPLIES | IFF => {
                let ok_arity = match head.as_str() {
                    NOT => args.len() == 1,
                    IMPLIES | IFF => args.len() == 2,
                    _ => args.len() >= 2,
                };
                let mut all_pa = true;
                let mut ill = !ok_arity;
                for a in args {
                    let s = classify_in(a, sig, env)?;
                    if !s.is_wff() {
                        ill = true;
                    }
                    if s == Sort::MlWff {
                        all_pa = false;
                    }
                }
                Ok(if ill {
                    Sort::IllSorted
                } else if all_pa {
                    Sort::PaWff
                } else {
                    Sort::MlWff
                })
            }
            FORALL | EXISTS => {
                let var = match args.as_slice() {
                    [Formula::Atom(v), _] => v,
                    _ => {
                        for a in args {
                            classify_in(a, sig, env)?;
                        }
                        return Ok(Sort::IllSorted);
                    }
                };
                let var_sort = if !is_identifier(var) || RESERVED.contains(&var.as_str()) {
                    Sort::IllSorted
                } else if sig.formula_symbols.contains(var) {
                    Sort::FormulaSym
                } else if sig.variables.contains(var) || !sig.is_declared(var) {
                    Sort::PaTerm
                } else {
                    Sort::IllSorted
                };
                env.push((var.clone(), var_sort));
                let body = classify_in(&args[1], sig, env);
                env.pop();
                let body = body?;
                Ok(match (var_sort, body) {
                    (Sort::IllSorted, _) => Sort::IllSorted,
                    (_, b) if !b.is_wff() => Sort::IllSorted,
                    (Sort::FormulaSym, _) => Sort::MlWff,
                    (_, Sort::MlWff) => Sort::MlWff,
                    _ => Sort::PaWff,
                })
            }
            BOX => {
                let sorts = args
                    .iter()
                    .map(|a| classify_in(a, sig, env))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(match sorts.as_slice() {
                    [Sort::TheorySym, s] if s.is_wff() => Sort::MlWff,
                    _ => Sort::IllSorted,
                })
            }
            QUOTE => {
                let sorts = args
                    .iter()
                    .map(|a| classify_in(a, sig, env))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(match sorts.as_slice() {
                    [Sort::FormulaSym | Sort::PaWff] => Sort::PaTerm,
                    _ => Sort::IllSorted,
                })
            }
            BOT => Ok(Sort::IllSorted),
            h => {
                let (arity, result) = if let Some(&n) = sig.predicates.get(h) {
                    (n, Sort::PaWff)
                } else if let Some(&n) = sig.functions.get(h) {
                    (n, Sort::PaTerm)
                } else if sig.is_declared(h) || env.iter().any(|(v, _)| v == h) {
                    for a in args {
                        classify_in(a, sig, env)?;
                    }
                    return Ok(Sort::IllSorted);
                } else {
                    return Err(FormulaError::UnknownSymbol(h.to_string()));
                };
                let mut ill = arity != args.len();
                for a in args {
                    if classify_in(a, sig, env)? != Sort::PaTerm {
                        ill = true;
                    }
                }
                Ok(if ill { Sort::IllSorted } else { result })
            }
        },
    }
}

fn classify_atom(a: &str, sig: &Signature, env: &[(String, Sort)]) -> Result<Sort, FormulaError> {
    if let Some((_, s)) = env.iter().rev().find(|(v, _)| v == a) {
        return Ok(*s);
    }
    if is_numeral(a) {
        return Ok(Sort::PaTerm);
    }
    if a == BOT {
        return Ok(Sort::PaWff);
    }
    if RESERVED.contains(&a) {
        return Ok(Sort::IllSorted);
    }
    if sig.theories.contains(a) {
        Ok(Sort::TheorySym)
    } else if sig.formula_symbols.contains(a) {
        Ok(Sort::FormulaSym)
    } else if sig.variables.contains(a) {
        Ok(Sort::PaTerm)
    } else if let Some(&n) = sig.functions.get(a) {
        Ok(if n == 0 {
            Sort::PaTerm
        } else {
            Sort::IllSorted
        })
    } else if let Some(&n) = sig.predicates.get(a) {
        Ok(if n == 0 { Sort::PaWff } else { Sort::IllSorted })
    } else {
        Err(FormulaError::UnknownSymbol(a.to_string()))
    }
}

/// True when a value of sort `found` may stand in for a variable of sort `var`.
/// Formula symbols denote PA wffs, so they accept PA wffs as well.
pub fn substitutable(var: Sort, found: Sort) -> bool {
    match var {
        Sort::FormulaSym => matches!(found, Sort::FormulaSym | Sort::PaWff),
        Sort::PaTerm => found == Sort::PaTerm,
        _ => false,
    }
}

/// Capture-avoiding substitution of the free occurrences of `var`.
///
/// Inner binders that would capture a free atom of `replacement` are renamed
/// to `<name><k>` with the lowest `k` not occurring in either formula.
pub fn substitute(
    f: &Formula,
    var: &str,
    replacement: &Formula,
    sig: &Signature,
) -> Result<Formula, FormulaError> {
    let expected = sig.variable_sort(var);
    let found = classify(replacement, sig)?;
    if !substitutable(expected, found) {
        return Err(FormulaError::SortMismatch {
            var: var.to_string(),
            expected,
            replacement: replacement.to_string(),
            found,
        });
    }
    Ok(substitute_unchecked(f, var, replacement))
}

/// [`substitute`] without the sort check.
pub fn substitute_unchecked(f: &Formula, var: &str, replacement: &Formula) -> Formula {
    let danger = replacement.free_atoms();
    let mut used = f.atoms();
    used.extend(replacement.atoms());
    subst_rec(f, var, replacement, &danger, &mut used)
}

fn subst_rec(
    f: &Formula,
    var: &str,
    rep: &Formula,
    danger: &BTreeSet<String>,
    used: &mut BTreeSet<String>,
) -> Formula {
    match f {
        Formula::Atom(a) if a == var => rep.clone(),
        Formula::Atom(_) => f.clone(),
        Formula::Compound { head, args } => {
            if (head == FORALL || head == EXISTS) && args.len() == 2 {
                if let Some(bound) = args[0].as_atom() {
                    if bound == var {
                        return f.clone();
                    }
                    if !args[1].free_atoms().contains(var) {
                        return f.clone();
                    }
                    if danger.contains(bound) {
                        let fresh = fresh_name(bound, used);
                        used.insert(fresh.clone());
                        let renamed = substitute_unchecked(&args[1], bound, &Formula::atom(&fresh));
                        let body = subst_rec(&renamed, var, rep, danger, used);
                        return Formula::app(head.clone(), vec![Formula::atom(fresh), body]);
                    }
                    let body = subst_rec(&args[1], var, rep, danger, used);
                    return Formula::app(head.clone(), vec![args[0].clone(), body]);
                }
            }
            Formula::Compound {
                head: head.clone(),
                args: args
                    .iter()
                    .map(|a| subst_rec(a, var, rep, danger, used))
                    .collect(),
            }
        }
    }
}

fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    (0..)
        .map(|k| format!("{base}{k}"))
        .find(|n| !used.contains(n))
        .expect("unbounded")
}
