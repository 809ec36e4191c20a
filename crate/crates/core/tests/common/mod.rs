//! Independent oracles and random generators shared by the integration
//! tests and the acceptance suite. Nothing here calls into the code under
//! test except to obtain the value being checked.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use matr::formula::{Formula, Signature};
use matr::proofspace::{NodeId, ProofSpace, SpaceJson, ROOT};
use matr::pruning;
use matr::resolution::{saturate, to_cnf, unify, Clause, Literal, Substitution, Term, Verdict};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Agreement tally for one oracle comparison.
#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub total: usize,
    pub agree: usize,
    pub failures: Vec<String>,
    /// Outcome histogram, so tests can reject vacuous samples.
    pub kinds: BTreeMap<&'static str, usize>,
}

impl Tally {
    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.agree += 1;
        } else if self.failures.len() < 5 {
            self.failures.push(what());
        }
    }

    pub fn bump(&mut self, kind: &'static str) {
        *self.kinds.entry(kind).or_default() += 1;
    }

    pub fn saw(&self, kind: &str) -> bool {
        self.kinds.get(kind).is_some_and(|&n| n > 0)
    }

    pub fn perfect(&self) -> bool {
        self.total > 0 && self.agree == self.total
    }
}

// ---------------------------------------------------------------- propositional

/// Clause as (positive, atom index) pairs.
pub type PropClause = Vec<(bool, usize)>;

pub fn random_prop_clauses(r: &mut StdRng) -> (usize, Vec<PropClause>) {
    let atoms = r.gen_range(1..=4);
    let n = r.gen_range(1..=10);
    let clauses = (0..n)
        .map(|_| {
            let len = r.gen_range(0..=3);
            (0..len)
                .map(|_| (r.gen_bool(0.5), r.gen_range(0..atoms)))
                .collect()
        })
        .collect();
    (atoms, clauses)
}

pub fn truth_table_sat(atoms: usize, clauses: &[PropClause]) -> bool {
    (0..1u32 << atoms).any(|m| {
        clauses
            .iter()
            .all(|c| c.iter().any(|&(pos, a)| ((m >> a) & 1 == 1) == pos))
    })
}

pub fn to_input(clauses: &[PropClause]) -> Vec<Clause> {
    clauses
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let lits = c
                .iter()
                .map(|&(pos, a)| Literal::new(pos, &format!("p{a}"), vec![]))
                .collect();
            Clause::input(lits, i)
        })
        .collect()
}

/// Saturation verdicts against truth tables over `n` random clause sets.
pub fn resolution_soundness(n: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    for _ in 0..n {
        let (atoms, clauses) = random_prop_clauses(&mut r);
        let sat = truth_table_sat(atoms, &clauses);
        t.bump(if sat { "sat" } else { "unsat" });
        let out = saturate(to_input(&clauses), 100_000, None);
        let ok = match &out.verdict {
            Verdict::Refutation(_) => !sat,
            Verdict::Saturated => sat,
            _ => false,
        };
        t.record(ok, || {
            format!("{clauses:?}: sat={sat}, got {}", out.verdict.name())
        });
    }
    t
}

// ---------------------------------------------------------------- first order

const VARS: [&str; 3] = ["x", "y", "z"];

fn random_atom(r: &mut StdRng, bound: &[&'static str]) -> Formula {
    let term = |r: &mut StdRng| {
        if bound.is_empty() || r.gen_bool(0.2) {
            Formula::atom("c")
        } else {
            Formula::atom(bound[r.gen_range(0..bound.len())])
        }
    };
    match r.gen_range(0..3) {
        0 => Formula::atom("R"),
        1 => Formula::app("P", vec![term(r)]),
        _ => {
            let a = term(r);
            Formula::app("Q", vec![a, term(r)])
        }
    }
}

pub fn random_fol(r: &mut StdRng, depth: usize, bound: &mut Vec<&'static str>) -> Formula {
    if depth == 0 || r.gen_bool(0.2) {
        return random_atom(r, bound);
    }
    match r.gen_range(0..7) {
        0 => Formula::not(random_fol(r, depth - 1, bound)),
        1..=4 => {
            let head = ["and", "or", "->", "<->"][r.gen_range(0..4)];
            let a = random_fol(r, depth - 1, bound);
            let b = random_fol(r, depth - 1, bound);
            Formula::app(head, vec![a, b])
        }
        _ => {
            let q = if r.gen_bool(0.5) { "forall" } else { "exists" };
            let v = VARS[r.gen_range(0..VARS.len())];
            bound.push(v);
            let body = random_fol(r, depth - 1, bound);
            bound.pop();
            Formula::app(q, vec![Formula::atom(v), body])
        }
    }
}

/// Interpretation over the domain {0, 1}.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub r: bool,
    pub p: [bool; 2],
    pub q: [[bool; 2]; 2],
    pub c: usize,
    /// Function symbol -> table indexed by the argument tuple read as bits.
    pub funcs: BTreeMap<String, Vec<usize>>,
}

fn base_models() -> impl Iterator<Item = Model> {
    (0..256u32).map(|m| Model {
        r: m & 1 == 1,
        p: [m >> 1 & 1 == 1, m >> 2 & 1 == 1],
        q: [
            [m >> 3 & 1 == 1, m >> 4 & 1 == 1],
            [m >> 5 & 1 == 1, m >> 6 & 1 == 1],
        ],
        c: (m >> 7 & 1) as usize,
        funcs: BTreeMap::new(),
    })
}

fn eval_term_f(t: &Formula, env: &BTreeMap<String, usize>, m: &Model) -> usize {
    match t.as_atom() {
        Some(v) if env.contains_key(v) => env[v],
        Some("c") => m.c,
        _ => panic!("unexpected term {t}"),
    }
}

pub fn eval_formula(f: &Formula, env: &mut BTreeMap<String, usize>, m: &Model) -> bool {
    if f.is_atom("R") {
        return m.r;
    }
    let args = f.args();
    match f.head().unwrap() {
        "P" => m.p[eval_term_f(&args[0], env, m)],
        "Q" => m.q[eval_term_f(&args[0], env, m)][eval_term_f(&args[1], env, m)],
        "not" => !eval_formula(&args[0], env, m),
        "and" => args.iter().all(|a| eval_formula(a, env, m)),
        "or" => args.iter().any(|a| eval_formula(a, env, m)),
        "->" => !eval_formula(&args[0], env, m) || eval_formula(&args[1], env, m),
        "<->" => eval_formula(&args[0], env, m) == eval_formula(&args[1], env, m),
        q @ ("forall" | "exists") => {
            let v = args[0].as_atom().unwrap().to_string();
            let saved = env.get(&v).copied();
            let mut results = [false; 2];
            for (d, slot) in results.iter_mut().enumerate() {
                env.insert(v.clone(), d);
                *slot = eval_formula(&args[1], env, m);
            }
            match saved {
                Some(s) => env.insert(v, s),
                None => env.remove(&v),
            };
            if q == "forall" {
                results.iter().all(|&b| b)
            } else {
                results.iter().any(|&b| b)
            }
        }
        h => panic!("unexpected head {h}"),
    }
}

fn eval_term(t: &Term, vars: &[usize], m: &Model) -> usize {
    match t {
        Term::Var(v) => vars[*v as usize],
        Term::Fn(f, args) if args.is_empty() && &**f == "c" => m.c,
        Term::Fn(f, args) => {
            let idx = args
                .iter()
                .fold(0, |acc, a| acc * 2 + eval_term(a, vars, m));
            m.funcs[&**f][idx]
        }
    }
}

fn eval_literal(l: &Literal, vars: &[usize], m: &Model) -> bool {
    let v = match &*l.predicate {
        "R" => m.r,
        "P" => m.p[eval_term(&l.args[0], vars, m)],
        "Q" => m.q[eval_term(&l.args[0], vars, m)][eval_term(&l.args[1], vars, m)],
        p => panic!("unexpected predicate {p}"),
    };
    v == l.positive
}

fn term_vars(t: &Term, out: &mut BTreeSet<u32>) {
    match t {
        Term::Var(v) => {
            out.insert(*v);
        }
        Term::Fn(_, args) => args.iter().for_each(|a| term_vars(a, out)),
    }
}

fn term_funcs(t: &Term, out: &mut BTreeMap<String, usize>) {
    if let Term::Fn(f, args) = t {
        if &**f != "c" {
            out.insert(f.to_string(), args.len());
        }
        args.iter().for_each(|a| term_funcs(a, out));
    }
}

/// Every clause holds under every assignment of its variables.
fn clauses_hold(clauses: &[Clause], m: &Model) -> bool {
    clauses.iter().all(|c| {
        let mut vs = BTreeSet::new();
        for l in &c.literals {
            l.args.iter().for_each(|a| term_vars(a, &mut vs));
        }
        let width = vs.iter().next_back().map_or(0, |v| *v as usize + 1);
        (0..1usize << width).all(|bits| {
            let vars: Vec<usize> = (0..width).map(|i| bits >> i & 1).collect();
            c.literals.iter().any(|l| eval_literal(l, &vars, m))
        })
    })
}

/// Function-table bits the clause set needs; `None` means too many to enumerate.
pub fn skolem_bits(clauses: &[Clause]) -> usize {
    let mut fs = BTreeMap::new();
    for c in clauses {
        for l in &c.literals {
            l.args.iter().for_each(|a| term_funcs(a, &mut fs));
        }
    }
    fs.values().map(|&a| 1usize << a).sum()
}

pub fn clauses_sat_2(clauses: &[Clause]) -> bool {
    let mut fs = BTreeMap::new();
    for c in clauses {
        for l in &c.literals {
            l.args.iter().for_each(|a| term_funcs(a, &mut fs));
        }
    }
    let layout: Vec<(String, usize)> = fs.into_iter().map(|(f, a)| (f, 1usize << a)).collect();
    let bits: usize = layout.iter().map(|(_, n)| n).sum();
    base_models().any(|mut m| {
        (0..1usize << bits).any(|code| {
            let mut off = 0;
            for (f, n) in &layout {
                m.funcs
                    .insert(f.clone(), (0..*n).map(|i| code >> (off + i) & 1).collect());
                off += n;
            }
            clauses_hold(clauses, &m)
        })
    })
}

pub fn formula_sat_2(f: &Formula) -> bool {
    base_models().any(|m| eval_formula(f, &mut BTreeMap::new(), &m))
}

/// Satisfiability on two-element domains, before and after clausification.
/// Formulas whose Skolem tables exceed `max_bits` are redrawn.
pub fn cnf_equisatisfiability(n: usize, seed: u64, max_bits: usize) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    while t.total < n {
        let f = random_fol(&mut r, 4, &mut Vec::new());
        let cnf = to_cnf(&f).expect("first-order input");
        if skolem_bits(&cnf) > max_bits {
            continue;
        }
        let a = formula_sat_2(&f);
        t.bump(if a { "sat" } else { "unsat" });
        if skolem_bits(&cnf) > 0 {
            t.bump("skolemized");
        }
        let b = clauses_sat_2(&cnf);
        t.record(a == b, || format!("{f}: formula sat={a}, cnf sat={b}"));
    }
    t
}

// ---------------------------------------------------------------- unification

pub fn random_term(r: &mut StdRng, depth: usize, nvars: u32) -> Term {
    if depth == 0 || r.gen_bool(0.35) {
        return match r.gen_range(0..4) {
            0 => Term::constant("a"),
            1 => Term::constant("b"),
            _ => Term::Var(r.gen_range(0..nvars)),
        };
    }
    if r.gen_bool(0.5) {
        Term::func("f", vec![random_term(r, depth - 1, nvars)])
    } else {
        Term::func(
            "g",
            vec![
                random_term(r, depth - 1, nvars),
                random_term(r, depth - 1, nvars),
            ],
        )
    }
}

fn subst(t: &Term, m: &BTreeMap<u32, Term>) -> Term {
    match t {
        Term::Var(v) => m.get(v).cloned().unwrap_or(Term::Var(*v)),
        Term::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| subst(a, m)).collect()),
    }
}

fn subst_lit(l: &Literal, m: &BTreeMap<u32, Term>) -> Literal {
    Literal {
        positive: l.positive,
        predicate: l.predicate.clone(),
        args: l.args.iter().map(|a| subst(a, m)).collect(),
    }
}

/// One-way matching: extends `m` so that pattern·m == target.
fn match_term(pattern: &Term, target: &Term, m: &mut BTreeMap<u32, Term>) -> bool {
    match (pattern, target) {
        (Term::Var(v), _) => match m.get(v) {
            Some(b) => b == target,
            None => {
                m.insert(*v, target.clone());
                true
            }
        },
        (Term::Fn(f, fa), Term::Fn(g, ga)) => {
            f == g && fa.len() == ga.len() && fa.iter().zip(ga).all(|(x, y)| match_term(x, y, m))
        }
        _ => false,
    }
}

/// Candidate bindings: variables, constants, and one layer of f/g over them.
fn small_terms(nvars: u32) -> Vec<Term> {
    let mut base: Vec<Term> = (0..nvars).map(Term::Var).collect();
    base.push(Term::constant("a"));
    base.push(Term::constant("b"));
    let mut out = base.clone();
    for x in &base {
        out.push(Term::func("f", vec![x.clone()]));
    }
    for x in &base {
        for y in &base {
            out.push(Term::func("g", vec![x.clone(), y.clone()]));
        }
    }
    out
}

/// All unifiers whose bindings come from `small_terms`.
pub fn brute_unifiers(a: &Literal, b: &Literal, nvars: u32) -> Vec<BTreeMap<u32, Term>> {
    let pool = small_terms(nvars);
    let mut out = Vec::new();
    let mut idx = vec![0usize; nvars as usize];
    loop {
        let theta: BTreeMap<u32, Term> = idx
            .iter()
            .enumerate()
            .map(|(v, &i)| (v as u32, pool[i].clone()))
            .collect();
        if subst_lit(a, &theta) == subst_lit(b, &theta) {
            out.push(theta);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < pool.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn check_unifier(
    a: &Literal,
    b: &Literal,
    sigma: Option<&Substitution>,
    nvars: u32,
) -> Result<(), String> {
    let brute = brute_unifiers(a, b, nvars);
    let Some(sigma) = sigma else {
        return if brute.is_empty() {
            Ok(())
        } else {
            Err(format!("no mgu returned but {:?} unifies", brute[0]))
        };
    };
    let s = sigma.bindings().clone();
    let (sa, sb) = (subst_lit(a, &s), subst_lit(b, &s));
    if sa != sb {
        return Err(format!("{sa} != {sb}"));
    }
    let twice: BTreeMap<u32, Term> = s.iter().map(|(v, t)| (*v, subst(t, &s))).collect();
    if twice != s {
        return Err("not idempotent".into());
    }
    for theta in &brute {
        // theta must factor as sigma followed by some rho.
        let mut rho = BTreeMap::new();
        let ok = (0..nvars).all(|v| {
            let sv = subst(&Term::Var(v), &s);
            match_term(&sv, &subst(&Term::Var(v), theta), &mut rho)
        });
        if !ok {
            return Err(format!("unifier {theta:?} is not an instance of {s:?}"));
        }
    }
    Ok(())
}

pub fn unification_properties(n: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    let nvars = 2;
    for _ in 0..n {
        let mk = |r: &mut StdRng| {
            Literal::new(
                true,
                "P",
                vec![random_term(r, 2, nvars), random_term(r, 2, nvars)],
            )
        };
        let a = mk(&mut r);
        let b = mk(&mut r);
        let sigma = unify(&a, &b);
        t.bump(if sigma.is_some() {
            "unifiable"
        } else {
            "clash"
        });
        let res = check_unifier(&a, &b, sigma.as_ref(), nvars);
        t.record(res.is_ok(), || format!("{a} ~ {b}: {}", res.unwrap_err()));
    }
    t
}

// ---------------------------------------------------------------- proof spaces

pub fn atoms_signature(n: usize) -> Signature {
    let mut s = Signature::default();
    for i in 0..n {
        s.predicates.insert(format!("A{i}"), 0);
    }
    s
}

/// Random box tree with random nodes and scope-respecting inferences.
pub fn random_boxed_space(r: &mut StdRng, max_nodes: usize) -> ProofSpace {
    let atoms = 8;
    let mut sp = ProofSpace::new(atoms_signature(atoms));
    let mut boxes = vec![ROOT];
    for _ in 0..r.gen_range(0..4) {
        let parent = boxes[r.gen_range(0..boxes.len())];
        boxes.push(sp.add_box(parent).unwrap());
    }
    let n = r.gen_range(1..=max_nodes);
    for _ in 0..n {
        let b = boxes[r.gen_range(0..boxes.len())];
        let f = Formula::atom(format!("A{}", r.gen_range(0..atoms)));
        sp.add_formula_node(b, f, r.gen_bool(0.15), r.gen_bool(0.1), "gen")
            .unwrap();
    }
    let count = sp.nodes().len();
    for _ in 0..r.gen_range(0..2 * count) {
        let concl = NodeId(r.gen_range(0..count) as u32);
        let b = sp.nodes()[concl.0 as usize].box_id;
        let visible = sp.visible_nodes(b);
        let k = r.gen_range(0..=3.min(visible.len()));
        let premises: Vec<NodeId> = (0..k)
            .map(|_| visible[r.gen_range(0..visible.len())])
            .collect();
        let deductive = r.gen_bool(0.85);
        let _ = sp.add_inference(b, "r", &premises, concl, deductive, "gen");
    }
    sp
}

/// Ancestor chain of each box read from the wire format.
fn json_ancestry(json: &SpaceJson) -> BTreeMap<u32, Vec<u32>> {
    let parent: BTreeMap<u32, Option<u32>> = json
        .boxes
        .iter()
        .map(|b| (b.id.0, b.parent.map(|p| p.0)))
        .collect();
    parent
        .keys()
        .map(|&b| {
            let mut chain = vec![b];
            let mut cur = parent[&b];
            while let Some(p) = cur {
                chain.push(p);
                cur = parent[&p];
            }
            (b, chain)
        })
        .collect()
}

/// Nodes whose formula carries an axiom mark in their own box or an ancestor.
pub fn naive_axioms(json: &SpaceJson) -> BTreeSet<u32> {
    let anc = json_ancestry(json);
    json.nodes
        .iter()
        .filter(|n| {
            anc[&n.box_id.0].iter().any(|b| {
                json.nodes
                    .iter()
                    .any(|m| m.box_id.0 == *b && m.formula == n.formula && m.axiom)
            })
        })
        .map(|n| n.id.0)
        .collect()
}

/// Iterate-until-stable checked set.
pub fn naive_checked(json: &SpaceJson) -> BTreeSet<u32> {
    let mut checked = naive_axioms(json);
    loop {
        let before = checked.len();
        for i in &json.inferences {
            if i.deductive && i.premises.iter().all(|p| checked.contains(&p.0)) {
                checked.insert(i.conclusion.0);
            }
        }
        if checked.len() == before {
            return checked;
        }
    }
}

pub fn checked_set(space: &ProofSpace) -> BTreeSet<u32> {
    space
        .nodes()
        .iter()
        .filter(|n| n.checked)
        .map(|n| n.id.0)
        .collect()
}

/// Fixpoint agreement plus monotonicity while inferences arrive one by one.
pub fn propagation_fixpoint(n: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    for case in 0..n {
        let full = random_boxed_space(&mut r, 50);
        let json = full.to_json();
        // Replay: nodes first, then each inference followed by propagation.
        let mut sp = ProofSpace::new(full.signature().clone());
        for b in &json.boxes[1..] {
            sp.add_box(b.parent.unwrap()).unwrap();
        }
        for nd in &json.nodes {
            sp.add_formula_node(
                nd.box_id,
                nd.formula.parse().unwrap(),
                nd.axiom,
                nd.goal,
                "replay",
            )
            .unwrap();
        }
        let mut monotone = true;
        let mut prev = BTreeSet::new();
        sp.propagate_checks();
        for i in &json.inferences {
            sp.add_inference(
                i.box_id,
                &i.rule,
                &i.premises,
                i.conclusion,
                i.deductive,
                "replay",
            )
            .unwrap();
            sp.propagate_checks();
            let now = checked_set(&sp);
            monotone &= prev.is_subset(&now);
            prev = now;
        }
        sp.propagate_checks();
        let got = checked_set(&sp);
        let want = naive_checked(&json);
        if want.len() > naive_axioms(&json).len() {
            t.bump("derived");
        }
        if json.boxes.len() > 1 {
            t.bump("nested");
        }
        t.record(monotone && got == want, || {
            format!("case {case}: monotone={monotone} got {got:?} want {want:?}")
        });
    }
    t
}

/// Flat random proof DAG (cycles allowed) in one box.
pub fn random_flat_dag(r: &mut StdRng, max_nodes: usize) -> ProofSpace {
    let mut sp = ProofSpace::new(atoms_signature(max_nodes));
    let n = r.gen_range(2..=max_nodes);
    for i in 0..n {
        sp.add_formula_node(
            ROOT,
            Formula::atom(format!("A{i}")),
            r.gen_bool(0.25),
            false,
            "gen",
        )
        .unwrap();
    }
    for _ in 0..r.gen_range(1..=2 * n) {
        let concl = NodeId(r.gen_range(0..n) as u32);
        let k = r.gen_range(0..=3);
        let premises: Vec<NodeId> = (0..k).map(|_| NodeId(r.gen_range(0..n) as u32)).collect();
        let _ = sp.add_inference(ROOT, "r", &premises, concl, r.gen_bool(0.9), "gen");
    }
    sp.propagate_checks();
    sp
}

/// Cheapest derivation tree of `goal` by exhaustive search over
/// derivations that never revisit a node on the same branch.
pub fn exhaustive_min_cost(json: &SpaceJson, goal: u32) -> Option<u64> {
    let axioms = naive_axioms(json);
    fn go(json: &SpaceJson, axioms: &BTreeSet<u32>, n: u32, path: &mut Vec<u32>) -> Option<u64> {
        if axioms.contains(&n) {
            return Some(0);
        }
        if path.contains(&n) {
            return None;
        }
        path.push(n);
        let mut best: Option<u64> = None;
        for i in json
            .inferences
            .iter()
            .filter(|i| i.deductive && i.conclusion.0 == n)
        {
            let mut sum = Some(1u64);
            for p in &i.premises {
                sum = match (sum, go(json, axioms, p.0, path)) {
                    (Some(s), Some(c)) => Some(s + c),
                    _ => None,
                };
            }
            if let Some(s) = sum {
                best = Some(best.map_or(s, |b| b.min(s)));
            }
        }
        path.pop();
        best
    }
    go(json, &axioms, goal, &mut Vec::new())
}

/// The extracted proof, rebuilt on its own, re-checks its goal.
pub fn rechecks_in_isolation(space: &ProofSpace, report: &pruning::ProofReport) -> bool {
    let Ok(mut alone) = ProofSpace::from_json(&report.space, space.signature().clone()) else {
        return false;
    };
    alone.reset_checks();
    alone.propagate_checks();
    let goal = &space.nodes()[report.goal_id.0 as usize];
    let gbox = alone.resolve_path(&space.box_path(goal.box_id));
    gbox.and_then(|b| alone.find_node(b, &goal.formula))
        .is_some_and(|n| alone.nodes()[n.0 as usize].checked)
}

pub fn pruning_minimality(n: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    for case in 0..n {
        let sp = random_flat_dag(&mut r, 12);
        let json = sp.to_json();
        let costs = pruning::forward_costs(&sp);
        for node in sp.nodes() {
            let want = exhaustive_min_cost(&json, node.id.0);
            let got = costs.cost(node.id);
            t.bump(match want {
                None => "unreachable",
                Some(0) => "axiom",
                Some(_) => "derived",
            });
            let mut ok = got == want;
            if let (true, Some(_)) = (ok, got) {
                let report = pruning::extract(&sp, &costs, node.id).unwrap();
                ok = rechecks_in_isolation(&sp, &report)
                    && report.space.inferences.len() as u64 <= got.unwrap();
            }
            t.record(ok, || {
                format!("case {case} node {}: got {got:?} want {want:?}", node.id.0)
            });
        }
    }
    t
}

// ---------------------------------------------------------------- engine runs

use matr::engine::{Engine, RunReport};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

pub struct Run {
    pub engine: Engine,
    pub report: RunReport,
    pub elapsed: Duration,
}

pub fn run_yaml(yaml: &str) -> Run {
    let start = Instant::now();
    let mut engine = Engine::from_yaml(yaml).expect("config loads");
    let report = engine.run();
    Run {
        engine,
        report,
        elapsed: start.elapsed(),
    }
}

/// The shipped incompleteness run, computed once per test binary.
pub fn incompleteness() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| run_yaml(matr::metalogic::INCOMPLETENESS_YAML))
}

pub fn final_state_bytes(run: &Run) -> String {
    serde_json::to_string(&run.report.final_state).unwrap()
}

// ---------------------------------------------------------------- propositional semantics

/// Truth value of a formula over nullary atoms; `bot` is false.
pub fn eval_prop(f: &Formula, val: &BTreeMap<String, bool>) -> bool {
    if let Some(a) = f.as_atom() {
        return a != "bot" && val[a];
    }
    let args = f.args();
    match f.head().unwrap() {
        "not" => !eval_prop(&args[0], val),
        "and" => args.iter().all(|a| eval_prop(a, val)),
        "or" => args.iter().any(|a| eval_prop(a, val)),
        "->" => !eval_prop(&args[0], val) || eval_prop(&args[1], val),
        "<->" => eval_prop(&args[0], val) == eval_prop(&args[1], val),
        h => panic!("not propositional: {h}"),
    }
}

/// premises ⊨ conclusion over the listed atoms.
pub fn entails(atoms: &[String], premises: &[Formula], conclusion: &Formula) -> bool {
    (0..1u32 << atoms.len()).all(|m| {
        let val: BTreeMap<String, bool> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), m >> i & 1 == 1))
            .collect();
        !premises.iter().all(|p| eval_prop(p, &val)) || eval_prop(conclusion, &val)
    })
}

pub fn random_prop_formula(r: &mut StdRng, depth: usize, atoms: usize) -> Formula {
    if depth == 0 || r.gen_bool(0.3) {
        return Formula::atom(format!("A{}", r.gen_range(0..atoms)));
    }
    match r.gen_range(0..5) {
        0 => Formula::not(random_prop_formula(r, depth - 1, atoms)),
        k => {
            let head = ["and", "or", "->", "<->"][k - 1];
            let a = random_prop_formula(r, depth - 1, atoms);
            Formula::app(head, vec![a, random_prop_formula(r, depth - 1, atoms)])
        }
    }
}

pub const ND_CODELETS: &[&str] = &[
    "syntax-check",
    "reiteration",
    "conditional-proof",
    "or-intro",
    "modus-ponens",
    "and-elim",
    "and-intro",
    "neg-elim",
];

/// Random propositional configuration using every natural-deduction codelet.
pub fn random_nd_config(r: &mut StdRng) -> String {
    let atoms = 4;
    let preds: Vec<String> = (0..atoms).map(|i| format!("A{i}: 0")).collect();
    let axioms: Vec<String> = (0..r.gen_range(1..=3))
        .map(|_| format!("  - \"{}\"", random_prop_formula(r, 2, atoms)))
        .collect();
    let goals: Vec<String> = (0..r.gen_range(1..=2))
        .map(|_| format!("  - \"{}\"", random_prop_formula(r, 2, atoms)))
        .collect();
    let codelets: Vec<String> = ND_CODELETS
        .iter()
        .map(|c| format!("  - name: {c}"))
        .collect();
    format!(
        "name: random\nsignature:\n  predicates: {{{}}}\naxioms:\n{}\ngoals:\n{}\ncodelets:\n{}\nlimits:\n  max-iterations: 4\n",
        preds.join(", "),
        axioms.join("\n"),
        goals.join("\n"),
        codelets.join("\n")
    )
}

/// Every inference is locally sound, and every checked node follows from
/// the axioms of its box and the boxes around it.
pub fn space_is_sound(space: &ProofSpace) -> Result<(), String> {
    let atoms: Vec<String> = space.signature().predicates.keys().cloned().collect();
    for inf in space.inferences() {
        let premises: Vec<Formula> = inf
            .premises
            .iter()
            .map(|p| space.nodes()[p.0 as usize].formula.clone())
            .collect();
        let concl = &space.nodes()[inf.conclusion.0 as usize].formula;
        if !entails(&atoms, &premises, concl) {
            return Err(format!(
                "{} does not follow: {premises:?} |- {concl}",
                inf.rule
            ));
        }
    }
    for n in space.nodes().iter().filter(|n| n.checked) {
        let hyps: Vec<Formula> = space
            .ancestry(n.box_id)
            .into_iter()
            .flat_map(|b| space.get_box(b).unwrap().nodes.clone())
            .map(|id| &space.nodes()[id.0 as usize])
            .filter(|m| m.axiom)
            .map(|m| m.formula.clone())
            .collect();
        if !entails(&atoms, &hyps, &n.formula) {
            return Err(format!("checked {} is not entailed by {hyps:?}", n.formula));
        }
    }
    Ok(())
}

pub fn codelet_soundness(n: usize, seed: u64) -> Tally {
    let mut r = rng(seed);
    let mut t = Tally::default();
    for _ in 0..n {
        let yaml = random_nd_config(&mut r);
        let run = run_yaml(&yaml);
        if !run.engine.space().inferences().is_empty() {
            t.bump("inferred");
        }
        if run.report.complete {
            t.bump("complete");
        }
        let res = space_is_sound(run.engine.space());
        t.record(res.is_ok(), || format!("{yaml}\n{}", res.unwrap_err()));
    }
    t
}
