//! The provability metalogic: atomization for the resolution backend, the
//! setup codelets, and the PA⊢ / ML⊢ / HB1 codelets.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::engine::{
    Action, Codelet, CodeletOutput, Config, Ctx, Engine, EngineError, Mode, NodeRef, Params,
    Recommendation,
};
use crate::formula::{
    substitute, Formula, Signature, AND, BOX, EXISTS, FORALL, IFF, IMPLIES, NOT, OR, QUOTE,
};
use crate::proofspace::{BoxId, BoxKey, NodeId, ProofSpace, ROOT};
use crate::resolution::{saturate, CnfBuilder, CnfError, Outcome};

pub const PA_TURNSTILE: &str = "PA⊢";
pub const ML_TURNSTILE: &str = "ML⊢";
pub const HB1_RULE: &str = "HB1";
pub const EXISTS_ELIM: &str = "Exists-Elim";

/// Metalogic consistency of PA: no formula is provable together with its negation.
pub const CON_PA: &str = "(not (exists phi (and (box PA phi) (box PA (not phi)))))";

/// First derivability condition, only installed as an axiom for the ablation.
pub const HB1: &str = "(forall phi (-> (box PA phi) (box PA (Prv (quote phi)))))";

/// The shipped incompleteness configuration.
pub const INCOMPLETENESS_YAML: &str = include_str!("../examples/incompleteness.yaml");

/// Shipped Fitch-style example: (-> B C) proves (-> (and A B) C).
pub const FIG1_YAML: &str = include_str!("../examples/fig1.yaml");

const HOLDS: &str = "holds";

pub fn signature() -> Signature {
    let mut s = Signature::peano();
    s.theories.insert("PA".into());
    s.formula_symbols
        .extend(["phi", "psi", "G"].map(String::from));
    s.variables.extend(["m", "n"].map(String::from));
    s.predicates.insert("Prv".into(), 1);
    s.predicates.insert("Opposite".into(), 2);
    s.predicates.insert("ConPA".into(), 0);
    s
}

fn box_predicate(theory: &str) -> String {
    format!("{BOX}_{theory}")
}

/// Rewrites a metalogic wff into a first-order one: `(box T f)` becomes the
/// predicate application `(box_T f)` with `f` read as a term, and a formula
/// symbol in wff position becomes `(holds s)`.
pub fn atomize(f: &Formula, sig: &Signature) -> Formula {
    match f {
        Formula::Atom(a) if sig.formula_symbols.contains(a) => Formula::app(HOLDS, vec![f.clone()]),
        Formula::Atom(_) => f.clone(),
        Formula::Compound { head, args } => match head.as_str() {
            BOX if args.len() == 2 && args[0].as_atom().is_some() => Formula::app(
                box_predicate(args[0].as_atom().unwrap()),
                vec![args[1].clone()],
            ),
            NOT | AND | OR | IMPLIES | IFF => {
                Formula::app(head.clone(), args.iter().map(|a| atomize(a, sig)).collect())
            }
            FORALL | EXISTS if args.len() == 2 => {
                Formula::app(head.clone(), vec![args[0].clone(), atomize(&args[1], sig)])
            }
            _ => f.clone(),
        },
    }
}

/// Inverse of [`atomize`].
pub fn deatomize(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Compound { head, args } => {
            if let Some(theory) = head.strip_prefix("box_") {
                if args.len() == 1 {
                    return Formula::app(BOX, vec![Formula::atom(theory), args[0].clone()]);
                }
            }
            match head.as_str() {
                HOLDS if args.len() == 1 => args[0].clone(),
                NOT | AND | OR | IMPLIES | IFF => {
                    Formula::app(head.clone(), args.iter().map(deatomize).collect())
                }
                FORALL | EXISTS if args.len() == 2 => {
                    Formula::app(head.clone(), vec![args[0].clone(), deatomize(&args[1])])
                }
                _ => f.clone(),
            }
        }
    }
}

const GOAL_TAG: usize = usize::MAX;

/// A resolution attempt on behalf of a turnstile codelet.
#[derive(Debug, Clone)]
pub struct Task {
    pub target: NodeId,
    pub premises: Vec<NodeId>,
    pub outcome: Outcome,
    /// Premises whose clauses feed the refutation, if there is one.
    pub used: Vec<NodeId>,
    pub skipped: Vec<(NodeId, CnfError)>,
}

/// Refutes `premises ∪ {¬goal}`; `read` turns a node formula into the first-order input.
fn run_task(
    space: &ProofSpace,
    target: NodeId,
    premises: Vec<NodeId>,
    read: impl Fn(&Formula) -> Formula,
    clause_limit: usize,
    deadline: Option<Instant>,
) -> Result<Task, CnfError> {
    let mut builder = CnfBuilder::new();
    let mut input = Vec::new();
    let mut skipped = Vec::new();
    for (i, &p) in premises.iter().enumerate() {
        match builder.clauses(&read(&space.nodes()[p.0 as usize].formula), i) {
            Ok(cs) => input.extend(cs),
            Err(e) => skipped.push((p, e)),
        }
    }
    let goal = read(&space.nodes()[target.0 as usize].formula);
    input.extend(builder.clauses(&Formula::not(goal), GOAL_TAG)?);
    let outcome = saturate(input, clause_limit, deadline);
    let used = outcome
        .proof()
        .map(|p| {
            p.input_tags()
                .into_iter()
                .filter(|&t| t != GOAL_TAG)
                .map(|t| premises[t])
                .collect()
        })
        .unwrap_or_default();
    Ok(Task {
        target,
        premises,
        outcome,
        used,
        skipped,
    })
}

/// Checked nodes visible from `b`, one per formula, by ascending id.
fn checked_visible(space: &ProofSpace, b: BoxId, keep: impl Fn(&Formula) -> bool) -> Vec<NodeId> {
    let mut seen = BTreeMap::new();
    for n in space.visible_nodes(b) {
        let nd = &space.nodes()[n.0 as usize];
        if nd.checked && keep(&nd.formula) {
            seen.entry(nd.formula.clone()).or_insert(n);
        }
    }
    let mut ids: Vec<NodeId> = seen.into_values().collect();
    ids.sort();
    ids
}

/// PA⊢ on one target `(box T ψ)`: premises are the checked visible `(box T φ)` nodes.
pub fn pa_task(
    space: &ProofSpace,
    target: NodeId,
    clause_limit: usize,
    deadline: Option<Instant>,
) -> Option<Result<Task, CnfError>> {
    let t = &space.nodes()[target.0 as usize];
    let (theory, _) = t.formula.as_box()?;
    let premises = checked_visible(space, t.box_id, |f| {
        f.as_box().is_some_and(|(th, _)| th == theory)
    });
    let premises: Vec<NodeId> = premises.into_iter().filter(|&p| p != target).collect();
    Some(run_task(
        space,
        target,
        premises,
        |f| {
            f.as_box()
                .map(|(_, inner)| inner.clone())
                .unwrap_or_else(|| f.clone())
        },
        clause_limit,
        deadline,
    ))
}

/// ML⊢ on one target: premises are all checked visible nodes, atomized.
pub fn ml_task(
    space: &ProofSpace,
    target: NodeId,
    clause_limit: usize,
    deadline: Option<Instant>,
) -> Result<Task, CnfError> {
    let t = &space.nodes()[target.0 as usize];
    let premises: Vec<NodeId> = checked_visible(space, t.box_id, |_| true)
        .into_iter()
        .filter(|&p| p != target)
        .collect();
    let sig = space.signature().clone();
    run_task(
        space,
        target,
        premises,
        |f| atomize(f, &sig),
        clause_limit,
        deadline,
    )
}

fn turnstile_output(
    space: &ProofSpace,
    source: &str,
    rule: &str,
    tasks: Vec<(NodeId, Result<Task, CnfError>)>,
) -> CodeletOutput {
    let mut out = CodeletOutput::default();
    for (target, task) in tasks {
        match task {
            Err(e) => out
                .diagnostics
                .push((Some(target), format!("{rule} skipped target: {e}"))),
            Ok(task) => {
                for (p, e) in &task.skipped {
                    out.diagnostics
                        .push((Some(*p), format!("{rule} skipped premise: {e}")));
                }
                if task.outcome.is_refutation() {
                    let t = &space.nodes()[target.0 as usize];
                    out.recommendations.push(Recommendation::new(source).derive(
                        space,
                        t.box_id,
                        rule,
                        &task.used,
                        t.formula.clone(),
                    ));
                }
            }
        }
    }
    out
}

fn clause_limit(ctx: &Ctx) -> usize {
    ctx.params
        .usize_or("clause-limit", ctx.limits.clause_limit)
        .max(1)
}

/// Backward resolution inside a theory: proves unchecked `(box T ψ)` nodes
/// from checked `(box T φ)` nodes.
pub struct PaTurnstile;

impl Codelet for PaTurnstile {
    fn name(&self) -> &str {
        "pa-turnstile"
    }

    fn default_mode(&self) -> Mode {
        Mode::Backward
    }

    fn trigger(&self, space: &ProofSpace, _: &Params) -> Vec<NodeId> {
        space
            .nodes()
            .iter()
            .filter(|n| !n.checked && n.formula.as_box().is_some())
            .map(|n| n.id)
            .collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let limit = clause_limit(ctx);
        let tasks: Vec<(NodeId, Result<Task, CnfError>)> = ctx
            .scope
            .par_iter()
            .filter_map(|&t| pa_task(ctx.space, t, limit, Some(ctx.deadline)).map(|r| (t, r)))
            .collect();
        turnstile_output(ctx.space, self.name(), PA_TURNSTILE, tasks)
    }
}

/// Backward resolution at the metalogic level over every checked visible node.
pub struct MlTurnstile;

impl Codelet for MlTurnstile {
    fn name(&self) -> &str {
        "ml-turnstile"
    }

    fn default_mode(&self) -> Mode {
        Mode::Backward
    }

    fn trigger(&self, space: &ProofSpace, _: &Params) -> Vec<NodeId> {
        space
            .nodes()
            .iter()
            .filter(|n| !n.checked)
            .map(|n| n.id)
            .collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let limit = clause_limit(ctx);
        let tasks: Vec<(NodeId, Result<Task, CnfError>)> = ctx
            .scope
            .par_iter()
            .map(|&t| (t, ml_task(ctx.space, t, limit, Some(ctx.deadline))))
            .collect();
        turnstile_output(ctx.space, self.name(), ML_TURNSTILE, tasks)
    }
}

/// The `f` in an unchecked `(box T (Prv (quote f)))`.
fn hb1_pattern(f: &Formula) -> Option<(&str, &Formula)> {
    let (theory, inner) = f.as_box()?;
    let [q] = inner.as_app("Prv", 1)? else {
        return None;
    };
    let [body] = q.as_app(QUOTE, 1)? else {
        return None;
    };
    Some((theory, body))
}

/// Backward use of the first derivability condition: justifies
/// `(box T (Prv (quote f)))` by `(box T f)`, creating the latter if needed.
pub struct Hb1;

impl Codelet for Hb1 {
    fn name(&self) -> &str {
        "hb1"
    }

    fn default_mode(&self) -> Mode {
        Mode::Backward
    }

    fn trigger(&self, space: &ProofSpace, _: &Params) -> Vec<NodeId> {
        space
            .nodes()
            .iter()
            .filter(|n| !n.checked && hb1_pattern(&n.formula).is_some())
            .map(|n| n.id)
            .collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let space = ctx.space;
        let mut recs = Vec::new();
        for &id in ctx.scope {
            let n = &space.nodes()[id.0 as usize];
            let Some((theory, body)) = hb1_pattern(&n.formula) else {
                continue;
            };
            let premise = Formula::boxed(theory, body.clone());
            let path = space.box_path(n.box_id);
            let mut rec = Recommendation::new(self.name());
            let premise_ref = match space.find_visible(n.box_id, &premise) {
                Some(p) => Recommendation::node_ref(space, p),
                None => {
                    rec.actions.push(Action::AddFormulaNode {
                        box_path: path.clone(),
                        formula: premise.clone(),
                        axiom: false,
                        goal: false,
                    });
                    NodeRef {
                        box_path: Some(path.clone()),
                        formula: premise,
                    }
                }
            };
            rec.actions.push(Action::AddInference {
                box_path: path,
                rule: HB1_RULE.to_string(),
                premises: vec![premise_ref],
                conclusion: n.formula.clone(),
                deductive: true,
            });
            recs.push(rec);
        }
        recs.into()
    }
}

/// The two setup codelets: axioms, goals and existential eliminations, then
/// the sketch's subproof boxes and intermediate nodes.
pub fn setup(config: &Config) -> Vec<Recommendation> {
    let sig = config.full_signature();
    let mut base = Recommendation::new("setup");
    let node = |f: &Formula, path: &[BoxKey], axiom: bool, goal: bool| Action::AddFormulaNode {
        box_path: path.to_vec(),
        formula: f.clone(),
        axiom,
        goal,
    };
    if config.hb1_as_axiom {
        base.actions
            .push(node(&HB1.parse().unwrap(), &[], true, false));
    }
    for a in &config.axioms {
        base.actions.push(node(a, &[], true, false));
    }
    for g in &config.goals {
        base.actions.push(node(g, &[], false, true));
    }
    for e in &config.setup.exists_elim {
        let Some((v, body)) = e.axiom.as_quantifier(EXISTS) else {
            continue;
        };
        let Ok(instance) = substitute(body, v, &Formula::atom(&e.witness), &sig) else {
            continue;
        };
        base.actions.push(node(&e.axiom, &[], true, false));
        base.actions.push(node(&instance, &[], false, false));
        base.actions.push(Action::AddInference {
            box_path: Vec::new(),
            rule: EXISTS_ELIM.to_string(),
            premises: vec![NodeRef {
                box_path: Some(Vec::new()),
                formula: e.axiom.clone(),
            }],
            conclusion: instance,
            deductive: true,
        });
    }

    let mut sketch = Recommendation::new("setup-sketch");
    for n in &config.setup.nodes {
        sketch.actions.push(node(n, &[], false, false));
    }
    let mut paths: BTreeMap<&str, Vec<BoxKey>> = BTreeMap::new();
    paths.insert("root", Vec::new());
    for b in &config.setup.boxes {
        let parent = paths
            .get(b.parent.as_deref().unwrap_or("root"))
            .cloned()
            .unwrap_or_default();
        sketch.actions.push(Action::AddBox {
            parent: parent.clone(),
            axioms: b.axioms.clone(),
            goals: b.goals.clone(),
        });
        let mut path = parent;
        path.push(BoxKey::new(&b.axioms, &b.goals));
        for n in &b.nodes {
            sketch.actions.push(node(n, &path, false, false));
        }
        paths.insert(&b.name, path);
    }
    vec![base, sketch]
}

/// The Con(PA) derivation exactly as ML⊢ first meets it: a freshly set-up
/// space, goal [`CON_PA`] in the root, every checked root node as premise.
pub fn con_pa_task(config: &Config) -> Result<Task, EngineError> {
    let mut engine = Engine::new(config.clone())?;
    engine.setup()?;
    let space = engine.space();
    let con: Formula = CON_PA.parse().unwrap();
    let target = space.find_node(ROOT, &con).ok_or_else(|| {
        EngineError::Config(crate::engine::ConfigError::Schema(format!(
            "no root node {CON_PA}"
        )))
    })?;
    ml_task(space, target, config.limits.clause_limit, None)
        .map_err(|e| EngineError::Config(crate::engine::ConfigError::Schema(e.to_string())))
}
