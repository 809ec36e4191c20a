//! Natural-deduction and support codelets.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde_json::json;

use crate::engine::{Codelet, CodeletOutput, Ctx, Mode, Params, Recommendation};
use crate::formula::{
    classify, substitutable, substitute, Formula, Signature, Sort, AND, EXISTS, FORALL, NOT, OR,
};
use crate::proofspace::{BoxId, NodeId, ProofSpace};

pub const MODUS_PONENS: &str = "Modus Ponens";
pub const AND_ELIM: &str = "And-Elim";
pub const AND_INTRO: &str = "And-Intro";
pub const OR_INTRO: &str = "Or-Intro";
pub const NEG_ELIM: &str = "Neg-Elim";
pub const FORALL_ELIM: &str = "Forall-Elim";
pub const REITERATION: &str = "Reiteration";

fn node(space: &ProofSpace, id: NodeId) -> &crate::proofspace::FormulaNode {
    &space.nodes()[id.0 as usize]
}

fn usable(space: &ProofSpace, id: NodeId, checked_only: bool) -> bool {
    !checked_only || node(space, id).checked
}

/// The deeper of two boxes when one contains the other.
pub fn deeper_common(space: &ProofSpace, a: BoxId, b: BoxId) -> Option<BoxId> {
    if space.is_ancestor_or_self(a, b) {
        Some(b)
    } else if space.is_ancestor_or_self(b, a) {
        Some(a)
    } else {
        None
    }
}

/// Nearest node with formula `f` visible from `b` that passes the filter.
fn visible_usable(space: &ProofSpace, b: BoxId, f: &Formula, checked_only: bool) -> Option<NodeId> {
    space
        .ancestry(b)
        .into_iter()
        .filter_map(|x| space.find_node(x, f))
        .find(|&n| usable(space, n, checked_only))
}

fn unchecked(space: &ProofSpace) -> impl Iterator<Item = NodeId> + '_ {
    space.nodes().iter().filter(|n| !n.checked).map(|n| n.id)
}

pub struct ModusPonens;

impl ModusPonens {
    fn pairs(space: &ProofSpace, checked_only: bool) -> Vec<(NodeId, NodeId, BoxId)> {
        let mut out = Vec::new();
        for imp in space.nodes() {
            let Some((a, b)) = imp.formula.as_implication() else {
                continue;
            };
            if a == b || !usable(space, imp.id, checked_only) {
                continue;
            }
            for &p in space.nodes_with(a) {
                if !usable(space, p, checked_only) {
                    continue;
                }
                if let Some(target) = deeper_common(space, imp.box_id, node(space, p).box_id) {
                    out.push((p, imp.id, target));
                }
            }
        }
        out
    }
}

impl Codelet for ModusPonens {
    fn name(&self) -> &str {
        "modus-ponens"
    }

    fn default_mode(&self) -> Mode {
        Mode::Forward
    }

    fn trigger(&self, space: &ProofSpace, params: &Params) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = Self::pairs(space, params.checked_only())
            .into_iter()
            .map(|(_, i, _)| i)
            .collect();
        ids.dedup();
        ids
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let space = ctx.space;
        Self::pairs(space, ctx.params.checked_only())
            .into_iter()
            .map(|(p, imp, target)| {
                let (_, consequent) = node(space, imp).formula.as_implication().unwrap();
                Recommendation::new(self.name()).derive(
                    space,
                    target,
                    MODUS_PONENS,
                    &[p, imp],
                    consequent.clone(),
                )
            })
            .collect::<Vec<_>>()
            .into()
    }
}

pub struct AndElim;

impl Codelet for AndElim {
    fn name(&self) -> &str {
        "and-elim"
    }

    fn default_mode(&self) -> Mode {
        Mode::Forward
    }

    fn trigger(&self, space: &ProofSpace, params: &Params) -> Vec<NodeId> {
        space
            .nodes()
            .iter()
            .filter(|n| n.formula.head() == Some(AND) && usable(space, n.id, params.checked_only()))
            .map(|n| n.id)
            .collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let space = ctx.space;
        let mut recs = Vec::new();
        for &id in ctx.scope {
            let n = node(space, id);
            for conjunct in n.formula.args() {
                recs.push(Recommendation::new(self.name()).derive(
                    space,
                    n.box_id,
                    AND_ELIM,
                    &[id],
                    conjunct.clone(),
                ));
            }
        }
        recs.into()
    }
}

/// Builds only conjunctions that occur inside unchecked nodes.
pub struct AndIntro;

impl AndIntro {
    fn candidates(space: &ProofSpace, checked_only: bool) -> Vec<(NodeId, Formula, Vec<NodeId>)> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for u in unchecked(space) {
            let b = node(space, u).box_id;
            for sub in node(space, u).formula.subformulas() {
                if sub.head() != Some(AND) || !seen.insert((b, sub.clone())) {
                    continue;
                }
                let premises: Option<Vec<NodeId>> = sub
                    .args()
                    .iter()
                    .map(|c| visible_usable(space, b, c, checked_only))
                    .collect();
                if let Some(p) = premises {
                    out.push((u, sub.clone(), p));
                }
            }
        }
        out
    }
}

impl Codelet for AndIntro {
    fn name(&self) -> &str {
        "and-intro"
    }

    fn default_mode(&self) -> Mode {
        Mode::Forward
    }

    fn trigger(&self, space: &ProofSpace, params: &Params) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = Self::candidates(space, params.checked_only())
            .into_iter()
            .map(|(u, _, _)| u)
            .collect();
        ids.dedup();
        ids
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let space = ctx.space;
        Self::candidates(space, ctx.params.checked_only())
            .into_iter()
            .map(|(u, conj, premises)| {
                Recommendation::new(self.name()).derive(
                    space,
                    node(space, u).box_id,
                    AND_INTRO,
                    &premises,
                    conj,
                )
            })
            .collect::<Vec<_>>()
            .into()
    }
}

/// Backward only: an unchecked disjunction is justified by any usable disjunct.
pub struct OrIntro;

impl Codelet for OrIntro {
    fn name(&self) -> &str {
        "or-intro"
    }

    fn default_mode(&self) -> Mode {
        Mode::Backward
    }

    fn trigger(&self, space: &ProofSpace, _: &Params) -> Vec<NodeId> {
        unchecked(space)
            .filter(|&n| node(space, n).formula.head() == Some(OR))
            .collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let space = ctx.space;
        let mut recs = Vec::new();
        for &id in ctx.scope {
            let n = node(space, id);
            for d in n.formula.args() {
                if let Some(p) = visible_usable(space, n.box_id, d, ctx.params.checked_only()) {
                    recs.push(Recommendation::new(self.name()).derive(
                        space,
                        n.box_id,
                        OR_INTRO,
                        &[p],
                        n.formula.clone(),
                    ));
                }
            }
        }
        recs.into()
    }
}

/// Double-negation elimination and contradiction detection.
pub struct NegElim;

impl NegElim {
    fn recs(space: &ProofSpace, checked_only: bool, name: &str) -> Vec<(NodeId, Recommendation)> {
        let mut out = Vec::new();
        for n in space.nodes() {
            if !usable(space, n.id, checked_only) {
                continue;
            }
            let Some([inner]) = n
                .formula
                .as_app(NOT, 1)
                .map(|a| <&[Formula; 1]>::try_from(a).unwrap())
            else {
                continue;
            };
            if let Some([phi]) = inner
                .as_app(NOT, 1)
                .map(|a| <&[Formula; 1]>::try_from(a).unwrap())
            {
                out.push((
                    n.id,
                    Recommendation::new(name).derive(
                        space,
                        n.box_id,
                        NEG_ELIM,
                        &[n.id],
                        phi.clone(),
                    ),
                ));
            }
            for &p in space.nodes_with(inner) {
                if !usable(space, p, checked_only) {
                    continue;
                }
                if let Some(target) = deeper_common(space, n.box_id, node(space, p).box_id) {
                    out.push((
                        n.id,
                        Recommendation::new(name).derive(
                            space,
                            target,
                            NEG_ELIM,
                            &[p, n.id],
                            Formula::bot(),
                        ),
                    ));
                }
            }
        }
        out
    }
}

impl Codelet for NegElim {
    fn name(&self) -> &str {
        "neg-elim"
    }

    fn default_mode(&self) -> Mode {
        Mode::Forward
    }

    fn trigger(&self, space: &ProofSpace, params: &Params) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = Self::recs(space, params.checked_only(), self.name())
            .into_iter()
            .map(|(n, _)| n)
            .collect();
        ids.dedup();
        ids
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        Self::recs(ctx.space, ctx.params.checked_only(), self.name())
            .into_iter()
            .map(|(_, r)| r)
            .collect::<Vec<_>>()
            .into()
    }
}

/// Leading block of universal variables and the matrix beneath it.
pub fn universal_prefix(f: &Formula) -> (Vec<&str>, &Formula) {
    let mut vars = Vec::new();
    let mut cur = f;
    while let Some((v, body)) = cur.as_quantifier(FORALL) {
        vars.push(v);
        cur = body;
    }
    (vars, cur)
}

fn match_into(
    pattern: &Formula,
    target: &Formula,
    vars: &[&str],
    shadowed: &mut Vec<String>,
    sigma: &mut BTreeMap<String, Formula>,
) -> bool {
    match (pattern, target) {
        (Formula::Atom(a), _) if vars.contains(&a.as_str()) && !shadowed.contains(a) => {
            match sigma.get(a) {
                Some(bound) => bound == target,
                None => {
                    sigma.insert(a.clone(), target.clone());
                    true
                }
            }
        }
        (Formula::Atom(a), Formula::Atom(b)) => a == b,
        (Formula::Compound { head: h1, args: a1 }, Formula::Compound { head: h2, args: a2 }) => {
            if h1 != h2 || a1.len() != a2.len() {
                return false;
            }
            let binder = if (h1 == FORALL || h1 == EXISTS) && a1.len() == 2 {
                a1[0].as_atom().map(str::to_string)
            } else {
                None
            };
            if let Some(v) = &binder {
                if a2[0].as_atom() != Some(v.as_str()) {
                    return false;
                }
                shadowed.push(v.clone());
                let ok = match_into(&a1[1], &a2[1], vars, shadowed, sigma);
                shadowed.pop();
                return ok;
            }
            a1.iter()
                .zip(a2)
                .all(|(p, t)| match_into(p, t, vars, shadowed, sigma))
        }
        _ => false,
    }
}

/// Successive instances of a universal formula, one per eliminated
/// variable, ending in `target` when the matrix matches it.
pub fn instance_chain(
    universal: &Formula,
    target: &Formula,
    sig: &Signature,
) -> Option<Vec<Formula>> {
    let (vars, matrix) = universal_prefix(universal);
    if vars.is_empty() {
        return None;
    }
    let mut sigma = BTreeMap::new();
    if !match_into(matrix, target, &vars, &mut Vec::new(), &mut sigma) {
        return None;
    }
    let terms: Vec<Formula> = vars
        .iter()
        .map(|v| sigma.get(*v).cloned())
        .collect::<Option<_>>()?;
    let chain = instantiate_chain(universal, &terms, sig)?;
    (chain.last() == Some(target)).then_some(chain)
}

/// Eliminates the leading universals of `f` one at a time with `terms`.
pub fn instantiate_chain(f: &Formula, terms: &[Formula], sig: &Signature) -> Option<Vec<Formula>> {
    let mut cur = f.clone();
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let (v, body) = cur.as_quantifier(FORALL)?;
        cur = substitute(body, v, t, sig).ok()?;
        out.push(cur.clone());
    }
    Some(out)
}

/// Universal instantiation driven by unchecked nodes: either an unchecked
/// node is itself an instance of a checked universal, or the universal is
/// instantiated with the free atoms of an unchecked node.
pub struct ForallElim;

impl ForallElim {
    fn ground_atoms(f: &Formula, var_sort: Sort, sig: &Signature) -> Vec<Formula> {
        f.free_atoms()
            .into_iter()
            .filter(|a| !sig.variables.contains(a))
            .map(Formula::atom)
            .filter(|a| {
                classify(a, sig).is_ok_and(|s| s != Sort::PaWff && substitutable(var_sort, s))
            })
            .collect()
    }

    fn universals(space: &ProofSpace, checked_only: bool) -> Vec<NodeId> {
        space
            .nodes()
            .iter()
            .filter(|n| {
                n.formula.as_quantifier(FORALL).is_some() && usable(space, n.id, checked_only)
            })
            .map(|n| n.id)
            .collect()
    }
}

/// Recommendations instantiating `universal` (a visible node) with `terms`
/// inside `box_id`.
pub fn forall_elim(
    space: &ProofSpace,
    universal: NodeId,
    terms: &[Formula],
    box_id: BoxId,
    source: &str,
) -> Option<Recommendation> {
    let chain = instantiate_chain(&node(space, universal).formula, terms, space.signature())?;
    Some(chain_recommendation(
        space, universal, &chain, box_id, source,
    ))
}

fn chain_recommendation(
    space: &ProofSpace,
    universal: NodeId,
    chain: &[Formula],
    box_id: BoxId,
    source: &str,
) -> Recommendation {
    let mut rec = Recommendation::new(source).derive(
        space,
        box_id,
        FORALL_ELIM,
        &[universal],
        chain[0].clone(),
    );
    let path = space.box_path(box_id);
    for w in chain.windows(2) {
        rec.actions.push(crate::engine::Action::AddFormulaNode {
            box_path: path.clone(),
            formula: w[1].clone(),
            axiom: false,
            goal: false,
        });
        rec.actions.push(crate::engine::Action::AddInference {
            box_path: path.clone(),
            rule: FORALL_ELIM.to_string(),
            premises: vec![crate::engine::NodeRef {
                box_path: Some(path.clone()),
                formula: w[0].clone(),
            }],
            conclusion: w[1].clone(),
            deductive: true,
        });
    }
    rec
}

impl Codelet for ForallElim {
    fn name(&self) -> &str {
        "forall-elim"
    }

    fn default_mode(&self) -> Mode {
        Mode::Backward
    }

    fn trigger(&self, space: &ProofSpace, params: &Params) -> Vec<NodeId> {
        if Self::universals(space, params.checked_only()).is_empty() {
            return Vec::new();
        }
        unchecked(space).collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let space = ctx.space;
        let sig = space.signature();
        let checked_only = ctx.params.checked_only();
        let universals = Self::universals(space, checked_only);
        let mut recs = Vec::new();
        let mut done: BTreeSet<(NodeId, Vec<Formula>)> = BTreeSet::new();
        for &u in ctx.scope {
            let un = node(space, u);
            for &a in &universals {
                let an = node(space, a);
                if !space.is_ancestor_or_self(an.box_id, un.box_id) {
                    continue;
                }
                if let Some(chain) = instance_chain(&an.formula, &un.formula, sig) {
                    recs.push(chain_recommendation(
                        space,
                        a,
                        &chain,
                        un.box_id,
                        self.name(),
                    ));
                }
            }
        }
        if ctx.params.bool_or("instances", true) {
            for &u in ctx.scope {
                let un = node(space, u);
                for &a in &universals {
                    let an = node(space, a);
                    if !space.is_ancestor_or_self(an.box_id, un.box_id) {
                        continue;
                    }
                    let (v, _) = an.formula.as_quantifier(FORALL).unwrap();
                    for t in Self::ground_atoms(&un.formula, sig.variable_sort(v), sig) {
                        if !done.insert((a, vec![t.clone()])) {
                            continue;
                        }
                        if let Some(r) = forall_elim(space, a, &[t], an.box_id, self.name()) {
                            recs.push(r);
                        }
                    }
                }
            }
        }
        recs.into()
    }
}

/// Backward: opens a subproof for an unchecked implication. Forward:
/// discharges a subproof whose goal is checked into its parent.
pub struct ConditionalProof;

impl ConditionalProof {
    fn antecedent(axioms: &[Formula]) -> Option<Formula> {
        match axioms.len() {
            0 => None,
            1 => Some(axioms[0].clone()),
            _ => Some(Formula::and(axioms.to_vec())),
        }
    }

    fn key_formulas(keys: &[String]) -> Vec<Formula> {
        keys.iter().filter_map(|k| k.parse().ok()).collect()
    }

    fn openings(space: &ProofSpace) -> Vec<NodeId> {
        unchecked(space)
            .filter(|&n| {
                let nd = node(space, n);
                let Some((a, b)) = nd.formula.as_implication() else {
                    return false;
                };
                let key = crate::proofspace::BoxKey::new(
                    std::slice::from_ref(a),
                    std::slice::from_ref(b),
                );
                space.find_child(nd.box_id, &key).is_none()
            })
            .collect()
    }

    fn discharges(space: &ProofSpace) -> Vec<(BoxId, NodeId, Formula)> {
        let mut out = Vec::new();
        for b in space.boxes().iter().skip(1) {
            let Some(parent) = b.parent else { continue };
            let axioms = Self::key_formulas(&b.key.axioms);
            let Some(alpha) = Self::antecedent(&axioms) else {
                continue;
            };
            for &g in &b.nodes {
                let gn = node(space, g);
                if gn.goal && gn.checked {
                    let concl = Formula::implies(alpha.clone(), gn.formula.clone());
                    let done = space.find_node(parent, &concl).is_some_and(|c| {
                        space.inferences_concluding(c).any(|i| {
                            i.rule == crate::proofspace::CONDITIONAL_PROOF && i.premises == [g]
                        })
                    });
                    if !done {
                        out.push((parent, g, concl));
                    }
                }
            }
        }
        out
    }
}

impl Codelet for ConditionalProof {
    fn name(&self) -> &str {
        "conditional-proof"
    }

    fn default_mode(&self) -> Mode {
        Mode::Backward
    }

    fn trigger(&self, space: &ProofSpace, _: &Params) -> Vec<NodeId> {
        let mut ids = Self::openings(space);
        ids.extend(Self::discharges(space).into_iter().map(|(_, g, _)| g));
        ids
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let space = ctx.space;
        let mut recs = Vec::new();
        for (parent, goal, concl) in Self::discharges(space) {
            recs.push(Recommendation::new(self.name()).derive(
                space,
                parent,
                crate::proofspace::CONDITIONAL_PROOF,
                &[goal],
                concl,
            ));
        }
        for n in Self::openings(space) {
            let nd = node(space, n);
            let (a, b) = nd.formula.as_implication().unwrap();
            let mut rec = Recommendation::new(self.name());
            rec.actions.push(crate::engine::Action::AddBox {
                parent: space.box_path(nd.box_id),
                axioms: vec![a.clone()],
                goals: vec![b.clone()],
            });
            recs.push(rec);
        }
        recs.into()
    }
}

/// Links a checked outer node to an unchecked copy inside a subproof.
pub struct Reiteration;

impl Reiteration {
    fn pairs(space: &ProofSpace) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for n in space.nodes() {
            if n.checked {
                continue;
            }
            let outer = space
                .ancestry(n.box_id)
                .into_iter()
                .skip(1)
                .filter_map(|b| space.find_node(b, &n.formula))
                .find(|&o| node(space, o).checked);
            if let Some(o) = outer {
                out.push((o, n.id));
            }
        }
        out
    }
}

impl Codelet for Reiteration {
    fn name(&self) -> &str {
        "reiteration"
    }

    fn default_mode(&self) -> Mode {
        Mode::Support
    }

    fn trigger(&self, space: &ProofSpace, _: &Params) -> Vec<NodeId> {
        Self::pairs(space).into_iter().map(|(_, n)| n).collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let space = ctx.space;
        Self::pairs(space)
            .into_iter()
            .map(|(o, n)| {
                let nd = node(space, n);
                Recommendation::new(self.name()).derive(
                    space,
                    nd.box_id,
                    REITERATION,
                    &[o],
                    nd.formula.clone(),
                )
            })
            .collect::<Vec<_>>()
            .into()
    }
}

/// Reports ill-sorted nodes; never edits the graph.
pub struct SyntaxCheck;

impl Codelet for SyntaxCheck {
    fn name(&self) -> &str {
        "syntax-check"
    }

    fn default_mode(&self) -> Mode {
        Mode::Support
    }

    fn trigger(&self, space: &ProofSpace, _: &Params) -> Vec<NodeId> {
        space.nodes().iter().map(|n| n.id).collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        CodeletOutput {
            recommendations: Vec::new(),
            diagnostics: ctx
                .space
                .ill_sorted_nodes()
                .into_iter()
                .map(|(n, why)| {
                    (
                        Some(n),
                        format!("IllSorted({}): {why}", node(ctx.space, n).formula),
                    )
                })
                .collect(),
        }
    }
}

/// Forwards the snapshot to an out-of-process codelet server.
pub struct External {
    url: String,
    remote: String,
    mode: Mode,
}

impl External {
    pub fn from_params(params: &Params) -> Result<Self, String> {
        let url = params
            .str("url")
            .ok_or("missing `url`")?
            .trim_end_matches('/')
            .to_string();
        let remote = params
            .str("codelet")
            .ok_or("missing `codelet`")?
            .to_string();
        let mode = match params.str("mode") {
            None => Mode::Backward,
            Some(m) => serde_json::from_value(json!(m)).map_err(|e| e.to_string())?,
        };
        Ok(External { url, remote, mode })
    }
}

impl Codelet for External {
    fn name(&self) -> &str {
        &self.remote
    }

    fn default_mode(&self) -> Mode {
        self.mode
    }

    fn trigger(&self, space: &ProofSpace, _: &Params) -> Vec<NodeId> {
        unchecked(space).collect()
    }

    fn execute(&self, ctx: &Ctx) -> CodeletOutput {
        let remaining = ctx.deadline.saturating_duration_since(Instant::now());
        let body = json!({
            "codelet": self.remote,
            "snapshot": ctx.space.to_json(),
            "scope": ctx.scope,
            "params": ctx.params,
            "signature": ctx.space.signature(),
        });
        let result = reqwest::blocking::Client::builder()
            .timeout(remaining)
            .build()
            .and_then(|c| {
                c.post(format!("{}/codelet/execute", self.url))
                    .json(&body)
                    .send()
            })
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json::<Vec<Recommendation>>());
        match result {
            Ok(recs) => recs.into(),
            Err(e) => CodeletOutput {
                recommendations: Vec::new(),
                diagnostics: vec![(
                    None,
                    format!("external codelet {} failed: {e}", self.remote),
                )],
            },
        }
    }
}
