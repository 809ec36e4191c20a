//! The iteration loop: choose codelets, run them against a snapshot, vet and
//! apply their recommendations, propagate checks.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::formula::{classify, Formula, Signature};
use crate::proofspace::{BoxId, BoxKey, NodeId, ProofSpace, SpaceError, SpaceJson};
use crate::{metalogic, rules};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Support,
    Backward,
    Forward,
}

/// Free-form codelet parameters from the config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(pub serde_json::Map<String, Value>);

impl Params {
    pub fn usize_or(&self, key: &str, default: usize) -> usize {
        self.0
            .get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .unwrap_or(default)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> bool {
        self.0.get(key).and_then(Value::as_bool).unwrap_or(default)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(Value::as_str)
    }

    pub fn max_recs(&self) -> usize {
        self.usize_or("max-recs", 100)
    }

    /// Forward codelets look only at checked premises unless told otherwise.
    pub fn checked_only(&self) -> bool {
        self.bool_or("checked-only", true)
    }
}

/// A formula located by content. Without a box path the resolver picks the
/// nearest node visible from the action's box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRef {
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub box_path: Option<Vec<BoxKey>>,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Action {
    AddFormulaNode {
        #[serde(rename = "box", default)]
        box_path: Vec<BoxKey>,
        formula: Formula,
        #[serde(default)]
        axiom: bool,
        #[serde(default)]
        goal: bool,
    },
    AddBox {
        #[serde(default)]
        parent: Vec<BoxKey>,
        #[serde(default)]
        axioms: Vec<Formula>,
        #[serde(default)]
        goals: Vec<Formula>,
    },
    AddInference {
        #[serde(rename = "box", default)]
        box_path: Vec<BoxKey>,
        rule: String,
        premises: Vec<NodeRef>,
        conclusion: Formula,
        #[serde(default = "yes")]
        deductive: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub source: String,
    pub actions: Vec<Action>,
}

impl Recommendation {
    pub fn new(source: &str) -> Self {
        Recommendation {
            source: source.to_string(),
            actions: Vec::new(),
        }
    }

    pub fn node_ref(space: &ProofSpace, id: NodeId) -> NodeRef {
        let n = &space.nodes()[id.0 as usize];
        NodeRef {
            box_path: Some(space.box_path(n.box_id)),
            formula: n.formula.clone(),
        }
    }

    /// Adds `conclusion` to `box_id` (merging if present) and a deductive
    /// inference to it from existing nodes.
    pub fn derive(
        mut self,
        space: &ProofSpace,
        box_id: BoxId,
        rule: &str,
        premises: &[NodeId],
        conclusion: Formula,
    ) -> Self {
        let path = space.box_path(box_id);
        self.actions.push(Action::AddFormulaNode {
            box_path: path.clone(),
            formula: conclusion.clone(),
            axiom: false,
            goal: false,
        });
        self.actions.push(Action::AddInference {
            box_path: path,
            rule: rule.to_string(),
            premises: premises.iter().map(|&p| Self::node_ref(space, p)).collect(),
            conclusion,
            deductive: true,
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub source: String,
    pub action: Action,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplyReport {
    /// Actions that changed the store; merges are not counted.
    pub applied: usize,
    pub merged: usize,
    pub rejected: Vec<Rejection>,
}

impl ApplyReport {
    fn absorb(&mut self, other: ApplyReport) {
        self.applied += other.applied;
        self.merged += other.merged;
        self.rejected.extend(other.rejected);
    }
}

fn lookup_box(space: &ProofSpace, path: &[BoxKey]) -> Result<BoxId, String> {
    space
        .resolve_path(path)
        .ok_or_else(|| "UnknownBox: box path does not resolve".to_string())
}

fn apply_action(space: &mut ProofSpace, action: &Action, source: &str) -> Result<bool, String> {
    let err = |e: SpaceError| e.to_string();
    match action {
        Action::AddFormulaNode {
            box_path,
            formula,
            axiom,
            goal,
        } => {
            let b = lookup_box(space, box_path)?;
            Ok(space
                .add_formula_node(b, formula.clone(), *axiom, *goal, source)
                .map_err(err)?
                .changed)
        }
        Action::AddBox {
            parent,
            axioms,
            goals,
        } => {
            let b = lookup_box(space, parent)?;
            Ok(space
                .add_subproof(b, axioms, goals, source)
                .map_err(err)?
                .changed)
        }
        Action::AddInference {
            box_path,
            rule,
            premises,
            conclusion,
            deductive,
        } => {
            let b = lookup_box(space, box_path)?;
            let concl = space
                .find_node(b, conclusion)
                .ok_or_else(|| format!("UnknownNode: conclusion {conclusion} is not in the box"))?;
            let mut ids = Vec::with_capacity(premises.len());
            for p in premises {
                let id = match &p.box_path {
                    Some(path) => {
                        let pb = lookup_box(space, path)?;
                        space.find_node(pb, &p.formula)
                    }
                    None => space.find_visible(b, &p.formula),
                };
                ids.push(id.ok_or_else(|| {
                    format!(
                        "ScopeViolation: premise {} is not visible from the box",
                        p.formula
                    )
                })?);
            }
            Ok(space
                .add_inference(b, rule, &ids, concl, *deductive, source)
                .map_err(err)?
                .changed)
        }
    }
}

/// Applies recommendations in order. Duplicates merge silently, bad actions
/// are rejected with a reason and never abort the batch.
pub fn resolve(space: &mut ProofSpace, recommendations: &[Recommendation]) -> ApplyReport {
    let mut report = ApplyReport::default();
    for rec in recommendations {
        for action in &rec.actions {
            match apply_action(space, action, &rec.source) {
                Ok(true) => report.applied += 1,
                Ok(false) => report.merged += 1,
                Err(reason) => report.rejected.push(Rejection {
                    source: rec.source.clone(),
                    action: action.clone(),
                    reason,
                }),
            }
        }
    }
    report
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("ill-sorted formula {formula}: {reason}")]
    IllSortedFormula { formula: String, reason: String },
    #[error("unknown codelet: {0}")]
    UnknownCodelet(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CodeletSpec {
    pub name: String,
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BoxSpec {
    pub name: String,
    /// Name of an earlier box; the root when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default)]
    pub axioms: Vec<Formula>,
    #[serde(default)]
    pub goals: Vec<Formula>,
    #[serde(default)]
    pub nodes: Vec<Formula>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExistsElim {
    pub axiom: Formula,
    pub witness: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SetupSpec {
    /// Unchecked intermediate nodes of the root box.
    pub nodes: Vec<Formula>,
    pub boxes: Vec<BoxSpec>,
    pub exists_elim: Vec<ExistsElim>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Limits {
    pub max_iterations: usize,
    pub clause_limit: usize,
    pub codelet_timeout_ms: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_iterations: 20,
            clause_limit: 2000,
            codelet_timeout_ms: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    #[serde(default)]
    pub name: String,
    /// Merged over the Peano signature.
    #[serde(default)]
    pub signature: Signature,
    #[serde(default)]
    pub codelets: Vec<CodeletSpec>,
    #[serde(default)]
    pub axioms: Vec<Formula>,
    #[serde(default)]
    pub goals: Vec<Formula>,
    #[serde(default)]
    pub setup: SetupSpec,
    #[serde(default)]
    pub limits: Limits,
    /// Ablation switch: install HB1 as a root axiom instead of running its codelet.
    #[serde(default)]
    pub hb1_as_axiom: bool,
}

impl Config {
    pub fn full_signature(&self) -> Signature {
        Signature::peano().merged(&self.signature)
    }

    /// Every formula the config mentions, for sort checking.
    fn formulas(&self) -> Vec<&Formula> {
        let mut out: Vec<&Formula> = self.axioms.iter().chain(&self.goals).collect();
        out.extend(&self.setup.nodes);
        for b in &self.setup.boxes {
            out.extend(b.axioms.iter().chain(&b.goals).chain(&b.nodes));
        }
        out.extend(self.setup.exists_elim.iter().map(|e| &e.axiom));
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.limits.clause_limit < 1 {
            return Err(ConfigError::Schema(
                "limits.clause-limit: must be at least 1".into(),
            ));
        }
        let sig = self.full_signature();
        for f in self.formulas() {
            match classify(f, &sig) {
                Ok(s) if s.is_wff() => {}
                Ok(s) => {
                    return Err(ConfigError::IllSortedFormula {
                        formula: f.to_string(),
                        reason: format!("classified as {s:?}"),
                    })
                }
                Err(e) => {
                    return Err(ConfigError::IllSortedFormula {
                        formula: f.to_string(),
                        reason: e.to_string(),
                    })
                }
            }
        }
        let mut names = vec!["root".to_string()];
        for b in &self.setup.boxes {
            let parent = b.parent.as_deref().unwrap_or("root");
            if !names.iter().any(|n| n == parent) {
                return Err(ConfigError::Schema(format!(
                    "setup.boxes.{}.parent: unknown box `{parent}`",
                    b.name
                )));
            }
            names.push(b.name.clone());
        }
        for e in &self.setup.exists_elim {
            if e.axiom.as_quantifier(crate::formula::EXISTS).is_none() {
                return Err(ConfigError::Schema(format!(
                    "setup.exists-elim: {} is not existential",
                    e.axiom
                )));
            }
        }
        for c in &self.codelets {
            build_codelet(&c.name, &c.params)?;
        }
        Ok(())
    }
}

pub fn load_config(yaml: &str) -> Result<Config, ConfigError> {
    let config: Config =
        serde_yaml::from_str(yaml).map_err(|e| ConfigError::Schema(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub iteration: usize,
    pub codelet: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct CodeletOutput {
    pub recommendations: Vec<Recommendation>,
    /// (node, message) pairs surfaced in the run report.
    pub diagnostics: Vec<(Option<NodeId>, String)>,
}

impl From<Vec<Recommendation>> for CodeletOutput {
    fn from(recommendations: Vec<Recommendation>) -> Self {
        CodeletOutput {
            recommendations,
            diagnostics: Vec::new(),
        }
    }
}

pub struct Ctx<'a> {
    pub space: &'a ProofSpace,
    pub scope: &'a [NodeId],
    pub params: &'a Params,
    pub limits: Limits,
    pub deadline: Instant,
}

pub trait Codelet: Send + Sync {
    fn name(&self) -> &str;
    fn default_mode(&self) -> Mode;
    /// Candidate nodes this codelet would work on; empty means nothing to do.
    /// Support codelets are scheduled regardless.
    fn trigger(&self, space: &ProofSpace, params: &Params) -> Vec<NodeId>;
    /// Must not mutate anything; output is capped at `max-recs` by the engine.
    fn execute(&self, ctx: &Ctx) -> CodeletOutput;
}

pub const CODELET_NAMES: &[&str] = &[
    "modus-ponens",
    "and-elim",
    "and-intro",
    "or-intro",
    "neg-elim",
    "forall-elim",
    "conditional-proof",
    "reiteration",
    "syntax-check",
    "pa-turnstile",
    "ml-turnstile",
    "hb1",
    "external",
];

pub fn build_codelet(name: &str, params: &Params) -> Result<Arc<dyn Codelet>, ConfigError> {
    Ok(match name {
        "modus-ponens" => Arc::new(rules::ModusPonens),
        "and-elim" => Arc::new(rules::AndElim),
        "and-intro" => Arc::new(rules::AndIntro),
        "or-intro" => Arc::new(rules::OrIntro),
        "neg-elim" => Arc::new(rules::NegElim),
        "forall-elim" => Arc::new(rules::ForallElim),
        "conditional-proof" => Arc::new(rules::ConditionalProof),
        "reiteration" => Arc::new(rules::Reiteration),
        "syntax-check" => Arc::new(rules::SyntaxCheck),
        "pa-turnstile" => Arc::new(metalogic::PaTurnstile),
        "ml-turnstile" => Arc::new(metalogic::MlTurnstile),
        "hb1" => Arc::new(metalogic::Hb1),
        "external" => Arc::new(
            rules::External::from_params(params)
                .map_err(|e| ConfigError::Schema(format!("codelets.external.params: {e}")))?,
        ),
        other => return Err(ConfigError::UnknownCodelet(other.to_string())),
    })
}

#[derive(Clone)]
pub struct Slot {
    pub name: String,
    pub mode: Mode,
    pub params: Params,
    pub codelet: Arc<dyn Codelet>,
}

/// Support first, then backward, then forward; config order within a mode.
/// Non-support codelets are scheduled only when their trigger matches.
pub fn choose_codelets<'a>(space: &ProofSpace, slots: &'a [Slot]) -> Vec<(&'a Slot, Vec<NodeId>)> {
    let goals = space.root_goals();
    if !goals.is_empty() && space.is_complete() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for mode in [Mode::Support, Mode::Backward, Mode::Forward] {
        for slot in slots.iter().filter(|s| s.mode == mode) {
            let scope = slot.codelet.trigger(space, &slot.params);
            if mode == Mode::Support || !scope.is_empty() {
                out.push((slot, scope));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Running,
    Complete,
    Quiescent,
    IterationLimit,
}

impl Status {
    /// CLI exit code for a finished run.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Complete => 0,
            Status::Quiescent | Status::Running => 2,
            Status::IterationLimit => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct IterationStats {
    pub iteration: usize,
    pub scheduled: Vec<String>,
    pub recommendations: usize,
    pub applied: usize,
    pub merged: usize,
    pub rejected: usize,
    pub newly_checked: usize,
    pub nodes: usize,
    pub boxes: usize,
    pub inferences: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunReport {
    pub iterations: usize,
    pub complete: bool,
    pub status: Status,
    pub final_state: SpaceJson,
    pub diagnostics: Vec<Diagnostic>,
    pub stats: Vec<IterationStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("setup conflict: the proof space is not empty")]
    SetupConflict,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

pub struct Engine {
    config: Config,
    space: ProofSpace,
    slots: Vec<Slot>,
    iteration: usize,
    setup_done: bool,
    status: Status,
    diagnostics: Vec<Diagnostic>,
    stats: Vec<IterationStats>,
    rejections: Vec<Rejection>,
}

impl Engine {
    pub fn new(config: Config) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut slots = Vec::new();
        for spec in config.codelets.iter().filter(|c| c.enabled) {
            if config.hb1_as_axiom && spec.name == "hb1" {
                continue;
            }
            let codelet = build_codelet(&spec.name, &spec.params)?;
            slots.push(Slot {
                name: codelet.name().to_string(),
                mode: spec.mode.unwrap_or_else(|| codelet.default_mode()),
                params: spec.params.clone(),
                codelet,
            });
        }
        Ok(Engine {
            space: ProofSpace::new(config.full_signature()),
            config,
            slots,
            iteration: 0,
            setup_done: false,
            status: Status::Running,
            diagnostics: Vec::new(),
            stats: Vec::new(),
            rejections: Vec::new(),
        })
    }

    pub fn from_yaml(yaml: &str) -> Result<Self, ConfigError> {
        Engine::new(load_config(yaml)?)
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn space(&self) -> &ProofSpace {
        &self.space
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn is_complete(&self) -> bool {
        self.setup_done && self.space.is_complete()
    }

    /// Iteration 0: installs axioms, goals, sketch boxes and nodes.
    pub fn setup(&mut self) -> Result<ApplyReport, EngineError> {
        if self.setup_done || !self.space.is_empty() {
            return Err(EngineError::SetupConflict);
        }
        let recs = metalogic::setup(&self.config);
        let report = resolve(&mut self.space, &recs);
        self.space.propagate_checks();
        self.rejections.extend(report.rejected.iter().cloned());
        self.setup_done = true;
        if self.space.is_complete() {
            self.status = Status::Complete;
        }
        Ok(report)
    }

    fn ensure_setup(&mut self) {
        if !self.setup_done {
            // A fresh engine owns an empty space, so setup cannot conflict.
            let _ = self.setup();
        }
    }

    /// Applies externally supplied actions (manual steering) and propagates.
    pub fn apply(&mut self, actions: Vec<Action>, source: &str) -> ApplyReport {
        self.ensure_setup();
        let rec = Recommendation {
            source: source.to_string(),
            actions,
        };
        let report = resolve(&mut self.space, std::slice::from_ref(&rec));
        self.space.propagate_checks();
        if self.space.is_complete() {
            self.status = Status::Complete;
        } else if self.status == Status::Complete {
            self.status = Status::Running;
        }
        report
    }

    /// One full iteration. Returns its statistics.
    pub fn step(&mut self) -> IterationStats {
        self.ensure_setup();
        self.iteration += 1;
        let iteration = self.iteration;
        let limits = self.config.limits;
        let timeout = Duration::from_millis(limits.codelet_timeout_ms);
        let schedule = choose_codelets(&self.space, &self.slots);
        let scheduled: Vec<String> = schedule.iter().map(|(s, _)| s.name.clone()).collect();
        let snapshot = &self.space;
        let outputs: Vec<(String, CodeletOutput, bool)> = schedule
            .par_iter()
            .map(|(slot, scope)| {
                let start = Instant::now();
                let ctx = Ctx {
                    space: snapshot,
                    scope,
                    params: &slot.params,
                    limits,
                    deadline: start + timeout,
                };
                let mut out = slot.codelet.execute(&ctx);
                out.recommendations.truncate(slot.params.max_recs());
                (slot.name.clone(), out, start.elapsed() > timeout)
            })
            .collect();
        let mut recs = Vec::new();
        for (name, out, late) in outputs {
            for (node, message) in out.diagnostics {
                self.diagnostics.push(Diagnostic {
                    iteration,
                    codelet: name.clone(),
                    node,
                    message,
                });
            }
            if late {
                self.diagnostics.push(Diagnostic {
                    iteration,
                    codelet: name.clone(),
                    node: None,
                    message: format!(
                        "timed out after {} ms; output discarded",
                        limits.codelet_timeout_ms
                    ),
                });
                continue;
            }
            recs.extend(out.recommendations);
        }
        let mut report = ApplyReport::default();
        report.absorb(resolve(&mut self.space, &recs));
        let newly_checked = self.space.propagate_checks();
        self.rejections.extend(report.rejected.iter().cloned());
        let stats = IterationStats {
            iteration,
            scheduled,
            recommendations: recs.len(),
            applied: report.applied,
            merged: report.merged,
            rejected: report.rejected.len(),
            newly_checked,
            nodes: self.space.nodes().len(),
            boxes: self.space.boxes().len(),
            inferences: self.space.inferences().len(),
        };
        self.status = if self.space.is_complete() {
            Status::Complete
        } else if report.applied == 0 {
            Status::Quiescent
        } else if self.iteration >= limits.max_iterations {
            Status::IterationLimit
        } else {
            Status::Running
        };
        self.stats.push(stats.clone());
        stats
    }

    /// Steps until complete, quiescent, or out of iterations.
    pub fn run(&mut self) -> RunReport {
        self.ensure_setup();
        while self.status == Status::Running {
            if self.iteration >= self.config.limits.max_iterations {
                self.status = Status::IterationLimit;
                break;
            }
            self.step();
        }
        self.report()
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            iterations: self.iteration,
            complete: self.is_complete(),
            status: self.status,
            final_state: self.space.to_json(),
            diagnostics: self.diagnostics.clone(),
            stats: self.stats.clone(),
            rejections: self.rejections.clone(),
        }
    }

    /// Report restricted to the most recent iteration.
    pub fn last_step_report(&self) -> RunReport {
        let mut r = self.report();
        r.stats = self.stats.last().cloned().into_iter().collect();
        r.diagnostics.retain(|d| d.iteration == self.iteration);
        r.rejections.clear();
        r
    }
}

/// Handy for tests: nodes of `box_id` keyed by canonical print.
pub fn nodes_by_print(space: &ProofSpace, box_id: BoxId) -> BTreeMap<String, NodeId> {
    space
        .get_box(box_id)
        .map(|b| {
            b.nodes
                .iter()
                .map(|&n| (space.nodes()[n.0 as usize].formula.to_string(), n))
                .collect()
        })
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    const MINIMAL: &str = r#"
signature:
  predicates: {B: 0, C: 0}
axioms: ["(-> B C)", "B"]
goals: ["C"]
codelets:
  - name: modus-ponens
"#;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = load_config(MINIMAL).unwrap();
        assert_eq!(c.limits, Limits::default());
        assert!(c.codelets[0].enabled);
        assert!(!c.hb1_as_axiom);
    }

    #[test]
    fn unknown_codelet_is_rejected() {
        let y = MINIMAL.replace("modus-ponens", "frobnicate");
        assert!(
            matches!(load_config(&y), Err(ConfigError::UnknownCodelet(n)) if n == "frobnicate")
        );
    }

    #[test]
    fn bad_limits_and_sorts_are_rejected() {
        let y = format!("{MINIMAL}limits: {{clause-limit: 0}}\n");
        assert!(matches!(load_config(&y), Err(ConfigError::Schema(_))));
        let y = MINIMAL.replace("\"B\"]", "\"(box B C)\"]");
        assert!(matches!(
            load_config(&y),
            Err(ConfigError::IllSortedFormula { .. })
        ));
        assert!(matches!(
            load_config("axioms: 3"),
            Err(ConfigError::Schema(_))
        ));
    }

    #[test]
    fn modus_ponens_run_completes() {
        let mut e = Engine::from_yaml(MINIMAL).unwrap();
        let r = e.run();
        assert!(r.complete);
        assert_eq!(r.status, Status::Complete);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn zero_codelets_quiesce_after_one_iteration() {
        let y = "signature: {predicates: {A: 0}}\ngoals: [A]\n";
        let mut e = Engine::from_yaml(y).unwrap();
        let r = e.run();
        assert!(!r.complete);
        assert_eq!(r.status, Status::Quiescent);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn resolver_merges_duplicates_and_rejects_bad_scope() {
        let mut sp = ProofSpace::new(load_config(MINIMAL).unwrap().full_signature());
        let add_c = Recommendation {
            source: "t".into(),
            actions: vec![Action::AddFormulaNode {
                box_path: vec![],
                formula: f("C"),
                axiom: false,
                goal: false,
            }],
        };
        let r = resolve(&mut sp, &[add_c.clone(), add_c]);
        assert_eq!((r.applied, r.merged), (1, 1));
        assert_eq!(sp.nodes().len(), 1);
        let bad = Recommendation {
            source: "t".into(),
            actions: vec![Action::AddInference {
                box_path: vec![],
                rule: "Modus Ponens".into(),
                premises: vec![NodeRef {
                    box_path: None,
                    formula: f("B"),
                }],
                conclusion: f("C"),
                deductive: true,
            }],
        };
        let r = resolve(&mut sp, &[bad]);
        assert_eq!(r.applied, 0);
        assert!(r.rejected[0].reason.starts_with("ScopeViolation"));
    }

    #[test]
    fn action_json_shape() {
        let a = Action::AddFormulaNode {
            box_path: vec![],
            formula: f("(-> B C)"),
            axiom: true,
            goal: false,
        };
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["type"], "add-formula-node");
        assert_eq!(v["formula"], "(-> B C)");
        let back: Action = serde_json::from_value(serde_json::json!({
            "type": "add-inference", "rule": "R", "premises": [{"formula": "B"}], "conclusion": "C"
        }))
        .unwrap();
        assert!(matches!(
            back,
            Action::AddInference {
                deductive: true,
                ..
            }
        ));
    }

    #[test]
    fn completed_space_schedules_nothing() {
        let mut e = Engine::from_yaml(MINIMAL).unwrap();
        e.run();
        assert!(choose_codelets(e.space(), e.slots()).is_empty());
    }
}
