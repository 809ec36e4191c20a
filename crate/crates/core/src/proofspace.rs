//! The boxed proof graph.
//!
//! A [`ProofSpace`] is a tree of boxes. Each box holds formula nodes and
//! inference nodes; inference nodes link a premise set to one conclusion.
//! Axioms are inherited by every descendant box and are checked on arrival;
//! [`ProofSpace::propagate_checks`] closes the checked flags under
//! deductive inferences.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{classify, Formula, Signature, Sort};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InferenceId(pub u32);

pub const ROOT: BoxId = BoxId(0);

/// The rule whose premise may sit in an immediate child box of the conclusion.
pub const CONDITIONAL_PROOF: &str = "Conditional Proof";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("unknown box {0:?}")]
    UnknownBox(BoxId),
    #[error("unknown formula node {0:?}")]
    UnknownNode(NodeId),
    #[error("ill-sorted formula {formula}: {reason}")]
    IllSortedFormula { formula: String, reason: String },
    #[error("scope violation: {0}")]
    ScopeViolation(String),
    #[error("node {0:?} cannot justify itself")]
    SelfJustification(NodeId),
    #[error("malformed snapshot: {0}")]
    Malformed(String),
}

/// Identity of a box among its siblings: the axioms and goals it was opened with.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoxKey {
    pub axioms: Vec<String>,
    pub goals: Vec<String>,
}

impl BoxKey {
    pub fn new(axioms: &[Formula], goals: &[Formula]) -> Self {
        let mut a: Vec<String> = axioms.iter().map(Formula::to_string).collect();
        let mut g: Vec<String> = goals.iter().map(Formula::to_string).collect();
        a.sort();
        a.dedup();
        g.sort();
        g.dedup();
        BoxKey {
            axioms: a,
            goals: g,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProofBox {
    pub id: BoxId,
    pub parent: Option<BoxId>,
    pub key: BoxKey,
    pub children: Vec<BoxId>,
    pub nodes: Vec<NodeId>,
    pub inferences: Vec<InferenceId>,
}

#[derive(Debug, Clone)]
pub struct FormulaNode {
    pub id: NodeId,
    pub box_id: BoxId,
    pub formula: Formula,
    pub axiom: bool,
    pub goal: bool,
    pub checked: bool,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub struct InferenceNode {
    pub id: InferenceId,
    pub box_id: BoxId,
    pub rule: String,
    pub deductive: bool,
    /// Sorted, duplicate-free.
    pub premises: Vec<NodeId>,
    pub conclusion: NodeId,
    pub provenance: String,
}

/// Outcome of an insertion: the id and whether the store changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inserted<T> {
    pub id: T,
    pub changed: bool,
}

#[derive(Debug, Clone)]
pub struct ProofSpace {
    signature: Signature,
    boxes: Vec<ProofBox>,
    nodes: Vec<FormulaNode>,
    inferences: Vec<InferenceNode>,
    node_index: HashMap<(BoxId, Formula), NodeId>,
    inference_index: HashMap<(BoxId, String, Vec<NodeId>, NodeId), InferenceId>,
    by_formula: HashMap<Formula, Vec<NodeId>>,
}

impl ProofSpace {
    pub fn new(signature: Signature) -> Self {
        ProofSpace {
            signature,
            boxes: vec![ProofBox {
                id: ROOT,
                parent: None,
                key: BoxKey::default(),
                children: Vec::new(),
                nodes: Vec::new(),
                inferences: Vec::new(),
            }],
            nodes: Vec::new(),
            inferences: Vec::new(),
            node_index: HashMap::new(),
            inference_index: HashMap::new(),
            by_formula: HashMap::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn root(&self) -> BoxId {
        ROOT
    }

    pub fn boxes(&self) -> &[ProofBox] {
        &self.boxes
    }

    pub fn nodes(&self) -> &[FormulaNode] {
        &self.nodes
    }

    pub fn inferences(&self) -> &[InferenceNode] {
        &self.inferences
    }

    pub fn get_box(&self, id: BoxId) -> Result<&ProofBox, SpaceError> {
        self.boxes
            .get(id.0 as usize)
            .ok_or(SpaceError::UnknownBox(id))
    }

    pub fn node(&self, id: NodeId) -> Result<&FormulaNode, SpaceError> {
        self.nodes
            .get(id.0 as usize)
            .ok_or(SpaceError::UnknownNode(id))
    }

    pub fn inference(&self, id: InferenceId) -> Option<&InferenceNode> {
        self.inferences.get(id.0 as usize)
    }

    /// True for a space holding nothing but an empty root box.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.boxes.len() == 1
    }

    pub fn add_box(&mut self, parent: BoxId) -> Result<BoxId, SpaceError> {
        self.add_keyed_box(parent, BoxKey::default())
    }

    fn add_keyed_box(&mut self, parent: BoxId, key: BoxKey) -> Result<BoxId, SpaceError> {
        self.get_box(parent)?;
        let id = BoxId(self.boxes.len() as u32);
        self.boxes.push(ProofBox {
            id,
            parent: Some(parent),
            key,
            children: Vec::new(),
            nodes: Vec::new(),
            inferences: Vec::new(),
        });
        self.boxes[parent.0 as usize].children.push(id);
        Ok(id)
    }

    /// Child of `parent` opened with exactly these axioms and goals, if any.
    pub fn find_child(&self, parent: BoxId, key: &BoxKey) -> Option<BoxId> {
        self.boxes
            .get(parent.0 as usize)?
            .children
            .iter()
            .copied()
            .find(|c| &self.boxes[c.0 as usize].key == key)
    }

    /// Opens a subproof with the given axioms and goals, reusing an identical sibling.
    pub fn add_subproof(
        &mut self,
        parent: BoxId,
        axioms: &[Formula],
        goals: &[Formula],
        provenance: &str,
    ) -> Result<Inserted<BoxId>, SpaceError> {
        self.get_box(parent)?;
        for f in axioms.iter().chain(goals) {
            self.check_sort(f)?;
        }
        let key = BoxKey::new(axioms, goals);
        if let Some(id) = self.find_child(parent, &key) {
            return Ok(Inserted { id, changed: false });
        }
        let id = self.add_keyed_box(parent, key)?;
        for a in axioms {
            self.add_formula_node(id, a.clone(), true, false, provenance)?;
        }
        for g in goals {
            self.add_formula_node(id, g.clone(), false, true, provenance)?;
        }
        Ok(Inserted { id, changed: true })
    }

    fn check_sort(&self, f: &Formula) -> Result<(), SpaceError> {
        match classify(f, &self.signature) {
            Ok(s) if s.is_wff() => Ok(()),
            Ok(s) => Err(SpaceError::IllSortedFormula {
                formula: f.to_string(),
                reason: format!("classified as {s:?}"),
            }),
            Err(e) => Err(SpaceError::IllSortedFormula {
                formula: f.to_string(),
                reason: e.to_string(),
            }),
        }
    }

    /// Adds a formula node, or OR-merges the marks into an equal node in the same box.
    pub fn add_formula_node(
        &mut self,
        box_id: BoxId,
        formula: Formula,
        axiom: bool,
        goal: bool,
        provenance: &str,
    ) -> Result<Inserted<NodeId>, SpaceError> {
        self.get_box(box_id)?;
        self.check_sort(&formula)?;
        Ok(self.insert_node(box_id, formula, axiom, goal, provenance))
    }

    fn insert_node(
        &mut self,
        box_id: BoxId,
        formula: Formula,
        axiom: bool,
        goal: bool,
        provenance: &str,
    ) -> Inserted<NodeId> {
        if let Some(&id) = self.node_index.get(&(box_id, formula.clone())) {
            let n = &mut self.nodes[id.0 as usize];
            let before = (n.axiom, n.goal, n.checked);
            n.axiom |= axiom;
            n.goal |= goal;
            n.checked |= axiom;
            let changed = before != (n.axiom, n.goal, n.checked);
            return Inserted { id, changed };
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(FormulaNode {
            id,
            box_id,
            formula: formula.clone(),
            axiom,
            goal,
            checked: axiom,
            provenance: provenance.to_string(),
        });
        self.boxes[box_id.0 as usize].nodes.push(id);
        self.by_formula.entry(formula.clone()).or_default().push(id);
        self.node_index.insert((box_id, formula), id);
        Inserted { id, changed: true }
    }

    pub fn add_inference(
        &mut self,
        box_id: BoxId,
        rule: &str,
        premises: &[NodeId],
        conclusion: NodeId,
        deductive: bool,
        provenance: &str,
    ) -> Result<Inserted<InferenceId>, SpaceError> {
        self.get_box(box_id)?;
        let concl = self.node(conclusion)?;
        if concl.box_id != box_id {
            return Err(SpaceError::ScopeViolation(format!(
                "conclusion {conclusion:?} does not lie in box {box_id:?}"
            )));
        }
        let mut prem: Vec<NodeId> = premises.to_vec();
        prem.sort();
        prem.dedup();
        for &p in &prem {
            if p == conclusion {
                return Err(SpaceError::SelfJustification(conclusion));
            }
            let pb = self.node(p)?.box_id;
            let discharge =
                rule == CONDITIONAL_PROOF && self.boxes[pb.0 as usize].parent == Some(box_id);
            if !discharge && !self.is_ancestor_or_self(pb, box_id) {
                return Err(SpaceError::ScopeViolation(format!(
                    "premise {p:?} in box {pb:?} is not visible from box {box_id:?}"
                )));
            }
        }
        let key = (box_id, rule.to_string(), prem.clone(), conclusion);
        if let Some(&id) = self.inference_index.get(&key) {
            return Ok(Inserted { id, changed: false });
        }
        let id = InferenceId(self.inferences.len() as u32);
        self.inferences.push(InferenceNode {
            id,
            box_id,
            rule: rule.to_string(),
            deductive,
            premises: prem,
            conclusion,
            provenance: provenance.to_string(),
        });
        self.boxes[box_id.0 as usize].inferences.push(id);
        self.inference_index.insert(key, id);
        Ok(Inserted { id, changed: true })
    }

    /// `ancestor` equals `b` or contains it transitively.
    pub fn is_ancestor_or_self(&self, ancestor: BoxId, b: BoxId) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.boxes.get(c.0 as usize).and_then(|x| x.parent);
        }
        false
    }

    /// `b` followed by its ancestors up to the root.
    pub fn ancestry(&self, b: BoxId) -> Vec<BoxId> {
        let mut out = Vec::new();
        let mut cur = Some(b);
        while let Some(c) = cur {
            out.push(c);
            cur = self.boxes.get(c.0 as usize).and_then(|x| x.parent);
        }
        out
    }

    pub fn depth(&self, b: BoxId) -> usize {
        self.ancestry(b).len() - 1
    }

    /// Path of box keys from the root (exclusive) down to `b`.
    pub fn box_path(&self, b: BoxId) -> Vec<BoxKey> {
        let mut chain = self.ancestry(b);
        chain.pop();
        chain.reverse();
        chain
            .into_iter()
            .map(|c| self.boxes[c.0 as usize].key.clone())
            .collect()
    }

    pub fn resolve_path(&self, path: &[BoxKey]) -> Option<BoxId> {
        let mut cur = ROOT;
        for key in path {
            cur = self.find_child(cur, key)?;
        }
        Some(cur)
    }

    pub fn find_node(&self, box_id: BoxId, formula: &Formula) -> Option<NodeId> {
        self.node_index.get(&(box_id, formula.clone())).copied()
    }

    /// Nearest node carrying `formula` in `box_id` or one of its ancestors.
    pub fn find_visible(&self, box_id: BoxId, formula: &Formula) -> Option<NodeId> {
        self.ancestry(box_id)
            .into_iter()
            .find_map(|b| self.find_node(b, formula))
    }

    /// Every node carrying `formula`, in creation order.
    pub fn nodes_with(&self, formula: &Formula) -> &[NodeId] {
        self.by_formula
            .get(formula)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Nodes of `box_id` and all its ancestors, innermost box first.
    pub fn visible_nodes(&self, box_id: BoxId) -> Vec<NodeId> {
        self.ancestry(box_id)
            .into_iter()
            .flat_map(|b| self.boxes[b.0 as usize].nodes.iter().copied())
            .collect()
    }

    /// Axiom nodes of `box_id` and of every ancestor, sorted by id.
    pub fn axioms_visible(&self, box_id: BoxId) -> Result<Vec<NodeId>, SpaceError> {
        self.get_box(box_id)?;
        let mut out: Vec<NodeId> = self
            .visible_nodes(box_id)
            .into_iter()
            .filter(|n| self.nodes[n.0 as usize].axiom)
            .collect();
        out.sort();
        Ok(out)
    }

    /// The node is an axiom of its box, either directly or inherited from an ancestor.
    pub fn is_axiom_in_scope(&self, id: NodeId) -> bool {
        let n = &self.nodes[id.0 as usize];
        n.axiom
            || self
                .ancestry(n.box_id)
                .into_iter()
                .skip(1)
                .filter_map(|b| self.find_node(b, &n.formula))
                .any(|a| self.nodes[a.0 as usize].axiom)
    }

    /// Inherited-axiom witness for a node whose own axiom mark is unset.
    pub fn inherited_axiom(&self, id: NodeId) -> Option<NodeId> {
        let n = &self.nodes[id.0 as usize];
        self.ancestry(n.box_id)
            .into_iter()
            .skip(1)
            .filter_map(|b| self.find_node(b, &n.formula))
            .find(|a| self.nodes[a.0 as usize].axiom)
    }

    pub fn inferences_concluding(&self, id: NodeId) -> impl Iterator<Item = &InferenceNode> {
        self.inferences.iter().filter(move |i| i.conclusion == id)
    }

    /// Closes checked flags under deductive inferences; returns the number of
    /// nodes that became checked. Never unchecks.
    pub fn propagate_checks(&mut self) -> usize {
        let mut newly = 0;
        let mut queue = VecDeque::new();
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            if !self.nodes[i].checked && self.is_axiom_in_scope(id) {
                self.nodes[i].checked = true;
                newly += 1;
            }
        }
        let mut missing: Vec<usize> = Vec::with_capacity(self.inferences.len());
        let mut uses: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (k, inf) in self.inferences.iter().enumerate() {
            let m = inf
                .premises
                .iter()
                .filter(|p| !self.nodes[p.0 as usize].checked)
                .count();
            missing.push(m);
            for p in &inf.premises {
                uses[p.0 as usize].push(k);
            }
            if m == 0 && inf.deductive {
                queue.push_back(inf.conclusion);
            }
        }
        while let Some(n) = queue.pop_front() {
            let node = &mut self.nodes[n.0 as usize];
            if node.checked {
                continue;
            }
            node.checked = true;
            newly += 1;
            for &k in &uses[n.0 as usize] {
                missing[k] -= 1;
                if missing[k] == 0 && self.inferences[k].deductive {
                    queue.push_back(self.inferences[k].conclusion);
                }
            }
        }
        newly
    }

    /// Clears every checked flag except on axiom nodes.
    pub fn reset_checks(&mut self) {
        for n in &mut self.nodes {
            n.checked = n.axiom;
        }
    }

    /// Every goal of the root box is checked.
    pub fn is_complete(&self) -> bool {
        self.root_goals()
            .iter()
            .all(|g| self.nodes[g.0 as usize].checked)
    }

    pub fn root_goals(&self) -> Vec<NodeId> {
        self.boxes[0]
            .nodes
            .iter()
            .copied()
            .filter(|n| self.nodes[n.0 as usize].goal)
            .collect()
    }

    pub fn to_json(&self) -> SpaceJson {
        SpaceJson {
            boxes: self
                .boxes
                .iter()
                .map(|b| BoxJson {
                    id: b.id,
                    parent: b.parent,
                    axioms: b
                        .nodes
                        .iter()
                        .copied()
                        .filter(|n| self.nodes[n.0 as usize].axiom)
                        .collect(),
                    goals: b
                        .nodes
                        .iter()
                        .copied()
                        .filter(|n| self.nodes[n.0 as usize].goal)
                        .collect(),
                    key: b.key.clone(),
                })
                .collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    id: n.id,
                    box_id: n.box_id,
                    formula: n.formula.to_string(),
                    checked: n.checked,
                    axiom: n.axiom,
                    goal: n.goal,
                    provenance: n.provenance.clone(),
                })
                .collect(),
            inferences: self
                .inferences
                .iter()
                .map(|i| InferenceJson {
                    id: i.id,
                    box_id: i.box_id,
                    rule: i.rule.clone(),
                    deductive: i.deductive,
                    premises: i.premises.clone(),
                    conclusion: i.conclusion,
                    provenance: i.provenance.clone(),
                })
                .collect(),
        }
    }

    /// Rebuilds a space from its JSON form. Formulas are parsed but not
    /// sort-checked, so a snapshot may carry ill-sorted nodes.
    pub fn from_json(json: &SpaceJson, signature: Signature) -> Result<Self, SpaceError> {
        let mut space = ProofSpace::new(signature);
        let mut box_map: BTreeMap<BoxId, BoxId> = BTreeMap::new();
        box_map.insert(ROOT, ROOT);
        let roots = json.boxes.iter().filter(|b| b.parent.is_none()).count();
        if roots != 1 {
            return Err(SpaceError::Malformed(format!(
                "expected one root box, found {roots}"
            )));
        }
        let mut pending: Vec<&BoxJson> = json.boxes.iter().filter(|b| b.parent.is_some()).collect();
        box_map.insert(
            json.boxes
                .iter()
                .find(|b| b.parent.is_none())
                .map(|b| b.id)
                .unwrap_or(ROOT),
            ROOT,
        );
        while !pending.is_empty() {
            let before = pending.len();
            let mut rest = Vec::new();
            for b in pending {
                match b.parent.and_then(|p| box_map.get(&p).copied()) {
                    Some(parent) => {
                        let id = space.add_keyed_box(parent, b.key.clone())?;
                        box_map.insert(b.id, id);
                    }
                    None => rest.push(b),
                }
            }
            if rest.len() == before {
                return Err(SpaceError::Malformed(
                    "box parents do not form a tree".into(),
                ));
            }
            pending = rest;
        }
        let mut node_map: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for n in &json.nodes {
            let b = *box_map
                .get(&n.box_id)
                .ok_or(SpaceError::UnknownBox(n.box_id))?;
            let formula: Formula = n
                .formula
                .parse()
                .map_err(|e: crate::formula::FormulaError| SpaceError::Malformed(e.to_string()))?;
            let ins = space.insert_node(b, formula, n.axiom, n.goal, &n.provenance);
            let node = &mut space.nodes[ins.id.0 as usize];
            node.checked |= n.checked;
            node_map.insert(n.id, ins.id);
        }
        for i in &json.inferences {
            let b = *box_map
                .get(&i.box_id)
                .ok_or(SpaceError::UnknownBox(i.box_id))?;
            let map = |n: &NodeId| node_map.get(n).copied().ok_or(SpaceError::UnknownNode(*n));
            let premises = i.premises.iter().map(map).collect::<Result<Vec<_>, _>>()?;
            let conclusion = map(&i.conclusion)?;
            space.add_inference(
                b,
                &i.rule,
                &premises,
                conclusion,
                i.deductive,
                &i.provenance,
            )?;
        }
        Ok(space)
    }

    /// Nodes classifying as ill-sorted (or mentioning unknown symbols).
    pub fn ill_sorted_nodes(&self) -> Vec<(NodeId, String)> {
        self.nodes
            .iter()
            .filter_map(|n| match classify(&n.formula, &self.signature) {
                Ok(s) if s.is_wff() => None,
                Ok(Sort::IllSorted) => Some((n.id, "ill-sorted".to_string())),
                Ok(s) => Some((n.id, format!("expected a wff, found {s:?}"))),
                Err(e) => Some((n.id, e.to_string())),
            })
            .collect()
    }

    /// Graphviz description; axioms gold, goals blue, checked nodes green.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph proof {\n  compound=true;\n");
        self.dot_box(ROOT, 1, &mut out);
        for i in &self.inferences {
            for p in &i.premises {
                out.push_str(&format!("  n{} -> i{};\n", p.0, i.id.0));
            }
            out.push_str(&format!("  i{} -> n{};\n", i.id.0, i.conclusion.0));
        }
        out.push_str("}\n");
        out
    }

    fn dot_box(&self, b: BoxId, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        let bx = &self.boxes[b.0 as usize];
        if b != ROOT {
            out.push_str(&format!("{pad}subgraph cluster_{} {{\n", b.0));
        }
        for n in &bx.nodes {
            let node = &self.nodes[n.0 as usize];
            let fill = if node.checked {
                "palegreen"
            } else {
                "lightblue"
            };
            let border = if node.axiom {
                "gold"
            } else if node.goal {
                "blue"
            } else {
                "black"
            };
            out.push_str(&format!(
                "{pad}  n{} [shape=oval, style=filled, fillcolor={fill}, color={border}, label=\"{}\"];\n",
                n.0,
                node.formula.to_string().replace('"', "\\\"")
            ));
        }
        for i in &bx.inferences {
            out.push_str(&format!(
                "{pad}  i{} [shape=box, label=\"{}\"];\n",
                i.0, self.inferences[i.0 as usize].rule
            ));
        }
        for c in &bx.children {
            self.dot_box(*c, indent + 1, out);
        }
        if b != ROOT {
            out.push_str(&format!("{pad}}}\n"));
        }
    }
}

/// Wire format of a proof space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub boxes: Vec<BoxJson>,
    pub nodes: Vec<NodeJson>,
    pub inferences: Vec<InferenceJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxJson {
    pub id: BoxId,
    pub parent: Option<BoxId>,
    pub axioms: Vec<NodeId>,
    pub goals: Vec<NodeId>,
    #[serde(default)]
    pub key: BoxKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: NodeId,
    #[serde(rename = "box")]
    pub box_id: BoxId,
    pub formula: String,
    pub checked: bool,
    pub axiom: bool,
    pub goal: bool,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceJson {
    pub id: InferenceId,
    #[serde(rename = "box")]
    pub box_id: BoxId,
    pub rule: String,
    pub deductive: bool,
    pub premises: Vec<NodeId>,
    pub conclusion: NodeId,
    #[serde(default)]
    pub provenance: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn sig() -> Signature {
        let mut s = Signature::default();
        for p in ["A", "B", "C", "D"] {
            s.predicates.insert(p.into(), 0);
        }
        s.theories.insert("PA".into());
        s.formula_symbols.insert("G".into());
        s
    }

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn boxes_nest_and_reject_unknown_parent() {
        let mut sp = ProofSpace::new(sig());
        let b1 = sp.add_box(ROOT).unwrap();
        assert_eq!(sp.get_box(b1).unwrap().parent, Some(ROOT));
        let b2 = sp.add_box(b1).unwrap();
        assert_eq!(sp.ancestry(b2), vec![b2, b1, ROOT]);
        assert_eq!(
            sp.add_box(BoxId(99)),
            Err(SpaceError::UnknownBox(BoxId(99)))
        );
    }

    #[test]
    fn axioms_are_checked_and_nodes_deduplicate() {
        let mut sp = ProofSpace::new(sig());
        let a = sp
            .add_formula_node(ROOT, f("(-> B C)"), true, false, "user")
            .unwrap();
        assert!(sp.node(a.id).unwrap().checked);
        let again = sp
            .add_formula_node(ROOT, f("(-> B C)"), false, false, "user")
            .unwrap();
        assert_eq!(
            again,
            Inserted {
                id: a.id,
                changed: false
            }
        );
        let b = sp.add_box(ROOT).unwrap();
        let g = sp.add_formula_node(b, f("C"), false, true, "user").unwrap();
        assert!(!sp.node(g.id).unwrap().checked);
        // marks OR-merge
        let merged = sp
            .add_formula_node(b, f("C"), false, false, "user")
            .unwrap();
        assert!(!merged.changed);
        assert!(sp.node(g.id).unwrap().goal);
    }

    #[test]
    fn rejects_ill_sorted() {
        let mut sp = ProofSpace::new(sig());
        assert!(matches!(
            sp.add_formula_node(ROOT, f("(box G bot)"), false, false, "user"),
            Err(SpaceError::IllSortedFormula { .. })
        ));
        assert!(matches!(
            sp.add_formula_node(ROOT, f("(nope A)"), false, false, "user"),
            Err(SpaceError::IllSortedFormula { .. })
        ));
    }

    #[test]
    fn modus_ponens_inference_and_scope() {
        let mut sp = ProofSpace::new(sig());
        let imp = sp
            .add_formula_node(ROOT, f("(-> B C)"), true, false, "user")
            .unwrap()
            .id;
        let b = sp
            .add_formula_node(ROOT, f("B"), true, false, "user")
            .unwrap()
            .id;
        let c = sp
            .add_formula_node(ROOT, f("C"), false, false, "user")
            .unwrap()
            .id;
        let i = sp
            .add_inference(ROOT, "Modus Ponens", &[b, imp], c, true, "mp")
            .unwrap();
        assert!(i.changed);
        let again = sp
            .add_inference(ROOT, "Modus Ponens", &[imp, b], c, true, "mp")
            .unwrap();
        assert_eq!(
            again,
            Inserted {
                id: i.id,
                changed: false
            }
        );
        assert_eq!(
            sp.add_inference(ROOT, "X", &[c], c, true, "x"),
            Err(SpaceError::SelfJustification(c))
        );

        let s1 = sp.add_box(ROOT).unwrap();
        let s2 = sp.add_box(ROOT).unwrap();
        let inner = sp
            .add_formula_node(s1, f("D"), true, false, "user")
            .unwrap()
            .id;
        let other = sp
            .add_formula_node(s2, f("A"), false, false, "user")
            .unwrap()
            .id;
        assert!(matches!(
            sp.add_inference(s2, "X", &[inner], other, true, "x"),
            Err(SpaceError::ScopeViolation(_))
        ));
        // ancestor premises are visible
        assert!(sp.add_inference(s2, "X", &[b], other, true, "x").is_ok());
    }

    #[test]
    fn axiom_inheritance_is_downward() {
        let mut sp = ProofSpace::new(sig());
        let alpha = sp
            .add_formula_node(ROOT, f("A"), true, false, "user")
            .unwrap()
            .id;
        let b = sp.add_box(ROOT).unwrap();
        let local = sp
            .add_formula_node(b, f("B"), true, false, "user")
            .unwrap()
            .id;
        assert_eq!(sp.axioms_visible(b).unwrap(), vec![alpha, local]);
        assert_eq!(sp.axioms_visible(ROOT).unwrap(), vec![alpha]);
        assert!(sp.axioms_visible(BoxId(7)).is_err());
    }

    #[test]
    fn propagation_chain_and_non_deductive() {
        let mut sp = ProofSpace::new(sig());
        let a = sp
            .add_formula_node(ROOT, f("A"), true, false, "u")
            .unwrap()
            .id;
        let b = sp
            .add_formula_node(ROOT, f("B"), false, false, "u")
            .unwrap()
            .id;
        let c = sp
            .add_formula_node(ROOT, f("C"), false, false, "u")
            .unwrap()
            .id;
        let d = sp
            .add_formula_node(ROOT, f("D"), false, false, "u")
            .unwrap()
            .id;
        sp.add_inference(ROOT, "R", &[a], b, true, "u").unwrap();
        sp.add_inference(ROOT, "R", &[b], c, true, "u").unwrap();
        sp.add_inference(ROOT, "Guess", &[a], d, false, "u")
            .unwrap();
        assert_eq!(sp.propagate_checks(), 2);
        assert!(sp.node(c).unwrap().checked);
        assert!(!sp.node(d).unwrap().checked);
        assert_eq!(sp.propagate_checks(), 0);
    }

    #[test]
    fn inherited_axiom_copy_is_checked() {
        let mut sp = ProofSpace::new(sig());
        sp.add_formula_node(ROOT, f("A"), true, false, "u").unwrap();
        let b = sp.add_box(ROOT).unwrap();
        let copy = sp
            .add_formula_node(b, f("A"), false, false, "u")
            .unwrap()
            .id;
        assert!(!sp.node(copy).unwrap().checked);
        sp.propagate_checks();
        assert!(sp.node(copy).unwrap().checked);
    }

    #[test]
    fn completion() {
        let mut sp = ProofSpace::new(sig());
        assert!(sp.is_complete());
        let g = sp
            .add_formula_node(ROOT, f("B"), false, true, "u")
            .unwrap()
            .id;
        assert!(!sp.is_complete());
        let a = sp
            .add_formula_node(ROOT, f("A"), true, false, "u")
            .unwrap()
            .id;
        sp.add_inference(ROOT, "R", &[a], g, true, "u").unwrap();
        sp.propagate_checks();
        assert!(sp.is_complete());
    }

    #[test]
    fn conditional_proof_may_cross_into_child() {
        let mut sp = ProofSpace::new(sig());
        let sub = sp
            .add_subproof(ROOT, &[f("(and A B)")], &[f("C")], "u")
            .unwrap()
            .id;
        let goal = sp.find_node(sub, &f("C")).unwrap();
        let concl = sp
            .add_formula_node(ROOT, f("(-> (and A B) C)"), false, false, "u")
            .unwrap()
            .id;
        assert!(sp
            .add_inference(ROOT, CONDITIONAL_PROOF, &[goal], concl, true, "cp")
            .is_ok());
        assert!(matches!(
            sp.add_inference(ROOT, "Modus Ponens", &[goal], concl, true, "mp"),
            Err(SpaceError::ScopeViolation(_))
        ));
        let again = sp
            .add_subproof(ROOT, &[f("(and A B)")], &[f("C")], "u")
            .unwrap();
        assert_eq!(
            again,
            Inserted {
                id: sub,
                changed: false
            }
        );
    }

    #[test]
    fn json_round_trip() {
        let mut sp = ProofSpace::new(sig());
        let a = sp
            .add_formula_node(ROOT, f("A"), true, false, "u")
            .unwrap()
            .id;
        let sub = sp.add_subproof(ROOT, &[f("B")], &[f("C")], "u").unwrap().id;
        let c = sp.find_node(sub, &f("C")).unwrap();
        sp.add_inference(sub, "R", &[a], c, true, "u").unwrap();
        sp.propagate_checks();
        let json = sp.to_json();
        let text = serde_json::to_string(&json).unwrap();
        let back: SpaceJson = serde_json::from_str(&text).unwrap();
        let rebuilt = ProofSpace::from_json(&back, sig()).unwrap();
        assert_eq!(rebuilt.to_json(), json);
        assert!(text.contains("\"box\":"));
    }

    #[test]
    fn snapshot_may_hold_ill_sorted_nodes() {
        let json: SpaceJson = serde_json::from_value(serde_json::json!({
            "boxes": [{"id": 0, "parent": null, "axioms": [], "goals": []}],
            "nodes": [{"id": 0, "box": 0, "formula": "(box G bot)", "checked": false, "axiom": false, "goal": false}],
            "inferences": []
        }))
        .unwrap();
        let sp = ProofSpace::from_json(&json, sig()).unwrap();
        assert_eq!(sp.ill_sorted_nodes().len(), 1);
    }
}
