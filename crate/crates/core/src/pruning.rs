//! Shortest-proof extraction: a forward pass computes the justification
//! count of every node's cheapest proof, a backward pass collects the
//! sub-DAG behind one goal.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::proofspace::{BoxId, InferenceId, NodeId, ProofSpace, SpaceJson, ROOT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTable {
    /// `None` marks nodes no deductive proof reaches.
    pub costs: Vec<Option<u64>>,
    /// Cheapest justification per node; lowest inference id on ties. `None`
    /// for axioms and unreachable nodes.
    pub best: Vec<Option<InferenceId>>,
}

impl CostTable {
    pub fn cost(&self, n: NodeId) -> Option<u64> {
        self.costs.get(n.0 as usize).copied().flatten()
    }
}

/// cost(n) = 0 for axioms in scope, otherwise the minimum over deductive
/// inferences concluding n of 1 + the sum of premise costs. Premises are
/// counted once per use, so shared subproofs count repeatedly.
pub fn forward_costs(space: &ProofSpace) -> CostTable {
    let n = space.nodes().len();
    let infs = space.inferences();
    let mut costs: Vec<Option<u64>> = vec![None; n];
    let mut uses: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut missing: Vec<usize> = Vec::with_capacity(infs.len());
    let mut sums: Vec<u64> = vec![0; infs.len()];
    let mut heap = BinaryHeap::new();
    for (k, i) in infs.iter().enumerate() {
        missing.push(i.premises.len());
        if i.deductive {
            for p in &i.premises {
                uses[p.0 as usize].push(k);
            }
            if i.premises.is_empty() {
                heap.push(Reverse((1u64, i.conclusion)));
            }
        }
    }
    for node in space.nodes() {
        if space.is_axiom_in_scope(node.id) {
            heap.push(Reverse((0, node.id)));
        }
    }
    while let Some(Reverse((c, id))) = heap.pop() {
        if costs[id.0 as usize].is_some() {
            continue;
        }
        costs[id.0 as usize] = Some(c);
        for &k in &uses[id.0 as usize] {
            sums[k] = sums[k].saturating_add(c);
            missing[k] -= 1;
            if missing[k] == 0 {
                heap.push(Reverse((sums[k].saturating_add(1), infs[k].conclusion)));
            }
        }
    }
    let mut best = vec![None; n];
    for (k, i) in infs.iter().enumerate() {
        let c = i.conclusion.0 as usize;
        if !i.deductive || missing[k] != 0 || costs[c] == Some(0) {
            continue;
        }
        if Some(sums[k].saturating_add(1)) == costs[c] && best[c].is_none() {
            best[c] = Some(i.id);
        }
    }
    CostTable { costs, best }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PruneError {
    #[error("goal {0:?} has no deductive proof")]
    UnprovenGoal(NodeId),
    #[error("unknown node {0:?}")]
    UnknownNode(NodeId),
}

/// Pruned proof of one goal in the proof-space wire format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ProofReport {
    pub goal: String,
    pub goal_id: NodeId,
    pub cost: u64,
    #[serde(flatten)]
    pub space: SpaceJson,
}

impl ProofReport {
    pub fn node_ids(&self) -> BTreeSet<NodeId> {
        self.space.nodes.iter().map(|n| n.id).collect()
    }

    /// Boxes other than the root.
    pub fn subproof_count(&self) -> usize {
        self.space
            .boxes
            .iter()
            .filter(|b| b.parent.is_some())
            .count()
    }
}

pub fn extract(
    space: &ProofSpace,
    costs: &CostTable,
    goal: NodeId,
) -> Result<ProofReport, PruneError> {
    let g = space
        .node(goal)
        .map_err(|_| PruneError::UnknownNode(goal))?;
    let cost = costs.cost(goal).ok_or(PruneError::UnprovenGoal(goal))?;
    let mut nodes = BTreeSet::new();
    let mut inferences = BTreeSet::new();
    let mut stack = vec![goal];
    while let Some(n) = stack.pop() {
        if !nodes.insert(n) {
            continue;
        }
        if space.is_axiom_in_scope(n) {
            if let Some(a) = space
                .inherited_axiom(n)
                .filter(|_| !space.nodes()[n.0 as usize].axiom)
            {
                stack.push(a);
            }
            continue;
        }
        if let Some(i) = costs.best[n.0 as usize] {
            inferences.insert(i);
            stack.extend(space.inference(i).unwrap().premises.iter().copied());
        }
    }
    let mut boxes: BTreeSet<BoxId> = BTreeSet::new();
    let mut mark = |b: BoxId| {
        for a in space.ancestry(b) {
            boxes.insert(a);
        }
    };
    mark(ROOT);
    for &n in &nodes {
        mark(space.nodes()[n.0 as usize].box_id);
    }
    for &i in &inferences {
        mark(space.inference(i).unwrap().box_id);
    }
    let full = space.to_json();
    let mut json = SpaceJson {
        boxes: full
            .boxes
            .into_iter()
            .filter(|b| boxes.contains(&b.id))
            .collect(),
        nodes: full
            .nodes
            .into_iter()
            .filter(|n| nodes.contains(&n.id))
            .collect(),
        inferences: full
            .inferences
            .into_iter()
            .filter(|i| inferences.contains(&i.id))
            .collect(),
    };
    for b in &mut json.boxes {
        b.axioms.retain(|n| nodes.contains(n));
        b.goals.retain(|n| nodes.contains(n));
    }
    Ok(ProofReport {
        goal: g.formula.to_string(),
        goal_id: goal,
        cost,
        space: json,
    })
}

/// Both passes for one goal.
pub fn prune(space: &ProofSpace, goal: NodeId) -> Result<ProofReport, PruneError> {
    extract(space, &forward_costs(space), goal)
}

/// Pruned proofs of every root goal, in goal order.
pub fn prune_all(space: &ProofSpace) -> Vec<Result<ProofReport, PruneError>> {
    let costs = forward_costs(space);
    space
        .root_goals()
        .into_iter()
        .map(|g| extract(space, &costs, g))
        .collect()
}

/// Non-axiom nodes used by both proofs.
pub fn shared_derived_nodes(space: &ProofSpace, a: &ProofReport, b: &ProofReport) -> Vec<NodeId> {
    a.node_ids()
        .intersection(&b.node_ids())
        .copied()
        .filter(|&n| !space.is_axiom_in_scope(n))
        .collect()
}

/// Graph-description text of a pruned proof.
pub fn to_dot(
    space: &ProofSpace,
    report: &ProofReport,
) -> Result<String, crate::proofspace::SpaceError> {
    Ok(ProofSpace::from_json(&report.space, space.signature().clone())?.to_dot())
}
