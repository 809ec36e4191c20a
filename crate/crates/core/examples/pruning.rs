//! Forward costs and shortest-proof extraction on a hand-built space.

use matr::formula::{Formula, Signature};
use matr::proofspace::{ProofSpace, ROOT};
use matr::pruning;

fn main() {
    let mut sig = Signature::default();
    for p in ["A", "B", "C", "D"] {
        sig.predicates.insert(p.into(), 0);
    }
    let mut sp = ProofSpace::new(sig);
    let node = |sp: &mut ProofSpace, name: &str, axiom| {
        sp.add_formula_node(ROOT, Formula::atom(name), axiom, name == "D", "example")
            .unwrap()
            .id
    };
    let a = node(&mut sp, "A", true);
    let b = node(&mut sp, "B", false);
    let c = node(&mut sp, "C", false);
    let d = node(&mut sp, "D", false);
    // Two routes to D: A -> B -> C -> D, and A -> D directly.
    sp.add_inference(ROOT, "step", &[a], b, true, "example")
        .unwrap();
    sp.add_inference(ROOT, "step", &[b], c, true, "example")
        .unwrap();
    sp.add_inference(ROOT, "step", &[c], d, true, "example")
        .unwrap();
    sp.add_inference(ROOT, "shortcut", &[a], d, true, "example")
        .unwrap();
    sp.propagate_checks();

    let costs = pruning::forward_costs(&sp);
    for n in sp.nodes() {
        println!("{}: cost {:?}", n.formula, costs.cost(n.id));
    }
    let proof = pruning::extract(&sp, &costs, d).unwrap();
    println!("{}", serde_json::to_string_pretty(&proof).unwrap());
}
