//! Runs the shipped incompleteness configuration and prints per-iteration
//! statistics plus the pruned proof sizes of both goals.

use matr::engine::Engine;
use matr::metalogic::INCOMPLETENESS_YAML;
use matr::pruning;

fn main() {
    let mut engine = Engine::from_yaml(INCOMPLETENESS_YAML).expect("shipped config loads");
    let report = engine.run();
    for s in &report.stats {
        println!(
            "iteration {}: {} recommendations, {} applied, {} newly checked, {} nodes",
            s.iteration, s.recommendations, s.applied, s.newly_checked, s.nodes
        );
    }
    println!(
        "status {:?} after {} iterations",
        report.status, report.iterations
    );
    let proofs: Vec<_> = pruning::prune_all(engine.space())
        .into_iter()
        .flatten()
        .collect();
    for p in &proofs {
        println!(
            "goal {}: cost {}, {} nodes",
            p.goal,
            p.cost,
            p.space.nodes.len()
        );
    }
    if let [first, second] = &proofs[..] {
        let shared = pruning::shared_derived_nodes(engine.space(), first, second);
        println!(
            "{} derived nodes shared between the two proofs",
            shared.len()
        );
    }
}
