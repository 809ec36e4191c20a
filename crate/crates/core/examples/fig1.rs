//! The (-> B C) |- (-> (and A B) C) example: run, prune, print DOT.

use matr::engine::Engine;
use matr::metalogic::FIG1_YAML;
use matr::pruning;

fn main() {
    let mut engine = Engine::from_yaml(FIG1_YAML).expect("shipped config loads");
    let report = engine.run();
    println!("{:?} after {} iterations", report.status, report.iterations);
    let space = engine.space();
    let goal = space.root_goals()[0];
    let proof = pruning::prune(space, goal).expect("goal is proven");
    println!(
        "pruned proof of {}: cost {}, {} subproof box(es)",
        proof.goal,
        proof.cost,
        proof.subproof_count()
    );
    for inf in &proof.space.inferences {
        let premises: Vec<String> = inf
            .premises
            .iter()
            .map(|p| space.nodes()[p.0 as usize].formula.to_string())
            .collect();
        let concl = &space.nodes()[inf.conclusion.0 as usize].formula;
        println!("  {}: {} => {}", inf.rule, premises.join(", "), concl);
    }
    println!(
        "{}",
        pruning::to_dot(space, &proof).expect("pruned proof rebuilds")
    );
}
