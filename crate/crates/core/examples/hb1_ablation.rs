//! Con(PA) task with HB1 as a codelet versus HB1 as an axiom.

use matr::engine::load_config;
use matr::metalogic::{con_pa_task, INCOMPLETENESS_YAML};

fn main() {
    for as_axiom in [false, true] {
        let mut config = load_config(INCOMPLETENESS_YAML).expect("config");
        config.hb1_as_axiom = as_axiom;
        config.limits.clause_limit = 2000;
        let task = con_pa_task(&config).expect("task");
        let label = if as_axiom {
            "hb1 as axiom"
        } else {
            "hb1 codelet"
        };
        println!(
            "{label}: {} after {} clauses",
            task.outcome.verdict.name(),
            task.outcome.clauses_generated
        );
        if let Some(p) = task.outcome.proof() {
            println!("{} clauses in the refutation", p.clauses.len());
        }
    }
}
