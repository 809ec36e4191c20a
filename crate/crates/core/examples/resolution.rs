//! Clausify a small theory, refute a negated goal, print the clause dump.

use matr::formula::parse;
use matr::resolution::{saturate, CnfBuilder};

fn main() {
    let axioms = ["(forall x (-> (Man x) (Mortal x)))", "(Man socrates)"];
    let goal = parse("(not (Mortal socrates))").unwrap();
    let mut cnf = CnfBuilder::new();
    let mut input = Vec::new();
    for (tag, a) in axioms.iter().enumerate() {
        input.extend(cnf.clauses(&parse(a).unwrap(), tag).unwrap());
    }
    input.extend(cnf.clauses(&goal, axioms.len()).unwrap());
    let out = saturate(input, 1000, None);
    println!(
        "{} after {} clauses",
        out.verdict.name(),
        out.clauses_generated
    );
    print!("{}", out.dump());
    if let Some(proof) = out.proof() {
        println!("inputs used: {:?}", proof.input_tags());
    }
}
