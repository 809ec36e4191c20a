//! Parsing, printing, sort classification and capture-avoiding substitution.

use matr::formula::{classify, parse, substitute, Formula};
use matr::metalogic;

fn main() {
    let sig = metalogic::signature();
    let diag = parse("(forall phi (<-> phi (not (Prv (quote phi)))))").unwrap();
    println!("{diag}");
    let (var, body) = diag.as_quantifier("forall").unwrap();
    let g: Formula = "G".parse().unwrap();
    let inst = substitute(body, var, &g, &sig).unwrap();
    println!(
        "instance: {inst}  sort {:?}",
        classify(&inst, &sig).unwrap()
    );

    // n is free in the replacement, so the inner binder gets renamed.
    let f = parse("(forall n (= (+ m n) x))").unwrap();
    let rep = parse("(+ n 1)").unwrap();
    println!("{}", matr::formula::substitute_unchecked(&f, "m", &rep));

    for bad in ["(and A", "()", "(box A B)"] {
        match parse(bad).map(|f| classify(&f, &sig)) {
            Ok(Ok(s)) => println!("{bad}: {s:?}"),
            Ok(Err(e)) | Err(e) => println!("{bad}: {e}"),
        }
    }
}
