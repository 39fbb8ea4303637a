//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use binarise::model::{all_tuples, CostFunction};
use binarise::{ExtValue, Instance, Language};

/// Sum of the constraint values under `labels`, looked up directly in the tables.
pub fn evaluate(lang: &Language, inst: &Instance, labels: &[usize]) -> ExtValue {
    let mut total = ExtValue::zero();
    for c in inst.constraints() {
        let f = lang.get(&c.function).expect("function in language");
        let tuple: Vec<usize> = c.scope.iter().map(|&v| labels[v]).collect();
        total += f.value(&tuple);
    }
    total
}

/// Minimum over every assignment, `∞` when none is feasible.
pub fn brute_opt(lang: &Language, inst: &Instance) -> ExtValue {
    all_tuples(lang.domain().size(), inst.num_variables())
        .map(|t| evaluate(lang, inst, &t))
        .min()
        .unwrap_or(ExtValue::Infinite)
}

/// `f(x ∧ y) + f(x ∨ y) ≤ f(x) + f(y)` over `{0,1}^m`.
pub fn is_boolean_submodular(f: &CostFunction) -> bool {
    let m = f.arity();
    all_tuples(2, m).all(|x| {
        all_tuples(2, m).all(|y| {
            let meet: Vec<usize> = x.iter().zip(&y).map(|(a, b)| *a.min(b)).collect();
            let join: Vec<usize> = x.iter().zip(&y).map(|(a, b)| *a.max(b)).collect();
            f.value(&meet) + f.value(&join) <= f.value(&x) + f.value(&y)
        })
    })
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
