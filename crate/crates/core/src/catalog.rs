//! Small named languages that recur in tests, examples and documentation.

use crate::model::{CostFunction, Domain, Language};
use crate::value::ExtValue;

/// Binary function over `{0,1}`: `ρ(0,1) = 2`, `ρ(1,0) = 1`, `∞` otherwise.
pub fn rho() -> CostFunction {
    CostFunction::from_fn("rho", Domain::range(2), 2, |t| match t {
        [0, 1] => ExtValue::int(2),
        [1, 0] => ExtValue::int(1),
        _ => ExtValue::Infinite,
    })
}

pub fn rho_language() -> Language {
    Language::new("rho", Domain::range(2), vec![rho()]).expect("valid")
}

/// Ternary function over `{0,1}`: `x + 2y + 3z` on one-in-three tuples, `∞` elsewhere.
pub fn phi_sum() -> CostFunction {
    CostFunction::from_fn("phi_sum", Domain::range(2), 3, |t| {
        if t.iter().sum::<usize>() == 1 {
            ExtValue::int((t[0] + 2 * t[1] + 3 * t[2]) as i64)
        } else {
            ExtValue::Infinite
        }
    })
}

pub fn phi_sum_language() -> Language {
    Language::new("onein3", Domain::range(2), vec![phi_sum()]).expect("valid")
}

/// Equality relation on `{0, ..., n-1}`.
pub fn phi_eq(n: usize) -> CostFunction {
    CostFunction::relation("phi_eq", Domain::range(n), 2, |t| t[0] == t[1])
}

pub fn phi_eq_language(n: usize) -> Language {
    Language::new("eq", Domain::range(n), vec![phi_eq(n)]).expect("valid")
}

/// The Max-Cut cost function over `{0,1}`: 1 when both ends agree, 0 otherwise.
pub fn max_cut() -> CostFunction {
    CostFunction::from_fn("maxcut", Domain::range(2), 2, |t| {
        ExtValue::int(i64::from(t[0] == t[1]))
    })
}

pub fn max_cut_language() -> Language {
    Language::new("maxcut", Domain::range(2), vec![max_cut()]).expect("valid")
}

/// Unary function over `{0,1}` with `u(0) = 0`, `u(1) = 5`.
pub fn unary_u() -> CostFunction {
    CostFunction::from_fn("u", Domain::range(2), 1, |t| ExtValue::int(5 * t[0] as i64))
}

/// `{u, ρ}`: a two-function language whose combined function has arity 3.
pub fn u_rho_language() -> Language {
    Language::new("u_rho", Domain::range(2), vec![unary_u(), rho()]).expect("valid")
}
