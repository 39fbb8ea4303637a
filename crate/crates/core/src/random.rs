//! Seeded generators for languages, instances and submodular functions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{all_tuples, CostFunction, Domain, Instance, Language};
use crate::value::ExtValue;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct LanguageParams {
    pub min_domain: usize,
    pub max_domain: usize,
    pub max_functions: usize,
    /// Upper bound on the summed arity, i.e. the arity of the combined function.
    pub max_total_arity: usize,
    pub max_value: i64,
    /// Probability that a table entry is `∞`.
    pub infinity: f64,
}

impl Default for LanguageParams {
    fn default() -> Self {
        LanguageParams {
            min_domain: 2,
            max_domain: 3,
            max_functions: 2,
            max_total_arity: 3,
            max_value: 5,
            infinity: 0.35,
        }
    }
}

fn random_table(rng: &mut impl Rng, d: usize, arity: usize, params: &LanguageParams) -> Vec<ExtValue> {
    let n = d.pow(arity as u32);
    let mut table: Vec<ExtValue> = (0..n)
        .map(|_| {
            if rng.gen_bool(params.infinity) {
                ExtValue::Infinite
            } else {
                ExtValue::int(rng.gen_range(0..=params.max_value))
            }
        })
        .collect();
    if table.iter().all(ExtValue::is_infinite) {
        let i = rng.gen_range(0..n);
        table[i] = ExtValue::int(rng.gen_range(0..=params.max_value));
    }
    table
}

/// A random language over `{0..d-1}`. No member is identically infinite.
pub fn language(rng: &mut impl Rng, params: &LanguageParams) -> Language {
    let d = rng.gen_range(params.min_domain..=params.max_domain);
    let domain = Domain::range(d);
    let mut budget = params.max_total_arity.max(1);
    let count = rng.gen_range(1..=params.max_functions.max(1));
    let mut functions = Vec::new();
    for i in 0..count {
        if budget == 0 {
            break;
        }
        let arity = rng.gen_range(1..=budget);
        budget -= arity;
        let table = random_table(rng, d, arity, params);
        functions.push(CostFunction::new(format!("f{i}"), domain.clone(), arity, table).expect("sized"));
    }
    Language::new("random", domain, functions).expect("valid by construction")
}

/// A random instance with at most `max_vars` variables and `max_constraints` constraints.
pub fn instance(rng: &mut impl Rng, lang: &Language, max_vars: usize, max_constraints: usize) -> Instance {
    let n = rng.gen_range(1..=max_vars.max(1));
    let mut inst = Instance::new("random", (0..n).map(|i| format!("v{i}"))).expect("fresh names");
    let q = rng.gen_range(1..=max_constraints.max(1));
    for _ in 0..q {
        let f = lang.functions().choose(rng).expect("non-empty language");
        let scope = (0..f.arity()).map(|_| rng.gen_range(0..n)).collect();
        inst.add_constraint(f.name(), scope).expect("scope in range");
    }
    inst
}

/// A random finite or lattice-constrained submodular function over `{0,1}^arity`.
///
/// Built from non-negative weighted terms `-x_i x_j`, a concave function of
/// the Hamming weight, linear terms, and optional implications `x_i ≤ x_j`.
pub fn submodular_boolean(rng: &mut impl Rng, arity: usize, name: &str) -> CostFunction {
    let linear: Vec<i64> = (0..arity).map(|_| rng.gen_range(-3..=3)).collect();
    let mut pair = vec![vec![0i64; arity]; arity];
    for i in 0..arity {
        for j in i + 1..arity {
            pair[i][j] = rng.gen_range(0..=3);
        }
    }
    let concave: Vec<i64> = {
        let mut steps: Vec<i64> = (0..arity).map(|_| rng.gen_range(0..=3)).collect();
        steps.sort_unstable_by(|a, b| b.cmp(a));
        let mut acc = 0;
        std::iter::once(0)
            .chain(steps.into_iter().map(|s| {
                acc += s;
                acc
            }))
            .collect()
    };
    let mut implications = Vec::new();
    if arity >= 2 && rng.gen_bool(0.4) {
        let i = rng.gen_range(0..arity);
        let j = (i + rng.gen_range(1..arity)) % arity;
        implications.push((i, j));
    }
    let base = rng.gen_range(0..=4);
    CostFunction::from_fn(name, Domain::range(2), arity, |t| {
        if implications.iter().any(|&(i, j)| t[i] > t[j]) {
            return ExtValue::Infinite;
        }
        let mut v = base + concave[t.iter().sum::<usize>()];
        for i in 0..arity {
            v += linear[i] * t[i] as i64;
            for j in i + 1..arity {
                v -= pair[i][j] * (t[i] * t[j]) as i64;
            }
        }
        ExtValue::int(v)
    })
}

/// Random binary instance that is submodular with respect to `order`, the
/// chain listing label indices from bottom to top.
pub struct ChainSubmodularCase {
    pub language: Language,
    pub instance: Instance,
    pub order: Vec<usize>,
}

enum Crisp {
    None,
    XMinusY(i64),
    YMinusX(i64),
    Implies(usize, usize),
}

pub fn chain_submodular_case(rng: &mut impl Rng, max_domain: usize, max_vars: usize) -> ChainSubmodularCase {
    let d = rng.gen_range(2..=max_domain.max(2));
    let domain = Domain::range(d);
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut rank = vec![0; d];
    for (r, &l) in order.iter().enumerate() {
        rank[l] = r;
    }

    let mut functions = Vec::new();
    for i in 0..2 {
        let values: Vec<ExtValue> = (0..d)
            .map(|_| {
                if rng.gen_bool(0.15) {
                    ExtValue::Infinite
                } else {
                    ExtValue::int(rng.gen_range(0..=5))
                }
            })
            .collect();
        let values = if values.iter().all(ExtValue::is_infinite) {
            vec![ExtValue::zero(); d]
        } else {
            values
        };
        functions.push(CostFunction::from_fn(format!("u{i}"), domain.clone(), 1, |t| {
            values[rank[t[0]]].clone()
        }));
    }
    for i in 0..3 {
        let terms: Vec<(usize, usize, i64)> = (0..rng.gen_range(0..=3))
            .map(|_| (rng.gen_range(1..d), rng.gen_range(1..d), rng.gen_range(1..=4)))
            .collect();
        let ux: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=3)).collect();
        let uy: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=3)).collect();
        let convex = rng.gen_range(0..=2);
        let crisp = match rng.gen_range(0..4) {
            0 => Crisp::None,
            1 => Crisp::XMinusY(rng.gen_range(0..d) as i64),
            2 => Crisp::YMinusX(rng.gen_range(0..d) as i64),
            _ => Crisp::Implies(rng.gen_range(1..d), rng.gen_range(1..d)),
        };
        functions.push(CostFunction::from_fn(format!("b{i}"), domain.clone(), 2, |t| {
            let (x, y) = (rank[t[0]], rank[t[1]]);
            let blocked = match crisp {
                Crisp::None => false,
                Crisp::XMinusY(k) => x as i64 - y as i64 > k,
                Crisp::YMinusX(k) => y as i64 - x as i64 > k,
                Crisp::Implies(a, b) => x >= a && y < b,
            };
            if blocked {
                return ExtValue::Infinite;
            }
            let diff = x as i64 - y as i64;
            let mut v = ux[x] + uy[y] + convex * diff * diff;
            for &(a, b, c) in &terms {
                if x >= a && y < b {
                    v += c;
                }
            }
            ExtValue::int(v)
        }));
    }
    functions.retain(|f| !f.is_identically_infinite());
    let language = Language::new("chain", domain, functions).expect("valid");
    let n = rng.gen_range(1..=max_vars.max(1));
    let mut instance = Instance::new("chain", (0..n).map(|i| format!("v{i}"))).expect("fresh");
    let q = rng.gen_range(1..=2 * n);
    for _ in 0..q {
        let f = language.functions().choose(rng).expect("non-empty");
        let scope = if f.arity() == 1 {
            vec![rng.gen_range(0..n)]
        } else {
            vec![rng.gen_range(0..n), rng.gen_range(0..n)]
        };
        instance.add_constraint(f.name(), scope).expect("in range");
    }
    ChainSubmodularCase {
        language,
        instance,
        order,
    }
}

/// A random non-empty-Feas cost function table over `{0..d-1}^arity`.
pub fn cost_function(rng: &mut impl Rng, name: &str, d: usize, arity: usize, params: &LanguageParams) -> CostFunction {
    let table = random_table(rng, d, arity, params);
    CostFunction::new(name, Domain::range(d), arity, table).expect("sized")
}

/// A random crisp relation over `{0..d-1}^arity` with at least one tuple.
pub fn relation(rng: &mut impl Rng, name: &str, d: usize, arity: usize, density: f64) -> CostFunction {
    let tuples: Vec<Vec<usize>> = all_tuples(d, arity).collect();
    let keep: Vec<bool> = tuples.iter().map(|_| rng.gen_bool(density)).collect();
    let forced = rng.gen_range(0..tuples.len());
    let mut i = 0;
    CostFunction::relation(name, Domain::range(d), arity, |_| {
        let member = keep[i] || i == forced;
        i += 1;
        member
    })
}
