//! Exact solvers: exhaustive search, branch-and-bound, min-cut and minimum-cost homomorphism.

mod flow;
mod mincut;

pub use flow::FlowNetwork;
pub use mincut::{check_chain_submodular, mincut_solve, MinCut};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::digraph::LeveledDigraph;
use crate::error::{Error, Result};
use crate::hom::HomSearch;
use crate::model::{eval_instance, Assignment, Instance, Language};
use crate::value::{lcm_denominators, ExtValue};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Optimal { value: ExtValue, assignment: Assignment },
    Infeasible,
}

impl Solution {
    /// The optimum, `∞` when infeasible.
    pub fn optimum(&self) -> ExtValue {
        match self {
            Solution::Optimal { value, .. } => value.clone(),
            Solution::Infeasible => ExtValue::Infinite,
        }
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            Solution::Optimal { assignment, .. } => Some(assignment),
            Solution::Infeasible => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Solution::Infeasible)
    }
}

/// Constraint tables scaled to a common integer denominator.
struct Compiled {
    domain: usize,
    constraints: Vec<(Vec<usize>, Vec<Option<i128>>)>,
    denominator: BigInt,
}

impl Compiled {
    fn new(lang: &Language, inst: &Instance) -> Result<Self> {
        let resolved = inst.resolve(lang)?;
        let denominator = lcm_denominators(resolved.iter().flat_map(|(f, _)| f.table()));
        let scale = BigRational::from_integer(denominator.clone());
        // Bound entries so that no sum over all constraints overflows.
        let bound = i128::MAX / (resolved.len() as i128 + 1);
        let constraints = resolved
            .iter()
            .map(|(f, scope)| {
                let table = f
                    .table()
                    .iter()
                    .map(|v| match v {
                        ExtValue::Infinite => Ok(None),
                        ExtValue::Finite(x) => (x * &scale)
                            .to_integer()
                            .to_i128()
                            .filter(|c| c.unsigned_abs() <= bound.unsigned_abs())
                            .map(Some)
                            .ok_or_else(|| Error::BudgetExceeded("cost exceeds 128-bit range".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((scope.to_vec(), table))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Compiled {
            domain: lang.domain().size(),
            constraints,
            denominator,
        })
    }

    fn lookup(&self, c: usize, labels: &[usize]) -> Option<i128> {
        let (scope, table) = &self.constraints[c];
        let idx = scope.iter().fold(0, |acc, &v| acc * self.domain + labels[v]);
        table[idx]
    }

    fn unscale(&self, v: i128) -> ExtValue {
        ExtValue::Finite(BigRational::new(BigInt::from(v), self.denominator.clone()))
    }

    /// Constraint indices grouped by the largest variable in their scope.
    fn by_last_variable(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n];
        for (i, (scope, _)) in self.constraints.iter().enumerate() {
            let last = *scope.iter().max().expect("arity ≥ 1");
            out[last].push(i);
        }
        out
    }
}

/// Exhaustive search with the default budget of `10⁷` assignments.
pub fn brute_force(lang: &Language, inst: &Instance) -> Result<Solution> {
    brute_force_with_budget(lang, inst, DEFAULT_BUDGET)
}

/// Exhaustive search over `|D|^n` assignments in lexicographic order. Partial
/// assignments are cut as soon as a completed constraint is infinite.
pub fn brute_force_with_budget(lang: &Language, inst: &Instance, budget: u64) -> Result<Solution> {
    let n = inst.num_variables();
    let d = lang.domain().size() as u64;
    let space = d.checked_pow(n as u32).filter(|&s| s <= budget);
    if space.is_none() {
        return Err(Error::BudgetExceeded(format!(
            "{d}^{n} assignments exceed the budget of {budget}"
        )));
    }
    let compiled = Compiled::new(lang, inst)?;
    let groups = compiled.by_last_variable(n);
    let mut labels = vec![0usize; n];
    let mut best: Option<(i128, Vec<usize>)> = None;
    exhaust(&compiled, &groups, &mut labels, 0, 0, &mut best);
    Ok(match best {
        None => Solution::Infeasible,
        Some((v, a)) => Solution::Optimal {
            value: compiled.unscale(v),
            assignment: Assignment(a),
        },
    })
}

fn exhaust(
    c: &Compiled,
    groups: &[Vec<usize>],
    labels: &mut Vec<usize>,
    v: usize,
    partial: i128,
    best: &mut Option<(i128, Vec<usize>)>,
) {
    if v == labels.len() {
        if best.as_ref().is_none_or(|(b, _)| partial < *b) {
            *best = Some((partial, labels.clone()));
        }
        return;
    }
    'label: for a in 0..c.domain {
        labels[v] = a;
        let mut total = partial;
        for &ci in &groups[v] {
            match c.lookup(ci, labels) {
                Some(x) => total += x,
                None => continue 'label,
            }
        }
        exhaust(c, groups, labels, v + 1, total, best);
    }
}

/// Depth-first branch-and-bound for instances of any arity.
///
/// The bound adds, for every constraint with an unassigned variable, the
/// least finite entry consistent with the assigned ones.
pub fn branch_and_bound(lang: &Language, inst: &Instance, node_limit: u64) -> Result<Solution> {
    let n = inst.num_variables();
    let compiled = Compiled::new(lang, inst)?;
    let groups = compiled.by_last_variable(n);
    let mut touching = vec![Vec::new(); n];
    for (i, (scope, _)) in compiled.constraints.iter().enumerate() {
        for &v in scope {
            if !touching[v].contains(&i) {
                touching[v].push(i);
            }
        }
    }
    let mut state = Bnb {
        c: &compiled,
        groups: &groups,
        labels: vec![None; n],
        best: None,
        nodes: 0,
        node_limit,
    };
    state.search(0, 0)?;
    Ok(match state.best {
        None => Solution::Infeasible,
        Some((v, a)) => Solution::Optimal {
            value: compiled.unscale(v),
            assignment: Assignment(a),
        },
    })
}

struct Bnb<'a> {
    c: &'a Compiled,
    groups: &'a [Vec<usize>],
    labels: Vec<Option<usize>>,
    best: Option<(i128, Vec<usize>)>,
    nodes: u64,
    node_limit: u64,
}

impl Bnb<'_> {
    /// Least entry of constraint `ci` consistent with the current partial assignment.
    fn least_consistent(&self, ci: usize) -> Option<i128> {
        let (scope, table) = &self.c.constraints[ci];
        let d = self.c.domain;
        let mut best: Option<i128> = None;
        'entry: for (idx, v) in table.iter().enumerate() {
            let Some(v) = v else { continue };
            let mut rest = idx;
            for &var in scope.iter().rev() {
                let label = rest % d;
                rest /= d;
                if matches!(self.labels[var], Some(l) if l != label) {
                    continue 'entry;
                }
            }
            best = Some(best.map_or(*v, |b| b.min(*v)));
        }
        best
    }

    fn search(&mut self, v: usize, partial: i128) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(Error::BudgetExceeded(format!(
                "branch-and-bound exceeded {} nodes",
                self.node_limit
            )));
        }
        let n = self.labels.len();
        if v == n {
            if self.best.as_ref().is_none_or(|(b, _)| partial < *b) {
                let a = self.labels.iter().map(|l| l.expect("complete")).collect();
                self.best = Some((partial, a));
            }
            return Ok(());
        }
        let mut bound = partial;
        for later in &self.groups[v..] {
            for &ci in later {
                match self.least_consistent(ci) {
                    Some(x) => bound += x,
                    None => return Ok(()),
                }
            }
        }
        if matches!(&self.best, Some((b, _)) if bound >= *b) {
            return Ok(());
        }
        'label: for a in 0..self.c.domain {
            self.labels[v] = Some(a);
            let mut total = partial;
            for &ci in &self.groups[v] {
                let labels: Vec<usize> = self.labels.iter().map(|l| l.unwrap_or(0)).collect();
                match self.c.lookup(ci, &labels) {
                    Some(x) => total += x,
                    None => continue 'label,
                }
            }
            self.search(v + 1, total)?;
        }
        self.labels[v] = None;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Brute,
    MinCut,
    Bnb,
    Auto,
}

/// Solves with the requested method. `Auto` tries min-cut under the identity
/// order, then exhaustive search within budget, then branch-and-bound.
pub fn solve(lang: &Language, inst: &Instance, method: Method) -> Result<Solution> {
    let identity: Vec<usize> = (0..lang.domain().size()).collect();
    match method {
        Method::Brute => brute_force(lang, inst),
        Method::Bnb => branch_and_bound(lang, inst, crate::hom::DEFAULT_NODE_LIMIT),
        Method::MinCut => match mincut_solve(lang, inst, &identity)? {
            MinCut::Solved(s) => Ok(s),
            MinCut::Declined(reason) => Err(Error::NotApplicable(reason)),
        },
        Method::Auto => {
            if let Ok(MinCut::Solved(s)) = mincut_solve(lang, inst, &identity) {
                return Ok(s);
            }
            match brute_force(lang, inst) {
                Err(Error::BudgetExceeded(_)) => {
                    branch_and_bound(lang, inst, crate::hom::DEFAULT_NODE_LIMIT)
                }
                other => other,
            }
        }
    }
}

/// Minimum of `Σ_v costs[v][h(v)]` over homomorphisms `h` from `source` to `target`.
///
/// The assignment maps source vertices to target vertex indices.
pub fn min_cost_hom(
    source: &LeveledDigraph,
    target: &LeveledDigraph,
    costs: &[Vec<ExtValue>],
) -> Result<Solution> {
    if costs.len() != source.vertex_count() {
        return Err(Error::ArityMismatch {
            expected: source.vertex_count(),
            found: costs.len(),
        });
    }
    let t = target.target();
    let search = HomSearch::new(&t, source.vertex_count(), source.edges().iter().copied());
    let rows: Vec<Option<Vec<ExtValue>>> = costs.iter().cloned().map(Some).collect();
    Ok(match search.min_cost(&rows)? {
        None => Solution::Infeasible,
        Some((value, h)) => Solution::Optimal {
            value,
            assignment: Assignment(h),
        },
    })
}

/// Every source vertex pays the target's vertex costs.
pub fn uniform_costs(source: &LeveledDigraph, target: &LeveledDigraph) -> Vec<Vec<ExtValue>> {
    vec![target.cost_table(); source.vertex_count()]
}

/// Re-evaluates a solution; used by tests and the verifier.
pub fn check_solution(lang: &Language, inst: &Instance, sol: &Solution) -> Result<bool> {
    Ok(match sol {
        Solution::Infeasible => true,
        Solution::Optimal { value, assignment } => eval_instance(lang, inst, assignment)? == *value,
    })
}
