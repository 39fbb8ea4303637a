//! Minimisation of chain-submodular instances of arity at most 2 by a single
//! s-t minimum cut.
//!
//! A variable `v` over a chain of `n` labels becomes the nodes
//! `node(v, a)` for `1 ≤ a < n`, on the source side exactly when `v ≥ a`.
//! Infinite costs are encoded as implications between such events.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::flow::FlowNetwork;
use super::Solution;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::{eval_instance, Assignment, CostFunction, Instance, Language};
use crate::value::ExtValue;

const SOURCE: usize = 0;
const SINK: usize = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinCut {
    Solved(Solution),
    /// The instance meets the preconditions but has no cut encoding.
    Declined(String),
}

/// Checks `f(x ∧ y) + f(x ∨ y) ≤ f(x) + f(y)` over feasible tuples, where the
/// lattice operations are taken under `order` (labels from bottom to top).
pub fn check_chain_submodular(f: &CostFunction, order: &[usize]) -> bool {
    if f.arity() <= 1 {
        return true;
    }
    let rank = ranks(order);
    let feasible = f.feasible_tuples();
    for (i, x) in feasible.iter().enumerate() {
        for y in &feasible[i + 1..] {
            let pick = |choose_low: bool| -> Vec<usize> {
                x.iter()
                    .zip(y)
                    .map(|(&a, &b)| if (rank[a] <= rank[b]) == choose_low { a } else { b })
                    .collect()
            };
            let lhs = f.value(&pick(true)) + f.value(&pick(false));
            let rhs = f.value(x) + f.value(y);
            if lhs > rhs {
                return false;
            }
        }
    }
    true
}

fn ranks(order: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; order.len()];
    for (r, &l) in order.iter().enumerate() {
        rank[l] = r;
    }
    rank
}

/// Solves `inst` exactly by one minimum cut, or declines.
///
/// Fails with [`Error::PreconditionFailed`] when a used function has arity
/// above 2 or is not chain-submodular under `order`.
pub fn mincut_solve(lang: &Language, inst: &Instance, order: &[usize]) -> Result<MinCut> {
    let n = lang.domain().size();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::PreconditionFailed(
            "order is not a permutation of the domain".into(),
        ));
    }
    let resolved = inst.resolve(lang)?;
    for (f, _) in &resolved {
        if f.arity() > 2 {
            return Err(Error::PreconditionFailed(format!(
                "`{}` has arity {} > 2",
                f.name(),
                f.arity()
            )));
        }
        if !check_chain_submodular(f, order) {
            return Err(Error::PreconditionFailed(format!(
                "`{}` is not chain-submodular under the given order",
                f.name()
            )));
        }
    }
    let nv = inst.num_variables();
    if n == 1 {
        let assignment = Assignment(vec![0; nv]);
        let value = eval_instance(lang, inst, &assignment)?;
        return Ok(MinCut::Solved(if value.is_finite() {
            Solution::Optimal { value, assignment }
        } else {
            Solution::Infeasible
        }));
    }

    // Tables in chain positions, aggregated per variable and per pair.
    let mut unary: Vec<Vec<ExtValue>> = vec![vec![ExtValue::zero(); n]; nv];
    let mut binary: BTreeMap<(usize, usize), Vec<ExtValue>> = BTreeMap::new();
    for (f, scope) in &resolved {
        match scope {
            [x] => {
                for p in 0..n {
                    unary[*x][p] += f.value(&[order[p]]);
                }
            }
            [x, y] if x == y => {
                for p in 0..n {
                    unary[*x][p] += f.value(&[order[p], order[p]]);
                }
            }
            [x, y] => {
                let (a, b, swap) = if x < y { (*x, *y, false) } else { (*y, *x, true) };
                let table = binary
                    .entry((a, b))
                    .or_insert_with(|| vec![ExtValue::zero(); n * n]);
                for p in 0..n {
                    for q in 0..n {
                        let (u, w) = if swap { (q, p) } else { (p, q) };
                        table[p * n + q] += f.value(&[order[u], order[w]]);
                    }
                }
            }
            _ => unreachable!("arity checked above"),
        }
    }

    let mut net = Network::new(nv, n);
    for ((x, y), table) in &binary {
        if let Err(reason) = net.add_binary(*x, *y, table, &mut unary) {
            return Ok(MinCut::Declined(reason));
        }
    }
    for (v, row) in unary.iter().enumerate() {
        net.add_unary(v, row);
    }
    if net.infeasible {
        return Ok(MinCut::Solved(Solution::Infeasible));
    }
    let flow = net.flow.max_flow(SOURCE, SINK);
    let Some(flow) = flow.finite() else {
        return Ok(MinCut::Solved(Solution::Infeasible));
    };
    let side = net.flow.source_side(SOURCE);
    let labels: Vec<usize> = (0..nv)
        .map(|v| {
            let r = (1..n).rev().find(|&a| side[net.node(v, a as i64)]).unwrap_or(0);
            order[r]
        })
        .collect();
    let assignment = Assignment(labels);
    let value = eval_instance(lang, inst, &assignment)?;
    let expected = ExtValue::Finite(flow + &net.constant);
    if value != expected {
        return Err(Error::Mismatch {
            stage: "mincut".into(),
            detail: format!("cut value {expected} but assignment evaluates to {value}"),
        });
    }
    Ok(MinCut::Solved(Solution::Optimal { value, assignment }))
}

struct Network {
    flow: FlowNetwork,
    n: usize,
    constant: BigRational,
    infeasible: bool,
}

impl Network {
    fn new(nv: usize, n: usize) -> Self {
        let mut flow = FlowNetwork::new(2 + nv * (n - 1));
        for v in 0..nv {
            for a in 1..n - 1 {
                let (hi, lo) = (2 + v * (n - 1) + a, 2 + v * (n - 1) + a - 1);
                flow.add_edge(hi, lo, &ExtValue::Infinite);
            }
        }
        Network {
            flow,
            n,
            constant: BigRational::zero(),
            infeasible: false,
        }
    }

    /// The event `v ≥ a`; `a ≤ 0` is always true and `a ≥ n` never.
    fn node(&self, v: usize, a: i64) -> usize {
        if a <= 0 {
            SOURCE
        } else if a >= self.n as i64 {
            SINK
        } else {
            2 + v * (self.n - 1) + (a as usize - 1)
        }
    }

    /// Adds an arc costing `cap` when `from` holds and `to` does not.
    fn arc(&mut self, from: usize, to: usize, cap: &ExtValue) {
        if cap.is_zero() || from == to || from == SINK || to == SOURCE {
            return;
        }
        if from == SOURCE && to == SINK {
            match cap {
                ExtValue::Infinite => self.infeasible = true,
                ExtValue::Finite(c) => self.constant += c,
            }
            return;
        }
        self.flow.add_edge(from, to, cap);
    }

    /// `v ≥ a ⇒ w ≥ b`.
    fn implies(&mut self, v: usize, a: i64, w: usize, b: i64) {
        let (from, to) = (self.node(v, a), self.node(w, b));
        self.arc(from, to, &ExtValue::Infinite);
    }

    fn add_unary(&mut self, v: usize, row: &[ExtValue]) {
        let n = self.n;
        let feasible: Vec<usize> = (0..n).filter(|&p| row[p].is_finite()).collect();
        let Some(&first) = feasible.first() else {
            self.infeasible = true;
            return;
        };
        self.implies(v, 0, v, first as i64);
        for a in 1..n {
            if row[a].is_infinite() {
                let next = feasible.iter().find(|&&p| p > a).map_or(n, |&p| p);
                self.implies(v, a as i64, v, next as i64);
            }
        }
        let finite = |p: usize| row[p].finite().cloned().unwrap_or_else(BigRational::zero);
        self.constant += finite(0);
        for a in 1..n {
            let c = finite(a) - finite(a - 1);
            if c.is_positive() {
                let from = self.node(v, a as i64);
                self.arc(from, SINK, &ExtValue::Finite(c));
            } else if c.is_negative() {
                self.constant += &c;
                let to = self.node(v, a as i64);
                self.arc(SOURCE, to, &ExtValue::Finite(-c));
            }
        }
    }

    /// Encodes the pair table `psi[p * n + q]` over `(x, y)`; unary parts
    /// are folded into `unary`.
    fn add_binary(
        &mut self,
        x: usize,
        y: usize,
        psi: &[ExtValue],
        unary: &mut [Vec<ExtValue>],
    ) -> std::result::Result<(), String> {
        let n = self.n;
        let feas = |p: usize, q: usize| psi[p * n + q].is_finite();
        let x_side = Bounds::new(n, feas);
        let y_side = Bounds::new(n, |q, p| feas(p, q));
        // Labels without any feasible partner become unary holes.
        let live_x: Vec<bool> = (0..n).map(|p| (0..n).any(|q| feas(p, q))).collect();
        let live_y: Vec<bool> = (0..n).map(|q| (0..n).any(|p| feas(p, q))).collect();
        for p in 0..n {
            if !live_x[p] {
                unary[x][p] = ExtValue::Infinite;
            }
            if !live_y[p] {
                unary[y][p] = ExtValue::Infinite;
            }
        }
        for p in (0..n).filter(|&p| live_x[p]) {
            for q in (0..n).filter(|&q| live_y[q]) {
                let closed = x_side.admits(p, q) && y_side.admits(q, p);
                if closed != feas(p, q) {
                    return Err(format!(
                        "feasible pairs of ({x}, {y}) are not closed under chain implications"
                    ));
                }
            }
        }
        let mut implications = Vec::new();
        for (first, second, bounds) in [(x, y, &x_side), (y, x, &y_side)] {
            for a in 1..n {
                // first ≥ a ⇒ second ≥ lo(a); a missing lo forbids first ≥ a
                match bounds.lo[a] {
                    Some(lo) => implications.push((first, a as i64, second, lo as i64)),
                    None => implications.push((first, a as i64, first, n as i64)),
                }
                // second > hi(a) ⇒ first ≥ a; a missing hi forces first ≥ a
                match bounds.hi[a] {
                    Some(hi) => implications.push((second, hi as i64 + 1, first, a as i64)),
                    None => implications.push((first, 0, first, a as i64)),
                }
            }
        }
        let Some(psi) = finite_extension(psi, n) else {
            return Err(format!("no submodular finite extension for ({x}, {y})"));
        };
        for (v, a, w, b) in implications {
            self.implies(v, a, w, b);
        }

        let at = |p: usize, q: usize| &psi[p * n + q];
        let theta = |a: usize, b: usize| at(a, b - 1) + at(a - 1, b) - at(a, b) - at(a - 1, b - 1);
        self.constant += at(0, 0);
        let mut running = BigRational::zero();
        for p in 0..n {
            if p > 0 {
                for b in 1..n {
                    running += theta(p, b);
                }
            }
            let ux = at(p, 0) - at(0, 0) - &running;
            let uy = at(0, p) - at(0, 0);
            unary[x][p] += &ExtValue::Finite(ux);
            unary[y][p] += &ExtValue::Finite(uy);
        }
        for a in 1..n {
            for b in 1..n {
                let t = theta(a, b);
                let (from, to) = (self.node(x, a as i64), self.node(y, b as i64));
                self.arc(from, to, &ExtValue::Finite(t));
            }
        }
        Ok(())
    }
}

/// For a relation on `(u, w)`: `lo[a]` is the least `w` with some `u ≥ a`,
/// `hi[a]` the largest `w` with some `u < a`.
struct Bounds {
    lo: Vec<Option<usize>>,
    hi: Vec<Option<usize>>,
}

impl Bounds {
    fn new(n: usize, feas: impl Fn(usize, usize) -> bool) -> Self {
        let row_min: Vec<Option<usize>> = (0..n).map(|u| (0..n).find(|&w| feas(u, w))).collect();
        let row_max: Vec<Option<usize>> = (0..n).map(|u| (0..n).rev().find(|&w| feas(u, w))).collect();
        let mut lo: Vec<Option<usize>> = vec![None; n + 1];
        for a in (0..n).rev() {
            lo[a] = match (lo[a + 1], row_min[a]) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
        }
        let mut hi: Vec<Option<usize>> = vec![None; n + 1];
        for a in 1..=n {
            hi[a] = match (hi[a - 1], row_max[a - 1]) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            };
        }
        Bounds { lo, hi }
    }

    /// Whether `(u, w)` satisfies every implication derived from these bounds.
    /// Both sequences are monotone, so only the tightest bound matters.
    fn admits(&self, u: usize, w: usize) -> bool {
        let n = self.lo.len() - 1;
        let lower = u == 0 || self.lo[u].is_some_and(|lo| lo <= w);
        let upper = u + 1 == n || self.hi[u + 1].is_some_and(|hi| w <= hi);
        lower && upper
    }
}

/// A finite table agreeing with `psi` where finite and with non-negative
/// mixed differences everywhere.
fn finite_extension(psi: &[ExtValue], n: usize) -> Option<Vec<BigRational>> {
    let finite: Vec<&BigRational> = psi.iter().filter_map(ExtValue::finite).collect();
    let first = finite.first()?;
    if finite.iter().all(|v| v == first) {
        return Some(vec![(*first).clone(); n * n]);
    }
    let missing: Vec<usize> = (0..n * n).filter(|&i| psi[i].is_infinite()).collect();
    let column = |cell: usize| missing.iter().position(|&m| m == cell);
    let mut lp = LinearProgram::new(2 * missing.len());
    for a in 1..n {
        for b in 1..n {
            // ψ(a,b−1) + ψ(a−1,b) − ψ(a,b) − ψ(a−1,b−1) ≥ 0
            let cells = [
                (a * n + b - 1, 1),
                ((a - 1) * n + b, 1),
                (a * n + b, -1),
                ((a - 1) * n + b - 1, -1),
            ];
            let mut terms = Vec::new();
            let mut rhs = BigRational::zero();
            for (cell, sign) in cells {
                let s = BigRational::from_integer(sign.into());
                match column(cell) {
                    Some(j) => {
                        terms.push((2 * j, s.clone()));
                        terms.push((2 * j + 1, -s));
                    }
                    None => rhs -= s * psi[cell].finite().expect("finite cell"),
                }
            }
            lp.add_sparse(&terms, Relation::Ge, rhs);
        }
    }
    let solution = match lp.maximize() {
        LpOutcome::Optimal { solution, .. } => solution,
        _ => return None,
    };
    Some(
        (0..n * n)
            .map(|cell| match column(cell) {
                Some(j) => &solution[2 * j] - &solution[2 * j + 1],
                None => psi[cell].finite().expect("finite cell").clone(),
            })
            .collect(),
    )
}
