//! Homomorphism search between digraphs: arc consistency plus backtracking.
//!
//! Candidate sets are bitsets over target vertices. Variables are branched in
//! index order and values in ascending order, so the first solution found and
//! the first optimum found are lexicographically least.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::value::{lcm_denominators, ExtValue};

pub const DEFAULT_NODE_LIMIT: u64 = 20_000_000;

/// Adjacency of a target digraph as bitsets.
#[derive(Clone, Debug)]
pub struct Target {
    out: Vec<FixedBitSet>,
    inc: Vec<FixedBitSet>,
    loops: FixedBitSet,
}

impl Target {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut out = vec![FixedBitSet::with_capacity(n); n];
        let mut inc = vec![FixedBitSet::with_capacity(n); n];
        let mut loops = FixedBitSet::with_capacity(n);
        for (a, b) in edges {
            out[a].insert(b);
            inc[b].insert(a);
            if a == b {
                loops.insert(a);
            }
        }
        Target { out, inc, loops }
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.out[a].contains(b)
    }
}

#[derive(Clone, Copy, Debug)]
struct Arc {
    other: usize,
    forward: bool,
}

/// A homomorphism problem from a source digraph on `0..n` into a [`Target`].
#[derive(Clone, Debug)]
pub struct HomSearch<'a> {
    target: &'a Target,
    arcs: Vec<Vec<Arc>>,
    looped: Vec<bool>,
    domains: Vec<FixedBitSet>,
    node_limit: u64,
}

struct Stats {
    nodes: u64,
    limit: u64,
}

impl Stats {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(Error::BudgetExceeded(format!(
                "homomorphism search exceeded {} nodes",
                self.limit
            )));
        }
        Ok(())
    }
}

impl<'a> HomSearch<'a> {
    pub fn new(target: &'a Target, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut arcs = vec![Vec::new(); n];
        let mut looped = vec![false; n];
        for (u, v) in edges {
            if u == v {
                looped[u] = true;
            } else {
                arcs[u].push(Arc { other: v, forward: true });
                arcs[v].push(Arc { other: u, forward: false });
            }
        }
        let mut full = FixedBitSet::with_capacity(target.len());
        full.insert_range(..);
        HomSearch {
            target,
            arcs,
            looped,
            domains: vec![full; n],
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }

    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = limit;
        self
    }

    /// Restricts the candidates of source vertex `v` to `allowed`.
    pub fn restrict(&mut self, v: usize, allowed: impl IntoIterator<Item = usize>) {
        let mut set = FixedBitSet::with_capacity(self.target.len());
        set.extend(allowed);
        self.domains[v].intersect_with(&set);
    }

    pub fn fix(&mut self, v: usize, value: usize) {
        self.restrict(v, [value]);
    }

    fn revise(&self, domains: &mut [FixedBitSet], x: usize, arc: Arc) -> bool {
        let support = &domains[arc.other];
        let adjacency = if arc.forward { &self.target.out } else { &self.target.inc };
        let doomed: Vec<usize> = domains[x]
            .ones()
            .filter(|&a| adjacency[a].is_disjoint(support))
            .collect();
        for &a in &doomed {
            domains[x].set(a, false);
        }
        !doomed.is_empty()
    }

    /// Arc consistency from the given dirty variables. False on a wipe-out.
    fn propagate(&self, domains: &mut [FixedBitSet], dirty: impl IntoIterator<Item = usize>) -> bool {
        let n = domains.len();
        let mut queued = vec![false; n];
        let mut queue = VecDeque::new();
        for v in dirty {
            if !queued[v] {
                queued[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(y) = queue.pop_front() {
            queued[y] = false;
            if domains[y].is_clear() {
                return false;
            }
            for back in &self.arcs[y] {
                let x = back.other;
                let arc = Arc {
                    other: y,
                    forward: !back.forward,
                };
                if self.revise(domains, x, arc) {
                    if domains[x].is_clear() {
                        return false;
                    }
                    if !queued[x] {
                        queued[x] = true;
                        queue.push_back(x);
                    }
                }
            }
        }
        true
    }

    fn initial(&self) -> Option<Vec<FixedBitSet>> {
        let mut domains = self.domains.clone();
        for (v, &l) in self.looped.iter().enumerate() {
            if l {
                domains[v].intersect_with(&self.target.loops);
            }
        }
        let all = 0..domains.len();
        self.propagate(&mut domains, all).then_some(domains)
    }

    /// Candidate sets after arc consistency, or `None` if some set empties.
    pub fn arc_consistent_domains(&self) -> Option<Vec<Vec<usize>>> {
        self.initial()
            .map(|ds| ds.iter().map(|d| d.ones().collect()).collect())
    }

    fn assign(&self, domains: &[FixedBitSet], v: usize, a: usize) -> Option<Vec<FixedBitSet>> {
        let mut next = domains.to_vec();
        next[v].clear();
        next[v].insert(a);
        self.propagate(&mut next, [v]).then_some(next)
    }

    fn first_unfixed(domains: &[FixedBitSet], from: usize) -> Option<usize> {
        (from..domains.len()).find(|&v| domains[v].count_ones(..) > 1)
    }

    fn read(domains: &[FixedBitSet]) -> Vec<usize> {
        domains.iter().map(|d| d.ones().next().expect("non-empty")).collect()
    }

    /// Enumerates homomorphisms in lexicographic order, stopping after `limit`.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut stats = Stats {
            nodes: 0,
            limit: self.node_limit,
        };
        if let Some(domains) = self.initial() {
            self.enumerate_from(domains, 0, limit, &mut out, &mut stats)?;
        }
        Ok(out)
    }

    fn enumerate_from(
        &self,
        domains: Vec<FixedBitSet>,
        from: usize,
        limit: usize,
        out: &mut Vec<Vec<usize>>,
        stats: &mut Stats,
    ) -> Result<()> {
        stats.tick()?;
        let Some(v) = Self::first_unfixed(&domains, from) else {
            out.push(Self::read(&domains));
            return Ok(());
        };
        for a in domains[v].ones() {
            if out.len() >= limit {
                break;
            }
            if let Some(next) = self.assign(&domains, v, a) {
                self.enumerate_from(next, v + 1, limit, out, stats)?;
            }
        }
        Ok(())
    }

    pub fn first(&self) -> Result<Option<Vec<usize>>> {
        Ok(self.enumerate(1)?.pop())
    }

    pub fn exists(&self) -> Result<bool> {
        Ok(self.first()?.is_some())
    }

    /// Minimum of `Σ_v costs[v][h(v)]` over homomorphisms `h`; `None` entries cost nothing.
    pub fn min_cost(&self, costs: &[Option<Vec<ExtValue>>]) -> Result<Option<(ExtValue, Vec<usize>)>> {
        let scaled = ScaledCosts::new(costs, self.target.len())?;
        let mut domains = match self.initial() {
            Some(d) => d,
            None => return Ok(None),
        };
        for (v, row) in scaled.rows.iter().enumerate() {
            if let Some(row) = row {
                let before = domains[v].count_ones(..);
                let finite: Vec<usize> = domains[v].ones().filter(|&a| row[a].is_some()).collect();
                if finite.len() != before {
                    domains[v].clear();
                    domains[v].extend(finite);
                    if !self.propagate(&mut domains, [v]) {
                        return Ok(None);
                    }
                }
            }
        }
        let mut best: Option<(i128, Vec<usize>)> = None;
        let mut stats = Stats {
            nodes: 0,
            limit: self.node_limit,
        };
        self.branch_and_bound(domains, 0, &scaled, &mut best, &mut stats)?;
        Ok(best.map(|(v, h)| (scaled.unscale(v), h)))
    }

    fn branch_and_bound(
        &self,
        domains: Vec<FixedBitSet>,
        from: usize,
        costs: &ScaledCosts,
        best: &mut Option<(i128, Vec<usize>)>,
        stats: &mut Stats,
    ) -> Result<()> {
        stats.tick()?;
        let bound = costs.lower_bound(&domains);
        if matches!(best, Some((b, _)) if bound >= *b) {
            return Ok(());
        }
        let Some(v) = Self::first_unfixed(&domains, from) else {
            *best = Some((bound, Self::read(&domains)));
            return Ok(());
        };
        let values: Vec<usize> = domains[v].ones().collect();
        for a in values {
            if let Some(next) = self.assign(&domains, v, a) {
                self.branch_and_bound(next, v + 1, costs, best, stats)?;
            }
        }
        Ok(())
    }
}

/// Unary costs scaled by a common denominator into `i128`, `None` for `∞`.
struct ScaledCosts {
    rows: Vec<Option<Vec<Option<i128>>>>,
    denominator: BigInt,
}

impl ScaledCosts {
    fn new(costs: &[Option<Vec<ExtValue>>], width: usize) -> Result<Self> {
        let denominator = lcm_denominators(costs.iter().flatten().flatten());
        let scale = BigRational::from_integer(denominator.clone());
        // Bound entries so that no sum over all rows overflows.
        let bound = i128::MAX / (costs.len() as i128 + 1);
        let rows = costs
            .iter()
            .map(|row| {
                row.as_ref()
                    .map(|r| {
                        if r.len() != width {
                            return Err(Error::ArityMismatch {
                                expected: width,
                                found: r.len(),
                            });
                        }
                        r.iter()
                            .map(|v| match v {
                                ExtValue::Infinite => Ok(None),
                                ExtValue::Finite(x) => (x * &scale)
                                    .to_integer()
                                    .to_i128()
                                    .filter(|c| c.unsigned_abs() <= bound.unsigned_abs())
                                    .map(Some)
                                    .ok_or_else(|| {
                                        Error::BudgetExceeded("cost exceeds 128-bit range".into())
                                    }),
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScaledCosts { rows, denominator })
    }

    fn lower_bound(&self, domains: &[FixedBitSet]) -> i128 {
        let mut total = 0;
        for (row, d) in self.rows.iter().zip(domains) {
            if let Some(row) = row {
                total += d.ones().filter_map(|a| row[a]).min().unwrap_or(0);
            }
        }
        total
    }

    fn unscale(&self, v: i128) -> ExtValue {
        let mut r = BigRational::from_integer(BigInt::from(v));
        if !self.denominator.is_zero() {
            r /= BigRational::from_integer(self.denominator.clone());
        }
        ExtValue::Finite(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::all_tuples;
    use proptest::prelude::*;

    fn zigzag() -> Vec<(usize, usize)> {
        vec![(0, 1), (2, 1), (2, 3)]
    }

    #[test]
    fn zigzag_endomorphisms_counted_by_hand() {
        let t = Target::new(4, zigzag());
        let homs = HomSearch::new(&t, 4, zigzag()).enumerate(usize::MAX).unwrap();
        assert_eq!(homs.len(), 8);
        assert_eq!(homs[0], vec![0, 1, 0, 1]);
        assert!(homs.contains(&vec![0, 1, 2, 3]));
    }

    #[test]
    fn single_edge_has_one_endomorphism() {
        let t = Target::new(2, [(0, 1)]);
        assert_eq!(HomSearch::new(&t, 2, [(0, 1)]).enumerate(10).unwrap(), vec![vec![0, 1]]);
    }

    #[test]
    fn triangle_into_path_fails() {
        let t = Target::new(3, [(0, 1), (1, 2)]);
        let s = HomSearch::new(&t, 3, [(0, 1), (1, 2), (2, 0)]);
        assert!(!s.exists().unwrap());
        assert!(s.min_cost(&[None, None, None]).unwrap().is_none());
    }

    #[test]
    fn self_loops_need_target_loops() {
        let t = Target::new(2, [(0, 1)]);
        assert!(!HomSearch::new(&t, 1, [(0, 0)]).exists().unwrap());
        let t = Target::new(2, [(0, 1), (1, 1)]);
        assert_eq!(HomSearch::new(&t, 1, [(0, 0)]).first().unwrap(), Some(vec![1]));
    }

    #[test]
    fn min_cost_prefers_cheap_edges() {
        let t = Target::new(4, [(0, 1), (2, 3)]);
        let s = HomSearch::new(&t, 2, [(0, 1)]);
        let costs = vec![
            Some(vec![ExtValue::int(5), ExtValue::zero(), ExtValue::ratio(1, 2), ExtValue::zero()]),
            Some(vec![ExtValue::zero(), ExtValue::zero(), ExtValue::zero(), ExtValue::ratio(1, 3)]),
        ];
        let (v, h) = s.min_cost(&costs).unwrap().unwrap();
        assert_eq!(v, ExtValue::ratio(5, 6));
        assert_eq!(h, vec![2, 3]);
    }

    #[test]
    fn node_limit_is_enforced() {
        let t = Target::new(4, zigzag());
        let s = HomSearch::new(&t, 4, zigzag()).with_node_limit(2);
        assert!(matches!(s.enumerate(usize::MAX), Err(Error::BudgetExceeded(_))));
    }

    fn naive_homs(n: usize, source: &[(usize, usize)], tn: usize, target: &[(usize, usize)]) -> Vec<Vec<usize>> {
        all_tuples(tn, n)
            .filter(|h| source.iter().all(|&(a, b)| target.contains(&(h[a], h[b]))))
            .collect()
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1..=max_n).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..6)))
    }

    proptest! {
        #[test]
        fn enumeration_matches_naive((n, s) in arb_graph(4), (tn, t) in arb_graph(4)) {
            let mut t = t;
            t.sort();
            t.dedup();
            let target = Target::new(tn, t.iter().copied());
            let got = HomSearch::new(&target, n, s.iter().copied()).enumerate(usize::MAX).unwrap();
            prop_assert_eq!(got, naive_homs(n, &s, tn, &t));
        }

        #[test]
        fn min_cost_matches_naive(
            (n, s) in arb_graph(4),
            (tn, t) in arb_graph(4),
            raw in prop::collection::vec(prop::option::of(0i64..6), 16),
        ) {
            let mut t = t;
            t.sort();
            t.dedup();
            let target = Target::new(tn, t.iter().copied());
            let costs: Vec<Option<Vec<ExtValue>>> = (0..n)
                .map(|v| Some((0..tn).map(|a| raw[v * 4 + a].map_or(ExtValue::Infinite, ExtValue::int)).collect()))
                .collect();
            let naive = naive_homs(n, &s, tn, &t)
                .into_iter()
                .map(|h| {
                    let c: ExtValue = h.iter().enumerate().map(|(v, &a)| costs[v].as_ref().unwrap()[a].clone()).sum();
                    (c, h)
                })
                .filter(|(c, _)| c.is_finite())
                .min();
            let got = HomSearch::new(&target, n, s.iter().copied()).min_cost(&costs).unwrap();
            prop_assert_eq!(got, naive);
        }
    }
}
