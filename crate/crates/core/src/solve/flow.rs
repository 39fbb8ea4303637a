//! Edmonds–Karp maximum flow with exact rational capacities.

use std::collections::VecDeque;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::value::ExtValue;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    /// `None` is an infinite capacity.
    cap: Option<BigRational>,
    flow: BigRational,
}

impl Edge {
    fn residual(&self) -> Option<BigRational> {
        self.cap.as_ref().map(|c| c - &self.flow)
    }

    fn has_residual(&self) -> bool {
        self.residual().is_none_or(|r| r.is_positive())
    }
}

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds an arc and its zero-capacity reverse. Zero capacities are dropped.
    pub fn add_edge(&mut self, from: usize, to: usize, capacity: &ExtValue) {
        if capacity.is_zero() {
            return;
        }
        let cap = capacity.finite().cloned();
        self.adjacency[from].push(self.edges.len());
        self.edges.push(Edge {
            to,
            cap,
            flow: BigRational::zero(),
        });
        self.adjacency[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: Some(BigRational::zero()),
            flow: BigRational::zero(),
        });
    }

    /// Maximum flow value; `∞` as soon as an augmenting path of infinite capacity exists.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> ExtValue {
        let mut total = BigRational::zero();
        loop {
            let Some(path) = self.shortest_augmenting_path(source, sink) else {
                return ExtValue::Finite(total);
            };
            let bottleneck = path
                .iter()
                .filter_map(|&e| self.edges[e].residual())
                .min();
            let Some(delta) = bottleneck else {
                return ExtValue::Infinite;
            };
            for &e in &path {
                self.edges[e].flow += &delta;
                self.edges[e ^ 1].flow -= &delta;
            }
            total += delta;
        }
    }

    fn shortest_augmenting_path(&self, source: usize, sink: usize) -> Option<Vec<usize>> {
        let mut via = vec![None; self.node_count()];
        let mut seen = vec![false; self.node_count()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adjacency[u] {
                let edge = &self.edges[e];
                if !seen[edge.to] && edge.has_residual() {
                    seen[edge.to] = true;
                    via[edge.to] = Some(e);
                    if edge.to == sink {
                        let mut path = Vec::new();
                        let mut v = sink;
                        while let Some(e) = via[v] {
                            path.push(e);
                            v = self.edges[e ^ 1].to;
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(edge.to);
                }
            }
        }
        None
    }

    /// Nodes reachable from `source` in the residual graph.
    pub fn source_side(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &e in &self.adjacency[u] {
                let edge = &self.edges[e];
                if !seen[edge.to] && edge.has_residual() {
                    seen[edge.to] = true;
                    stack.push(edge.to);
                }
            }
        }
        seen
    }
}
