//! Leveled digraphs, the oriented paths `Q_S`, and the digraph `𝔻_Γ` with its unary cost `μ_Γ`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::combine::{combine_language, CombinedLanguage};
use crate::dual::tuple_label;
use crate::error::{Error, Result};
use crate::hom::Target;
use crate::model::{CostFunction, Domain, Language};
use crate::value::ExtValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Base,
    Tuple,
    Internal,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Base => "base",
            Role::Tuple => "tuple",
            Role::Internal => "internal",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Role::Base),
            "tuple" => Ok(Role::Tuple),
            "internal" => Ok(Role::Internal),
            _ => Err(Error::Semantic(format!("unknown role `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub role: Role,
    /// Level as declared when the vertex was added.
    pub level: usize,
    pub label: Option<String>,
    pub cost: Option<ExtValue>,
}

/// A digraph without self-loops or parallel edges whose vertices carry roles and levels.
#[derive(Clone, Debug, Default)]
pub struct LeveledDigraph {
    name: String,
    vertices: Vec<Vertex>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl PartialEq for LeveledDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.vertices == other.vertices && self.edges == other.edges
    }
}

/// Outcome of level assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Balance {
    /// Per-vertex levels, normalised to start at 0 in each weakly connected component.
    Balanced(Vec<usize>),
    Unbalanced,
}

impl Balance {
    pub fn levels(&self) -> Option<&[usize]> {
        match self {
            Balance::Balanced(l) => Some(l),
            Balance::Unbalanced => None,
        }
    }
}

/// Levels of an abstract digraph on `0..n`, normalised per weak component.
///
/// Self-loops and oriented cycles of non-zero net length make it unbalanced.
pub fn levels_of(n: usize, edges: &[(usize, usize)]) -> Balance {
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push((b, 1));
        adj[b].push((a, -1));
    }
    let mut level: Vec<Option<i64>> = vec![None; n];
    for start in 0..n {
        if level[start].is_some() {
            continue;
        }
        level[start] = Some(0);
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let lv = level[v].expect("visited");
            for &(w, step) in &adj[v] {
                match level[w] {
                    None => {
                        level[w] = Some(lv + step);
                        members.push(w);
                        queue.push_back(w);
                    }
                    Some(lw) if lw != lv + step => return Balance::Unbalanced,
                    Some(_) => {}
                }
            }
        }
        let min = members.iter().map(|&v| level[v].expect("visited")).min().unwrap_or(0);
        for &v in &members {
            level[v] = Some(level[v].expect("visited") - min);
        }
    }
    Balance::Balanced(level.into_iter().map(|l| l.expect("all visited") as usize).collect())
}

/// Weakly connected components of an abstract digraph on `0..n`, each sorted,
/// ordered by smallest member.
pub fn components_of(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n);
    for &(a, b) in edges {
        uf.union(a, b);
    }
    let mut groups: HashMap<usize, usize> = HashMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        let g = *groups.entry(r).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[g].push(v);
    }
    out
}

impl LeveledDigraph {
    pub fn new(name: impl Into<String>) -> Self {
        LeveledDigraph {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_vertex(&mut self, vertex: Vertex) -> Result<usize> {
        if vertex.id.is_empty() || vertex.id.chars().any(|c| c.is_whitespace() || c == '#') {
            return Err(Error::Semantic(format!("invalid vertex id `{}`", vertex.id)));
        }
        if self.index.contains_key(&vertex.id) {
            return Err(Error::DuplicateName(vertex.id));
        }
        let i = self.vertices.len();
        self.index.insert(vertex.id.clone(), i);
        self.vertices.push(vertex);
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        Ok(i)
    }

    /// Adds a vertex with no label and no cost.
    pub fn add(&mut self, id: impl Into<String>, role: Role, level: usize) -> Result<usize> {
        self.add_vertex(Vertex {
            id: id.into(),
            role,
            level,
            label: None,
            cost: None,
        })
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.vertices.len();
        if a >= n || b >= n {
            return Err(Error::IndexOutOfRange {
                index: a.max(b),
                max: n.saturating_sub(1),
            });
        }
        if a == b {
            return Err(Error::Semantic(format!("self-loop on `{}`", self.vertices[a].id)));
        }
        if !self.edge_set.insert((a, b)) {
            return Err(Error::Semantic(format!(
                "parallel edge `{}` -> `{}`",
                self.vertices[a].id, self.vertices[b].id
            )));
        }
        self.edges.push((a, b));
        self.out_adj[a].push(b);
        self.in_adj[b].push(a);
        Ok(())
    }

    pub fn add_edge_by_id(&mut self, a: &str, b: &str) -> Result<()> {
        let (a, b) = (self.index_of(a)?, self.index_of(b)?);
        self.add_edge(a, b)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn vertex_mut(&mut self, i: usize) -> &mut Vertex {
        &mut self.vertices[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(id.to_string()))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_set.contains(&(a, b))
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn levels(&self) -> Balance {
        levels_of(self.vertices.len(), &self.edges)
    }

    /// Largest level, or `None` when unbalanced or empty.
    pub fn height(&self) -> Option<usize> {
        self.levels().levels().and_then(|l| l.iter().copied().max())
    }

    /// Vertex index sets of the weak components.
    pub fn component_indices(&self) -> Vec<Vec<usize>> {
        components_of(self.vertices.len(), &self.edges)
    }

    pub fn components(&self) -> Vec<LeveledDigraph> {
        self.component_indices()
            .iter()
            .enumerate()
            .map(|(i, c)| self.induced(format!("{}_{}", self.name, i + 1), c))
            .collect()
    }

    /// Subgraph induced by `vertices`, in the given order.
    pub fn induced(&self, name: impl Into<String>, vertices: &[usize]) -> LeveledDigraph {
        let mut g = LeveledDigraph::new(name);
        let mut map = HashMap::new();
        for &v in vertices {
            let i = g.add_vertex(self.vertices[v].clone()).expect("ids unique in parent");
            map.insert(v, i);
        }
        for &(a, b) in &self.edges {
            if let (Some(&x), Some(&y)) = (map.get(&a), map.get(&b)) {
                g.add_edge(x, y).expect("edges unique in parent");
            }
        }
        g
    }

    /// Bitset adjacency for homomorphism search into this graph.
    pub fn target(&self) -> Target {
        Target::new(self.vertices.len(), self.edges.iter().copied())
    }

    /// Unary cost table read from the vertices' `cost` fields, missing costs being 0.
    pub fn cost_table(&self) -> Vec<ExtValue> {
        self.vertices
            .iter()
            .map(|v| v.cost.clone().unwrap_or_else(ExtValue::zero))
            .collect()
    }
}

/// The oriented path `Q_S` of height `m + 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedPathSpec {
    m: usize,
    s: BTreeSet<usize>,
    forward: Vec<bool>,
    levels: Vec<usize>,
}

/// Leading edge, one segment per coordinate (an edge for `i ∈ S`, else a
/// zigzag), trailing edge. `S` is 1-based.
pub fn build_q_s(m: usize, s: &[usize]) -> Result<OrientedPathSpec> {
    let set: BTreeSet<usize> = s.iter().copied().collect();
    if let Some(&bad) = set.iter().find(|&&i| i == 0 || i > m) {
        return Err(Error::IndexOutOfRange { index: bad, max: m });
    }
    let mut forward = vec![true];
    for i in 1..=m {
        if set.contains(&i) {
            forward.push(true);
        } else {
            forward.extend([true, false, true]);
        }
    }
    forward.push(true);
    let mut levels = vec![0usize];
    for &f in &forward {
        let last = *levels.last().expect("non-empty");
        levels.push(if f { last + 1 } else { last - 1 });
    }
    Ok(OrientedPathSpec {
        m,
        s: set,
        forward,
        levels,
    })
}

impl OrientedPathSpec {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> &BTreeSet<usize> {
        &self.s
    }

    pub fn edge_count(&self) -> usize {
        self.forward.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.levels.len()
    }

    pub fn height(&self) -> usize {
        *self.levels.last().expect("non-empty")
    }

    /// Direction of each edge along the path: true for `p_i → p_{i+1}`.
    pub fn directions(&self) -> &[bool] {
        &self.forward
    }

    /// Level of each path vertex, starting at 0.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Oriented edges `(tail, head)` between path positions.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.forward
            .iter()
            .enumerate()
            .map(|(i, &f)| if f { (i, i + 1) } else { (i + 1, i) })
            .collect()
    }

    pub fn to_digraph(&self) -> LeveledDigraph {
        let mut g = LeveledDigraph::new("q_s");
        let last = self.vertex_count() - 1;
        for (i, &l) in self.levels.iter().enumerate() {
            let role = match i {
                0 => Role::Base,
                _ if i == last => Role::Tuple,
                _ => Role::Internal,
            };
            g.add(format!("p{i}"), role, l).expect("fresh ids");
        }
        for (a, b) in self.edges() {
            g.add_edge(a, b).expect("path edges are simple");
        }
        g
    }
}

/// One `Q_{S(d,x)}` inside `𝔻_Γ`.
#[derive(Clone, Debug)]
pub struct PathInfo {
    pub base: usize,
    pub tuple: usize,
    pub spec: OrientedPathSpec,
    /// Vertex indices along the path, base first and tuple vertex last.
    pub vertices: Vec<usize>,
}

/// `Γ_e`: the digraph `𝔻_Γ` and the unary cost `μ_Γ` over its vertices.
#[derive(Clone, Debug)]
pub struct ExtDualLanguage {
    combined: CombinedLanguage,
    tuples: Vec<Vec<usize>>,
    digraph: LeveledDigraph,
    target: Target,
    mu: CostFunction,
    base: Vec<usize>,
    tuple_vertex: Vec<usize>,
    paths: Vec<PathInfo>,
    position: Vec<Option<(usize, usize)>>,
}

pub const DGAMMA: &str = "dgamma";
pub const MU: &str = "mu";

pub fn build_d_gamma_for(gamma: &Language) -> Result<ExtDualLanguage> {
    build_d_gamma(&combine_language(gamma)?)
}

pub fn build_d_gamma(c: &CombinedLanguage) -> Result<ExtDualLanguage> {
    let phi = c.phi_gamma();
    let domain = phi.domain();
    let m = phi.arity();
    let tuples = phi.feasible_tuples();
    if tuples.is_empty() {
        return Err(Error::EmptyFeas);
    }
    let top = m + 2;
    let mut g = LeveledDigraph::new(format!("D_{}", phi.name()));
    let mut base = Vec::with_capacity(domain.size());
    for d in 0..domain.size() {
        base.push(g.add_vertex(Vertex {
            id: domain.label(d).to_string(),
            role: Role::Base,
            level: 0,
            label: Some(domain.label(d).to_string()),
            cost: None,
        })?);
    }
    let mut tuple_vertex = Vec::with_capacity(tuples.len());
    for t in &tuples {
        let label = tuple_label(domain, t);
        tuple_vertex.push(g.add_vertex(Vertex {
            id: label.clone(),
            role: Role::Tuple,
            level: top,
            label: Some(label),
            cost: Some(phi.value(t).clone()),
        })?);
    }
    let mut paths = Vec::with_capacity(domain.size() * tuples.len());
    for d in 0..domain.size() {
        for (ti, t) in tuples.iter().enumerate() {
            let s: Vec<usize> = (1..=m).filter(|&i| t[i - 1] == d).collect();
            let spec = build_q_s(m, &s)?;
            let last = spec.vertex_count() - 1;
            let mut vs = Vec::with_capacity(spec.vertex_count());
            vs.push(base[d]);
            for pos in 1..last {
                vs.push(g.add(
                    format!("{}~{}~{}", domain.label(d), tuple_label(domain, t), pos),
                    Role::Internal,
                    spec.levels()[pos],
                )?);
            }
            vs.push(tuple_vertex[ti]);
            for (a, b) in spec.edges() {
                g.add_edge(vs[a], vs[b])?;
            }
            paths.push(PathInfo {
                base: d,
                tuple: ti,
                spec,
                vertices: vs,
            });
        }
    }
    let mut position = vec![None; g.vertex_count()];
    for (pi, p) in paths.iter().enumerate() {
        for (pos, &v) in p.vertices.iter().enumerate() {
            if g.vertex(v).role == Role::Internal {
                position[v] = Some((pi, pos));
            }
        }
    }
    let vdomain = Domain::new(g.vertices().iter().map(|v| v.id.clone()))?;
    let costs = g.cost_table();
    let mu = CostFunction::new(MU, vdomain, 1, costs)?;
    let target = g.target();
    Ok(ExtDualLanguage {
        combined: c.clone(),
        tuples,
        digraph: g,
        target,
        mu,
        base,
        tuple_vertex,
        paths,
        position,
    })
}

/// `(3n+1)|D′||D| + (1−2n)|D′| + |D|`.
pub fn expected_vertex_count(n: usize, d: usize, d_prime: usize) -> i64 {
    let (n, d, dp) = (n as i64, d as i64, d_prime as i64);
    (3 * n + 1) * dp * d + (1 - 2 * n) * dp + d
}

/// `(3n+2)|D′||D| − 2n|D′|`.
pub fn expected_edge_count(n: usize, d: usize, d_prime: usize) -> i64 {
    let (n, d, dp) = (n as i64, d as i64, d_prime as i64);
    (3 * n + 2) * dp * d - 2 * n * dp
}

impl ExtDualLanguage {
    pub fn combined(&self) -> &CombinedLanguage {
        &self.combined
    }

    pub fn digraph(&self) -> &LeveledDigraph {
        &self.digraph
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn mu(&self) -> &CostFunction {
        &self.mu
    }

    /// Vertex labels of `𝔻_Γ`, the domain of `Γ_e`.
    pub fn vertex_domain(&self) -> &Domain {
        self.mu.domain()
    }

    pub fn arity(&self) -> usize {
        self.combined.arity()
    }

    pub fn height(&self) -> usize {
        self.arity() + 2
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn base_vertex(&self, d: usize) -> usize {
        self.base[d]
    }

    pub fn base_vertices(&self) -> &[usize] {
        &self.base
    }

    pub fn tuple_vertex(&self, t: usize) -> usize {
        self.tuple_vertex[t]
    }

    pub fn tuple_vertices(&self) -> &[usize] {
        &self.tuple_vertex
    }

    pub fn paths(&self) -> &[PathInfo] {
        &self.paths
    }

    /// The path from base `d` to tuple `t`.
    pub fn path(&self, d: usize, t: usize) -> &PathInfo {
        &self.paths[d * self.tuples.len() + t]
    }

    /// `(path index, position)` of an internal vertex.
    pub fn position(&self, v: usize) -> Option<(usize, usize)> {
        self.position[v]
    }

    /// Which base label a vertex stands for, if it is a base vertex.
    pub fn base_label(&self, v: usize) -> Option<usize> {
        self.base.iter().position(|&b| b == v)
    }

    /// Which tuple a vertex stands for, if it is a tuple vertex.
    pub fn tuple_of(&self, v: usize) -> Option<usize> {
        self.tuple_vertex.iter().position(|&b| b == v)
    }

    /// Level of each vertex (the declared levels, which are exact for `𝔻_Γ`).
    pub fn level(&self, v: usize) -> usize {
        self.digraph.vertex(v).level
    }

    /// `{𝔻_Γ, μ_Γ}` as a language over the vertex domain.
    pub fn language(&self) -> Language {
        let n = self.digraph.vertex_count();
        let mut table = vec![ExtValue::Infinite; n * n];
        for &(a, b) in self.digraph.edges() {
            table[a * n + b] = ExtValue::zero();
        }
        let rel = CostFunction::new(DGAMMA, self.vertex_domain().clone(), 2, table).expect("sized");
        Language::new("gamma_e", self.vertex_domain().clone(), vec![rel, self.mu.clone()]).expect("valid")
    }

    /// `Feas(φ_Γ)` crisp, as a language, for comparisons with `𝔻_Γ`'s endomorphisms.
    pub fn feas_language(&self) -> Language {
        let f = self.combined.phi_gamma().feas();
        Language::new("feas", f.domain().clone(), vec![f]).expect("non-empty feas")
    }
}
