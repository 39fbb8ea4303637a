//! Extended dual instances over `{𝔻_Γ, μ_Γ}` and the reduction back to the
//! dual language.

use std::collections::{BTreeSet, HashMap, HashSet};

use petgraph::unionfind::UnionFind;

use crate::digraph::{
    build_q_s, components_of, levels_of, Balance, ExtDualLanguage, LeveledDigraph, OrientedPathSpec, Role,
    DGAMMA, MU,
};
use crate::dual::{match_name, DualLanguage, PHI_PRIME};
use crate::error::{Error, Result};
use crate::hom::{HomSearch, Target};
use crate::model::{Assignment, CostFunction, Domain, Instance, Language};
use crate::solve::{min_cost_hom, mincut_solve, MinCut, Solution};
use crate::value::ExtValue;

/// `I_e` with the bookkeeping needed to move assignments across.
#[derive(Clone, Debug)]
pub struct ExtDualInstance {
    pub instance: Instance,
    pub num_source_variables: usize,
    /// Variable of `x′_i` for each source constraint.
    pub tops: Vec<usize>,
    /// `paths[i][j]`: variables along the copy of `Q_{{j+1}}` for constraint `i`.
    pub paths: Vec<Vec<Vec<usize>>>,
}

/// Builds `I_e` from an instance over `{φ_Γ}`.
pub fn extdual_instance(ext: &ExtDualLanguage, inst: &Instance) -> Result<ExtDualInstance> {
    let phi = ext.combined().phi_gamma();
    let m = phi.arity();
    for c in inst.constraints() {
        if c.function != phi.name() {
            return Err(Error::WrongLanguage(format!(
                "constraint uses `{}`, expected `{}`",
                c.function,
                phi.name()
            )));
        }
        if c.scope.len() != m {
            return Err(Error::ArityMismatch {
                expected: m,
                found: c.scope.len(),
            });
        }
    }
    let q = inst.constraints().len();
    let mut out = Instance::new(format!("{}_ext", inst.name()), inst.variables().iter().cloned())?;
    let tops = (0..q)
        .map(|i| out.add_variable(format!("x'{}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    let specs = (1..=m).map(|j| build_q_s(m, &[j])).collect::<Result<Vec<_>>>()?;
    let mut paths = Vec::with_capacity(q);
    for (i, c) in inst.constraints().iter().enumerate() {
        let mut per = Vec::with_capacity(m);
        for (j, spec) in specs.iter().enumerate() {
            let last = spec.vertex_count() - 1;
            let mut vs = vec![c.scope[j]];
            for pos in 1..last {
                vs.push(out.add_variable(format!("_q{}_{}_{}", i + 1, j + 1, pos))?);
            }
            vs.push(tops[i]);
            for (a, b) in spec.edges() {
                out.add_constraint(DGAMMA, vec![vs[a], vs[b]])?;
            }
            per.push(vs);
        }
        paths.push(per);
    }
    for &t in &tops {
        out.add_constraint(MU, vec![t])?;
    }
    Ok(ExtDualInstance {
        instance: out,
        num_source_variables: inst.num_variables(),
        tops,
        paths,
    })
}

impl ExtDualInstance {
    /// Reads source labels off the base vertices; other vertices read as label 0.
    pub fn decode(&self, ext: &ExtDualLanguage, assignment: &Assignment) -> Assignment {
        Assignment(
            assignment.0[..self.num_source_variables]
                .iter()
                .map(|&v| ext.base_label(v).unwrap_or(0))
                .collect(),
        )
    }

    /// Lifts a source assignment; `None` when some constraint is infeasible.
    pub fn encode(&self, ext: &ExtDualLanguage, source: &Instance, assignment: &Assignment) -> Option<Assignment> {
        let mut out = vec![0; self.instance.num_variables()];
        for (v, &d) in assignment.0.iter().enumerate() {
            out[v] = ext.base_vertex(d);
        }
        for (i, c) in source.constraints().iter().enumerate() {
            let tuple: Vec<usize> = c.scope.iter().map(|&v| assignment.0[v]).collect();
            let ti = ext.tuples().iter().position(|t| *t == tuple)?;
            out[self.tops[i]] = ext.tuple_vertex(ti);
            for (j, vs) in self.paths[i].iter().enumerate() {
                let target = ext.path(tuple[j], ti);
                let source_spec = build_q_s(ext.arity(), &[j + 1]).ok()?;
                let fold = fold_positions(&source_spec, &target.spec)?;
                for (pos, &v) in vs.iter().enumerate() {
                    out[v] = target.vertices[fold[pos]];
                }
            }
        }
        Some(Assignment(out))
    }

    /// Provenance sidecar: one `top` line per constraint and one `path` line per copy.
    pub fn map_lines(&self) -> String {
        let names = self.instance.variables();
        let mut s = String::new();
        for (i, &t) in self.tops.iter().enumerate() {
            s.push_str(&format!("top {} = constraint {}\n", names[t], i + 1));
        }
        for (i, per) in self.paths.iter().enumerate() {
            for (j, vs) in per.iter().enumerate() {
                let list: Vec<&str> = vs.iter().map(|&v| names[v].as_str()).collect();
                s.push_str(&format!("path {} {} : {}\n", i + 1, j + 1, list.join(" ")));
            }
        }
        s
    }
}

/// Positions of a homomorphism `Q_S → Q_T` fixing both ends, for `S ⊆ T`:
/// zigzags fold onto edges where `T` has an edge.
pub fn fold_positions(from: &OrientedPathSpec, to: &OrientedPathSpec) -> Option<Vec<usize>> {
    if from.m() != to.m() || !from.s().is_subset(to.s()) {
        return None;
    }
    let mut out = vec![0, 1];
    let mut dp = 1;
    for i in 1..=from.m() {
        match (from.s().contains(&i), to.s().contains(&i)) {
            (true, true) => {
                out.push(dp + 1);
                dp += 1;
            }
            (false, false) => {
                out.extend([dp + 1, dp + 2, dp + 3]);
                dp += 3;
            }
            (false, true) => {
                out.extend([dp + 1, dp, dp + 1]);
                dp += 1;
            }
            (true, false) => unreachable!("S ⊆ T"),
        }
    }
    out.push(dp + 1);
    Some(out)
}

/// Binary scopes of `inst` as a digraph on its variables: deduplicated
/// edges, and whether some scope repeats a variable.
fn scope_edges(inst: &Instance) -> (Vec<(usize, usize)>, bool) {
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut looped = false;
    for c in inst.constraints() {
        if c.function == DGAMMA {
            let (a, b) = (c.scope[0], c.scope[1]);
            if a == b {
                looped = true;
            } else if seen.insert((a, b)) {
                edges.push((a, b));
            }
        }
    }
    (edges, looped)
}

fn check_ext_instance(inst: &Instance) -> Result<()> {
    for c in inst.constraints() {
        let expected = match c.function.as_str() {
            DGAMMA => 2,
            MU => 1,
            other => {
                return Err(Error::WrongLanguage(format!(
                    "constraint uses `{other}`, expected `{DGAMMA}` or `{MU}`"
                )))
            }
        };
        if c.scope.len() != expected {
            return Err(Error::ArityMismatch {
                expected,
                found: c.scope.len(),
            });
        }
    }
    Ok(())
}

fn mu_counts(inst: &Instance) -> Vec<usize> {
    let mut counts = vec![0; inst.num_variables()];
    for c in inst.constraints() {
        if c.function == MU {
            counts[c.scope[0]] += 1;
        }
    }
    counts
}

/// Optimum of an instance over `{𝔻_Γ, μ_Γ}` as a minimum-cost homomorphism
/// into `𝔻_Γ`. The assignment maps variables to vertex indices.
pub fn ext_optimum(ext: &ExtDualLanguage, inst: &Instance) -> Result<Solution> {
    check_ext_instance(inst)?;
    let (edges, looped) = scope_edges(inst);
    if looped {
        return Ok(Solution::Infeasible);
    }
    let mut source = LeveledDigraph::new("scopes");
    for v in inst.variables() {
        source.add(v.clone(), Role::Internal, 0)?;
    }
    for &(a, b) in &edges {
        source.add_edge(a, b)?;
    }
    let table = ext.digraph().cost_table();
    let costs: Vec<Vec<ExtValue>> = mu_counts(inst)
        .iter()
        .map(|&k| table.iter().map(|c| c.times(k)).collect())
        .collect();
    min_cost_hom(&source, ext.digraph(), &costs)
}

/// Whether `c` maps into `q` sending each vertex to one of the same level.
pub fn level_hom_exists(c: &LeveledDigraph, q: &OrientedPathSpec) -> Result<bool> {
    Ok(level_hom(c, q)?.is_some())
}

/// The lexicographically first level-respecting homomorphism, as path positions.
fn level_hom(c: &LeveledDigraph, q: &OrientedPathSpec) -> Result<Option<Vec<usize>>> {
    let target = Target::new(q.vertex_count(), q.edges());
    let mut search = HomSearch::new(&target, c.vertex_count(), c.edges().iter().copied());
    for (v, vertex) in c.vertices().iter().enumerate() {
        let allowed: Vec<usize> = (0..q.vertex_count())
            .filter(|&p| q.levels()[p] == vertex.level)
            .collect();
        search.restrict(v, allowed);
    }
    search.first()
}

/// The least `S₀ ⊆ {1..m}` with `c` mapping into `Q_{S₀}`.
///
/// `c` carries its levels in the scope digraph; anchor vertices at levels 0
/// and `m + 2` pin it to the ends of the path.
pub fn compute_s0(c: &LeveledDigraph, m: usize) -> Result<BTreeSet<usize>> {
    let all: Vec<usize> = (1..=m).collect();
    if !level_hom_exists(c, &build_q_s(m, &all)?)? {
        return Err(Error::NotApplicable(format!(
            "component `{}` maps into no Q_S",
            c.name()
        )));
    }
    let mut s0 = BTreeSet::new();
    for i in 1..=m {
        let without: Vec<usize> = all.iter().copied().filter(|&k| k != i).collect();
        if !level_hom_exists(c, &build_q_s(m, &without)?)? {
            s0.insert(i);
        }
    }
    let s0_list: Vec<usize> = s0.iter().copied().collect();
    if !level_hom_exists(c, &build_q_s(m, &s0_list)?)? {
        return Err(Error::NotApplicable(format!(
            "component `{}` has no least set S",
            c.name()
        )));
    }
    Ok(s0)
}

/// A component of the scope digraph minus its top and bottom levels.
#[derive(Clone, Debug)]
pub struct ComponentAnalysis {
    /// Variables of the component.
    pub vertices: Vec<usize>,
    pub s0: BTreeSet<usize>,
    pub tops: Vec<usize>,
    pub bottoms: Vec<usize>,
    /// The component with one anchor per adjacent level, levels as in the scope digraph.
    pub anchored: LeveledDigraph,
    /// Dual variable standing for the path's tuple, if any.
    pub dual_var: Option<usize>,
    /// Linking class of the bottoms, if any.
    pub class: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum ReverseVerdict {
    Infeasible(String),
    /// Every component had height below `m + 2`.
    SolvedDirectly {
        optimum: ExtValue,
        assignment: Assignment,
        fallback: bool,
    },
    DualInstance(Box<ReverseDual>),
}

/// `I′_d` for the full-height components, plus the solved remainder.
#[derive(Clone, Debug)]
pub struct ReverseDual {
    pub instance: Instance,
    /// Optimum of the components solved directly.
    pub offset: ExtValue,
    pub fallback: bool,
    /// Scope-digraph variable of each dual variable; `None` for added ones.
    pub top_vars: Vec<Option<usize>>,
    pub components: Vec<ComponentAnalysis>,
    direct: Vec<Option<usize>>,
    bottoms: Vec<(usize, usize)>,
    class_source: Vec<Option<(usize, usize)>>,
}

impl ReverseDual {
    /// Optimum of the source instance given the optimum of `I′_d`.
    pub fn optimum(&self, dual_optimum: &ExtValue) -> ExtValue {
        dual_optimum + &self.offset
    }

    /// Lifts an assignment of `I′_d` (labels index `dual.tuples()`) to vertex
    /// indices of `𝔻_Γ` for every source variable.
    pub fn decode(&self, ext: &ExtDualLanguage, dual: &DualLanguage, assignment: &Assignment) -> Result<Assignment> {
        let tuple_of = |x: usize| -> Result<usize> {
            let t = &dual.tuples()[assignment.0[x]];
            ext.tuples()
                .iter()
                .position(|u| u == t)
                .ok_or_else(|| Error::UnknownLabel(format!("{t:?}")))
        };
        let mut out = self.direct.clone();
        for (x, top) in self.top_vars.iter().enumerate() {
            if let Some(v) = top {
                out[*v] = Some(ext.tuple_vertex(tuple_of(x)?));
            }
        }
        let mut class_value = Vec::with_capacity(self.class_source.len());
        for src in &self.class_source {
            class_value.push(match src {
                Some((x, k)) => ext.tuples()[tuple_of(*x)?][k - 1],
                None => 0,
            });
        }
        for &(v, class) in &self.bottoms {
            out[v] = Some(ext.base_vertex(class_value[class]));
        }
        for c in &self.components {
            let t = match c.dual_var {
                Some(x) => tuple_of(x)?,
                None => 0,
            };
            let d = match (c.class, c.s0.first()) {
                (Some(class), _) => class_value[class],
                (None, Some(&k)) => ext.tuples()[t][k - 1],
                (None, None) => 0,
            };
            let path = ext.path(d, t);
            let h = level_hom(&c.anchored, &path.spec)?.ok_or_else(|| Error::Mismatch {
                stage: "reverse".into(),
                detail: format!("component `{}` does not map into its path", c.anchored.name()),
            })?;
            for (i, &v) in c.vertices.iter().enumerate() {
                out[v] = Some(path.vertices[h[i]]);
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(v, x)| {
                x.ok_or_else(|| Error::Mismatch {
                    stage: "reverse".into(),
                    detail: format!("variable {v} left unassigned"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }
}

/// Reduces an instance over `{𝔻_Γ, μ_Γ}` component by component: infeasible,
/// solved directly, or collected into an instance over `Γ_d`.
pub fn reverse_reduce(ext: &ExtDualLanguage, dual: &DualLanguage, inst: &Instance) -> Result<ReverseVerdict> {
    check_ext_instance(inst)?;
    let n = inst.num_variables();
    let m = ext.arity();
    let top = m + 2;
    let (edges, looped) = scope_edges(inst);
    if looped {
        return Ok(ReverseVerdict::Infeasible("scope digraph has a loop".into()));
    }
    let levels = match levels_of(n, &edges) {
        Balance::Balanced(l) => l,
        Balance::Unbalanced => {
            return Ok(ReverseVerdict::Infeasible("scope digraph is unbalanced".into()))
        }
    };
    let mu = mu_counts(inst);
    let components = components_of(n, &edges);
    let mut direct = vec![None; n];
    let mut offset = ExtValue::zero();
    let mut fallback = false;
    let mut full = Vec::new();
    for comp in components {
        let height = comp.iter().map(|&v| levels[v]).max().unwrap_or(0);
        if height > top {
            return Ok(ReverseVerdict::Infeasible(format!(
                "component of `{}` has height {height} > {top}",
                inst.variables()[comp[0]]
            )));
        }
        if height == top {
            full.push(comp);
            continue;
        }
        match solve_short(ext, &comp, &edges, &mu)? {
            None => {
                return Ok(ReverseVerdict::Infeasible(format!(
                    "component of `{}` has no homomorphism into the digraph",
                    inst.variables()[comp[0]]
                )))
            }
            Some((value, labels, fell_back)) => {
                offset += value;
                fallback |= fell_back;
                for (&v, l) in comp.iter().zip(labels) {
                    direct[v] = Some(l);
                }
            }
        }
    }
    if full.is_empty() {
        let assignment = Assignment(direct.into_iter().map(|x| x.expect("all solved")).collect());
        return Ok(ReverseVerdict::SolvedDirectly {
            optimum: offset,
            assignment,
            fallback,
        });
    }

    let mut builder = DualBuilder::default();
    let mut top_vars = Vec::new();
    let mut names = Vec::new();
    let mut dual_of = HashMap::new();
    let mut analyses = Vec::new();
    let mut bottom_uf = UnionFind::<usize>::new(n);
    let mut bottoms = BTreeSet::new();
    for (ci, comp) in full.iter().enumerate() {
        for &v in comp {
            if levels[v] == top {
                dual_of.insert(v, top_vars.len());
                top_vars.push(Some(v));
                names.push(inst.variables()[v].clone());
                for _ in 0..mu[v] {
                    builder.unary(top_vars.len() - 1);
                }
            } else if levels[v] == 0 {
                bottoms.insert(v);
            }
        }
        let middle: HashSet<usize> = comp
            .iter()
            .copied()
            .filter(|&v| levels[v] != 0 && levels[v] != top)
            .collect();
        let mut local: Vec<usize> = middle.iter().copied().collect();
        local.sort_unstable();
        let index: HashMap<usize, usize> = local.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let inner: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| middle.contains(a) && middle.contains(b))
            .map(|(a, b)| (index[a], index[b]))
            .collect();
        for (k, part) in components_of(local.len(), &inner).into_iter().enumerate() {
            let vertices: Vec<usize> = part.iter().map(|&i| local[i]).collect();
            let members: HashSet<usize> = vertices.iter().copied().collect();
            let mut tops = BTreeSet::new();
            let mut below = BTreeSet::new();
            for &(a, b) in &edges {
                if members.contains(&a) && levels[b] == top {
                    tops.insert(b);
                }
                if members.contains(&b) && levels[a] == 0 {
                    below.insert(a);
                }
            }
            let name = format!("c{}_{}", ci + 1, k + 1);
            let anchored = anchor(inst, &name, &vertices, &edges, &levels, &tops, &below, top)?;
            let all: Vec<usize> = (1..=m).collect();
            if !level_hom_exists(&anchored, &build_q_s(m, &all)?)? {
                return Ok(ReverseVerdict::Infeasible(format!(
                    "component `{name}` maps into no path"
                )));
            }
            let s0 = compute_s0(&anchored, m)?;
            let dual_var = if let Some(&t) = tops.first() {
                Some(dual_of[&t])
            } else if !s0.is_empty() {
                top_vars.push(None);
                names.push(format!("_virt{}_{}", ci + 1, k + 1));
                Some(top_vars.len() - 1)
            } else {
                None
            };
            let tops: Vec<usize> = tops.into_iter().collect();
            for (i, &a) in tops.iter().enumerate() {
                for &b in &tops[i + 1..] {
                    for k in 1..=m {
                        builder.matching(k, dual_of[&a], k, dual_of[&b]);
                    }
                }
            }
            let s0_list: Vec<usize> = s0.iter().copied().collect();
            if let Some(x) = dual_var {
                for (i, &k) in s0_list.iter().enumerate() {
                    for &l in &s0_list[i + 1..] {
                        builder.matching(k, x, l, x);
                    }
                }
            }
            let below: Vec<usize> = below.into_iter().collect();
            for w in below.windows(2) {
                bottom_uf.union(w[0], w[1]);
            }
            analyses.push(ComponentAnalysis {
                vertices,
                s0,
                tops,
                bottoms: below,
                anchored,
                dual_var,
                class: None,
            });
        }
    }

    let mut class_id = HashMap::new();
    let mut bottom_class = Vec::new();
    for &v in &bottoms {
        let root = bottom_uf.find(v);
        let next = class_id.len();
        let id = *class_id.entry(root).or_insert(next);
        bottom_class.push((v, id));
    }
    let mut entries: Vec<Vec<(usize, usize)>> = vec![Vec::new(); class_id.len()];
    for c in &mut analyses {
        if let Some(&b) = c.bottoms.first() {
            let id = class_id[&bottom_uf.find(b)];
            c.class = Some(id);
            if let (Some(x), Some(&k)) = (c.dual_var, c.s0.first()) {
                entries[id].push((x, k));
            }
        }
    }
    for list in &entries {
        for (i, &(x, k)) in list.iter().enumerate() {
            for &(y, l) in &list[i + 1..] {
                builder.matching(k, x, l, y);
            }
        }
    }
    let class_source = entries.iter().map(|l| l.first().copied()).collect();

    let mut out = Instance::new(format!("{}_rev", inst.name()), names)?;
    for (f, scope) in builder.constraints {
        out.add_constraint(f, scope)?;
    }
    out.check(dual.language())?;
    Ok(ReverseVerdict::DualInstance(Box::new(ReverseDual {
        instance: out,
        offset,
        fallback,
        top_vars,
        components: analyses,
        direct,
        bottoms: bottom_class,
        class_source,
    })))
}

/// Constraints of `I′_d` in emission order, without repeats of matches.
#[derive(Default)]
struct DualBuilder {
    constraints: Vec<(String, Vec<usize>)>,
    seen: HashSet<(usize, usize, usize, usize)>,
}

impl DualBuilder {
    fn unary(&mut self, x: usize) {
        self.constraints.push((PHI_PRIME.to_string(), vec![x]));
    }

    /// `match_{kl}(x, y)`, oriented with `x ≤ y`; trivial self-matches are dropped.
    fn matching(&mut self, k: usize, x: usize, l: usize, y: usize) {
        let (k, x, l, y) = match x.cmp(&y) {
            std::cmp::Ordering::Greater => (l, y, k, x),
            std::cmp::Ordering::Equal if k == l => return,
            std::cmp::Ordering::Equal => (k.min(l), x, k.max(l), y),
            std::cmp::Ordering::Less => (k, x, l, y),
        };
        if self.seen.insert((k, x, l, y)) {
            self.constraints.push((match_name(k, l), vec![x, y]));
        }
    }
}

/// The middle component `vertices` with a bottom anchor (level 0) for its
/// level-0 neighbours and a top anchor for its top neighbours.
#[allow(clippy::too_many_arguments)]
fn anchor(
    inst: &Instance,
    name: &str,
    vertices: &[usize],
    edges: &[(usize, usize)],
    levels: &[usize],
    tops: &BTreeSet<usize>,
    below: &BTreeSet<usize>,
    top: usize,
) -> Result<LeveledDigraph> {
    let mut g = LeveledDigraph::new(name);
    let mut index = HashMap::new();
    for &v in vertices {
        index.insert(v, g.add(inst.variables()[v].clone(), Role::Internal, levels[v])?);
    }
    let bottom = if below.is_empty() {
        None
    } else {
        Some(g.add("⊥", Role::Base, 0)?)
    };
    let roof = if tops.is_empty() {
        None
    } else {
        Some(g.add("⊤", Role::Tuple, top)?)
    };
    let mut seen = HashSet::new();
    for &(a, b) in edges {
        let from = match (index.get(&a), below.contains(&a)) {
            (Some(&i), _) => i,
            (None, true) => bottom.expect("has bottoms"),
            _ => continue,
        };
        let to = match (index.get(&b), tops.contains(&b)) {
            (Some(&i), _) => i,
            (None, true) => roof.expect("has tops"),
            _ => continue,
        };
        if (index.contains_key(&a) || index.contains_key(&b)) && seen.insert((from, to)) {
            g.add_edge(from, to)?;
        }
    }
    Ok(g)
}

/// Solves a component of height below `m + 2` over each maximal shape of
/// `𝔻_Γ` (all paths out of one base vertex, or into one tuple vertex) by
/// minimum cut, falling back to a homomorphism search into all of `𝔻_Γ`.
///
/// Returns `None` when infeasible; labels are vertex indices.
fn solve_short(
    ext: &ExtDualLanguage,
    comp: &[usize],
    edges: &[(usize, usize)],
    mu: &[usize],
) -> Result<Option<(ExtValue, Vec<usize>, bool)>> {
    let index: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let local: Vec<(usize, usize)> = edges
        .iter()
        .filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?)))
        .collect();
    let costs = ext.digraph().cost_table();
    if local.is_empty() {
        let v = comp[0];
        let best = (0..costs.len())
            .min_by_key(|&u| costs[u].times(mu[v]))
            .expect("non-empty digraph");
        return Ok(Some((costs[best].times(mu[v]), vec![best], false)));
    }
    let mut best: Option<(ExtValue, Vec<usize>)> = None;
    for shape in shapes(ext) {
        let Some(solution) = solve_on_shape(ext, &shape, comp, &local, mu)? else {
            return by_search(ext, comp, &local, mu);
        };
        if let Solution::Optimal { value, assignment } = solution {
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                let labels = assignment.0.iter().map(|&i| shape[i]).collect();
                best = Some((value, labels));
            }
        }
    }
    Ok(best.map(|(v, l)| (v, l, false)))
}

fn by_search(
    ext: &ExtDualLanguage,
    comp: &[usize],
    local: &[(usize, usize)],
    mu: &[usize],
) -> Result<Option<(ExtValue, Vec<usize>, bool)>> {
    let search = HomSearch::new(ext.target(), comp.len(), local.iter().copied());
    let table = ext.digraph().cost_table();
    let costs: Vec<Option<Vec<ExtValue>>> = comp
        .iter()
        .map(|&v| Some(table.iter().map(|c| c.times(mu[v])).collect()))
        .collect();
    Ok(search.min_cost(&costs)?.map(|(v, h)| (v, h, true)))
}

/// Vertex lists of the maximal shapes, each sorted by level, then path, then
/// position along the path.
fn shapes(ext: &ExtDualLanguage) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let from_paths = |hub: usize, paths: Vec<usize>| -> Vec<usize> {
        let mut keyed = vec![(ext.level(hub), 0, 0, hub)];
        for pi in paths {
            let p = &ext.paths()[pi];
            for pos in 1..p.vertices.len() - 1 {
                let v = p.vertices[pos];
                keyed.push((ext.level(v), pi, pos, v));
            }
        }
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, _, _, v)| v).collect()
    };
    let nt = ext.tuples().len();
    for d in 0..ext.combined().phi_gamma().domain().size() {
        out.push(from_paths(ext.base_vertex(d), (0..nt).map(|t| d * nt + t).collect()));
    }
    for t in 0..nt {
        let nd = ext.combined().phi_gamma().domain().size();
        out.push(from_paths(ext.tuple_vertex(t), (0..nd).map(|d| d * nt + t).collect()));
    }
    out
}

/// Minimum cut over one shape; `None` when the cut encoding is unavailable.
fn solve_on_shape(
    ext: &ExtDualLanguage,
    shape: &[usize],
    comp: &[usize],
    local: &[(usize, usize)],
    mu: &[usize],
) -> Result<Option<Solution>> {
    let k = shape.len();
    let domain = Domain::range(k);
    let g = ext.digraph();
    let edge = CostFunction::relation(DGAMMA, domain.clone(), 2, |t| g.has_edge(shape[t[0]], shape[t[1]]));
    let costs = g.cost_table();
    let weight = CostFunction::from_fn(MU, domain.clone(), 1, |t| costs[shape[t[0]]].clone());
    let lang = Language::derived("shape", domain, vec![edge, weight])?;
    let mut inst = Instance::new("part", (0..comp.len()).map(|i| format!("v{i}")))?;
    for &(a, b) in local {
        inst.add_constraint(DGAMMA, vec![a, b])?;
    }
    for (i, &v) in comp.iter().enumerate() {
        for _ in 0..mu[v] {
            inst.add_constraint(MU, vec![i])?;
        }
    }
    let order: Vec<usize> = (0..k).collect();
    match mincut_solve(&lang, &inst, &order) {
        Ok(MinCut::Solved(s)) => Ok(Some(s)),
        Ok(MinCut::Declined(_)) | Err(Error::PreconditionFailed(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::combine::combine_language;
    use crate::digraph::build_d_gamma;
    use crate::model::{all_tuples, eval_instance};
    use crate::random;
    use crate::solve::brute_force;
    use proptest::prelude::*;

    fn rho_setup() -> (ExtDualLanguage, DualLanguage) {
        let c = combine_language(&catalog::rho_language()).unwrap();
        (build_d_gamma(&c).unwrap(), DualLanguage::new(c).unwrap())
    }

    fn rho_xy() -> Instance {
        let mut inst = Instance::new("i", ["x", "y"]).unwrap();
        inst.constrain("rho", &["x", "y"]).unwrap();
        inst
    }

    #[test]
    fn rho_instance_sizes() {
        let (ext, _) = rho_setup();
        let ie = extdual_instance(&ext, &rho_xy()).unwrap();
        let inst = &ie.instance;
        assert_eq!(inst.num_variables(), 13);
        let binary = inst.constraints().iter().filter(|c| c.function == DGAMMA).count();
        let unary = inst.constraints().iter().filter(|c| c.function == MU).count();
        assert_eq!((binary, unary), (12, 1));
        let (edges, _) = scope_edges(inst);
        let g = levels_of(inst.num_variables(), &edges);
        assert_eq!(g.levels().unwrap().iter().max(), Some(&4));
        assert_eq!(ext_optimum(&ext, inst).unwrap().optimum(), ExtValue::int(1));
    }

    #[test]
    fn rho_loop_is_infeasible() {
        let (ext, dual) = rho_setup();
        let mut inst = Instance::new("i", ["x"]).unwrap();
        inst.constrain("rho", &["x", "x"]).unwrap();
        let ie = extdual_instance(&ext, &inst).unwrap();
        assert!(ext_optimum(&ext, &ie.instance).unwrap().is_infeasible());
        match reverse_reduce(&ext, &dual, &ie.instance).unwrap() {
            ReverseVerdict::DualInstance(rd) => {
                let s = brute_force(dual.language(), &rd.instance).unwrap();
                assert!(s.is_infeasible());
            }
            ReverseVerdict::Infeasible(_) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reverse_of_rho_instance() {
        let (ext, dual) = rho_setup();
        let ie = extdual_instance(&ext, &rho_xy()).unwrap();
        let ReverseVerdict::DualInstance(rd) = reverse_reduce(&ext, &dual, &ie.instance).unwrap() else {
            panic!("expected a dual instance");
        };
        assert_eq!(rd.instance.num_variables(), 1);
        let fs: Vec<&str> = rd.instance.constraints().iter().map(|c| c.function.as_str()).collect();
        assert_eq!(fs, vec![PHI_PRIME]);
        let s = brute_force(dual.language(), &rd.instance).unwrap();
        assert_eq!(rd.optimum(&s.optimum()), ExtValue::int(1));
        let lifted = rd.decode(&ext, &dual, s.assignment().unwrap()).unwrap();
        let value = eval_instance(&ext.language(), &ie.instance, &lifted).unwrap();
        assert_eq!(value, ExtValue::int(1));
    }

    #[test]
    fn triangle_and_tall_inputs_are_infeasible() {
        let (ext, dual) = rho_setup();
        let mut tri = Instance::new("tri", ["a", "b", "c"]).unwrap();
        tri.constrain(DGAMMA, &["a", "b"]).unwrap();
        tri.constrain(DGAMMA, &["b", "c"]).unwrap();
        tri.constrain(DGAMMA, &["c", "a"]).unwrap();
        assert!(matches!(
            reverse_reduce(&ext, &dual, &tri).unwrap(),
            ReverseVerdict::Infeasible(_)
        ));
        let names: Vec<String> = (0..6).map(|i| format!("p{i}")).collect();
        let mut tall = Instance::new("tall", names.clone()).unwrap();
        for w in names.windows(2) {
            tall.constrain(DGAMMA, &[&w[0], &w[1]]).unwrap();
        }
        assert!(matches!(
            reverse_reduce(&ext, &dual, &tall).unwrap(),
            ReverseVerdict::Infeasible(_)
        ));
        assert!(ext_optimum(&ext, &tall).unwrap().is_infeasible());
    }

    #[test]
    fn single_edge_is_solved_directly() {
        let (ext, dual) = rho_setup();
        let mut inst = Instance::new("e", ["a", "b"]).unwrap();
        inst.constrain(DGAMMA, &["a", "b"]).unwrap();
        inst.constrain(MU, &["a"]).unwrap();
        inst.constrain(MU, &["b"]).unwrap();
        match reverse_reduce(&ext, &dual, &inst).unwrap() {
            ReverseVerdict::SolvedDirectly {
                optimum,
                assignment,
                fallback,
            } => {
                assert_eq!(optimum, ExtValue::zero());
                assert!(!fallback);
                let value = eval_instance(&ext.language(), &inst, &assignment).unwrap();
                assert_eq!(value, optimum);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fold_of_paths() {
        let a = build_q_s(3, &[2]).unwrap();
        let b = build_q_s(3, &[1, 2]).unwrap();
        let f = fold_positions(&a, &b).unwrap();
        assert_eq!(f.len(), a.vertex_count());
        assert_eq!(*f.last().unwrap(), b.vertex_count() - 1);
        for (x, y) in a.edges() {
            assert!(b.edges().contains(&(f[x], f[y])));
        }
        assert!(fold_positions(&b, &a).is_none());
    }

    /// Interior of the `j`-th path copy of `{ρ(x,y)}`'s `I_e`, with anchors.
    fn interior(j: usize) -> LeveledDigraph {
        let (ext, _) = rho_setup();
        let ie = extdual_instance(&ext, &rho_xy()).unwrap();
        let inst = &ie.instance;
        let (edges, _) = scope_edges(inst);
        let levels = levels_of(inst.num_variables(), &edges).levels().unwrap().to_vec();
        let path = &ie.paths[0][j];
        let vertices = path[1..path.len() - 1].to_vec();
        let tops = BTreeSet::from([*path.last().unwrap()]);
        let below = BTreeSet::from([path[0]]);
        anchor(inst, "c", &vertices, &edges, &levels, &tops, &below, 4).unwrap()
    }

    #[test]
    fn s0_examples() {
        assert_eq!(compute_s0(&interior(0), 2).unwrap(), BTreeSet::from([1]));
        assert_eq!(compute_s0(&interior(1), 2).unwrap(), BTreeSet::from([2]));
        let mut single = LeveledDigraph::new("one");
        single.add("v", Role::Internal, 2).unwrap();
        assert!(compute_s0(&single, 2).unwrap().is_empty());
        let q0 = build_q_s(2, &[]).unwrap().to_digraph();
        assert!(compute_s0(&q0, 2).unwrap().is_empty());
    }

    #[test]
    fn level_hom_examples() {
        let zig = build_q_s(1, &[]).unwrap();
        let edge = build_q_s(1, &[1]).unwrap();
        assert!(level_hom_exists(&zig.to_digraph(), &edge).unwrap());
        assert!(!level_hom_exists(&edge.to_digraph(), &zig).unwrap());
        for k in 1..=2 {
            for s in [vec![], vec![1], vec![2], vec![1, 2]] {
                let q = build_q_s(2, &s).unwrap();
                assert_eq!(
                    level_hom_exists(&interior(k - 1), &q).unwrap(),
                    s.contains(&k),
                    "k={k} S={s:?}"
                );
            }
        }
    }

    fn arb_case() -> impl Strategy<Value = (Language, Instance)> {
        any::<u64>().prop_map(|seed| {
            let mut rng = random::rng(seed);
            let lang = random::language(&mut rng, &random::LanguageParams::default());
            let inst = random::instance(&mut rng, &lang, 3, 3);
            (lang, inst)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ext_instance_shape_and_optimum((lang, inst) in arb_case()) {
            let c = combine_language(&lang).unwrap();
            let (ic, offset) = c.instance_to_combined(&inst).unwrap();
            let ext = build_d_gamma(&c).unwrap();
            let ie = extdual_instance(&ext, &ic).unwrap();
            let m = c.arity();
            let q = ic.constraints().len();
            prop_assert_eq!(ie.instance.num_variables(), ic.num_variables() + q + q * m * (3 * m - 1));
            let (edges, looped) = scope_edges(&ie.instance);
            prop_assert!(!looped);
            prop_assert_eq!(edges.len(), q * m * 3 * m);
            let levels = levels_of(ie.instance.num_variables(), &edges);
            let levels = levels.levels().unwrap();
            for comp in components_of(ie.instance.num_variables(), &edges) {
                if comp.len() > 1 {
                    prop_assert_eq!(comp.iter().map(|&v| levels[v]).max(), Some(m + 2));
                }
            }
            for cst in ic.constraints() {
                for &v in &cst.scope {
                    prop_assert_eq!(levels[v], 0);
                }
            }
            let expected = brute_force(&lang, &inst).unwrap().optimum();
            let sol = ext_optimum(&ext, &ie.instance).unwrap();
            prop_assert_eq!(sol.optimum(), &expected + &ExtValue::from(offset));
            if let Some(a) = sol.assignment() {
                let back = ie.decode(&ext, a);
                let value = eval_instance(c.language(), &ic, &back).unwrap();
                prop_assert_eq!(value, sol.optimum());
            }
        }

        #[test]
        fn encode_preserves_cost((lang, inst) in arb_case()) {
            let c = combine_language(&lang).unwrap();
            let (ic, _) = c.instance_to_combined(&inst).unwrap();
            let ext = build_d_gamma(&c).unwrap();
            let ie = extdual_instance(&ext, &ic).unwrap();
            let gamma_e = ext.language();
            for t in all_tuples(c.phi_gamma().domain().size(), ic.num_variables()).take(64) {
                let a = Assignment(t);
                let value = eval_instance(c.language(), &ic, &a).unwrap();
                match ie.encode(&ext, &ic, &a) {
                    Some(lifted) => {
                        prop_assert_eq!(eval_instance(&gamma_e, &ie.instance, &lifted).unwrap(), value);
                        prop_assert_eq!(ie.decode(&ext, &lifted), a);
                    }
                    None => prop_assert!(value.is_infinite()),
                }
            }
        }

        #[test]
        fn s0_is_least((lang, inst) in arb_case()) {
            let c = combine_language(&lang).unwrap();
            let (ic, _) = c.instance_to_combined(&inst).unwrap();
            let ext = build_d_gamma(&c).unwrap();
            let dual = DualLanguage::new(c.clone()).unwrap();
            let ie = extdual_instance(&ext, &ic).unwrap();
            let m = c.arity();
            if let ReverseVerdict::DualInstance(rd) = reverse_reduce(&ext, &dual, &ie.instance).unwrap() {
                for comp in &rd.components {
                    for s in all_tuples(2, m) {
                        let set: Vec<usize> = (1..=m).filter(|&i| s[i - 1] == 1).collect();
                        let q = build_q_s(m, &set).unwrap();
                        let superset = comp.s0.iter().all(|k| set.contains(k));
                        prop_assert_eq!(level_hom_exists(&comp.anchored, &q).unwrap(), superset);
                    }
                }
            }
        }
    }
}
