use super::{is_polymorphism, unary_support, Operation};
use crate::digraph::{ExtDualLanguage, LeveledDigraph};
use crate::error::{Error, Result};
use crate::hom::{HomSearch, DEFAULT_NODE_LIMIT};
use crate::model::{all_tuples, tuple_index};

/// All edge-preserving self-maps of `g` in lexicographic order.
pub fn enumerate_endomorphisms(g: &LeveledDigraph, node_limit: Option<u64>) -> Result<Vec<Vec<usize>>> {
    let target = g.target();
    let search = HomSearch::new(&target, g.vertex_count(), g.edges().iter().copied())
        .with_node_limit(node_limit.unwrap_or(DEFAULT_NODE_LIMIT));
    search.enumerate(usize::MAX)
}

/// The unary polymorphisms of `{𝔻_Γ, μ_Γ}`: endomorphisms of `𝔻_Γ`, since
/// `μ_Γ` is finite everywhere.
pub fn ext_unary_polymorphisms(ext: &ExtDualLanguage) -> Result<Vec<Operation>> {
    let domain = ext.vertex_domain().clone();
    enumerate_endomorphisms(ext.digraph(), None)?
        .into_iter()
        .map(|table| Operation::new(domain.clone(), 1, table))
        .collect()
}

/// Whether the identity is the only unary operation in the support of `{𝔻_Γ, μ_Γ}`.
pub fn ext_is_rigid_core(ext: &ExtDualLanguage) -> Result<bool> {
    let ops = ext_unary_polymorphisms(ext)?;
    let flags = unary_support(&ext.language(), &ops)?;
    Ok(ops.iter().zip(flags).all(|(f, inside)| f.is_identity() || !inside))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub operation: Operation,
    /// Whether the restriction preserves the source language.
    pub is_polymorphism: bool,
}

/// Restricts an operation on the vertices of `𝔻_Γ` to the base vertices.
///
/// Fails with [`Error::NotClosed`] when some base tuple maps off the base.
pub fn restrict_to_base(f: &Operation, ext: &ExtDualLanguage) -> Result<Restriction> {
    if f.domain() != ext.vertex_domain() {
        return Err(Error::DomainMismatch("operation is not over the vertices of the digraph".into()));
    }
    let source = ext.combined().source();
    let d = source.domain().size();
    let nv = ext.vertex_domain().size();
    let k = f.arity();
    let mut table = Vec::with_capacity(d.pow(k as u32));
    for t in all_tuples(d, k) {
        let vertices: Vec<usize> = t.iter().map(|&a| ext.base_vertex(a)).collect();
        let image = f.table()[tuple_index(&vertices, nv)];
        table.push(ext.base_label(image).ok_or(Error::NotClosed)?);
    }
    let operation = Operation::new(source.domain().clone(), k, table)?;
    let is_polymorphism = is_polymorphism(&operation, source)?;
    Ok(Restriction {
        operation,
        is_polymorphism,
    })
}
