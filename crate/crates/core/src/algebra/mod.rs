//! Operations, polymorphisms, fractional polymorphisms, identities and
//! endomorphisms, together with the transfers between a language and its
//! encodings.

mod endo;
mod fpol;
mod identity;

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{all_tuples, tuple_index, CostFunction, Domain, Language};

pub use endo::{
    enumerate_endomorphisms, ext_is_rigid_core, ext_unary_polymorphisms, restrict_to_base, Restriction,
};
pub use fpol::{
    check_fractional_polymorphism, in_unary_support, is_rigid_core, lift_fpol_dual, lift_is_faithful, lift_pol_dual,
    unary_support, FpolVerdict, FractionalPolymorphism,
};
pub use identity::{check_identity, family_identities, named_identity, Family, Identity, Term};

/// A total `k`-ary operation on a domain, tabulated in lexicographic order.
#[derive(Clone)]
pub struct Operation {
    name: Option<String>,
    domain: Domain,
    arity: usize,
    table: Vec<usize>,
}

impl PartialEq for Operation {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.arity == other.arity && self.table == other.table
    }
}

impl Eq for Operation {}

impl std::hash::Hash for Operation {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.table.hash(state);
    }
}

impl fmt::Debug for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}{:?}", self.name.as_deref().unwrap_or("op"), self.arity, self.table)
    }
}

impl Operation {
    pub fn new(domain: Domain, arity: usize, table: Vec<usize>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Semantic("operations must have arity >= 1".into()));
        }
        let expected = domain.power(arity);
        if table.len() != expected {
            return Err(Error::TableSize {
                name: "operation".into(),
                expected,
                found: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= domain.size()) {
            return Err(Error::InvalidValue(bad.to_string()));
        }
        Ok(Operation {
            name: None,
            domain,
            arity,
            table,
        })
    }

    pub fn from_fn(domain: Domain, arity: usize, f: impl Fn(&[usize]) -> usize) -> Self {
        let table = all_tuples(domain.size(), arity).map(|t| f(&t)).collect();
        Operation::new(domain, arity, table).expect("values inside the domain")
    }

    /// The projection onto coordinate `i` (0-based).
    pub fn projection(domain: Domain, arity: usize, i: usize) -> Self {
        assert!(i < arity);
        Operation::from_fn(domain, arity, |t| t[i]).named(format!("proj{}_{}", arity, i + 1))
    }

    pub fn identity(domain: Domain) -> Self {
        Operation::from_fn(domain, 1, |t| t[0]).named("id")
    }

    pub fn min(domain: Domain, arity: usize) -> Self {
        Operation::from_fn(domain, arity, |t| *t.iter().min().expect("arity >= 1")).named("min")
    }

    pub fn max(domain: Domain, arity: usize) -> Self {
        Operation::from_fn(domain, arity, |t| *t.iter().max().expect("arity >= 1")).named("max")
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.table[tuple_index(args, self.domain.size())]
    }

    /// Componentwise application to `k` tuples of equal length.
    pub fn apply_columns<T: AsRef<[usize]>>(&self, tuples: &[T]) -> Vec<usize> {
        let len = tuples.first().map_or(0, |t| t.as_ref().len());
        let mut column = vec![0; tuples.len()];
        (0..len)
            .map(|c| {
                for (slot, t) in column.iter_mut().zip(tuples) {
                    *slot = t.as_ref()[c];
                }
                self.apply(&column)
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.arity == 1 && self.table.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.domain.size()).all(|a| self.apply(&vec![a; self.arity]) == a)
    }

    /// `f(x⃗) ∈ {x₁, …, x_k}` for every argument tuple.
    pub fn is_conservative(&self) -> bool {
        all_tuples(self.domain.size(), self.arity).all(|t| t.contains(&self.apply(&t)))
    }

    pub(crate) fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("{:?}", self.table))
    }
}

/// Limits for exhaustive enumeration of `k`-ary operations.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    /// Largest admissible table length `|D|^k`.
    pub max_positions: usize,
    /// Largest admissible number of candidate tables `|D|^(|D|^k)`.
    pub max_candidates: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_positions: 9,
            max_candidates: 20_000_000,
        }
    }
}

impl Budget {
    fn check(&self, d: usize, k: usize) -> Result<usize> {
        let positions = d
            .checked_pow(k as u32)
            .filter(|&p| p <= self.max_positions)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!("{d}^{k} table positions exceed {}", self.max_positions))
            })?;
        let fits = (d as u64)
            .checked_pow(positions as u32)
            .is_some_and(|c| c <= self.max_candidates);
        if !fits {
            return Err(Error::BudgetExceeded(format!(
                "{d}^{positions} candidate operations exceed {}",
                self.max_candidates
            )));
        }
        Ok(positions)
    }
}

fn same_domain(f: &Operation, lang: &Language) -> Result<()> {
    if f.domain() != lang.domain() {
        return Err(Error::DomainMismatch(format!(
            "operation {} is not over the domain of `{}`",
            f.label(),
            lang.name()
        )));
    }
    Ok(())
}

/// First function of `lang` and argument tuples from its feasibility set that
/// `f` maps outside it.
pub fn polymorphism_violation(f: &Operation, lang: &Language) -> Result<Option<(String, Vec<Vec<usize>>)>> {
    same_domain(f, lang)?;
    for phi in lang.functions() {
        let feasible = phi.feasible_tuples();
        let mut picks = vec![0; f.arity()];
        if feasible.is_empty() {
            continue;
        }
        loop {
            let args: Vec<&Vec<usize>> = picks.iter().map(|&i| &feasible[i]).collect();
            if !phi.is_feasible(&f.apply_columns(&args)) {
                return Ok(Some((phi.name().to_string(), args.into_iter().cloned().collect())));
            }
            if !crate::model::next_tuple(&mut picks, feasible.len()) {
                break;
            }
        }
    }
    Ok(None)
}

/// Whether `f` maps every `k`-tuple of feasible tuples of each function of
/// `lang` to a feasible tuple.
pub fn is_polymorphism(f: &Operation, lang: &Language) -> Result<bool> {
    Ok(polymorphism_violation(f, lang)?.is_none())
}

/// All `k`-ary polymorphisms of `lang` in lexicographic table order.
pub fn enumerate_polymorphisms(lang: &Language, k: usize) -> Result<Vec<Operation>> {
    enumerate_polymorphisms_with(lang, k, Budget::default())
}

pub fn enumerate_polymorphisms_with(lang: &Language, k: usize, budget: Budget) -> Result<Vec<Operation>> {
    if k == 0 {
        return Err(Error::Semantic("operations must have arity >= 1".into()));
    }
    let d = lang.domain().size();
    let positions = budget.check(d, k)?;
    let search = PolSearch::new(lang, k, positions);
    let mut table = vec![0; positions];
    let mut out = Vec::new();
    search.extend(0, &mut table, &mut |t| {
        out.push(Operation::new(lang.domain().clone(), k, t.to_vec()).expect("valid table"))
    });
    Ok(out)
}

/// Backtracking over table entries in index order; each check fires once all
/// the table positions it reads are assigned.
struct PolSearch<'a> {
    functions: &'a [CostFunction],
    d: usize,
    /// `checks[p]`: `(function, positions)` whose largest position is `p`.
    checks: Vec<Vec<(usize, Vec<usize>)>>,
}

impl<'a> PolSearch<'a> {
    fn new(lang: &'a Language, k: usize, positions: usize) -> Self {
        let d = lang.domain().size();
        let mut checks = vec![Vec::new(); positions];
        let mut seen = HashSet::new();
        for (fi, phi) in lang.functions().iter().enumerate() {
            let feasible = phi.feasible_tuples();
            if feasible.is_empty() {
                continue;
            }
            let mut picks = vec![0; k];
            loop {
                let cells: Vec<usize> = (0..phi.arity())
                    .map(|c| {
                        let column: Vec<usize> = picks.iter().map(|&i| feasible[i][c]).collect();
                        tuple_index(&column, d)
                    })
                    .collect();
                if seen.insert((fi, cells.clone())) {
                    let last = *cells.iter().max().expect("arity >= 1");
                    checks[last].push((fi, cells));
                }
                if !crate::model::next_tuple(&mut picks, feasible.len()) {
                    break;
                }
            }
        }
        PolSearch {
            functions: lang.functions(),
            d,
            checks,
        }
    }

    fn extend(&self, p: usize, table: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
        if p == table.len() {
            emit(table);
            return;
        }
        for a in 0..self.d {
            table[p] = a;
            let ok = self.checks[p].iter().all(|(fi, cells)| {
                let image: Vec<usize> = cells.iter().map(|&c| table[c]).collect();
                self.functions[*fi].is_feasible(&image)
            });
            if ok {
                self.extend(p + 1, table, emit);
            }
        }
    }
}
