//! Domains, cost functions, languages, instances and objective evaluation.
//!
//! Tuples are stored as positional label indices. Every table is laid out
//! lexicographically with the first coordinate most significant, so table
//! position `i` and `tuple_at(i)` enumerate `D^m` in canonical order.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::value::ExtValue;

/// An ordered, non-empty list of distinct labels.
#[derive(Clone)]
pub struct Domain {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Domain {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l == ":" || l.chars().any(|c| c.is_whitespace() || c == '#') {
                return Err(Error::Semantic(format!("invalid label `{l}`")));
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateName(l.clone()));
            }
        }
        Ok(Domain { labels, index })
    }

    /// The domain `{0, 1, ..., n-1}` with decimal labels.
    pub fn range(n: usize) -> Self {
        Domain::new((0..n).map(|i| i.to_string())).expect("non-empty range domain")
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Number of tuples of the given arity.
    pub fn power(&self, arity: usize) -> usize {
        self.size().pow(arity as u32)
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for Domain {}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.labels).finish()
    }
}

/// Lexicographic position of `tuple` in `base^len`.
pub fn tuple_index(tuple: &[usize], base: usize) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * base + x)
}

/// Inverse of [`tuple_index`].
pub fn tuple_at(mut index: usize, base: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// Iterates all tuples of `base^arity` in lexicographic order.
pub fn all_tuples(base: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = base.checked_pow(arity as u32).unwrap_or(usize::MAX);
    (0..total).map(move |i| tuple_at(i, base, arity))
}

/// Advance `tuple` to its lexicographic successor; false once it wraps.
pub fn next_tuple(tuple: &mut [usize], base: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// An m-ary cost function given by its full table.
#[derive(Clone, PartialEq, Eq)]
pub struct CostFunction {
    name: String,
    domain: Domain,
    arity: usize,
    table: Vec<ExtValue>,
}

impl CostFunction {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        arity: usize,
        table: Vec<ExtValue>,
    ) -> Result<Self> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::Semantic(format!("function `{name}` must have arity >= 1")));
        }
        let expected = domain.power(arity);
        if table.len() != expected {
            return Err(Error::TableSize {
                name,
                expected,
                found: table.len(),
            });
        }
        Ok(CostFunction {
            name,
            domain,
            arity,
            table,
        })
    }

    pub fn from_fn(
        name: impl Into<String>,
        domain: Domain,
        arity: usize,
        mut f: impl FnMut(&[usize]) -> ExtValue,
    ) -> Self {
        let table = all_tuples(domain.size(), arity).map(|t| f(&t)).collect();
        CostFunction::new(name, domain, arity, table).expect("table built to size")
    }

    /// Crisp function whose zero set is given by the predicate.
    pub fn relation(
        name: impl Into<String>,
        domain: Domain,
        arity: usize,
        mut member: impl FnMut(&[usize]) -> bool,
    ) -> Self {
        CostFunction::from_fn(name, domain, arity, |t| {
            if member(t) {
                ExtValue::zero()
            } else {
                ExtValue::Infinite
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[ExtValue] {
        &self.table
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Table lookup by label indices. Panics on out-of-range input.
    pub fn value(&self, tuple: &[usize]) -> &ExtValue {
        debug_assert_eq!(tuple.len(), self.arity);
        &self.table[tuple_index(tuple, self.domain.size())]
    }

    /// Table lookup by label names.
    pub fn eval<S: AsRef<str>>(&self, labels: &[S]) -> Result<ExtValue> {
        if labels.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: labels.len(),
            });
        }
        let tuple = labels
            .iter()
            .map(|l| self.domain.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.value(&tuple).clone())
    }

    pub fn is_crisp(&self) -> bool {
        self.table.iter().all(|v| v.is_infinite() || v.is_zero())
    }

    pub fn is_finite_valued(&self) -> bool {
        self.table.iter().all(ExtValue::is_finite)
    }

    pub fn is_identically_infinite(&self) -> bool {
        self.table.iter().all(ExtValue::is_infinite)
    }

    pub fn is_feasible(&self, tuple: &[usize]) -> bool {
        self.value(tuple).is_finite()
    }

    /// The crisp feasibility relation, keeping this function's name.
    pub fn feas(&self) -> CostFunction {
        let table = self
            .table
            .iter()
            .map(|v| {
                if v.is_finite() {
                    ExtValue::zero()
                } else {
                    ExtValue::Infinite
                }
            })
            .collect();
        CostFunction {
            name: self.name.clone(),
            domain: self.domain.clone(),
            arity: self.arity,
            table,
        }
    }

    /// Tuples with finite value, in lexicographic order.
    pub fn feasible_tuples(&self) -> Vec<Vec<usize>> {
        let base = self.domain.size();
        self.table
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, _)| tuple_at(i, base, self.arity))
            .collect()
    }

    pub fn finite_min(&self) -> Option<BigRational> {
        self.table.iter().filter_map(ExtValue::finite).min().cloned()
    }

    pub fn finite_max(&self) -> Option<BigRational> {
        self.table.iter().filter_map(ExtValue::finite).max().cloned()
    }

    /// Tuples whose value equals `value`, as label strings.
    pub fn tuples_with_value(&self, value: &ExtValue) -> Vec<Vec<String>> {
        let base = self.domain.size();
        self.table
            .iter()
            .enumerate()
            .filter(|(_, v)| *v == value)
            .map(|(i, _)| {
                tuple_at(i, base, self.arity)
                    .into_iter()
                    .map(|x| self.domain.label(x).to_string())
                    .collect()
            })
            .collect()
    }
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// A finite set of named cost functions over one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Language {
    name: String,
    domain: Domain,
    functions: Vec<CostFunction>,
}

impl Language {
    /// Validates unique names, a shared domain, and that no member is identically infinite.
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        functions: Vec<CostFunction>,
    ) -> Result<Self> {
        if let Some(f) = functions.iter().find(|f| f.is_identically_infinite()) {
            return Err(Error::InfiniteFunction(f.name().to_string()));
        }
        Self::derived(name, domain, functions)
    }

    /// As [`Language::new`] but admits identically infinite members, which
    /// arise in constructed languages such as empty match relations.
    pub fn derived(
        name: impl Into<String>,
        domain: Domain,
        functions: Vec<CostFunction>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &functions {
            if f.domain() != &domain {
                return Err(Error::DomainMismatch(format!(
                    "function `{}` is not over the language domain",
                    f.name()
                )));
            }
            if !seen.insert(f.name().to_string()) {
                return Err(Error::DuplicateName(f.name().to_string()));
            }
        }
        Ok(Language {
            name: name.into(),
            domain,
            functions,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn functions(&self) -> &[CostFunction] {
        &self.functions
    }

    pub fn get(&self, name: &str) -> Option<&CostFunction> {
        self.functions.iter().find(|f| f.name() == name)
    }

    pub fn function(&self, name: &str) -> Result<&CostFunction> {
        self.get(name)
            .ok_or_else(|| Error::UnknownFunction(name.to_string()))
    }

    pub fn is_crisp(&self) -> bool {
        self.functions.iter().all(CostFunction::is_crisp)
    }

    pub fn is_finite_valued(&self) -> bool {
        self.functions.iter().all(CostFunction::is_finite_valued)
    }

    pub fn max_arity(&self) -> usize {
        self.functions.iter().map(CostFunction::arity).max().unwrap_or(0)
    }
}

/// One valued constraint: a function name applied to a scope of variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub function: String,
    pub scope: Vec<usize>,
}

/// A VCSP instance. Constraints refer to functions by name; the language is
/// supplied at evaluation time.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    name: String,
    variables: Vec<String>,
    var_index: HashMap<String, usize>,
    constraints: Vec<Constraint>,
}

impl Instance {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        variables: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let mut inst = Instance {
            name: name.into(),
            variables: Vec::new(),
            var_index: HashMap::new(),
            constraints: Vec::new(),
        };
        for v in variables {
            inst.add_variable(v)?;
        }
        Ok(inst)
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> Result<usize> {
        let name = name.into();
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '#') {
            return Err(Error::Semantic(format!("invalid variable name `{name}`")));
        }
        if self.var_index.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let id = self.variables.len();
        self.var_index.insert(name.clone(), id);
        self.variables.push(name);
        Ok(id)
    }

    pub fn add_constraint(&mut self, function: impl Into<String>, scope: Vec<usize>) -> Result<()> {
        if let Some(&bad) = scope.iter().find(|&&v| v >= self.variables.len()) {
            return Err(Error::UnknownVariable(format!("#{bad}")));
        }
        self.constraints.push(Constraint {
            function: function.into(),
            scope,
        });
        Ok(())
    }

    /// Adds a constraint by variable names.
    pub fn constrain<S: AsRef<str>>(&mut self, function: &str, scope: &[S]) -> Result<()> {
        let scope = scope
            .iter()
            .map(|s| self.var(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.add_constraint(function, scope)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var(&self, name: &str) -> Result<usize> {
        self.var_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Resolves every constraint against `lang`, checking names and arities.
    pub fn resolve<'a>(&'a self, lang: &'a Language) -> Result<Vec<(&'a CostFunction, &'a [usize])>> {
        self.constraints
            .iter()
            .map(|c| {
                let f = lang.function(&c.function)?;
                if f.arity() != c.scope.len() {
                    return Err(Error::ArityMismatch {
                        expected: f.arity(),
                        found: c.scope.len(),
                    });
                }
                Ok((f, c.scope.as_slice()))
            })
            .collect()
    }

    pub fn check(&self, lang: &Language) -> Result<()> {
        self.resolve(lang).map(|_| ())
    }

    /// Variables that occur in at least one scope.
    pub fn constrained_variables(&self) -> Vec<bool> {
        let mut used = vec![false; self.variables.len()];
        for c in &self.constraints {
            for &v in &c.scope {
                used[v] = true;
            }
        }
        used
    }
}

/// A total map from an instance's variables to label indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn labels<'a>(&'a self, domain: &'a Domain) -> impl Iterator<Item = &'a str> + 'a {
        self.0.iter().map(move |&x| domain.label(x))
    }

    pub fn from_labels<S: AsRef<str>>(domain: &Domain, labels: &[S]) -> Result<Self> {
        labels
            .iter()
            .map(|l| domain.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }
}

/// Objective value of `assignment`: the sum over all constraints, `∞` absorbing.
pub fn eval_instance(lang: &Language, inst: &Instance, assignment: &Assignment) -> Result<ExtValue> {
    if assignment.0.len() != inst.num_variables() {
        return Err(Error::ArityMismatch {
            expected: inst.num_variables(),
            found: assignment.0.len(),
        });
    }
    if let Some(&bad) = assignment.0.iter().find(|&&x| x >= lang.domain().size()) {
        return Err(Error::UnknownLabel(format!("#{bad}")));
    }
    let resolved = inst.resolve(lang)?;
    Ok(eval_resolved(&resolved, &assignment.0))
}

pub(crate) fn eval_resolved(resolved: &[(&CostFunction, &[usize])], labels: &[usize]) -> ExtValue {
    let mut total = ExtValue::zero();
    let mut buf = Vec::new();
    for (f, scope) in resolved {
        buf.clear();
        buf.extend(scope.iter().map(|&v| labels[v]));
        total += f.value(&buf);
        if total.is_infinite() {
            break;
        }
    }
    total
}
