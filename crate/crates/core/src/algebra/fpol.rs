use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{enumerate_polymorphisms, is_polymorphism, polymorphism_violation, same_domain, Operation};
use crate::dual::DualLanguage;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::{all_tuples, next_tuple, Domain, Language};
use crate::value::ExtValue;

/// A probability distribution over `k`-ary operations.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalPolymorphism {
    entries: Vec<(Operation, BigRational)>,
}

impl FractionalPolymorphism {
    pub fn new(entries: Vec<(Operation, BigRational)>) -> Result<Self> {
        let Some((first, _)) = entries.first() else {
            return Err(Error::Semantic("fractional polymorphism has no operations".into()));
        };
        let mut total = BigRational::zero();
        for (i, (f, w)) in entries.iter().enumerate() {
            if f.arity() != first.arity() || f.domain() != first.domain() {
                return Err(Error::Semantic("operations differ in arity or domain".into()));
            }
            if !w.is_positive() {
                return Err(Error::InvalidValue(format!("weight {w} of {}", f.label())));
            }
            if entries[..i].iter().any(|(g, _)| g == f) {
                return Err(Error::DuplicateName(f.label()));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidValue(format!("weights sum to {total}, expected 1")));
        }
        Ok(FractionalPolymorphism { entries })
    }

    /// `{min: ½, max: ½}`.
    pub fn submodular(domain: Domain) -> Self {
        let half = BigRational::new(1.into(), 2.into());
        FractionalPolymorphism::new(vec![
            (Operation::min(domain.clone(), 2), half.clone()),
            (Operation::max(domain, 2), half),
        ])
        .expect("valid")
    }

    pub fn single(f: Operation) -> Self {
        FractionalPolymorphism::new(vec![(f, BigRational::one())]).expect("valid")
    }

    pub fn entries(&self) -> &[(Operation, BigRational)] {
        &self.entries
    }

    pub fn arity(&self) -> usize {
        self.entries[0].0.arity()
    }

    pub fn domain(&self) -> &Domain {
        self.entries[0].0.domain()
    }

    pub fn weight(&self, f: &Operation) -> Option<&BigRational> {
        self.entries.iter().find(|(g, _)| g == f).map(|(_, w)| w)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FpolVerdict {
    Holds,
    /// A support operation maps feasible tuples of `function` outside its feasibility set.
    NotPolymorphism { operation: String, function: String },
    /// `Σ ω(f) φ(f(x⃗₁,…,x⃗_k)) ≤ (1/k) Σ φ(x⃗ᵢ)` fails at these arguments.
    Violated {
        function: String,
        arguments: Vec<Vec<usize>>,
        lhs: ExtValue,
        rhs: ExtValue,
    },
}

impl FpolVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, FpolVerdict::Holds)
    }
}

impl fmt::Display for FpolVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FpolVerdict::Holds => write!(f, "holds"),
            FpolVerdict::NotPolymorphism { operation, function } => {
                write!(f, "{operation} is not a polymorphism of `{function}`")
            }
            FpolVerdict::Violated {
                function,
                arguments,
                lhs,
                rhs,
            } => write!(f, "`{function}` at {arguments:?}: {lhs} > {rhs}"),
        }
    }
}

/// Checks the fractional polymorphism inequality for every function of
/// `lang` and every `k`-tuple of its feasible tuples, exactly.
pub fn check_fractional_polymorphism(omega: &FractionalPolymorphism, lang: &Language) -> Result<FpolVerdict> {
    for (f, _) in omega.entries() {
        same_domain(f, lang)?;
        if let Some((function, _)) = polymorphism_violation(f, lang)? {
            return Ok(FpolVerdict::NotPolymorphism {
                operation: f.label(),
                function,
            });
        }
    }
    let k = omega.arity();
    let inverse_k = BigRational::new(1.into(), (k as i64).into());
    for phi in lang.functions() {
        let feasible = phi.feasible_tuples();
        if feasible.is_empty() {
            continue;
        }
        let mut picks = vec![0; k];
        loop {
            let args: Vec<&Vec<usize>> = picks.iter().map(|&i| &feasible[i]).collect();
            let lhs: ExtValue = omega
                .entries()
                .iter()
                .map(|(f, w)| w * phi.value(&f.apply_columns(&args)))
                .sum();
            let total: ExtValue = args.iter().map(|x| phi.value(x)).sum();
            let rhs = &inverse_k * &total;
            if lhs > rhs {
                return Ok(FpolVerdict::Violated {
                    function: phi.name().to_string(),
                    arguments: args.into_iter().cloned().collect(),
                    lhs,
                    rhs,
                });
            }
            if !next_tuple(&mut picks, feasible.len()) {
                break;
            }
        }
    }
    Ok(FpolVerdict::Holds)
}

/// `f_d`: componentwise application of `f` to tuples of `D′`.
///
/// Fails with [`Error::NotAPolymorphism`] unless `f` preserves the source language.
pub fn lift_pol_dual(f: &Operation, dual: &DualLanguage) -> Result<Operation> {
    let source = dual.combined().source();
    if !is_polymorphism(f, source)? {
        return Err(Error::NotAPolymorphism(f.label()));
    }
    let tuples = dual.tuples();
    let k = f.arity();
    let mut table = Vec::with_capacity(tuples.len().pow(k as u32));
    for picks in all_tuples(tuples.len(), k) {
        let args: Vec<&Vec<usize>> = picks.iter().map(|&i| &tuples[i]).collect();
        let image = f.apply_columns(&args);
        let index = dual
            .tuple_index(&image)
            .ok_or_else(|| Error::NotAPolymorphism(f.label()))?;
        table.push(index);
    }
    let lifted = Operation::new(dual.d_prime().clone(), k, table)?;
    let lifted = match f.name() {
        Some(name) => lifted.named(format!("{name}_d")),
        None => lifted,
    };
    if !is_polymorphism(&lifted, dual.language())? {
        return Err(Error::Mismatch {
            stage: "lift_pol_dual".into(),
            detail: format!("{} does not preserve the dual language", lifted.label()),
        });
    }
    Ok(lifted)
}

/// Whether some coordinate of `Feas(φ_Γ)` takes every label. Only then is
/// `f ↦ f_d` injective and are identities reflected back from `f_d` to `f`;
/// otherwise `f` is free on arguments no coordinate can present.
pub fn lift_is_faithful(dual: &DualLanguage) -> bool {
    let d = dual.combined().source().domain().size();
    (0..dual.arity()).any(|i| {
        let mut seen = vec![false; d];
        for t in dual.tuples() {
            seen[t[i]] = true;
        }
        seen.into_iter().all(|b| b)
    })
}

/// `ω_d` with `ω_d(f_d) = ω(f)`; the verdicts of `ω` on the source language
/// and of `ω_d` on the dual language must agree.
pub fn lift_fpol_dual(omega: &FractionalPolymorphism, dual: &DualLanguage) -> Result<FractionalPolymorphism> {
    let entries = omega
        .entries()
        .iter()
        .map(|(f, w)| Ok((lift_pol_dual(f, dual)?, w.clone())))
        .collect::<Result<Vec<_>>>()?;
    let lifted = FractionalPolymorphism::new(entries)?;
    let before = check_fractional_polymorphism(omega, dual.combined().source())?.holds();
    let after = check_fractional_polymorphism(&lifted, dual.language())?.holds();
    if before != after {
        return Err(Error::Mismatch {
            stage: "lift_fpol_dual".into(),
            detail: format!("check gives {before} on the source and {after} on the dual"),
        });
    }
    Ok(lifted)
}

/// For each of `ops`, which must be all unary polymorphisms of `lang`,
/// whether some unary fractional polymorphism gives it positive weight.
pub fn unary_support(lang: &Language, ops: &[Operation]) -> Result<Vec<bool>> {
    let mut lp = LinearProgram::new(ops.len());
    let one = BigRational::one();
    let all: Vec<(usize, BigRational)> = (0..ops.len()).map(|j| (j, one.clone())).collect();
    lp.add_sparse(&all, Relation::Eq, one.clone());
    for phi in lang.functions() {
        // Crisp functions contribute 0 ≤ 0 once every operation preserves them.
        if phi.is_crisp() {
            continue;
        }
        for x in phi.feasible_tuples() {
            let terms: Vec<(usize, BigRational)> = ops
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    let image = f.apply_columns(&[&x]);
                    let cost = phi.value(&image).finite().cloned().ok_or_else(|| {
                        Error::NotAPolymorphism(f.label())
                    })?;
                    Ok((j, cost))
                })
                .collect::<Result<_>>()?;
            let rhs = phi.value(&x).finite().expect("feasible").clone();
            lp.add_sparse(&terms, Relation::Le, rhs);
        }
    }
    let mut flags = Vec::with_capacity(ops.len());
    for j in 0..ops.len() {
        let mut objective = vec![BigRational::zero(); ops.len()];
        objective[j] = one.clone();
        lp.set_objective(objective);
        flags.push(match lp.maximize() {
            LpOutcome::Optimal { value, .. } => value.is_positive(),
            _ => false,
        });
    }
    Ok(flags)
}

/// Whether the unary operation `g` has positive weight in some unary
/// fractional polymorphism of `lang`.
pub fn in_unary_support(g: &Operation, lang: &Language) -> Result<bool> {
    same_domain(g, lang)?;
    if g.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: g.arity(),
        });
    }
    let pols = enumerate_polymorphisms(lang, 1)?;
    let Some(j) = pols.iter().position(|f| f == g) else {
        return Ok(false);
    };
    Ok(unary_support(lang, &pols)?[j])
}

/// Whether the identity is the only unary operation in the support of `lang`.
pub fn is_rigid_core(lang: &Language) -> Result<bool> {
    let pols = enumerate_polymorphisms(lang, 1)?;
    let flags = unary_support(lang, &pols)?;
    Ok(pols.iter().zip(flags).all(|(f, inside)| f.is_identity() || !inside))
}
