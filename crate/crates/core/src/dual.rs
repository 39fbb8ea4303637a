//! The dual encoding: a binary language over the feasible tuples of `φ_Γ`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use petgraph::unionfind::UnionFind;

use crate::combine::{combine_language, CombinedLanguage};
use crate::error::{Error, Result};
use crate::model::{Assignment, CostFunction, Domain, Instance, Language};
use crate::value::{floor, lcm_denominators, ExtValue};

pub const PHI_PRIME: &str = "phi_prime";

/// Largest repetition factor `eliminate_feas` will materialise.
pub const MAX_SCALE: u64 = 1 << 20;

/// `(l1,l2,...,lm)`.
pub fn tuple_label(domain: &Domain, tuple: &[usize]) -> String {
    let inner: Vec<&str> = tuple.iter().map(|&x| domain.label(x)).collect();
    format!("({})", inner.join(","))
}

pub fn match_name(i: usize, j: usize) -> String {
    format!("match_{i}_{j}")
}

/// Parses `match_<i>_<j>` into 1-based coordinates.
pub fn parse_match_name(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("match_")?;
    let (i, j) = rest.split_once('_')?;
    Some((i.parse().ok()?, j.parse().ok()?))
}

/// `Γ_d`: the unary `φ′` plus the `m²` crisp coordinate-match relations.
#[derive(Clone, Debug)]
pub struct DualLanguage {
    combined: CombinedLanguage,
    tuples: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    language: Language,
}

pub fn dual_language(gamma: &Language) -> Result<DualLanguage> {
    DualLanguage::new(combine_language(gamma)?)
}

impl DualLanguage {
    pub fn new(combined: CombinedLanguage) -> Result<Self> {
        let phi = combined.phi_gamma();
        let tuples = phi.feasible_tuples();
        if tuples.is_empty() {
            return Err(Error::EmptyFeas);
        }
        let m = phi.arity();
        let d_prime = Domain::new(tuples.iter().map(|t| tuple_label(phi.domain(), t)))?;
        let phi_prime = CostFunction::from_fn(PHI_PRIME, d_prime.clone(), 1, |t| {
            phi.value(&tuples[t[0]]).clone()
        });
        let mut functions = vec![phi_prime];
        for i in 1..=m {
            for j in 1..=m {
                functions.push(CostFunction::relation(match_name(i, j), d_prime.clone(), 2, |t| {
                    tuples[t[0]][i - 1] == tuples[t[1]][j - 1]
                }));
            }
        }
        let language = Language::derived(format!("{}_dual", phi.name()), d_prime, functions)?;
        let index = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(DualLanguage {
            combined,
            tuples,
            index,
            language,
        })
    }

    pub fn combined(&self) -> &CombinedLanguage {
        &self.combined
    }

    /// `Γ_d` as a plain language.
    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn d_prime(&self) -> &Domain {
        self.language.domain()
    }

    /// Feasible tuples of `φ_Γ`, in the order of `D′`.
    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn tuple_index(&self, tuple: &[usize]) -> Option<usize> {
        self.index.get(tuple).copied()
    }

    pub fn arity(&self) -> usize {
        self.combined.arity()
    }

    pub fn phi_prime(&self) -> &CostFunction {
        &self.language.functions()[0]
    }

    /// `match_{i,j}` with 1-based coordinates.
    pub fn matching(&self, i: usize, j: usize) -> &CostFunction {
        let m = self.arity();
        assert!((1..=m).contains(&i) && (1..=m).contains(&j));
        &self.language.functions()[1 + (i - 1) * m + (j - 1)]
    }

    fn check_instance(&self, inst: &Instance) -> Result<()> {
        let m = self.arity();
        for c in inst.constraints() {
            let ok = if c.function == PHI_PRIME {
                c.scope.len() == 1
            } else {
                matches!(parse_match_name(&c.function),
                    Some((i, j)) if (1..=m).contains(&i) && (1..=m).contains(&j) && c.scope.len() == 2)
            };
            if !ok {
                return Err(Error::WrongLanguage(format!(
                    "`{}` is not a function of the dual language",
                    c.function
                )));
            }
        }
        Ok(())
    }

    /// Builds `I_d` from an instance over `{φ_Γ}`.
    pub fn dual_instance(&self, inst: &Instance) -> Result<DualInstance> {
        let phi = self.combined.phi_gamma();
        for c in inst.constraints() {
            if c.function != phi.name() {
                return Err(Error::WrongLanguage(format!(
                    "constraint uses `{}`, expected `{}`",
                    c.function,
                    phi.name()
                )));
            }
            if c.scope.len() != phi.arity() {
                return Err(Error::ArityMismatch {
                    expected: phi.arity(),
                    found: c.scope.len(),
                });
            }
        }
        let scopes: Vec<&[usize]> = inst.constraints().iter().map(|c| c.scope.as_slice()).collect();
        let q = scopes.len();
        let mut out = Instance::new(
            format!("{}_dual", inst.name()),
            (1..=q).map(|i| format!("x'{i}")),
        )?;
        for i in 0..q {
            out.add_constraint(PHI_PRIME, vec![i])?;
        }
        for (i, s) in scopes.iter().enumerate() {
            for k in 0..s.len() {
                for l in k + 1..s.len() {
                    if s[k] == s[l] {
                        out.add_constraint(match_name(k + 1, l + 1), vec![i, i])?;
                    }
                }
            }
        }
        for i in 0..q {
            for j in i + 1..q {
                for (k, a) in scopes[i].iter().enumerate() {
                    for (l, b) in scopes[j].iter().enumerate() {
                        if a == b {
                            out.add_constraint(match_name(k + 1, l + 1), vec![i, j])?;
                        }
                    }
                }
            }
        }
        Ok(DualInstance {
            instance: out,
            scopes: scopes.iter().map(|s| s.to_vec()).collect(),
            num_source_variables: inst.num_variables(),
        })
    }

    /// Expands each dual variable into `m` variables merged along the match constraints.
    pub fn undual_instance(&self, inst: &Instance) -> Result<Undualled> {
        self.check_instance(inst)?;
        let m = self.arity();
        let n = inst.num_variables();
        let mut uf = UnionFind::<usize>::new(n * m);
        let mut unary_count = vec![0usize; n];
        for c in inst.constraints() {
            if c.function == PHI_PRIME {
                unary_count[c.scope[0]] += 1;
            } else {
                let (k, l) = parse_match_name(&c.function).expect("checked");
                uf.union(c.scope[0] * m + k - 1, c.scope[1] * m + l - 1);
            }
        }
        let mut class_var: HashMap<usize, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut slot_var = vec![0; n * m];
        for (slot, sv) in slot_var.iter_mut().enumerate() {
            let root = uf.find(slot);
            *sv = *class_var.entry(root).or_insert_with(|| {
                names.push(format!("{}_{}", inst.variables()[slot / m], slot % m + 1));
                names.len() - 1
            });
        }
        let mut out = Instance::new(format!("{}_undual", inst.name()), names)?;
        let phi = self.combined.phi_gamma().name().to_string();
        let feas = self.combined.feas_name();
        for (v, &count) in unary_count.iter().enumerate() {
            let block = slot_var[v * m..(v + 1) * m].to_vec();
            if count == 0 {
                out.add_constraint(feas.clone(), block.clone())?;
            }
            for _ in 0..count {
                out.add_constraint(phi.clone(), block.clone())?;
            }
        }
        Ok(Undualled {
            instance: out,
            slot_var,
            arity: m,
        })
    }
}

/// `I_d` together with the scopes its dual variables stand for.
#[derive(Clone, Debug)]
pub struct DualInstance {
    pub instance: Instance,
    /// Scope of the source constraint behind each dual variable.
    pub scopes: Vec<Vec<usize>>,
    pub num_source_variables: usize,
}

impl DualInstance {
    /// Reads source labels off the dual tuples. Variables outside every scope get label 0.
    pub fn decode(&self, dual: &DualLanguage, assignment: &Assignment) -> Assignment {
        let mut out = vec![None; self.num_source_variables];
        for (scope, &t) in self.scopes.iter().zip(&assignment.0) {
            for (&v, &label) in scope.iter().zip(&dual.tuples()[t]) {
                out[v].get_or_insert(label);
            }
        }
        Assignment(out.into_iter().map(|x| x.unwrap_or(0)).collect())
    }

    /// The dual assignment of a source assignment, if every scope lands in `Feas(φ_Γ)`.
    pub fn encode(&self, dual: &DualLanguage, assignment: &Assignment) -> Option<Assignment> {
        self.scopes
            .iter()
            .map(|s| {
                let t: Vec<usize> = s.iter().map(|&v| assignment.0[v]).collect();
                dual.tuple_index(&t)
            })
            .collect::<Option<Vec<_>>>()
            .map(Assignment)
    }

    /// Sidecar lines `dualvar x'i = constraint i`.
    pub fn map_lines(&self) -> String {
        (1..=self.scopes.len())
            .map(|i| format!("dualvar x'{i} = constraint {i}\n"))
            .collect()
    }
}

/// Result of expanding an instance over `Γ_d` back to `{φ_Γ, Feas(φ_Γ)}`.
#[derive(Clone, Debug)]
pub struct Undualled {
    pub instance: Instance,
    /// Variable of the expanded instance for slot `v·m + k`.
    pub slot_var: Vec<usize>,
    arity: usize,
}

impl Undualled {
    /// Dual assignment whose tuple for each dual variable is its block's labels.
    pub fn decode(&self, dual: &DualLanguage, assignment: &Assignment) -> Option<Assignment> {
        self.slot_var
            .chunks(self.arity)
            .map(|block| {
                let t: Vec<usize> = block.iter().map(|&v| assignment.0[v]).collect();
                dual.tuple_index(&t)
            })
            .collect::<Option<Vec<_>>>()
            .map(Assignment)
    }
}

/// `J′` over `{φ_Γ}` with the scaling data needed to recover `opt(J)`.
#[derive(Clone, Debug)]
pub struct FeasElimination {
    pub instance: Instance,
    pub scale: BigInt,
    pub gap: BigRational,
    /// `F · min(0, min φ_Γ)` where `F` counts the replaced Feas constraints.
    pub shift: BigRational,
}

impl FeasElimination {
    /// `opt(J)` from `opt(J′)`.
    pub fn recover(&self, opt: &ExtValue) -> ExtValue {
        match opt {
            ExtValue::Infinite => ExtValue::Infinite,
            ExtValue::Finite(v) => {
                let step = BigRational::from_integer(self.scale.clone()) * &self.gap;
                let k = floor(&((v - &self.shift) / step));
                ExtValue::Finite(BigRational::from_integer(k) * &self.gap)
            }
        }
    }
}

/// Replaces each `Feas(φ_Γ)` constraint by `φ_Γ` and repeats every `φ_Γ`
/// constraint `N` times so that the added costs never outweigh one gap step.
pub fn eliminate_feas(c: &CombinedLanguage, inst: &Instance) -> Result<FeasElimination> {
    let lang = c.language_with_feas();
    inst.check(&lang)?;
    let phi = c.phi_gamma();
    let feas = c.feas_name();
    let feas_count = inst.constraints().iter().filter(|k| k.function == feas).count();
    let max = phi.finite_max().expect("φ_Γ has a finite value");
    let min = phi.finite_min().expect("φ_Γ has a finite value");
    let low = if min < BigRational::zero() { min } else { BigRational::zero() };
    let count = BigRational::from_integer(feas_count.into());
    let range = &count * (max - &low);
    let shift = count * low;
    let gap = BigRational::new(BigInt::one(), lcm_denominators(phi.table()));
    let ratio = &range / &gap;
    let scale: BigInt = ratio.ceil().to_integer() + 1;
    let n = scale
        .to_u64()
        .filter(|&n| n <= MAX_SCALE)
        .ok_or_else(|| Error::BudgetExceeded(format!("repetition factor {scale}")))?;

    let mut out = Instance::new(format!("{}_nofeas", inst.name()), inst.variables().iter().cloned())?;
    for k in inst.constraints() {
        let copies = if k.function == feas { 1 } else { n };
        for _ in 0..copies {
            out.add_constraint(phi.name(), k.scope.clone())?;
        }
    }
    Ok(FeasElimination {
        instance: out,
        scale,
        gap,
        shift,
    })
}
