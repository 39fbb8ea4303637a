//! Folding a finite language into one cost function over disjoint coordinate blocks.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{CostFunction, Instance, Language};
use crate::value::ExtValue;

/// Name given to the combined function when the language has several members.
pub const COMBINED_NAME: &str = "phi_gamma";

/// Coordinate block of one original function inside the combined tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub function: String,
    pub offset: usize,
    pub arity: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.arity
    }
}

/// A language `Γ` together with its single combined function `φ_Γ`.
#[derive(Clone, Debug)]
pub struct CombinedLanguage {
    source: Language,
    phi: CostFunction,
    single: Language,
    layout: Vec<Block>,
    block_minima: Vec<BigRational>,
}

pub fn combine_language(gamma: &Language) -> Result<CombinedLanguage> {
    let functions = gamma.functions();
    if functions.is_empty() {
        return Err(Error::EmptyLanguage);
    }
    let mut layout = Vec::with_capacity(functions.len());
    let mut offset = 0;
    for f in functions {
        layout.push(Block {
            function: f.name().to_string(),
            offset,
            arity: f.arity(),
        });
        offset += f.arity();
    }
    let block_minima = functions
        .iter()
        .map(|f| f.finite_min().ok_or_else(|| Error::InfiniteFunction(f.name().to_string())))
        .collect::<Result<Vec<_>>>()?;

    let phi = if functions.len() == 1 {
        functions[0].clone()
    } else {
        CostFunction::from_fn(COMBINED_NAME, gamma.domain().clone(), offset, |t| {
            let mut total = ExtValue::zero();
            for (f, b) in functions.iter().zip(&layout) {
                total += f.value(&t[b.range()]);
                if total.is_infinite() {
                    break;
                }
            }
            total
        })
    };
    let single = Language::new(phi.name(), gamma.domain().clone(), vec![phi.clone()])?;
    Ok(CombinedLanguage {
        source: gamma.clone(),
        phi,
        single,
        layout,
        block_minima,
    })
}

impl CombinedLanguage {
    /// Rebuilds the combined view from a language holding exactly one function.
    pub fn from_single(lang: &Language) -> Result<Self> {
        if lang.functions().len() != 1 {
            return Err(Error::WrongLanguage(format!(
                "expected a single cost function, found {}",
                lang.functions().len()
            )));
        }
        combine_language(lang)
    }

    pub fn source(&self) -> &Language {
        &self.source
    }

    pub fn phi_gamma(&self) -> &CostFunction {
        &self.phi
    }

    /// `{φ_Γ}` as a language.
    pub fn language(&self) -> &Language {
        &self.single
    }

    pub fn layout(&self) -> &[Block] {
        &self.layout
    }

    pub fn block_minima(&self) -> &[BigRational] {
        &self.block_minima
    }

    pub fn arity(&self) -> usize {
        self.phi.arity()
    }

    /// Name of the crisp relation `Feas(φ_Γ)` when it appears next to `φ_Γ`.
    pub fn feas_name(&self) -> String {
        format!("feas_{}", self.phi.name())
    }

    /// `{φ_Γ, Feas(φ_Γ)}`.
    pub fn language_with_feas(&self) -> Language {
        Language::new(
            format!("{}_feas", self.phi.name()),
            self.phi.domain().clone(),
            vec![self.phi.clone(), self.phi.feas().renamed(self.feas_name())],
        )
        .expect("φ_Γ is not identically infinite")
    }

    /// Pads each constraint of `inst` into a `φ_Γ` constraint. Returns the new
    /// instance and the offset with `opt(new) = opt(inst) + offset`.
    pub fn instance_to_combined(&self, inst: &Instance) -> Result<(Instance, BigRational)> {
        inst.check(&self.source)?;
        if self.layout.len() == 1 {
            return Ok((inst.clone(), BigRational::zero()));
        }
        let mut out = Instance::new(inst.name(), inst.variables().iter().cloned())?;
        let mut offset = BigRational::zero();
        for (ci, c) in inst.constraints().iter().enumerate() {
            let bi = self
                .layout
                .iter()
                .position(|b| b.function == c.function)
                .ok_or_else(|| Error::UnknownFunction(c.function.clone()))?;
            let mut scope = Vec::with_capacity(self.arity());
            let mut pad = 0;
            for (j, b) in self.layout.iter().enumerate() {
                if j == bi {
                    scope.extend_from_slice(&c.scope);
                    continue;
                }
                offset += &self.block_minima[j];
                for _ in 0..b.arity {
                    pad += 1;
                    scope.push(out.add_variable(format!("_pad{}_{}", ci + 1, pad))?);
                }
            }
            out.add_constraint(self.phi.name(), scope)?;
        }
        Ok((out, offset))
    }

    /// Splits every `φ_Γ` constraint into one constraint per block.
    pub fn instance_from_combined(&self, inst: &Instance) -> Result<Instance> {
        let mut out = Instance::new(inst.name(), inst.variables().iter().cloned())?;
        for c in inst.constraints() {
            if c.function != self.phi.name() {
                return Err(Error::UnknownFunction(c.function.clone()));
            }
            if c.scope.len() != self.arity() {
                return Err(Error::ArityMismatch {
                    expected: self.arity(),
                    found: c.scope.len(),
                });
            }
            for b in &self.layout {
                out.add_constraint(b.function.clone(), c.scope[b.range()].to_vec())?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::random;
    use crate::model::{all_tuples, eval_instance, Assignment, Domain};
    use crate::solve::brute_force;
    use proptest::prelude::*;

    #[test]
    fn single_function_is_kept() {
        let c = combine_language(&catalog::rho_language()).unwrap();
        assert_eq!(c.phi_gamma(), &catalog::rho());
        assert_eq!(
            c.layout(),
            &[Block {
                function: "rho".into(),
                offset: 0,
                arity: 2
            }]
        );
        let c = combine_language(&catalog::phi_sum_language()).unwrap();
        assert_eq!(c.phi_gamma(), &catalog::phi_sum());
    }

    #[test]
    fn two_functions_sum_blockwise() {
        let c = combine_language(&catalog::u_rho_language()).unwrap();
        assert_eq!(c.arity(), 3);
        assert_eq!(c.phi_gamma().value(&[0, 0, 1]), &ExtValue::int(2));
        assert_eq!(c.phi_gamma().value(&[1, 1, 0]), &ExtValue::int(6));
        assert!(c.phi_gamma().value(&[0, 1, 1]).is_infinite());
    }

    #[test]
    fn padding_and_offsets() {
        let lang = catalog::u_rho_language();
        let c = combine_language(&lang).unwrap();

        let mut inst = Instance::new("i", ["x", "y"]).unwrap();
        inst.constrain("rho", &["x", "y"]).unwrap();
        let (out, offset) = c.instance_to_combined(&inst).unwrap();
        assert_eq!(offset, BigRational::zero());
        assert_eq!(out.variables(), &["x", "y", "_pad1_1"]);
        assert_eq!(out.constraints()[0].scope, vec![2, 0, 1]);

        let mut inst = Instance::new("i", ["x"]).unwrap();
        inst.constrain("u", &["x"]).unwrap();
        let (out, offset) = c.instance_to_combined(&inst).unwrap();
        assert_eq!(offset, BigRational::from_integer(1.into()));
        assert_eq!(out.constraints()[0].scope, vec![0, 1, 2]);
    }

    #[test]
    fn split_slices_blocks() {
        let c = combine_language(&catalog::u_rho_language()).unwrap();
        let mut inst = Instance::new("i", ["a", "b", "c"]).unwrap();
        inst.constrain(COMBINED_NAME, &["a", "b", "c"]).unwrap();
        let split = c.instance_from_combined(&inst).unwrap();
        let got: Vec<_> = split
            .constraints()
            .iter()
            .map(|k| (k.function.as_str(), k.scope.clone()))
            .collect();
        assert_eq!(got, vec![("u", vec![0]), ("rho", vec![1, 2])]);

        let mut bad = Instance::new("i", ["a"]).unwrap();
        bad.constrain("u", &["a"]).unwrap();
        assert!(matches!(
            c.instance_from_combined(&bad),
            Err(Error::UnknownFunction(_))
        ));
    }

    #[test]
    fn empty_language_rejected() {
        let l = Language::new("e", Domain::range(2), vec![]).unwrap();
        assert!(matches!(combine_language(&l), Err(Error::EmptyLanguage)));
    }

    fn arb_case() -> impl Strategy<Value = (Language, Instance)> {
        any::<u64>().prop_map(|seed| {
            let mut rng = random::rng(seed);
            let params = random::LanguageParams {
                max_functions: 2,
                max_total_arity: 3,
                ..random::LanguageParams::default()
            };
            let lang = random::language(&mut rng, &params);
            let inst = random::instance(&mut rng, &lang, 3, 3);
            (lang, inst)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn combined_table_is_blockwise_sum((lang, _) in arb_case()) {
            let c = combine_language(&lang).unwrap();
            let d = lang.domain().size();
            for t in all_tuples(d, c.arity()) {
                let expected: ExtValue = lang
                    .functions()
                    .iter()
                    .zip(c.layout())
                    .map(|(f, b)| f.value(&t[b.range()]).clone())
                    .sum();
                prop_assert_eq!(c.phi_gamma().value(&t), &expected);
            }
        }

        #[test]
        fn offset_shifts_optimum((lang, inst) in arb_case()) {
            let c = combine_language(&lang).unwrap();
            let (padded, offset) = c.instance_to_combined(&inst).unwrap();
            let a = brute_force(&lang, &inst).unwrap();
            let b = brute_force(c.language(), &padded).unwrap();
            prop_assert_eq!(a.optimum() + ExtValue::from(offset.clone()), b.optimum());
            if let Some(best) = b.assignment() {
                let restricted = Assignment(best.0[..inst.num_variables()].to_vec());
                prop_assert_eq!(eval_instance(&lang, &inst, &restricted).unwrap(), a.optimum());
            }
        }

        #[test]
        fn split_preserves_objective((lang, inst) in arb_case()) {
            let c = combine_language(&lang).unwrap();
            let (padded, _) = c.instance_to_combined(&inst).unwrap();
            let split = c.instance_from_combined(&padded).unwrap();
            for t in all_tuples(lang.domain().size(), padded.num_variables()) {
                let a = Assignment(t);
                prop_assert_eq!(
                    eval_instance(c.language(), &padded, &a).unwrap(),
                    eval_instance(&lang, &split, &a).unwrap()
                );
            }
        }
    }
}
