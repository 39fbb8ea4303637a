mod common;

use binarise::cli::{verify_pipeline, Oracle, Stage};
use binarise::combine::combine_language;
use binarise::digraph::build_d_gamma;
use binarise::dual::{eliminate_feas, DualLanguage};
use binarise::extdual::{extdual_instance, reverse_reduce, ReverseVerdict};
use binarise::random;
use binarise::solve::brute_force;
use binarise::{Instance, Language};
use common::{brute_opt, evaluate};
use proptest::prelude::*;

fn arb_case() -> impl Strategy<Value = (Language, Instance)> {
    any::<u64>().prop_map(|seed| {
        let mut rng = random::rng(seed);
        let lang = random::language(&mut rng, &random::LanguageParams::default());
        let inst = random::instance(&mut rng, &lang, 4, 4);
        (lang, inst)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Every stage of the pipeline normalises to the oracle's optimum.
    #[test]
    fn every_stage_has_the_source_optimum((lang, inst) in arb_case()) {
        let report = verify_pipeline(&lang, &inst, &Stage::ALL, Oracle::Brute).unwrap();
        prop_assert_eq!(&report.source_optimum, &brute_opt(&lang, &inst));
        prop_assert!(report.passed(), "{}", report);
    }

    /// The reverse reduction's dual instance decodes to an assignment of
    /// the extended instance with the claimed value.
    #[test]
    fn reverse_decoding_attains_the_optimum((lang, inst) in arb_case()) {
        let c = combine_language(&lang).unwrap();
        let (ic, _) = c.instance_to_combined(&inst).unwrap();
        let ext = build_d_gamma(&c).unwrap();
        let dual = DualLanguage::new(c.clone()).unwrap();
        let ie = extdual_instance(&ext, &ic).unwrap();
        let gamma_e = ext.language();
        match reverse_reduce(&ext, &dual, &ie.instance).unwrap() {
            ReverseVerdict::Infeasible(_) => prop_assert!(brute_opt(&c.language().clone(), &ic).is_infinite()),
            ReverseVerdict::SolvedDirectly { optimum, assignment, .. } => {
                prop_assert_eq!(evaluate(&gamma_e, &ie.instance, &assignment.0), optimum);
            }
            ReverseVerdict::DualInstance(rd) => {
                let sol = brute_force(dual.language(), &rd.instance).unwrap();
                if let Some(a) = sol.assignment() {
                    let lifted = rd.decode(&ext, &dual, a).unwrap();
                    prop_assert_eq!(evaluate(&gamma_e, &ie.instance, &lifted.0), rd.optimum(&sol.optimum()));
                }
            }
        }
    }

    /// Feasibility elimination keeps feasibility and recovers the optimum.
    #[test]
    fn feasibility_elimination_recovers((lang, inst) in arb_case(), mask in any::<u8>()) {
        let c = combine_language(&lang).unwrap();
        let (ic, _) = c.instance_to_combined(&inst).unwrap();
        let mut j = Instance::new("j", ic.variables().iter().cloned()).unwrap();
        for (i, k) in ic.constraints().iter().enumerate() {
            let f = if mask >> (i % 8) & 1 == 1 { c.feas_name() } else { k.function.clone() };
            j.add_constraint(f, k.scope.clone()).unwrap();
        }
        let e = eliminate_feas(&c, &j).unwrap();
        let opt_j = brute_opt(&c.language_with_feas(), &j);
        let opt_e = brute_opt(c.language(), &e.instance);
        prop_assert_eq!(opt_j.is_infinite(), opt_e.is_infinite());
        prop_assert_eq!(e.recover(&opt_e), opt_j);
    }
}
