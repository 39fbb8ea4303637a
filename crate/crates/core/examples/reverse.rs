//! Encodes an instance as a digraph homomorphism problem and reduces it back.

use binarise::catalog;
use binarise::combine::combine_language;
use binarise::digraph::build_d_gamma;
use binarise::dual::{eliminate_feas, DualLanguage};
use binarise::extdual::{ext_optimum, extdual_instance, reverse_reduce, ReverseVerdict};
use binarise::solve::brute_force;
use binarise::Instance;

fn main() -> binarise::Result<()> {
    let lang = catalog::phi_sum_language();
    let mut inst = Instance::new("pair", ["x", "y", "z", "w"])?;
    inst.constrain("phi_sum", &["x", "y", "z"])?;
    inst.constrain("phi_sum", &["z", "y", "w"])?;
    println!("source optimum {}", brute_force(&lang, &inst)?.optimum());

    let c = combine_language(&lang)?;
    let (ic, offset) = c.instance_to_combined(&inst)?;
    let ext = build_d_gamma(&c)?;
    let ie = extdual_instance(&ext, &ic)?;
    println!(
        "extended instance: {} variables, optimum {} (offset {offset})",
        ie.instance.num_variables(),
        ext_optimum(&ext, &ie.instance)?.optimum()
    );

    let dual = DualLanguage::new(c.clone())?;
    match reverse_reduce(&ext, &dual, &ie.instance)? {
        ReverseVerdict::Infeasible(why) => println!("infeasible: {why}"),
        ReverseVerdict::SolvedDirectly { optimum, .. } => println!("solved directly: {optimum}"),
        ReverseVerdict::DualInstance(rd) => {
            let opt = brute_force(dual.language(), &rd.instance)?.optimum();
            println!("reduced dual optimum {}", rd.optimum(&opt));
            let u = dual.undual_instance(&rd.instance)?;
            let e = eliminate_feas(&c, &u.instance)?;
            let opt = brute_force(c.language(), &e.instance)?.optimum();
            println!("after undual and feasibility elimination {}", rd.optimum(&e.recover(&opt)));
        }
    }
    Ok(())
}
