//! Builds the binary dual of a ternary language and solves a dual instance.

use binarise::catalog;
use binarise::combine::CombinedLanguage;
use binarise::dual::DualLanguage;
use binarise::solve::brute_force;
use binarise::Instance;

fn main() -> binarise::Result<()> {
    let lang = catalog::phi_sum_language();
    let dual = DualLanguage::new(CombinedLanguage::from_single(&lang)?)?;
    println!(
        "dual domain has {} labels, {} binary functions",
        dual.d_prime().size(),
        dual.language().functions().len()
    );

    let mut inst = Instance::new("pair", ["x", "y", "z", "w"])?;
    inst.constrain("phi_sum", &["x", "y", "z"])?;
    inst.constrain("phi_sum", &["z", "y", "w"])?;
    let (ic, offset) = dual.combined().instance_to_combined(&inst)?;
    let di = dual.dual_instance(&ic)?;
    let sol = brute_force(dual.language(), &di.instance)?;
    println!("dual instance: {} variables, {} constraints", di.instance.num_variables(), di.instance.constraints().len());
    println!("dual optimum {} (offset {offset})", sol.optimum());
    if let Some(a) = sol.assignment() {
        let decoded = di.decode(&dual, a);
        let labels: Vec<_> = decoded.0.iter().map(|&d| lang.domain().label(d)).collect();
        println!("decoded assignment {labels:?}");
    }
    Ok(())
}
