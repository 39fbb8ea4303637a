//! Checks the submodularity multimorphism on a language and on its dual.

use binarise::algebra::{check_fractional_polymorphism, lift_fpol_dual, FractionalPolymorphism};
use binarise::dual::dual_language;
use binarise::io::{parse_fpol, parse_language};
use binarise::random;
use binarise::Language;

fn main() -> binarise::Result<()> {
    let mut rng = random::rng(3);
    let f = random::submodular_boolean(&mut rng, 2, "f");
    let lang = Language::new("sub", f.domain().clone(), vec![f])?;
    let omega = FractionalPolymorphism::submodular(lang.domain().clone());
    println!("source: {}", check_fractional_polymorphism(&omega, &lang)?);

    let dual = dual_language(&lang)?;
    let lifted = lift_fpol_dual(&omega, &dual)?;
    println!("dual: {}", check_fractional_polymorphism(&lifted, dual.language())?);

    let rho = parse_language(include_str!("../tests/fixtures/rho.lang"))?;
    let omega = parse_fpol(include_str!("../tests/fixtures/submodular.fpol"), rho.domain())?;
    println!("rho: {}", check_fractional_polymorphism(&omega, &rho)?);
    Ok(())
}
