//! Enumerates binary polymorphisms of a language and lifts them to its dual.

use binarise::algebra::enumerate_polymorphisms;
use binarise::algebra::{lift_is_faithful, lift_pol_dual};
use binarise::catalog;
use binarise::dual::dual_language;
use binarise::io::serialize_operations;

fn main() -> binarise::Result<()> {
    let lang = catalog::rho_language();
    let pols = enumerate_polymorphisms(&lang, 2)?;
    println!("# {} binary polymorphisms", pols.len());
    print!("{}", serialize_operations(&pols));

    let dual = dual_language(&lang)?;
    println!("lift is injective: {}", lift_is_faithful(&dual));
    let lifted = pols.iter().map(|f| lift_pol_dual(f, &dual)).collect::<binarise::Result<Vec<_>>>()?;
    let dual_pols = enumerate_polymorphisms(dual.language(), 2)?;
    println!("lifted {} operations, dual has {} binary polymorphisms", lifted.len(), dual_pols.len());
    Ok(())
}
