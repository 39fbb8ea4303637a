//! Decides whether languages are rigid cores, directly and through the digraph.

use binarise::algebra::{ext_is_rigid_core, ext_unary_polymorphisms};
use binarise::algebra::is_rigid_core;
use binarise::catalog;
use binarise::digraph::build_d_gamma_for;

fn main() -> binarise::Result<()> {
    for lang in [catalog::rho_language(), catalog::phi_eq_language(2)] {
        let ext = build_d_gamma_for(&lang)?;
        println!(
            "{}: rigid core {}, digraph rigid core {}, {} endomorphisms",
            lang.name(),
            is_rigid_core(&lang)?,
            ext_is_rigid_core(&ext)?,
            ext_unary_polymorphisms(&ext)?.len()
        );
    }
    Ok(())
}
