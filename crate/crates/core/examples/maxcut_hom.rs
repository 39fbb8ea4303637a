//! Minimum-cost homomorphism between the two Max-Cut gadget digraphs.

use binarise::io::parse_digraph;
use binarise::solve::{min_cost_hom, uniform_costs};

fn main() -> binarise::Result<()> {
    let source = parse_digraph(include_str!("../tests/fixtures/maxcut_source.digraph"))?;
    let target = parse_digraph(include_str!("../tests/fixtures/maxcut_target.digraph"))?;
    let sol = min_cost_hom(&source, &target, &uniform_costs(&source, &target))?;
    println!("optimum {}", sol.optimum());
    if let Some(h) = sol.assignment() {
        for (v, &t) in h.0.iter().enumerate() {
            let (sv, tv) = (source.vertex(v), target.vertex(t));
            if sv.label.is_some() {
                println!("{} -> {}", sv.id, tv.id);
            }
        }
    }
    Ok(())
}
