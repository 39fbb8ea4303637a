//! Builds the balanced digraph for the two-label language `rho` and prints it.

use binarise::catalog;
use binarise::digraph::build_d_gamma_for;
use binarise::io::serialize_digraph;

fn main() -> binarise::Result<()> {
    let ext = build_d_gamma_for(&catalog::rho_language())?;
    let g = ext.digraph();
    println!("{} vertices, {} edges, height {}", g.vertex_count(), g.edge_count(), ext.height());
    for (d, &v) in ext.base_vertices().iter().enumerate() {
        println!("base {d} is vertex {} at level {}", g.vertex(v).id, ext.level(v));
    }
    print!("{}", serialize_digraph(g));
    Ok(())
}
