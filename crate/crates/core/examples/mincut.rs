//! Solves a submodular Boolean instance by minimum cut and checks it exhaustively.

use binarise::random;
use binarise::solve::{mincut_solve, MinCut};
use binarise::solve::brute_force;
use binarise::{Instance, Language};

fn main() -> binarise::Result<()> {
    let mut rng = random::rng(7);
    let f = random::submodular_boolean(&mut rng, 2, "f");
    let lang = Language::new("sub", f.domain().clone(), vec![f])?;
    let mut inst = Instance::new("chain", ["a", "b", "c", "d", "e"])?;
    for pair in [["a", "b"], ["b", "c"], ["c", "d"], ["d", "e"], ["e", "a"], ["c", "a"]] {
        inst.constrain("f", &pair)?;
    }
    match mincut_solve(&lang, &inst, &[0, 1])? {
        MinCut::Solved(sol) => println!("min cut optimum {}", sol.optimum()),
        MinCut::Declined(why) => println!("declined: {why}"),
    }
    println!("exhaustive optimum {}", brute_force(&lang, &inst)?.optimum());
    Ok(())
}
