//! Runs every reduction stage on random instances and compares optima.

use binarise::cli::{verify_pipeline, Oracle, Stage};
use binarise::random;

fn main() -> binarise::Result<()> {
    let mut rng = random::rng(11);
    for case in 0..5 {
        let lang = random::language(&mut rng, &random::LanguageParams::default());
        let inst = random::instance(&mut rng, &lang, 4, 3);
        let report = verify_pipeline(&lang, &inst, &Stage::ALL, Oracle::Brute)?;
        println!("case {case}:");
        println!("{report}");
    }
    Ok(())
}
