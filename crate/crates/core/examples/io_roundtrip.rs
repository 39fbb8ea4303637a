//! Parses every document kind and prints its canonical form.

use binarise::io::{detect_kind, parse_language, Document};

fn main() -> binarise::Result<()> {
    let lang = parse_language(include_str!("../tests/fixtures/rho.lang"))?;
    let docs = [
        include_str!("../tests/fixtures/rho.lang"),
        include_str!("../tests/fixtures/rho_xy.inst"),
        include_str!("../tests/fixtures/figure1.digraph"),
        include_str!("../tests/fixtures/submodular.fpol"),
    ];
    for text in docs {
        let doc = Document::parse(text, Some(lang.domain()))?;
        let canon = doc.serialize();
        assert_eq!(Document::parse(&canon, Some(lang.domain()))?.serialize(), canon);
        println!("{:?}: {} lines", detect_kind(text)?, canon.lines().count());
    }
    Ok(())
}
