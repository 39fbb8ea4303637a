//! Evaluates height-one identities and named families on concrete operations.

use std::collections::BTreeMap;

use binarise::algebra::{check_identity, named_identity, Family, Identity};
use binarise::algebra::Operation;
use binarise::model::Domain;

fn main() -> binarise::Result<()> {
    let d = Domain::range(3);
    let interp = BTreeMap::from([
        ("min".to_string(), Operation::min(d.clone(), 2)),
        ("max".to_string(), Operation::max(d.clone(), 2)),
    ]);
    for line in include_str!("../tests/fixtures/lattice.identities").lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let idt: Identity = line.parse()?;
        println!("{idt}: {}", check_identity(&idt, &interp)?);
    }
    let majority = Operation::from_fn(d.clone(), 3, |t| if t[1] == t[2] { t[1] } else { t[0] });
    for family in Family::ALL {
        println!("majority is {family}: {}", named_identity(&majority, family)?);
    }
    Ok(())
}
