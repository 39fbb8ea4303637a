//! Merges a two-function language into one cost function and translates an instance.

use binarise::combine::combine_language;
use binarise::io::{parse_instance_for, parse_language, serialize_instance, serialize_language};
use binarise::solve::brute_force;

const LANG: &str = "\
language pair
domain a b
function unary arity 1
  a : 1
  b : 0
end
function neq arity 2
  a a : inf
  b b : inf
  default : 0
end
";

const INST: &str = "\
instance path
vars x y z
constraint neq x y
constraint neq y z
constraint unary x
";

fn main() -> binarise::Result<()> {
    let lang = parse_language(LANG)?;
    let inst = parse_instance_for(INST, &lang)?;
    let c = combine_language(&lang)?;
    print!("{}", serialize_language(c.language()));
    for b in c.layout() {
        println!("block {} at {} arity {}", b.function, b.offset, b.arity);
    }
    let (ic, offset) = c.instance_to_combined(&inst)?;
    print!("{}", serialize_instance(&ic));
    let source = brute_force(&lang, &inst)?.optimum();
    let combined = brute_force(c.language(), &ic)?.optimum();
    println!("source optimum {source}, combined optimum {combined}, offset {offset}");
    Ok(())
}
