//! Line-oriented text formats for languages, instances, digraphs,
//! operations, fractional polymorphisms and solutions, plus sidecar files.
//!
//! `#` starts a comment. Every parser reports the 1-based line of the
//! first problem it meets.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_rational::BigRational;

use crate::algebra::{FractionalPolymorphism, Operation};
use crate::combine::Block;
use crate::digraph::{LeveledDigraph, Vertex};
use crate::error::{Error, Result};
use crate::model::{all_tuples, tuple_index, Assignment, CostFunction, Domain, Instance, Language};
use crate::solve::Solution;
use crate::value::ExtValue;

/// Non-empty lines split into tokens, with comments removed.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn at(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::parse(line, other.to_string()),
    }
}

fn value(line: usize, token: &str) -> Result<ExtValue> {
    token.parse().map_err(|e| at(line, e))
}

fn number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("expected {what}, found `{token}`")))
}

fn expect_header<'a>(tokens: &[&'a str], line: usize, keyword: &str) -> Result<&'a str> {
    match tokens {
        [k, name] if *k == keyword => Ok(name),
        _ => Err(Error::parse(line, format!("expected `{keyword} <name>`"))),
    }
}

/// Splits `<labels> : <rhs>` into label indices and the right-hand token.
fn entry<'a>(tokens: &[&'a str], line: usize, domain: &Domain, arity: usize) -> Result<(Vec<usize>, &'a str)> {
    match tokens {
        [labels @ .., ":", rhs] => {
            if labels.len() != arity {
                return Err(Error::parse(
                    line,
                    format!("tuple has {} labels, expected {arity}", labels.len()),
                ));
            }
            let tuple = labels
                .iter()
                .map(|l| domain.index_of(l).map_err(|e| at(line, e)))
                .collect::<Result<Vec<_>>>()?;
            Ok((tuple, rhs))
        }
        _ => Err(Error::parse(line, "expected `<labels> : <value>`")),
    }
}

pub fn parse_language(text: &str) -> Result<Language> {
    let mut it = lines(text);
    let (line, tokens) = it.next().ok_or_else(|| Error::parse(1, "empty language file"))?;
    let name = expect_header(&tokens, line, "language")?.to_string();
    let (line, tokens) = it.next().ok_or_else(|| Error::parse(line, "missing `domain` line"))?;
    if tokens[0] != "domain" {
        return Err(Error::parse(line, "expected `domain <label> ...`"));
    }
    let domain = Domain::new(tokens[1..].iter().copied()).map_err(|e| at(line, e))?;
    let mut functions = Vec::new();
    while let Some((line, tokens)) = it.next() {
        let (fname, arity) = match tokens.as_slice() {
            ["function", fname, "arity", m] => (fname.to_string(), number::<usize>(line, m, "an arity")?),
            _ => return Err(Error::parse(line, "expected `function <name> arity <m>`")),
        };
        if arity == 0 {
            return Err(Error::parse(line, "arity must be at least 1"));
        }
        let size = domain.power(arity);
        let mut table: Vec<Option<ExtValue>> = vec![None; size];
        let mut default = None;
        let mut closed = false;
        for (line, tokens) in it.by_ref() {
            match tokens.as_slice() {
                ["end"] => {
                    closed = true;
                    break;
                }
                ["default", ":", v] => {
                    if default.replace(value(line, v)?).is_some() {
                        return Err(Error::parse(line, "repeated `default`"));
                    }
                }
                _ => {
                    let (tuple, v) = entry(&tokens, line, &domain, arity)?;
                    let slot = &mut table[tuple_index(&tuple, domain.size())];
                    if slot.replace(value(line, v)?).is_some() {
                        return Err(Error::parse(line, format!("tuple listed twice in `{fname}`")));
                    }
                }
            }
        }
        if !closed {
            return Err(Error::parse(line, format!("function `{fname}` has no `end`")));
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.or_else(|| default.clone()).ok_or_else(|| {
                    let labels: Vec<&str> = crate::model::tuple_at(i, domain.size(), arity)
                        .into_iter()
                        .map(|x| domain.label(x))
                        .collect();
                    Error::parse(line, format!("`{fname}` misses tuple {} and has no default", labels.join(" ")))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        functions.push(CostFunction::new(fname, domain.clone(), arity, table).map_err(|e| at(line, e))?);
    }
    Language::new(name, domain, functions)
}

/// Canonical form: tuples in lexicographic order, `default : inf` when some
/// entry is infinite and then only finite entries listed.
pub fn serialize_language(lang: &Language) -> String {
    let mut s = String::new();
    let d = lang.domain();
    writeln!(s, "language {}", lang.name()).unwrap();
    writeln!(s, "domain {}", d.labels().join(" ")).unwrap();
    for f in lang.functions() {
        writeln!(s, "function {} arity {}", f.name(), f.arity()).unwrap();
        let sparse = f.table().iter().any(ExtValue::is_infinite);
        for (t, v) in all_tuples(d.size(), f.arity()).zip(f.table()) {
            if sparse && v.is_infinite() {
                continue;
            }
            let labels: Vec<&str> = t.iter().map(|&x| d.label(x)).collect();
            writeln!(s, "  {} : {v}", labels.join(" ")).unwrap();
        }
        if sparse {
            writeln!(s, "  default : inf").unwrap();
        }
        writeln!(s, "end").unwrap();
    }
    s
}

/// Parses an instance without checking it against a language.
pub fn parse_instance(text: &str) -> Result<Instance> {
    parse_instance_inner(text, None)
}

/// Parses an instance, rejecting unknown functions and scope arity mismatches.
pub fn parse_instance_for(text: &str, lang: &Language) -> Result<Instance> {
    parse_instance_inner(text, Some(lang))
}

fn parse_instance_inner(text: &str, lang: Option<&Language>) -> Result<Instance> {
    let mut it = lines(text);
    let (line, tokens) = it.next().ok_or_else(|| Error::parse(1, "empty instance file"))?;
    let name = expect_header(&tokens, line, "instance")?;
    let mut inst = Instance::new(name, Vec::<String>::new())?;
    for (line, tokens) in it {
        match tokens.as_slice() {
            ["vars", vars @ ..] => {
                for v in vars {
                    inst.add_variable(*v).map_err(|e| at(line, e))?;
                }
            }
            ["constraint", f, scope @ ..] => {
                if scope.is_empty() {
                    return Err(Error::parse(line, "constraint has an empty scope"));
                }
                if let Some(lang) = lang {
                    let fun = lang.function(f).map_err(|e| at(line, e))?;
                    if fun.arity() != scope.len() {
                        return Err(at(
                            line,
                            Error::ArityMismatch {
                                expected: fun.arity(),
                                found: scope.len(),
                            },
                        ));
                    }
                }
                inst.constrain(f, scope).map_err(|e| at(line, e))?;
            }
            _ => return Err(Error::parse(line, "expected `vars ...` or `constraint <f> <v>...`")),
        }
    }
    Ok(inst)
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut s = String::new();
    writeln!(s, "instance {}", inst.name()).unwrap();
    if inst.num_variables() > 0 {
        writeln!(s, "vars {}", inst.variables().join(" ")).unwrap();
    }
    for c in inst.constraints() {
        let scope: Vec<&str> = c.scope.iter().map(|&v| inst.variables()[v].as_str()).collect();
        writeln!(s, "constraint {} {}", c.function, scope.join(" ")).unwrap();
    }
    s
}

pub fn parse_digraph(text: &str) -> Result<LeveledDigraph> {
    let mut it = lines(text);
    let (line, tokens) = it.next().ok_or_else(|| Error::parse(1, "empty digraph file"))?;
    let mut g = LeveledDigraph::new(expect_header(&tokens, line, "digraph")?);
    for (line, tokens) in it {
        match tokens.as_slice() {
            ["vertex", id, "level", level, "role", role, rest @ ..] => {
                let mut vertex = Vertex {
                    id: id.to_string(),
                    role: role.parse().map_err(|e| at(line, e))?,
                    level: number(line, level, "a level")?,
                    label: None,
                    cost: None,
                };
                let mut rest = rest;
                loop {
                    match rest {
                        [] => break,
                        ["label", text, tail @ ..] if vertex.label.is_none() => {
                            vertex.label = Some(text.to_string());
                            rest = tail;
                        }
                        ["cost", v, tail @ ..] if vertex.cost.is_none() => {
                            vertex.cost = Some(value(line, v)?);
                            rest = tail;
                        }
                        _ => return Err(Error::parse(line, "expected `[label <text>] [cost <value>]`")),
                    }
                }
                g.add_vertex(vertex).map_err(|e| at(line, e))?;
            }
            ["edge", a, b] => g.add_edge_by_id(a, b).map_err(|e| at(line, e))?,
            _ => return Err(Error::parse(line, "expected a `vertex` or `edge` line")),
        }
    }
    Ok(g)
}

pub fn serialize_digraph(g: &LeveledDigraph) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {}", g.name()).unwrap();
    for v in g.vertices() {
        write!(s, "vertex {} level {} role {}", v.id, v.level, v.role).unwrap();
        if let Some(l) = &v.label {
            write!(s, " label {l}").unwrap();
        }
        if let Some(c) = &v.cost {
            write!(s, " cost {c}").unwrap();
        }
        s.push('\n');
    }
    for &(a, b) in g.edges() {
        writeln!(s, "edge {} {}", g.vertex(a).id, g.vertex(b).id).unwrap();
    }
    s
}

/// Operation blocks over `domain`, in file order; stops at an `fpol` line,
/// whose line number is returned.
fn operation_blocks<'a>(
    it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    domain: &Domain,
) -> Result<(Vec<Operation>, Option<usize>)> {
    let mut out: Vec<Operation> = Vec::new();
    while let Some((line, tokens)) = it.next() {
        let (name, k) = match tokens.as_slice() {
            ["operation", name, "arity", k] => (name.to_string(), number::<usize>(line, k, "an arity")?),
            ["fpol"] => return Ok((out, Some(line))),
            _ => return Err(Error::parse(line, "expected `operation <name> arity <k>`")),
        };
        if k == 0 {
            return Err(Error::parse(line, "arity must be at least 1"));
        }
        if out.iter().any(|f| f.name() == Some(name.as_str())) {
            return Err(Error::parse(line, format!("operation `{name}` defined twice")));
        }
        let mut table: Vec<Option<usize>> = vec![None; domain.power(k)];
        let mut closed = false;
        for (line, tokens) in it.by_ref() {
            if tokens.as_slice() == ["end"] {
                closed = true;
                break;
            }
            let (tuple, rhs) = entry(&tokens, line, domain, k)?;
            let image = domain.index_of(rhs).map_err(|e| at(line, e))?;
            if table[tuple_index(&tuple, domain.size())].replace(image).is_some() {
                return Err(Error::parse(line, format!("tuple listed twice in `{name}`")));
            }
        }
        if !closed {
            return Err(Error::parse(line, format!("operation `{name}` has no `end`")));
        }
        let table = table
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::parse(line, format!("operation `{name}` is not total")))?;
        out.push(Operation::new(domain.clone(), k, table)?.named(name));
    }
    Ok((out, None))
}

pub fn parse_operations(text: &str, domain: &Domain) -> Result<Vec<Operation>> {
    match operation_blocks(&mut lines(text), domain)? {
        (ops, None) => Ok(ops),
        (_, Some(line)) => Err(Error::parse(line, "unexpected `fpol` section")),
    }
}

pub fn parse_operation(text: &str, domain: &Domain) -> Result<Operation> {
    let mut ops = parse_operations(text, domain)?;
    if ops.len() != 1 {
        return Err(Error::parse(1, format!("expected one operation, found {}", ops.len())));
    }
    Ok(ops.remove(0))
}

fn operation_name(f: &Operation, fallback: usize) -> String {
    f.name().map_or_else(|| format!("f{fallback}"), str::to_string)
}

fn write_operation(s: &mut String, f: &Operation, name: &str) {
    let d = f.domain();
    writeln!(s, "operation {name} arity {}", f.arity()).unwrap();
    for (t, &v) in all_tuples(d.size(), f.arity()).zip(f.table()) {
        let labels: Vec<&str> = t.iter().map(|&x| d.label(x)).collect();
        writeln!(s, "  {} : {}", labels.join(" "), d.label(v)).unwrap();
    }
    writeln!(s, "end").unwrap();
}

/// Unnamed operations are written as `f1`, `f2`, ... by position.
pub fn serialize_operations(ops: &[Operation]) -> String {
    let mut s = String::new();
    for (i, f) in ops.iter().enumerate() {
        write_operation(&mut s, f, &operation_name(f, i + 1));
    }
    s
}

/// Operation blocks followed by an `fpol` section of `weight <value> operation <name>` lines.
pub fn parse_fpol(text: &str, domain: &Domain) -> Result<FractionalPolymorphism> {
    let mut it = lines(text);
    let (ops, header) = operation_blocks(&mut it, domain)?;
    let header = header.ok_or_else(|| Error::parse(1, "missing `fpol` section"))?;
    let by_name: HashMap<&str, &Operation> = ops.iter().filter_map(|f| Some((f.name()?, f))).collect();
    let mut entries: Vec<(Operation, BigRational)> = Vec::new();
    let mut last = header;
    for (line, tokens) in it {
        last = line;
        let (w, name) = match tokens.as_slice() {
            ["weight", w, "operation", name] => (value(line, w)?, *name),
            _ => return Err(Error::parse(line, "expected `weight <value> operation <name>`")),
        };
        let w = w
            .finite()
            .cloned()
            .ok_or_else(|| Error::parse(line, "weights must be finite"))?;
        let f = by_name
            .get(name)
            .ok_or_else(|| Error::parse(line, format!("unknown operation `{name}`")))?;
        entries.push(((*f).clone(), w));
    }
    FractionalPolymorphism::new(entries).map_err(|e| at(last, e))
}

pub fn serialize_fpol(omega: &FractionalPolymorphism) -> String {
    let mut s = String::new();
    let names: Vec<String> = omega
        .entries()
        .iter()
        .enumerate()
        .map(|(i, (f, _))| operation_name(f, i + 1))
        .collect();
    for ((f, _), name) in omega.entries().iter().zip(&names) {
        write_operation(&mut s, f, name);
    }
    writeln!(s, "fpol").unwrap();
    for ((_, w), name) in omega.entries().iter().zip(&names) {
        writeln!(s, "weight {} operation {name}", ExtValue::Finite(w.clone())).unwrap();
    }
    s
}

/// A solution file read without reference to an instance.
#[derive(Clone, Debug, PartialEq)]
pub enum SolutionDoc {
    Infeasible,
    Optimal {
        value: ExtValue,
        assignment: Vec<(String, String)>,
    },
}

impl SolutionDoc {
    pub fn from_solution(sol: &Solution, inst: &Instance, domain: &Domain) -> Self {
        match sol {
            Solution::Infeasible => SolutionDoc::Infeasible,
            Solution::Optimal { value, assignment } => SolutionDoc::Optimal {
                value: value.clone(),
                assignment: inst
                    .variables()
                    .iter()
                    .zip(&assignment.0)
                    .map(|(v, &l)| (v.clone(), domain.label(l).to_string()))
                    .collect(),
            },
        }
    }

    /// Resolves names against `inst` and `domain`; every variable must be assigned once.
    pub fn resolve(&self, inst: &Instance, domain: &Domain) -> Result<Solution> {
        match self {
            SolutionDoc::Infeasible => Ok(Solution::Infeasible),
            SolutionDoc::Optimal { value, assignment } => {
                let mut labels = vec![None; inst.num_variables()];
                for (v, l) in assignment {
                    let slot = &mut labels[inst.var(v)?];
                    if slot.replace(domain.index_of(l)?).is_some() {
                        return Err(Error::DuplicateName(v.clone()));
                    }
                }
                let labels = labels
                    .into_iter()
                    .enumerate()
                    .map(|(i, l)| l.ok_or_else(|| Error::UnknownVariable(inst.variables()[i].clone())))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Solution::Optimal {
                    value: value.clone(),
                    assignment: Assignment(labels),
                })
            }
        }
    }
}

pub fn parse_solution(text: &str) -> Result<SolutionDoc> {
    let mut it = lines(text);
    let (line, tokens) = it.next().ok_or_else(|| Error::parse(1, "empty solution file"))?;
    match tokens.as_slice() {
        ["infeasible"] => {
            if let Some((line, _)) = it.next() {
                return Err(Error::parse(line, "nothing may follow `infeasible`"));
            }
            Ok(SolutionDoc::Infeasible)
        }
        ["optimum", v] => {
            let value = value(line, v)?;
            let assignment = it
                .map(|(line, tokens)| match tokens.as_slice() {
                    ["assign", var, label] => Ok((var.to_string(), label.to_string())),
                    _ => Err(Error::parse(line, "expected `assign <var> <label>`")),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SolutionDoc::Optimal { value, assignment })
        }
        _ => Err(Error::parse(line, "expected `optimum <value>` or `infeasible`")),
    }
}

pub fn serialize_solution(doc: &SolutionDoc) -> String {
    match doc {
        SolutionDoc::Infeasible => "infeasible\n".to_string(),
        SolutionDoc::Optimal { value, assignment } => {
            let mut s = format!("optimum {value}\n");
            for (v, l) in assignment {
                writeln!(s, "assign {v} {l}").unwrap();
            }
            s
        }
    }
}

/// Layout sidecar: one `block <fname> <offset> <arity>` line per function.
pub fn serialize_layout(layout: &[Block]) -> String {
    layout
        .iter()
        .map(|b| format!("block {} {} {}\n", b.function, b.offset, b.arity))
        .collect()
}

pub fn parse_layout(text: &str) -> Result<Vec<Block>> {
    lines(text)
        .map(|(line, tokens)| match tokens.as_slice() {
            ["block", f, offset, arity] => Ok(Block {
                function: f.to_string(),
                offset: number(line, offset, "an offset")?,
                arity: number(line, arity, "an arity")?,
            }),
            _ => Err(Error::parse(line, "expected `block <fname> <offset> <arity>`")),
        })
        .collect()
}

/// Dual-variable sidecar: `(dual variable, 1-based constraint index)` per `dualvar x'i = constraint i` line.
pub fn parse_dualvar_map(text: &str) -> Result<Vec<(String, usize)>> {
    lines(text)
        .map(|(line, tokens)| match tokens.as_slice() {
            ["dualvar", x, "=", "constraint", i] => Ok((x.to_string(), number(line, i, "a constraint index")?)),
            _ => Err(Error::parse(line, "expected `dualvar <x> = constraint <i>`")),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocumentKind {
    Language,
    Instance,
    Digraph,
    Operation,
    Fpol,
    Solution,
}

/// Any of the file kinds above.
#[derive(Clone, Debug)]
pub enum Document {
    Language(Language),
    Instance(Instance),
    Digraph(LeveledDigraph),
    Operations(Vec<Operation>),
    Fpol(FractionalPolymorphism),
    Solution(SolutionDoc),
}

/// The kind of a file, read from its first keyword.
pub fn detect_kind(text: &str) -> Result<DocumentKind> {
    let (line, tokens) = lines(text).next().ok_or_else(|| Error::parse(1, "empty file"))?;
    Ok(match tokens[0] {
        "language" => DocumentKind::Language,
        "instance" => DocumentKind::Instance,
        "digraph" => DocumentKind::Digraph,
        "operation" if text.lines().any(|l| l.trim() == "fpol") => DocumentKind::Fpol,
        "operation" => DocumentKind::Operation,
        "fpol" => DocumentKind::Fpol,
        "optimum" | "infeasible" => DocumentKind::Solution,
        other => return Err(Error::parse(line, format!("unknown file kind `{other}`"))),
    })
}

impl Document {
    /// Parses any kind; operations and fractional polymorphisms need `domain`.
    pub fn parse(text: &str, domain: Option<&Domain>) -> Result<Self> {
        let need = || Error::Semantic("operations need a domain; pass a language".into());
        Ok(match detect_kind(text)? {
            DocumentKind::Language => Document::Language(parse_language(text)?),
            DocumentKind::Instance => Document::Instance(parse_instance(text)?),
            DocumentKind::Digraph => Document::Digraph(parse_digraph(text)?),
            DocumentKind::Operation => Document::Operations(parse_operations(text, domain.ok_or_else(need)?)?),
            DocumentKind::Fpol => Document::Fpol(parse_fpol(text, domain.ok_or_else(need)?)?),
            DocumentKind::Solution => Document::Solution(parse_solution(text)?),
        })
    }

    pub fn kind(&self) -> DocumentKind {
        match self {
            Document::Language(_) => DocumentKind::Language,
            Document::Instance(_) => DocumentKind::Instance,
            Document::Digraph(_) => DocumentKind::Digraph,
            Document::Operations(_) => DocumentKind::Operation,
            Document::Fpol(_) => DocumentKind::Fpol,
            Document::Solution(_) => DocumentKind::Solution,
        }
    }

    pub fn serialize(&self) -> String {
        match self {
            Document::Language(l) => serialize_language(l),
            Document::Instance(i) => serialize_instance(i),
            Document::Digraph(g) => serialize_digraph(g),
            Document::Operations(ops) => serialize_operations(ops),
            Document::Fpol(w) => serialize_fpol(w),
            Document::Solution(s) => serialize_solution(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::combine::combine_language;
    use crate::digraph::build_d_gamma_for;
    use crate::dual::DualLanguage;
    use crate::random;
    use proptest::prelude::*;

    const RHO: &str = "\
language ex1
domain 0 1
function rho arity 2   # the running example
  0 1 : 2
  1 0 : 1
  default : inf
end
";

    #[test]
    fn rho_from_text() {
        let lang = parse_language(RHO).unwrap();
        assert_eq!(lang.function("rho").unwrap(), &catalog::rho());
        assert_eq!(parse_language(&serialize_language(&lang)).unwrap(), lang);
    }

    #[test]
    fn value_tokens() {
        let text = "language l\ndomain a b\nfunction f arity 1\n a : 3/2\n b : inf\nend\n";
        let f = parse_language(text).unwrap().functions()[0].clone();
        assert_eq!(f.value(&[0]), &ExtValue::ratio(3, 2));
        assert_eq!(f.value(&[1]), &ExtValue::Infinite);
    }

    #[test]
    fn language_errors_carry_lines() {
        let cases = [
            ("language l\ndomain 0 1\nfunction f arity 2\n 0 : 1\nend\n", 4),
            ("language l\ndomain 0 1\nfunction f arity 1\n 2 : 1\nend\n", 4),
            ("language l\ndomain 0 1\nfunction f arity 1\n 0 : x\nend\n", 4),
            ("language l\ndomain 0 1\nfunction f arity 1\n 0 : 1\n 0 : 2\nend\n", 5),
            ("language l\ndomain 0 1\nfunction f arity 1\n 0 : 1\n", 3),
            ("language l\ndomain 0 1\nfunction f arity 1\n 0 : 1\nend\n", 3),
        ];
        for (text, expected) in cases {
            match parse_language(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, expected, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        let never = "language l\ndomain 0 1\nfunction f arity 1\n default : inf\nend\n";
        assert!(matches!(parse_language(never), Err(Error::InfiniteFunction(_))));
        let dup = "language l\ndomain 0 1\nfunction f arity 1\n default : 0\nend\nfunction f arity 1\n default : 0\nend\n";
        assert!(matches!(parse_language(dup), Err(Error::DuplicateName(_))));
    }

    #[test]
    fn instance_arity_is_checked() {
        let lang = catalog::rho_language();
        let text = "instance i\nvars x y\nconstraint rho x y\nconstraint rho x\n";
        assert!(matches!(parse_instance_for(text, &lang), Err(Error::Parse { line: 4, .. })));
        let unknown = "instance i\nvars x\nconstraint rho x z\n";
        assert!(matches!(parse_instance(unknown), Err(Error::Parse { line: 3, .. })));
        let ok = parse_instance_for("instance i\nvars x y\nconstraint rho y x\n", &lang).unwrap();
        assert_eq!(ok.constraints()[0].scope, vec![1, 0]);
    }

    #[test]
    fn digraph_round_trip() {
        let ext = build_d_gamma_for(&catalog::rho_language()).unwrap();
        let text = serialize_digraph(ext.digraph());
        assert_eq!(&parse_digraph(&text).unwrap(), ext.digraph());
        assert!(text.contains("role tuple label (0,1) cost 2"));
    }

    #[test]
    fn operations_and_fpol() {
        let d = Domain::range(2);
        let omega = FractionalPolymorphism::submodular(d.clone());
        let text = serialize_fpol(&omega);
        assert_eq!(parse_fpol(&text, &d).unwrap(), omega);
        assert_eq!(detect_kind(&text).unwrap(), DocumentKind::Fpol);
        let bad = text.replace("weight 1/2 operation max", "weight 1/3 operation max");
        assert!(matches!(parse_fpol(&bad, &d), Err(Error::Parse { .. })));
        let partial = "operation f arity 1\n 0 : 1\nend\n";
        assert!(parse_operation(partial, &d).is_err());
        let neg = parse_operation("operation neg arity 1\n 0 : 1\n 1 : 0\nend\n", &d).unwrap();
        assert_eq!(neg.table(), &[1, 0]);
    }

    #[test]
    fn solutions() {
        let inst = crate::io::parse_instance("instance i\nvars x y\nconstraint rho x y\n").unwrap();
        let d = Domain::range(2);
        let sol = Solution::Optimal {
            value: ExtValue::int(1),
            assignment: Assignment(vec![1, 0]),
        };
        let doc = SolutionDoc::from_solution(&sol, &inst, &d);
        let text = serialize_solution(&doc);
        assert_eq!(text, "optimum 1\nassign x 1\nassign y 0\n");
        assert_eq!(parse_solution(&text).unwrap().resolve(&inst, &d).unwrap(), sol);
        assert_eq!(parse_solution("infeasible\n").unwrap(), SolutionDoc::Infeasible);
        assert!(parse_solution("optimum 1\nassign x 1\n").unwrap().resolve(&inst, &d).is_err());
    }

    #[test]
    fn sidecars() {
        let c = combine_language(&catalog::u_rho_language()).unwrap();
        let text = serialize_layout(c.layout());
        assert_eq!(text, "block u 0 1\nblock rho 1 2\n");
        assert_eq!(parse_layout(&text).unwrap(), c.layout());
        let dual = DualLanguage::new(c).unwrap();
        let mut inst = Instance::new("i", ["a", "b", "c"]).unwrap();
        inst.constrain("phi_gamma", &["a", "b", "c"]).unwrap();
        let di = dual.dual_instance(&inst).unwrap();
        let map = parse_dualvar_map(&di.map_lines()).unwrap();
        assert_eq!(map, vec![("x'1".to_string(), 1)]);
    }

    #[test]
    fn dual_language_round_trip() {
        let dual = DualLanguage::new(combine_language(&catalog::phi_sum_language()).unwrap()).unwrap();
        let text = serialize_language(dual.language());
        assert_eq!(&parse_language(&text).unwrap(), dual.language());
    }

    fn arb_instance() -> impl Strategy<Value = (Language, Instance)> {
        any::<u64>().prop_map(|seed| {
            let mut rng = random::rng(seed);
            let lang = random::language(&mut rng, &random::LanguageParams::default());
            let inst = random::instance(&mut rng, &lang, 4, 4);
            (lang, inst)
        })
    }

    proptest! {
        #[test]
        fn language_and_instance_round_trip((lang, inst) in arb_instance()) {
            let text = serialize_language(&lang);
            prop_assert_eq!(parse_language(&text).unwrap(), lang.clone());
            let text = serialize_instance(&inst);
            prop_assert_eq!(parse_instance_for(&text, &lang).unwrap(), inst);
        }

        #[test]
        fn digraph_and_operation_round_trip(seed in any::<u64>(), k in 1usize..=2) {
            let mut rng = random::rng(seed);
            let params = random::LanguageParams { max_total_arity: 2, ..Default::default() };
            let lang = random::language(&mut rng, &params);
            let ext = build_d_gamma_for(&lang).unwrap();
            let g = ext.digraph();
            prop_assert_eq!(&parse_digraph(&serialize_digraph(g)).unwrap(), g);
            let ops = crate::algebra::enumerate_polymorphisms(&lang, k).unwrap();
            let ops: Vec<Operation> = ops.into_iter().take(5).collect();
            let back = parse_operations(&serialize_operations(&ops), lang.domain()).unwrap();
            prop_assert_eq!(back, ops);
        }

        #[test]
        fn fpol_round_trip(weights in prop::collection::vec(1i64..6, 1..4)) {
            let d = Domain::range(2);
            let total: i64 = weights.iter().sum();
            let entries: Vec<(Operation, BigRational)> = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let f = Operation::from_fn(d.clone(), 2, move |t| ((t[0] + t[1] + i) % 2) ^ (i / 2 % 2));
                    (f, BigRational::new(w.into(), total.into()))
                })
                .collect();
            prop_assume!(entries.iter().enumerate().all(|(i, (f, _))| entries[..i].iter().all(|(g, _)| g != f)));
            let omega = FractionalPolymorphism::new(entries).unwrap();
            let back = parse_fpol(&serialize_fpol(&omega), &d).unwrap();
            prop_assert_eq!(back, omega);
        }

        #[test]
        fn solution_round_trip((lang, inst) in arb_instance(), feasible in any::<bool>()) {
            let d = lang.domain();
            let sol = if feasible {
                Solution::Optimal {
                    value: ExtValue::ratio(7, 3),
                    assignment: Assignment((0..inst.num_variables()).map(|v| v % d.size()).collect()),
                }
            } else {
                Solution::Infeasible
            };
            let doc = SolutionDoc::from_solution(&sol, &inst, d);
            let back = parse_solution(&serialize_solution(&doc)).unwrap().resolve(&inst, d).unwrap();
            prop_assert_eq!(back, sol);
        }
    }
}
