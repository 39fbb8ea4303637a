use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::Operation;
use crate::error::{Error, Result};
use crate::model::{all_tuples, Domain};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn app<S: AsRef<str>>(symbol: impl Into<String>, vars: &[S]) -> Self {
        Term::App(symbol.into(), vars.iter().map(|v| Term::var(v.as_ref())).collect())
    }

    fn symbol_count(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::symbol_count).sum::<usize>(),
        }
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Var(v) => {
                out.insert(v);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn collect_symbols<'a>(&'a self, out: &mut Vec<(&'a str, usize)>) {
        if let Term::App(s, args) = self {
            out.push((s, args.len()));
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }

    fn eval(&self, interp: &BTreeMap<String, Operation>, env: &BTreeMap<&str, usize>) -> usize {
        match self {
            Term::Var(v) => env[v.as_str()],
            Term::App(s, args) => {
                let values: Vec<usize> = args.iter().map(|a| a.eval(interp, env)).collect();
                interp[s].apply(&values)
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// An equation `lhs = rhs` between terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Identity { lhs, rhs }
    }

    /// Each side has at most one occurrence of an operation symbol.
    pub fn is_linear(&self) -> bool {
        self.lhs.symbol_count() <= 1 && self.rhs.symbol_count() <= 1
    }

    /// Both sides use the same variables.
    pub fn is_balanced(&self) -> bool {
        let (mut l, mut r) = (BTreeSet::new(), BTreeSet::new());
        self.lhs.collect_vars(&mut l);
        self.rhs.collect_vars(&mut r);
        l == r
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.lhs.collect_vars(&mut out);
        self.rhs.collect_vars(&mut out);
        out
    }

    pub fn symbols(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        self.lhs.collect_symbols(&mut out);
        self.rhs.collect_symbols(&mut out);
        out
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (l, r) = s
            .split_once('=')
            .ok_or_else(|| Error::parse(1, "identity needs `=`"))?;
        Ok(Identity::new(parse_term(l)?, parse_term(r)?))
    }
}

fn parse_term(s: &str) -> Result<Term> {
    let tokens = tokenize(s)?;
    let mut pos = 0;
    let term = term_at(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::parse(1, format!("trailing input in `{}`", s.trim())));
    }
    Ok(term)
}

fn tokenize(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if matches!(c, '(' | ')' | ',') {
            out.push(c.to_string());
            chars.next();
        } else if c.is_alphanumeric() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek().filter(|c| c.is_alphanumeric() || **c == '_') {
                word.push(c);
                chars.next();
            }
            out.push(word);
        } else {
            return Err(Error::parse(1, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn term_at(tokens: &[String], pos: &mut usize) -> Result<Term> {
    let name = tokens
        .get(*pos)
        .filter(|t| !matches!(t.as_str(), "(" | ")" | ","))
        .ok_or_else(|| Error::parse(1, "expected a name"))?
        .clone();
    *pos += 1;
    if tokens.get(*pos).map(String::as_str) != Some("(") {
        return Ok(Term::Var(name));
    }
    *pos += 1;
    let mut args = vec![term_at(tokens, pos)?];
    loop {
        match tokens.get(*pos).map(String::as_str) {
            Some(",") => {
                *pos += 1;
                args.push(term_at(tokens, pos)?);
            }
            Some(")") => {
                *pos += 1;
                return Ok(Term::App(name, args));
            }
            _ => return Err(Error::parse(1, format!("unclosed argument list of `{name}`"))),
        }
    }
}

/// Whether `idt` holds for every assignment of its variables, with symbols
/// read from `interp`.
pub fn check_identity(idt: &Identity, interp: &BTreeMap<String, Operation>) -> Result<bool> {
    let mut domain: Option<&Domain> = None;
    for (symbol, arity) in idt.symbols() {
        let f = interp
            .get(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
        if f.arity() != arity {
            return Err(Error::ArityMismatch {
                expected: f.arity(),
                found: arity,
            });
        }
        match domain {
            Some(d) if d != f.domain() => {
                return Err(Error::DomainMismatch(format!("`{symbol}` is over another domain")))
            }
            _ => domain = Some(f.domain()),
        }
    }
    let Some(domain) = domain else {
        // No symbols: `x = y` holds only when both sides are the same variable.
        return Ok(idt.lhs == idt.rhs);
    };
    let vars: Vec<&str> = idt.variables().into_iter().collect();
    for values in all_tuples(domain.size(), vars.len()) {
        let env: BTreeMap<&str, usize> = vars.iter().copied().zip(values).collect();
        if idt.lhs.eval(interp, &env) != idt.rhs.eval(interp, &env) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Idempotent,
    Wnu,
    Cyclic,
    Symmetric,
    Edge,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Idempotent,
        Family::Wnu,
        Family::Cyclic,
        Family::Symmetric,
        Family::Edge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Idempotent => "idempotent",
            Family::Wnu => "wnu",
            Family::Cyclic => "cyclic",
            Family::Symmetric => "symmetric",
            Family::Edge => "edge",
        }
    }

    fn min_arity(self) -> usize {
        match self {
            Family::Idempotent => 1,
            Family::Edge => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown identity family `{s}`")))
    }
}

/// The defining identities of `family` for a `k`-ary symbol `f`.
pub fn family_identities(family: Family, k: usize) -> Result<Vec<Identity>> {
    if k < family.min_arity() {
        return Err(Error::PreconditionFailed(format!(
            "{family} operations need arity at least {}",
            family.min_arity()
        )));
    }
    let xs: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let f = |args: Vec<&str>| Term::app("f", &args);
    let idempotent = Identity::new(f(vec!["x"; k]), Term::var("x"));
    // `y` at position `i` (0-based), `x` elsewhere.
    let spike = |i: usize| f((0..k).map(|j| if j == i { "y" } else { "x" }).collect());
    let plain: Vec<&str> = xs.iter().map(String::as_str).collect();
    Ok(match family {
        Family::Idempotent => vec![idempotent],
        Family::Wnu => {
            let mut out = vec![idempotent];
            out.extend((1..k).map(|i| Identity::new(spike(i - 1), spike(i))));
            out
        }
        Family::Cyclic => {
            let mut rotated = plain[1..].to_vec();
            rotated.push(plain[0]);
            vec![Identity::new(f(plain.clone()), f(rotated))]
        }
        Family::Symmetric => {
            // A transposition and a rotation generate all permutations.
            let mut swapped = plain.clone();
            swapped.swap(0, 1);
            let mut rotated = plain[1..].to_vec();
            rotated.push(plain[0]);
            vec![
                Identity::new(f(plain.clone()), f(swapped)),
                Identity::new(f(plain.clone()), f(rotated)),
            ]
        }
        Family::Edge => {
            let mut tail = vec!["x"; k - 2];
            let mut first = vec!["y", "y"];
            first.append(&mut tail);
            let mut second = vec!["y", "x", "y"];
            second.extend(vec!["x"; k - 3]);
            let mut out = vec![
                Identity::new(f(first), Term::var("x")),
                Identity::new(f(second), Term::var("x")),
            ];
            out.extend((3..k).map(|i| Identity::new(spike(i), Term::var("x"))));
            out
        }
    })
}

/// Whether `f` satisfies every defining identity of `family`.
pub fn named_identity(f: &Operation, family: Family) -> Result<bool> {
    let interp = BTreeMap::from([("f".to_string(), f.clone())]);
    for idt in family_identities(family, f.arity())? {
        if !check_identity(&idt, &interp)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{enumerate_polymorphisms, lift_is_faithful, lift_pol_dual};
    use crate::combine::combine_language;
    use crate::dual::DualLanguage;
    use crate::random;
    use proptest::prelude::*;

    #[test]
    fn min_is_symmetric_idempotent_wnu() {
        let min = Operation::min(Domain::range(2), 2);
        for family in [Family::Symmetric, Family::Idempotent, Family::Wnu, Family::Cyclic] {
            assert!(named_identity(&min, family).unwrap(), "{family}");
        }
    }

    #[test]
    fn projection_is_not_cyclic() {
        let p = Operation::projection(Domain::range(2), 2, 0);
        assert!(!named_identity(&p, Family::Cyclic).unwrap());
        assert!(named_identity(&p, Family::Idempotent).unwrap());
    }

    #[test]
    fn classification() {
        let a: Identity = "f(x,x,y) = g(y,y,x)".parse().unwrap();
        assert!(a.is_linear() && a.is_balanced());
        let edge = family_identities(Family::Edge, 4).unwrap();
        assert!(edge.iter().all(|i| i.is_linear() && !i.is_balanced()));
        let nested: Identity = "f(f(x,y),z) = f(x,f(y,z))".parse().unwrap();
        assert!(!nested.is_linear() && nested.is_balanced());
        for family in [Family::Wnu, Family::Cyclic, Family::Symmetric] {
            assert!(family_identities(family, 3)
                .unwrap()
                .iter()
                .all(|i| i.is_linear() && i.is_balanced()));
        }
    }

    #[test]
    fn edge_identities_match_the_definition() {
        let edge = family_identities(Family::Edge, 4).unwrap();
        let text: Vec<String> = edge.iter().map(ToString::to_string).collect();
        assert_eq!(text, vec!["f(y,y,x,x) = x", "f(y,x,y,x) = x", "f(x,x,x,y) = x"]);
        assert!(matches!(family_identities(Family::Edge, 2), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn parity_is_an_edge_operation() {
        let d = Domain::range(2);
        let parity = Operation::from_fn(d.clone(), 3, |t| (t[0] + t[1] + t[2]) % 2);
        assert!(named_identity(&parity, Family::Edge).unwrap());
        assert!(!named_identity(&Operation::min(d, 3), Family::Edge).unwrap());
    }

    #[test]
    fn errors() {
        let idt: Identity = "f(x,y) = g(y,x)".parse().unwrap();
        let interp = BTreeMap::from([("f".to_string(), Operation::min(Domain::range(2), 2))]);
        assert!(matches!(check_identity(&idt, &interp), Err(Error::UnknownSymbol(s)) if s == "g"));
        let bad: Identity = "f(x) = x".parse().unwrap();
        assert!(matches!(check_identity(&bad, &interp), Err(Error::ArityMismatch { .. })));
        assert!("f(x,".parse::<Identity>().is_err());
        assert!("f(x)".parse::<Identity>().is_err());
    }

    #[test]
    fn round_trip_display() {
        let idt: Identity = " f( x , g(y,z) ) = h(z)".parse().unwrap();
        assert_eq!(idt.to_string(), "f(x,g(y,z)) = h(z)");
        assert_eq!(idt.to_string().parse::<Identity>().unwrap(), idt);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// A polymorphism and its dual lift satisfy the same named identities.
        #[test]
        fn lift_preserves_identities(seed in any::<u64>()) {
            let mut rng = random::rng(seed);
            let lang = random::language(&mut rng, &random::LanguageParams::default());
            let c = combine_language(&lang).unwrap();
            let Ok(dual) = DualLanguage::new(c) else { return Ok(()); };
            prop_assume!(lift_is_faithful(&dual));
            for f in enumerate_polymorphisms(&lang, 2).unwrap().into_iter().take(40) {
                let fd = lift_pol_dual(&f, &dual).unwrap();
                for family in [Family::Idempotent, Family::Wnu, Family::Cyclic, Family::Symmetric] {
                    prop_assert_eq!(
                        named_identity(&f, family).unwrap(),
                        named_identity(&fd, family).unwrap()
                    );
                }
            }
        }

        /// Random linear identities over two polymorphisms transfer to the lifts.
        #[test]
        fn lift_preserves_linear_identities(seed in any::<u64>(), picks in prop::collection::vec(0usize..3, 4)) {
            let mut rng = random::rng(seed);
            let lang = random::language(&mut rng, &random::LanguageParams::default());
            let c = combine_language(&lang).unwrap();
            let Ok(dual) = DualLanguage::new(c) else { return Ok(()); };
            prop_assume!(lift_is_faithful(&dual));
            let pols = enumerate_polymorphisms(&lang, 2).unwrap();
            let f = pols[seed as usize % pols.len()].clone();
            let g = pols[(seed / 7) as usize % pols.len()].clone();
            let names = ["x", "y", "z"];
            let idt = Identity::new(
                Term::app("f", &[names[picks[0]], names[picks[1]]]),
                Term::app("g", &[names[picks[2]], names[picks[3]]]),
            );
            let base = BTreeMap::from([("f".to_string(), f.clone()), ("g".to_string(), g.clone())]);
            let lifted = BTreeMap::from([
                ("f".to_string(), lift_pol_dual(&f, &dual).unwrap()),
                ("g".to_string(), lift_pol_dual(&g, &dual).unwrap()),
            ]);
            prop_assert_eq!(check_identity(&idt, &base).unwrap(), check_identity(&idt, &lifted).unwrap());
        }
    }
}
