//! End-to-end check that every reduction stage has the source optimum.

use std::fmt;
use std::str::FromStr;

use crate::combine::combine_language;
use crate::digraph::build_d_gamma;
use crate::dual::{eliminate_feas, DualLanguage};
use crate::error::{Error, Result};
use crate::extdual::{ext_optimum, extdual_instance, reverse_reduce, ReverseVerdict};
use crate::io::{serialize_instance, serialize_language};
use crate::model::{Instance, Language};
use crate::solve::{branch_and_bound, brute_force, check_solution, Solution};
use crate::value::ExtValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Combine,
    Dual,
    Extdual,
    Reverse,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Combine, Stage::Dual, Stage::Extdual, Stage::Reverse];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Combine => "combine",
            Stage::Dual => "dual",
            Stage::Extdual => "extdual",
            Stage::Reverse => "reverse",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Semantic(format!("unknown stage `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Oracle {
    Brute,
    Bnb,
}

impl Oracle {
    fn solve(self, lang: &Language, inst: &Instance) -> Result<Solution> {
        let sol = match self {
            Oracle::Brute => brute_force(lang, inst)?,
            Oracle::Bnb => branch_and_bound(lang, inst, crate::hom::DEFAULT_NODE_LIMIT)?,
        };
        if !check_solution(lang, inst, &sol)? {
            return Err(Error::Mismatch {
                stage: inst.name().into(),
                detail: "returned assignment does not evaluate to the optimum".into(),
            });
        }
        Ok(sol)
    }
}

impl FromStr for Oracle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Oracle::Brute),
            "bnb" => Ok(Oracle::Bnb),
            _ => Err(Error::Semantic(format!("unknown oracle `{s}`"))),
        }
    }
}

/// One solved instance of the pipeline.
#[derive(Clone, Debug)]
pub struct StageReport {
    pub stage: &'static str,
    pub variables: usize,
    pub constraints: usize,
    pub optimum: ExtValue,
    /// The optimum mapped back to the source instance.
    pub normalized: ExtValue,
    pub agrees: bool,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub source_optimum: ExtValue,
    pub offset: ExtValue,
    pub vertices: Option<usize>,
    pub edges: Option<usize>,
    pub stages: Vec<StageReport>,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.agrees)
    }

    pub fn first_mismatch(&self) -> Option<&StageReport> {
        self.stages.iter().find(|s| !s.agrees)
    }

    fn push(&mut self, stage: &'static str, inst: &Instance, optimum: ExtValue, normalized: ExtValue, note: String) {
        let agrees = normalized == self.source_optimum;
        self.stages.push(StageReport {
            stage,
            variables: inst.num_variables(),
            constraints: inst.constraints().len(),
            optimum,
            normalized,
            agrees,
            note,
        });
    }
}

impl fmt::Display for PipelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source optimum {}", self.source_optimum)?;
        writeln!(f, "combine offset {}", self.offset)?;
        if let (Some(v), Some(e)) = (self.vertices, self.edges) {
            writeln!(f, "digraph {v} vertices {e} edges")?;
        }
        for s in &self.stages {
            write!(
                f,
                "stage {} vars {} constraints {} optimum {} normalized {} {}",
                s.stage,
                s.variables,
                s.constraints,
                s.optimum,
                s.normalized,
                if s.agrees { "ok" } else { "MISMATCH" }
            )?;
            if !s.note.is_empty() {
                write!(f, " ({})", s.note)?;
            }
            writeln!(f)?;
        }
        write!(f, "{}", if self.passed() { "verified" } else { "mismatch" })
    }
}

/// Runs the requested stages on `inst` and compares every optimum with the
/// oracle's optimum of `inst`. The extended dual is solved as a minimum-cost
/// homomorphism, the only exact method that scales to its size.
pub fn verify_pipeline(lang: &Language, inst: &Instance, stages: &[Stage], oracle: Oracle) -> Result<PipelineReport> {
    let source = oracle.solve(lang, inst)?;
    let c = combine_language(lang)?;
    let (ic, offset) = c.instance_to_combined(inst)?;
    let shift = |v: &ExtValue| match v {
        ExtValue::Finite(x) => ExtValue::Finite(x - &offset),
        ExtValue::Infinite => ExtValue::Infinite,
    };
    let mut report = PipelineReport {
        source_optimum: source.optimum(),
        offset: ExtValue::Finite(offset.clone()),
        vertices: None,
        edges: None,
        stages: Vec::new(),
    };
    let wants = |s: Stage| stages.contains(&s);

    if wants(Stage::Combine) {
        let opt = oracle.solve(c.language(), &ic)?.optimum();
        report.push("combine", &ic, opt.clone(), shift(&opt), String::new());
    }
    let dual = DualLanguage::new(c.clone())?;
    if wants(Stage::Dual) {
        let di = dual.dual_instance(&ic)?;
        let opt = oracle.solve(dual.language(), &di.instance)?.optimum();
        report.push("dual", &di.instance, opt.clone(), shift(&opt), String::new());
    }
    if !(wants(Stage::Extdual) || wants(Stage::Reverse)) {
        return Ok(report);
    }
    let ext = build_d_gamma(&c)?;
    report.vertices = Some(ext.digraph().vertex_count());
    report.edges = Some(ext.digraph().edge_count());
    let ie = extdual_instance(&ext, &ic)?;
    if wants(Stage::Extdual) {
        let sol = ext_optimum(&ext, &ie.instance)?;
        if !check_solution(&ext.language(), &ie.instance, &sol)? {
            return Err(Error::Mismatch {
                stage: "extdual".into(),
                detail: "homomorphism does not evaluate to the optimum".into(),
            });
        }
        let opt = sol.optimum();
        report.push("extdual", &ie.instance, opt.clone(), shift(&opt), "min-cost homomorphism".into());
    }
    if wants(Stage::Reverse) {
        match reverse_reduce(&ext, &dual, &ie.instance)? {
            ReverseVerdict::Infeasible(why) => {
                report.push("reverse", &ie.instance, ExtValue::Infinite, ExtValue::Infinite, why);
            }
            ReverseVerdict::SolvedDirectly { optimum, fallback, .. } => {
                let note = if fallback { "solved directly, fallback" } else { "solved directly" };
                report.push("reverse", &ie.instance, optimum.clone(), shift(&optimum), note.into());
            }
            ReverseVerdict::DualInstance(rd) => {
                let opt_d = oracle.solve(dual.language(), &rd.instance)?.optimum();
                let total = rd.optimum(&opt_d);
                report.push("reverse", &rd.instance, opt_d, shift(&total), format!("offset {}", rd.offset));
                let u = dual.undual_instance(&rd.instance)?;
                let opt_u = oracle.solve(&c.language_with_feas(), &u.instance)?.optimum();
                let total = rd.optimum(&opt_u);
                report.push("undual", &u.instance, opt_u.clone(), shift(&total), String::new());
                let e = eliminate_feas(&c, &u.instance)?;
                let opt_e = oracle.solve(c.language(), &e.instance)?.optimum();
                let total = rd.optimum(&e.recover(&opt_e));
                report.push("eliminate-feas", &e.instance, opt_e, shift(&total), format!("scale {}", e.scale));
            }
        }
    }
    Ok(report)
}

/// Text that reproduces a run: the language followed by the instance.
pub fn reproducer(lang: &Language, inst: &Instance) -> String {
    format!("{}{}", serialize_language(lang), serialize_instance(inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn rho_instance(pairs: &[(&str, &str)]) -> Instance {
        let mut inst = Instance::new("i", ["x", "y"]).unwrap();
        for (a, b) in pairs {
            inst.constrain("rho", &[*a, *b]).unwrap();
        }
        inst
    }

    #[test]
    fn rho_normalises_to_one() {
        let r = verify_pipeline(&catalog::rho_language(), &rho_instance(&[("x", "y")]), &Stage::ALL, Oracle::Brute)
            .unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.source_optimum, ExtValue::int(1));
        assert!(r.stages.iter().all(|s| s.normalized == ExtValue::int(1)));
        assert_eq!((r.vertices, r.edges), (Some(24), Some(24)));
    }

    #[test]
    fn phi_sum_pair_normalises_to_four() {
        let mut inst = Instance::new("i", ["x", "y", "z", "w"]).unwrap();
        inst.constrain("phi_sum", &["x", "y", "z"]).unwrap();
        inst.constrain("phi_sum", &["z", "y", "w"]).unwrap();
        let r = verify_pipeline(&catalog::phi_sum_language(), &inst, &Stage::ALL, Oracle::Brute).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.source_optimum, ExtValue::int(4));
    }

    #[test]
    fn diagonal_rho_is_infeasible_throughout() {
        let r = verify_pipeline(&catalog::rho_language(), &rho_instance(&[("x", "x")]), &Stage::ALL, Oracle::Bnb)
            .unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.stages.iter().all(|s| s.optimum.is_infinite()));
    }

    #[test]
    fn stages_parse() {
        assert_eq!("extdual".parse::<Stage>().unwrap(), Stage::Extdual);
        assert!("bogus".parse::<Stage>().is_err());
        assert_eq!("bnb".parse::<Oracle>().unwrap(), Oracle::Bnb);
    }
}
