//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible, 4 budget exceeded,
//! 5 verification mismatch.

mod verify;

pub use verify::{reproducer, verify_pipeline, Oracle, PipelineReport, Stage, StageReport};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::algebra::{
    check_fractional_polymorphism, check_identity, enumerate_endomorphisms, enumerate_polymorphisms, ext_is_rigid_core,
    is_rigid_core, lift_fpol_dual, named_identity, Family, Identity, Operation,
};
use crate::combine::combine_language;
use crate::digraph::{build_d_gamma, expected_edge_count, expected_vertex_count, LeveledDigraph};
use crate::dual::{eliminate_feas, DualLanguage};
use crate::error::{Error, Result};
use crate::extdual::{extdual_instance, reverse_reduce, ReverseVerdict};
use crate::io::{self, SolutionDoc};
use crate::model::{Domain, Instance, Language};
use crate::random;
use crate::solve::{min_cost_hom, solve, Method, Solution};
use crate::value::ExtValue;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "binarise", version, about = "Binary encodings of valued constraint languages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Output {
    /// Write the main output here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Combine a language into one cost function.
    Combine {
        language: PathBuf,
        #[command(flatten)]
        out: Output,
        /// Layout sidecar; defaults to `<output>.layout` when `-o` is given.
        #[arg(long)]
        layout: Option<PathBuf>,
    },
    /// Dual language of the combined cost function.
    Dual {
        language: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Dual instance of an instance over the language.
    DualInstance {
        instance: PathBuf,
        #[arg(short, long)]
        language: PathBuf,
        #[command(flatten)]
        out: Output,
        /// Variable map sidecar; defaults to `<output>.map` when `-o` is given.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Expand an instance over the dual language back to the combined function and its feasibility relation.
    Undual {
        instance: PathBuf,
        #[arg(short, long)]
        language: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Replace feasibility constraints by the combined function, repeating the others.
    EliminateFeas {
        instance: PathBuf,
        #[arg(short, long)]
        language: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// The digraph of the extended dual, with vertex costs.
    Extdual {
        language: PathBuf,
        #[command(flatten)]
        out: Output,
        /// Unary-cost sidecar in the digraph grammar.
        #[arg(long)]
        costs: Option<PathBuf>,
    },
    /// Extended dual instance of an instance over the language.
    ExtdualInstance {
        instance: PathBuf,
        #[arg(short, long)]
        language: PathBuf,
        #[command(flatten)]
        out: Output,
        /// Provenance sidecar; defaults to `<output>.map` when `-o` is given.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Reduce an instance over the extended dual back to the dual language.
    Reverse {
        instance: PathBuf,
        #[arg(short, long)]
        language: PathBuf,
        #[command(flatten)]
        out: Output,
        /// Dual variable sidecar; defaults to `<output>.map` when `-o` is given.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Solve an instance exactly.
    Solve {
        instance: PathBuf,
        #[arg(short, long)]
        language: PathBuf,
        #[arg(long, default_value = "auto", value_parser = ["brute", "mincut", "bnb", "auto"])]
        method: String,
        #[command(flatten)]
        out: Output,
    },
    /// Minimum-cost homomorphism between two digraphs.
    Mincosthom {
        source: PathBuf,
        target: PathBuf,
        /// Target vertex costs in the digraph grammar; defaults to the target's own costs.
        #[arg(long)]
        costs: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Enumerate the polymorphisms of a given arity.
    Pol {
        language: PathBuf,
        #[arg(short = 'k', long)]
        arity: usize,
        /// Enumerate over the dual language instead.
        #[arg(long)]
        dual: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Check a fractional polymorphism.
    FpolCheck {
        fpol: PathBuf,
        #[arg(short, long)]
        language: PathBuf,
        /// Also check its lift on the dual language.
        #[arg(long)]
        lift: bool,
    },
    /// Check operations against a named family or identities from a file.
    IdentityCheck {
        operations: PathBuf,
        #[arg(short, long)]
        language: PathBuf,
        #[arg(long, conflicts_with = "identity", required_unless_present = "identity")]
        family: Option<String>,
        #[arg(long)]
        identity: Option<PathBuf>,
    },
    /// Decide whether a language is a rigid core.
    RigidCore {
        language: PathBuf,
        /// Also decide it for the extended dual.
        #[arg(long)]
        extended: bool,
    },
    /// Enumerate the endomorphisms of a digraph.
    Endomorphisms {
        digraph: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Summarise a language and its encodings.
    Info { language: PathBuf },
    /// Check that every reduction stage has the source optimum.
    Verify {
        instance: Option<PathBuf>,
        #[arg(short, long, required_unless_present = "fuzz")]
        language: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "combine,dual,extdual,reverse")]
        stages: Vec<String>,
        #[arg(long, default_value = "brute")]
        oracle: String,
        /// Check this many random instances instead.
        #[arg(long)]
        fuzz: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// What a successful command reports through its exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Infeasible,
    Mismatch,
}

impl Outcome {
    fn code(self) -> i32 {
        match self {
            Outcome::Done => EXIT_OK,
            Outcome::Infeasible => EXIT_INFEASIBLE,
            Outcome::Mismatch => EXIT_MISMATCH,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => EXIT_BUDGET,
        Error::Mismatch { .. } => EXIT_MISMATCH,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Semantic(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn load_language(path: &Path) -> Result<Language> {
    with_path(path, io::parse_language(&read(path)?))
}

fn load_instance(path: &Path, lang: &Language) -> Result<Instance> {
    with_path(path, io::parse_instance_for(&read(path)?, lang))
}

fn load_digraph(path: &Path) -> Result<LeveledDigraph> {
    with_path(path, io::parse_digraph(&read(path)?))
}

fn emit(out: &Output, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &out.output {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Writes a sidecar to `explicit`, else next to `-o` with `ext` appended.
fn emit_sidecar(out: &Output, explicit: &Option<PathBuf>, ext: &str, text: &str) -> Result<()> {
    let path = explicit.clone().or_else(|| {
        out.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(ext);
            PathBuf::from(s)
        })
    });
    if let Some(p) = path {
        fs::write(p, text)?;
    }
    Ok(())
}

fn solution_text(sol: &Solution, inst: &Instance, domain: &Domain) -> String {
    io::serialize_solution(&SolutionDoc::from_solution(sol, inst, domain))
}

fn solved(sol: &Solution) -> Outcome {
    if sol.is_infeasible() {
        Outcome::Infeasible
    } else {
        Outcome::Done
    }
}

/// Runs one command, writing its main output to `-o` or `stdout`.
pub fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Combine { language, out, layout } => {
            let c = combine_language(&load_language(language)?)?;
            emit(out, &io::serialize_language(c.language()), stdout)?;
            emit_sidecar(out, layout, ".layout", &io::serialize_layout(c.layout()))?;
        }
        Command::Dual { language, out } => {
            let dual = DualLanguage::new(combine_language(&load_language(language)?)?)?;
            emit(out, &io::serialize_language(dual.language()), stdout)?;
        }
        Command::DualInstance { instance, language, out, map } => {
            let lang = load_language(language)?;
            let inst = load_instance(instance, &lang)?;
            let c = combine_language(&lang)?;
            let (ic, offset) = c.instance_to_combined(&inst)?;
            let dual = DualLanguage::new(c)?;
            let di = dual.dual_instance(&ic)?;
            let text = format!("# offset {}\n{}", ExtValue::Finite(offset), io::serialize_instance(&di.instance));
            emit(out, &text, stdout)?;
            emit_sidecar(out, map, ".map", &di.map_lines())?;
        }
        Command::Undual { instance, language, out } => {
            let dual = DualLanguage::new(combine_language(&load_language(language)?)?)?;
            let inst = load_instance(instance, dual.language())?;
            let u = dual.undual_instance(&inst)?;
            emit(out, &io::serialize_instance(&u.instance), stdout)?;
        }
        Command::EliminateFeas { instance, language, out } => {
            let c = combine_language(&load_language(language)?)?;
            let inst = load_instance(instance, &c.language_with_feas())?;
            let e = eliminate_feas(&c, &inst)?;
            let text = format!(
                "# scale {} gap {} shift {}\n{}",
                e.scale,
                ExtValue::Finite(e.gap.clone()),
                ExtValue::Finite(e.shift.clone()),
                io::serialize_instance(&e.instance)
            );
            emit(out, &text, stdout)?;
        }
        Command::Extdual { language, out, costs } => {
            let ext = build_d_gamma(&combine_language(&load_language(language)?)?)?;
            emit(out, &io::serialize_digraph(ext.digraph()), stdout)?;
            if let Some(p) = costs {
                let mut s = format!("digraph {}\n", ext.mu().name());
                for v in ext.digraph().vertices() {
                    let cost = v.cost.clone().unwrap_or_default();
                    writeln!(s, "vertex {} level {} role {} cost {cost}", v.id, v.level, v.role).unwrap();
                }
                fs::write(p, s)?;
            }
        }
        Command::ExtdualInstance { instance, language, out, map } => {
            let lang = load_language(language)?;
            let inst = load_instance(instance, &lang)?;
            let c = combine_language(&lang)?;
            let (ic, offset) = c.instance_to_combined(&inst)?;
            let ext = build_d_gamma(&c)?;
            let ie = extdual_instance(&ext, &ic)?;
            let text = format!("# offset {}\n{}", ExtValue::Finite(offset), io::serialize_instance(&ie.instance));
            emit(out, &text, stdout)?;
            emit_sidecar(out, map, ".map", &ie.map_lines())?;
        }
        Command::Reverse { instance, language, out, map } => {
            let c = combine_language(&load_language(language)?)?;
            let ext = build_d_gamma(&c)?;
            let dual = DualLanguage::new(c)?;
            let inst = load_instance(instance, &ext.language())?;
            match reverse_reduce(&ext, &dual, &inst)? {
                ReverseVerdict::Infeasible(why) => {
                    emit(out, &format!("# {why}\ninfeasible\n"), stdout)?;
                    return Ok(Outcome::Infeasible);
                }
                ReverseVerdict::SolvedDirectly { optimum, assignment, .. } => {
                    let sol = Solution::Optimal {
                        value: optimum,
                        assignment,
                    };
                    emit(out, &solution_text(&sol, &inst, ext.vertex_domain()), stdout)?;
                }
                ReverseVerdict::DualInstance(rd) => {
                    let text = format!("# offset {}\n{}", rd.offset, io::serialize_instance(&rd.instance));
                    emit(out, &text, stdout)?;
                    let names = rd.instance.variables();
                    let lines: String = rd
                        .top_vars
                        .iter()
                        .enumerate()
                        .map(|(x, v)| match v {
                            Some(v) => format!("dualvar {} = top {}\n", names[x], inst.variables()[*v]),
                            None => format!("dualvar {} = added\n", names[x]),
                        })
                        .collect();
                    emit_sidecar(out, map, ".map", &lines)?;
                }
            }
        }
        Command::Solve {
            instance,
            language,
            method,
            out,
        } => {
            let lang = load_language(language)?;
            let inst = load_instance(instance, &lang)?;
            let method = match method.as_str() {
                "brute" => Method::Brute,
                "mincut" => Method::MinCut,
                "bnb" => Method::Bnb,
                _ => Method::Auto,
            };
            let sol = solve(&lang, &inst, method)?;
            emit(out, &solution_text(&sol, &inst, lang.domain()), stdout)?;
            return Ok(solved(&sol));
        }
        Command::Mincosthom {
            source,
            target,
            costs,
            out,
        } => {
            let src = load_digraph(source)?;
            let tgt = load_digraph(target)?;
            let table = match costs {
                None => tgt.cost_table(),
                Some(p) => {
                    let side = load_digraph(p)?;
                    let mut table = vec![ExtValue::zero(); tgt.vertex_count()];
                    for v in side.vertices() {
                        table[tgt.index_of(&v.id)?] = v.cost.clone().unwrap_or_default();
                    }
                    table
                }
            };
            let sol = min_cost_hom(&src, &tgt, &vec![table; src.vertex_count()])?;
            let as_instance = Instance::new(src.name(), src.vertices().iter().map(|v| v.id.clone()))?;
            let ids = Domain::new(tgt.vertices().iter().map(|v| v.id.clone()))?;
            emit(out, &solution_text(&sol, &as_instance, &ids), stdout)?;
            return Ok(solved(&sol));
        }
        Command::Pol {
            language,
            arity,
            dual,
            out,
        } => {
            let lang = load_language(language)?;
            let target = if *dual {
                DualLanguage::new(combine_language(&lang)?)?.language().clone()
            } else {
                lang
            };
            let ops = enumerate_polymorphisms(&target, *arity)?;
            let text = format!(
                "# {} polymorphisms of arity {arity}\n{}",
                ops.len(),
                io::serialize_operations(&ops)
            );
            emit(out, &text, stdout)?;
        }
        Command::FpolCheck { fpol, language, lift } => {
            let lang = load_language(language)?;
            let omega = with_path(fpol, io::parse_fpol(&read(fpol)?, lang.domain()))?;
            let verdict = check_fractional_polymorphism(&omega, &lang)?;
            writeln!(stdout, "{}: {verdict}", lang.name())?;
            if *lift {
                let dual = DualLanguage::new(combine_language(&lang)?)?;
                let lifted = lift_fpol_dual(&omega, &dual)?;
                let verdict = check_fractional_polymorphism(&lifted, dual.language())?;
                writeln!(stdout, "{}: {verdict}", dual.language().name())?;
            }
        }
        Command::IdentityCheck {
            operations,
            language,
            family,
            identity,
        } => {
            let lang = load_language(language)?;
            let ops = with_path(operations, io::parse_operations(&read(operations)?, lang.domain()))?;
            if let Some(family) = family {
                let family: Family = family.parse()?;
                for f in &ops {
                    let yes = named_identity(f, family)?;
                    writeln!(stdout, "{} {}: {}", f.name().unwrap_or("-"), family.as_str(), yes_no(yes))?;
                }
            } else if let Some(path) = identity {
                let interp: BTreeMap<String, Operation> = ops
                    .into_iter()
                    .filter_map(|f| Some((f.name()?.to_string(), f)))
                    .collect();
                for (i, line) in read(path)?.lines().enumerate() {
                    let body = line.split('#').next().unwrap_or("").trim();
                    if body.is_empty() {
                        continue;
                    }
                    let idt: Identity = body.parse().map_err(|e: Error| match e {
                        Error::Parse { message, .. } => Error::parse(i + 1, format!("{}: {message}", path.display())),
                        other => other,
                    })?;
                    let holds = check_identity(&idt, &interp)?;
                    writeln!(stdout, "{idt}: {}", if holds { "holds" } else { "fails" })?;
                }
            }
        }
        Command::RigidCore { language, extended } => {
            let lang = load_language(language)?;
            writeln!(stdout, "rigid core: {}", yes_no(is_rigid_core(&lang)?))?;
            if *extended {
                let ext = build_d_gamma(&combine_language(&lang)?)?;
                writeln!(stdout, "extended dual rigid core: {}", yes_no(ext_is_rigid_core(&ext)?))?;
            }
        }
        Command::Endomorphisms { digraph, out } => {
            let g = load_digraph(digraph)?;
            let domain = Domain::new(g.vertices().iter().map(|v| v.id.clone()))?;
            let ops = enumerate_endomorphisms(&g, None)?
                .into_iter()
                .enumerate()
                .map(|(i, t)| Ok(Operation::new(domain.clone(), 1, t)?.named(format!("e{}", i + 1))))
                .collect::<Result<Vec<_>>>()?;
            let text = format!("# {} endomorphisms\n{}", ops.len(), io::serialize_operations(&ops));
            emit(out, &text, stdout)?;
        }
        Command::Info { language } => {
            stdout.write_all(info(&load_language(language)?)?.as_bytes())?;
        }
        Command::Verify {
            instance,
            language,
            stages,
            oracle,
            fuzz,
            seed,
        } => {
            let stages = stages.iter().map(|s| s.parse()).collect::<Result<Vec<Stage>>>()?;
            let oracle: Oracle = oracle.parse()?;
            if let Some(count) = fuzz {
                return fuzz_verify(*count, *seed, &stages, oracle, stdout);
            }
            let (Some(instance), Some(language)) = (instance, language) else {
                return Err(Error::Semantic("verify needs an instance and a language, or --fuzz".into()));
            };
            let lang = load_language(language)?;
            let inst = load_instance(instance, &lang)?;
            let report = verify_pipeline(&lang, &inst, &stages, oracle)?;
            writeln!(stdout, "{report}")?;
            if !report.passed() {
                writeln!(stdout, "# reproducer\n{}", reproducer(&lang, &inst))?;
                return Ok(Outcome::Mismatch);
            }
        }
    }
    Ok(Outcome::Done)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn fuzz_verify(count: usize, seed: u64, stages: &[Stage], oracle: Oracle, stdout: &mut dyn Write) -> Result<Outcome> {
    writeln!(stdout, "seed {seed}")?;
    let mut rng = random::rng(seed);
    let params = random::LanguageParams::default();
    for case in 0..count {
        let lang = random::language(&mut rng, &params);
        let inst = random::instance(&mut rng, &lang, 4, 4);
        let report = verify_pipeline(&lang, &inst, stages, oracle)?;
        if let Some(bad) = report.first_mismatch() {
            writeln!(stdout, "case {case}: mismatch at {}\n{report}", bad.stage)?;
            writeln!(stdout, "# reproducer\n{}", reproducer(&lang, &inst))?;
            return Ok(Outcome::Mismatch);
        }
        writeln!(stdout, "case {case}: ok, optimum {}", report.source_optimum)?;
    }
    writeln!(stdout, "verified {count} cases")?;
    Ok(Outcome::Done)
}

/// Summary of a language: sizes, the extended dual's counts against the
/// closed forms, classification and the rigid-core verdict.
pub fn info(lang: &Language) -> Result<String> {
    let c = combine_language(lang)?;
    let m = c.arity();
    let d = lang.domain().size();
    let d_prime = c.phi_gamma().feasible_tuples().len();
    let ext = build_d_gamma(&c)?;
    let g = ext.digraph();
    let arities: Vec<String> = lang
        .functions()
        .iter()
        .map(|f| format!("{}/{}", f.name(), f.arity()))
        .collect();
    let class = if lang.is_crisp() {
        "crisp"
    } else if lang.is_finite_valued() {
        "finite-valued"
    } else {
        "general-valued"
    };
    let mut s = String::new();
    writeln!(s, "language {}", lang.name()).unwrap();
    writeln!(s, "|D| = {d}").unwrap();
    writeln!(s, "functions {}", arities.join(" ")).unwrap();
    writeln!(s, "combined arity {m}").unwrap();
    writeln!(s, "|D'| = {d_prime}").unwrap();
    writeln!(
        s,
        "digraph {} vertices (formula {}), {} edges (formula {}), height {}",
        g.vertex_count(),
        expected_vertex_count(m, d, d_prime),
        g.edge_count(),
        expected_edge_count(m, d, d_prime),
        ext.height()
    )
    .unwrap();
    writeln!(s, "class {class}").unwrap();
    writeln!(s, "rigid core: {}", yes_no(is_rigid_core(lang)?)).unwrap();
    Ok(s)
}
