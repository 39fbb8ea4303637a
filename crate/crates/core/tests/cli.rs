mod common;

use std::path::{Path, PathBuf};

use binarise::cli::{run, EXIT_BUDGET, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK};
use binarise::io;
use binarise::ExtValue;

fn fixture_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("binarise").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_reports_optimum_and_exit_codes() {
    let rho = fixture_path("rho.lang");
    let (code, out, _) = call(&["solve", &fixture_path("rho_xy.inst"), "-l", &rho, "--method", "brute"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "optimum 1\nassign x 1\nassign y 0\n");
    let (code, out, _) = call(&["solve", &fixture_path("rho_xx.inst"), "-l", &rho]);
    assert_eq!(code, EXIT_INFEASIBLE);
    assert_eq!(out, "infeasible\n");
    let (code, out, _) = call(&["solve", &fixture_path("phi_sum_pair.inst"), "-l", &fixture_path("phi_sum.lang")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("optimum 4\n"), "{out}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.inst", "instance b\nvars x\nconstraint rho x\n");
    let (code, _, err) = call(&["solve", s(&bad), "-l", &fixture_path("rho.lang")]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line 3"), "{err}");
    let (code, _, _) = call(&["solve"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = call(&["info", "/nonexistent/file"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn budget_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let vars: Vec<String> = (0..30).map(|i| format!("v{i}")).collect();
    let mut text = format!("instance big\nvars {}\n", vars.join(" "));
    for w in vars.windows(2) {
        text.push_str(&format!("constraint eq {} {}\n", w[0], w[1]));
    }
    let inst = write(dir.path(), "big.inst", &text);
    let (code, _, err) = call(&["solve", s(&inst), "-l", &fixture_path("eq.lang"), "--method", "brute"]);
    assert_eq!(code, EXIT_BUDGET, "{err}");
}

#[test]
fn combine_and_dual_write_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let lang = write(
        dir.path(),
        "two.lang",
        "language two\ndomain 0 1\nfunction u arity 1\n 0 : 0\n 1 : 1\nend\n\
         function rho arity 2\n 0 1 : 2\n 1 0 : 1\n default : inf\nend\n",
    );
    let out = dir.path().join("combined.lang");
    let (code, _, err) = call(&["combine", s(&lang), "-o", s(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let combined = io::parse_language(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(combined.functions()[0].arity(), 3);
    let layout = std::fs::read_to_string(dir.path().join("combined.lang.layout")).unwrap();
    assert_eq!(layout, "block u 0 1\nblock rho 1 2\n");

    let (code, text, _) = call(&["dual", &fixture_path("phi_sum.lang")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(io::parse_language(&text).unwrap().functions().len(), 10);

    let di = dir.path().join("pair.dual");
    let (code, _, _) = call(&[
        "dual-instance",
        &fixture_path("phi_sum_pair.inst"),
        "-l",
        &fixture_path("phi_sum.lang"),
        "-o",
        s(&di),
    ]);
    assert_eq!(code, EXIT_OK);
    let map = std::fs::read_to_string(dir.path().join("pair.dual.map")).unwrap();
    assert_eq!(map, "dualvar x'1 = constraint 1\ndualvar x'2 = constraint 2\n");
    let text = std::fs::read_to_string(&di).unwrap();
    assert!(text.contains("constraint match_2_2 x'1 x'2"));
    assert!(text.contains("constraint match_3_1 x'1 x'2"));
}

#[test]
fn dual_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let lang = fixture_path("phi_sum.lang");
    let dual_lang = dir.path().join("dual.lang");
    assert_eq!(call(&["dual", &lang, "-o", s(&dual_lang)]).0, EXIT_OK);
    let di = dir.path().join("i.dual");
    assert_eq!(call(&["dual-instance", &fixture_path("phi_sum_pair.inst"), "-l", &lang, "-o", s(&di)]).0, EXIT_OK);
    let (code, out, _) = call(&["solve", s(&di), "-l", s(&dual_lang)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("optimum 4\n"));

    let und = dir.path().join("i.undual");
    assert_eq!(call(&["undual", s(&di), "-l", &lang, "-o", s(&und)]).0, EXIT_OK);
    let elim = dir.path().join("i.elim");
    let (code, _, err) = call(&["eliminate-feas", s(&und), "-l", &lang, "-o", s(&elim)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&elim).unwrap();
    assert!(text.starts_with("# scale 1 "), "{text}");
    let (_, out, _) = call(&["solve", s(&elim), "-l", &lang]);
    assert!(out.starts_with("optimum 4\n"));
}

#[test]
fn extended_dual_and_reverse() {
    let dir = tempfile::tempdir().unwrap();
    let rho = fixture_path("rho.lang");
    let (code, text, _) = call(&["extdual", &rho]);
    assert_eq!(code, EXIT_OK);
    let g = io::parse_digraph(&text).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (24, 24));
    let costs = dir.path().join("mu.digraph");
    call(&["extdual", &rho, "--costs", s(&costs)]);
    let side = io::parse_digraph(&std::fs::read_to_string(&costs).unwrap()).unwrap();
    assert_eq!(side.vertex_count(), 24);

    let ie = dir.path().join("i.ext");
    let (code, _, err) = call(&["extdual-instance", &fixture_path("rho_xy.inst"), "-l", &rho, "-o", s(&ie)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let inst = io::parse_instance(&std::fs::read_to_string(&ie).unwrap()).unwrap();
    assert_eq!(inst.num_variables(), 13);
    assert!(std::fs::read_to_string(dir.path().join("i.ext.map")).unwrap().starts_with("top x'1 = constraint 1\n"));

    let rev = dir.path().join("i.rev");
    let (code, _, err) = call(&["reverse", s(&ie), "-l", &rho, "-o", s(&rev)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&rev).unwrap();
    assert!(text.contains("constraint phi_prime"), "{text}");
    assert_eq!(std::fs::read_to_string(dir.path().join("i.rev.map")).unwrap(), "dualvar x'1 = top x'1\n");

    let tri = write(
        dir.path(),
        "tri.inst",
        "instance tri\nvars a b c\nconstraint dgamma a b\nconstraint dgamma b c\nconstraint dgamma c a\n",
    );
    let (code, out, _) = call(&["reverse", s(&tri), "-l", &rho]);
    assert_eq!(code, EXIT_INFEASIBLE);
    assert!(out.ends_with("infeasible\n"));

    let edge = write(
        dir.path(),
        "edge.inst",
        "instance e\nvars a b\nconstraint dgamma a b\nconstraint mu a\nconstraint mu b\n",
    );
    let (code, out, _) = call(&["reverse", s(&edge), "-l", &rho]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("optimum 0\n"), "{out}");
}

#[test]
fn mincosthom_on_the_max_cut_gadget() {
    let (code, out, _) = call(&[
        "mincosthom",
        &fixture_path("maxcut_source.digraph"),
        &fixture_path("maxcut_target.digraph"),
    ]);
    assert_eq!(code, EXIT_OK);
    let doc = io::parse_solution(&out).unwrap();
    let io::SolutionDoc::Optimal { value, assignment } = doc else {
        panic!("infeasible");
    };
    assert_eq!(value, ExtValue::zero());
    let x = &assignment.iter().find(|(v, _)| v == "x").unwrap().1;
    let y = &assignment.iter().find(|(v, _)| v == "y").unwrap().1;
    assert_ne!(x, y);
}

#[test]
fn algebra_commands() {
    let dir = tempfile::tempdir().unwrap();
    let rho = fixture_path("rho.lang");
    let (code, out, _) = call(&["pol", &rho, "--arity", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("# 2 polymorphisms of arity 1\n"), "{out}");
    let (_, out, _) = call(&["pol", &fixture_path("phi_sum.lang"), "-k", "2", "--dual"]);
    assert!(out.starts_with("# 2 polymorphisms of arity 2\n"), "{out}");

    let sub = dir.path().join("sub.lang");
    std::fs::write(
        &sub,
        "language cut\ndomain 0 1\nfunction f arity 2\n 0 0 : 0\n 0 1 : 1\n 1 0 : 1\n 1 1 : 0\nend\n",
    )
    .unwrap();
    let (code, out, _) = call(&["fpol-check", &fixture_path("submodular.fpol"), "-l", s(&sub), "--lift"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 2);
    assert!(out.lines().all(|l| l.ends_with("holds")), "{out}");

    let (_, out, _) = call(&["fpol-check", &fixture_path("submodular.fpol"), "-l", &fixture_path("eq.lang")]);
    assert!(out.contains("holds"), "{out}");

    let ops = dir.path().join("ops.txt");
    std::fs::write(&ops, std::fs::read_to_string(fixture_path("submodular.fpol")).unwrap().split("fpol\n").next().unwrap())
        .unwrap();
    let (code, out, _) = call(&["identity-check", s(&ops), "-l", &rho, "--family", "symmetric"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "min symmetric: yes\nmax symmetric: yes\n");
    let (code, out, _) = call(&["identity-check", s(&ops), "-l", &rho, "--identity", &fixture_path("lattice.identities")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.matches(": holds").count(), 3, "{out}");

    let (_, out, _) = call(&["rigid-core", &rho, "--extended"]);
    assert_eq!(out, "rigid core: yes\nextended dual rigid core: yes\n");
    let (_, out, _) = call(&["rigid-core", &fixture_path("eq.lang")]);
    assert_eq!(out, "rigid core: no\n");

    let (code, out, _) = call(&["endomorphisms", &fixture_path("figure1.digraph")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("# 2 endomorphisms\n"), "{out}");
}

#[test]
fn info_and_verify() {
    let (code, out, _) = call(&["info", &fixture_path("rho.lang")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("digraph 24 vertices (formula 24), 24 edges (formula 24), height 4"), "{out}");
    assert!(out.contains("rigid core: yes"));
    let (_, out, _) = call(&["info", &fixture_path("phi_sum.lang")]);
    assert!(out.contains("|D'| = 3"));
    let (_, out, _) = call(&["info", &fixture_path("eq.lang")]);
    assert!(out.contains("rigid core: no"));

    let (code, out, _) = call(&["verify", &fixture_path("phi_sum_pair.inst"), "-l", &fixture_path("phi_sum.lang")]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.ends_with("verified\n"));
    assert!(out.lines().filter(|l| l.starts_with("stage")).all(|l| l.contains("normalized 4 ok")), "{out}");
    let (code, out, _) = call(&["verify", &fixture_path("rho_xx.inst"), "-l", &fixture_path("rho.lang"), "--oracle", "bnb"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, out, _) = call(&["verify", "--fuzz", "25", "--seed", "11", "--stages", "dual,reverse"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.starts_with("seed 11\n"));
}

#[test]
fn outputs_are_deterministic() {
    let args: [&[&str]; 3] = [
        &["extdual", &fixture_path("phi_sum.lang")],
        &["verify", "--fuzz", "5", "--seed", "3"],
        &["pol", &fixture_path("eq.lang"), "-k", "2"],
    ];
    for a in args {
        assert_eq!(call(a), call(a));
    }
}
