//! Command-line behaviour: exit codes, output formats and the problem file.

mod common;

use std::process::Command;

use canondual::cli::problem_file::{FunctionFile, OperatorFile, ProblemFile, TermFile};
use canondual::cli::report::RunReport;
use canondual::cli::{run, Outcome};
use canondual::oracle::count_local_extrema;
use common::{fixture_path, DOUBLE_WELL_POINTS};
use proptest::prelude::*;

fn canondual(args: &[&str]) -> Outcome {
    run(std::iter::once("canondual").chain(args.iter().copied()))
}

fn fx(name: &str) -> String {
    fixture_path(name).to_str().unwrap().to_string()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn parse_csv(text: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,value"));
    lines
        .map(|l| {
            let (x, v) = l.split_once(',').unwrap();
            (x.parse().unwrap(), v.parse().unwrap())
        })
        .collect()
}

const CIRCLE: &str = r#"{
    "n": 2, "A": [[1.0, 0.0], [0.0, 1.0]], "c": [1.0, 0.0],
    "equalities": [{
        "V": {"kind": "shifted_quadratic", "a": 1.0, "d": 0.0, "e": -2.0},
        "Lambda": {"Q": [[1.0, 0.0], [0.0, 1.0]], "b": [0.0, 0.0], "alpha": 0.0}
    }]
}"#;

#[test]
fn solve_example_table() {
    let out = canondual(&["solve", &fx("example1.json")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let rows: Vec<&str> = out.stdout.lines().skip(2).take(4).collect();
    for (line, row) in rows.iter().zip(DOUBLE_WELL_POINTS) {
        let cells: Vec<&str> = line.split_whitespace().collect();
        let x: f64 = cells[1].parse().unwrap();
        assert!((x - row[0]).abs() < 0.01, "{line}");
    }
    assert!(rows[0].ends_with("global-min"));
    assert!(rows[3].ends_with("biggest-local-max"));
    assert!(out.stdout.contains("global minimum: row 1"));
    assert!(out.stdout.contains("positive dual region is convex"));
}

#[test]
fn solve_json_report() {
    let out = canondual(&["solve", &fx("example1.json"), "--json"]);
    assert_eq!(out.code, 0);
    let report: RunReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.global, Some(0));
    for (r, row) in report.rows.iter().zip(DOUBLE_WELL_POINTS) {
        assert!((r.point.x[0] - row[0]).abs() < 0.01);
        assert!((r.point.dual.mu[0] - row[1]).abs() < 0.01);
        assert!((r.point.dual.sigma_h[0] - row[2]).abs() < 0.01);
        assert!((r.point.primal_value - row[3]).abs() < 0.01);
        assert!((r.point.dual_value.unwrap() - row[4]).abs() < 0.01);
        assert!((r.point.g_eigenvalues[0] - row[5]).abs() < 0.01);
        assert!(!r.flagged);
    }
}

#[test]
fn solve_exit_codes() {
    assert_eq!(canondual(&["solve", &fx("unconstrained_qp.json")]).code, 0);
    let none = canondual(&["solve", &fx("infeasible.json")]);
    assert_eq!(none.code, 3);
    assert!(none.stderr.contains("no seed converged"), "{}", none.stderr);
    let dir = tempfile::tempdir().unwrap();
    let circle = write_temp(&dir, "circle.json", CIRCLE);
    let out = canondual(&["solve", &circle, "--seed-box", "-3:3", "--grid", "9"]);
    assert_eq!(out.code, 2, "{}", out.stdout);
    assert!(out.stdout.contains("none certified"));
}

#[test]
fn unconstrained_single_row() {
    let out = canondual(&["solve", &fx("unconstrained_qp.json")]);
    assert_eq!(
        out.stdout
            .lines()
            .filter(|l| l.ends_with("global-min"))
            .count(),
        1
    );
}

#[test]
fn usage_and_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let example = std::fs::read_to_string(fixture_path("example1.json")).unwrap();
    let typo = write_temp(&dir, "typo.json", &example.replace("\"d\"", "\"dd\""));
    let asym = write_temp(
        &dir,
        "asym.json",
        r#"{"n": 2, "A": [[1.0, 0.5], [0.5000001, 1.0]], "c": [0.0, 0.0]}"#,
    );
    let junk = write_temp(&dir, "junk.json", "not json");
    assert_eq!(canondual(&["solve", &typo]).code, 65);
    assert_eq!(canondual(&["solve", &asym]).code, 65);
    assert_eq!(canondual(&["solve", &junk]).code, 65);
    assert_eq!(canondual(&["solve", "/no/such/file.json"]).code, 64);
    assert_eq!(
        canondual(&["solve", &fx("example1.json"), "--grid", "x"]).code,
        64
    );
    assert_eq!(
        canondual(&["solve", &fx("example1.json"), "--seed-box", "3:-3"]).code,
        64
    );
    assert_eq!(
        canondual(&["solve", &fx("example1.json"), "--grid", "1"]).code,
        64
    );
    assert_eq!(
        canondual(&["solve", &fx("example1.json"), "--json", "--table"]).code,
        64
    );
    assert_eq!(canondual(&["frobnicate"]).code, 64);
    assert_eq!(canondual(&["--help"]).code, 0);
    assert_eq!(
        canondual(&["auglag", &fx("unconstrained_qp.json")]).code,
        65
    );
    assert_eq!(
        canondual(&["auglag", &fx("example1.json"), "--mu0", "1,2"]).code,
        64
    );
    assert_eq!(
        canondual(&["auglag", &fx("example1.json"), "--alpha", "2"]).code,
        64
    );
}

#[test]
fn table_is_byte_stable() {
    let a = canondual(&["solve", &fx("example1.json")]);
    let b = canondual(&["solve", &fx("example1.json")]);
    assert_eq!(a.stdout, b.stdout);
    let exe = env!("CARGO_BIN_EXE_canondual");
    let run_with = |lang: &str| {
        Command::new(exe)
            .args(["solve", &fx("example1.json")])
            .env("LC_ALL", lang)
            .env("LANG", lang)
            .output()
            .unwrap()
    };
    let c = run_with("de_DE.UTF-8");
    let d = run_with("C");
    assert_eq!(c.stdout, d.stdout);
    assert_eq!(String::from_utf8(c.stdout).unwrap(), a.stdout);
    assert_eq!(c.status.code(), Some(0));
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_canondual");
    let code = |args: &[&str]| Command::new(exe).args(args).output().unwrap().status.code();
    assert_eq!(code(&["solve", &fx("example1.json")]), Some(0));
    assert_eq!(code(&["solve", &fx("infeasible.json")]), Some(3));
    assert_eq!(code(&["oracle", &fx("infeasible.json")]), Some(2));
    assert_eq!(code(&["solve"]), Some(64));
    assert_eq!(code(&["curve", &fx("unconstrained_qp.json")]), Some(65));
}

#[test]
fn auglag_subtable() {
    let out = canondual(&[
        "auglag",
        &fx("example1.json"),
        "--mu0",
        "1",
        "--nu0",
        "5",
        "--subtable",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let rows: Vec<&str> = out
        .stdout
        .lines()
        .skip(3)
        .take_while(|l| !l.starts_with("note"))
        .collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[0].ends_with("global-min"));
    assert!(rows[0].contains("0.0894"));
}

#[test]
fn auglag_history() {
    let out = canondual(&[
        "auglag",
        &fx("example1.json"),
        "--mu0",
        "1",
        "--nu0",
        "5",
        "--iters",
        "1",
        "--json",
    ]);
    assert_eq!(out.code, 2);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let mu1 = v["history"][0]["mu_next"][0].as_f64().unwrap();
    assert!((mu1 - 0.09).abs() <= 0.01);

    let out = canondual(&[
        "auglag",
        &fx("example1.json"),
        "--mu0",
        "0.004",
        "--nu0",
        "5",
        "--iters",
        "1",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(v["history"][0]["h_inf"].as_f64().unwrap() <= 1e-3);

    let out = canondual(&["auglag", &fx("example1.json"), "--mu0", "1", "--nu0", "5"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("feasibility tolerance reached"));
}

#[test]
fn curve_objective_values() {
    let out = canondual(&[
        "curve",
        &fx("example1.json"),
        "--range",
        "-6:6",
        "--samples",
        "5",
    ]);
    assert_eq!(out.code, 0);
    assert!(!out.stdout.contains('\r'));
    let pts = parse_csv(&out.stdout);
    assert_eq!(pts.len(), 5);
    for (x, v) in pts {
        assert_eq!(v, 0.5 * x * x - x);
    }
}

#[test]
fn curve_constraint_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let out = canondual(&[
        "curve",
        &fx("example1.json"),
        "--function",
        "constraint:0",
        "--range",
        "-6:6",
        "--samples",
        "13",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let pts = parse_csv(&std::fs::read_to_string(&path).unwrap());
    for (x, v) in pts {
        let h = 0.5 * (0.5 * x * x - 6.0_f64).powi(2) - 15.0;
        assert!((v - h).abs() < 1e-12);
    }
    assert_eq!(
        canondual(&["curve", &fx("example1.json"), "--function", "constraint:1"]).code,
        64
    );
}

#[test]
fn lagrangian_is_a_double_well() {
    let out = canondual(&[
        "curve",
        &fx("example1.json"),
        "--function",
        "lagrangian",
        "--mu",
        "1",
        "--range",
        "-6:6",
        "--samples",
        "2001",
    ]);
    let values: Vec<f64> = parse_csv(&out.stdout).into_iter().map(|p| p.1).collect();
    assert_eq!(count_local_extrema(&values).0, 2);
}

#[test]
fn penalized_curve_is_nonconvex() {
    let out = canondual(&[
        "curve",
        &fx("example1.json"),
        "--function",
        "auglag",
        "--mu",
        "1",
        "--nu",
        "5",
        "--range",
        "-6:6",
        "--samples",
        "4001",
    ]);
    let values: Vec<f64> = parse_csv(&out.stdout).into_iter().map(|p| p.1).collect();
    let (minima, maxima) = count_local_extrema(&values);
    assert!(
        minima >= 2 && maxima >= 1,
        "{minima} minima, {maxima} maxima"
    );
}

#[test]
fn oracle_against_report() {
    let dir = tempfile::tempdir().unwrap();
    let solve = canondual(&["solve", &fx("example1.json"), "--json"]);
    let report = write_temp(&dir, "report.json", &solve.stdout);
    let out = canondual(&[
        "oracle",
        &fx("example1.json"),
        "--box",
        "-6:6",
        "--density",
        "200001",
        "--against",
        &report,
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("certification consistent"));
    let f: f64 = out
        .stdout
        .split_whitespace()
        .nth(4)
        .unwrap()
        .parse()
        .unwrap();
    assert!((f + 0.5).abs() <= 0.02);

    // A report claiming the wrong point is globally optimal is refuted.
    let mut forged: RunReport = serde_json::from_str(&solve.stdout).unwrap();
    forged.rows[2].point.classification = canondual::solver::Classification::GlobalMinCertified;
    let forged_path = write_temp(
        &dir,
        "forged.json",
        &serde_json::to_string(&forged).unwrap(),
    );
    let out = canondual(&[
        "oracle",
        &fx("example1.json"),
        "--box",
        "-6:6",
        "--against",
        &forged_path,
    ]);
    assert_eq!(out.code, 70);
    assert!(out.stderr.contains("certification contradicted"));

    // Reports for another problem are rejected.
    let other = canondual(&["solve", &fx("unconstrained_qp.json"), "--json"]);
    let other_path = write_temp(&dir, "other.json", &other.stdout);
    assert_eq!(
        canondual(&["oracle", &fx("example1.json"), "--against", &other_path]).code,
        65
    );
}

#[test]
fn oracle_infeasible() {
    assert_eq!(canondual(&["oracle", &fx("infeasible.json")]).code, 2);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL,
        -1e3..1e3f64,
    ]
}

fn square(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(finite(), n), n)
}

fn term(n: usize) -> impl Strategy<Value = TermFile> {
    let v = prop_oneof![
        (finite(), finite(), finite()).prop_map(|(a, d, e)| FunctionFile::ShiftedQuadratic {
            a,
            d,
            e
        }),
        Just(FunctionFile::Exponential {}),
    ];
    (v, square(n), prop::collection::vec(finite(), n), finite()).prop_map(|(v, q, b, alpha)| {
        TermFile {
            v,
            lambda: OperatorFile { q, b, alpha },
        }
    })
}

fn problem_file() -> impl Strategy<Value = ProblemFile> {
    (1usize..4).prop_flat_map(|n| {
        (
            square(n),
            prop::collection::vec(finite(), n),
            prop::option::of(term(n)),
            prop::collection::vec(term(n), 0..3),
            prop::collection::vec(term(n), 0..3),
        )
            .prop_map(
                move |(a, c, f_term, inequalities, equalities)| ProblemFile {
                    n,
                    a,
                    c,
                    f_term,
                    inequalities,
                    equalities,
                },
            )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn problem_file_roundtrip(f in problem_file()) {
        let text = f.to_json();
        let back = ProblemFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.to_json(), text);
    }
}
