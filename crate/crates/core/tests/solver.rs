//! Critical-point enumeration and classification on small problems with
//! known answers.

mod common;

use canondual::assembly::DualPoint;
use canondual::model::{
    eval_objective, CanonicalFunction, CanonicalTerm, Problem, QuadraticOperator,
};
use canondual::solver::{
    critical_point, select_biggest_local_max, select_global, solve_critical_points, verify_gap,
    Classification, SolverConfig,
};
use canondual::Error;
use common::{example_one, fixture, linear, DOUBLE_WELL_POINTS};
use nalgebra::{DMatrix, DVector};

fn scalar(q: f64, c: f64) -> Problem {
    Problem::new(DMatrix::from_element(1, 1, q), DVector::from_element(1, c)).unwrap()
}

/// `g(x) = ½(bᵀx)² − ½ ≤ 0`, i.e. `|bᵀx| ≤ 1`.
fn slab(b: &[f64]) -> CanonicalTerm {
    CanonicalTerm::new(
        CanonicalFunction::shifted_quadratic(1.0, 0.0, -0.5).unwrap(),
        linear(b),
    )
}

#[test]
fn example_matches_reference_points() {
    let pts = solve_critical_points(&example_one(), &SolverConfig::default()).unwrap();
    assert_eq!(pts.len(), 4);
    for (pt, row) in pts.iter().zip(DOUBLE_WELL_POINTS) {
        assert!((pt.x[0] - row[0]).abs() <= 0.01);
        assert!((pt.dual.mu[0] - row[1]).abs() <= 0.01);
        assert!((pt.dual.sigma_h[0] - row[2]).abs() <= 0.01);
        assert!((pt.primal_value - row[3]).abs() <= 0.01);
        assert!((pt.dual_value.unwrap() - row[4]).abs() <= 0.01);
        assert!((pt.g_eigenvalues[0] - row[5]).abs() <= 0.01);
    }
}

#[test]
fn example_points_solve_the_quartic() {
    // x(1 + μσ) = 1 with σ = ½x² − 6 and h(x) = 0 gives (½x² − 6)² = 30.
    let r = 30f64.sqrt();
    let mut roots: Vec<f64> = [6.0 + r, 6.0 - r]
        .iter()
        .flat_map(|&s| {
            let x = (2.0 * s).sqrt();
            [x, -x]
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    let pts = solve_critical_points(&example_one(), &SolverConfig::default()).unwrap();
    let mut xs: Vec<f64> = pts.iter().map(|p| p.x[0]).collect();
    xs.sort_by(f64::total_cmp);
    for (a, b) in xs.iter().zip(&roots) {
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
    for p in &pts {
        let mu = (1.0 / p.x[0] - 1.0) / (0.5 * p.x[0] * p.x[0] - 6.0);
        assert!((p.dual.mu[0] - mu).abs() <= 1e-9);
    }
}

#[test]
fn global_and_biggest_max_selection() {
    let pts = solve_critical_points(&example_one(), &SolverConfig::default()).unwrap();
    let g = select_global(&pts).unwrap();
    assert!((g.x[0] - 1.0225).abs() < 1e-3);
    let m = select_biggest_local_max(&pts).unwrap();
    assert!((m.x[0] + 4.7911).abs() < 1e-3);
}

#[test]
fn seeds_near_a_point_return_it() {
    let p = example_one();
    let all = solve_critical_points(&p, &SolverConfig::default()).unwrap();
    for target in &all {
        let x = target.x[0];
        let mu = target.dual.mu[0];
        let cfg = SolverConfig {
            x_box: vec![(x - 0.05, x + 0.05)],
            mu_box: (mu - 0.01, mu + 0.01),
            grid_density: 3,
            ..SolverConfig::default()
        };
        let local = solve_critical_points(&p, &cfg).unwrap();
        assert_eq!(local.len(), 1, "near x = {x}");
        assert!((local[0].x[0] - x).abs() <= 1e-9);
        assert_eq!(local[0].classification, target.classification);
    }
}

#[test]
fn mirrored_problem_mirrors_points() {
    // Replacing c by −c maps x to −x and leaves μ, σ and values unchanged.
    let cfg = SolverConfig::default();
    let a = solve_critical_points(&common::double_well(1.0, 1.0, 6.0, 15.0), &cfg).unwrap();
    let b = solve_critical_points(&common::double_well(1.0, -1.0, 6.0, 15.0), &cfg).unwrap();
    assert_eq!(a.len(), b.len());
    for pa in &a {
        let pb = b
            .iter()
            .find(|q| (q.x[0] + pa.x[0]).abs() < 1e-8)
            .expect("mirrored point");
        assert!((pa.dual.mu[0] - pb.dual.mu[0]).abs() < 1e-8);
        assert!((pa.primal_value - pb.primal_value).abs() < 1e-8);
        assert_eq!(pa.classification, pb.classification);
    }
}

#[test]
fn duality_gap_vanishes_on_fixtures() {
    for name in [
        "example1.json",
        "unconstrained_qp.json",
        "linear_inequality.json",
    ] {
        let pts = solve_critical_points(&fixture(name), &SolverConfig::default()).unwrap();
        for p in &pts {
            assert!(
                verify_gap(p) <= 1e-6 * (1.0 + p.primal_value.abs()),
                "{name}: {p:?}"
            );
        }
    }
}

#[test]
fn unconstrained_quadratic_has_one_point() {
    let p = fixture("unconstrained_qp.json");
    let pts = solve_critical_points(&p, &SolverConfig::default()).unwrap();
    assert_eq!(pts.len(), 1);
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let x = a
        .lu()
        .solve(&DVector::from_column_slice(&[1.0, -1.0]))
        .unwrap();
    assert!((pts[0].x[0] - x[0]).abs() < 1e-10 && (pts[0].x[1] - x[1]).abs() < 1e-10);
    assert_eq!(pts[0].classification, Classification::GlobalMinCertified);
}

#[test]
fn active_inequality() {
    // min ½x² − 2x s.t. |x| ≤ 1: x = 1, λ = 1.
    let p = scalar(1.0, 2.0).with_inequality(slab(&[1.0])).unwrap();
    let pts = solve_critical_points(&p, &SolverConfig::default()).unwrap();
    assert_eq!(pts.len(), 1);
    assert!((pts[0].x[0] - 1.0).abs() < 1e-10);
    assert!((pts[0].dual.lambda[0] - 1.0).abs() < 1e-10);
    assert_eq!(pts[0].classification, Classification::GlobalMinCertified);
}

#[test]
fn inactive_inequality() {
    // min ½x² − x/2 s.t. |x| ≤ 1: interior x = ½, λ = 0.
    let p = scalar(1.0, 0.5).with_inequality(slab(&[1.0])).unwrap();
    let pts = solve_critical_points(&p, &SolverConfig::default()).unwrap();
    assert_eq!(pts.len(), 1);
    assert!((pts[0].x[0] - 0.5).abs() < 1e-10);
    assert_eq!(pts[0].dual.lambda[0], 0.0);
}

#[test]
fn two_inequalities_in_the_plane() {
    // min ½‖x‖² − (3, 0.5)ᵀx s.t. |x₁| ≤ 1, |x₂| ≤ 1: x = (1, ½), λ = (2, 0).
    let p = Problem::new(
        DMatrix::identity(2, 2),
        DVector::from_column_slice(&[3.0, 0.5]),
    )
    .unwrap()
    .with_inequality(slab(&[1.0, 0.0]))
    .unwrap()
    .with_inequality(slab(&[0.0, 1.0]))
    .unwrap();
    let cfg = SolverConfig {
        x_box: vec![(-2.0, 2.0)],
        grid_density: 5,
        ..SolverConfig::default()
    };
    let pts = solve_critical_points(&p, &cfg).unwrap();
    assert_eq!(pts.len(), 1);
    let q = &pts[0];
    assert!((q.x[0] - 1.0).abs() < 1e-10 && (q.x[1] - 0.5).abs() < 1e-10);
    assert!((q.dual.lambda[0] - 2.0).abs() < 1e-10 && q.dual.lambda[1] == 0.0);
}

#[test]
fn exponential_objective_term() {
    // min eˣ + ½x² − x: stationary at x = 0 with f = 1.
    let f = CanonicalTerm::new(CanonicalFunction::Exponential, linear(&[1.0]));
    let p = scalar(1.0, 1.0).with_objective_term(f).unwrap();
    let pts = solve_critical_points(&p, &SolverConfig::default()).unwrap();
    assert_eq!(pts.len(), 1);
    assert!(pts[0].x[0].abs() < 1e-10);
    assert!((pts[0].primal_value - 1.0).abs() < 1e-10);
    assert!((pts[0].dual.sigma_f.unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn circle_constraint_in_the_plane() {
    // min ½‖x‖² − x₁ on ½(½‖x‖²)² = 2, i.e. ‖x‖ = 2. Stationarity forces
    // x = (±2, 0) with 1 + 2μ = ±½.
    let h = CanonicalTerm::new(
        CanonicalFunction::shifted_quadratic(1.0, 0.0, -2.0).unwrap(),
        QuadraticOperator::new(DMatrix::identity(2, 2), DVector::zeros(2), 0.0).unwrap(),
    );
    let p = Problem::new(
        DMatrix::identity(2, 2),
        DVector::from_column_slice(&[1.0, 0.0]),
    )
    .unwrap()
    .with_equality(h)
    .unwrap();
    let cfg = SolverConfig {
        x_box: vec![(-3.0, 3.0)],
        grid_density: 9,
        ..SolverConfig::default()
    };
    let pts = solve_critical_points(&p, &cfg).unwrap();
    assert_eq!(pts.len(), 2);
    let (right, left) = (&pts[0], &pts[1]);
    assert!((right.x[0] - 2.0).abs() < 1e-9 && right.x[1].abs() < 1e-9);
    assert!((right.dual.mu[0] + 0.25).abs() < 1e-9);
    assert!((eval_objective(&p, &right.x).unwrap()).abs() < 1e-9);
    assert!((left.x[0] + 2.0).abs() < 1e-9 && left.x[1].abs() < 1e-9);
    assert!((left.dual.mu[0] + 0.75).abs() < 1e-9);
    // G ≻ 0 but μ < 0: the certificate does not apply.
    assert_eq!(right.classification, Classification::Unclassified);
    assert_eq!(
        left.classification,
        Classification::BiggestLocalMaxCertified
    );
}

#[test]
fn tie_break_prefers_smaller_x() {
    let p = example_one();
    let cfg = SolverConfig::default();
    let pts = solve_critical_points(&p, &cfg).unwrap();
    let g = select_global(&pts).unwrap().clone();
    let mut twin = g.clone();
    twin.x[0] += 1e-12;
    let both = [twin.clone(), g.clone()];
    assert_eq!(select_global(&both).unwrap().x, g.x);
    let both = [g.clone(), twin];
    assert_eq!(select_global(&both).unwrap().x, g.x);
}

#[test]
fn degenerate_and_singular_labels() {
    let p = example_one();
    let cfg = SolverConfig::default();
    let d = DualPoint {
        sigma_f: None,
        lambda: vec![],
        mu: vec![0.0],
        sigma_g: vec![],
        sigma_h: vec![-6.0],
    };
    let pt = critical_point(&p, vec![0.0], d, &cfg).unwrap();
    assert_eq!(pt.classification, Classification::DegenerateMultiplier);
    let d = DualPoint {
        sigma_f: None,
        lambda: vec![],
        mu: vec![0.5],
        sigma_g: vec![],
        sigma_h: vec![-2.0],
    };
    let pt = critical_point(&p, vec![0.0], d, &cfg).unwrap();
    assert_eq!(pt.classification, Classification::SingularG);
    assert!(pt.dual_value.is_none());
}

#[test]
fn infeasible_problem_reports_no_convergence() {
    let err =
        solve_critical_points(&fixture("infeasible.json"), &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, Error::NoConvergence(_)), "{err:?}");
}

#[test]
fn too_many_inequalities() {
    let mut p = scalar(1.0, 0.0);
    for _ in 0..13 {
        p = p.with_inequality(slab(&[1.0])).unwrap();
    }
    assert!(matches!(
        solve_critical_points(&p, &SolverConfig::default()),
        Err(Error::ActiveSetExplosion { m: 13, .. })
    ));
}

#[test]
fn deterministic_output() {
    let p = example_one();
    let cfg = SolverConfig::default();
    let a = solve_critical_points(&p, &cfg).unwrap();
    for _ in 0..3 {
        assert_eq!(solve_critical_points(&p, &cfg).unwrap(), a);
    }
}
