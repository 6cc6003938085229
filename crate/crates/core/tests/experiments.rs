use num_complex::Complex64;
use serde_json::Value;

use pellipt_core::config::{Command, RunConfig};
use pellipt_core::ellipticity::{ComplexMatrix, MatrixField, MatrixPreset};
use pellipt_core::experiments::{
    boundary_rh, interior_rh, localization_check, run, solvability_scan, ScanSetup, Verdict, SUMMARY_SCHEMA,
};
use pellipt_core::functionals::ntmax;
use pellipt_core::geometry::{DiscreteDomain, DomainPreset};
use pellipt_core::solver::{assemble, BoundaryData, DataFamily, DriftField, DriftSpec, Polynomial, SolutionField};
use pellipt_core::Error;

fn square(h: f64) -> DiscreteDomain {
    DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, h).unwrap()
}

fn solve(d: &DiscreteDomain, fam: &DataFamily) -> (BoundaryData, SolutionField) {
    let s = assemble(
        &MatrixField::constant(ComplexMatrix::identity(d.dim())).unwrap(),
        &DriftField::build(d, &DriftSpec::zero()).unwrap(),
        d,
    )
    .unwrap();
    let f = BoundaryData::new(d, fam).unwrap();
    let u = s.solve_dirichlet(d, &f).unwrap();
    (f, u)
}

fn validate(summary: &Value) {
    let schema: Value = serde_json::from_str(SUMMARY_SCHEMA).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(summary).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn constant_solution_has_unit_ratios() {
    let d = square(1.0 / 32.0);
    let (_, u) = solve(&d, &DataFamily::constant(2.5));
    for p in [0.5, 1.0, 2.0] {
        let [rh, _] = interior_rh(&d, &u, &[0.5, 0.5, 0.0], 1.0 / 16.0, 4.0, p, 0).unwrap();
        assert!((rh.ratio.unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_solution_is_degenerate() {
    let d = square(1.0 / 16.0);
    let zero = DataFamily::constant(0.0);
    let (f, u) = solve(&d, &zero);
    let recs = boundary_rh(&d, &u, &f, &[0.5, 0.0, 0.0], 0.125, 4.0, 1.0, 0).unwrap();
    assert!(recs.iter().all(|r| r.degenerate && r.ratio.is_none()));
    let nt = ntmax(&d, &u.cell_values, 2.0, 1.0).unwrap();
    let big = DiscreteDomain::build(&DomainPreset::Square { side: 9.0 }, 1.0 / 8.0).unwrap();
    let (fb, ub) = solve(&big, &zero);
    let ntb = ntmax(&big, &ub.cell_values, 2.0, 1.0).unwrap();
    let rec = localization_check(&big, &fb, &ntb, &[4.5, 0.0, 0.0], 0.125, 4.0, 2.0, 2).unwrap();
    assert!(rec.degenerate && rec.ratio.is_none());
    assert!(nt.values.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn harmonic_quadratic_interior_ratios_are_stable() {
    let d = square(1.0 / 128.0);
    let (_, u) = solve(
        &d,
        &DataFamily::PolynomialTrace {
            polynomial: Polynomial::X2MinusY2,
        },
    );
    let ratios: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
        .iter()
        .map(|&r| interior_rh(&d, &u, &[0.5, 0.5, 0.0], r, 4.0, 2.0, 0).unwrap()[0].ratio.unwrap())
        .collect();
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    assert!(ratios.iter().all(|r| r.is_finite()));
    assert!(max / min <= 1.5, "{ratios:?}");
}

#[test]
fn preconditions_are_enforced() {
    let d = square(1.0 / 16.0);
    let (f, u) = solve(&d, &DataFamily::constant(1.0));
    assert!(matches!(
        interior_rh(&d, &u, &[0.5, 0.1, 0.0], 0.05, 4.0, 2.0, 0),
        Err(Error::Skipped(_))
    ));
    assert!(matches!(
        boundary_rh(&d, &u, &f, &[0.5, 0.0, 0.0], 0.125, 4.0, 2.0, 0),
        Err(Error::Domain(_))
    ));
    let nt = ntmax(&d, &u.cell_values, 2.0, 1.0).unwrap();
    assert!(matches!(
        localization_check(&d, &f, &nt, &[0.5, 0.0, 0.0], 1.0 / 8.0, 4.0, 2.0, 2),
        Err(Error::Skipped(_))
    ));
    assert!(matches!(
        localization_check(&d, &f, &nt, &[0.5, 0.0, 0.0], 1.0 / 64.0, 4.0, 2.0, 2),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        localization_check(&d, &f, &nt, &[0.5, 0.0, 0.0], 1.0 / 64.0, 2.0, 4.0, 2),
        Err(Error::Config(_))
    ));
}

#[test]
fn refused_levels_become_gaps() {
    let setup = ScanSetup {
        drift: DriftSpec::constant_direction(5.0, vec![1.0, 0.0]),
        ..ScanSetup::square_real()
    };
    let out = solvability_scan(&setup).unwrap();
    assert_eq!(out.gaps.len(), 3);
    assert!(out.gaps.iter().all(|g| g.reason.contains("refused")));
    assert!(out.verdicts.iter().all(|v| v.verdict == Verdict::Gap));
}

#[test]
fn extrapolate_summary_validates_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&RunConfig::new(Command::Extrapolate), &dir.path().join("a"));
    assert!(out.error.is_none(), "{:?}", out.error);
    let summary = read_json(&dir.path().join("a/summary.json"));
    validate(&summary);
    assert_eq!(summary["verdicts"].as_array().unwrap().len(), 4);
    assert!(summary["verdicts"].as_array().unwrap().iter().all(|v| v["verdict"] == "STABLE"));
    let scan = std::fs::read_to_string(dir.path().join("a/scan.csv")).unwrap();
    assert_eq!(scan.lines().count(), 1 + 4 * 3);

    let embedded = RunConfig::from_value(Command::Extrapolate, summary["config"].clone()).unwrap();
    let again = run(&embedded, &dir.path().join("b"));
    assert!(again.error.is_none());
    for f in ["summary.json", "scan.csv", "verdicts.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn every_command_summary_validates() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [Command::Ellipticity, Command::Certify, Command::Solve, Command::Ntmax] {
        let mut c = RunConfig::new(cmd);
        if cmd == Command::Ellipticity {
            c.matrix = MatrixPreset::ScalarComplex { tau: 1.0 };
        }
        let out = run(&c, &dir.path().join(cmd.name()));
        assert!(out.error.is_none(), "{cmd:?}: {:?}", out.error);
        validate(&read_json(&dir.path().join(cmd.name()).join("summary.json")));
    }
    let mut bad = RunConfig::new(Command::Solve);
    bad.matrix = MatrixPreset::RealSpd {
        eigenvalues: vec![1.0, -1.0],
    };
    let out = run(&bad, &dir.path().join("bad"));
    assert_eq!(out.exit_code(), 2);
    let summary = read_json(&dir.path().join("bad/summary.json"));
    validate(&summary);
    assert_eq!(summary["errors"].as_array().unwrap().len(), 1);
}

#[test]
fn solve_constant_identity_holds_with_complex_drifted_operator() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::new(Command::Solve);
    c.domain = Some(DomainPreset::LShape);
    c.matrix = MatrixPreset::ScalarComplex { tau: 1.0 };
    c.drift = DriftSpec::radial_inward(0.05);
    c.data = Some(DataFamily::Constant { re: 1.0, im: -2.0 });
    let out = run(&c, dir.path());
    assert!(out.error.is_none(), "{:?}", out.error);
    assert!(out.summary.checks.iter().any(|k| k.name == "constant_data" && k.passed));
    let text = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').skip(1).map(|s| s.parse().unwrap()).collect();
        assert!((Complex64::new(cols[0], cols[1]) - Complex64::new(1.0, -2.0)).norm() < 1e-10);
    }
}
