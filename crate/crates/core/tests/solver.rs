use num_complex::Complex64;
use pellipt_core::ellipticity::{ComplexMatrix, MatrixField};
use pellipt_core::geometry::{DiscreteDomain, DomainPreset};
use pellipt_core::solver::{
    assemble, hardy_check, standard_hardy_family, BoundaryData, DataFamily, DriftField, DriftSpec,
    Polynomial,
};

fn square(h: f64) -> DiscreteDomain {
    DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, h).unwrap()
}

fn solve(d: &DiscreteDomain, a: ComplexMatrix, drift: &DriftSpec, fam: &DataFamily) -> Vec<Complex64> {
    let s = assemble(&MatrixField::constant(a).unwrap(), &DriftField::build(d, drift).unwrap(), d).unwrap();
    let u = s.solve_dirichlet(d, &BoundaryData::new(d, fam).unwrap()).unwrap();
    assert!(u.residual <= 1e-10);
    u.nodal
}

fn max_error_re_z4(h: f64) -> f64 {
    let d = square(h);
    let fam = DataFamily::PolynomialTrace { polynomial: Polynomial::ReZ4 };
    let s = assemble(
        &MatrixField::constant(ComplexMatrix::identity(2)).unwrap(),
        &DriftField::build(&d, &DriftSpec::zero()).unwrap(),
        &d,
    )
    .unwrap();
    let u = s.solve_dirichlet(&d, &BoundaryData::new(&d, &fam).unwrap()).unwrap();
    (0..s.mesh().node_count())
        .map(|n| (u.nodal[n].re - Polynomial::ReZ4.eval(&s.mesh().node_position(n))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn harmonic_quartic_converges_at_second_order() {
    let errs: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0].iter().map(|&h| max_error_re_z4(h)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.2..=4.8).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn complex_scalar_covariance() {
    let d = DiscreteDomain::build(&DomainPreset::LShape, 1.0 / 16.0).unwrap();
    let fam = DataFamily::RandomBumps { seed: 7, count: 5, scale: 0.3 };
    let u = solve(&d, ComplexMatrix::identity(2), &DriftSpec::zero(), &fam);
    for z in [Complex64::new(1.0, 1.0), Complex64::new(0.2, -3.0)] {
        let v = solve(&d, ComplexMatrix::scalar(2, z), &DriftSpec::zero(), &fam);
        let err = u.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}

#[test]
fn drift_solutions_converge_linearly_in_k() {
    let d = square(1.0 / 16.0);
    let fam = DataFamily::PolynomialTrace { polynomial: Polynomial::Xy };
    let a = ComplexMatrix::identity(2);
    let u0 = solve(&d, a.clone(), &DriftSpec::zero(), &fam);
    let diffs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&k| {
            let u = solve(&d, a.clone(), &DriftSpec::radial_inward(k), &fam);
            u.iter().zip(&u0).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        })
        .collect();
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..=2.2).contains(&ratio), "{diffs:?}");
    }
    assert!(diffs[0] / 0.1 < 10.0);
}

#[test]
fn constant_direction_drift_threshold() {
    let d = square(1.0 / 16.0);
    let a = MatrixField::constant(ComplexMatrix::identity(2)).unwrap();
    let margin = |k: f64| {
        let s = assemble(&a, &DriftField::build(&d, &DriftSpec::constant_direction(k, vec![1.0, 0.0])).unwrap(), &d)
            .unwrap();
        s.coercivity_margin().unwrap()
    };
    let mut lo = 0.0;
    let mut hi = 8.0;
    assert!(margin(hi).margin <= 0.0);
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if margin(mid).margin > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = margin(lo);
    eprintln!("threshold K ≈ {lo:.4}, hardy constant {:?}", r.hardy_constant);
    assert!(lo > 0.0 && !r.disagreement);
}

#[test]
fn hardy_family_stable_under_refinement() {
    let ratios: Vec<Vec<f64>> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
        .iter()
        .map(|&h| {
            hardy_check(&square(h), &standard_hardy_family())
                .unwrap()
                .rows
                .iter()
                .map(|r| r.ratio.unwrap())
                .collect()
        })
        .collect();
    eprintln!("{ratios:?}");
    for w in ratios.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            assert!(((a - b) / b).abs() < 0.1);
        }
    }
}
