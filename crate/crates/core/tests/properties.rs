use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

use pellipt_core::ellipticity::{
    conjugate, form_value, lambda_p, mu_of_matrix, rayleigh_matrix, ComplexMatrix,
};
use pellipt_core::experiments::fractional_exponents;
use pellipt_core::functionals::{local_averages, ntmax, ntmax_split, square_function, truncated_cone_cells};
use pellipt_core::geometry::{modified_cone, point::dist, standard_cone, DiscreteDomain, DomainPreset};

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |v| {
        let entries = v
            .into_iter()
            .enumerate()
            .map(|(k, (re, im))| {
                let shift = if k % (n + 1) == 0 { 1.5 } else { 0.0 };
                Complex64::new(re + shift, im)
            })
            .collect();
        ComplexMatrix::new(n, entries).unwrap()
    })
}

fn vector(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, m)
}

fn xi_of(v: &[f64]) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|k| Complex64::new(v[k], v[n + k])).collect()
}

fn domain(k: usize) -> DiscreteDomain {
    let (preset, h) = match k % 4 {
        0 => (DomainPreset::Square { side: 1.0 }, 1.0 / 16.0),
        1 => (DomainPreset::LShape, 1.0 / 16.0),
        2 => (DomainPreset::Sawtooth, 1.0 / 32.0),
        _ => (DomainPreset::Cube { side: 1.0 }, 1.0 / 8.0),
    };
    DiscreteDomain::build(&preset, h).unwrap()
}

fn field(d: &DiscreteDomain, a: f64, b: f64) -> Vec<Complex64> {
    d.cells()
        .iter()
        .map(|c| Complex64::new((a * c.center[0]).sin() + c.center[2], b * c.center[1] * c.center[0]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realified_form_matches_direct_evaluation(a in matrix(3), p in 1.05..20.0f64, v in vector(6)) {
        let m = rayleigh_matrix(&a, p).unwrap();
        let x = nalgebra::DVector::from_vec(v.clone());
        let quad = (x.transpose() * &m * &x)[(0, 0)];
        let direct = form_value(&a, p, &xi_of(&v)).unwrap();
        prop_assert!((quad - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn lambda_is_a_lower_bound(a in matrix(2), p in 1.05..20.0f64, v in vector(4)) {
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        prop_assume!(norm2 > 1e-6);
        let l = lambda_p(&a, p).unwrap();
        prop_assert!(form_value(&a, p, &xi_of(&v)).unwrap() >= l * norm2 - 1e-12);
    }

    #[test]
    fn positivity_is_symmetric_under_conjugation(a in matrix(2), p in 1.05..20.0f64) {
        let (l, lc) = (lambda_p(&a, p).unwrap(), lambda_p(&a, conjugate(p)).unwrap());
        prop_assume!(l.abs() > 1e-9 && lc.abs() > 1e-9);
        prop_assert_eq!(l > 0.0, lc > 0.0);
    }

    #[test]
    fn lambda_two_is_half_the_hermitian_minimum(a in matrix(3)) {
        let l2 = lambda_p(&a, 2.0).unwrap();
        let h = a.hermitian_part_min_eigenvalue().unwrap();
        prop_assert!((l2 - 0.5 * h).abs() < 1e-12);
    }

    #[test]
    fn mu_is_scale_invariant(tau in -3.0..3.0f64, c in 0.1..10.0f64) {
        let a = ComplexMatrix::scalar(2, Complex64::new(1.0, tau));
        prop_assume!(tau.abs() > 1e-3);
        let m1 = mu_of_matrix(&a).unwrap();
        let m2 = mu_of_matrix(&a.scale(Complex64::new(c, 0.0))).unwrap();
        prop_assert!((m1 - m2).abs() < 1e-9);
    }

    #[test]
    fn exponent_identity_is_exact(num in 1i64..50, den in 1i64..20, n in 3i64..40) {
        let book = fractional_exponents(Rational64::new(num, den), n).unwrap();
        let p = Rational64::new(book.p.0, book.p.1);
        prop_assert_eq!(p, Rational64::new(num, den) * Rational64::new(n - 1, n - 2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cones_sandwich(k in 0usize..4, seed in 0u64..1000, a in 0.2..3.0f64) {
        use rand::SeedableRng;
        let d = domain(k);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = d.sample_boundary_point(&mut rng);
        let small = standard_cone(&d, &q, a).unwrap();
        let mid = modified_cone(&d, &q, a).unwrap();
        let big = standard_cone(&d, &q, 2.0 * a).unwrap();
        prop_assert!(small.is_subset_of(&mid));
        prop_assert!(mid.is_subset_of(&big));
    }

    #[test]
    fn distance_is_one_lipschitz(k in 0usize..4, i in 0usize..10_000, j in 0usize..10_000) {
        let d = domain(k);
        let cells = d.cells();
        let (x, y) = (&cells[i % cells.len()], &cells[j % cells.len()]);
        prop_assert!(x.delta > 0.0);
        prop_assert!((x.delta - y.delta).abs() <= dist(&x.center, &y.center) + 1e-12);
    }

    #[test]
    fn constants_have_constant_averages(k in 0usize..4, re in -3.0..3.0f64, im in -3.0..3.0f64, p in 0.3..6.0f64) {
        let d = domain(k);
        let c = Complex64::new(re, im);
        let u = vec![c; d.cells().len()];
        for w in local_averages(&d, &u, p).unwrap() {
            prop_assert!((w - c.norm()).abs() <= 1e-12 * (1.0 + c.norm()));
        }
        let nt = ntmax(&d, &u, p, 1.0).unwrap();
        for v in nt.values.iter().flatten() {
            prop_assert!((v - c.norm()).abs() <= 1e-12 * (1.0 + c.norm()));
        }
    }

    #[test]
    fn ntmax_is_homogeneous(k in 0usize..3, s in 0.1..1.0f64, t in -2.0..2.0f64, re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let d = domain(k);
        let u = field(&d, 3.0 * s, t);
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() > 1e-3);
        let zu: Vec<Complex64> = u.iter().map(|v| z * v).collect();
        let (a, b) = (ntmax(&d, &u, 2.0, 1.0).unwrap(), ntmax(&d, &zu, 2.0, 1.0).unwrap());
        for (x, y) in a.values.iter().zip(&b.values) {
            match (x, y) {
                (Some(x), Some(y)) => prop_assert!((z.norm() * x - y).abs() <= 1e-10 * (1.0 + y.abs())),
                (None, None) => {}
                _ => prop_assert!(false, "missing value pattern changed"),
            }
        }
    }

    #[test]
    fn split_recovers_the_maximum(k in 0usize..3, s in 0.1..1.0f64, depth in 0.02..0.3f64) {
        let d = domain(k);
        let u = field(&d, 4.0 * s, 1.0);
        let full = ntmax(&d, &u, 2.0, 1.0).unwrap();
        let (m1, m2) = ntmax_split(&d, &u, 2.0, 1.0, depth).unwrap();
        for ((f, a), b) in full.values.iter().zip(&m1.values).zip(&m2.values) {
            let joined = match (a, b) {
                (Some(a), Some(b)) => Some(a.max(*b)),
                (x, None) | (None, x) => *x,
            };
            prop_assert_eq!(*f, joined);
        }
    }

    #[test]
    fn wider_apertures_dominate(k in 0usize..3, s in 0.1..1.0f64, a in 0.3..2.0f64, extra in 0.1..2.0f64) {
        let d = domain(k);
        let u = field(&d, 5.0 * s, -1.0);
        let narrow = ntmax(&d, &u, 2.0, a).unwrap();
        let wide = ntmax(&d, &u, 2.0, a + extra).unwrap();
        for (x, y) in narrow.values.iter().zip(&wide.values) {
            if let Some(x) = x {
                prop_assert!(y.is_some_and(|y| y >= *x - 1e-12));
            }
        }
    }

    #[test]
    fn unnormalized_square_sum_grows_with_height(f in 0usize..1000, d1 in 0.05..0.2f64, extra in 0.01..0.3f64) {
        let d = domain(0);
        let grad = vec![[Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.0), Complex64::new(0.0, 0.0)]; d.cells().len()];
        let face = f % d.faces().len();
        let q = d.faces()[face].centroid;
        let low = square_function(&d, &grad, face, 1.0, d1).unwrap().unwrap_or(0.0);
        let high = square_function(&d, &grad, face, 1.0, d1 + extra).unwrap().unwrap_or(0.0);
        prop_assert!(high * high * (d1 + extra) >= low * low * d1 * (1.0 - 1e-12));
        prop_assert!(truncated_cone_cells(&d, &q, 1.0, d1).len() <= truncated_cone_cells(&d, &q, 1.0, d1 + extra).len());
    }
}
