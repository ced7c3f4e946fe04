use std::f64::consts::PI;

use cascade_core::spectral::ops::{advection_unprojected, divergence, pressure_physical};
use cascade_core::spectral::*;
use cascade_core::{CoreError, Grid};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    Grid::new(n, 2.0 * PI).unwrap()
}

fn max_diff(a: &VectorField, b: &VectorField) -> f64 {
    (0..3)
        .flat_map(|i| a.comp(i).iter().zip(b.comp(i)).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

/// Physical-space rectangle-rule `int |u|^2`.
fn quadrature_sq(u: &PhysicalVector) -> f64 {
    u.inner(u)
}

#[test]
fn zero_field_round_trips_to_zero() {
    let g = grid(8);
    let fft = Fft3::new(g);
    let z = PhysicalVector::zeros(g);
    let s = VectorField::from_physical(&z, &fft).unwrap();
    assert!(s.is_zero());
    assert_eq!(s.to_physical(&fft).unwrap(), z);
}

#[test]
fn single_sine_has_two_conjugate_half_coefficients() {
    let g = grid(16);
    let fft = Fft3::new(g);
    let p = PhysicalScalar::from_fn(g, |x| x[0].sin());
    let s = ScalarField::from_physical(&p, &fft).unwrap();
    let nonzero: Vec<(usize, Complex64)> = s
        .values()
        .iter()
        .cloned()
        .enumerate()
        .filter(|(_, z)| z.norm() > 1e-14)
        .collect();
    // The half spectrum stores k = +1; its conjugate k = -1 is implied.
    assert_eq!(nonzero.len(), 1);
    let (idx, z) = nonzero[0];
    assert_eq!(idx, g.spectral_index(1, 0, 0));
    assert!((z.norm() - 0.5).abs() < 1e-15);
    assert!((z - Complex64::new(0.0, -0.5)).norm() < 1e-15);
}

#[test]
fn size_mismatch_is_an_error() {
    let fft = Fft3::new(grid(8));
    let mut out = vec![Complex64::new(0.0, 0.0); 5];
    assert!(matches!(
        fft.forward(&[0.0; 7], &mut out),
        Err(CoreError::SizeMismatch { .. })
    ));
}

#[test]
fn gradients_are_annihilated_by_leray() {
    let g = grid(16);
    let fft = Fft3::new(g);
    let s = PhysicalScalar::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin() * x[2].cos());
    let grad = gradient(&ScalarField::from_physical(&s, &fft).unwrap());
    assert!(leray_project(&grad).max_abs() < 1e-13 * grad.max_abs());
}

#[test]
fn stokes_power_zero_is_identity_and_one_is_minus_laplacian() {
    let g = grid(16);
    let v = random_solenoidal(g, 1.0, 5.0, 3).unwrap();
    assert_eq!(max_diff(&stokes_power(&v, 0.0).unwrap(), &v), 0.0);
    let a = stokes_power(&v, 1.0).unwrap();
    // -Laplacian via divergence of gradient, component by component.
    for i in 0..3 {
        let c = ScalarField::from_values(g, v.comp(i).to_vec()).unwrap();
        let lap = divergence(&gradient(&c));
        for (x, y) in a.comp(i).iter().zip(lap.values()) {
            assert!((x + y).norm() < 1e-11 * a.max_abs().max(1.0));
        }
    }
}

#[test]
fn sobolev_zero_matches_physical_quadrature() {
    let g = grid(16);
    let fft = Fft3::new(g);
    let v = random_solenoidal(g, 1.0, 6.0, 11).unwrap();
    let q = quadrature_sq(&v.to_physical(&fft).unwrap()).sqrt();
    let s = sobolev_norm(&v, 0.0).unwrap();
    assert!((q - s).abs() <= 1e-10 * s);
    assert_eq!(sobolev_norm(&VectorField::zeros(g), 1.0).unwrap(), 0.0);
}

#[test]
fn parallel_shear_has_no_nonlinearity_or_pressure() {
    let g = grid(16);
    let fft = Fft3::new(g);
    let u = PhysicalVector::from_fn(g, |x| [(x[1]).sin() + 0.3 * (2.0 * x[1]).cos(), 0.0, 0.0]);
    let s = VectorField::from_physical(&u, &fft).unwrap();
    assert!(nonlinear_term(&s, &fft).unwrap().max_abs() < 1e-14);
    assert!(pressure_from_velocity(&s, &fft).unwrap().values().iter().all(|z| z.norm() < 1e-14));
    let zero = VectorField::zeros(g);
    assert!(nonlinear_term(&zero, &fft).unwrap().is_zero());
}

#[test]
fn taylor_green_nonlinearity_and_pressure() {
    let g = grid(16);
    let fft = Fft3::new(g);
    let a = 1.7;
    let u = PhysicalVector::from_fn(g, |x| {
        [a * x[0].cos() * x[1].sin(), -a * x[0].sin() * x[1].cos(), 0.0]
    });
    let s = VectorField::from_physical(&u, &fft).unwrap();
    // (u . grad) u = -(a^2/2)(sin 2x, sin 2y, 0) is a gradient; its projection vanishes.
    let b = nonlinear_term(&s, &fft).unwrap();
    assert!(b.max_abs() < 1e-13);
    let adv = advection_unprojected(&s, &fft).unwrap().to_physical(&fft).unwrap();
    for j in 0..g.physical_len() {
        let n = g.n();
        let x = g.point(j % n, (j / n) % n, j / (n * n));
        let e = [-0.5 * a * a * (2.0 * x[0]).sin(), -0.5 * a * a * (2.0 * x[1]).sin(), 0.0];
        let v = adv.at(j);
        for c in 0..3 {
            assert!((v[c] - e[c]).abs() < 1e-12);
        }
    }
    let p = pressure_physical(&s, &fft).unwrap();
    for j in 0..g.physical_len() {
        let n = g.n();
        let x = g.point(j % n, (j / n) % n, j / (n * n));
        let e = -0.25 * a * a * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos());
        assert!((p.values()[j] - e).abs() < 1e-12);
    }
}

#[test]
fn nyquist_field_is_removed_by_dealiasing() {
    let g = grid(16);
    let fft = Fft3::new(g);
    let p = PhysicalVector::from_fn(g, |x| [0.0, (8.0 * x[0]).cos(), 0.0]);
    let s = VectorField::from_physical(&p, &fft).unwrap();
    assert!(!s.is_zero());
    assert!(dealias(&s).is_zero());
    let low = random_solenoidal(g, 1.0, 4.0, 2).unwrap();
    assert_eq!(max_diff(&dealias(&low), &low), 0.0);
}

fn arb_field(n: usize) -> impl Strategy<Value = VectorField> {
    (any::<u64>(), 1.0f64..3.0).prop_map(move |(seed, lo)| {
        random_solenoidal(grid(n), lo, lo + 4.0, seed).unwrap()
    })
}

fn arb_physical(n: usize) -> impl Strategy<Value = PhysicalVector> {
    proptest::collection::vec(-1.0f64..1.0, 3 * n * n * n).prop_map(move |v| {
        let m = n * n * n;
        PhysicalVector::from_components(
            grid(n),
            [v[..m].to_vec(), v[m..2 * m].to_vec(), v[2 * m..].to_vec()],
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_and_parseval(u in arb_physical(8)) {
        let g = grid(8);
        let fft = Fft3::new(g);
        let s = VectorField::from_physical(&u, &fft).unwrap();
        let back = s.to_physical(&fft).unwrap();
        let scale = u.comps().iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            for (a, b) in back.comp(i).iter().zip(u.comp(i)) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
        let q = quadrature_sq(&u);
        let sp = inner(&s, &s);
        prop_assert!((q - sp).abs() <= 1e-10 * q);
    }

    #[test]
    fn leray_is_idempotent_self_adjoint_and_solenoidal(a in arb_physical(8), b in arb_physical(8)) {
        let fft = Fft3::new(grid(8));
        let va = VectorField::from_physical(&a, &fft).unwrap();
        let vb = VectorField::from_physical(&b, &fft).unwrap();
        let pa = leray_project(&va);
        let pb = leray_project(&vb);
        prop_assert!(max_diff(&leray_project(&pa), &pa) <= 1e-14 * pa.max_abs().max(1e-300));
        prop_assert!(divergence_residual(&pa) < 1e-12);
        let l = inner(&pa, &vb);
        let r = inner(&va, &pb);
        prop_assert!((l - r).abs() <= 1e-10 * (l.abs() + r.abs()).max(1e-12));
    }

    #[test]
    fn nonlinear_term_is_energy_neutral(u in arb_field(16)) {
        let fft = Fft3::new(grid(16));
        let b = nonlinear_term(&u, &fft).unwrap();
        let w = inner(&b, &u);
        let scale = l2_norm(&b) * l2_norm(&u);
        prop_assert!(w.abs() <= 1e-10 * scale);
    }

    #[test]
    fn stokes_powers_compose(u in arb_field(8), a in -1.5f64..1.5, b in -1.5f64..1.5) {
        let ab = stokes_power(&stokes_power(&u, a).unwrap(), b).unwrap();
        let direct = stokes_power(&u, a + b).unwrap();
        prop_assert!(max_diff(&ab, &direct) <= 1e-12 * direct.max_abs());
        let back = stokes_power(&stokes_power(&u, a).unwrap(), -a).unwrap();
        prop_assert!(max_diff(&back, &u) <= 1e-12 * u.max_abs());
    }

    #[test]
    fn dealiasing_is_idempotent(u in arb_physical(8)) {
        let fft = Fft3::new(grid(8));
        let s = VectorField::from_physical(&u, &fft).unwrap();
        let d = dealias(&s);
        prop_assert_eq!(max_diff(&dealias(&d), &d), 0.0);
    }
}
