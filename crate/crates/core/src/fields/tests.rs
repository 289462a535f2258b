use super::*;
use crate::geometry::DomainBox;

fn pt(c: &[(f64, f64)]) -> ComplexPoint {
    Point::from_pairs(c).unwrap()
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |a, c| a.max(c.norm()))
}

#[test]
fn gradients_of_simple_fields() {
    let z = pt(&[(0.3, -0.7), (1.1, 0.2)]);
    let sq = CorpusField::SqNorm { n: 2 };
    let g = wirtinger_grad(&sq, &z, DEFAULT_FD_STEP).unwrap();
    for (gj, zj) in g.iter().zip(z.coords()) {
        assert!((gj - zj.conj()).norm() < 1e-8);
    }

    let lin = parse_field("re_linear", 2).unwrap();
    let g = wirtinger_grad(&lin, &z, DEFAULT_FD_STEP).unwrap();
    assert!((g[0] - C64::new(0.5, 0.0)).norm() < 1e-9);
    assert!(g[1].norm() < 1e-9);

    let log = parse_field("log_abs", 1).unwrap();
    let g = wirtinger_grad(&log, &pt(&[(1.0, 0.0)]), DEFAULT_FD_STEP).unwrap();
    assert!((g[0] - C64::new(0.5, 0.0)).norm() < 1e-6);
}

#[test]
fn closed_form_gradients_match_differences() {
    let z = pt(&[(0.4, 0.3), (-0.2, 0.5)]);
    for f in CorpusField::all(2) {
        if f.smoothness_at(&z) < Smoothness::C2 {
            continue;
        }
        let exact = f.gradient(&z).unwrap();
        let fd = wirtinger_grad(&f, &z, DEFAULT_FD_STEP).unwrap();
        let err = exact.iter().zip(&fd).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-5, "{}: {err}", f.id());
    }
}

#[test]
fn stencil_on_pole_is_an_error() {
    let log = parse_field("log_abs", 1).unwrap();
    let err = wirtinger_grad(&log, &pt(&[(0.0, 0.0)]), 1e-3).unwrap_err();
    assert!(err.to_string().contains("pole in stencil"));
}

#[test]
fn levi_matrices_of_examples() {
    let z = pt(&[(0.2, 0.1), (-0.3, 0.4)]);
    let l = levi_form_fd(&CorpusField::SqNorm { n: 2 }, &z, DEFAULT_FD_STEP).unwrap();
    assert!(max_entry(&(l - CMatrix::identity(2, 2))) < 1e-6);

    let saddle = parse_field("saddle:2", 2).unwrap();
    let l = levi_form_fd(&saddle, &z, DEFAULT_FD_STEP).unwrap();
    let mut want = CMatrix::identity(2, 2);
    want[(1, 1)] = C64::new(-2.0, 0.0);
    assert!(max_entry(&(l - want)) < 1e-6);

    let l = levi_form_fd(&CorpusField::Log1pSq { n: 1 }, &Point::origin(1), DEFAULT_FD_STEP).unwrap();
    assert!((l[(0, 0)].re - 1.0).abs() < 1e-6);
}

#[test]
fn levi_output_is_exactly_hermitian() {
    let z = pt(&[(0.35, -0.15), (0.25, 0.45)]);
    for f in CorpusField::all(2) {
        if f.smoothness_at(&z) < Smoothness::C2 {
            continue;
        }
        for m in [
            levi_form(&f, &z, DEFAULT_FD_STEP).unwrap(),
            levi_form(&NumericOnly(&f), &z, DEFAULT_FD_STEP).unwrap(),
        ] {
            assert_eq!(m.clone(), m.adjoint(), "{}", f.id());
        }
    }
}

// Independent oracle: second derivatives of log|z|² written out in real
// coordinates, combined into ∂²/∂z∂z̄ by the Laplacian identity (n = 1).
#[test]
fn log1p_levi_against_real_laplacian() {
    let f = CorpusField::Log1pSq { n: 1 };
    for &(x, y) in &[(0.3, 0.2), (-0.7, 0.5), (1.2, -0.4)] {
        let q = 1.0 + x * x + y * y;
        // Δ log q = 4/q²
        let want = 4.0 / (q * q) / 4.0;
        let got = levi_form(&NumericOnly(&f), &pt(&[(x, y)]), DEFAULT_FD_STEP).unwrap();
        assert!((got[(0, 0)].re - want).abs() < 1e-6);
    }
}

fn corpus_points() -> Vec<ComplexPoint> {
    vec![pt(&[(0.45, -0.2), (0.15, 0.3)]), pt(&[(-0.3, 0.6), (0.5, -0.1)])]
}

#[test]
fn finite_differences_converge_at_second_order() {
    for f in CorpusField::all(2) {
        if matches!(
            f,
            CorpusField::SqNorm { .. }
                | CorpusField::NegSqNorm { .. }
                | CorpusField::Saddle { .. }
                | CorpusField::ReLinear { .. }
                | CorpusField::Cross
        ) {
            // quadratic or linear: differences are exact up to rounding
            continue;
        }
        for z in corpus_points() {
            let exact = f.hessian(&z).unwrap();
            let e1 = max_entry(&(levi_form_fd(&f, &z, 1e-2).unwrap() - &exact));
            let e2 = max_entry(&(levi_form_fd(&f, &z, 5e-3).unwrap() - &exact));
            let ratio = e1 / e2;
            assert!((3.5..=4.5).contains(&ratio), "{}: ratio {ratio}", f.id());
        }
    }
}

#[test]
fn usc_fields_refuse_levi_form() {
    let f = CorpusField::MaxLog;
    let on_ridge = pt(&[(0.5, 0.0), (0.0, 0.5)]);
    let err = levi_form(&f, &on_ridge, DEFAULT_FD_STEP).unwrap_err();
    assert!(matches!(err, Error::Regularity { .. }));
    let usc = FnField::new(1, Smoothness::Usc, |z| z.norm());
    assert!(levi_form(&usc, &pt(&[(1.0, 0.0)]), 1e-3).is_err());
    let off_ridge = pt(&[(0.9, 0.0), (0.0, 0.3)]);
    assert!(levi_form(&f, &off_ridge, DEFAULT_FD_STEP).is_ok());
}

#[test]
fn min_eigen_examples() {
    let z = Point::origin(2);
    let saddle = parse_field("saddle:2", 2).unwrap();
    let e = min_levi_eigenvalue(&saddle, &ZeroHermitian(2), &z).unwrap();
    assert!((e.lambda_min + 2.0).abs() < 1e-12);
    assert!(e.xi.coords()[0].norm() < 1e-12);
    assert!((e.xi.coords()[1].norm() - 1.0).abs() < 1e-12);

    let sq = CorpusField::SqNorm { n: 2 };
    let e = min_levi_eigenvalue(&sq, &ZeroHermitian(2), &z).unwrap();
    assert!((e.lambda_min - 1.0).abs() < 1e-12);
    assert!((e.xi.norm() - 1.0).abs() < 1e-12);

    let e = min_levi_eigenvalue(&CorpusField::Cross, &ZeroHermitian(2), &z).unwrap();
    assert!((e.lambda_min + 0.5).abs() < 1e-12);
    assert!(e.residual <= 1e-8);
}

#[test]
fn eigen_direction_realizes_levi_form_value() {
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.3, 0.0),
            C64::new(0.2, 0.7),
            C64::new(0.2, -0.7),
            C64::new(-0.4, 0.0),
        ],
    );
    let e = min_eigen_of(&m).unwrap();
    let value = linalg::quadratic_form(&m, e.xi.coords());
    assert!((value - e.lambda_min).abs() < 1e-12);
    // trace − λ_min is the other eigenvalue; product is the determinant
    let other = -0.1 - e.lambda_min;
    assert!((e.lambda_min * other - (-0.12 - 0.53)).abs() < 1e-12);
    assert!(e.residual <= 1e-8);
}

#[test]
fn lower_bound_verdicts() {
    let ball = DomainBox::ball(Point::origin(1), 1.0).unwrap();
    let zero = ZeroHermitian(1);
    let v = check_lower_bound(&CorpusField::SqNorm { n: 1 }, &zero, &ball, 9, 1e-9).unwrap();
    assert!(v.holds());

    match check_lower_bound(&CorpusField::NegSqNorm { n: 1 }, &zero, &ball, 9, 1e-9).unwrap() {
        LowerBoundVerdict::Violated { c, .. } => assert!((c - 1.0).abs() < 1e-4),
        other => panic!("{other:?}"),
    }

    let quartic = FnField::new(1, Smoothness::C2, |z| z.norm_sqr().powi(2));
    let omega = FnHermitian::new(1, |z| CMatrix::from_element(1, 1, C64::new(2.0 * z.norm_sqr(), 0.0)));
    let v = check_lower_bound(&quartic, &omega, &ball, 9, 1e-6).unwrap();
    assert!(v.holds(), "{v:?}");

    let log = parse_field("log_abs", 1).unwrap();
    assert!(matches!(
        check_lower_bound(&log, &zero, &ball, 9, 1e-9),
        Err(Error::PoleInRegion { .. })
    ));
}

#[test]
fn parse_errors_name_the_field() {
    assert!(parse_field("nope", 1).unwrap_err().to_string().contains("func"));
    assert!(parse_field("saddle:x", 2).unwrap_err().to_string().contains("func.saddle"));
    assert!(parse_field("cross", 1).is_err());
    let f = parse_field("log_abs:[[0.5,0.0]]", 1).unwrap();
    assert_eq!(f.eval(&pt(&[(1.5, 0.0)])), 0.0);
    let omega = parse_omega("scalar:2", 2).unwrap();
    assert_eq!(omega.coeffs(&Point::origin(2))[(1, 1)], C64::new(2.0, 0.0));
    assert!(parse_omega("bad", 2).is_err());
}

#[test]
fn non_hermitian_omega_rejected() {
    let omega = FnHermitian::new(2, |_| {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        m
    });
    assert!(omega.checked_coeffs(&Point::origin(2)).is_err());
}

#[test]
fn ball_infima_bound_samples() {
    let c = pt(&[(0.3, 0.1), (-0.2, 0.2)]);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
    let ball = DomainBox::ball(c.clone(), 0.4).unwrap();
    for f in CorpusField::all(2) {
        let Some(inf) = f.ball_infimum(&c, 0.4) else { continue };
        for _ in 0..500 {
            let z = ball.sample_uniform(&mut rng);
            assert!(f.eval(&z) >= inf - 1e-12, "{}", f.id());
        }
    }
}
