use super::*;
use crate::fields::{levi_form_fd, parse_field, parse_omega, CorpusField, ZeroHermitian};
use crate::geometry::{parse_region, Point};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn witness_form_is_dbar_of_potential() {
    let z0 = Point::from_pairs(&[(0.1, -0.2), (0.3, 0.0)]).unwrap();
    let xi = vec![c(0.6, 0.0), c(0.0, -0.8)];
    for kind in [CutoffKind::Thm21, CutoffKind::Thm23] {
        let (nu, f) = build_witness_form(&z0, &xi, 0.7, make_cutoff(kind)).unwrap();
        let z = Point::from_pairs(&[(0.35, -0.1), (0.1, 0.2)]).unwrap();
        let h = 1e-6;
        let got = f.coeffs(&z);
        for k in 0..2 {
            let dx = (nu.value(&z.shifted(2 * k, h)) - nu.value(&z.shifted(2 * k, -h))) / (2.0 * h);
            let dy = (nu.value(&z.shifted(2 * k + 1, h)) - nu.value(&z.shifted(2 * k + 1, -h))) / (2.0 * h);
            let dzbar = (dx + c(0.0, 1.0) * dy) * 0.5;
            assert!((got[k] - dzbar).norm() < 1e-7, "{kind:?} {k}");
        }
    }
    assert!(build_witness_form(&z0, &[c(1.0, 0.0), c(1.0, 0.0)], 0.5, make_cutoff(CutoffKind::Thm21)).is_err());
}

#[test]
fn alpha_realises_the_dual_norm() {
    let b = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.0, 0.0)]);
    let f = vec![c(0.2, -1.0), c(0.5, 0.7)];
    let a = alpha_from_f(&f, &b).unwrap();
    let q = linalg::quadratic_form(&b, &a);
    let d = linalg::dual_norm_sq(&f, &b).unwrap();
    assert!((q - d).abs() < 1e-12 * d, "{q} {d}");
    // Σ_j α_j B_{jk} = f_k.
    for k in 0..2 {
        let s: C64 = (0..2).map(|j| a[j] * b[(j, k)]).sum();
        assert!((s - f[k]).norm() < 1e-12);
    }
    let bad = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    assert!(matches!(alpha_from_f(&f, &bad), Err(Error::MetricNotPositive { .. })));
}

#[test]
fn psi_delta_hessian_matches_differences() {
    let w = Point::from_pairs(&[(0.1, 0.1), (-0.2, 0.0)]).unwrap();
    let psi = build_psi_delta(&w, 0.25, 2).unwrap();
    let z = Point::from_pairs(&[(0.3, -0.1), (0.2, 0.4)]).unwrap();
    let exact = psi.hessian(&z).unwrap();
    let fd = levi_form_fd(&psi, &z, 1e-4).unwrap();
    assert!((exact - fd).norm() < 1e-5);
    let g = psi.gradient(&z).unwrap();
    let gfd = fields::wirtinger_grad(&fields::NumericOnly(&psi), &z, 1e-5).unwrap();
    for (a, b) in g.iter().zip(&gfd) {
        assert!((a - b).norm() < 1e-7);
    }
    let singular = build_psi_delta(&w, 0.0, 2).unwrap();
    assert_eq!(singular.smoothness(), Smoothness::Usc);
    assert!(singular.is_pole(&w));
    assert!(build_psi_delta(&w, 0.1, 1).is_err());
}

#[test]
fn no_certificate_for_strictly_psh() {
    let phi = CorpusField::SqNorm { n: 1 };
    let region = parse_region("ball:1", 1).unwrap();
    let scan = scan_sharp_witness(&phi, &ZeroHermitian(1), &region, &WitnessScanOptions::default_for(1)).unwrap();
    assert!(scan.verdict.holds());
    assert!(scan.certificate.is_none());
}

#[test]
fn certificate_for_negative_square_norm() {
    let phi = CorpusField::NegSqNorm { n: 1 };
    let region = parse_region("ball:1", 1).unwrap();
    let omega = ZeroHermitian(1);
    let scan = scan_sharp_witness(&phi, &omega, &region, &WitnessScanOptions::default_for(1)).unwrap();
    let cert = scan.certificate.expect("certificate");
    assert!(cert.e_mantissa < 0.0);
    assert!(cert.s <= 1e4);
    let again = reevaluate_certificate(&cert, &phi, &omega, 2 * cert.grid_per_axis).unwrap();
    assert!(again.is_negative());
}

#[test]
fn certificate_for_saddle() {
    let phi = parse_field("saddle:2", 2).unwrap();
    let region = parse_region("ball:1", 2).unwrap();
    let omega = ZeroHermitian(2);
    let scan = scan_sharp_witness(&phi, &omega, &region, &WitnessScanOptions::default_for(2)).unwrap();
    let cert = scan.certificate.expect("certificate");
    assert!(cert.e_mantissa < 0.0);
    // The offending direction is the second axis.
    assert!(cert.xi.coords()[1].norm() > 0.999);
}

#[test]
fn omega_shifts_the_verdict() {
    // |z|² satisfies i∂∂̄φ ≥ ω for ω = 0.5 but not ω = 2.
    let phi = CorpusField::SqNorm { n: 1 };
    let region = parse_region("ball:1", 1).unwrap();
    let opts = WitnessScanOptions::default_for(1);
    let weak = parse_omega("scalar:0.5", 1).unwrap();
    assert!(scan_sharp_witness(&phi, weak.as_ref(), &region, &opts).unwrap().certificate.is_none());
    let strong = parse_omega("scalar:2", 1).unwrap();
    let scan = scan_sharp_witness(&phi, strong.as_ref(), &region, &opts).unwrap();
    assert!(scan.certificate.unwrap().e_mantissa < 0.0);
}

#[test]
fn coarse_bound_holds_on_sq_norm() {
    let phi = CorpusField::SqNorm { n: 1 };
    let w = Point::from_pairs(&[(0.2, -0.1)]).unwrap();
    let r = coarse_rhs_bound(&phi, 2.0, 2.0, &w, 0.5, 0.25, 1.0, 81).unwrap();
    assert!(r.holds, "{r:?}");
    assert!(r.pointwise_excess <= 1e-9, "{}", r.pointwise_excess);
    assert_eq!(r.inf_source, "closed-form");
    assert!((r.c_const - 16.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!(coarse_rhs_bound(&phi, 2.0, 2.0, &w, 0.5, 0.25, 1.0, 21).is_err());
}

#[test]
fn modulus_needs_continuity() {
    let phi = CorpusField::LogAbs { a: Point::origin(1) };
    let region = parse_region("ball:1", 1).unwrap();
    let err = modulus_of_continuity(&phi, &region, 0.1, 11).unwrap_err();
    assert!(err.to_string().contains("requires continuity"), "{err}");
}

#[test]
fn modulus_of_linear_field() {
    // Re z has modulus exactly ε; the grid sees the largest node gap below ε.
    let phi = parse_field("re_linear", 1).unwrap();
    let region = parse_region("box:1", 1).unwrap();
    let o = modulus_of_continuity(&phi, &region, 0.2, 11).unwrap();
    assert!((o - 0.2).abs() < 1e-12, "{o}");
    let lip = lipschitz_estimate(&phi, &region, 11).unwrap();
    assert!((lip - 1.0).abs() < 1e-12, "{lip}");
}

#[test]
fn cm_rules() {
    assert_eq!(CmRule::parse("1").unwrap(), CmRule::Const { c: 1.0 });
    assert_eq!(CmRule::parse("poly:2").unwrap(), CmRule::Poly { k: 2.0 });
    assert_eq!(CmRule::parse("exp_sqrt").unwrap(), CmRule::ExpSqrt);
    assert!(CmRule::parse("const:0.5").is_err());
    assert!(CmRule::parse("tower:1").is_err());
    assert!((CmRule::Exp { a: 0.5 }.log_c(4.0) - 2.0).abs() < 1e-15);
}

#[test]
fn growth_is_admissible_for_bounded_constants() {
    let lip = 2.0;
    let report = coarse_constant_growth(&CmRule::Const { c: 1.0 }, &[1.0, 1e2, 1e4, 1e6], 2.0, 1, 1.0, &|eps| lip * eps, 1e-4);
    assert!(report.admissible);
    let last = report.rows.last().unwrap();
    assert!(last.log_c_prime_over_m > 0.0);
    let exp = coarse_constant_growth(&CmRule::Exp { a: 0.5 }, &[1e6], 2.0, 1, 1.0, &|eps| lip * eps, 1e-4);
    assert!(!exp.admissible);
}

#[test]
fn alpha_s_is_f_over_s_near_the_center() {
    // On B(z0, r/2) the Levi matrix of ψ_s is s·I.
    let z0 = Point::from_pairs(&[(0.1, -0.1), (0.0, 0.2)]).unwrap();
    let xi = vec![c(0.0, 1.0), c(0.0, 0.0)];
    let r = 0.6;
    let (_, f) = build_witness_form(&z0, &xi, r, make_cutoff(CutoffKind::Thm21)).unwrap();
    let omega = ZeroHermitian(2);
    for s in [10.0, 1e3] {
        let psi = build_psi_s(&z0, r, s).unwrap();
        let alpha = AlphaS { f: &f, psi: &psi, omega: &omega };
        for d in [(0.2, 0.0, 0.0, 0.1), (-0.1, 0.15, 0.05, -0.1), (0.0, 0.0, 0.0, 0.29)] {
            let z = z0.offset(&[c(d.0, d.1), c(d.2, d.3)]);
            let want = f.coeffs(&z);
            let got = alpha.coeffs(&z);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w / s).norm() <= 1e-14 * (w.norm() / s).max(1e-300), "{g} {w}");
            }
        }
    }
}

#[test]
fn modulus_of_square_norm() {
    // On the closed unit disc, sup |φ(z) − φ(w)| over |z − w| ≤ ε is 1 − (1 − ε)².
    let phi = CorpusField::SqNorm { n: 1 };
    let region = parse_region("ball:1", 1).unwrap();
    let eps = 0.25;
    let exact = 2.0 * eps - eps * eps;
    let o = modulus_of_continuity(&phi, &region, eps, 41).unwrap();
    assert!(o <= exact + 1e-12 && o >= 0.85 * exact, "{o} {exact}");
}

#[test]
fn functional_is_nonnegative_for_square_norm() {
    let phi = CorpusField::SqNorm { n: 1 };
    let omega = ZeroHermitian(1);
    let z0 = Point::from_pairs(&[(0.1, 0.0)]).unwrap();
    let (_, f) = build_witness_form(&z0, &[c(1.0, 0.0)], 0.5, make_cutoff(CutoffKind::Thm21)).unwrap();
    let grid = GridDiscretization::around(&f.support(), 64).unwrap();
    for s in [10.0, 1e2, 1e3] {
        let psi = build_psi_s(&z0, 0.5, s).unwrap();
        let alpha = AlphaS { f: &f, psi: &psi, omega: &omega };
        let e = estimate_functional_e(&alpha, &phi, &psi, &omega, &grid).unwrap();
        assert!(e.mantissa >= 0.0 && e.levi > 0.0, "{s}: {e:?}");
    }
}
