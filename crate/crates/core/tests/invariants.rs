use proptest::prelude::*;

use pshlab::cutoff::{make_cutoff, CutoffKind};
use pshlab::extension::monomial_exponents;
use pshlab::geometry::{random_unitary, Cylinder, Frame, Point};
use pshlab::linalg::{dual_norm_sq, quadratic_form, CMatrix, C64};
use pshlab::witness::alpha_from_f;

fn binomial(n: usize, k: usize) -> usize {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b)), n)
}

proptest! {
    #[test]
    fn cutoffs_are_monotone_and_bounded(a in 0.0..1.2f64, b in 0.0..1.2f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for kind in [CutoffKind::Thm21, CutoffKind::Thm23] {
            let chi = make_cutoff::<f64>(kind);
            prop_assert!(chi.value(lo) >= chi.value(hi));
            prop_assert!((0.0..=1.0).contains(&chi.value(lo)));
            prop_assert!(chi.derivative(lo).abs() <= chi.slope_bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn random_frames_are_unitary(seed in any::<u64>(), n in 1usize..5) {
        let a: Frame<f64> = random_unitary(seed, n);
        prop_assert!(a.unitarity_defect() < 1e-12);
        prop_assert!((a.determinant().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cylinder_volume_ignores_the_frame(seed in any::<u64>(), r in 0.1..2.0f64, s in 0.1..2.0f64) {
        let center = Point::origin(2);
        let a = Cylinder::new(center.clone(), random_unitary(seed, 2), r, s).unwrap();
        let b = Cylinder::standard(center, r, s).unwrap();
        prop_assert!((a.volume() - b.volume()).abs() <= 1e-14 * b.volume());
        prop_assert!((b.volume() - std::f64::consts::PI.powi(2) * r * r * s * s).abs() <= 1e-13);
    }

    #[test]
    fn alpha_attains_the_dual_norm(m in complex_vec(4), f in complex_vec(2)) {
        // B = M Mᴴ + I is Hermitian positive definite.
        let m = CMatrix::from_row_slice(2, 2, &m);
        let b = &m * m.adjoint() + CMatrix::identity(2, 2);
        let alpha = alpha_from_f(&f, &b).unwrap();
        let q = quadratic_form(&b, &alpha);
        let d = dual_norm_sq(&f, &b).unwrap();
        prop_assert!((q - d).abs() <= 1e-10 * d.max(1e-12));
    }

    #[test]
    fn monomial_counts(n in 1usize..4, d in 0usize..9) {
        let e = monomial_exponents(n, d);
        prop_assert_eq!(e.len(), binomial(n + d, d));
        prop_assert!(e[0].iter().all(|k| *k == 0));
        prop_assert!(e.iter().all(|x| x.len() == n && x.iter().sum::<usize>() <= d));
    }
}
