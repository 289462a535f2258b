use super::*;
use crate::fields::{parse_field, CorpusField};
use crate::forms::{Bump, BumpConst, BumpZbar2, FnForm};
use crate::geometry::{DomainBox, Point};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn unit_bump(n: usize) -> Bump {
    Bump::new(Point::origin(n), 1.0)
}

fn e1(n: usize) -> Vec<C64> {
    let mut xi = vec![c(0.0, 0.0); n];
    xi[0] = c(1.0, 0.0);
    xi
}

#[test]
fn zero_form_gives_zero_report() {
    let support = DomainBox::ball(Point::origin(2), 1.0).unwrap();
    let grid = GridDiscretization::around(&support, 12).unwrap();
    let phi = CorpusField::SqNorm { n: 2 };
    let r = bochner_residual(&FnForm::zero(support), &phi, &grid).unwrap();
    assert_eq!((r.lhs, r.rhs, r.residual), (0.0, 0.0, 0.0));
}

#[test]
fn radial_bump_integral_oracle() {
    let b = unit_bump(1);
    let grid = GridDiscretization::around(&b.support(), 201).unwrap();
    let g: Vec<f64> = grid.sample(|_, z| b.value(z).powi(2));
    let zero = parse_field("zero", 1).unwrap();
    let v = crate::grid::integrate_weighted(&grid, &g, &zero).unwrap().value();
    // (1 − t)^12 integrates to π/13.
    assert!((v - std::f64::consts::PI / 13.0).abs() < 1e-6, "{v}");
}

#[test]
fn flat_weight_in_one_variable() {
    // With φ = 0 and n = 1 the identity reads ∫|∂g/∂z̄|² = ∫|∂g/∂z|².
    let phi = parse_field("zero", 1).unwrap();
    let form = BumpZbar2 { bump: unit_bump(1) };
    let grid = GridDiscretization::around(&form.support(), 256).unwrap();
    let r = bochner_residual(&form, &phi, &grid).unwrap();
    assert_eq!(r.levi, 0.0);
    assert_eq!(r.dbar, 0.0);
    assert!(r.residual <= 1e-3, "{r:?}");
}

#[test]
fn identity_holds_in_one_variable() {
    for id in ["zero", "sq_norm"] {
        let phi = parse_field(id, 1).unwrap();
        let forms: Vec<Box<dyn FormField01>> = vec![
            Box::new(BumpConst {
                xi: e1(1),
                bump: unit_bump(1),
            }),
            Box::new(BumpZbar2 { bump: unit_bump(1) }),
        ];
        for f in &forms {
            let grid = GridDiscretization::around(&f.support(), 256).unwrap();
            let r = bochner_residual(f.as_ref(), &phi, &grid).unwrap();
            assert!(r.residual <= 1e-3, "{id} {}: {r:?}", f.name());
        }
    }
}

#[test]
fn identity_holds_in_two_variables() {
    for id in ["zero", "sq_norm"] {
        let phi = parse_field(id, 2).unwrap();
        let forms: Vec<Box<dyn FormField01>> = vec![
            Box::new(BumpConst {
                xi: vec![c(0.6, 0.0), c(0.0, 0.8)],
                bump: unit_bump(2),
            }),
            Box::new(BumpZbar2 { bump: unit_bump(2) }),
        ];
        for f in &forms {
            let grid = GridDiscretization::around(&f.support(), 24).unwrap();
            let r = bochner_residual(f.as_ref(), &phi, &grid).unwrap();
            assert!(r.residual <= 5e-3, "{id} {}: {r:?}", f.name());
        }
    }
}

#[test]
fn residual_decays_under_refinement() {
    let phi = CorpusField::SqNorm { n: 1 };
    let form = BumpZbar2 { bump: unit_bump(1) };
    let coarse = GridDiscretization::around(&form.support(), 41).unwrap();
    let fine = GridDiscretization::around(&form.support(), 81).unwrap();
    let a = bochner_residual(&form, &phi, &coarse).unwrap().residual;
    let b = bochner_residual(&form, &phi, &fine).unwrap().residual;
    assert!(a / b >= 3.5, "{a} {b}");
}

#[test]
fn dbar_of_closed_example() {
    // α = (z̄₂ b, 0): ∂α₂/∂z̄₁ − ∂α₁/∂z̄₂ = −(b + z̄₂ ∂b/∂z̄₂).
    let bump = unit_bump(2);
    let b2 = bump.clone();
    let alpha = FnForm::new(bump.support(), Smoothness::C2, move |z: &ComplexPoint| {
        vec![z.coords()[1].conj() * b2.value(z), c(0.0, 0.0)]
    });
    let grid = GridDiscretization::around(&bump.support(), 20).unwrap();
    let d = dbar_01(&alpha, &grid).unwrap();
    assert_eq!(d.pairs, vec![(0, 1)]);
    let mut worst = 0.0_f64;
    for i in 0..grid.len() {
        let z = grid.node(i);
        let expect = -(c(bump.value(&z), 0.0) + z.coords()[1].conj() * bump.dzbar(&z)[1]);
        worst = worst.max((d.field.at(i)[0] - expect).norm());
    }
    assert!(worst < 5e-2, "{worst}");
}

#[test]
fn dbar_of_dbar_vanishes() {
    let b = unit_bump(2);
    let b2 = b.clone();
    let exact = FnForm::new(b.support(), Smoothness::C2, move |z: &ComplexPoint| b2.dzbar(z));
    let grid = GridDiscretization::around(&b.support(), 20).unwrap();
    let d = dbar_01(&exact, &grid).unwrap();
    let sampled = GridField::sample_form(&exact, &grid).unwrap();
    assert!(d.field.max_abs() < 1e-2 * sampled.max_abs() * 6.0, "{}", d.field.max_abs());
}

#[test]
fn adjoint_pairs_against_dbar() {
    // ⟨∂̄u, α⟩_φ = ⟨u, ∂̄*_φ α⟩_φ for compactly supported u, α.
    let phi = CorpusField::SqNorm { n: 2 };
    let alpha = BumpConst {
        xi: vec![c(0.6, 0.0), c(0.0, 0.8)],
        bump: Bump::new(Point::origin(2), 1.0),
    };
    let u_bump = Bump::new(Point::from_pairs(&[(0.2, 0.0), (0.0, 0.1)]).unwrap(), 0.7);
    let u = {
        let b = u_bump.clone();
        move |z: &ComplexPoint| c(b.value(z), 0.0) * (z.coords()[0] + c(1.0, 0.0))
    };
    let du = {
        let b = u_bump.clone();
        FnForm::new(u_bump.support(), Smoothness::C2, move |z: &ComplexPoint| {
            let w = z.coords()[0] + c(1.0, 0.0);
            b.dzbar(z).into_iter().map(|d| d * w).collect()
        })
    };
    let grid = GridDiscretization::around(&alpha.support(), 24).unwrap();
    let lhs = weighted_pairing(
        &GridField::sample_form(&du, &grid).unwrap(),
        &GridField::sample_form(&alpha, &grid).unwrap(),
        &phi,
        &grid,
    )
    .unwrap();
    let rhs = weighted_pairing(
        &GridField::sample_scalar(&u, &grid),
        &dbar_star(&alpha, &phi, &grid).unwrap(),
        &phi,
        &grid,
    )
    .unwrap();
    assert!((lhs - rhs).norm() <= 1e-2 * lhs.norm().max(rhs.norm()), "{lhs} {rhs}");
}

#[test]
fn pairing_is_hermitian_and_positive() {
    let phi = CorpusField::SqNorm { n: 1 };
    let grid = GridDiscretization::around(&unit_bump(1).support(), 41).unwrap();
    let a = GridField::sample_form(&BumpZbar2 { bump: unit_bump(1) }, &grid).unwrap();
    let b = GridField::sample_form(
        &BumpConst {
            xi: vec![c(0.0, 1.0)],
            bump: unit_bump(1),
        },
        &grid,
    )
    .unwrap();
    let ab = weighted_pairing(&a, &b, &phi, &grid).unwrap();
    let ba = weighted_pairing(&b, &a, &phi, &grid).unwrap();
    assert!((ab - ba.conj()).norm() < 1e-14);
    let aa = weighted_pairing(&a, &a, &phi, &grid).unwrap();
    assert!(aa.re > 0.0 && aa.im.abs() < 1e-15);
}

#[test]
fn rejects_rough_forms_and_small_grids() {
    let phi = CorpusField::SqNorm { n: 1 };
    let support = unit_bump(1).support();
    let rough = FnForm::new(support.clone(), Smoothness::C0, |_: &ComplexPoint| vec![c(0.0, 0.0)]);
    let grid = GridDiscretization::around(&support, 21).unwrap();
    assert!(matches!(bochner_residual(&rough, &phi, &grid), Err(Error::Regularity { .. })));
    let tight = GridDiscretization::new(Point::origin(1), 1.0, 21).unwrap();
    let form = BumpZbar2 { bump: unit_bump(1) };
    assert!(matches!(bochner_residual(&form, &phi, &tight), Err(Error::SupportOutsideGrid(_))));
}
