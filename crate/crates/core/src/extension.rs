//! Extension-type inequalities over holomorphic cylinders:
//! `(1/μ(P)) ∫_{z0+P} |f|^p e^{−φ} ≤ e^{−φ(z0)}` with `f(z0) = 1`, the Jensen
//! chain that turns it into a mean-value inequality, its `m`-th power version,
//! and the best constant over polynomials for `p = 2`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{ComplexPoint, ScalarField};
use crate::geometry::{sample_cylinder, Cylinder, QuadratureRule};
use crate::linalg::{solve_gram, CMatrix, CVector, C64};
use crate::meanvalue::clipped_mean;
use crate::scalar::{compensated_sum as sum, ComplexSum};
use crate::witness::CmRule;

/// Nodes with `φ = −∞` beyond this fraction make the weight degenerate.
pub const DEGENERATE_FRACTION: f64 = 0.01;

/// A holomorphic function normalised by `f(z0) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum HolomorphicCandidate {
    /// `exp(Σ a_j (z_j − z0_j))`.
    ExpLinear { z0: ComplexPoint, a: Vec<C64> },
    /// `Σ c_α (z − z0)^α` with `c_0 = 1`.
    Polynomial { z0: ComplexPoint, terms: Vec<(Vec<usize>, C64)> },
}

fn monomial(z: &ComplexPoint, z0: &ComplexPoint, exps: &[usize]) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for ((zj, cj), &e) in z.coords().iter().zip(z0.coords()).zip(exps) {
        if e > 0 {
            v *= (zj - cj).powu(e as u32);
        }
    }
    v
}

impl HolomorphicCandidate {
    pub fn one(z0: &ComplexPoint) -> Self {
        HolomorphicCandidate::ExpLinear {
            z0: z0.clone(),
            a: vec![C64::new(0.0, 0.0); z0.dim()],
        }
    }

    pub fn exp_linear(z0: &ComplexPoint, a: Vec<C64>) -> Result<Self> {
        if a.len() != z0.dim() {
            return Err(Error::Dimension {
                expected: z0.dim(),
                got: a.len(),
            });
        }
        Ok(HolomorphicCandidate::ExpLinear { z0: z0.clone(), a })
    }

    pub fn polynomial(z0: &ComplexPoint, terms: Vec<(Vec<usize>, C64)>) -> Result<Self> {
        if terms.iter().any(|(e, _)| e.len() != z0.dim()) {
            return Err(Error::invalid("exponent length differs from the dimension"));
        }
        let f = HolomorphicCandidate::Polynomial { z0: z0.clone(), terms };
        let at = f.eval(z0);
        if (at - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::invalid(format!("candidate is not normalised: f(z0) = {at}")));
        }
        Ok(f)
    }

    /// `(z_k − a)/(z0_k − a)` in the coordinate `k`.
    pub fn normalised_root(z0: &ComplexPoint, k: usize, a: C64) -> Result<Self> {
        let d = z0.coords()[k] - a;
        if d.norm() == 0.0 {
            return Err(Error::invalid("root sits at the center"));
        }
        let n = z0.dim();
        let mut e = vec![0; n];
        e[k] = 1;
        Self::polynomial(z0, vec![(vec![0; n], C64::new(1.0, 0.0)), (e, d.inv())])
    }

    /// `exp((m/p) Σ a_j (z_j − z0_j))`, for which `|f|^p e^{−mRe⟨a,z⟩}` is constant.
    pub fn pluriharmonic_witness(z0: &ComplexPoint, a: &[C64], m: f64, p: f64) -> Result<Self> {
        Self::exp_linear(z0, a.iter().map(|c| c * (m / p)).collect())
    }

    pub fn center(&self) -> &ComplexPoint {
        match self {
            HolomorphicCandidate::ExpLinear { z0, .. } | HolomorphicCandidate::Polynomial { z0, .. } => z0,
        }
    }

    pub fn eval(&self, z: &ComplexPoint) -> C64 {
        match self {
            HolomorphicCandidate::ExpLinear { z0, a } => {
                let s: C64 = a.iter().zip(z.coords()).zip(z0.coords()).map(|((a, z), c)| a * (z - c)).sum();
                s.exp()
            }
            HolomorphicCandidate::Polynomial { z0, terms } => {
                terms.iter().map(|(e, c)| c * monomial(z, z0, e)).sum()
            }
        }
    }

    /// `log|f(z)|`, exact for the exponential form.
    pub fn log_abs(&self, z: &ComplexPoint) -> f64 {
        match self {
            HolomorphicCandidate::ExpLinear { z0, a } => a
                .iter()
                .zip(z.coords())
                .zip(z0.coords())
                .map(|((a, z), c)| (a * (z - c)).re)
                .sum(),
            HolomorphicCandidate::Polynomial { .. } => self.eval(z).norm().ln(),
        }
    }

    /// Zero up to the cancellation error of evaluating the polynomial.
    pub fn vanishes_at(&self, z: &ComplexPoint) -> bool {
        match self {
            HolomorphicCandidate::ExpLinear { .. } => false,
            HolomorphicCandidate::Polynomial { z0, terms } => {
                let scale: f64 = terms.iter().map(|(e, c)| c.norm() * monomial(z, z0, e).norm()).sum();
                self.eval(z).norm() <= 1e-12 * scale
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            HolomorphicCandidate::ExpLinear { a, .. } if a.iter().all(|c| c.norm() == 0.0) => "one".into(),
            HolomorphicCandidate::ExpLinear { a, .. } => format!("exp:{}", ComplexPoint::new(a.clone()).map(|p| p.to_string()).unwrap_or_default()),
            HolomorphicCandidate::Polynomial { terms, .. } => format!("poly[{} terms]", terms.len()),
        }
    }
}

/// `one`, `exp:<point json>`, `root:<point json>` (first coordinate).
pub fn parse_candidate(text: &str, z0: &ComplexPoint) -> Result<HolomorphicCandidate> {
    let point = |field: &str, v: &str| -> Result<Vec<C64>> {
        let p: ComplexPoint = serde_json::from_str(v).map_err(|e| Error::parse(field, e.to_string()))?;
        Ok(p.0)
    };
    match text.trim().split_once(':') {
        None if text.trim() == "one" => Ok(HolomorphicCandidate::one(z0)),
        Some(("exp", v)) => HolomorphicCandidate::exp_linear(z0, point("candidate.exp", v)?)
            .map_err(|e| Error::parse("candidate.exp", e.to_string())),
        Some(("root", v)) => {
            let a = point("candidate.root", v)?;
            let a = *a.first().ok_or_else(|| Error::parse("candidate.root", "empty point"))?;
            HolomorphicCandidate::normalised_root(z0, 0, a).map_err(|e| Error::parse("candidate.root", e.to_string()))
        }
        _ => Err(Error::parse("candidate", format!("unknown candidate '{text}'"))),
    }
}

struct Sampled {
    points: Vec<ComplexPoint>,
    weights: Vec<f64>,
    phi: Vec<f64>,
    excluded: usize,
}

fn sample(phi: &dyn ScalarField, p: &Cylinder<f64>, rule: &QuadratureRule) -> Result<Sampled> {
    if p.dim() != phi.dim() {
        return Err(Error::Dimension {
            expected: phi.dim(),
            got: p.dim(),
        });
    }
    if let Some(domain) = phi.domain() {
        if domain.inner_radius_at(p.center()) < p.circumradius() {
            return Err(Error::CylinderOutsideDomain);
        }
    }
    let nodes = sample_cylinder(p, rule)?;
    let phi_vals: Vec<f64> = nodes.par_iter().map(|q| phi.eval(&q.point)).collect();
    let excluded = phi_vals.iter().filter(|v| **v == f64::NEG_INFINITY).count();
    let fraction = excluded as f64 / nodes.len() as f64;
    if fraction > DEGENERATE_FRACTION {
        return Err(Error::DegenerateWeight { fraction });
    }
    Ok(Sampled {
        weights: nodes.iter().map(|q| q.weight).collect(),
        points: nodes.into_iter().map(|q| q.point).collect(),
        phi: phi_vals,
        excluded,
    })
}

/// `log((1/Σw) Σ w e^{g})` over the nodes with finite `g`.
fn log_mean_exp(g: &[f64], w: &[f64]) -> f64 {
    let top = g.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let total = sum(w.iter().zip(g).filter(|(_, v)| v.is_finite()).map(|(w, _)| *w));
    let s = sum(w.iter().zip(g).filter(|(_, v)| v.is_finite()).map(|(w, v)| w * (v - top).exp()));
    top + (s / total).ln()
}

fn mean_finite(g: &[f64], w: &[f64]) -> f64 {
    let total = sum(w.iter().zip(g).filter(|(_, v)| v.is_finite()).map(|(w, _)| *w));
    sum(w.iter().zip(g).filter(|(_, v)| v.is_finite()).map(|(w, v)| w * v)) / total
}

/// Nodal `p log|f| − φ`, erroring where `f` vanishes.
fn log_integrand(s: &Sampled, f: &HolomorphicCandidate, p: f64, m: f64) -> Result<Vec<f64>> {
    let logf: Vec<f64> = s.points.par_iter().map(|z| f.log_abs(z)).collect();
    let count = s
        .points
        .iter()
        .zip(&logf)
        .filter(|(z, v)| **v == f64::NEG_INFINITY || f.vanishes_at(z))
        .count();
    if count > 0 {
        return Err(Error::VanishingCandidate { count });
    }
    Ok(logf.iter().zip(&s.phi).map(|(lf, ph)| p * lf - m * ph).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct JensenChain {
    /// `log mean(g) − mean(log g)` with `g = |f|^p e^{−φ}`.
    pub residual1: f64,
    /// `mean(p log|f|) − p log|f(z0)|`.
    pub residual2: f64,
    /// `mean(φ) − φ(z0)`.
    pub conclusion_margin: f64,
    pub mean_phi: f64,
    pub phi_center: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionReport {
    pub center: ComplexPoint,
    pub cylinder: Cylinder<f64>,
    pub p: f64,
    pub f_id: String,
    /// `(1/μ(P)) ∫_{z0+P} |f|^p e^{−φ}`.
    pub lhs: f64,
    /// `e^{−φ(z0)}`.
    pub rhs: f64,
    /// `rhs − lhs`, present when both sides are finite.
    pub margin: Option<f64>,
    pub chain: JensenChain,
    /// Nodes dropped because `φ = −∞` there.
    pub excluded_nodes: usize,
}

fn chain_of(s: &Sampled, f: &HolomorphicCandidate, phi: &dyn ScalarField, z0: &ComplexPoint, p: f64) -> Result<JensenChain> {
    let g = log_integrand(s, f, p, 1.0)?;
    let residual1 = log_mean_exp(&g, &s.weights) - mean_finite(&g, &s.weights);
    let plogf: Vec<f64> = s.points.iter().map(|z| p * f.log_abs(z)).collect();
    let residual2 = mean_finite(&plogf, &s.weights) - p * f.log_abs(z0);
    let mean_phi = clipped_mean(&s.phi, &s.weights);
    let phi_center = phi.eval(z0);
    Ok(JensenChain {
        residual1,
        residual2,
        conclusion_margin: mean_phi - phi_center,
        mean_phi,
        phi_center,
    })
}

pub fn jensen_chain_check(
    phi: &dyn ScalarField,
    cyl: &Cylinder<f64>,
    f: &HolomorphicCandidate,
    p: f64,
    rule: &QuadratureRule,
) -> Result<JensenChain> {
    let s = sample(phi, cyl, rule)?;
    chain_of(&s, f, phi, cyl.center(), p)
}

pub fn optimal_extension_margin(
    phi: &dyn ScalarField,
    cyl: &Cylinder<f64>,
    f: &HolomorphicCandidate,
    p: f64,
    rule: &QuadratureRule,
) -> Result<ExtensionReport> {
    let z0 = cyl.center();
    let phi0 = phi.eval(z0);
    if phi0 == f64::NEG_INFINITY {
        return Err(Error::PoleInRegion { at: z0.to_string() });
    }
    if f.center() != z0 {
        return Err(Error::invalid("candidate is normalised at a different center"));
    }
    let s = sample(phi, cyl, rule)?;
    let g = log_integrand(&s, f, p, 1.0)?;
    // The weights sum to μ(P); averaging by Σw keeps constants exact.
    let lhs = log_mean_exp(&g, &s.weights).exp();
    let rhs = (-phi0).exp();
    let margin = (lhs.is_finite() && rhs.is_finite()).then(|| rhs - lhs);
    Ok(ExtensionReport {
        center: z0.clone(),
        cylinder: cyl.clone(),
        p,
        f_id: f.id(),
        lhs,
        rhs,
        margin,
        chain: chain_of(&s, f, phi, z0, p)?,
        excluded_nodes: s.excluded,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CoarseExtensionRow {
    pub m: f64,
    pub log_c_m: f64,
    /// `log C_m/m − log μ(P)/m − (1/m) log((1/μ(P)) ∫ |f_m|^p e^{−mφ})`.
    pub b_m: f64,
    /// `log C_m/m − log μ(P)/m + mean(φ)`.
    pub b_tilde: f64,
    pub mean_phi: f64,
    pub holds: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn coarse_extension_bound(
    phi: &dyn ScalarField,
    cyl: &Cylinder<f64>,
    f_m: &HolomorphicCandidate,
    log_c_m: f64,
    m: f64,
    p: f64,
    rule: &QuadratureRule,
) -> Result<CoarseExtensionRow> {
    if (f_m.eval(cyl.center()) - C64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::invalid("candidate is not normalised at the center"));
    }
    let s = sample(phi, cyl, rule)?;
    let g = log_integrand(&s, f_m, p, m)?;
    let lme = log_mean_exp(&g, &s.weights);
    if !lme.is_finite() {
        return Err(Error::Overflow(format!("log-mean of |f_m|^p e^(-m phi) at m = {m}")));
    }
    let log_mu = cyl.volume().ln();
    let mean_phi = clipped_mean(&s.phi, &s.weights);
    let b_m = log_c_m / m - log_mu / m - lme / m;
    let b_tilde = log_c_m / m - log_mu / m + mean_phi;
    Ok(CoarseExtensionRow {
        m,
        log_c_m,
        b_m,
        b_tilde,
        mean_phi,
        holds: b_m <= b_tilde + 1e-9,
    })
}

/// Rows of [`coarse_extension_bound`] along `ms`, with `f_m` from `candidate(m)`.
pub fn coarse_extension_sweep(
    phi: &dyn ScalarField,
    cyl: &Cylinder<f64>,
    rule_cm: &CmRule,
    ms: &[f64],
    p: f64,
    candidate: &dyn Fn(f64) -> Result<HolomorphicCandidate>,
    rule: &QuadratureRule,
) -> Result<Vec<CoarseExtensionRow>> {
    ms.iter()
        .map(|&m| coarse_extension_bound(phi, cyl, &candidate(m)?, rule_cm.log_c(m), m, p, rule))
        .collect()
}

/// Multi-indices of total degree `≤ degree`, by degree and then lexicographically;
/// the first entry is the constant.
pub fn monomial_exponents(n: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=degree {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BestExtension {
    pub degree: usize,
    pub exponents: Vec<Vec<usize>>,
    /// Coefficients of `f*` as `[re, im]`.
    pub coefficients: Vec<[f64; 2]>,
    /// `min (1/μ(P)) ∫ |f|² e^{−φ}` over the polynomial class.
    pub value: f64,
    /// `e^{−φ(z0)}`.
    pub rhs: f64,
    pub holds: bool,
    /// The search is over polynomials on `z0 + P` only.
    pub scope: &'static str,
}

impl BestExtension {
    pub fn candidate(&self, z0: &ComplexPoint) -> Result<HolomorphicCandidate> {
        let terms = self
            .exponents
            .iter()
            .zip(&self.coefficients)
            .map(|(e, c)| (e.clone(), C64::new(c[0], c[1])))
            .collect();
        HolomorphicCandidate::polynomial(z0, terms)
    }
}

/// Weighted Gram matrix `G_ab = (1/μ(P)) ∫ m_a m̄_b e^{−(φ − shift)}` of the
/// monomials centered at `z0`.
pub(crate) fn weighted_gram(points: &[ComplexPoint], w: &[f64], z0: &ComplexPoint, exps: &[Vec<usize>]) -> CMatrix {
    let k = exps.len();
    let basis: Vec<Vec<C64>> = points
        .par_iter()
        .map(|z| exps.iter().map(|e| monomial(z, z0, e)).collect())
        .collect();
    let rows: Vec<Vec<C64>> = (0..k)
        .into_par_iter()
        .map(|a| {
            (0..k)
                .map(|b| {
                    let mut s = ComplexSum::default();
                    for (v, wi) in basis.iter().zip(w) {
                        s.add(v[a] * v[b].conj() * *wi);
                    }
                    s.value()
                })
                .collect()
        })
        .collect();
    CMatrix::from_fn(k, k, |a, b| rows[a][b])
}

pub fn best_extension_constant(
    phi: &dyn ScalarField,
    cyl: &Cylinder<f64>,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<BestExtension> {
    let z0 = cyl.center();
    let phi0 = phi.eval(z0);
    if phi0 == f64::NEG_INFINITY {
        return Err(Error::PoleInRegion { at: z0.to_string() });
    }
    let s = sample(phi, cyl, rule)?;
    let shift = s.phi.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let total = sum(s.weights.iter().copied());
    let w: Vec<f64> = s
        .weights
        .iter()
        .zip(&s.phi)
        .map(|(wi, ph)| if ph.is_finite() { wi * (-(ph - shift)).exp() / total } else { 0.0 })
        .collect();
    let exps = monomial_exponents(cyl.dim(), degree);
    let gram = weighted_gram(&s.points, &w, z0, &exps);
    // ∫|Σ c_a m_a|² = c^H Ḡ c; the constrained minimiser is Ḡ⁻¹e₀ / (Ḡ⁻¹)₀₀.
    let h = gram.map(|c| c.conj());
    let mut e0 = CVector::zeros(exps.len());
    e0[0] = C64::new(1.0, 0.0);
    let x = solve_gram(&h, &e0)?;
    let x0 = x[0].re;
    if !(x0 > 0.0) {
        return Err(Error::SingularGram);
    }
    let value = (-shift).exp() / x0;
    if !value.is_finite() {
        return Err(Error::Overflow(format!("best constant with phi shift {shift}")));
    }
    let coefficients = x.iter().map(|c| c / x[0]).map(|c| [c.re, c.im]).collect();
    let rhs = (-phi0).exp();
    Ok(BestExtension {
        degree,
        exponents: exps,
        coefficients,
        value,
        rhs,
        holds: value <= rhs * (1.0 + 1e-9),
        scope: "cylinder-local",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{parse_field, CorpusField, FnField, Smoothness};
    use crate::geometry::Point;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disc(r: f64) -> Cylinder<f64> {
        Cylinder::standard(Point::origin(1), r, r).unwrap()
    }

    fn rule1() -> QuadratureRule {
        QuadratureRule::default_for(1)
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomial_exponents(1, 3), vec![vec![0], vec![1], vec![2], vec![3]]);
        let e = monomial_exponents(2, 2);
        assert_eq!(e.len(), 6);
        assert_eq!(e[0], vec![0, 0]);
        assert_eq!(monomial_exponents(2, 8).len(), 45);
    }

    #[test]
    fn constant_weight_is_an_equality_case() {
        let phi = CorpusField::Const { n: 1, c: 0.7 };
        let p = disc(0.8);
        let r = optimal_extension_margin(&phi, &p, &HolomorphicCandidate::one(p.center()), 2.0, &rule1()).unwrap();
        assert!((r.lhs - (-0.7f64).exp()).abs() < 1e-14);
        assert!(r.margin.unwrap().abs() < 1e-14);
        assert_eq!(r.chain.residual2, 0.0);
        assert!(r.chain.residual1.abs() < 1e-14);
    }

    #[test]
    fn pluriharmonic_weight_with_exponential_witness() {
        let phi = parse_field("re_linear:[[2,0]]", 1).unwrap();
        let p = disc(1.0);
        for pp in [1.0, 2.0, 3.0] {
            let f = HolomorphicCandidate::pluriharmonic_witness(p.center(), &[c(2.0, 0.0)], 1.0, pp).unwrap();
            let r = optimal_extension_margin(&phi, &p, &f, pp, &rule1()).unwrap();
            assert!(r.margin.unwrap().abs() < 1e-12, "{r:?}");
            assert!(r.chain.residual1.abs() < 1e-12);
            assert!(r.chain.conclusion_margin.abs() < 1e-12);
        }
    }

    #[test]
    fn negative_square_norm_fails_on_the_disc() {
        // (1/π) ∫_{|z|<1} e^{|z|²} = e − 1.
        let phi = CorpusField::NegSqNorm { n: 1 };
        let p = disc(1.0);
        let r = optimal_extension_margin(&phi, &p, &HolomorphicCandidate::one(p.center()), 2.0, &rule1()).unwrap();
        assert!((r.lhs - (E - 1.0)).abs() < 1e-10, "{}", r.lhs);
        assert!(r.margin.unwrap() < 0.0);
        assert!(r.chain.residual1 >= -1e-10);
    }

    #[test]
    fn harmonic_root_has_zero_second_residual() {
        let phi = CorpusField::SqNorm { n: 1 };
        let p = disc(0.5);
        let f = HolomorphicCandidate::normalised_root(p.center(), 0, c(0.9, 0.3)).unwrap();
        let chain = jensen_chain_check(&phi, &p, &f, 2.0, &rule1()).unwrap();
        assert!(chain.residual2.abs() < 1e-8, "{}", chain.residual2);
        assert!(chain.residual1 >= -1e-10);
        // mean of |z|² over the disc of radius r is r²/2.
        assert!((chain.conclusion_margin - 0.125).abs() < 1e-12);
    }

    #[test]
    fn candidate_normalisation_and_vanishing() {
        let z0 = Point::from_pairs(&[(0.1, 0.2)]).unwrap();
        assert!(HolomorphicCandidate::polynomial(&z0, vec![(vec![0], c(2.0, 0.0))]).is_err());
        let p = Cylinder::standard(z0.clone(), 0.5, 0.5).unwrap();
        let node = sample_cylinder(&p, &rule1()).unwrap()[0].point.clone();
        let root = node.coords()[0];
        let f = HolomorphicCandidate::normalised_root(&z0, 0, root).unwrap();
        let phi = CorpusField::SqNorm { n: 1 };
        assert!(matches!(
            jensen_chain_check(&phi, &p, &f, 2.0, &rule1()),
            Err(Error::VanishingCandidate { count: 1 })
        ));
        assert!(parse_candidate("root:[[0.9,0]]", &z0).is_ok());
        assert!(parse_candidate("exp:[[1,0],[0,0]]", &z0).is_err());
        assert!(parse_candidate("sinh", &z0).is_err());
    }

    #[test]
    fn degenerate_weight_is_rejected() {
        let phi = FnField::new(1, Smoothness::Usc, |z: &ComplexPoint| {
            if z.coords()[0].re > 0.0 {
                f64::NEG_INFINITY
            } else {
                0.0
            }
        });
        let p = disc(1.0);
        let err = optimal_extension_margin(&phi, &p, &HolomorphicCandidate::one(p.center()), 2.0, &rule1());
        assert!(matches!(err, Err(Error::DegenerateWeight { .. })));
    }

    #[test]
    fn coarse_bound_for_flat_weight() {
        let phi = CorpusField::Const { n: 1, c: 0.0 };
        let p = disc(1.0);
        for m in [1.0, 4.0, 16.0] {
            let row = coarse_extension_bound(&phi, &p, &HolomorphicCandidate::one(p.center()), 0.0, m, 2.0, &rule1()).unwrap();
            assert!((row.b_m + PI.ln() / m).abs() < 1e-12);
            assert!((row.b_tilde + PI.ln() / m).abs() < 1e-12);
            assert!(row.holds);
        }
    }

    #[test]
    fn coarse_bound_with_pluriharmonic_witness() {
        let phi = parse_field("re_linear:[[2,0]]", 1).unwrap();
        let p = Cylinder::standard(Point::origin(1), 1.0 / PI.sqrt(), 1.0).unwrap();
        let rows = coarse_extension_sweep(
            &phi,
            &p,
            &CmRule::Const { c: 1.0 },
            &[1.0, 2.0, 8.0, 32.0],
            2.0,
            &|m| HolomorphicCandidate::pluriharmonic_witness(p.center(), &[c(2.0, 0.0)], m, 2.0),
            &rule1(),
        )
        .unwrap();
        for r in &rows {
            assert!(r.holds);
            assert!(r.b_m.abs() < 1e-9, "{r:?}");
            assert!(r.mean_phi.abs() < 1e-12);
        }
    }

    #[test]
    fn best_constant_flat_disc() {
        let phi = CorpusField::Const { n: 1, c: 0.0 };
        let p = disc(1.0);
        for n in [2, 4, 8] {
            let b = best_extension_constant(&phi, &p, n, &rule1()).unwrap();
            assert!((b.value - 1.0).abs() < 1e-10, "{}", b.value);
            for coef in &b.coefficients[1..] {
                assert!(coef[0].abs() < 1e-8 && coef[1].abs() < 1e-8);
            }
        }
    }

    #[test]
    fn best_constant_negative_square_norm() {
        let phi = CorpusField::NegSqNorm { n: 1 };
        let b = best_extension_constant(&phi, &disc(1.0), 8, &rule1()).unwrap();
        assert!((b.value - (E - 1.0)).abs() < 1e-6, "{}", b.value);
        assert!(!b.holds);
    }

    #[test]
    fn best_constant_pluriharmonic_and_monotone() {
        let phi = parse_field("re_linear:[[2,0]]", 1).unwrap();
        let p = disc(1.0);
        let values: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&n| best_extension_constant(&phi, &p, n, &rule1()).unwrap().value)
            .collect();
        assert!(values[0] >= values[1] && values[1] >= values[2], "{values:?}");
        assert!((values[2] - 1.0).abs() < 1e-4, "{values:?}");
        // Consistency: the returned f* satisfies the extension inequality, and
        // the mean-value conclusion follows.
        let best = best_extension_constant(&phi, &p, 8, &rule1()).unwrap();
        let f = best.candidate(p.center()).unwrap();
        let r = optimal_extension_margin(&phi, &p, &f, 2.0, &rule1()).unwrap();
        assert!((r.lhs - best.value).abs() < 1e-10);
        assert!(r.chain.conclusion_margin >= -1e-6);
    }

    #[test]
    fn best_constant_two_variables() {
        let phi = CorpusField::Const { n: 2, c: 0.0 };
        let p = Cylinder::standard(Point::origin(2), 1.0, 0.5).unwrap();
        let b = best_extension_constant(&phi, &p, 4, &QuadratureRule::default_for(2).with_budget(16384)).unwrap();
        assert!((b.value - 1.0).abs() < 1e-8, "{}", b.value);
    }
}
