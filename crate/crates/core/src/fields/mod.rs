//! Weight functions, Wirtinger derivatives and Levi forms.
//!
//! Conventions: `∂/∂z = (∂/∂x − i∂/∂y)/2`, `∂/∂z̄ = (∂/∂x + i∂/∂y)/2`, and the
//! Levi matrix has entries `L[j][k] = ∂²φ/∂z_j∂z̄_k`, so the Levi form evaluated
//! on a direction `ξ` is `Σ L[j][k] ξ_j ξ̄_k`.

mod corpus;
mod hermitian;

pub use corpus::{default_dim, parse_field, CorpusField};
pub use hermitian::{ConstantHermitian, FnHermitian, HermitianField, ZeroHermitian, parse_omega};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DomainBox, Point};
use crate::linalg::{self, CMatrix, C64};

pub type ComplexPoint = Point<f64>;

/// Default finite-difference step, scaled by `1 + |z|` at the evaluation point.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Smoothness {
    /// Upper semi-continuous, values in [−∞, ∞).
    Usc,
    C0,
    C2,
}

impl Smoothness {
    pub fn label(self) -> &'static str {
        match self {
            Smoothness::Usc => "usc",
            Smoothness::C0 => "C0",
            Smoothness::C2 => "C2",
        }
    }
}

/// A weight function `φ : D → [−∞, ∞)`.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: &ComplexPoint) -> f64;

    /// Global regularity tag.
    fn smoothness(&self) -> Smoothness;

    /// Regularity in a neighborhood of `z`; fields that are smooth off a thin set
    /// override this.
    fn smoothness_at(&self, _z: &ComplexPoint) -> Smoothness {
        self.smoothness()
    }

    /// Closed-form `(∂φ/∂z_j)_j`, when known.
    fn gradient(&self, _z: &ComplexPoint) -> Option<Vec<C64>> {
        None
    }

    /// Closed-form Levi matrix, when known.
    fn hessian(&self, _z: &ComplexPoint) -> Option<CMatrix> {
        None
    }

    fn is_pole(&self, z: &ComplexPoint) -> bool {
        self.eval(z) == f64::NEG_INFINITY
    }

    /// Closed-form `inf_{B(center, radius)} φ`, when known.
    fn ball_infimum(&self, _center: &ComplexPoint, _radius: f64) -> Option<f64> {
        None
    }

    /// Domain of definition; `None` means all of C^n.
    fn domain(&self) -> Option<&DomainBox<f64>> {
        None
    }

    fn name(&self) -> String {
        "field".to_string()
    }
}

type EvalFn = dyn Fn(&ComplexPoint) -> f64 + Send + Sync;
type GradFn = dyn Fn(&ComplexPoint) -> Vec<C64> + Send + Sync;
type HessFn = dyn Fn(&ComplexPoint) -> CMatrix + Send + Sync;

/// Closure-backed field.
pub struct FnField {
    n: usize,
    name: String,
    smoothness: Smoothness,
    eval: Box<EvalFn>,
    gradient: Option<Box<GradFn>>,
    hessian: Option<Box<HessFn>>,
    domain: Option<DomainBox<f64>>,
}

impl FnField {
    pub fn new(
        n: usize,
        smoothness: Smoothness,
        eval: impl Fn(&ComplexPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            name: "fn".to_string(),
            smoothness,
            eval: Box::new(eval),
            gradient: None,
            hessian: None,
            domain: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_gradient(mut self, g: impl Fn(&ComplexPoint) -> Vec<C64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Box::new(g));
        self
    }

    pub fn with_domain(mut self, domain: DomainBox<f64>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_hessian(mut self, h: impl Fn(&ComplexPoint) -> CMatrix + Send + Sync + 'static) -> Self {
        self.hessian = Some(Box::new(h));
        self
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &ComplexPoint) -> f64 {
        (self.eval)(z)
    }
    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }
    fn gradient(&self, z: &ComplexPoint) -> Option<Vec<C64>> {
        self.gradient.as_ref().map(|g| g(z))
    }
    fn hessian(&self, z: &ComplexPoint) -> Option<CMatrix> {
        self.hessian.as_ref().map(|h| h(z))
    }
    fn domain(&self) -> Option<&DomainBox<f64>> {
        self.domain.as_ref()
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Hides the closed-form derivatives of a field so that every derivative is
/// taken by finite differences.
pub struct NumericOnly<'a>(pub &'a dyn ScalarField);

impl ScalarField for NumericOnly<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, z: &ComplexPoint) -> f64 {
        self.0.eval(z)
    }
    fn smoothness(&self) -> Smoothness {
        self.0.smoothness()
    }
    fn smoothness_at(&self, z: &ComplexPoint) -> Smoothness {
        self.0.smoothness_at(z)
    }
    fn is_pole(&self, z: &ComplexPoint) -> bool {
        self.0.is_pole(z)
    }
    fn domain(&self) -> Option<&DomainBox<f64>> {
        self.0.domain()
    }
    fn name(&self) -> String {
        self.0.name()
    }
}

/// Sum of two fields, e.g. `φ + ψ`.
pub struct SumField<'a>(pub &'a dyn ScalarField, pub &'a dyn ScalarField);

impl ScalarField for SumField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, z: &ComplexPoint) -> f64 {
        self.0.eval(z) + self.1.eval(z)
    }
    fn smoothness(&self) -> Smoothness {
        self.0.smoothness().min(self.1.smoothness())
    }
    fn smoothness_at(&self, z: &ComplexPoint) -> Smoothness {
        self.0.smoothness_at(z).min(self.1.smoothness_at(z))
    }
    fn gradient(&self, z: &ComplexPoint) -> Option<Vec<C64>> {
        let a = self.0.gradient(z)?;
        let b = self.1.gradient(z)?;
        Some(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }
    fn hessian(&self, z: &ComplexPoint) -> Option<CMatrix> {
        Some(self.0.hessian(z)? + self.1.hessian(z)?)
    }
    fn is_pole(&self, z: &ComplexPoint) -> bool {
        self.0.is_pole(z) || self.1.is_pole(z)
    }
    fn domain(&self) -> Option<&DomainBox<f64>> {
        self.0.domain().or(self.1.domain())
    }
    fn name(&self) -> String {
        format!("{}+{}", self.0.name(), self.1.name())
    }
}

/// `m·φ`.
pub struct ScaledField<'a>(pub f64, pub &'a dyn ScalarField);

impl ScalarField for ScaledField<'_> {
    fn dim(&self) -> usize {
        self.1.dim()
    }
    fn eval(&self, z: &ComplexPoint) -> f64 {
        let v = self.1.eval(z);
        if v == f64::NEG_INFINITY {
            v
        } else {
            self.0 * v
        }
    }
    fn smoothness(&self) -> Smoothness {
        self.1.smoothness()
    }
    fn smoothness_at(&self, z: &ComplexPoint) -> Smoothness {
        self.1.smoothness_at(z)
    }
    fn gradient(&self, z: &ComplexPoint) -> Option<Vec<C64>> {
        Some(self.1.gradient(z)?.into_iter().map(|g| g * self.0).collect())
    }
    fn hessian(&self, z: &ComplexPoint) -> Option<CMatrix> {
        Some(self.1.hessian(z)?.scale(self.0))
    }
    fn is_pole(&self, z: &ComplexPoint) -> bool {
        self.1.is_pole(z)
    }
    fn domain(&self) -> Option<&DomainBox<f64>> {
        self.1.domain()
    }
    fn name(&self) -> String {
        format!("{}*{}", self.0, self.1.name())
    }
}

fn step_at(z: &ComplexPoint, h: f64) -> f64 {
    h * (1.0 + z.norm())
}

fn eval_off_pole(phi: &dyn ScalarField, z: &ComplexPoint) -> Result<f64> {
    let v = phi.eval(z);
    if !v.is_finite() || phi.is_pole(z) {
        return Err(Error::PoleInStencil { at: z.to_string() });
    }
    Ok(v)
}

/// `(∂φ/∂z_j)_j` by central differences of step `h·(1 + |z|)`.
pub fn wirtinger_grad(phi: &dyn ScalarField, z: &ComplexPoint, h: f64) -> Result<Vec<C64>> {
    check_dim(phi, z)?;
    let h = step_at(z, h);
    eval_off_pole(phi, z)?;
    let n = z.dim();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let dx = (eval_off_pole(phi, &z.shifted(2 * j, h))? - eval_off_pole(phi, &z.shifted(2 * j, -h))?) / (2.0 * h);
        let dy = (eval_off_pole(phi, &z.shifted(2 * j + 1, h))? - eval_off_pole(phi, &z.shifted(2 * j + 1, -h))?)
            / (2.0 * h);
        out.push(C64::new(dx, -dy) * 0.5);
    }
    Ok(out)
}

/// Closed-form gradient when available, otherwise [`wirtinger_grad`].
pub fn gradient(phi: &dyn ScalarField, z: &ComplexPoint, h: f64) -> Result<Vec<C64>> {
    match phi.gradient(z) {
        Some(g) => Ok(g),
        None => wirtinger_grad(phi, z, h),
    }
}

fn require_c2(phi: &dyn ScalarField, z: &ComplexPoint, operation: &'static str) -> Result<()> {
    let s = phi.smoothness_at(z);
    if s < Smoothness::C2 {
        return Err(Error::Regularity {
            operation,
            required: "C2",
            found: s.label(),
        });
    }
    Ok(())
}

fn check_dim(phi: &dyn ScalarField, z: &ComplexPoint) -> Result<()> {
    if phi.dim() != z.dim() {
        return Err(Error::Dimension {
            expected: phi.dim(),
            got: z.dim(),
        });
    }
    Ok(())
}

/// Levi matrix `(∂²φ/∂z_j∂z̄_k)`: the closed form when the field has one,
/// otherwise [`levi_form_fd`]. Always exactly Hermitian.
pub fn levi_form(phi: &dyn ScalarField, z: &ComplexPoint, h: f64) -> Result<CMatrix> {
    check_dim(phi, z)?;
    require_c2(phi, z, "levi_form")?;
    match phi.hessian(z) {
        Some(m) => Ok(linalg::hermitian_part(&m)),
        None => levi_form_fd(phi, z, h),
    }
}

/// Levi matrix from the real second-difference stencil in `(x_j, y_j, x_k, y_k)`:
/// `∂²/∂z_j∂z̄_k = ¼(∂x_j∂x_k + ∂y_j∂y_k + i(∂x_j∂y_k − ∂y_j∂x_k))`.
pub fn levi_form_fd(phi: &dyn ScalarField, z: &ComplexPoint, h: f64) -> Result<CMatrix> {
    check_dim(phi, z)?;
    require_c2(phi, z, "levi_form")?;
    let h = step_at(z, h);
    let n = z.dim();
    let f0 = eval_off_pole(phi, z)?;
    let real_dim = 2 * n;
    let mut d2 = vec![0.0; real_dim * real_dim];
    for a in 0..real_dim {
        let fp = eval_off_pole(phi, &z.shifted(a, h))?;
        let fm = eval_off_pole(phi, &z.shifted(a, -h))?;
        d2[a * real_dim + a] = (fp - 2.0 * f0 + fm) / (h * h);
        for b in a + 1..real_dim {
            let pp = eval_off_pole(phi, &z.shifted(a, h).shifted(b, h))?;
            let pm = eval_off_pole(phi, &z.shifted(a, h).shifted(b, -h))?;
            let mp = eval_off_pole(phi, &z.shifted(a, -h).shifted(b, h))?;
            let mm = eval_off_pole(phi, &z.shifted(a, -h).shifted(b, -h))?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            d2[a * real_dim + b] = v;
            d2[b * real_dim + a] = v;
        }
    }
    let at = |a: usize, b: usize| d2[a * real_dim + b];
    let m = CMatrix::from_fn(n, n, |j, k| {
        let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        C64::new(at(xj, xk) + at(yj, yk), at(xj, yk) - at(yj, xk)) * 0.25
    });
    Ok(linalg::hermitian_part(&m))
}

/// Smallest eigenvalue of `L_φ(z) − g(z)` and a unit direction `ξ` attaining it
/// in the sense `Σ (L − g)[j][k] ξ_j ξ̄_k = λ_min`.
#[derive(Clone, Debug, Serialize)]
pub struct LeviEigen {
    pub lambda_min: f64,
    pub xi: ComplexPoint,
    /// `‖(L − g)ᵀ ξ − λ_min ξ‖`.
    pub residual: f64,
}

pub fn min_levi_eigenvalue(
    phi: &dyn ScalarField,
    omega: &dyn HermitianField,
    z: &ComplexPoint,
) -> Result<LeviEigen> {
    let l = levi_form(phi, z, DEFAULT_FD_STEP)?;
    let g = omega.checked_coeffs(z)?;
    min_eigen_of(&(l - g))
}

pub(crate) fn min_eigen_of(m: &CMatrix) -> Result<LeviEigen> {
    let (lambda, v) = linalg::min_eigenpair(m);
    // v is an eigenvector of M; its conjugate is one of Mᵀ = M̄.
    let xi: Vec<C64> = v.iter().map(|c| c.conj()).collect();
    let mt = m.transpose();
    let xv = crate::linalg::CVector::from_vec(xi.clone());
    let residual = (&mt * &xv - xv.scale(lambda)).norm();
    Ok(LeviEigen {
        lambda_min: lambda,
        xi: Point(xi),
        residual,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LowerBoundVerdict {
    Holds { min_lambda: f64, nodes: usize },
    Violated { z0: ComplexPoint, xi: ComplexPoint, c: f64, nodes: usize },
}

impl LowerBoundVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, LowerBoundVerdict::Holds { .. })
    }
}

/// Checks `i∂∂̄φ ≥ ω` at the nodes of a `resolution`-per-axis grid over `region`.
pub fn check_lower_bound(
    phi: &dyn ScalarField,
    omega: &dyn HermitianField,
    region: &DomainBox<f64>,
    resolution: usize,
    tol: f64,
) -> Result<LowerBoundVerdict> {
    if region.dim() != phi.dim() {
        return Err(Error::Dimension {
            expected: phi.dim(),
            got: region.dim(),
        });
    }
    let nodes = region.grid_nodes(resolution);
    if nodes.is_empty() {
        return Err(Error::invalid("region grid has no nodes"));
    }
    let mut worst: Option<(ComplexPoint, LeviEigen)> = None;
    for z in &nodes {
        if phi.is_pole(z) {
            return Err(Error::PoleInRegion { at: z.to_string() });
        }
        let eig = min_levi_eigenvalue(phi, omega, z)?;
        let replace = match &worst {
            None => true,
            Some((_, w)) => eig.lambda_min < w.lambda_min,
        };
        if replace {
            worst = Some((z.clone(), eig));
        }
    }
    let (z0, eig) = worst.expect("non-empty grid");
    Ok(if eig.lambda_min >= -tol {
        LowerBoundVerdict::Holds {
            min_lambda: eig.lambda_min,
            nodes: nodes.len(),
        }
    } else {
        LowerBoundVerdict::Violated {
            z0,
            xi: eig.xi,
            c: -eig.lambda_min,
            nodes: nodes.len(),
        }
    })
}

#[cfg(test)]
mod tests;
