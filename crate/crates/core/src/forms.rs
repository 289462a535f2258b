//! Compactly supported (0,1)-forms `α = Σ α_j dz̄_j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{ComplexPoint, Smoothness};
use crate::geometry::{DomainBox, Point};
use crate::linalg::C64;

pub trait FormField01: Send + Sync {
    fn dim(&self) -> usize;

    /// `(α_1(z), …, α_n(z))`.
    fn coeffs(&self, z: &ComplexPoint) -> Vec<C64>;

    /// Closed region outside of which every coefficient vanishes.
    fn support(&self) -> DomainBox<f64>;

    fn smoothness(&self) -> Smoothness {
        Smoothness::C2
    }

    fn name(&self) -> String {
        "form".to_string()
    }
}

type CoeffFn = dyn Fn(&ComplexPoint) -> Vec<C64> + Send + Sync;

/// Closure-backed form.
pub struct FnForm {
    n: usize,
    support: DomainBox<f64>,
    smoothness: Smoothness,
    name: String,
    coeffs: Box<CoeffFn>,
}

impl FnForm {
    pub fn new(
        support: DomainBox<f64>,
        smoothness: Smoothness,
        coeffs: impl Fn(&ComplexPoint) -> Vec<C64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            n: support.dim(),
            support,
            smoothness,
            name: "fn".to_string(),
            coeffs: Box::new(coeffs),
        }
    }

    pub fn zero(support: DomainBox<f64>) -> Self {
        let n = support.dim();
        Self::new(support, Smoothness::C2, move |_| vec![C64::new(0.0, 0.0); n]).named("zero")
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl FormField01 for FnForm {
    fn dim(&self) -> usize {
        self.n
    }
    fn coeffs(&self, z: &ComplexPoint) -> Vec<C64> {
        (self.coeffs)(z)
    }
    fn support(&self) -> DomainBox<f64> {
        self.support.clone()
    }
    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Radial bump `b(z) = β(|z − c|²/R²)` with `β(t) = (1 − t)^k` on `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub center: ComplexPoint,
    pub radius: f64,
    pub power: i32,
}

impl Bump {
    pub const DEFAULT_POWER: i32 = 6;

    pub fn new(center: ComplexPoint, radius: f64) -> Self {
        Self {
            center,
            radius,
            power: Self::DEFAULT_POWER,
        }
    }

    fn t(&self, z: &ComplexPoint) -> f64 {
        z.dist(&self.center).powi(2) / (self.radius * self.radius)
    }

    pub fn profile(&self, t: f64) -> f64 {
        if t >= 1.0 {
            0.0
        } else {
            (1.0 - t).powi(self.power)
        }
    }

    pub fn profile_derivative(&self, t: f64) -> f64 {
        if t >= 1.0 {
            0.0
        } else {
            -(self.power as f64) * (1.0 - t).powi(self.power - 1)
        }
    }

    pub fn value(&self, z: &ComplexPoint) -> f64 {
        self.profile(self.t(z))
    }

    /// `(∂b/∂z̄_k)_k = β′(t) (z_k − c_k)/R²`.
    pub fn dzbar(&self, z: &ComplexPoint) -> Vec<C64> {
        let d = self.profile_derivative(self.t(z)) / (self.radius * self.radius);
        z.coords().iter().zip(self.center.coords()).map(|(a, c)| (a - c) * d).collect()
    }

    /// `(∂b/∂z_k)_k = β′(t) conj(z_k − c_k)/R²`.
    pub fn dz(&self, z: &ComplexPoint) -> Vec<C64> {
        self.dzbar(z).into_iter().map(|c| c.conj()).collect()
    }

    pub fn support(&self) -> DomainBox<f64> {
        DomainBox::ball(self.center.clone(), self.radius).expect("positive radius")
    }
}

/// `ξ · b`.
#[derive(Clone, Debug)]
pub struct BumpConst {
    pub xi: Vec<C64>,
    pub bump: Bump,
}

impl FormField01 for BumpConst {
    fn dim(&self) -> usize {
        self.xi.len()
    }
    fn coeffs(&self, z: &ComplexPoint) -> Vec<C64> {
        let b = self.bump.value(z);
        self.xi.iter().map(|x| x * b).collect()
    }
    fn support(&self) -> DomainBox<f64> {
        self.bump.support()
    }
    fn name(&self) -> String {
        "bump_const".into()
    }
}

/// `b · (dz̄₁ + z̄₂ dz̄₂)` in C², and `z̄ b dz̄` in C.
#[derive(Clone, Debug)]
pub struct BumpZbar2 {
    pub bump: Bump,
}

impl FormField01 for BumpZbar2 {
    fn dim(&self) -> usize {
        self.bump.center.dim()
    }
    fn coeffs(&self, z: &ComplexPoint) -> Vec<C64> {
        let b = self.bump.value(z);
        let c = z.coords();
        let n = c.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        if n == 1 {
            out[0] = c[0].conj() * b;
        } else {
            out[0] = C64::new(b, 0.0);
            out[1] = c[1].conj() * b;
        }
        out
    }
    fn support(&self) -> DomainBox<f64> {
        self.bump.support()
    }
    fn name(&self) -> String {
        "bump_zbar2".into()
    }
}

/// `∂̄b = Σ ∂b/∂z̄_k dz̄_k`.
#[derive(Clone, Debug)]
pub struct DbarBump {
    pub bump: Bump,
}

impl FormField01 for DbarBump {
    fn dim(&self) -> usize {
        self.bump.center.dim()
    }
    fn coeffs(&self, z: &ComplexPoint) -> Vec<C64> {
        self.bump.dzbar(z)
    }
    fn support(&self) -> DomainBox<f64> {
        self.bump.support()
    }
    fn name(&self) -> String {
        "dbar_bump".into()
    }
}

/// Largest coefficient magnitude at seeded points on the sphere bounding the
/// support and in a shell just outside it.
pub fn support_leak(form: &dyn FormField01, samples: usize, seed: u64) -> f64 {
    let support = form.support();
    let reach = support.half_widths().into_iter().fold(0.0, f64::max);
    let n = form.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for i in 0..samples {
        let dir: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let scale = if i % 2 == 0 { 1.0 } else { 1.0 + rng.random::<f64>() * 0.5 };
        let c = support.center.to_real();
        let xs: Vec<f64> = dir.iter().zip(&c).map(|(d, c0)| c0 + d / len * reach * scale).collect();
        let z = Point::from_real(&xs);
        if support.contains(&z) && support.kind != crate::geometry::DomainKind::Ball {
            continue;
        }
        for a in form.coeffs(&z) {
            worst = worst.max(a.norm());
        }
    }
    worst
}

fn parse_direction(text: &str, n: usize) -> Result<Vec<C64>> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::parse("form.bump_const", e.to_string()))?;
    let xi = match v {
        serde_json::Value::Number(x) => {
            let mut xi = vec![C64::new(0.0, 0.0); n];
            xi[0] = C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0);
            xi
        }
        other => {
            let p: ComplexPoint =
                serde_json::from_value(other).map_err(|e| Error::parse("form.bump_const", e.to_string()))?;
            p.0
        }
    };
    if xi.len() != n {
        return Err(Error::parse("form.bump_const", format!("expected {n} coordinates")));
    }
    Ok(xi)
}

/// Builtin forms supported in the unit ball at the origin: `bump_const[:ξ]`,
/// `bump_zbar2`, `dbar_bump`, `dbar_nu`.
pub fn parse_form(id: &str, n: usize) -> Result<Box<dyn FormField01>> {
    let (name, param) = match id.split_once(':') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (id.trim(), None),
    };
    let bump = Bump::new(Point::origin(n), 1.0);
    match name {
        "bump_const" => {
            let xi = match param {
                Some(p) => parse_direction(p, n)?,
                None => {
                    let mut xi = vec![C64::new(0.0, 0.0); n];
                    xi[0] = C64::new(1.0, 0.0);
                    xi
                }
            };
            Ok(Box::new(BumpConst { xi, bump }))
        }
        "bump_zbar2" => Ok(Box::new(BumpZbar2 { bump })),
        "dbar_bump" => Ok(Box::new(DbarBump { bump })),
        "dbar_nu" => {
            let mut xi = vec![C64::new(0.0, 0.0); n];
            xi[0] = C64::new(1.0, 0.0);
            let chi = crate::cutoff::make_cutoff(crate::cutoff::CutoffKind::Thm21);
            let (_, f) = crate::witness::build_witness_form(&Point::origin(n), &xi, 1.0, chi)?;
            Ok(Box::new(f))
        }
        other => Err(Error::parse("form", format!("unknown form id '{other}'"))),
    }
}
