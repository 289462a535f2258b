//! Test forms and weights that detect failures of `i∂∂̄φ ≥ ω` through the sign
//! of the estimate functional
//!
//! ```text
//! E(α) = ∫ Σ (φ_{jk̄} − g_{jk̄}) α_j ᾱ_k e^{−(φ+ψ)} + ∫ Σ |∂α_j/∂z̄_k|² e^{−(φ+ψ)},
//! ```
//!
//! and the annulus forms, singular weights and constants behind the coarse
//! estimate chain.

use serde::Serialize;

use crate::bochner::{dzbar_density, levi_density, SampledForm};
use crate::cutoff::{make_cutoff, CutoffKind, CutoffProfile};
use crate::error::{Error, Result};
use crate::fields::{
    self, check_lower_bound, ComplexPoint, HermitianField, LowerBoundVerdict, ScalarField, Smoothness, SumField,
};
use crate::forms::FormField01;
use crate::geometry::{unit_ball_volume, DomainBox};
use crate::grid::{integrate_real, min_weight, weights_at, GridDiscretization, ScaledIntegral};
use crate::linalg::{self, CMatrix, CVector, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

fn unit_check(xi: &[C64]) -> Result<()> {
    let norm = xi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("direction must be a unit vector (|xi| = {norm})")));
    }
    Ok(())
}

fn diff(z: &ComplexPoint, z0: &ComplexPoint) -> Vec<C64> {
    z.coords().iter().zip(z0.coords()).map(|(a, b)| a - b).collect()
}

/// `ν(z) = (Σ_j ξ_j (z̄_j − z̄0_j)) χ(|z − z0|²/r²)`.
#[derive(Clone, Debug)]
pub struct WitnessPotential {
    pub z0: ComplexPoint,
    pub xi: Vec<C64>,
    pub r: f64,
    pub chi: CutoffProfile<f64>,
}

impl WitnessPotential {
    pub fn value(&self, z: &ComplexPoint) -> C64 {
        let w = diff(z, &self.z0);
        let lin: C64 = self.xi.iter().zip(&w).map(|(x, d)| x * d.conj()).sum();
        lin * self.chi.value(z.dist(&self.z0).powi(2) / (self.r * self.r))
    }
}

/// `f = ∂̄ν`, in closed form.
#[derive(Clone, Debug)]
pub struct WitnessForm {
    pub z0: ComplexPoint,
    pub xi: Vec<C64>,
    pub r: f64,
    pub chi: CutoffProfile<f64>,
}

impl FormField01 for WitnessForm {
    fn dim(&self) -> usize {
        self.xi.len()
    }

    fn coeffs(&self, z: &ComplexPoint) -> Vec<C64> {
        let w = diff(z, &self.z0);
        let r2 = self.r * self.r;
        let t = w.iter().map(|c| c.norm_sqr()).sum::<f64>() / r2;
        let lin: C64 = self.xi.iter().zip(&w).map(|(x, d)| x * d.conj()).sum();
        let chi = self.chi.value(t);
        let dchi = self.chi.derivative(t);
        self.xi
            .iter()
            .zip(&w)
            .map(|(x, wj)| x * chi + lin * dchi * wj / r2)
            .collect()
    }

    fn support(&self) -> DomainBox<f64> {
        DomainBox::ball(self.z0.clone(), self.r).expect("positive radius")
    }

    fn smoothness(&self) -> Smoothness {
        match self.chi.kind {
            CutoffKind::Thm21 => Smoothness::C2,
            CutoffKind::Thm23 => Smoothness::C0,
        }
    }

    fn name(&self) -> String {
        "dbar_nu".into()
    }
}

pub fn build_witness_form(
    z0: &ComplexPoint,
    xi: &[C64],
    r: f64,
    chi: CutoffProfile<f64>,
) -> Result<(WitnessPotential, WitnessForm)> {
    unit_check(xi)?;
    if xi.len() != z0.dim() {
        return Err(Error::Dimension {
            expected: z0.dim(),
            got: xi.len(),
        });
    }
    if !(r > 0.0) {
        return Err(Error::invalid("witness radius must be positive"));
    }
    let nu = WitnessPotential {
        z0: z0.clone(),
        xi: xi.to_vec(),
        r,
        chi,
    };
    let f = WitnessForm {
        z0: z0.clone(),
        xi: xi.to_vec(),
        r,
        chi,
    };
    Ok((nu, f))
}

/// `ψ_s(z) = s(|z − z0|² − r²/4)`.
#[derive(Clone, Debug, Serialize)]
pub struct PsiS {
    pub z0: ComplexPoint,
    pub r: f64,
    pub s: f64,
}

pub fn build_psi_s(z0: &ComplexPoint, r: f64, s: f64) -> Result<PsiS> {
    if !(s > 0.0) {
        return Err(Error::invalid("s must be positive"));
    }
    Ok(PsiS { z0: z0.clone(), r, s })
}

impl ScalarField for PsiS {
    fn dim(&self) -> usize {
        self.z0.dim()
    }
    fn eval(&self, z: &ComplexPoint) -> f64 {
        self.s * (z.dist(&self.z0).powi(2) - self.r * self.r / 4.0)
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::C2
    }
    fn gradient(&self, z: &ComplexPoint) -> Option<Vec<C64>> {
        Some(diff(z, &self.z0).into_iter().map(|w| w.conj() * self.s).collect())
    }
    fn hessian(&self, _z: &ComplexPoint) -> Option<CMatrix> {
        let n = self.dim();
        Some(CMatrix::identity(n, n).scale(self.s))
    }
    fn name(&self) -> String {
        format!("psi_s[{}]", self.s)
    }
}

/// `α = f·B⁻¹` as a row vector, so that `Σ B_{jk̄} α_j ᾱ_k = |f|²_B`.
pub fn alpha_from_f(f: &[C64], b: &CMatrix) -> Result<Vec<C64>> {
    if b.nrows() != f.len() || b.ncols() != f.len() {
        return Err(Error::Dimension {
            expected: b.nrows(),
            got: f.len(),
        });
    }
    let lambda = linalg::min_eigenvalue(b);
    if !(lambda > 1e-12) {
        return Err(Error::MetricNotPositive { min_eigenvalue: lambda });
    }
    let x = linalg::solve_hpd(&b.transpose(), &CVector::from_column_slice(f))?;
    Ok(x.iter().copied().collect())
}

/// `α^s = f·(i∂∂̄ψ + ω)⁻¹`, evaluated nodewise.
pub struct AlphaS<'a> {
    pub f: &'a dyn FormField01,
    pub psi: &'a dyn ScalarField,
    pub omega: &'a dyn HermitianField,
}

impl FormField01 for AlphaS<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn coeffs(&self, z: &ComplexPoint) -> Vec<C64> {
        let f = self.f.coeffs(z);
        if f.iter().all(|c| *c == ZERO) {
            return f;
        }
        let mut b = fields::levi_form(self.psi, z, fields::DEFAULT_FD_STEP).expect("psi is C2");
        b += self.omega.coeffs(z);
        alpha_from_f(&f, &b).unwrap_or_else(|_| vec![C64::new(f64::NAN, f64::NAN); f.len()])
    }
    fn support(&self) -> DomainBox<f64> {
        self.f.support()
    }
    fn smoothness(&self) -> Smoothness {
        self.f.smoothness()
    }
    fn name(&self) -> String {
        format!("alpha[{}]", self.f.name())
    }
}

/// Value of the estimate functional, kept as `mantissa · e^{log_scale}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EstimateValue {
    pub mantissa: f64,
    pub log_scale: f64,
    /// Levi term on the same scale.
    pub levi: f64,
    /// Derivative term on the same scale.
    pub gradient: f64,
}

impl EstimateValue {
    pub fn value(&self) -> f64 {
        ScaledIntegral {
            mantissa: self.mantissa,
            log_scale: self.log_scale,
        }
        .value()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0.0
    }
}

pub fn estimate_functional_e(
    alpha: &dyn FormField01,
    phi: &dyn ScalarField,
    psi: &dyn ScalarField,
    omega: &dyn HermitianField,
    grid: &GridDiscretization,
) -> Result<EstimateValue> {
    let form = SampledForm::new(alpha, grid)?;
    if form.field.values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        let lambda = grid_min_metric(alpha, psi, omega, grid);
        return Err(Error::MetricNotPositive { min_eigenvalue: lambda });
    }
    let levi = levi_density(&form, phi, Some(omega))?;
    let grad = dzbar_density(&form);
    let active: Vec<bool> = levi.iter().zip(&grad).map(|(a, b)| *a != 0.0 || *b != 0.0).collect();
    let weight = SumField(phi, psi);
    let ws = weights_at(grid, &weight, &active)?;
    let shift = min_weight(&ws);
    if !shift.is_finite() {
        return Ok(EstimateValue {
            mantissa: 0.0,
            log_scale: 0.0,
            levi: 0.0,
            gradient: 0.0,
        });
    }
    let l = integrate_real(grid, &levi, &ws, shift);
    let g = integrate_real(grid, &grad, &ws, shift);
    Ok(EstimateValue {
        mantissa: l + g,
        log_scale: -shift,
        levi: l,
        gradient: g,
    })
}

fn grid_min_metric(alpha: &dyn FormField01, psi: &dyn ScalarField, omega: &dyn HermitianField, grid: &GridDiscretization) -> f64 {
    let support = alpha.support();
    (0..grid.len())
        .map(|i| grid.node(i))
        .filter(|z| support.contains(z))
        .filter_map(|z| {
            let b = fields::levi_form(psi, &z, fields::DEFAULT_FD_STEP).ok()? + omega.coeffs(&z);
            Some(linalg::min_eigenvalue(&b))
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessCertificate {
    pub z0: ComplexPoint,
    pub xi: ComplexPoint,
    pub r: f64,
    pub c: f64,
    pub s: f64,
    /// `E = e_mantissa · e^{e_log_scale}`; only the sign and the two parts are
    /// meaningful at large `s`.
    pub e_mantissa: f64,
    pub e_log_scale: f64,
    pub grid_per_axis: usize,
    pub grid_half_width: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessScanOptions {
    pub s_schedule: Vec<f64>,
    /// Nodes per real axis of the integration grid.
    pub grid: usize,
    /// Nodes per real axis for the pointwise Levi check on the region.
    pub resolution: usize,
    pub tol: f64,
}

impl WitnessScanOptions {
    pub fn default_for(n: usize) -> Self {
        Self {
            s_schedule: vec![10.0, 1e2, 1e3, 1e4],
            grid: if n == 1 { 64 } else { 16 },
            resolution: if n == 1 { 21 } else { 7 },
            tol: 1e-9,
        }
    }
}

/// One E evaluation along the schedule.
#[derive(Clone, Debug, Serialize)]
pub struct ScheduleStep {
    pub s: f64,
    pub e: EstimateValue,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessScan {
    pub verdict: LowerBoundVerdict,
    pub steps: Vec<ScheduleStep>,
    pub certificate: Option<WitnessCertificate>,
}

fn sampled_ball(center: &ComplexPoint, r: f64) -> Vec<ComplexPoint> {
    let ball = DomainBox::ball(center.clone(), r).expect("positive radius");
    let mut nodes = ball.grid_nodes(5);
    nodes.push(center.clone());
    nodes
}

/// Largest `c` with `λ_min < −c` at every sampled node of `B(z0, r)` and the
/// largest dyadic `r ≤ r_max` for which the sampled minimum stays below `−c0/2`.
fn pick_radius(
    phi: &dyn ScalarField,
    omega: &dyn HermitianField,
    z0: &ComplexPoint,
    c0: f64,
    r_max: f64,
) -> Result<(f64, f64)> {
    for k in 0..24 {
        let r = r_max * 0.5f64.powi(k);
        let mut worst = f64::NEG_INFINITY;
        let mut ok = true;
        for z in sampled_ball(z0, r) {
            if phi.smoothness_at(&z) < Smoothness::C2 || phi.is_pole(&z) {
                ok = false;
                break;
            }
            let lam = fields::min_levi_eigenvalue(phi, omega, &z)?.lambda_min;
            if lam >= -c0 / 2.0 {
                ok = false;
                break;
            }
            worst = worst.max(lam);
        }
        if ok {
            return Ok((r, -worst * (1.0 - 1e-6)));
        }
    }
    Err(Error::invalid("no radius on the dyadic ladder keeps the Levi form negative"))
}

pub fn scan_sharp_witness(
    phi: &dyn ScalarField,
    omega: &dyn HermitianField,
    region: &DomainBox<f64>,
    opts: &WitnessScanOptions,
) -> Result<WitnessScan> {
    let verdict = check_lower_bound(phi, omega, region, opts.resolution, opts.tol)?;
    let (z0, xi, c0) = match &verdict {
        LowerBoundVerdict::Holds { .. } => {
            return Ok(WitnessScan {
                verdict,
                steps: vec![],
                certificate: None,
            })
        }
        LowerBoundVerdict::Violated { z0, xi, c, .. } => (z0.clone(), xi.clone(), *c),
    };
    let mut r_max = region.half_widths().into_iter().fold(0.0, f64::max);
    if let Some(domain) = phi.domain() {
        r_max = r_max.min(domain.inner_radius_at(&z0));
    }
    let (r, c) = pick_radius(phi, omega, &z0, c0, r_max)?;
    let chi = make_cutoff(CutoffKind::Thm21);
    let (_, f) = build_witness_form(&z0, xi.coords(), r, chi)?;
    let grid = GridDiscretization::around(&f.support(), opts.grid)?;
    let mut steps = Vec::new();
    let mut certificate = None;
    for &s in &opts.s_schedule {
        let psi = build_psi_s(&z0, r, s)?;
        let alpha = AlphaS {
            f: &f,
            psi: &psi,
            omega,
        };
        let e = estimate_functional_e(&alpha, phi, &psi, omega, &grid)?;
        steps.push(ScheduleStep { s, e });
        if e.is_negative() {
            certificate = Some(WitnessCertificate {
                z0: z0.clone(),
                xi: xi.clone(),
                r,
                c,
                s,
                e_mantissa: e.mantissa,
                e_log_scale: e.log_scale,
                grid_per_axis: opts.grid,
                grid_half_width: grid.half_width(),
            });
            break;
        }
    }
    Ok(WitnessScan {
        verdict,
        steps,
        certificate,
    })
}

/// Re-evaluates a certificate's functional on a grid with `per_axis` nodes.
pub fn reevaluate_certificate(
    cert: &WitnessCertificate,
    phi: &dyn ScalarField,
    omega: &dyn HermitianField,
    per_axis: usize,
) -> Result<EstimateValue> {
    let chi = make_cutoff(CutoffKind::Thm21);
    let (_, f) = build_witness_form(&cert.z0, cert.xi.coords(), cert.r, chi)?;
    let psi = build_psi_s(&cert.z0, cert.r, cert.s)?;
    let grid = GridDiscretization::around(&f.support(), per_axis)?;
    let alpha = AlphaS {
        f: &f,
        psi: &psi,
        omega,
    };
    estimate_functional_e(&alpha, phi, &psi, omega, &grid)
}

/// `α_ε = χ′(|z − w|²/ε²) Σ_j ((z_j − w_j)/ε²) dz̄_j`, supported in the annulus
/// `ε/2 ≤ |z − w| ≤ ε`.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaEps {
    pub w: ComplexPoint,
    pub eps: f64,
    pub chi: CutoffProfile<f64>,
}

pub fn build_alpha_eps(w: &ComplexPoint, eps: f64, chi: CutoffProfile<f64>) -> Result<AlphaEps> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    Ok(AlphaEps {
        w: w.clone(),
        eps,
        chi,
    })
}

impl FormField01 for AlphaEps {
    fn dim(&self) -> usize {
        self.w.dim()
    }
    fn coeffs(&self, z: &ComplexPoint) -> Vec<C64> {
        let e2 = self.eps * self.eps;
        let d = diff(z, &self.w);
        let t = d.iter().map(|c| c.norm_sqr()).sum::<f64>() / e2;
        let k = self.chi.derivative(t) / e2;
        d.into_iter().map(|c| c * k).collect()
    }
    fn support(&self) -> DomainBox<f64> {
        DomainBox::ball(self.w.clone(), self.eps).expect("positive radius")
    }
    fn smoothness(&self) -> Smoothness {
        match self.chi.kind {
            CutoffKind::Thm21 => Smoothness::C2,
            CutoffKind::Thm23 => Smoothness::C0,
        }
    }
    fn name(&self) -> String {
        format!("alpha_eps[{}]", self.eps)
    }
}

/// `ψ_δ(z) = |z|² + n log(|z − w|² + δ²)`.
#[derive(Clone, Debug, Serialize)]
pub struct PsiDelta {
    pub w: ComplexPoint,
    pub delta: f64,
}

pub fn build_psi_delta(w: &ComplexPoint, delta: f64, n: usize) -> Result<PsiDelta> {
    if w.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: w.dim(),
        });
    }
    if !(delta >= 0.0) {
        return Err(Error::invalid("delta must be nonnegative"));
    }
    Ok(PsiDelta { w: w.clone(), delta })
}

impl PsiDelta {
    fn q(&self, z: &ComplexPoint) -> f64 {
        z.dist(&self.w).powi(2) + self.delta * self.delta
    }
}

impl ScalarField for PsiDelta {
    fn dim(&self) -> usize {
        self.w.dim()
    }
    fn eval(&self, z: &ComplexPoint) -> f64 {
        let q = self.q(z);
        if q == 0.0 {
            return f64::NEG_INFINITY;
        }
        z.norm_sqr() + self.dim() as f64 * q.ln()
    }
    fn smoothness(&self) -> Smoothness {
        if self.delta > 0.0 {
            Smoothness::C2
        } else {
            Smoothness::Usc
        }
    }
    fn smoothness_at(&self, z: &ComplexPoint) -> Smoothness {
        if self.q(z) > 0.0 {
            Smoothness::C2
        } else {
            Smoothness::Usc
        }
    }
    fn gradient(&self, z: &ComplexPoint) -> Option<Vec<C64>> {
        let q = self.q(z);
        let n = self.dim() as f64;
        Some(
            z.coords()
                .iter()
                .zip(diff(z, &self.w))
                .map(|(zj, d)| zj.conj() + d.conj() * (n / q))
                .collect(),
        )
    }
    fn hessian(&self, z: &ComplexPoint) -> Option<CMatrix> {
        let q = self.q(z);
        let n = self.dim();
        let d = diff(z, &self.w);
        Some(CMatrix::from_fn(n, n, |j, k| {
            let delta = if j == k { 1.0 } else { 0.0 };
            C64::new(delta * (1.0 + n as f64 / q), 0.0) - d[j].conj() * d[k] * (n as f64 / (q * q))
        }))
    }
    fn is_pole(&self, z: &ComplexPoint) -> bool {
        self.q(z) == 0.0
    }
    fn name(&self) -> String {
        format!("psi_delta[{}]", self.delta)
    }
}

/// Growth rule for the constants `C_m`, given through `log C_m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CmRule {
    Const { c: f64 },
    Poly { k: f64 },
    Exp { a: f64 },
    ExpSqrt,
}

impl CmRule {
    /// `const:<c>` (or a bare number), `poly:<k>`, `exp:<a>`, `exp_sqrt`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let num = |field: &str, v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(field, format!("'{v}': {e}")))
        };
        let rule = match text.split_once(':') {
            Some(("const", v)) => CmRule::Const { c: num("cm.const", v)? },
            Some(("poly", v)) => CmRule::Poly { k: num("cm.poly", v)? },
            Some(("exp", v)) => CmRule::Exp { a: num("cm.exp", v)? },
            None if text == "exp_sqrt" => CmRule::ExpSqrt,
            None => CmRule::Const { c: num("cm", text)? },
            Some((other, _)) => return Err(Error::parse("cm", format!("unknown rule '{other}'"))),
        };
        if let CmRule::Const { c } = rule {
            if !(c >= 1.0) {
                return Err(Error::parse("cm.const", "constants must be at least 1"));
            }
        }
        Ok(rule)
    }

    pub fn log_c(&self, m: f64) -> f64 {
        match *self {
            CmRule::Const { c } => c.ln(),
            CmRule::Poly { k } => k * m.ln(),
            CmRule::Exp { a } => a * m,
            CmRule::ExpSqrt => m.sqrt(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoarseChainReport {
    pub m: f64,
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    pub w: ComplexPoint,
    pub c_m: f64,
    /// `C_m ∫ |α_ε|^p_{i∂∂̄ψ_δ} e^{−(mφ+ψ_δ)}`.
    pub rhs_integral: f64,
    /// `C C_m e^{−m inf φ} / ε^p`.
    pub bound: f64,
    pub log_rhs_integral: f64,
    pub log_bound: f64,
    /// `C = 2^{p+2n} μ(B₁)`.
    pub c_const: f64,
    pub inf_phi: f64,
    /// `closed-form` or `grid`.
    pub inf_source: &'static str,
    /// Largest `|α_ε|_{i∂∂̄ψ_δ} − |χ′| |z − w|/ε²` over the nodes.
    pub pointwise_excess: f64,
    pub holds: bool,
    pub o_eps: Option<f64>,
    pub c_prime_m: Option<f64>,
}

pub fn coarse_c_const(p: f64, n: usize) -> f64 {
    2f64.powf(p + 2.0 * n as f64) * unit_ball_volume::<f64>(n)
}

/// Integrates the right-hand side of the coarse estimate for the annulus form
/// `α_ε` at weight `mφ + ψ_δ` and compares it with the closed-form bound.
#[allow(clippy::too_many_arguments)]
pub fn coarse_rhs_bound(
    phi: &dyn ScalarField,
    m: f64,
    p: f64,
    w: &ComplexPoint,
    eps: f64,
    delta: f64,
    c_m: f64,
    grid_per_axis: usize,
) -> Result<CoarseChainReport> {
    let n = w.dim();
    let chi = make_cutoff(CutoffKind::Thm23);
    let alpha = build_alpha_eps(w, eps, chi)?;
    let psi = build_psi_delta(w, delta, n)?;
    let grid = GridDiscretization::around(&alpha.support(), grid_per_axis)?;
    if (eps / 2.0) / grid.h() < 8.0 {
        return Err(Error::invalid(format!(
            "grid does not resolve the annulus: {:.1} nodes across (needs 8)",
            (eps / 2.0) / grid.h()
        )));
    }
    let rows: Vec<Result<(f64, f64)>> = grid.sample(|_, z| {
        let a = alpha.coeffs(z);
        if a.iter().all(|c| *c == ZERO) {
            return Ok((0.0, f64::NEG_INFINITY));
        }
        let b = fields::levi_form(&psi, z, fields::DEFAULT_FD_STEP)?;
        let norm = linalg::dual_norm_sq(&a, &b)?.max(0.0).sqrt();
        let t = z.dist(w).powi(2) / (eps * eps);
        let cap = chi.derivative(t).abs() * z.dist(w) / (eps * eps);
        Ok((norm.powf(p), norm - cap))
    });
    let rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let density: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let pointwise_excess = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);

    let scaled_phi = fields::ScaledField(m, phi);
    let weight = SumField(&scaled_phi, &psi);
    let active: Vec<bool> = density.iter().map(|v| *v != 0.0).collect();
    let ws = weights_at(&grid, &weight, &active)?;
    let shift = min_weight(&ws);
    let mantissa = integrate_real(&grid, &density, &ws, shift);
    let log_rhs_integral = c_m.ln() + mantissa.ln() - shift;

    let (inf_phi, inf_source) = match phi.ball_infimum(w, eps) {
        Some(v) => (v, "closed-form"),
        None => {
            let ball = DomainBox::ball(w.clone(), eps)?;
            let v = (0..grid.len())
                .map(|i| grid.node(i))
                .filter(|z| ball.contains(z))
                .map(|z| phi.eval(&z))
                .fold(f64::INFINITY, f64::min);
            (v, "grid")
        }
    };
    let c_const = coarse_c_const(p, n);
    let log_bound = c_const.ln() + c_m.ln() - m * inf_phi - p * eps.ln();
    Ok(CoarseChainReport {
        m,
        p,
        eps,
        delta,
        w: w.clone(),
        c_m,
        rhs_integral: log_rhs_integral.exp(),
        bound: log_bound.exp(),
        log_rhs_integral,
        log_bound,
        c_const,
        inf_phi,
        inf_source,
        pointwise_excess,
        holds: log_rhs_integral <= log_bound + (1e-9f64).ln_1p(),
        o_eps: None,
        c_prime_m: None,
    })
}

/// Grid approximation of `O_ε = sup {|φ(z) − φ(w)| : z, w ∈ region, |z − w| ≤ ε}`.
pub fn modulus_of_continuity(
    phi: &dyn ScalarField,
    region: &DomainBox<f64>,
    eps: f64,
    per_axis: usize,
) -> Result<f64> {
    if phi.smoothness() < Smoothness::C0 {
        return Err(Error::Regularity {
            operation: "modulus_of_continuity",
            required: "continuity",
            found: phi.smoothness().label(),
        });
    }
    let nodes = region.grid_nodes(per_axis);
    let values: Vec<f64> = nodes.iter().map(|z| phi.eval(z)).collect();
    let reals: Vec<Vec<f64>> = nodes.iter().map(|z| z.to_real()).collect();
    let eps2 = eps * eps * (1.0 + 1e-12);
    let mut sup = 0.0_f64;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let d2: f64 = reals[i].iter().zip(&reals[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= eps2 {
                sup = sup.max((values[i] - values[j]).abs());
            }
        }
    }
    Ok(sup)
}

/// Largest difference quotient between neighboring grid nodes of `region`.
pub fn lipschitz_estimate(phi: &dyn ScalarField, region: &DomainBox<f64>, per_axis: usize) -> Result<f64> {
    if phi.smoothness() < Smoothness::C0 {
        return Err(Error::Regularity {
            operation: "lipschitz_estimate",
            required: "continuity",
            found: phi.smoothness().label(),
        });
    }
    let hw = region.half_widths().into_iter().fold(0.0, f64::max);
    let h = 2.0 * hw / (per_axis.max(2) - 1) as f64;
    let o = modulus_of_continuity(phi, region, h * 2f64.sqrt() * (1.0 + 1e-9), per_axis)?;
    Ok(o / h)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub m: f64,
    pub log_c_m: f64,
    pub o: f64,
    pub log_c_prime_m: f64,
    pub log_c_prime_over_m: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    /// `C′ = sup_D e^{ψ₀}` for `D ⊂ B(0, R)`, bounded by `e^{R²}(2R)^{2n}`.
    pub c_prime: f64,
    /// `C″ = 2^p (μ(B₁) + C′ C)`.
    pub c_double_prime: f64,
    pub rows: Vec<GrowthRow>,
    /// `log C′_m / m` at the largest `m` is below `tol`.
    pub admissible: bool,
    pub tol: f64,
}

/// `C′_m = C″ C_m m^p e^{m O_{1/m}}` in log form, with `O` supplied by the caller.
pub fn coarse_constant_growth(
    rule: &CmRule,
    ms: &[f64],
    p: f64,
    n: usize,
    domain_radius: f64,
    o_eval: &dyn Fn(f64) -> f64,
    tol: f64,
) -> GrowthReport {
    let r = domain_radius;
    let c_prime = (r * r).exp() * (2.0 * r).powi(2 * n as i32);
    let c_double_prime = 2f64.powf(p) * (unit_ball_volume::<f64>(n) + c_prime * coarse_c_const(p, n));
    let rows: Vec<GrowthRow> = ms
        .iter()
        .map(|&m| {
            let o = o_eval(1.0 / m);
            let log_c_m = rule.log_c(m);
            let log_c_prime_m = c_double_prime.ln() + log_c_m + p * m.ln() + m * o;
            GrowthRow {
                m,
                log_c_m,
                o,
                log_c_prime_m,
                log_c_prime_over_m: log_c_prime_m / m,
            }
        })
        .collect();
    let admissible = rows.last().is_some_and(|r| r.log_c_prime_over_m < tol);
    GrowthReport {
        c_prime,
        c_double_prime,
        rows,
        admissible,
        tol,
    }
}

#[cfg(test)]
mod tests;
