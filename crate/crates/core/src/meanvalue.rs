//! Sub-mean-value tests over holomorphic cylinders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{ComplexPoint, ScalarField};
use crate::geometry::{
    disc_rule, frame_with_first_column, random_unitary, sample_cylinder, Cylinder, DomainBox, QuadratureRule,
};
use crate::linalg::C64;
use crate::scalar::CompensatedSum;

/// Default absolute tolerance on margins.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-6;

const CHUNK: usize = 4096;
const FLOOR_EXPONENTS: std::ops::RangeInclusive<i32> = 4..=20;
const FLOOR_CONVERGENCE: f64 = 1e-8;

type Cyl = Cylinder<f64>;

/// `∫ max(v, −floor) w / ∫ w` in fixed chunk order.
fn weighted_mean(values: &[f64], weights: &[f64], floor: Option<f64>) -> f64 {
    let partial: Vec<(CompensatedSum<f64>, CompensatedSum<f64>)> = values
        .par_chunks(CHUNK)
        .zip(weights.par_chunks(CHUNK))
        .map(|(vs, ws)| {
            let mut num = CompensatedSum::new();
            let mut den = CompensatedSum::new();
            for (v, w) in vs.iter().zip(ws) {
                let v = match floor {
                    Some(f) => v.max(-f),
                    None => *v,
                };
                num.add(v * w);
                den.add(*w);
            }
            (num, den)
        })
        .collect();
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (a, b) in &partial {
        num.merge(a);
        den.merge(b);
    }
    num.value() / den.value()
}

/// Weighted mean of nodal values that may be `−∞`. Values are clipped below at
/// `−2^k` for `k = 4..=20`; the limit is returned once successive clipped means
/// agree to 1e−8, and `−∞` otherwise.
pub fn clipped_mean(values: &[f64], weights: &[f64]) -> f64 {
    let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest >= -2f64.powi(*FLOOR_EXPONENTS.start()) {
        return weighted_mean(values, weights, None);
    }
    let mut previous: Option<f64> = None;
    for k in FLOOR_EXPONENTS {
        let m = weighted_mean(values, weights, Some(2f64.powi(k)));
        if let Some(p) = previous {
            if (m - p).abs() < FLOOR_CONVERGENCE {
                return m;
            }
        }
        previous = Some(m);
    }
    f64::NEG_INFINITY
}

fn check_inside(phi: &dyn ScalarField, p: &Cyl) -> Result<()> {
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
    Ok(())
}

/// Nodal values and weights of `φ` over `z0 + P`.
pub(crate) fn sample_values(phi: &dyn ScalarField, p: &Cyl, rule: &QuadratureRule) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inside(phi, p)?;
    let nodes = sample_cylinder(p, rule)?;
    let values: Vec<f64> = nodes.par_iter().map(|q| phi.eval(&q.point)).collect();
    let weights = nodes.iter().map(|q| q.weight).collect();
    Ok((values, weights))
}

/// `(1/μ(P)) ∫_{z0+P} φ`.
pub fn cylinder_mean(phi: &dyn ScalarField, p: &Cyl, rule: &QuadratureRule) -> Result<f64> {
    let (values, weights) = sample_values(phi, p, rule)?;
    Ok(clipped_mean(&values, &weights))
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanValueReport {
    pub center: ComplexPoint,
    pub cylinder: Cyl,
    pub mean: f64,
    pub value_at_center: f64,
    /// `mean − φ(z0)`.
    pub margin: f64,
    /// `|mean − mean at a quarter of the budget|`.
    pub error_estimate: f64,
    pub budget: usize,
}

impl MeanValueReport {
    pub fn is_violation(&self, tol: f64) -> bool {
        self.margin < -tol
    }
}

/// Compares `φ(z0)` with the cylinder mean. A margin below `−tol` is a
/// violation of the sub-mean-value inequality at this cylinder.
pub fn submean_test(phi: &dyn ScalarField, p: &Cyl, rule: &QuadratureRule) -> Result<MeanValueReport> {
    let center = p.center().clone();
    let value_at_center = phi.eval(&center);
    if value_at_center == f64::NEG_INFINITY {
        return Err(Error::invalid(format!("cylinder center {center} lies on the pole set")));
    }
    let mean = cylinder_mean(phi, p, rule)?;
    let coarse = cylinder_mean(phi, p, &rule.with_budget((rule.budget / 4).max(crate::geometry::MIN_NODE_BUDGET)))?;
    let error_estimate = if mean.is_finite() && coarse.is_finite() {
        (mean - coarse).abs()
    } else {
        f64::INFINITY
    };
    Ok(MeanValueReport {
        center,
        cylinder: p.clone(),
        margin: mean - value_at_center,
        mean,
        value_at_center,
        error_estimate,
        budget: rule.budget,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanOptions {
    pub centers: usize,
    pub cylinders_per_center: usize,
    pub seed: u64,
    pub tol: f64,
    pub rule: QuadratureRule,
    /// Cylinder circumradius as a fraction of the room left around the center.
    pub radius_fraction: (f64, f64),
}

impl ScanOptions {
    pub fn new(n: usize, centers: usize, cylinders_per_center: usize, seed: u64) -> Self {
        Self {
            centers,
            cylinders_per_center,
            seed,
            tol: DEFAULT_MARGIN_TOL,
            rule: QuadratureRule::default_for(n),
            radius_fraction: (0.2, 0.9),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PshScan {
    pub cylinders: usize,
    pub min_margin: f64,
    pub max_error_estimate: f64,
    /// Candidates re-checked at four times the budget whose margin stays below
    /// `−(tol/2 + error_estimate)`, reported at the larger budget.
    pub violations: Vec<MeanValueReport>,
    /// Candidates that failed the re-check.
    pub discarded: usize,
}

impl PshScan {
    pub fn violated(&self) -> bool {
        !self.violations.is_empty()
    }

    pub fn verdict(&self) -> &'static str {
        if self.violated() {
            "violated"
        } else {
            "no-violation-found"
        }
    }
}

/// Seeded cylinders inside `region`, centered off the pole set of `phi`.
pub fn sample_scan_cylinders(phi: &dyn ScalarField, region: &DomainBox<f64>, opts: &ScanOptions) -> Result<Vec<Cyl>> {
    let n = region.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = region.half_widths().into_iter().fold(0.0, f64::max);
    let mut out = Vec::with_capacity(opts.centers * opts.cylinders_per_center);
    for _ in 0..opts.centers {
        let mut attempts = 0;
        let (center, room) = loop {
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::invalid("could not place a cylinder center off the pole set"));
            }
            let z = region.sample_uniform(&mut rng);
            let room = region.inner_radius_at(&z);
            let v = phi.eval(&z);
            if room > 1e-3 * scale && v.is_finite() && !phi.is_pole(&z) {
                break (z, room);
            }
        };
        for _ in 0..opts.cylinders_per_center {
            let (lo, hi) = opts.radius_fraction;
            let rho = room * rng.random_range(lo..hi);
            let frame = random_unitary(rng.random::<u64>(), n);
            let p = if n == 1 {
                Cylinder::new(center.clone(), frame, rho, rho)?
            } else {
                // split ρ² between the two radii
                let t: f64 = rng.random_range(0.15..0.85);
                Cylinder::new(center.clone(), frame, rho * t.sqrt(), rho * (1.0 - t).sqrt())?
            };
            out.push(p);
        }
    }
    Ok(out)
}

/// Randomized sub-mean-value scan. Deterministic for a fixed seed, whatever the
/// thread count.
pub fn classify_psh(phi: &dyn ScalarField, region: &DomainBox<f64>, opts: &ScanOptions) -> Result<PshScan> {
    if opts.centers == 0 || opts.cylinders_per_center == 0 {
        return Err(Error::invalid("empty scan budget"));
    }
    if region.dim() != phi.dim() {
        return Err(Error::Dimension {
            expected: phi.dim(),
            got: region.dim(),
        });
    }
    let cylinders = sample_scan_cylinders(phi, region, opts)?;
    let reports: Vec<MeanValueReport> = cylinders
        .par_iter()
        .map(|p| submean_test(phi, p, &opts.rule))
        .collect::<Result<_>>()?;
    let min_margin = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let max_error_estimate = reports.iter().map(|r| r.error_estimate).fold(0.0, f64::max);
    let fine = opts.rule.with_budget(opts.rule.budget * 4);
    let rechecked: Vec<MeanValueReport> = reports
        .iter()
        .filter(|r| r.is_violation(opts.tol))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|r| submean_test(phi, &r.cylinder, &fine))
        .collect::<Result<_>>()?;
    let candidates = rechecked.len();
    let violations: Vec<MeanValueReport> = rechecked
        .into_iter()
        .filter(|r| r.is_violation(opts.tol / 2.0 + r.error_estimate))
        .collect();
    Ok(PshScan {
        cylinders: reports.len(),
        min_margin,
        max_error_estimate,
        discarded: candidates - violations.len(),
        violations,
    })
}

/// Cylinder means along the complex line through `z0` in direction `ξ`, for
/// frames with first column `ξ` and transverse radii `s_seq`, followed by the
/// mean over the disc `{z0 + ζξ : |ζ| < r}` itself.
pub fn line_disc_mean(
    phi: &dyn ScalarField,
    z0: &ComplexPoint,
    xi: &[C64],
    r: f64,
    s_seq: &[f64],
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let norm = xi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("direction must be a unit vector (|xi| = {norm})")));
    }
    let frame = frame_with_first_column(xi);
    let mut out = Vec::with_capacity(s_seq.len() + 1);
    for &s in s_seq {
        let p = Cylinder::new(z0.clone(), frame.clone(), r, s)?;
        out.push(cylinder_mean(phi, &p, rule)?);
    }
    let disc = disc_rule::<f64>(rule.budget.max(crate::geometry::MIN_NODE_BUDGET), r);
    let line = |zeta: C64| z0.offset(&xi.iter().map(|x| x * zeta).collect::<Vec<_>>());
    if let Some(domain) = phi.domain() {
        if domain.inner_radius_at(z0) < r {
            return Err(Error::CylinderOutsideDomain);
        }
    }
    let values: Vec<f64> = disc.iter().map(|(zeta, _)| phi.eval(&line(*zeta))).collect();
    let weights: Vec<f64> = disc.iter().map(|(_, w)| *w).collect();
    out.push(clipped_mean(&values, &weights));
    Ok(out)
}
