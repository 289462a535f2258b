//! The equation `∂u/∂z̄ = f` in one variable: a particular solution by the
//! Cauchy transform, the minimal solution in `L²(D, e^{−φ−ψ})` modulo
//! polynomials, and the ratio
//!
//! ```text
//! ∫_D |u|² e^{−φ−ψ} / ∫_D |f|²/ψ_{zz̄} e^{−φ−ψ}.
//! ```

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::bochner::GridField;
use crate::cutoff::{make_cutoff, CutoffKind};
use crate::error::{Error, Result};
use crate::fields::{self, ComplexPoint, ScalarField, SumField};
use crate::forms::FormField01;
use crate::geometry::DomainBox;
use crate::grid::{GridDiscretization, STENCIL_REACH};
use crate::linalg::{solve_gram, CMatrix, CVector, C64};
use crate::scalar::{compensated_sum, ComplexSum};
use crate::witness::{build_psi_s, build_witness_form};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `∫∫ x/(x²+y²) dx dy` as a function of the upper corner.
fn corner_p(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let log_term = if r2 == 0.0 { 0.0 } else { 0.5 * y * r2.ln() };
    let atan_term = if x == 0.0 { 0.0 } else { x * (y / x).atan() };
    log_term - y + atan_term
}

/// `(1/π) ∫_{cell} dA(v)/v` over the square of side `h` centered at `(cx, cy)`.
fn cell_kernel(cx: f64, cy: f64, h: f64) -> C64 {
    let (a, b) = (cx - h / 2.0, cx + h / 2.0);
    let (c, d) = (cy - h / 2.0, cy + h / 2.0);
    let rect = |f: &dyn Fn(f64, f64) -> f64| f(b, d) - f(a, d) - f(b, c) + f(a, c);
    let re = rect(&corner_p);
    let im = rect(&|x, y| corner_p(y, x));
    C64::new(re, -im) / std::f64::consts::PI
}

fn fft_2d(data: &mut [Complex<f64>], m: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    for row in data.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); m];
    for j in 0..m {
        for i in 0..m {
            col[i] = data[i * m + j];
        }
        fft.process(&mut col);
        for i in 0..m {
            data[i * m + j] = col[i];
        }
    }
}

fn require_plane(grid: &GridDiscretization) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: grid.dim(),
        });
    }
    Ok(())
}

/// `u(z) = (1/π) ∫ f(ζ)/(z − ζ) dA(ζ)` at every node, with `f` constant on
/// each grid cell and the kernel integrated exactly over the cells.
pub fn cauchy_transform(f: &GridField, grid: &GridDiscretization) -> Result<GridField> {
    require_plane(grid)?;
    if f.comps != 1 || f.nodes() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: f.nodes(),
        });
    }
    let n = grid.per_axis();
    let margin = 2 * STENCIL_REACH;
    for iy in 0..n {
        for ix in 0..n {
            let edge = ix < margin || iy < margin || ix >= n - margin || iy >= n - margin;
            if edge && f.values[ix + n * iy] != ZERO {
                return Err(Error::SupportOutsideGrid(format!(
                    "f is nonzero at node ({ix}, {iy}) within {margin} steps of the boundary"
                )));
            }
        }
    }
    let m = (2 * n - 1).next_power_of_two();
    let h = grid.h();
    let mut kernel = vec![Complex::new(0.0, 0.0); m * m];
    let offsets: Vec<isize> = (-(n as isize - 1)..n as isize).collect();
    let rows: Vec<Vec<(usize, C64)>> = offsets
        .par_iter()
        .map(|&dy| {
            offsets
                .iter()
                .map(|&dx| {
                    let at = dx.rem_euclid(m as isize) as usize + m * dy.rem_euclid(m as isize) as usize;
                    (at, cell_kernel(dx as f64 * h, dy as f64 * h, h))
                })
                .collect()
        })
        .collect();
    for (at, k) in rows.into_iter().flatten() {
        kernel[at] = k;
    }
    let mut data = vec![Complex::new(0.0, 0.0); m * m];
    for iy in 0..n {
        for ix in 0..n {
            data[ix + m * iy] = f.values[ix + n * iy];
        }
    }
    fft_2d(&mut kernel, m, false);
    fft_2d(&mut data, m, false);
    for (d, k) in data.iter_mut().zip(&kernel) {
        *d *= k;
    }
    fft_2d(&mut data, m, true);
    let scale = 1.0 / (m * m) as f64;
    let mut values = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            values.push(data[ix + m * iy] * scale);
        }
    }
    Ok(GridField { comps: 1, values })
}

/// `max |∂u/∂z̄ − f|` over nodes whose difference stencil stays on the grid.
pub fn dbar_residual(u: &GridField, f: &GridField, grid: &GridDiscretization) -> f64 {
    let n = grid.per_axis();
    let r = STENCIL_REACH;
    (0..grid.len())
        .filter(|&i| {
            let (ix, iy) = (i % n, i / n);
            ix >= r && iy >= r && ix < n - r && iy < n - r
        })
        .map(|i| (grid.dzbar(&u.values, 1, 0, i, 0) - f.values[i]).norm())
        .fold(0.0, f64::max)
}

/// Quadrature weights of `D` on the grid: `h²` times the covered fraction of
/// each cell, estimated by 8×8 subsampling on cells that straddle `∂D`.
pub fn domain_weights(grid: &GridDiscretization, domain: &DomainBox<f64>) -> Vec<f64> {
    const SUB: usize = 8;
    let h = grid.h();
    grid.sample(|_, z| {
        let c = z.coords()[0];
        let probe = |dx: f64, dy: f64| domain.contains(&ComplexPoint::from_real(&[c.re + dx, c.im + dy]));
        let inside = probe(0.0, 0.0);
        let corners = [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)];
        if corners.iter().all(|&(a, b)| probe(a * h, b * h) == inside) {
            return if inside { h * h } else { 0.0 };
        }
        let mut hits = 0;
        for a in 0..SUB {
            for b in 0..SUB {
                let dx = ((a as f64 + 0.5) / SUB as f64 - 0.5) * h;
                let dy = ((b as f64 + 0.5) / SUB as f64 - 0.5) * h;
                if probe(dx, dy) {
                    hits += 1;
                }
            }
        }
        h * h * hits as f64 / (SUB * SUB) as f64
    })
}

/// Nodal `w_D · e^{−(η − shift)}` and the shift, the minimum of `η` over `D`.
fn weighted_measure(grid: &GridDiscretization, domain: &DomainBox<f64>, eta: &dyn ScalarField) -> Result<(Vec<f64>, f64)> {
    let dw = domain_weights(grid, domain);
    let etas: Vec<Option<f64>> = grid.sample(|i, z| (dw[i] > 0.0).then(|| eta.eval(z)));
    let mut shift = f64::INFINITY;
    for (i, e) in etas.iter().enumerate() {
        if let Some(e) = e {
            if e.is_nan() || *e == f64::NEG_INFINITY {
                return Err(Error::WeightOverflow {
                    at: grid.node(i).to_string(),
                });
            }
            shift = shift.min(*e);
        }
    }
    if !shift.is_finite() {
        return Err(Error::invalid("domain contains no grid nodes"));
    }
    let w = dw
        .iter()
        .zip(&etas)
        .map(|(d, e)| e.map_or(0.0, |e| d * (shift - e).exp()))
        .collect();
    Ok((w, shift))
}

#[derive(Clone, Debug, Serialize)]
pub struct Projection {
    pub degree: usize,
    /// Coefficients of `h = Σ c_k (z − z_D)^k` as `[re, im]`.
    pub coefficients: Vec<[f64; 2]>,
    /// `∫_D |u|² e^{−η}` and `∫_D |u − h|² e^{−η}`, both times `e^{shift}`.
    pub norm_before: f64,
    pub norm_after: f64,
    /// `max_k |⟨u − h, z^k⟩| / (‖u − h‖ ‖z^k‖)`.
    pub orthogonality: f64,
    pub shift: f64,
}

struct ProjectionData {
    proj: Projection,
    residual: Vec<C64>,
}

fn powers(z: C64, degree: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut p = C64::new(1.0, 0.0);
    for _ in 0..=degree {
        out.push(p);
        p *= z;
    }
    out
}

fn weighted_sum(values: impl Iterator<Item = C64>) -> C64 {
    let mut s = ComplexSum::default();
    for v in values {
        s.add(v);
    }
    s.value()
}

fn project(
    u: &[C64],
    w: &[f64],
    shift: f64,
    grid: &GridDiscretization,
    center: C64,
    degree: usize,
) -> Result<ProjectionData> {
    let nodes: Vec<usize> = (0..grid.len()).filter(|&i| w[i] > 0.0).collect();
    let basis: Vec<Vec<C64>> = nodes
        .par_iter()
        .map(|&i| powers(grid.node(i).coords()[0] - center, degree))
        .collect();
    let k = degree + 1;
    // Normal equations Σ_k c_k ⟨z^k, z^l⟩ = ⟨u, z^l⟩, Jacobi-scaled.
    let gram_rows: Vec<Vec<C64>> = (0..k)
        .into_par_iter()
        .map(|l| {
            (0..k)
                .map(|kk| weighted_sum(basis.iter().zip(&nodes).map(|(b, &i)| b[kk] * b[l].conj() * w[i])))
                .collect()
        })
        .collect();
    let rhs: Vec<C64> = (0..k)
        .map(|l| weighted_sum(basis.iter().zip(&nodes).map(|(b, &i)| u[i] * b[l].conj() * w[i])))
        .collect();
    let d: Vec<f64> = (0..k).map(|l| gram_rows[l][l].re.sqrt()).collect();
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::SingularGram);
    }
    let gram = CMatrix::from_fn(k, k, |l, kk| gram_rows[l][kk] / (d[l] * d[kk]));
    let b = CVector::from_iterator(k, rhs.iter().zip(&d).map(|(r, s)| r / *s));
    let y = solve_gram(&gram, &b)?;
    let coeffs: Vec<C64> = y.iter().zip(&d).map(|(v, s)| v / *s).collect();

    let mut residual = u.to_vec();
    for (b, &i) in basis.iter().zip(&nodes) {
        residual[i] -= b.iter().zip(&coeffs).map(|(m, c)| m * c).sum::<C64>();
    }
    let norm_before = compensated_sum(nodes.iter().map(|&i| u[i].norm_sqr() * w[i]));
    let norm_after = compensated_sum(nodes.iter().map(|&i| residual[i].norm_sqr() * w[i]));
    let orthogonality = (0..k)
        .map(|l| {
            let ip = weighted_sum(basis.iter().zip(&nodes).map(|(b, &i)| residual[i] * b[l].conj() * w[i]));
            ip.norm() / (norm_after.sqrt() * d[l]).max(1e-300)
        })
        .fold(0.0, f64::max);
    Ok(ProjectionData {
        proj: Projection {
            degree,
            coefficients: coeffs.iter().map(|c| [c.re, c.im]).collect(),
            norm_before,
            norm_after,
            orthogonality,
            shift,
        },
        residual,
    })
}

/// Orthogonal projection of the nodal `u` onto polynomials of degree `≤ degree`
/// in `L²(D, e^{−η})`.
pub fn weighted_bergman_projection(
    u: &GridField,
    eta: &dyn ScalarField,
    degree: usize,
    grid: &GridDiscretization,
    domain: &DomainBox<f64>,
) -> Result<Projection> {
    require_plane(grid)?;
    let (w, shift) = weighted_measure(grid, domain, eta)?;
    Ok(project(&u.values, &w, shift, grid, domain.center.coords()[0], degree)?.proj)
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub per_axis: usize,
    pub degree: usize,
    /// `max |∂̄u − f|` over interior nodes, and the same divided by `max|f|`.
    pub residual: f64,
    pub relative_residual: f64,
    /// `∫_D |u_min|² e^{−φ−ψ}`, times `e^{shift}`.
    pub minimal_norm_sq: f64,
    /// `∫_D |f|²/ψ_{zz̄} e^{−φ−ψ}`, times `e^{shift}`.
    pub comparison: f64,
    pub ratio: f64,
    pub shift: f64,
    pub projection: Projection,
    #[serde(skip)]
    pub u_particular: Option<GridField>,
    #[serde(skip)]
    pub u_minimal: Option<GridField>,
}

pub fn hormander_ratio(
    phi: &dyn ScalarField,
    psi: &dyn ScalarField,
    f: &dyn FormField01,
    degree: usize,
    per_axis: usize,
    domain: &DomainBox<f64>,
) -> Result<SolveResult> {
    if f.dim() != 1 || phi.dim() != 1 || psi.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: f.dim().max(phi.dim()).max(psi.dim()),
        });
    }
    let grid = GridDiscretization::around(domain, per_axis)?;
    grid.check_support(&f.support())?;
    let fv = GridField::sample_form(f, &grid)?;
    let up = cauchy_transform(&fv, &grid)?;
    let residual = dbar_residual(&up, &fv, &grid);
    let fmax = fv.max_abs();

    let eta = SumField(phi, psi);
    let (w, shift) = weighted_measure(&grid, domain, &eta)?;
    let density: Vec<Result<f64>> = grid.sample(|i, z| {
        let fi = fv.values[i];
        if fi == ZERO || w[i] == 0.0 {
            return Ok(0.0);
        }
        let lap = fields::levi_form(psi, z, fields::DEFAULT_FD_STEP)?[(0, 0)].re;
        if !(lap >= 1e-8) {
            return Err(Error::MetricNotPositive { min_eigenvalue: lap });
        }
        Ok(fi.norm_sqr() / lap * w[i])
    });
    let density: Vec<f64> = density.into_iter().collect::<Result<_>>()?;
    let comparison = compensated_sum(density.iter().copied());

    let data = project(&up.values, &w, shift, &grid, domain.center.coords()[0], degree)?;
    let minimal = data.proj.norm_after;
    Ok(SolveResult {
        per_axis,
        degree,
        residual,
        relative_residual: if fmax > 0.0 { residual / fmax } else { 0.0 },
        minimal_norm_sq: minimal,
        comparison,
        ratio: if comparison > 0.0 { minimal / comparison } else { f64::NAN },
        shift,
        projection: data.proj,
        u_particular: Some(up),
        u_minimal: Some(GridField {
            comps: 1,
            values: data.residual,
        }),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessRatioStep {
    pub s: f64,
    pub ratio: f64,
}

/// Ratios for `ψ_s` and `f = ∂̄ν` built at `(z0, ξ = 1, r)`, along the schedule
/// until one exceeds 1.
pub fn witness_ratio_search(
    phi: &dyn ScalarField,
    z0: &ComplexPoint,
    r: f64,
    s_schedule: &[f64],
    degree: usize,
    per_axis: usize,
    domain: &DomainBox<f64>,
) -> Result<Vec<WitnessRatioStep>> {
    let (_, f) = build_witness_form(z0, &[C64::new(1.0, 0.0)], r, make_cutoff(CutoffKind::Thm21))?;
    let mut steps = Vec::new();
    for &s in s_schedule {
        let psi = build_psi_s(z0, r, s)?;
        let res = hormander_ratio(phi, &psi, &f, degree, per_axis, domain)?;
        steps.push(WitnessRatioStep { s, ratio: res.ratio });
        if res.ratio > 1.0 {
            break;
        }
    }
    Ok(steps)
}
