//! Tensor grids over boxes in C^n ≅ R^{2n} with trapezoid weights and
//! fourth-order central differences.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{ComplexPoint, ScalarField};
use crate::geometry::{DomainBox, DomainKind, Point};
use crate::linalg::C64;
use crate::scalar::{CompensatedSum, ComplexSum};

/// Reach of the difference stencil in grid steps.
pub const STENCIL_REACH: usize = 2;
/// Required distance, in grid steps, between a support and the grid boundary.
pub const SUPPORT_MARGIN_STEPS: usize = 2 * STENCIL_REACH;

const CHUNK: usize = 8192;

#[derive(Clone, Debug, Serialize)]
pub struct GridDiscretization {
    center: ComplexPoint,
    half_width: f64,
    per_axis: usize,
    h: f64,
}

impl GridDiscretization {
    /// Cube `center + [−half_width, half_width]^{2n}` with `per_axis` nodes per
    /// real axis, endpoints included.
    pub fn new(center: ComplexPoint, half_width: f64, per_axis: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::invalid(format!("grid half width must be positive, got {half_width}")));
        }
        if per_axis < 2 * SUPPORT_MARGIN_STEPS + 2 {
            return Err(Error::invalid(format!(
                "grid needs at least {} nodes per axis, got {per_axis}",
                2 * SUPPORT_MARGIN_STEPS + 2
            )));
        }
        let h = 2.0 * half_width / (per_axis - 1) as f64;
        Ok(Self {
            center,
            half_width,
            per_axis,
            h,
        })
    }

    /// Smallest grid around `support` that keeps the required margin.
    pub fn around(support: &DomainBox<f64>, per_axis: usize) -> Result<Self> {
        let reach = support.half_widths().into_iter().fold(0.0, f64::max);
        let steps = (per_axis as f64 - 1.0) / 2.0;
        let free = steps - SUPPORT_MARGIN_STEPS as f64;
        if free <= 0.0 {
            return Err(Error::invalid("grid too coarse for the support margin"));
        }
        // hw = reach + margin·h with h = hw / steps
        let half_width = reach * steps / free * (1.0 + 1e-12);
        Self::new(support.center.clone(), half_width, per_axis)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(2 * self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounding_box(&self) -> DomainBox<f64> {
        DomainBox::new(DomainKind::Box, self.center.clone(), vec![self.half_width; self.dim()])
            .expect("positive half width")
    }

    fn stride(&self, axis: usize) -> usize {
        self.per_axis.pow(axis as u32)
    }

    fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.per_axis
    }

    pub fn node(&self, idx: usize) -> ComplexPoint {
        let c = self.center.to_real();
        let xs: Vec<f64> = (0..2 * self.dim())
            .map(|a| c[a] - self.half_width + self.h * self.axis_index(idx, a) as f64)
            .collect();
        Point::from_real(&xs)
    }

    /// Trapezoid weight of a node.
    pub fn weight(&self, idx: usize) -> f64 {
        let mut w = 1.0;
        for a in 0..2 * self.dim() {
            let k = self.axis_index(idx, a);
            w *= if k == 0 || k == self.per_axis - 1 { 0.5 * self.h } else { self.h };
        }
        w
    }

    /// Errors unless `support` sits inside the grid with the stencil margin.
    pub fn check_support(&self, support: &DomainBox<f64>) -> Result<()> {
        let room = self.bounding_box().inner_radius_at(&support.center);
        let reach = support.half_widths().into_iter().fold(0.0, f64::max);
        let need = reach + SUPPORT_MARGIN_STEPS as f64 * self.h;
        if room + 1e-12 * self.half_width < need {
            return Err(Error::SupportOutsideGrid(format!(
                "support reaches {reach} from its center, the grid leaves {room} (needs {need})"
            )));
        }
        Ok(())
    }

    /// Neighbor `idx ± k` steps along `axis`, if it exists.
    pub fn neighbor(&self, idx: usize, axis: usize, k: isize) -> Option<usize> {
        let i = self.axis_index(idx, axis) as isize + k;
        if i < 0 || i >= self.per_axis as isize {
            return None;
        }
        Some((idx as isize + k * self.stride(axis) as isize) as usize)
    }

    /// Fourth-order central difference of a nodal array along `axis`; zero where
    /// the stencil leaves the grid.
    pub fn diff(&self, values: &[C64], comps: usize, comp: usize, idx: usize, axis: usize) -> C64 {
        let at = |k: isize| self.neighbor(idx, axis, k).map(|j| values[j * comps + comp]);
        match (at(-2), at(-1), at(1), at(2)) {
            (Some(m2), Some(m1), Some(p1), Some(p2)) => (m2 - p2 + (p1 - m1) * 8.0) / (12.0 * self.h),
            _ => C64::new(0.0, 0.0),
        }
    }

    /// `∂/∂z̄_k` of component `comp`.
    pub fn dzbar(&self, values: &[C64], comps: usize, comp: usize, idx: usize, k: usize) -> C64 {
        let dx = self.diff(values, comps, comp, idx, 2 * k);
        let dy = self.diff(values, comps, comp, idx, 2 * k + 1);
        (dx + C64::new(0.0, 1.0) * dy) * 0.5
    }

    /// `∂/∂z_k` of component `comp`.
    pub fn dz(&self, values: &[C64], comps: usize, comp: usize, idx: usize, k: usize) -> C64 {
        let dx = self.diff(values, comps, comp, idx, 2 * k);
        let dy = self.diff(values, comps, comp, idx, 2 * k + 1);
        (dx - C64::new(0.0, 1.0) * dy) * 0.5
    }

    /// Evaluates `f` at every node, in node order.
    pub fn sample<T: Send>(&self, f: impl Fn(usize, &ComplexPoint) -> T + Sync) -> Vec<T> {
        (0..self.len()).into_par_iter().map(|i| f(i, &self.node(i))).collect()
    }
}

/// An integral `e^{log_scale} · mantissa`, kept in two parts so that weights
/// `e^{−w}` with large `|w|` do not overflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaledIntegral {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl ScaledIntegral {
    pub fn value(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.log_scale.exp()
        }
    }

    pub fn zero() -> Self {
        Self {
            mantissa: 0.0,
            log_scale: 0.0,
        }
    }

    /// Re-expresses on another scale.
    pub fn rescaled(&self, log_scale: f64) -> f64 {
        self.mantissa * (self.log_scale - log_scale).exp()
    }
}

/// Weight values at the nodes where `active` holds; inactive nodes get `None`.
pub(crate) fn weights_at(
    grid: &GridDiscretization,
    weight: &dyn ScalarField,
    active: &[bool],
) -> Result<Vec<Option<f64>>> {
    let ws: Vec<Option<f64>> = grid.sample(|i, z| active[i].then(|| weight.eval(z)));
    for (i, w) in ws.iter().enumerate() {
        if let Some(w) = w {
            if w.is_nan() || *w == f64::NEG_INFINITY {
                return Err(Error::WeightOverflow {
                    at: grid.node(i).to_string(),
                });
            }
        }
    }
    Ok(ws)
}

pub(crate) fn min_weight(ws: &[Option<f64>]) -> f64 {
    ws.iter().flatten().copied().fold(f64::INFINITY, f64::min)
}

/// `Σ_nodes w_trap · g · e^{−(weight − shift)}` with fixed-order chunked
/// compensated sums.
pub(crate) fn integrate_real(grid: &GridDiscretization, g: &[f64], ws: &[Option<f64>], shift: f64) -> f64 {
    let idx: Vec<usize> = (0..grid.len()).collect();
    let partial: Vec<CompensatedSum<f64>> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = CompensatedSum::new();
            for &i in chunk {
                if let Some(w) = ws[i] {
                    if g[i] != 0.0 {
                        acc.add(grid.weight(i) * g[i] * (shift - w).exp());
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = CompensatedSum::new();
    for p in &partial {
        total.merge(p);
    }
    total.value()
}

pub(crate) fn integrate_complex(grid: &GridDiscretization, g: &[C64], ws: &[Option<f64>], shift: f64) -> C64 {
    let idx: Vec<usize> = (0..grid.len()).collect();
    let partial: Vec<ComplexSum<f64>> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = ComplexSum::default();
            for &i in chunk {
                if let Some(w) = ws[i] {
                    if g[i] != C64::new(0.0, 0.0) {
                        acc.add(g[i] * (grid.weight(i) * (shift - w).exp()));
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = ComplexSum::default();
    for p in &partial {
        total.merge(p);
    }
    total.value()
}

/// `∫ g e^{−weight}` for a nodal integrand, as a scaled integral.
pub fn integrate_weighted(grid: &GridDiscretization, g: &[f64], weight: &dyn ScalarField) -> Result<ScaledIntegral> {
    let active: Vec<bool> = g.iter().map(|v| *v != 0.0).collect();
    let ws = weights_at(grid, weight, &active)?;
    let shift = min_weight(&ws);
    if !shift.is_finite() {
        return Ok(ScaledIntegral::zero());
    }
    Ok(ScaledIntegral {
        mantissa: integrate_real(grid, g, &ws, shift),
        log_scale: -shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FnField, Smoothness};

    #[test]
    fn trapezoid_weights_cover_the_box() {
        let g = GridDiscretization::new(Point::origin(1), 1.5, 21).unwrap();
        let total: f64 = (0..g.len()).map(|i| g.weight(i)).sum();
        assert!((total - 9.0).abs() < 1e-12);
    }

    #[test]
    fn differences_are_fourth_order() {
        let err = |n: usize| {
            let g = GridDiscretization::new(Point::origin(1), 1.0, n).unwrap();
            let vals: Vec<C64> = g.sample(|_, z| C64::new(z.coords()[0].re.sin() * z.coords()[0].im.exp(), 0.0));
            let mut worst = 0.0_f64;
            for i in 0..g.len() {
                let z = g.node(i);
                let (x, y) = (z.coords()[0].re, z.coords()[0].im);
                if x.abs() > 0.5 || y.abs() > 0.5 {
                    continue;
                }
                // ∂/∂z̄ (sin x · e^y) = (cos x e^y + i sin x e^y)/2
                let want = C64::new(x.cos() * y.exp(), x.sin() * y.exp()) * 0.5;
                worst = worst.max((g.dzbar(&vals, 1, 0, i, 0) - want).norm());
            }
            worst
        };
        let ratio = err(41) / err(81);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn support_margin_is_enforced() {
        let support = DomainBox::ball(Point::origin(1), 1.0).unwrap();
        let g = GridDiscretization::around(&support, 32).unwrap();
        g.check_support(&support).unwrap();
        let tight = GridDiscretization::new(Point::origin(1), 1.05, 32).unwrap();
        assert!(matches!(tight.check_support(&support), Err(Error::SupportOutsideGrid(_))));
    }

    #[test]
    fn scaled_integrals_survive_huge_weights() {
        let g = GridDiscretization::new(Point::origin(1), 1.0, 11).unwrap();
        let ones = vec![1.0; g.len()];
        let w = FnField::new(1, Smoothness::C2, |_| -2000.0);
        let s = integrate_weighted(&g, &ones, &w).unwrap();
        assert!((s.mantissa - 4.0).abs() < 1e-12 && s.log_scale == 2000.0);
        assert!(s.value().is_infinite());
    }
}
