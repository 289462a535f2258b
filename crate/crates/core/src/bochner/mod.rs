//! Weighted pairings of (0,1)-forms, `∂̄`, `∂̄*_φ`, and a numerical check of the
//! Bochner–Kodaira–Hörmander identity
//!
//! ```text
//! ∫ Σ φ_{jk̄} α_j ᾱ_k e^{−φ} + ∫ Σ |∂α_j/∂z̄_k|² e^{−φ} = ∫ |∂̄α|² e^{−φ} + ∫ |∂̄*_φ α|² e^{−φ}
//! ```
//!
//! for compactly supported `α`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{self, ComplexPoint, HermitianField, ScalarField, Smoothness, DEFAULT_FD_STEP};
use crate::forms::FormField01;
use crate::grid::{integrate_complex, integrate_real, min_weight, weights_at, GridDiscretization, ScaledIntegral};
use crate::linalg::{quadratic_form, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Complex nodal values with `comps` components per node, node-major.
#[derive(Clone, Debug)]
pub struct GridField {
    pub comps: usize,
    pub values: Vec<C64>,
}

impl GridField {
    pub fn sample_form(form: &dyn FormField01, grid: &GridDiscretization) -> Result<Self> {
        if form.dim() != grid.dim() {
            return Err(Error::Dimension {
                expected: grid.dim(),
                got: form.dim(),
            });
        }
        grid.check_support(&form.support())?;
        let n = form.dim();
        let rows = grid.sample(|_, z| form.coeffs(z));
        let mut values = Vec::with_capacity(rows.len() * n);
        for r in rows {
            values.extend(r);
        }
        Ok(Self { comps: n, values })
    }

    pub fn sample_scalar(f: &(dyn Fn(&ComplexPoint) -> C64 + Sync), grid: &GridDiscretization) -> Self {
        Self {
            comps: 1,
            values: grid.sample(|_, z| f(z)),
        }
    }

    pub fn at(&self, node: usize) -> &[C64] {
        &self.values[node * self.comps..(node + 1) * self.comps]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn nodes(&self) -> usize {
        self.values.len() / self.comps.max(1)
    }
}

/// A (0,1)-form sampled on a grid, with difference derivatives.
pub(crate) struct SampledForm<'g> {
    pub grid: &'g GridDiscretization,
    pub field: GridField,
}

impl<'g> SampledForm<'g> {
    pub fn new(form: &dyn FormField01, grid: &'g GridDiscretization) -> Result<Self> {
        Ok(Self {
            grid,
            field: GridField::sample_form(form, grid)?,
        })
    }

    pub fn n(&self) -> usize {
        self.field.comps
    }

    /// `∂α_j/∂z̄_k`.
    pub fn dzbar(&self, i: usize, j: usize, k: usize) -> C64 {
        self.grid.dzbar(&self.field.values, self.n(), j, i, k)
    }

    /// `∂α_j/∂z_k`.
    pub fn dz(&self, i: usize, j: usize, k: usize) -> C64 {
        self.grid.dz(&self.field.values, self.n(), j, i, k)
    }

    pub fn coeffs(&self, i: usize) -> &[C64] {
        self.field.at(i)
    }

    pub fn is_zero_at(&self, i: usize) -> bool {
        self.coeffs(i).iter().all(|c| *c == ZERO)
    }
}

/// Nodal `Σ (φ_{jk̄} − g_{jk̄}) α_j ᾱ_k`, zero where `α` vanishes.
pub(crate) fn levi_density(
    form: &SampledForm,
    phi: &dyn ScalarField,
    omega: Option<&dyn HermitianField>,
) -> Result<Vec<f64>> {
    let grid = form.grid;
    let rows: Vec<Result<f64>> = grid.sample(|i, z| {
        if form.is_zero_at(i) {
            return Ok(0.0);
        }
        let mut l = fields::levi_form(phi, z, DEFAULT_FD_STEP)?;
        if let Some(w) = omega {
            l -= w.checked_coeffs(z)?;
        }
        Ok(quadratic_form(&l, form.coeffs(i)))
    });
    rows.into_iter().collect()
}

/// Nodal `Σ_{j,k} |∂α_j/∂z̄_k|²`.
pub(crate) fn dzbar_density(form: &SampledForm) -> Vec<f64> {
    let n = form.n();
    form.grid.sample(|i, _| {
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                acc += form.dzbar(i, j, k).norm_sqr();
            }
        }
        acc
    })
}

/// Index pairs `(j, k)`, `j < k`, labelling the coefficients of a (0,2)-form.
pub fn form02_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect()
}

/// `∂̄α` as a (0,2)-form: for each pair `j < k` the coefficient
/// `∂α_k/∂z̄_j − ∂α_j/∂z̄_k`. Empty when `n = 1`.
#[derive(Clone, Debug)]
pub struct Form02 {
    pub pairs: Vec<(usize, usize)>,
    pub field: GridField,
}

fn require_differentiable(form: &dyn FormField01, operation: &'static str) -> Result<()> {
    if form.smoothness() == Smoothness::Usc {
        return Err(Error::Regularity {
            operation,
            required: "C1",
            found: form.smoothness().label(),
        });
    }
    Ok(())
}

pub fn dbar_01(alpha: &dyn FormField01, grid: &GridDiscretization) -> Result<Form02> {
    require_differentiable(alpha, "dbar_01")?;
    let sampled = SampledForm::new(alpha, grid)?;
    Ok(dbar_of_sampled(&sampled))
}

fn dbar_of_sampled(form: &SampledForm) -> Form02 {
    let pairs = form02_pairs(form.n());
    let comps = pairs.len();
    let rows = form.grid.sample(|i, _| {
        pairs
            .iter()
            .map(|&(j, k)| form.dzbar(i, k, j) - form.dzbar(i, j, k))
            .collect::<Vec<_>>()
    });
    Form02 {
        pairs,
        field: GridField {
            comps,
            values: rows.into_iter().flatten().collect(),
        },
    }
}

/// `−Σ_j (∂α_j/∂z_j − α_j ∂φ/∂z_j)` at every node.
pub fn dbar_star(alpha: &dyn FormField01, phi: &dyn ScalarField, grid: &GridDiscretization) -> Result<GridField> {
    require_differentiable(alpha, "dbar_star")?;
    let sampled = SampledForm::new(alpha, grid)?;
    adjoint_of_sampled(&sampled, phi)
}

fn adjoint_of_sampled(form: &SampledForm, phi: &dyn ScalarField) -> Result<GridField> {
    let n = form.n();
    let rows: Vec<Result<C64>> = form.grid.sample(|i, z| {
        let mut acc = ZERO;
        for j in 0..n {
            acc += form.dz(i, j, j);
        }
        if !form.is_zero_at(i) {
            if phi.is_pole(z) {
                return Err(Error::PoleInRegion { at: z.to_string() });
            }
            let g = fields::gradient(phi, z, DEFAULT_FD_STEP)?;
            for (a, gj) in form.coeffs(i).iter().zip(&g) {
                acc -= a * gj;
            }
        }
        Ok(-acc)
    });
    Ok(GridField {
        comps: 1,
        values: rows.into_iter().collect::<Result<_>>()?,
    })
}

fn unscale(s: ScaledIntegral, at: &GridDiscretization) -> Result<f64> {
    let v = s.value();
    if !v.is_finite() {
        return Err(Error::WeightOverflow {
            at: format!("grid around {}", at.bounding_box().center),
        });
    }
    Ok(v)
}

/// `∫ Σ_c a_c b̄_c e^{−weight}` by the trapezoid rule.
pub fn weighted_pairing(
    a: &GridField,
    b: &GridField,
    weight: &dyn ScalarField,
    grid: &GridDiscretization,
) -> Result<C64> {
    if a.comps != b.comps || a.nodes() != grid.len() || b.nodes() != grid.len() {
        return Err(Error::Dimension {
            expected: a.comps,
            got: b.comps,
        });
    }
    let integrand: Vec<C64> = (0..grid.len())
        .map(|i| a.at(i).iter().zip(b.at(i)).map(|(x, y)| x * y.conj()).sum())
        .collect();
    let active: Vec<bool> = integrand.iter().map(|v| *v != ZERO).collect();
    let ws = weights_at(grid, weight, &active)?;
    let shift = min_weight(&ws);
    if !shift.is_finite() {
        return Ok(ZERO);
    }
    let v = integrate_complex(grid, &integrand, &ws, shift) * (-shift).exp();
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::WeightOverflow {
            at: format!("grid around {}", grid.bounding_box().center),
        });
    }
    Ok(v)
}

/// The four integrals of the identity, each on its own code path.
#[derive(Clone, Debug, Serialize)]
pub struct BochnerReport {
    /// `∫ Σ φ_{jk̄} α_j ᾱ_k e^{−φ}`
    pub levi: f64,
    /// `∫ Σ |∂α_j/∂z̄_k|² e^{−φ}`
    pub dzbar: f64,
    /// `∫ |∂̄α|² e^{−φ}`
    pub dbar: f64,
    /// `∫ |∂̄*_φ α|² e^{−φ}`
    pub adjoint: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Smallest nodal value of `Σ φ_{jk̄} α_j ᾱ_k`.
    pub min_levi_density: f64,
    pub nodes: usize,
    pub h: f64,
}

pub fn bochner_residual(
    alpha: &dyn FormField01,
    phi: &dyn ScalarField,
    grid: &GridDiscretization,
) -> Result<BochnerReport> {
    if alpha.smoothness() < Smoothness::C2 {
        return Err(Error::Regularity {
            operation: "bochner_residual",
            required: "C2",
            found: alpha.smoothness().label(),
        });
    }
    let form = SampledForm::new(alpha, grid)?;
    let n = form.n();

    let levi = levi_density(&form, phi, None)?;
    let dzbar = dzbar_density(&form);
    let dbar_form = dbar_of_sampled(&form);
    let dbar: Vec<f64> = (0..grid.len())
        .map(|i| dbar_form.field.at(i).iter().map(|c| c.norm_sqr()).sum())
        .collect();
    let adjoint: Vec<f64> = adjoint_of_sampled(&form, phi)?.values.iter().map(|c| c.norm_sqr()).collect();

    let active: Vec<bool> = (0..grid.len())
        .map(|i| levi[i] != 0.0 || dzbar[i] != 0.0 || dbar[i] != 0.0 || adjoint[i] != 0.0)
        .collect();
    let ws = weights_at(grid, phi, &active)?;
    let shift = min_weight(&ws);
    let integral = |g: &[f64]| -> Result<f64> {
        if !shift.is_finite() {
            return Ok(0.0);
        }
        unscale(
            ScaledIntegral {
                mantissa: integrate_real(grid, g, &ws, shift),
                log_scale: -shift,
            },
            grid,
        )
    };
    let i_levi = integral(&levi)?;
    let i_dzbar = integral(&dzbar)?;
    let i_dbar = if n > 1 { integral(&dbar)? } else { 0.0 };
    let i_adjoint = integral(&adjoint)?;

    let lhs = i_levi + i_dzbar;
    let rhs = i_dbar + i_adjoint;
    let residual = if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / lhs.max(rhs).max(1e-300)
    };
    let min_levi_density = (0..grid.len())
        .filter(|&i| !form.is_zero_at(i))
        .map(|i| levi[i])
        .fold(f64::INFINITY, f64::min);
    Ok(BochnerReport {
        levi: i_levi,
        dzbar: i_dzbar,
        dbar: i_dbar,
        adjoint: i_adjoint,
        lhs,
        rhs,
        residual,
        min_levi_density: if min_levi_density.is_finite() { min_levi_density } else { 0.0 },
        nodes: grid.len(),
        h: grid.h(),
    })
}

#[cfg(test)]
mod tests;
