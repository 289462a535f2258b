//! Cutoff profiles `χ : R → [0, 1]`.

use serde::Serialize;

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    /// Flat top and support thresholds only.
    Thm21,
    /// Additionally `sup |χ′| ≤ 2`.
    Thm23,
}

/// Smoothstep cutoff: `χ = 1` for `t ≤ t₀`, `χ = 0` for `t ≥ t₁`, and
/// `χ = 1 − S((t − t₀)/(t₁ − t₀))` in between. `Thm23` uses the cubic
/// `S(u) = 3u² − 2u³` (C¹, slope bound exactly 2); `Thm21` uses the septic
/// `S(u) = 35u⁴ − 84u⁵ + 70u⁶ − 20u⁷` (C³), so that forms built from it can be
/// differentiated twice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffProfile<T> {
    pub kind: CutoffKind,
    pub t0: T,
    pub t1: T,
    /// `sup |χ′|`, attained at the midpoint of `[t₀, t₁]`.
    pub slope_bound: T,
}

pub fn make_cutoff<T: Real>(kind: CutoffKind) -> CutoffProfile<T> {
    let t0 = T::lit(0.25);
    let t1 = T::one();
    let peak = match kind {
        CutoffKind::Thm23 => T::lit(1.5),
        CutoffKind::Thm21 => T::lit(140.0 / 64.0),
    };
    CutoffProfile {
        kind,
        t0,
        t1,
        slope_bound: peak / (t1 - t0),
    }
}

impl<T: Real> CutoffProfile<T> {
    fn unit(&self, t: T) -> Option<T> {
        if t <= self.t0 || t >= self.t1 {
            None
        } else {
            Some((t - self.t0) / (self.t1 - self.t0))
        }
    }

    pub fn value(&self, t: T) -> T {
        match self.unit(t) {
            None if t <= self.t0 => T::one(),
            None => T::zero(),
            Some(u) => T::one() - self.step(u),
        }
    }

    pub fn derivative(&self, t: T) -> T {
        match self.unit(t) {
            None => T::zero(),
            Some(u) => -self.step_slope(u) / (self.t1 - self.t0),
        }
    }

    fn step(&self, u: T) -> T {
        match self.kind {
            CutoffKind::Thm23 => u * u * (T::lit(3.0) - T::lit(2.0) * u),
            CutoffKind::Thm21 => {
                let u4 = u.powi(4);
                u4 * (T::lit(35.0) + u * (T::lit(-84.0) + u * (T::lit(70.0) - T::lit(20.0) * u)))
            }
        }
    }

    fn step_slope(&self, u: T) -> T {
        let v = u * (T::one() - u);
        match self.kind {
            CutoffKind::Thm23 => T::lit(6.0) * v,
            CutoffKind::Thm21 => T::lit(140.0) * v * v * v,
        }
    }
}
