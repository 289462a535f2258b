//! Points, domains and holomorphic cylinders in C^n.
//!
//! A holomorphic cylinder is `z0 + A(P_{r,s})` where `A` is unitary and
//! `P_{r,s} = {|ζ₁| < r, |ζ₂|² + … + |ζₙ|² < s²}`. Frames are stored by columns:
//! the first column is the direction of the `r`-disc.

mod quadrature;
mod unitary;

pub use quadrature::{
    disc_rule, gauss_legendre, sample_cylinder, QuadratureNode, QuadratureRule, RuleKind,
    DEFAULT_BUDGET_C1, DEFAULT_BUDGET_C2, MIN_NODE_BUDGET,
};
pub use unitary::{frame_with_first_column, random_unitary};

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point of C^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T>(pub Vec<Complex<T>>);

impl<T: Real> Point<T> {
    pub fn new(coords: Vec<Complex<T>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(Self(coords))
    }

    pub fn origin(n: usize) -> Self {
        Self(vec![Complex::new(T::zero(), T::zero()); n])
    }

    /// Builds a point from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(re, im)| Complex::new(T::lit(re), T::lit(im)))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex<T>] {
        &self.0
    }

    pub fn norm_sqr(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn dist(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |acc, (a, b)| acc + (*a - *b).norm_sqr())
            .sqrt()
    }

    pub fn offset(&self, delta: &[Complex<T>]) -> Self {
        Self(self.0.iter().zip(delta).map(|(a, b)| *a + *b).collect())
    }

    /// Real coordinates `(x₁, y₁, …, xₙ, yₙ)`.
    pub fn to_real(&self) -> Vec<T> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn from_real(xs: &[T]) -> Self {
        Self(xs.chunks(2).map(|c| Complex::new(c[0], c[1])).collect())
    }

    /// Moves the `axis`-th real coordinate by `h`.
    pub fn shifted(&self, axis: usize, h: T) -> Self {
        let mut out = self.clone();
        let c = &mut out.0[axis / 2];
        if axis % 2 == 0 {
            c.re += h;
        } else {
            c.im += h;
        }
        out
    }

    pub fn cast<U: Real>(&self) -> Point<U> {
        Point(
            self.0
                .iter()
                .map(|c| Complex::new(U::lit(c.re.to_f64().unwrap()), U::lit(c.im.to_f64().unwrap())))
                .collect(),
        )
    }
}

impl<T: Real> fmt::Display for Point<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

impl<T: Real> Serialize for Point<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self
            .0
            .iter()
            .map(|c| [c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN)])
            .collect();
        pairs.serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for Point<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        let coords = pairs
            .into_iter()
            .map(|[re, im]| Complex::new(T::lit(re), T::lit(im)))
            .collect();
        Point::new(coords).map_err(serde::de::Error::custom)
    }
}

/// Parses a point serialized as a JSON array of `[re, im]` pairs.
pub fn parse_point(text: &str) -> Result<Point<f64>> {
    serde_json::from_str(text).map_err(|e| Error::parse("point", e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Ball,
    Polydisc,
    Box,
}

/// A closed-form region: a ball, a polydisc, or a box (half-width per complex axis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox<T: Real> {
    pub kind: DomainKind,
    pub center: Point<T>,
    pub extents: Vec<T>,
}

impl<T: Real> DomainBox<T> {
    pub fn new(kind: DomainKind, center: Point<T>, extents: Vec<T>) -> Result<Self> {
        let expected = match kind {
            DomainKind::Ball => 1,
            DomainKind::Polydisc | DomainKind::Box => center.dim(),
        };
        if extents.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: extents.len(),
            });
        }
        if extents.iter().any(|e| !(*e > T::zero()) || !e.is_finite()) {
            return Err(Error::invalid("domain extents must be positive"));
        }
        Ok(Self {
            kind,
            center,
            extents,
        })
    }

    pub fn ball(center: Point<T>, radius: T) -> Result<Self> {
        Self::new(DomainKind::Ball, center, vec![radius])
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, z: &Point<T>) -> bool {
        match self.kind {
            DomainKind::Ball => z.dist(&self.center) <= self.extents[0],
            DomainKind::Polydisc => z
                .0
                .iter()
                .zip(&self.center.0)
                .zip(&self.extents)
                .all(|((a, c), r)| (*a - *c).norm() <= *r),
            DomainKind::Box => z
                .0
                .iter()
                .zip(&self.center.0)
                .zip(&self.extents)
                .all(|((a, c), h)| (a.re - c.re).abs() <= *h && (a.im - c.im).abs() <= *h),
        }
    }

    /// Half-width of the bounding box along each of the 2n real axes.
    pub fn half_widths(&self) -> Vec<T> {
        let n = self.dim();
        match self.kind {
            DomainKind::Ball => vec![self.extents[0]; 2 * n],
            DomainKind::Polydisc | DomainKind::Box => {
                self.extents.iter().flat_map(|e| [*e, *e]).collect()
            }
        }
    }

    /// Same kind and center with every extent reduced by `margin`.
    pub fn shrunk(&self, margin: T) -> Result<Self> {
        Self::new(
            self.kind,
            self.center.clone(),
            self.extents.iter().map(|e| *e - margin).collect(),
        )
    }

    /// Largest radius `ρ` with `B(z, ρ)` inside the region (0 if `z` is outside).
    pub fn inner_radius_at(&self, z: &Point<T>) -> T {
        let zero = T::zero();
        match self.kind {
            DomainKind::Ball => (self.extents[0] - z.dist(&self.center)).max(zero),
            DomainKind::Polydisc => z
                .0
                .iter()
                .zip(&self.center.0)
                .zip(&self.extents)
                .map(|((a, c), r)| *r - (*a - *c).norm())
                .fold(T::infinity(), T::min)
                .max(zero),
            DomainKind::Box => z
                .0
                .iter()
                .zip(&self.center.0)
                .zip(&self.extents)
                .map(|((a, c), h)| (*h - (a.re - c.re).abs()).min(*h - (a.im - c.im).abs()))
                .fold(T::infinity(), T::min)
                .max(zero),
        }
    }

    /// Uniform sample by rejection from the bounding box.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        let hw = self.half_widths();
        let c = self.center.to_real();
        loop {
            let xs: Vec<T> = hw
                .iter()
                .zip(&c)
                .map(|(h, c0)| *c0 + *h * T::lit(rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let z = Point::from_real(&xs);
            if self.contains(&z) {
                return z;
            }
        }
    }

    /// Tensor grid with `per_axis` nodes on every real axis of the bounding box,
    /// restricted to the region. Endpoints are included.
    pub fn grid_nodes(&self, per_axis: usize) -> Vec<Point<T>> {
        let per_axis = per_axis.max(2);
        let hw = self.half_widths();
        let c = self.center.to_real();
        let dims = hw.len();
        let total = per_axis.pow(dims as u32);
        let step = |axis: usize, k: usize| {
            c[axis] - hw[axis] + T::lit(2.0) * hw[axis] * T::count(k) / T::count(per_axis - 1)
        };
        (0..total)
            .filter_map(|mut idx| {
                let mut xs = vec![T::zero(); dims];
                for (axis, x) in xs.iter_mut().enumerate() {
                    *x = step(axis, idx % per_axis);
                    idx /= per_axis;
                }
                let z = Point::from_real(&xs);
                self.contains(&z).then_some(z)
            })
            .collect()
    }
}

/// Parses a region spec `ball:<R>`, `polydisc:<r1>,<r2>,…` or `box:<h1>,…`
/// centered at the origin of C^n. A single extent is broadcast.
pub fn parse_region(text: &str, n: usize) -> Result<DomainBox<f64>> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::parse("region", format!("expected <kind>:<extents>, got '{text}'")))?;
    let kind = match kind.trim() {
        "ball" => DomainKind::Ball,
        "polydisc" => DomainKind::Polydisc,
        "box" => DomainKind::Box,
        other => return Err(Error::parse("region.kind", format!("unknown kind '{other}'"))),
    };
    let mut extents = rest
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse("region.extent", format!("'{s}': {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let want = if kind == DomainKind::Ball { 1 } else { n };
    if extents.len() == 1 && want > 1 {
        extents = vec![extents[0]; want];
    }
    DomainBox::new(kind, Point::origin(n), extents)
}

/// Unitary frame: an n×n matrix stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame<T> {
    n: usize,
    cols: Vec<Complex<T>>,
}

impl<T: Real> Frame<T> {
    pub fn identity(n: usize) -> Self {
        let mut cols = vec![Complex::new(T::zero(), T::zero()); n * n];
        for j in 0..n {
            cols[j * n + j] = Complex::new(T::one(), T::zero());
        }
        Self { n, cols }
    }

    pub fn from_columns(columns: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let n = columns.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("frame must be square"));
        }
        Ok(Self {
            n,
            cols: columns.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn column(&self, j: usize) -> &[Complex<T>] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    /// Entry `A[row, col]`.
    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.cols[col * self.n + row]
    }

    /// `A ζ`.
    pub fn apply(&self, zeta: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for (j, zj) in zeta.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o = *o + *a * *zj;
            }
        }
        out
    }

    /// `A† v`.
    pub fn apply_adjoint(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|j| {
                self.column(j)
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, x)| acc + a.conj() * *x)
            })
            .collect()
    }

    /// `max |A†A − I|` over entries.
    pub fn unitarity_defect(&self) -> T {
        let mut worst = T::zero();
        for j in 0..self.n {
            for k in 0..self.n {
                let dot = self
                    .column(j)
                    .iter()
                    .zip(self.column(k))
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * *b);
                let target = if j == k { T::one() } else { T::zero() };
                worst = worst.max((dot - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }

    /// Determinant for n ≤ 3 by cofactors; larger frames use Gaussian elimination.
    pub fn determinant(&self) -> Complex<T> {
        let n = self.n;
        let mut a: Vec<Complex<T>> = (0..n * n).map(|i| self.entry(i / n, i % n)).collect();
        let mut det = Complex::new(T::one(), T::zero());
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    a[x * n + col]
                        .norm()
                        .partial_cmp(&a[y * n + col].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[pivot * n + col].norm() == T::zero() {
                return Complex::new(T::zero(), T::zero());
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det = det * p;
            for row in col + 1..n {
                let factor = a[row * n + col] / p;
                for k in col..n {
                    let v = a[col * n + k];
                    a[row * n + k] = a[row * n + k] - factor * v;
                }
            }
        }
        det
    }

    /// Column-major `[[re, im], …]` listing, for reports.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.n)
            .map(|j| {
                self.column(j)
                    .iter()
                    .map(|c| [c.re.to_f64().unwrap(), c.im.to_f64().unwrap()])
                    .collect()
            })
            .collect()
    }
}

/// `z0 + A(P_{r,s})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder<T: Real> {
    center: Point<T>,
    frame: Frame<T>,
    r: T,
    s: T,
}

impl<T: Real> Cylinder<T> {
    pub fn new(center: Point<T>, frame: Frame<T>, r: T, s: T) -> Result<Self> {
        if frame.dim() != center.dim() {
            return Err(Error::Dimension {
                expected: center.dim(),
                got: frame.dim(),
            });
        }
        if !(r > T::zero()) || !(s > T::zero()) || !r.is_finite() || !s.is_finite() {
            return Err(Error::invalid("cylinder radii must be positive and finite"));
        }
        let defect = frame.unitarity_defect();
        if defect > T::structural_tol() {
            return Err(Error::invalid(format!("frame is not unitary (defect {defect})")));
        }
        Ok(Self {
            center,
            frame,
            r,
            s,
        })
    }

    /// Axis-aligned cylinder (identity frame).
    pub fn standard(center: Point<T>, r: T, s: T) -> Result<Self> {
        let n = center.dim();
        Self::new(center, Frame::identity(n), r, s)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &Point<T> {
        &self.center
    }

    pub fn frame(&self) -> &Frame<T> {
        &self.frame
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn with_radii(&self, r: T, s: T) -> Result<Self> {
        Self::new(self.center.clone(), self.frame.clone(), r, s)
    }

    pub fn volume(&self) -> T {
        cylinder_volume(self)
    }

    /// Coordinates `ζ = A†(z − z0)`.
    pub fn local_coords(&self, z: &Point<T>) -> Vec<Complex<T>> {
        let d: Vec<Complex<T>> = z.0.iter().zip(&self.center.0).map(|(a, b)| *a - *b).collect();
        self.frame.apply_adjoint(&d)
    }

    /// Open-set membership.
    pub fn contains(&self, z: &Point<T>) -> bool {
        let zeta = self.local_coords(z);
        let tail = zeta.iter().skip(1).fold(T::zero(), |acc, c| acc + c.norm_sqr());
        zeta[0].norm() < self.r && (self.dim() == 1 || tail < self.s * self.s)
    }

    /// `z0 + A ζ`.
    pub fn point_at(&self, zeta: &[Complex<T>]) -> Point<T> {
        self.center.offset(&self.frame.apply(zeta))
    }

    /// Radius of the smallest centered ball containing the cylinder.
    pub fn circumradius(&self) -> T {
        if self.dim() == 1 {
            self.r
        } else {
            (self.r * self.r + self.s * self.s).sqrt()
        }
    }
}

impl<T: Real> Serialize for Cylinder<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Cylinder", 5)?;
        st.serialize_field("center", &self.center)?;
        st.serialize_field("frame", &self.frame.to_pairs())?;
        st.serialize_field("r", &self.r.to_f64())?;
        st.serialize_field("s", &self.s.to_f64())?;
        st.serialize_field("volume", &self.volume().to_f64())?;
        st.end()
    }
}

/// `μ(P) = π r² · π^{n−1} s^{2(n−1)} / (n−1)!`, independent of the frame.
pub fn cylinder_volume<T: Real>(p: &Cylinder<T>) -> T {
    let n = p.dim();
    let pi = T::PI();
    let disc = pi * p.r * p.r;
    let mut ball = T::one();
    for k in 1..n {
        ball = ball * pi * p.s * p.s / T::count(k);
    }
    disc * ball
}

/// Volume of the unit ball of C^n, `π^n / n!`.
pub fn unit_ball_volume<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::PI() / T::count(k))
}

/// CLI cylinder spec `r=<f>,s=<f>,seed=<u64>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub r: f64,
    pub s: f64,
    pub seed: u64,
}

impl CylinderSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = None;
        let mut s = None;
        let mut seed = None;
        for part in text.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::parse("cylinder", format!("expected key=value, got '{part}'")))?;
            let key = key.trim();
            let value = value.trim();
            let field = format!("cylinder.{key}");
            match key {
                "r" => r = Some(parse_positive(&field, value)?),
                "s" => s = Some(parse_positive(&field, value)?),
                "seed" => {
                    seed = Some(
                        value
                            .parse::<u64>()
                            .map_err(|e| Error::parse(&field, format!("'{value}': {e}")))?,
                    )
                }
                _ => return Err(Error::parse(&field, "unknown key")),
            }
        }
        Ok(Self {
            r: r.ok_or_else(|| Error::parse("cylinder.r", "missing"))?,
            s: s.ok_or_else(|| Error::parse("cylinder.s", "missing"))?,
            seed: seed.ok_or_else(|| Error::parse("cylinder.seed", "missing"))?,
        })
    }

    pub fn build(&self, center: Point<f64>) -> Result<Cylinder<f64>> {
        let frame = random_unitary(self.seed, center.dim());
        Cylinder::new(center, frame, self.r, self.s)
    }
}

fn parse_positive(field: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|e| Error::parse(field, format!("'{value}': {e}")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::parse(field, format!("must be positive, got {v}")));
    }
    Ok(v)
}
