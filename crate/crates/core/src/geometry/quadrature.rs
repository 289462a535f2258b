use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cylinder, Point};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MIN_NODE_BUDGET: usize = 16;
pub const DEFAULT_BUDGET_C1: usize = 4096;
pub const DEFAULT_BUDGET_C2: usize = 65536;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// Gauss–Legendre × trapezoid on the disc, tensored with the same rule on the
    /// transverse disc when n = 2 (low-discrepancy ball points for n ≥ 3).
    TensorGrid,
    /// Product disc rule tensored with an R_d low-discrepancy ball rule.
    QuasiRandom,
    /// Product disc rule tensored with seeded pseudo-random ball points.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub budget: usize,
    pub seed: u64,
}

impl QuadratureRule {
    pub fn tensor(budget: usize) -> Self {
        Self {
            kind: RuleKind::TensorGrid,
            budget,
            seed: 0,
        }
    }

    /// Tensor rule with the default budget for dimension `n`.
    pub fn default_for(n: usize) -> Self {
        Self::tensor(if n == 1 {
            DEFAULT_BUDGET_C1
        } else {
            DEFAULT_BUDGET_C2
        })
    }

    pub fn with_budget(self, budget: usize) -> Self {
        Self { budget, ..self }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureNode<T> {
    pub point: Point<T>,
    pub weight: T,
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre<T: Real>(m: usize) -> Vec<(T, T)> {
    assert!(m >= 1);
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_m.
        let mut x = (T::PI() * (T::count(i) + T::lit(0.75)) / (T::count(m) + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        if d != T::zero() {
            dp = d;
        }
        let w = two / ((T::one() - x * x) * dp * dp);
        out.push((x, w));
    }
    out.reverse();
    out
}

fn legendre<T: Real>(m: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=m {
        let k = T::count(k);
        let p2 = ((T::lit(2.0) * k - T::one()) * x * p1 - (k - T::one()) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (T::one(), T::zero());
    }
    let d = T::count(m) * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Product rule on the disc `|ζ| < r` with about `k` nodes: Gauss–Legendre in the
/// radius (weight ρ) times the trapezoid rule in the angle. Weights sum to `πr²`.
pub fn disc_rule<T: Real>(k: usize, r: T) -> Vec<(Complex<T>, T)> {
    let n_rad = ((k as f64 / 2.0).sqrt().round() as usize).max(2);
    let n_ang = (k / n_rad).max(4);
    let gl = gauss_legendre::<T>(n_rad);
    let half = r / T::lit(2.0);
    let dtheta = T::lit(2.0) * T::PI() / T::count(n_ang);
    let mut out = Vec::with_capacity(n_rad * n_ang);
    for &(x, w) in &gl {
        let rho = half * (x + T::one());
        let wr = w * half * rho * dtheta;
        for j in 0..n_ang {
            let theta = dtheta * T::count(j);
            out.push((Complex::from_polar(rho, theta), wr));
        }
    }
    out
}

/// Nodes and weights for `∫_{z0 + A(P_{r,s})}`. Weights sum to `μ(P)`.
pub fn sample_cylinder<T: Real>(p: &Cylinder<T>, rule: &QuadratureRule) -> Result<Vec<QuadratureNode<T>>> {
    if rule.budget < MIN_NODE_BUDGET {
        return Err(Error::InsufficientNodes {
            got: rule.budget,
            min: MIN_NODE_BUDGET,
        });
    }
    let n = p.dim();
    if n == 1 {
        return Ok(disc_rule(rule.budget, p.r())
            .into_iter()
            .map(|(z, w)| QuadratureNode {
                point: p.point_at(&[z]),
                weight: w,
            })
            .collect());
    }
    let k_each = ((rule.budget as f64).sqrt().floor() as usize).max(4);
    let disc = disc_rule::<T>(k_each, p.r());
    let ball = ball_rule::<T>(n - 1, k_each, p.s(), rule);
    let mut out = Vec::with_capacity(disc.len() * ball.len());
    let mut zeta = vec![Complex::new(T::zero(), T::zero()); n];
    for (z1, w1) in &disc {
        zeta[0] = *z1;
        for (tail, w2) in &ball {
            zeta[1..].copy_from_slice(tail);
            out.push(QuadratureNode {
                point: p.point_at(&zeta),
                weight: *w1 * *w2,
            });
        }
    }
    Ok(out)
}

/// Rule on the ball of radius `s` in C^d with about `k` nodes.
fn ball_rule<T: Real>(d: usize, k: usize, s: T, rule: &QuadratureRule) -> Vec<(Vec<Complex<T>>, T)> {
    if d == 1 && rule.kind == RuleKind::TensorGrid {
        return disc_rule(k, s).into_iter().map(|(z, w)| (vec![z], w)).collect();
    }
    let volume = super::unit_ball_volume::<T>(d) * s.powi(2 * d as i32);
    let real_dim = 2 * d;
    let mut rng = ChaCha8Rng::seed_from_u64(rule.seed);
    let alphas = rd_parameters(real_dim);
    let mut points = Vec::with_capacity(k);
    let mut index: u64 = 0;
    while points.len() < k {
        let u: Vec<f64> = match rule.kind {
            RuleKind::Random => (0..real_dim).map(|_| rng.random::<f64>()).collect(),
            _ => alphas
                .iter()
                .map(|a| (0.5 + a * (index + 1) as f64).fract())
                .collect(),
        };
        index += 1;
        let xs: Vec<f64> = u.iter().map(|v| 2.0 * v - 1.0).collect();
        if xs.iter().map(|x| x * x).sum::<f64>() < 1.0 {
            let coords = xs
                .chunks(2)
                .map(|c| Complex::new(s * T::lit(c[0]), s * T::lit(c[1])))
                .collect();
            points.push(coords);
        }
    }
    let w = volume / T::count(k);
    points.into_iter().map(|c| (c, w)).collect()
}

/// Additive recurrence constants of the R_d sequence (generalized golden ratio).
fn rd_parameters(d: usize) -> Vec<f64> {
    let mut g = 2.0_f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|j| g.powi(-(j as i32)).fract()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_unitary;
    use crate::scalar::compensated_sum;
    use std::f64::consts::PI;

    fn integrate(p: &Cylinder<f64>, rule: &QuadratureRule, f: impl Fn(&Point<f64>) -> f64) -> f64 {
        let nodes = sample_cylinder(p, rule).unwrap();
        compensated_sum(nodes.iter().map(|q| q.weight * f(&q.point)))
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre::<f64>(8);
        let total: f64 = gl.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫ x¹⁴ = 2/15, degree 15 is the exactness limit.
        let x14: f64 = gl.iter().map(|(x, w)| w * x.powi(14)).sum();
        assert!((x14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn budget_floor() {
        let p = Cylinder::standard(Point::<f64>::origin(1), 1.0, 1.0).unwrap();
        assert_eq!(
            sample_cylinder(&p, &QuadratureRule::tensor(8)).unwrap_err(),
            Error::InsufficientNodes { got: 8, min: 16 }
        );
    }

    #[test]
    fn weights_sum_to_volume() {
        for kind in [RuleKind::TensorGrid, RuleKind::QuasiRandom, RuleKind::Random] {
            for n in 1..=3 {
                let p = Cylinder::new(Point::origin(n), random_unitary(n as u64, n), 0.7, 0.4).unwrap();
                let rule = QuadratureRule {
                    kind,
                    budget: if n == 1 { 4096 } else { 4096 },
                    seed: 11,
                };
                let total = integrate(&p, &rule, |_| 1.0);
                assert!((total / p.volume() - 1.0).abs() < 1e-8, "{kind:?} n={n}");
            }
        }
    }

    #[test]
    fn nodes_inside_cylinder() {
        let c = Point::<f64>::from_pairs(&[(0.3, -0.2), (1.0, 0.5)]).unwrap();
        let p = Cylinder::new(c, random_unitary(8, 2), 0.5, 0.3).unwrap();
        for rule in [QuadratureRule::tensor(4096), QuadratureRule { kind: RuleKind::QuasiRandom, budget: 4096, seed: 1 }] {
            let nodes = sample_cylinder(&p, &rule).unwrap();
            assert!(nodes.iter().all(|q| p.contains(&q.point)));
        }
    }

    #[test]
    fn disc_second_moment() {
        let p = Cylinder::standard(Point::<f64>::origin(1), 1.0, 1.0).unwrap();
        let m2 = integrate(&p, &QuadratureRule::default_for(1), |z| z.norm_sqr());
        assert!((m2 - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn odd_moments_vanish() {
        let p = Cylinder::new(Point::origin(2), random_unitary(3, 2), 0.9, 0.6).unwrap();
        let rule = QuadratureRule::default_for(2);
        let re = integrate(&p, &rule, |z| z.coords()[0].re);
        let im = integrate(&p, &rule, |z| z.coords()[0].im);
        assert!(re.abs() < 1e-12 && im.abs() < 1e-12);
    }

    #[test]
    fn degree_two_exactness() {
        // In local coordinates, ∫|ζ₁|² = μ·r²/2 and ∫|ζ₂|² = μ·s²/2.
        let (r, s) = (0.9_f64, 0.6_f64);
        let center = Point::<f64>::from_pairs(&[(0.2, 0.1), (-0.3, 0.4)]).unwrap();
        let frame = random_unitary(21, 2);
        let p = Cylinder::new(center.clone(), frame, r, s).unwrap();
        let rule = QuadratureRule::default_for(2);
        let mu = p.volume();
        let q = |z: &Point<f64>| {
            let zeta = p.local_coords(z);
            2.0 * zeta[0].norm_sqr() - 3.0 * zeta[1].norm_sqr() + (zeta[0] * zeta[1].conj()).re + 1.0
        };
        let exact = mu * (2.0 * r * r / 2.0 - 3.0 * s * s / 2.0 + 1.0);
        let got = integrate(&p, &rule, q);
        assert!((got - exact).abs() <= 1e-6 * exact.abs(), "{got} vs {exact}");
        // |z|² about the origin: |z0|² + r²/2 + s²/2 on average.
        let mean = integrate(&p, &rule, |z| z.norm_sqr()) / mu;
        let expect = center.norm_sqr() + r * r / 2.0 + s * s / 2.0;
        assert!((mean - expect).abs() <= 1e-6 * expect);
    }

    #[test]
    fn radial_integrals_are_frame_invariant() {
        let center = Point::<f64>::from_pairs(&[(0.5, 0.0), (0.0, -0.5)]).unwrap();
        let f = |c: &Point<f64>| {
            let c = c.clone();
            move |z: &Point<f64>| (-z.dist(&c).powi(2)).exp() * (1.0 + z.dist(&c))
        };
        let rule = QuadratureRule::default_for(2);
        let base = Cylinder::standard(center.clone(), 0.7, 0.3).unwrap();
        let reference = integrate(&base, &rule, f(&center));
        let err_estimate = (reference - integrate(&base, &rule.with_budget(rule.budget / 4), f(&center))).abs();
        for seed in 0..5 {
            let p = Cylinder::new(center.clone(), random_unitary(seed, 2), 0.7, 0.3).unwrap();
            let v = integrate(&p, &rule, f(&center));
            assert!((v - reference).abs() <= 3.0 * err_estimate.max(1e-13), "{v} vs {reference}");
        }
    }

    #[test]
    fn f32_rule() {
        let p = Cylinder::<f32>::standard(Point::origin(1), 1.0, 1.0).unwrap();
        let nodes = sample_cylinder(&p, &QuadratureRule::tensor(1024)).unwrap();
        let total: f32 = nodes.iter().map(|q| q.weight).sum();
        assert!((total - std::f32::consts::PI).abs() < 1e-4);
    }
}
