use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Frame;
use crate::scalar::Real;

/// Haar-distributed unitary frame, deterministic in `seed`.
///
/// QR of a complex Gaussian matrix with the phases of `R`'s diagonal fixed to be
/// real positive, realized as twice-iterated modified Gram–Schmidt on the columns.
pub fn random_unitary<T: Real>(seed: u64, n: usize) -> Frame<T> {
    assert!(n >= 1, "dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let columns: Vec<Vec<Complex<T>>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex::new(T::lit(re) * half, T::lit(im) * half)
                })
                .collect()
        })
        .collect();
    Frame::from_columns(orthonormalize(columns)).expect("square by construction")
}

/// Unitary frame whose first column is `xi` (normalized); the remaining columns
/// complete it by Gram–Schmidt against the standard basis.
pub fn frame_with_first_column<T: Real>(xi: &[Complex<T>]) -> Frame<T> {
    let n = xi.len();
    let mut columns = vec![xi.to_vec()];
    for k in 0..n {
        let mut e = vec![Complex::new(T::zero(), T::zero()); n];
        e[k] = Complex::new(T::one(), T::zero());
        columns.push(e);
    }
    // Drop the standard vectors that become dependent.
    let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
    for col in columns {
        let mut v = col;
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = *vi - *bi * proj;
                }
            }
        }
        let norm = norm(&v);
        if norm > T::lit(1e-6) {
            basis.push(v.into_iter().map(|c| c / norm).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    Frame::from_columns(basis).expect("square by construction")
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * *y)
}

fn norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt()
}

fn orthonormalize<T: Real>(mut columns: Vec<Vec<Complex<T>>>) -> Vec<Vec<Complex<T>>> {
    let n = columns.len();
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = columns.split_at_mut(j);
                let proj = dot(&done[k], &rest[0]);
                for (v, b) in rest[0].iter_mut().zip(&done[k]) {
                    *v = *v - *b * proj;
                }
            }
        }
        let nrm = norm(&columns[j]);
        for v in columns[j].iter_mut() {
            *v = *v / nrm;
        }
    }
    columns
}
