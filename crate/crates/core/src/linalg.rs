//! Small dense Hermitian linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `max |M − M†|` over entries.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0_f64, |acc, c| acc.max(c.norm()))
}

/// Smallest eigenvalue of a Hermitian matrix with a unit eigenvector `v`, `Mv = λv`.
pub fn min_eigenpair(m: &CMatrix) -> (f64, CVector) {
    let eig = nalgebra::SymmetricEigen::new(hermitian_part(m));
    let (idx, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty matrix");
    let v = eig.eigenvectors.column(idx).into_owned();
    let norm = v.norm();
    (lambda, v.unscale(norm))
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    nalgebra::SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

// nalgebra takes complex square roots of the pivots, so a negative pivot does
// not make the factorization fail on its own.
fn checked_cholesky(m: CMatrix) -> Result<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let chol = nalgebra::Cholesky::new(m).ok_or(Error::SingularGram)?;
    let l = chol.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    if !ok {
        return Err(Error::SingularGram);
    }
    Ok(chol)
}

/// Solves `B x = b` for Hermitian positive definite `B`.
pub fn solve_hpd(b_mat: &CMatrix, rhs: &CVector) -> Result<CVector> {
    let chol = checked_cholesky(hermitian_part(b_mat))?;
    Ok(chol.solve(rhs))
}

/// `|f|²_B = Σ (B⁻¹)_{jk} f_j f̄_k`, the dual norm of a (0,1)-form under the metric
/// `Σ B_{jk̄} dz_j ⊗ dz̄_k`.
pub fn dual_norm_sq(f: &[C64], b_mat: &CMatrix) -> Result<f64> {
    // With α = B⁻ᵀ f, Σ B_{jk} α_j ᾱ_k equals f^T B⁻¹ f̄.
    let fbar = CVector::from_iterator(f.len(), f.iter().map(|c| c.conj()));
    let y = solve_hpd(b_mat, &fbar)?;
    let v: C64 = f.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    Ok(v.re)
}

/// `Σ_{jk} M_{jk} a_j ā_k`.
pub fn quadratic_form(m: &CMatrix, a: &[C64]) -> f64 {
    let n = a.len();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            acc += m[(j, k)] * a[j] * a[k].conj();
        }
    }
    acc.re
}

/// Hermitian Gram system with a trace-scaled ridge, solved by Cholesky.
pub fn solve_gram(gram: &CMatrix, rhs: &CVector) -> Result<CVector> {
    let n = gram.nrows();
    let trace: f64 = (0..n).map(|i| gram[(i, i)].re).sum();
    let ridge = 1e-12 * trace;
    let mut g = hermitian_part(gram);
    for i in 0..n {
        g[(i, i)] += C64::new(ridge, 0.0);
    }
    let chol = checked_cholesky(g)?;
    let x = chol.solve(rhs);
    if x.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::SingularGram);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn min_eigenpair_of_diagonal() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)]);
        let (l, v) = min_eigenpair(&m);
        assert!((l + 2.0).abs() < 1e-14);
        assert!(v[0].norm() < 1e-14 && (v[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dual_norm_against_adjugate_inverse() {
        let b = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.3), c(0.5, -0.3), c(1.5, 0.0)]);
        let f = [c(0.2, -1.0), c(0.7, 0.4)];
        let det = (b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)]).re;
        let inv = [
            [b[(1, 1)] / det, -b[(0, 1)] / det],
            [-b[(1, 0)] / det, b[(0, 0)] / det],
        ];
        let mut expect = c(0.0, 0.0);
        for j in 0..2 {
            for k in 0..2 {
                expect += inv[j][k] * f[j] * f[k].conj();
            }
        }
        assert!((dual_norm_sq(&f, &b).unwrap() - expect.re).abs() < 1e-13);
    }

    #[test]
    fn gram_solve_rejects_indefinite() {
        let g = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let rhs = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(solve_gram(&g, &rhs).unwrap_err(), Error::SingularGram);
    }
}
