use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, CMatrix, C64};

use super::ComplexPoint;

/// A continuous real (1,1)-form `ω = i Σ g_{jk̄} dz_j ∧ dz̄_k`, given by its
/// coefficient matrix.
pub trait HermitianField: Send + Sync {
    fn dim(&self) -> usize;

    fn coeffs(&self, z: &ComplexPoint) -> CMatrix;

    /// Coefficients, rejected unless Hermitian within 1e−12.
    fn checked_coeffs(&self, z: &ComplexPoint) -> Result<CMatrix> {
        let g = self.coeffs(z);
        let defect = hermitian_defect(&g);
        if defect > 1e-12 {
            return Err(Error::invalid(format!(
                "omega is not Hermitian at {z} (defect {defect:e})"
            )));
        }
        Ok(g)
    }

    fn name(&self) -> String {
        "omega".to_string()
    }
}

/// `ω = 0`.
#[derive(Clone, Copy, Debug)]
pub struct ZeroHermitian(pub usize);

impl HermitianField for ZeroHermitian {
    fn dim(&self) -> usize {
        self.0
    }
    fn coeffs(&self, _z: &ComplexPoint) -> CMatrix {
        CMatrix::from_element(self.0, self.0, C64::new(0.0, 0.0))
    }
    fn name(&self) -> String {
        "zero".into()
    }
}

/// Constant coefficients.
#[derive(Clone, Debug)]
pub struct ConstantHermitian(pub CMatrix);

impl HermitianField for ConstantHermitian {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn coeffs(&self, _z: &ComplexPoint) -> CMatrix {
        self.0.clone()
    }
    fn name(&self) -> String {
        "const".into()
    }
}

type CoeffFn = dyn Fn(&ComplexPoint) -> CMatrix + Send + Sync;

pub struct FnHermitian {
    n: usize,
    coeffs: Box<CoeffFn>,
}

impl FnHermitian {
    pub fn new(n: usize, coeffs: impl Fn(&ComplexPoint) -> CMatrix + Send + Sync + 'static) -> Self {
        Self {
            n,
            coeffs: Box::new(coeffs),
        }
    }
}

impl HermitianField for FnHermitian {
    fn dim(&self) -> usize {
        self.n
    }
    fn coeffs(&self, z: &ComplexPoint) -> CMatrix {
        (self.coeffs)(z)
    }
}

/// Parses `zero` or `scalar:<c>` (that is, `c·I`).
pub fn parse_omega(id: &str, n: usize) -> Result<Box<dyn HermitianField>> {
    match id.split_once(':') {
        None if id.trim() == "zero" => Ok(Box::new(ZeroHermitian(n))),
        Some(("scalar", c)) => {
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|e| Error::parse("omega.scalar", format!("'{c}': {e}")))?;
            Ok(Box::new(ConstantHermitian(CMatrix::identity(n, n).scale(c))))
        }
        _ => Err(Error::parse("omega", format!("unknown form '{id}' (expected zero | scalar:<c>)"))),
    }
}
