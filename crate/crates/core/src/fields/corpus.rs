use serde_json::Value;

use super::{ComplexPoint, ScalarField, Smoothness};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::{CMatrix, C64};

/// Builtin closed-form weights. Every entry carries its Wirtinger gradient and
/// Levi matrix in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum CorpusField {
    /// `|z|²`
    SqNorm { n: usize },
    /// `−|z|²`
    NegSqNorm { n: usize },
    /// `|z₁|² − λ|z₂|²`
    Saddle { lambda: f64 },
    /// `log|z − a|` (Euclidean norm)
    LogAbs { a: ComplexPoint },
    /// `Re Σ a_j z_j`
    ReLinear { a: Vec<C64> },
    /// `log(1 + |z|²)`
    Log1pSq { n: usize },
    /// `max(log|z₁|, log|z₂|)`
    MaxLog,
    /// `Re(z₁ z̄₂)`
    Cross,
    /// `−exp(−|z|²)`
    NegGauss { n: usize },
    /// `φ ≡ c`
    Const { n: usize, c: f64 },
}

fn zero_matrix(n: usize) -> CMatrix {
    CMatrix::from_element(n, n, C64::new(0.0, 0.0))
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn diff(z: &ComplexPoint, a: &ComplexPoint) -> Vec<C64> {
    z.coords().iter().zip(a.coords()).map(|(x, y)| x - y).collect()
}

impl CorpusField {
    /// The nine reference entries in dimension `n` (entries tied to C² are built in C²).
    pub fn all(n: usize) -> Vec<CorpusField> {
        let mut a = vec![C64::new(0.0, 0.0); n];
        a[0] = C64::new(1.0, 0.0);
        vec![
            CorpusField::SqNorm { n },
            CorpusField::NegSqNorm { n },
            CorpusField::Saddle { lambda: 2.0 },
            CorpusField::LogAbs {
                a: Point::origin(n),
            },
            CorpusField::ReLinear { a },
            CorpusField::Log1pSq { n },
            CorpusField::MaxLog,
            CorpusField::Cross,
            CorpusField::NegGauss { n },
        ]
    }

    /// Corpus identifier as accepted by [`parse_field`].
    pub fn id(&self) -> String {
        match self {
            CorpusField::SqNorm { .. } => "sq_norm".into(),
            CorpusField::NegSqNorm { .. } => "neg_sq_norm".into(),
            CorpusField::Saddle { lambda } => format!("saddle:{lambda}"),
            CorpusField::LogAbs { a } => format!("log_abs:{}", serde_json::to_string(a).unwrap()),
            CorpusField::ReLinear { a } => format!(
                "re_linear:{}",
                serde_json::to_string(&Point(a.clone())).unwrap()
            ),
            CorpusField::Log1pSq { .. } => "log1p_sq".into(),
            CorpusField::MaxLog => "max_log".into(),
            CorpusField::Cross => "cross".into(),
            CorpusField::NegGauss { .. } => "neg_gauss".into(),
            CorpusField::Const { c, .. } => format!("const:{c}"),
        }
    }

    /// Relative margin around the ridge `|z₁| = |z₂|` of `max_log` inside which
    /// the field is not treated as C².
    const RIDGE_MARGIN: f64 = 1e-2;
}

impl ScalarField for CorpusField {
    fn dim(&self) -> usize {
        match self {
            CorpusField::SqNorm { n } | CorpusField::NegSqNorm { n } => *n,
            CorpusField::Log1pSq { n } | CorpusField::NegGauss { n } => *n,
            CorpusField::Const { n, .. } => *n,
            CorpusField::Saddle { .. } | CorpusField::MaxLog | CorpusField::Cross => 2,
            CorpusField::LogAbs { a } => a.dim(),
            CorpusField::ReLinear { a } => a.len(),
        }
    }

    fn eval(&self, z: &ComplexPoint) -> f64 {
        let c = z.coords();
        match self {
            CorpusField::SqNorm { .. } => z.norm_sqr(),
            CorpusField::NegSqNorm { .. } => -z.norm_sqr(),
            CorpusField::Saddle { lambda } => c[0].norm_sqr() - lambda * c[1].norm_sqr(),
            CorpusField::LogAbs { a } => z.dist(a).ln(),
            CorpusField::ReLinear { a } => a.iter().zip(c).map(|(x, y)| (x * y).re).sum(),
            CorpusField::Log1pSq { .. } => z.norm_sqr().ln_1p(),
            CorpusField::MaxLog => c[0].norm().ln().max(c[1].norm().ln()),
            CorpusField::Cross => (c[0] * c[1].conj()).re,
            CorpusField::NegGauss { .. } => -(-z.norm_sqr()).exp(),
            CorpusField::Const { c, .. } => *c,
        }
    }

    fn smoothness(&self) -> Smoothness {
        match self {
            CorpusField::MaxLog | CorpusField::LogAbs { .. } => Smoothness::Usc,
            _ => Smoothness::C2,
        }
    }

    fn smoothness_at(&self, z: &ComplexPoint) -> Smoothness {
        match self {
            CorpusField::MaxLog => {
                let c = z.coords();
                let (a, b) = (c[0].norm(), c[1].norm());
                if (a - b).abs() > Self::RIDGE_MARGIN * (1.0 + z.norm()) {
                    Smoothness::C2
                } else {
                    Smoothness::Usc
                }
            }
            CorpusField::LogAbs { a } if z.dist(a) > 0.0 => Smoothness::C2,
            _ => self.smoothness(),
        }
    }

    fn gradient(&self, z: &ComplexPoint) -> Option<Vec<C64>> {
        let c = z.coords();
        let conj: Vec<C64> = c.iter().map(|x| x.conj()).collect();
        Some(match self {
            CorpusField::SqNorm { .. } => conj,
            CorpusField::NegSqNorm { .. } => conj.into_iter().map(|x| -x).collect(),
            CorpusField::Saddle { lambda } => vec![conj[0], -conj[1] * *lambda],
            CorpusField::LogAbs { a } => {
                let w = diff(z, a);
                let q: f64 = w.iter().map(|x| x.norm_sqr()).sum();
                w.iter().map(|x| x.conj() / (2.0 * q)).collect()
            }
            CorpusField::ReLinear { a } => a.iter().map(|x| x * 0.5).collect(),
            CorpusField::Log1pSq { .. } => {
                let q = 1.0 + z.norm_sqr();
                conj.into_iter().map(|x| x / q).collect()
            }
            CorpusField::MaxLog => {
                let mut g = vec![C64::new(0.0, 0.0); 2];
                let k = if c[0].norm() >= c[1].norm() { 0 } else { 1 };
                g[k] = C64::new(0.5, 0.0) / c[k];
                g
            }
            CorpusField::Cross => vec![conj[1] * 0.5, conj[0] * 0.5],
            CorpusField::NegGauss { .. } => {
                let e = (-z.norm_sqr()).exp();
                conj.into_iter().map(|x| x * e).collect()
            }
            CorpusField::Const { n, .. } => vec![C64::new(0.0, 0.0); *n],
        })
    }

    fn hessian(&self, z: &ComplexPoint) -> Option<CMatrix> {
        let n = self.dim();
        let c = z.coords();
        Some(match self {
            CorpusField::SqNorm { .. } => identity(n),
            CorpusField::NegSqNorm { .. } => -identity(n),
            CorpusField::Saddle { lambda } => {
                let mut m = identity(2);
                m[(1, 1)] = C64::new(-lambda, 0.0);
                m
            }
            CorpusField::LogAbs { a } => {
                // ½(δ_jk/Q − w̄_j w_k/Q²), w = z − a, Q = |w|²
                let w = diff(z, a);
                let q: f64 = w.iter().map(|x| x.norm_sqr()).sum();
                CMatrix::from_fn(n, n, |j, k| {
                    let delta = if j == k { 1.0 / q } else { 0.0 };
                    (C64::new(delta, 0.0) - w[j].conj() * w[k] / (q * q)) * 0.5
                })
            }
            CorpusField::ReLinear { .. } | CorpusField::MaxLog | CorpusField::Const { .. } => zero_matrix(n),
            CorpusField::Log1pSq { .. } => {
                let q = 1.0 + z.norm_sqr();
                CMatrix::from_fn(n, n, |j, k| {
                    let delta = if j == k { 1.0 / q } else { 0.0 };
                    C64::new(delta, 0.0) - c[j].conj() * c[k] / (q * q)
                })
            }
            CorpusField::Cross => {
                let mut m = zero_matrix(2);
                m[(0, 1)] = C64::new(0.5, 0.0);
                m[(1, 0)] = C64::new(0.5, 0.0);
                m
            }
            CorpusField::NegGauss { .. } => {
                let e = (-z.norm_sqr()).exp();
                CMatrix::from_fn(n, n, |j, k| {
                    let delta = if j == k { 1.0 } else { 0.0 };
                    (C64::new(delta, 0.0) - c[j].conj() * c[k]) * e
                })
            }
        })
    }

    fn is_pole(&self, z: &ComplexPoint) -> bool {
        match self {
            CorpusField::LogAbs { a } => z.dist(a) == 0.0,
            CorpusField::MaxLog => z.norm_sqr() == 0.0,
            _ => false,
        }
    }

    fn ball_infimum(&self, center: &ComplexPoint, radius: f64) -> Option<f64> {
        let r0 = center.norm();
        match self {
            CorpusField::SqNorm { .. } => Some((r0 - radius).max(0.0).powi(2)),
            CorpusField::NegSqNorm { .. } => Some(-(r0 + radius).powi(2)),
            CorpusField::ReLinear { a } => {
                let norm_a = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                Some(self.eval(center) - norm_a * radius)
            }
            CorpusField::Log1pSq { .. } => Some((1.0 + (r0 - radius).max(0.0).powi(2)).ln()),
            CorpusField::NegGauss { .. } => Some(-(-(r0 - radius).max(0.0).powi(2)).exp()),
            CorpusField::Const { c, .. } => Some(*c),
            CorpusField::LogAbs { a } => {
                let d = center.dist(a) - radius;
                Some(if d <= 0.0 { f64::NEG_INFINITY } else { d.ln() })
            }
            _ => None,
        }
    }

    fn name(&self) -> String {
        self.id()
    }
}

fn json_point(field: &str, value: &Value, n: usize) -> Result<Vec<C64>> {
    match value {
        Value::Number(x) => {
            let mut a = vec![C64::new(0.0, 0.0); n];
            a[0] = C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0);
            Ok(a)
        }
        Value::Array(_) => {
            let p: ComplexPoint =
                serde_json::from_value(value.clone()).map_err(|e| Error::parse(field, e.to_string()))?;
            Ok(p.0)
        }
        _ => Err(Error::parse(field, "expected a number or an array of [re, im] pairs")),
    }
}

/// Parses a corpus identifier such as `saddle:2` or `log_abs:[[0.5,0]]` into a
/// field on C^n. Entries defined only on C² ignore `n` when it is 2 and reject
/// anything else.
pub fn parse_field(id: &str, n: usize) -> Result<CorpusField> {
    let (name, param) = match id.split_once(':') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (id.trim(), None),
    };
    let param_json = |field: &str| -> Result<Value> {
        let text = param.ok_or_else(|| Error::parse(field, "missing parameter"))?;
        serde_json::from_str(text).map_err(|e| Error::parse(field, e.to_string()))
    };
    let need_two = |name: &str| -> Result<()> {
        if n != 2 {
            return Err(Error::parse("func", format!("{name} is defined on C² only (got n = {n})")));
        }
        Ok(())
    };
    if n == 0 {
        return Err(Error::parse("dim", "dimension must be at least 1"));
    }
    let field = match name {
        "sq_norm" => CorpusField::SqNorm { n },
        "neg_sq_norm" => CorpusField::NegSqNorm { n },
        "saddle" => {
            need_two(name)?;
            let lambda = param_json("func.saddle")?
                .as_f64()
                .ok_or_else(|| Error::parse("func.saddle", "expected a number"))?;
            CorpusField::Saddle { lambda }
        }
        "log_abs" => {
            let a = match param {
                None => vec![C64::new(0.0, 0.0); n],
                Some(_) => json_point("func.log_abs", &param_json("func.log_abs")?, n)?,
            };
            if a.len() != n {
                return Err(Error::parse("func.log_abs", format!("expected {n} coordinates")));
            }
            CorpusField::LogAbs { a: Point::new(a)? }
        }
        "re_linear" => {
            let a = match param {
                None => {
                    let mut a = vec![C64::new(0.0, 0.0); n];
                    a[0] = C64::new(1.0, 0.0);
                    a
                }
                Some(_) => json_point("func.re_linear", &param_json("func.re_linear")?, n)?,
            };
            if a.len() != n || a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::parse("func.re_linear", format!("expected {n} finite coordinates")));
            }
            CorpusField::ReLinear { a }
        }
        "log1p_sq" => CorpusField::Log1pSq { n },
        "max_log" => {
            need_two(name)?;
            CorpusField::MaxLog
        }
        "cross" => {
            need_two(name)?;
            CorpusField::Cross
        }
        "neg_gauss" => CorpusField::NegGauss { n },
        "zero" => CorpusField::Const { n, c: 0.0 },
        "const" => {
            let c = param_json("func.const")?
                .as_f64()
                .ok_or_else(|| Error::parse("func.const", "expected a number"))?;
            CorpusField::Const { n, c }
        }
        other => return Err(Error::parse("func", format!("unknown corpus id '{other}'"))),
    };
    Ok(field)
}

/// Natural dimension for an identifier when the caller does not force one.
pub fn default_dim(id: &str) -> usize {
    let name = id.split(':').next().unwrap_or("");
    match name {
        "saddle" | "max_log" | "cross" => 2,
        _ => 1,
    }
}
