use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet {
    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            value,
            grad: DVector::zeros(n),
            hess: DMatrix::zeros(n, n),
        }
    }

    /// The jet of `phi(self)` given `phi`, `phi'` and `phi''` at `self.value`.
    pub fn compose(&self, phi: f64, d1: f64, d2: f64) -> Self {
        Self {
            value: phi,
            grad: &self.grad * d1,
            hess: &self.hess * d1 + &self.grad * self.grad.transpose() * d2,
        }
    }
}

/// A scalar function on (a subset of) `R^n` with exact or approximate first
/// and second derivatives.
pub trait Field: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn jet(&self, x: &[f64]) -> Result<Jet>;

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.jet(x).map(|j| j.value)
    }
}

pub(crate) fn check_point(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("evaluation point is not finite".into()));
    }
    Ok(())
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

pub(crate) fn location(x: &[f64]) -> String {
    format!("{x:?}")
}

/// `v = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub n: usize,
    pub c: f64,
}

impl Field for Constant {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        check_point(self.n, x)?;
        Ok(Jet::constant(self.n, self.c))
    }
}

/// `v = C |x|^{2-n}`, singular at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub n: usize,
    pub c: f64,
}

impl Field for Inversion {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        check_point(self.n, x)?;
        let n = self.n as f64;
        let r2 = norm2(x);
        if r2 == 0.0 {
            return Err(Error::Domain("|x|^(2-n) is singular at the origin".into()));
        }
        let r = r2.sqrt();
        let value = self.c * r.powf(2.0 - n);
        let a = self.c * (2.0 - n) * r.powf(-n);
        let xv = DVector::from_column_slice(x);
        let grad = &xv * a;
        let hess = (DMatrix::identity(self.n, self.n) - &xv * xv.transpose() * (n / r2)) * a;
        Ok(Jet { value, grad, hess })
    }
}

/// `v = (eps / (eps^2 + |x - x0|^2))^{(n-2)/2}`: the round sphere of
/// radius `1/2` centred over `x0`, dilated by `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl Bubble {
    pub fn new(center: Vec<f64>, scale: f64) -> Result<Self> {
        if center.len() < 3 {
            return Err(Error::Domain(format!(
                "bubble needs dimension n >= 3, got {}",
                center.len()
            )));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Parameter(format!(
                "bubble scale must be positive, got {scale}"
            )));
        }
        Ok(Self { center, scale })
    }

    pub fn centered(n: usize, scale: f64) -> Result<Self> {
        Self::new(vec![0.0; n], scale)
    }
}

impl Field for Bubble {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let n = self.dim();
        check_point(n, x)?;
        let beta = (n as f64 - 2.0) / 2.0;
        let eps = self.scale;
        let d = DVector::from_iterator(n, x.iter().zip(&self.center).map(|(a, b)| a - b));
        let s = eps * eps + d.norm_squared();
        let e = eps.powf(beta);
        let value = e * s.powf(-beta);
        let a = -2.0 * beta * e * s.powf(-beta - 1.0);
        let b = 4.0 * beta * (beta + 1.0) * e * s.powf(-beta - 2.0);
        Ok(Jet {
            value,
            grad: &d * a,
            hess: DMatrix::identity(n, n) * a + &d * d.transpose() * b,
        })
    }
}

/// A scalar map applied pointwise to another field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarMap {
    /// `x^p`, for `x > 0`.
    Power(f64),
    /// `exp(s x)`.
    Exp(f64),
    /// `s ln x`, for `x > 0`.
    Log(f64),
    /// `t x`.
    Scale(f64),
}

impl ScalarMap {
    /// `(phi(x), phi'(x), phi''(x))`.
    pub fn derivatives(self, x: f64) -> Option<(f64, f64, f64)> {
        match self {
            ScalarMap::Power(p) => (x > 0.0).then(|| {
                (
                    x.powf(p),
                    p * x.powf(p - 1.0),
                    p * (p - 1.0) * x.powf(p - 2.0),
                )
            }),
            ScalarMap::Exp(s) => {
                let e = (s * x).exp();
                Some((e, s * e, s * s * e))
            }
            ScalarMap::Log(s) => (x > 0.0).then(|| (s * x.ln(), s / x, -s / (x * x))),
            ScalarMap::Scale(t) => Some((t * x, t, 0.0)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mapped {
    pub inner: Arc<dyn Field>,
    pub map: ScalarMap,
}

impl Field for Mapped {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let j = self.inner.jet(x)?;
        let (phi, d1, d2) = self
            .map
            .derivatives(j.value)
            .ok_or_else(|| Error::Positivity {
                value: j.value,
                location: location(x),
            })?;
        Ok(j.compose(phi, d1, d2))
    }
}

/// `v*(x) = |x|^{2-n} v(x / |x|^2)`.
#[derive(Debug, Clone)]
pub struct Kelvin {
    pub inner: Arc<dyn Field>,
}

impl Field for Kelvin {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let n = self.dim();
        check_point(n, x)?;
        let r2 = norm2(x);
        if r2 == 0.0 {
            return Err(Error::Domain(
                "Kelvin transform is undefined at the origin".into(),
            ));
        }
        let nf = n as f64;
        let r = r2.sqrt();
        let y: Vec<f64> = x.iter().map(|c| c / r2).collect();
        let inner = self.inner.jet(&y)?;

        let k = r.powf(2.0 - nf);
        let kg = (2.0 - nf) * r.powf(-nf);
        let kron = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        // J[a][i] = d y_a / d x_i
        let jac = DMatrix::from_fn(n, n, |a, i| kron(a, i) / r2 - 2.0 * x[a] * x[i] / (r2 * r2));
        let gy = jac.transpose() * &inner.grad;

        let mut grad = DVector::zeros(n);
        for i in 0..n {
            grad[i] = kg * x[i] * inner.value + k * gy[i];
        }

        let r4 = r2 * r2;
        let r6 = r4 * r2;
        let hy = jac.transpose() * &inner.hess * &jac;
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let kij = kg * (kron(i, j) - nf * x[i] * x[j] / r2);
                let mut second = 0.0;
                for a in 0..n {
                    let djac = -2.0 / r4
                        * (kron(a, i) * x[j] + kron(a, j) * x[i] + kron(i, j) * x[a])
                        + 8.0 * x[a] * x[i] * x[j] / r6;
                    second += inner.grad[a] * djac;
                }
                hess[(i, j)] = kij * inner.value
                    + kg * x[i] * gy[j]
                    + kg * x[j] * gy[i]
                    + k * (hy[(i, j)] + second);
            }
        }
        Ok(Jet {
            value: k * inner.value,
            grad,
            hess,
        })
    }
}

/// `y -> v(x0 + y / l) / v0`.
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub inner: Arc<dyn Field>,
    pub center: Vec<f64>,
    pub dilation: f64,
    pub normalization: f64,
}

impl Field for Rescaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, y: &[f64]) -> Result<Jet> {
        check_point(self.dim(), y)?;
        let x: Vec<f64> = self
            .center
            .iter()
            .zip(y)
            .map(|(c, yi)| c + yi / self.dilation)
            .collect();
        let j = self.inner.jet(&x)?;
        let l = self.dilation;
        let v0 = self.normalization;
        Ok(Jet {
            value: j.value / v0,
            grad: j.grad / (l * v0),
            hess: j.hess / (l * l * v0),
        })
    }
}
