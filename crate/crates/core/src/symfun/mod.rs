//! Symmetric curvature functions `f(lambda)` of the eigenvalues of the
//! Schouten tensor, their derivatives, and sampled checks of the structural
//! conditions (positivity, ellipticity, concavity, symmetry, homogeneity).

mod axioms;
mod eval;
mod operator;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use axioms::{verify_axioms, verify_axioms_with, AxiomReport, AxiomStat, AxiomTolerances};
pub(crate) use eval::gradient;
pub use eval::{concavity_quadform, eval_op, grad_op, Concavity, Gradient};
pub use operator::{Operator, OperatorSpec};

/// An ordered tuple of eigenvalues in dimension `n >= 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EigenTuple(Vec<f64>);

impl EigenTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Domain(format!(
                "eigen tuples need dimension n >= 3, got {}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("component {index} is not finite")));
        }
        Ok(Self(values))
    }

    /// `c * (1, ..., 1)`.
    pub fn diagonal(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self(self.0.iter().map(|x| t * x).collect())
    }

    /// `lambda + t * (1, ..., 1)`.
    pub fn shifted(&self, t: f64) -> Self {
        Self(self.0.iter().map(|x| x + t).collect())
    }

    pub fn sorted(&self) -> Self {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        Self(v)
    }
}

impl TryFrom<Vec<f64>> for EigenTuple {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<EigenTuple> for Vec<f64> {
    fn from(t: EigenTuple) -> Self {
        t.0
    }
}

impl fmt::Display for EigenTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Elementary symmetric polynomials `[sigma_0, ..., sigma_k]` of `values`.
///
/// Built by multiplying out `prod (1 + x_i t)` one factor at a time, which
/// avoids the cancellation of power-sum (Newton-Girard) formulas when the
/// entries have mixed signs.
pub(crate) fn elementary(values: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// Elementary symmetric polynomials of `values` with the entries at
/// `skip` removed.
pub(crate) fn elementary_without(values: &[f64], skip: &[usize], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    let mut used = 0;
    for (i, &x) in values.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        used += 1;
        for j in (1..=k.min(used)).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// The `k`-th elementary symmetric polynomial `sum_{i1<..<ik} lambda_i1 ... lambda_ik`.
pub fn sigma_k(lambda: &EigenTuple, k: usize) -> Result<f64> {
    let n = lambda.n();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "sigma_k needs 1 <= k <= {n}, got k = {k}"
        )));
    }
    Ok(elementary(lambda.as_slice(), k)[k])
}

/// Ricci eigenvalues `mu_i = lambda_i + sum(lambda) / (n - 2)` from Schouten
/// eigenvalues.
pub fn ricci_map(lambda: &EigenTuple) -> EigenTuple {
    let shift = ricci_delta(lambda.n()) * lambda.sum();
    lambda.shifted(shift)
}

/// `1 / (n - 2)`, the shift coefficient relating Schouten and Ricci eigenvalues.
pub fn ricci_delta(n: usize) -> f64 {
    1.0 / (n as f64 - 2.0)
}
