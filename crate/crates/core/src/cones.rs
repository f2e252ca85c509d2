//! Admissible cones: the Garding cones `Gamma_k`, the Ricci-type cones
//! `Sigma_delta`, and the positivity set `{f > 0}` of a catalog operator.
//!
//! All cones are open, convex, permutation-symmetric and contain the positive
//! diagonal ray, so membership along `lambda + t e` is monotone in `t`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::descriptor::Descriptor;
use crate::error::{Error, Result, Violation};
use crate::symfun::{elementary, EigenTuple, Operator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConeKind {
    /// `sigma_j > 0` for `j = 1..=k`.
    GammaK { k: usize },
    /// `min lambda_i + delta * sum lambda_i > 0`.
    SigmaDelta { delta: f64 },
    /// Where the operator is defined and positive.
    Positivity(Box<Operator>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    kind: ConeKind,
    n: usize,
}

impl ConeSpec {
    pub fn new(kind: ConeKind, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Parameter(format!("dimension must be >= 3, got {n}")));
        }
        match &kind {
            ConeKind::GammaK { k } if *k == 0 || *k > n => {
                return Err(Error::Parameter(format!(
                    "gamma needs 1 <= k <= {n}, got {k}"
                )));
            }
            ConeKind::SigmaDelta { delta } if !(*delta >= 0.0 && delta.is_finite()) => {
                return Err(Error::Parameter(format!(
                    "sigma needs delta >= 0, got {delta}"
                )));
            }
            ConeKind::Positivity(op) => {
                crate::symfun::OperatorSpec::new((**op).clone(), n)?;
            }
            _ => {}
        }
        Ok(Self { kind, n })
    }

    pub(crate) fn from_parts(kind: ConeKind, n: usize) -> Self {
        Self { kind, n }
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Self::new(text.parse()?, n)
    }

    pub fn gamma(k: usize, n: usize) -> Result<Self> {
        Self::new(ConeKind::GammaK { k }, n)
    }

    pub fn sigma(delta: f64, n: usize) -> Result<Self> {
        Self::new(ConeKind::SigmaDelta { delta }, n)
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Membership with the violated condition on failure. Strict
    /// inequalities, no tolerance.
    pub fn check(&self, lambda: &[f64]) -> std::result::Result<(), Violation> {
        if let Some(index) = lambda.iter().position(|x| !x.is_finite()) {
            return Err(Violation::NonFinite { index });
        }
        match &self.kind {
            ConeKind::GammaK { k } => gamma_check(lambda, *k),
            ConeKind::SigmaDelta { delta } => {
                let margin = sigma_delta_margin(lambda, *delta);
                if margin > 0.0 {
                    Ok(())
                } else {
                    Err(Violation::SigmaDelta { margin })
                }
            }
            ConeKind::Positivity(op) => op.check(lambda),
        }
    }

    pub(crate) fn contains_slice(&self, lambda: &[f64]) -> bool {
        self.check(lambda).is_ok()
    }

    fn check_dim(&self, lambda: &EigenTuple) -> Result<()> {
        if lambda.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: lambda.n(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for ConeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeKind::GammaK { k } => write!(f, "gamma:k={k}"),
            ConeKind::SigmaDelta { delta } => write!(f, "sigma:delta={delta}"),
            ConeKind::Positivity(op) => write!(f, "positive:op={op}"),
        }
    }
}

impl fmt::Display for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl FromStr for ConeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = Descriptor::parse(s, &["op"])?;
        match d.name.as_str() {
            "gamma" => {
                d.only(&["k"])?;
                Ok(ConeKind::GammaK { k: d.usize("k")? })
            }
            "sigma" => {
                d.only(&["delta"])?;
                Ok(ConeKind::SigmaDelta {
                    delta: d.f64("delta")?,
                })
            }
            "positive" => {
                d.only(&["op"])?;
                Ok(ConeKind::Positivity(Box::new(d.required("op")?.parse()?)))
            }
            other => Err(Error::parse("cone", format!("unknown cone `{other}`"))),
        }
    }
}

impl TryFrom<String> for ConeKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConeKind> for String {
    fn from(c: ConeKind) -> Self {
        c.to_string()
    }
}

/// First `j <= k` with `sigma_j(lambda) <= 0`, if any.
pub(crate) fn gamma_check(lambda: &[f64], k: usize) -> std::result::Result<(), Violation> {
    let mut sorted = lambda.to_vec();
    sorted.sort_by(f64::total_cmp);
    let e = elementary(&sorted, k);
    match (1..=k).find(|&j| !(e[j] > 0.0)) {
        Some(j) => Err(Violation::Sigma { j, value: e[j] }),
        None => Ok(()),
    }
}

/// `min lambda_i + delta * sum lambda_i`.
pub fn sigma_delta_margin(lambda: &[f64], delta: f64) -> f64 {
    let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let total: f64 = lambda.iter().sum();
    min + delta * total
}

pub fn cone_contains(cone: &ConeSpec, lambda: &EigenTuple) -> Result<bool> {
    cone.check_dim(lambda)?;
    Ok(cone.contains_slice(lambda.as_slice()))
}

/// The `t*` with `lambda + t* (1,...,1)` on the cone boundary; negative when
/// `lambda` is interior.
///
/// Closed form for `Sigma_delta`. For the other cones membership is monotone
/// along the diagonal, so the crossing is bracketed between `-max lambda`
/// (outside `Gamma_1`) and a shift that makes every entry positive (inside
/// `Gamma_n`), then bisected to floating-point resolution.
pub fn boundary_shift(cone: &ConeSpec, lambda: &EigenTuple) -> Result<f64> {
    cone.check_dim(lambda)?;
    Ok(boundary_shift_slice(cone, lambda.as_slice()))
}

pub(crate) fn boundary_shift_slice(cone: &ConeSpec, lambda: &[f64]) -> f64 {
    let n = lambda.len() as f64;
    if let ConeKind::SigmaDelta { delta } = cone.kind {
        return -sigma_delta_margin(lambda, delta) / (1.0 + n * delta);
    }
    let max = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    if max == min {
        return -max;
    }
    let shifted = |t: f64| -> Vec<f64> { lambda.iter().map(|x| x + t).collect() };
    let mut lo = -max;
    let mut hi = -min + (max - min);
    debug_assert!(!cone.contains_slice(&shifted(lo)));
    while !cone.contains_slice(&shifted(hi)) {
        hi += (max - min).max(hi.abs());
    }
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if cone.contains_slice(&shifted(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Draws a point of the cone: a standard Gaussian is moved along the
/// diagonal onto the boundary, then pushed inside by a uniform fraction of
/// its own norm, so samples cover every distance from the boundary.
pub fn sample_cone<R: Rng + ?Sized>(cone: &ConeSpec, rng: &mut R) -> EigenTuple {
    loop {
        let g: Vec<f64> = (0..cone.n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let t = boundary_shift_slice(cone, &g);
        let u: f64 = 1.0 - rng.random::<f64>();
        let lambda: Vec<f64> = g.iter().map(|x| x + t + u * norm).collect();
        if cone.contains_slice(&lambda) {
            return EigenTuple::new(lambda).expect("finite sample");
        }
    }
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `delta = (n-k) / (n(k-1))`, the constant with `Gamma_k` inside `Sigma_delta`.
pub fn inclusion_delta(k: usize, n: usize) -> Result<f64> {
    if k < 2 || k > n {
        return Err(Error::Domain(format!(
            "inclusion constant needs 2 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    Ok((n - k) as f64 / (n * (k - 1)) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub k: usize,
    pub n: usize,
    pub delta: f64,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `min lambda_i + delta * sum lambda_i` seen.
    pub worst_margin: f64,
    /// Smallest margin divided by `|lambda|`.
    pub worst_relative_margin: f64,
}

/// Samples `Gamma_k` and counts points outside `Sigma_{(n-k)/(n(k-1))}`.
pub fn gamma_sigma_inclusion_test(
    k: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<InclusionReport> {
    let delta = inclusion_delta(k, n)?;
    let cone = ConeSpec::gamma(k, n)?;
    let mut rng = rng_from_seed(seed);
    let mut violations = 0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_relative_margin = f64::INFINITY;
    for _ in 0..samples {
        let lambda = sample_cone(&cone, &mut rng);
        let margin = sigma_delta_margin(lambda.as_slice(), delta);
        if !(margin > 0.0) {
            violations += 1;
        }
        let norm = lambda.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        worst_margin = worst_margin.min(margin);
        worst_relative_margin = worst_relative_margin.min(margin / norm);
    }
    Ok(InclusionReport {
        k,
        n,
        delta,
        samples,
        violations,
        worst_margin,
        worst_relative_margin,
    })
}

/// Smallest `k` with `k > n/2`; from there on `Gamma_k` forces positive
/// Ricci curvature.
pub fn min_k_positive_ricci(n: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension must be >= 3, got {n}")));
    }
    Ok(n / 2 + 1)
}
