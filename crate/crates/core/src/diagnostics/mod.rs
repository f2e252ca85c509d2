//! Quantities the a priori estimates and the compactness argument are
//! about: cut-off gradient and Hessian monitors, blow-up rescaling, the
//! Bishop-Gromov volume ratio and the Harnack exponent.

mod quadrature;
mod volume;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal::{Background, ConformalProfile, Gauge, Rescaled};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

pub use quadrature::adaptive_simpson;
pub use volume::{bishop_gromov_curve, unit_ball_volume, unit_sphere_area, VolumeRatioCurve};

/// Where a monitor evaluates the profile inside the ball `|x| < r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SampleGrid {
    /// Midpoints of `points` equal cells along the first axis. Enough for
    /// radial profiles; the origin itself is never hit.
    Ray { points: usize },
    /// The first `points` Halton points of the cube that fall in the ball.
    Halton { points: usize },
}

impl SampleGrid {
    /// Dense radial default.
    pub const RAY: SampleGrid = SampleGrid::Ray { points: 10_000 };

    pub fn points(&self, n: usize, r: f64) -> Result<Vec<Vec<f64>>> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Parameter(format!(
                "ball radius must be positive, got {r}"
            )));
        }
        match *self {
            SampleGrid::Ray { points } => {
                if points == 0 {
                    return Err(Error::Parameter("sample grid is empty".into()));
                }
                Ok((0..points)
                    .map(|i| {
                        let mut x = vec![0.0; n];
                        x[0] = r * (i as f64 + 0.5) / points as f64;
                        x
                    })
                    .collect())
            }
            SampleGrid::Halton { points } => {
                if points == 0 {
                    return Err(Error::Parameter("sample grid is empty".into()));
                }
                let bases = first_primes(n);
                let mut out = Vec::with_capacity(points);
                let mut index = 1u64;
                while out.len() < points {
                    let x: Vec<f64> = bases
                        .iter()
                        .map(|&b| r * (2.0 * radical_inverse(index, b) - 1.0))
                        .collect();
                    if x.iter().map(|c| c * c).sum::<f64>() < r * r {
                        out.push(x);
                    }
                    index += 1;
                }
                Ok(out)
            }
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut out = 0.0;
    while i > 0 {
        f /= base as f64;
        out += f * (i % base) as f64;
        i /= base;
    }
    out
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// `(1 - |x|^2/r^2)^+`.
pub fn cutoff(x: &[f64], r: f64) -> f64 {
    let s: f64 = x.iter().map(|c| c * c).sum();
    (1.0 - s / (r * r)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    /// `rho |grad v| / v`.
    Gradient,
    /// `rho^2 |u_xi xi|` over unit directions `xi`.
    Hessian,
}

/// The supremum of a cut-off monitor over a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateMonitor {
    pub kind: MonitorKind,
    pub radius: f64,
    pub samples: usize,
    pub supremum: f64,
    /// Maximizing sample point.
    pub location: Vec<f64>,
    /// Maximizing direction: the normalized gradient or Hessian eigenvector.
    pub direction: Vec<f64>,
}

fn flat_only(p: &ConformalProfile, what: &str) -> Result<()> {
    match p.background() {
        Background::Flat => Ok(()),
        b => Err(Error::Domain(format!(
            "{what} needs a flat background, got {b}"
        ))),
    }
}

/// `sup rho |grad v| / v` over the grid, with `v` the V-gauge factor.
pub fn gradient_monitor(p: &ConformalProfile, r: f64, grid: SampleGrid) -> Result<EstimateMonitor> {
    flat_only(p, "gradient monitor")?;
    let v = p.to_gauge(Gauge::V);
    let n = p.n();
    let points = grid.points(n, r)?;
    let mut best = EstimateMonitor {
        kind: MonitorKind::Gradient,
        radius: r,
        samples: points.len(),
        supremum: 0.0,
        location: points[0].clone(),
        direction: vec![0.0; n],
    };
    for x in points {
        let jet = v.jet(&x)?;
        let g = jet.grad.norm();
        let z = cutoff(&x, r) * g / jet.value;
        if z > best.supremum {
            best.supremum = z;
            best.direction = (jet.grad / g).iter().copied().collect();
            best.location = x;
        }
    }
    Ok(best)
}

/// `sup rho^2 max(|mu_max|, |mu_min|)` over the grid, with `mu` the
/// eigenvalues of the Euclidean Hessian of the U-gauge factor.
pub fn hessian_monitor(p: &ConformalProfile, r: f64, grid: SampleGrid) -> Result<EstimateMonitor> {
    flat_only(p, "Hessian monitor")?;
    let u = p.to_gauge(Gauge::U);
    let n = p.n();
    let points = grid.points(n, r)?;
    let mut best = EstimateMonitor {
        kind: MonitorKind::Hessian,
        radius: r,
        samples: points.len(),
        supremum: 0.0,
        location: points[0].clone(),
        direction: vec![0.0; n],
    };
    for x in points {
        let rho = cutoff(&x, r);
        let jet = u.jet(&x)?;
        let (values, vectors) = symmetric_eigen(jet.hess)?;
        let (i, mu) = values
            .iter()
            .enumerate()
            .map(|(i, m)| (i, m.abs()))
            .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        let z = rho * rho * mu;
        if z > best.supremum {
            best.supremum = z;
            best.direction = vectors.column(i).iter().copied().collect();
            best.location = x;
        }
    }
    Ok(best)
}

/// The blow-up dilation at `x_k`: `y -> v(x_k + y/L) / v(x_k)` with
/// `L = |grad v(x_k)| / v(x_k)`, so the result is 1 with unit gradient at
/// `y = 0`. Returned in the V gauge.
pub fn blowup_rescale(p: &ConformalProfile, x_k: &[f64]) -> Result<ConformalProfile> {
    flat_only(p, "blow-up rescaling")?;
    let v = p.to_gauge(Gauge::V);
    let jet = v.jet(x_k)?;
    let l = jet.grad.norm() / jet.value;
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Domain(format!(
            "degenerate blow-up point {x_k:?}: |grad v| / v = {l}"
        )));
    }
    ConformalProfile::new(
        Gauge::V,
        Background::Flat,
        Arc::new(Rescaled {
            inner: v.field().clone(),
            center: x_k.to_vec(),
            dilation: l,
            normalization: jet.value,
        }),
    )
}

/// `sup - inf` of the V-gauge factor over the grid in `|y| < radius`.
pub fn oscillation(p: &ConformalProfile, radius: f64, grid: SampleGrid) -> Result<f64> {
    let v = p.to_gauge(Gauge::V);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for y in grid.points(p.n(), radius)? {
        let value = v.field().value(&y)?;
        lo = lo.min(value);
        hi = hi.max(value);
    }
    Ok(hi - lo)
}

/// `beta = (1 - delta (n-2)) / (1 + delta)`, defined for
/// `0 <= delta < 1/(n-2)`.
pub fn harnack_beta(delta: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "Harnack exponent needs n >= 3, got {n}"
        )));
    }
    let beta = (1.0 - delta * (n as f64 - 2.0)) / (1.0 + delta);
    if !(delta >= 0.0) || !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "Harnack exponent needs 0 <= delta < 1/(n-2) = {}, got {delta}",
            1.0 / (n as f64 - 2.0)
        )));
    }
    Ok(beta)
}

/// `max_{i<j} |w_i - w_j| / |x_i - x_j|^beta`.
pub fn holder_check(points: &[Vec<f64>], values: &[f64], beta: f64) -> Result<f64> {
    if points.len() != values.len() {
        return Err(Error::Dimension {
            expected: points.len(),
            got: values.len(),
        });
    }
    if points.len() < 2 {
        return Err(Error::Parameter(
            "Hölder check needs at least two points".into(),
        ));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Parameter(format!(
            "Hölder exponent must be in (0, 1], got {beta}"
        )));
    }
    let mut sup = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].len() != points[j].len() {
                return Err(Error::Dimension {
                    expected: points[i].len(),
                    got: points[j].len(),
                });
            }
            let d = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if !(d > 0.0) {
                return Err(Error::Domain(format!("sample points {i} and {j} coincide")));
            }
            sup = sup.max((values[i] - values[j]).abs() / d.powf(beta));
        }
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub delta: f64,
    pub n: usize,
    pub beta: f64,
    /// Sampled Hölder seminorm, when samples were given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seminorm: Option<f64>,
}

impl HarnackReport {
    pub fn new(delta: f64, n: usize, samples: Option<(&[Vec<f64>], &[f64])>) -> Result<Self> {
        let beta = harnack_beta(delta, n)?;
        let seminorm = match samples {
            Some((x, w)) => Some(holder_check(x, w, beta)?),
            None => None,
        };
        Ok(Self {
            delta,
            n,
            beta,
            seminorm,
        })
    }
}
