use std::f64::consts::PI;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::quadrature::adaptive_simpson;
use crate::conformal::{Gauge, RadialProfile};
use crate::error::{Error, Result};

/// Relative quadrature tolerance for both integrals.
const QUAD_TOL: f64 = 1e-10;
/// Radii within this relative distance of the largest reachable geodesic
/// radius are treated as reaching it.
const REACH_TOL: f64 = 1e-8;
/// Number of dyadic pieces `[1 - 2^{1-j}, 1 - 2^{-j}]` covering an infinite
/// domain; the last end point is at `t ~ 1e15`.
const DYADIC: usize = 50;
const FINITE_PIECES: usize = 32;

/// `omega_n`, the volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

/// The area of the unit sphere `S^{n-1}` bounding the unit ball of `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Sampled `Q(r) = Vol_g(B(0, r)) / (omega_n r^n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRatioCurve {
    pub n: usize,
    /// `(r, Q(r))` in the order requested.
    pub points: Vec<(f64, f64)>,
}

impl VolumeRatioCurve {
    /// `r,Q` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,Q\n");
        for (r, q) in &self.points {
            writeln!(out, "{r:.16e},{q:.16e}").unwrap();
        }
        out
    }

    /// Checks `Q` along increasing `r`.
    pub fn is_non_increasing(&self) -> bool {
        self.sorted().windows(2).all(|w| w[1].1 <= w[0].1)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.sorted().windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// `Q(0+)`, extrapolated by the quadratic in `r^2` through the three
    /// smallest radii.
    pub fn small_ball_limit(&self) -> Result<f64> {
        let pts = self.sorted();
        if pts.len() < 3 {
            return Err(Error::Parameter(
                "extrapolation needs at least three radii".into(),
            ));
        }
        let x: Vec<f64> = pts[..3].iter().map(|p| p.0 * p.0).collect();
        let mut limit = 0.0;
        for i in 0..3 {
            let mut w = 1.0;
            for j in 0..3 {
                if j != i {
                    w *= x[j] / (x[j] - x[i]);
                }
            }
            limit += w * pts[i].1;
        }
        Ok(limit)
    }

    fn sorted(&self) -> Vec<(f64, f64)> {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    }
}

/// The metric `g = u^{-2} g_e` of a U-gauge radial profile; other gauges
/// are converted first.
struct RadialMetric {
    u: RadialProfile,
    n: usize,
    /// Quadrature variable `tau` maps to `t = tau / (1 - tau)`.
    infinite: bool,
    /// Piece boundaries in `tau`.
    breaks: Vec<f64>,
    /// Geodesic radius at each break.
    radius: Vec<f64>,
}

impl RadialMetric {
    fn new(p: &RadialProfile) -> Result<Self> {
        let u = p.to_gauge(Gauge::U);
        let (lo, hi) = u.domain();
        if lo != 0.0 {
            return Err(Error::Domain(format!(
                "volume ratio needs a profile defined from r = 0, domain starts at {lo}"
            )));
        }
        let infinite = hi.is_infinite();
        let breaks: Vec<f64> = if infinite {
            (0..=DYADIC).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect()
        } else {
            (0..=FINITE_PIECES)
                .map(|j| {
                    if j == FINITE_PIECES {
                        hi
                    } else {
                        hi * j as f64 / FINITE_PIECES as f64
                    }
                })
                .collect()
        };
        let mut metric = Self {
            n: u.n(),
            u,
            infinite,
            breaks,
            radius: vec![0.0],
        };
        for w in metric.breaks.clone().windows(2) {
            let piece = adaptive_simpson(|tau| metric.length_density(tau), w[0], w[1], QUAD_TOL)?;
            let last = *metric.radius.last().unwrap();
            metric.radius.push(last + piece);
        }
        Ok(metric)
    }

    /// `(t, dt/dtau)`.
    fn chart(&self, tau: f64) -> (f64, f64) {
        if self.infinite {
            let s = 1.0 - tau;
            (tau / s, 1.0 / (s * s))
        } else {
            (tau, 1.0)
        }
    }

    fn factor(&self, t: f64) -> Result<f64> {
        let u = self.u.value(t)?;
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::Positivity {
                value: u,
                location: format!("r = {t}"),
            });
        }
        Ok(u)
    }

    fn length_density(&self, tau: f64) -> Result<f64> {
        let (t, dt) = self.chart(tau);
        Ok(dt / self.factor(t)?)
    }

    fn volume_density(&self, tau: f64) -> Result<f64> {
        let (t, dt) = self.chart(tau);
        Ok(dt * t.powi(self.n as i32 - 1) / self.factor(t)?.powi(self.n as i32))
    }

    /// The chart parameter `tau` at which the geodesic radius equals `r`.
    fn invert(&self, r: f64) -> Result<f64> {
        let reach = *self.radius.last().unwrap();
        if r >= reach {
            if r <= reach * (1.0 + REACH_TOL) {
                return Ok(*self.breaks.last().unwrap());
            }
            return Err(Error::Domain(format!(
                "geodesic radius {r} is beyond the reachable radius {reach}"
            )));
        }
        let j = self.radius.partition_point(|&s| s <= r) - 1;
        let (mut lo, mut hi) = (self.breaks[j], self.breaks[j + 1]);
        let base = self.radius[j];
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let s = base
                + adaptive_simpson(
                    |tau| self.length_density(tau),
                    self.breaks[j],
                    mid,
                    QUAD_TOL,
                )?;
            if s < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn ball_volume(&self, r: f64) -> Result<f64> {
        let tau = self.invert(r)?;
        let mut vol = 0.0;
        for w in self.breaks.windows(2) {
            if w[0] >= tau {
                break;
            }
            vol += adaptive_simpson(|s| self.volume_density(s), w[0], w[1].min(tau), QUAD_TOL)?;
        }
        Ok(unit_sphere_area(self.n) * vol)
    }
}

/// `Q(r)` for the metric `u^{-2} g_e` of a radial profile (converted to the
/// U gauge), at geodesic radii `r` around the origin.
pub fn bishop_gromov_curve(p: &RadialProfile, radii: &[f64]) -> Result<VolumeRatioCurve> {
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::Parameter(format!("radii must be positive, got {r}")));
    }
    let metric = RadialMetric::new(p)?;
    let n = metric.n;
    let points = radii
        .iter()
        .map(|&r| {
            let vol = metric.ball_volume(r)?;
            Ok((r, vol / (unit_ball_volume(n) * r.powi(n as i32))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VolumeRatioCurve { n, points })
}
