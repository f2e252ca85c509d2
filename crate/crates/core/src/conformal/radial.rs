use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::descriptor::Descriptor;
use crate::error::{Error, Result};

use super::field::{check_point, Bubble, Constant, Field, Inversion, Jet, Mapped, ScalarMap};
use super::{Background, ConformalProfile, Gauge};

/// Exact radial conformal factors, all in the V gauge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ExactKind {
    /// `v = c`: flat.
    Constant { c: f64 },
    /// `v = C |x|^{2-n}`: flat away from the origin.
    Inversion { c: f64 },
    /// `v = (eps / (eps^2 + r^2))^{(n-2)/2}`: Schouten eigenvalues all 2.
    Bubble { scale: f64 },
    /// The round sphere of radius `a` in stereographic coordinates,
    /// `v = (2a^2 / (a^2 + r^2))^{(n-2)/2}`.
    Sphere { radius: f64 },
}

impl ExactKind {
    fn parameter(&self) -> f64 {
        match *self {
            ExactKind::Constant { c } | ExactKind::Inversion { c } => c,
            ExactKind::Bubble { scale } => scale,
            ExactKind::Sphere { radius } => radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.parameter();
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Parameter(format!(
                "{self} needs a positive parameter"
            )));
        }
        Ok(())
    }

    /// `(v, v', v'')` at radius `r`.
    pub fn derivatives(&self, n: usize, r: f64) -> Result<(f64, f64, f64)> {
        let nf = n as f64;
        let beta = (nf - 2.0) / 2.0;
        let bubble = |eps: f64| {
            let s = eps * eps + r * r;
            let e = eps.powf(beta);
            let a = -2.0 * beta * e * s.powf(-beta - 1.0);
            (
                e * s.powf(-beta),
                a * r,
                a + 4.0 * beta * (beta + 1.0) * r * r * e * s.powf(-beta - 2.0),
            )
        };
        Ok(match *self {
            ExactKind::Constant { c } => (c, 0.0, 0.0),
            ExactKind::Inversion { c } => {
                if !(r > 0.0) {
                    return Err(Error::Domain("|x|^(2-n) is singular at r = 0".into()));
                }
                (
                    c * r.powf(2.0 - nf),
                    c * (2.0 - nf) * r.powf(1.0 - nf),
                    c * (2.0 - nf) * (1.0 - nf) * r.powf(-nf),
                )
            }
            ExactKind::Bubble { scale } => bubble(scale),
            ExactKind::Sphere { radius } => {
                let t = (2.0 * radius).powf(beta);
                let (v, d1, d2) = bubble(radius);
                (t * v, t * d1, t * d2)
            }
        })
    }

    /// The same factor as a field on `R^n`, centred at the origin.
    pub fn field(&self, n: usize) -> Result<Arc<dyn Field>> {
        self.validate()?;
        Ok(match *self {
            ExactKind::Constant { c } => Arc::new(Constant { n, c }),
            ExactKind::Inversion { c } => Arc::new(Inversion { n, c }),
            ExactKind::Bubble { scale } => Arc::new(Bubble::centered(n, scale)?),
            ExactKind::Sphere { radius } => Arc::new(Mapped {
                inner: Arc::new(Bubble::centered(n, radius)?),
                map: ScalarMap::Scale((2.0 * radius).powf((n as f64 - 2.0) / 2.0)),
            }),
        })
    }
}

impl fmt::Display for ExactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactKind::Constant { c } => write!(f, "const:c={c}"),
            ExactKind::Inversion { c } => write!(f, "inversion:C={c}"),
            ExactKind::Bubble { scale } => write!(f, "bubble:scale={scale}"),
            ExactKind::Sphere { radius } => write!(f, "sphere:radius={radius}"),
        }
    }
}

impl FromStr for ExactKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = Descriptor::parse(s, &[])?;
        let kind = match d.name.as_str() {
            "const" | "constant" => {
                d.only(&["c"])?;
                ExactKind::Constant {
                    c: d.f64_or("c", 1.0)?,
                }
            }
            "inversion" => {
                d.only(&["C", "c"])?;
                let c = match d.raw("C") {
                    Some(_) => d.f64("C")?,
                    None => d.f64_or("c", 1.0)?,
                };
                ExactKind::Inversion { c }
            }
            "bubble" => {
                d.only(&["scale"])?;
                ExactKind::Bubble {
                    scale: d.f64_or("scale", 1.0)?,
                }
            }
            "sphere" => {
                d.only(&["radius"])?;
                ExactKind::Sphere {
                    radius: d.f64_or("radius", 1.0)?,
                }
            }
            other => {
                return Err(Error::parse(
                    "profile",
                    format!("unknown profile `{other}`"),
                ));
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl TryFrom<String> for ExactKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ExactKind> for String {
    fn from(k: ExactKind) -> Self {
        k.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Samples {
    r: Vec<f64>,
    v: Vec<f64>,
    // Grid with the mirror image `(-r, v)` prepended when it starts at 0.
    ext_r: Vec<f64>,
    ext_v: Vec<f64>,
}

const STENCIL: usize = 5;

impl Samples {
    fn new(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() {
            return Err(Error::Dimension {
                expected: r.len(),
                got: v.len(),
            });
        }
        if r.len() < STENCIL {
            return Err(Error::Parameter(format!(
                "sampled profiles need at least {STENCIL} points, got {}",
                r.len()
            )));
        }
        if r.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::Parameter(
                "sampled profile has non-finite entries".into(),
            ));
        }
        if r[0] < 0.0 {
            return Err(Error::Parameter("radii must be non-negative".into()));
        }
        if let Some(i) = r.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter(format!(
                "radii must be strictly increasing (row {})",
                i + 2
            )));
        }
        let (mut ext_r, mut ext_v) = (Vec::new(), Vec::new());
        if r[0] == 0.0 {
            for i in (1..r.len()).rev() {
                ext_r.push(-r[i]);
                ext_v.push(v[i]);
            }
        }
        ext_r.extend_from_slice(&r);
        ext_v.extend_from_slice(&v);
        Ok(Self { r, v, ext_r, ext_v })
    }

    /// Value and first two derivatives from the degree-4 interpolant through
    /// the five nodes nearest to `z`.
    fn derivatives(&self, z: f64) -> (f64, f64, f64) {
        let xs = &self.ext_r;
        let idx = xs.partition_point(|&x| x < z);
        let nearest = if idx == 0 {
            0
        } else if idx == xs.len() || z - xs[idx - 1] <= xs[idx] - z {
            idx - 1
        } else {
            idx
        };
        let start = nearest.saturating_sub(STENCIL / 2).min(xs.len() - STENCIL);
        let w = fornberg_weights(z, &xs[start..start + STENCIL]);
        let mut out = [0.0; 3];
        for (j, wj) in w.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o += wj[k] * self.ext_v[start + j];
            }
        }
        (out[0], out[1], out[2])
    }
}

/// Finite-difference weights for derivatives 0, 1, 2 at `z` on arbitrary
/// nodes (Fornberg's recursion).
fn fornberg_weights(z: f64, x: &[f64]) -> Vec<[f64; 3]> {
    let m = 2;
    let mut c = vec![[0.0; 3]; x.len()];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..x.len() {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Exact(ExactKind),
    Samples(Samples),
    Mapped(Box<RadialProfile>, ScalarMap),
}

/// A radial conformal factor `f(r)` on flat `R^n` in some gauge, either
/// analytic or interpolated from samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    n: usize,
    gauge: Gauge,
    source: Source,
}

/// The exact family member as a V-gauge radial profile.
pub fn exact_profile(kind: ExactKind, n: usize) -> Result<RadialProfile> {
    RadialProfile::exact(kind, n, Gauge::V)
}

impl RadialProfile {
    /// The analytic `kind` formula read as a factor in `gauge`.
    pub fn exact(kind: ExactKind, n: usize, gauge: Gauge) -> Result<Self> {
        check_n(n)?;
        kind.validate()?;
        Ok(Self {
            n,
            gauge,
            source: Source::Exact(kind),
        })
    }

    pub fn sampled(n: usize, gauge: Gauge, r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        Ok(Self {
            n,
            gauge,
            source: Source::Samples(Samples::new(r, v)?),
        })
    }

    /// Reads the two-column `(r, v)` text format.
    pub fn from_text(text: &str, n: usize, gauge: Gauge) -> Result<Self> {
        let (r, v) = parse_two_column(text)?;
        Self::sampled(n, gauge, r, v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// `[r0, r1]`; analytic profiles extend to infinity.
    pub fn domain(&self) -> (f64, f64) {
        match &self.source {
            Source::Exact(_) => (0.0, f64::INFINITY),
            Source::Samples(s) => (s.r[0], *s.r.last().unwrap()),
            Source::Mapped(inner, _) => inner.domain(),
        }
    }

    /// Grid and values of a sampled profile.
    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.source {
            Source::Samples(s) => Some((&s.r, &s.v)),
            _ => None,
        }
    }

    /// `(f, f', f'')` at `r`.
    pub fn derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.domain();
        if !(r >= lo && r <= hi) {
            return Err(Error::Domain(format!(
                "r = {r} is outside the profile domain [{lo}, {hi}]"
            )));
        }
        match &self.source {
            Source::Exact(kind) => kind.derivatives(self.n, r),
            Source::Samples(s) => Ok(s.derivatives(r)),
            Source::Mapped(inner, map) => {
                let (f, d1, d2) = inner.derivatives(r)?;
                let (phi, p1, p2) = map.derivatives(f).ok_or_else(|| Error::Positivity {
                    value: f,
                    location: format!("r = {r}"),
                })?;
                Ok((phi, p1 * d1, p2 * d1 * d1 + p1 * d2))
            }
        }
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.derivatives(r).map(|d| d.0)
    }

    pub fn to_gauge(&self, target: Gauge) -> Self {
        match self.gauge.map_to(target, self.n) {
            None => self.clone(),
            Some(map) => Self {
                n: self.n,
                gauge: target,
                source: Source::Mapped(Box::new(self.clone()), map),
            },
        }
    }

    /// The metric of `t v` (in the V gauge).
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Parameter(format!(
                "scaling factor must be positive, got {t}"
            )));
        }
        let v = self.to_gauge(Gauge::V);
        Ok(Self {
            n: self.n,
            gauge: Gauge::V,
            source: Source::Mapped(Box::new(v), ScalarMap::Scale(t)),
        })
    }

    /// The profile as a function of `x in R^n`.
    pub fn lift(&self) -> ConformalProfile {
        ConformalProfile {
            gauge: self.gauge,
            background: Background::Flat,
            field: Arc::new(RadialField {
                profile: self.clone(),
            }),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("profiles need n >= 3, got {n}")));
    }
    Ok(())
}

/// `x -> f(|x|)`.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub profile: RadialProfile,
}

impl Field for RadialField {
    fn dim(&self) -> usize {
        self.profile.n
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let n = self.dim();
        check_point(n, x)?;
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let (f, d1, d2) = self.profile.derivatives(r)?;
        if r == 0.0 {
            return Ok(Jet {
                value: f,
                grad: DVector::zeros(n),
                hess: DMatrix::identity(n, n) * d2,
            });
        }
        let xh = DVector::from_iterator(n, x.iter().map(|c| c / r));
        let radial = &xh * xh.transpose();
        Ok(Jet {
            value: f,
            grad: &xh * d1,
            hess: &radial * d2 + (DMatrix::identity(n, n) - radial) * (d1 / r),
        })
    }
}

/// Prefactor and brackets of the radial Schouten eigenvalues:
/// `lambda_rad = pre * b_rad`, `lambda_tan = pre * b_tan`, where `d1_over_r`
/// is `v'/r` (or its limit `v''` at the origin).
pub(crate) fn radial_parts(n: usize, v: f64, d1: f64, d1_over_r: f64, d2: f64) -> (f64, f64, f64) {
    let m = n as f64 - 2.0;
    let pre = 2.0 / m * v.powf(-(n as f64 + 2.0) / m);
    let b_rad = -d2 + (n as f64 - 1.0) / m * d1 * d1 / v;
    let b_tan = -d1_over_r - d1 * d1 / (m * v);
    (pre, b_rad, b_tan)
}

/// `(lambda_rad, lambda_tan)` at radius `r`; the tangential value has
/// multiplicity `n - 1`.
pub fn radial_schouten_eigs(p: &RadialProfile, r: f64) -> Result<(f64, f64)> {
    let v = p.to_gauge(Gauge::V);
    let (f, d1, d2) = v.derivatives(r)?;
    if !(f > 0.0) {
        return Err(Error::Positivity {
            value: f,
            location: format!("r = {r}"),
        });
    }
    let d1_over_r = if r == 0.0 { d2 } else { d1 / r };
    let (pre, b_rad, b_tan) = radial_parts(p.n, f, d1, d1_over_r, d2);
    Ok((pre * b_rad, pre * b_tan))
}

/// Parses whitespace- or comma-separated `(r, v)` rows; `#` starts a comment.
pub fn parse_two_column(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut r, mut v) = (Vec::new(), Vec::new());
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let field = format!("line {}", line_no + 1);
        if cols.len() != 2 {
            return Err(Error::parse(
                field,
                format!("expected 2 columns, got {}", cols.len()),
            ));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(&field, format!("`{s}` is not a finite number")))
        };
        r.push(parse(cols[0])?);
        v.push(parse(cols[1])?);
    }
    Ok((r, v))
}

/// Writes `(r, v)` rows with 17 significant digits.
pub fn format_two_column(r: &[f64], v: &[f64]) -> String {
    let mut out = String::from("# r v\n");
    for (a, b) in r.iter().zip(v) {
        out.push_str(&format!("{a:.16e} {b:.16e}\n"));
    }
    out
}
