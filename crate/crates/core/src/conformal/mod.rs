//! Conformal factors, the conformal Hessian and Schouten eigenvalues of
//! `g = v^{4/(n-2)} g0 = u^{-2} g0 = e^{-2w} g0` over a flat or round
//! background, plus the Kelvin transform and radial reductions.
//!
//! The round sphere of radius `a` is handled in stereographic coordinates,
//! `g_S = e^{2 phi} delta` with `e^phi = 2a^2 / (a^2 + |x|^2)`, so every
//! computation is flat-chart calculus plus explicit Christoffel terms.

mod field;
mod radial;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::linalg::sorted_eigenvalues;
use crate::symfun::EigenTuple;

pub(crate) use field::{check_point, location};
pub use field::{Bubble, Constant, Field, Inversion, Jet, Kelvin, Mapped, Rescaled, ScalarMap};
pub(crate) use radial::radial_parts;
pub use radial::{
    exact_profile, format_two_column, parse_two_column, radial_schouten_eigs, ExactKind,
    RadialField, RadialProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Background {
    /// `g0 = delta`, `A_{g0} = 0`.
    Flat,
    /// Round sphere of the given radius, `A_{g0} = g0 / (2 a^2)`.
    RoundSphere { radius: f64 },
}

impl Background {
    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Parameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Background::RoundSphere { radius })
    }

    /// `c` with `A_{g0} = c g0`.
    pub fn schouten_constant(&self) -> f64 {
        match *self {
            Background::Flat => 0.0,
            Background::RoundSphere { radius } => 0.5 / (radius * radius),
        }
    }

    /// `(e^{-2 phi}, grad phi)` of the chart metric `g0 = e^{2 phi} delta`.
    fn chart(&self, x: &[f64]) -> (f64, DVector<f64>) {
        match *self {
            Background::Flat => (1.0, DVector::zeros(x.len())),
            Background::RoundSphere { radius } => {
                let a2 = radius * radius;
                let s = a2 + x.iter().map(|c| c * c).sum::<f64>();
                let e = 2.0 * a2 / s;
                let grad = DVector::from_iterator(x.len(), x.iter().map(|c| -2.0 * c / s));
                (1.0 / (e * e), grad)
            }
        }
    }
}

impl fmt::Display for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Background::Flat => write!(f, "flat"),
            Background::RoundSphere { radius } => write!(f, "sphere:radius={radius}"),
        }
    }
}

impl FromStr for Background {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = Descriptor::parse(s, &[])?;
        match d.name.as_str() {
            "flat" => {
                d.only(&[])?;
                Ok(Background::Flat)
            }
            "sphere" => {
                d.only(&["radius"])?;
                Background::sphere(d.f64_or("radius", 1.0)?)
            }
            other => Err(Error::parse(
                "background",
                format!("unknown background `{other}`"),
            )),
        }
    }
}

impl TryFrom<String> for Background {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Background> for String {
    fn from(b: Background) -> Self {
        b.to_string()
    }
}

/// How a conformal factor parametrizes the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    /// `g = v^{4/(n-2)} g0`.
    V,
    /// `g = u^{-2} g0`.
    U,
    /// `g = e^{-2w} g0`.
    W,
}

impl Gauge {
    /// Pointwise map taking a factor in `self` to the same metric in `target`.
    pub fn map_to(self, target: Gauge, n: usize) -> Option<ScalarMap> {
        let m = n as f64 - 2.0;
        match (self, target) {
            (Gauge::V, Gauge::U) => Some(ScalarMap::Power(-2.0 / m)),
            (Gauge::U, Gauge::V) => Some(ScalarMap::Power(-m / 2.0)),
            (Gauge::U, Gauge::W) => Some(ScalarMap::Log(1.0)),
            (Gauge::W, Gauge::U) => Some(ScalarMap::Exp(1.0)),
            (Gauge::V, Gauge::W) => Some(ScalarMap::Log(-2.0 / m)),
            (Gauge::W, Gauge::V) => Some(ScalarMap::Exp(-m / 2.0)),
            _ => None,
        }
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gauge::V => "v",
            Gauge::U => "u",
            Gauge::W => "w",
        })
    }
}

impl FromStr for Gauge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "v" | "V" => Ok(Gauge::V),
            "u" | "U" => Ok(Gauge::U),
            "w" | "W" => Ok(Gauge::W),
            other => Err(Error::parse(
                "gauge",
                format!("expected v, u or w, got `{other}`"),
            )),
        }
    }
}

/// A conformal factor in some gauge over a background geometry.
#[derive(Debug, Clone)]
pub struct ConformalProfile {
    gauge: Gauge,
    background: Background,
    field: Arc<dyn Field>,
}

impl ConformalProfile {
    pub fn new(gauge: Gauge, background: Background, field: Arc<dyn Field>) -> Result<Self> {
        if field.dim() < 3 {
            return Err(Error::Domain(format!(
                "conformal profiles need n >= 3, got {}",
                field.dim()
            )));
        }
        if let Background::RoundSphere { radius } = background {
            Background::sphere(radius)?;
        }
        Ok(Self {
            gauge,
            background,
            field,
        })
    }

    pub fn flat(gauge: Gauge, field: impl Field + 'static) -> Result<Self> {
        Self::new(gauge, Background::Flat, Arc::new(field))
    }

    pub fn n(&self) -> usize {
        self.field.dim()
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn background(&self) -> Background {
        self.background
    }

    pub fn field(&self) -> &Arc<dyn Field> {
        &self.field
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        self.field.jet(x)
    }

    /// The same metric in another gauge.
    pub fn to_gauge(&self, target: Gauge) -> Self {
        match self.gauge.map_to(target, self.n()) {
            None => self.clone(),
            Some(map) => Self {
                gauge: target,
                background: self.background,
                field: Arc::new(Mapped {
                    inner: self.field.clone(),
                    map,
                }),
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
            field: Arc::new(Mapped {
                inner: v.field,
                map: ScalarMap::Scale(t),
            }),
            ..v
        })
    }
}

/// Same metric, different gauge.
pub fn gauge_convert(p: &ConformalProfile, target: Gauge) -> ConformalProfile {
    p.to_gauge(target)
}

/// `v*(x) = |x|^{2-n} v(x/|x|^2)`, as a V-gauge profile on flat space.
pub fn kelvin(p: &ConformalProfile) -> Result<ConformalProfile> {
    if p.background != Background::Flat {
        return Err(Error::Domain(
            "the Kelvin transform needs a flat background".into(),
        ));
    }
    let v = p.to_gauge(Gauge::V);
    ConformalProfile::new(
        Gauge::V,
        Background::Flat,
        Arc::new(Kelvin { inner: v.field }),
    )
}

/// Covariant Hessian of `f` in the chart metric `e^{2 phi} delta`.
fn covariant_hessian(j: &Jet, dphi: &DVector<f64>) -> DMatrix<f64> {
    let n = j.grad.len();
    let cross = dphi * j.grad.transpose();
    &j.hess - &cross - cross.transpose() + DMatrix::identity(n, n) * dphi.dot(&j.grad)
}

fn positive(j: &Jet, x: &[f64]) -> Result<()> {
    if j.value > 0.0 {
        Ok(())
    } else {
        Err(Error::Positivity {
            value: j.value,
            location: location(x),
        })
    }
}

/// `-Hess v + n/(n-2) dv (x) dv / v - 1/(n-2) |dv|^2 / v g0`, returned as the
/// endomorphism `g0^{-1} (...)` so that its eigenvalues are taken with
/// respect to `g0` (on flat space this is the plain matrix).
pub fn conformal_hessian_matrix(p: &ConformalProfile, x: &[f64]) -> Result<DMatrix<f64>> {
    let v = p.to_gauge(Gauge::V);
    let n = p.n();
    check_point(n, x)?;
    let j = v.jet(x)?;
    positive(&j, x)?;
    Ok(conformal_hessian_of(&j, p.background, x))
}

fn conformal_hessian_of(j: &Jet, background: Background, x: &[f64]) -> DMatrix<f64> {
    let n = j.grad.len();
    let nf = n as f64;
    let (inv, dphi) = background.chart(x);
    let hess = covariant_hessian(j, &dphi);
    let outer = &j.grad * j.grad.transpose();
    let h = -hess + outer * (nf / (nf - 2.0) / j.value)
        - DMatrix::identity(n, n) * (j.grad.norm_squared() / ((nf - 2.0) * j.value));
    h * inv
}

/// Eigenvalues of the Schouten tensor of `g` with respect to `g`, ascending.
pub fn schouten_eigs(p: &ConformalProfile, x: &[f64]) -> Result<EigenTuple> {
    let n = p.n();
    check_point(n, x)?;
    let nf = n as f64;
    let c0 = p.background.schouten_constant();
    let j = p.jet(x)?;
    let eigs = match p.gauge {
        Gauge::V => {
            positive(&j, x)?;
            let h = conformal_hessian_of(&j, p.background, x);
            let pre = 2.0 / (nf - 2.0) * j.value.powf(-(nf + 2.0) / (nf - 2.0));
            let shift = 0.5 * (nf - 2.0) * j.value * c0;
            sorted_eigenvalues(h)?
                .into_iter()
                .map(|e| pre * (e + shift))
                .collect()
        }
        Gauge::U => {
            positive(&j, x)?;
            let (inv, dphi) = p.background.chart(x);
            let m = covariant_hessian(&j, &dphi) * j.value
                - DMatrix::identity(n, n) * (0.5 * j.grad.norm_squared());
            let shift = j.value * j.value * c0;
            sorted_eigenvalues(m * inv)?
                .into_iter()
                .map(|e| e + shift)
                .collect()
        }
        Gauge::W => {
            let (inv, dphi) = p.background.chart(x);
            let m = covariant_hessian(&j, &dphi) + &j.grad * j.grad.transpose()
                - DMatrix::identity(n, n) * (0.5 * j.grad.norm_squared());
            let e2w = (2.0 * j.value).exp();
            sorted_eigenvalues(m * inv)?
                .into_iter()
                .map(|e| e2w * (e + c0))
                .collect()
        }
    };
    EigenTuple::new(eigs).map_err(|e| Error::Numeric(format!("Schouten eigenvalues: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(t: &EigenTuple) -> f64 {
        t.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn constant_is_flat() {
        let p = ConformalProfile::flat(Gauge::V, Constant { n: 4, c: 3.0 }).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(
            conformal_hessian_matrix(&p, &x).unwrap(),
            DMatrix::zeros(4, 4)
        );
        assert_eq!(max_abs(&schouten_eigs(&p, &x).unwrap()), 0.0);
    }

    #[test]
    fn bubble_hessian_at_unit_radius() {
        let p = ConformalProfile::flat(Gauge::V, Bubble::centered(4, 1.0).unwrap()).unwrap();
        let x = [1.0, 0.0, 0.0, 0.0];
        let h = conformal_hessian_matrix(&p, &x).unwrap();
        let eigs = sorted_eigenvalues(h).unwrap();
        for e in eigs {
            assert!((e - 0.25).abs() < 1e-14, "{e}");
        }
        for e in schouten_eigs(&p, &x).unwrap().as_slice() {
            assert!((e - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn unit_sphere_constant_factor() {
        for n in 3..=6 {
            let bg = Background::sphere(1.0).unwrap();
            let p = ConformalProfile::new(Gauge::V, bg, Arc::new(Constant { n, c: 1.0 })).unwrap();
            let x: Vec<f64> = (0..n).map(|i| 0.3 * i as f64 - 0.4).collect();
            for e in schouten_eigs(&p, &x).unwrap().as_slice() {
                assert!((e - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gauge_values() {
        let p = ConformalProfile::flat(Gauge::V, Inversion { n: 5, c: 1.0 }).unwrap();
        let x = [0.3, -0.2, 0.5, 0.1, 0.7];
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let u = p.to_gauge(Gauge::U).jet(&x).unwrap().value;
        assert!((u - r2).abs() < 1e-14 * r2);
        let one = ConformalProfile::flat(Gauge::V, Constant { n: 5, c: 1.0 }).unwrap();
        assert_eq!(one.to_gauge(Gauge::U).jet(&x).unwrap().value, 1.0);
        assert_eq!(one.to_gauge(Gauge::W).jet(&x).unwrap().value, 0.0);
    }

    #[test]
    fn nonpositive_factor_is_rejected() {
        let p = ConformalProfile::flat(Gauge::V, Constant { n: 3, c: -1.0 }).unwrap();
        assert!(matches!(
            schouten_eigs(&p, &[0.0; 3]),
            Err(Error::Positivity { .. })
        ));
        assert!(matches!(
            schouten_eigs(&p.to_gauge(Gauge::U), &[0.0; 3]),
            Err(Error::Positivity { .. })
        ));
    }

    #[test]
    fn descriptors() {
        assert_eq!("flat".parse::<Background>().unwrap(), Background::Flat);
        assert_eq!(
            "sphere:radius=2".parse::<Background>().unwrap(),
            Background::RoundSphere { radius: 2.0 }
        );
        assert!("sphere:radius=0".parse::<Background>().is_err());
        assert_eq!("u".parse::<Gauge>().unwrap(), Gauge::U);
    }
}
