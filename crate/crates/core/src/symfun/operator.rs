use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cones::{gamma_check, ConeKind, ConeSpec};
use crate::descriptor::{nest, Descriptor};
use crate::error::{Error, Result, Violation};

use super::{elementary, ricci_delta, EigenTuple};

/// The catalog of curvature functions.
///
/// Textual forms: `sigma-root:k=2`, `quotient:k=2,l=1`,
/// `pucci:k=1,delta=0.25`, `inv-power`, `inv-monomial:k=3`,
/// `ricci:inner=sigma-root:k=2` and
/// `shifted:delta=0.5,inner=[sigma-root:k=2],inner2=[sigma-root:k=1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Operator {
    /// `sigma_k^{1/k}` on `Gamma_k`.
    SigmaKRoot { k: usize },
    /// `(sigma_k / sigma_l)^{1/(k-l)}` on `Gamma_k`.
    Quotient { k: usize, l: usize },
    /// `delta * sum(lambda) + (sum of the k smallest entries)` on `{f > 0}`.
    PucciMin { k: usize, delta: f64 },
    /// `(sum lambda_i^-2)^{-1/2}` on `Gamma_n`.
    InvPowerSum,
    /// `[sum over |a| = k of lambda^-a]^{-1/k}` on `Gamma_n`, i.e. the complete
    /// homogeneous symmetric polynomial of the reciprocals.
    InvMonomialSum { k: usize },
    /// `inner(lambda + delta * inner2(lambda) * e)`.
    Shifted {
        inner: Box<Operator>,
        delta: f64,
        inner2: Box<Operator>,
    },
    /// `inner` applied to the Ricci eigenvalues; the `Shifted` instance with
    /// `delta = 1/(n-2)` and `inner2 = sigma_1`.
    RicciComposite { inner: Box<Operator> },
}

impl Operator {
    /// Homogeneity degree. Every catalog member is known in closed form.
    pub fn alpha(&self) -> f64 {
        match self {
            Operator::Shifted { inner, .. } | Operator::RicciComposite { inner } => inner.alpha(),
            _ => 1.0,
        }
    }

    /// False when the function is only Lipschitz (has kinks) in dimension `n`.
    pub fn is_smooth(&self, n: usize) -> bool {
        match self {
            Operator::PucciMin { k, .. } => *k == n,
            Operator::Shifted { inner, inner2, .. } => inner.is_smooth(n) && inner2.is_smooth(n),
            Operator::RicciComposite { inner } => inner.is_smooth(n),
            _ => true,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Operator::SigmaKRoot { k } => {
                if k == 0 || k > n {
                    return Err(Error::Parameter(format!(
                        "sigma-root needs 1 <= k <= {n}, got {k}"
                    )));
                }
            }
            Operator::Quotient { k, l } => {
                if l >= k || k > n {
                    return Err(Error::Parameter(format!(
                        "quotient needs 0 <= l < k <= {n}, got k = {k}, l = {l}"
                    )));
                }
            }
            Operator::PucciMin { k, delta } => {
                if k == 0 || k > n {
                    return Err(Error::Parameter(format!(
                        "pucci needs 1 <= k <= {n}, got {k}"
                    )));
                }
                if !(delta >= 0.0 && delta.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "pucci needs delta >= 0, got {delta}"
                    )));
                }
            }
            Operator::InvPowerSum => {}
            Operator::InvMonomialSum { k } => {
                if k == 0 {
                    return Err(Error::Parameter("inv-monomial needs k >= 1".into()));
                }
            }
            Operator::Shifted {
                ref inner,
                delta,
                ref inner2,
            } => {
                if !(delta > 0.0 && delta.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "shifted needs delta > 0, got {delta}"
                    )));
                }
                if inner2.alpha() != 1.0 {
                    return Err(Error::Parameter(
                        "shifted needs inner2 homogeneous of degree 1".into(),
                    ));
                }
                inner.validate(n)?;
                inner2.validate(n)?;
            }
            Operator::RicciComposite { ref inner } => inner.validate(n)?,
        }
        Ok(())
    }

    pub(crate) fn check(&self, lambda: &[f64]) -> std::result::Result<(), Violation> {
        let n = lambda.len();
        match self {
            Operator::SigmaKRoot { k } | Operator::Quotient { k, .. } => gamma_check(lambda, *k),
            Operator::InvPowerSum | Operator::InvMonomialSum { .. } => gamma_check(lambda, n),
            Operator::PucciMin { .. } => {
                let value = self.value(lambda);
                if value > 0.0 {
                    Ok(())
                } else {
                    Err(Violation::NonPositive { value })
                }
            }
            Operator::Shifted {
                inner,
                delta,
                inner2,
            } => {
                inner2.check(lambda)?;
                let shift = delta * inner2.value(lambda);
                let mu: Vec<f64> = lambda.iter().map(|x| x + shift).collect();
                inner.check(&mu)
            }
            Operator::RicciComposite { inner } => {
                let mu = ricci_shift(lambda);
                inner.check(&mu)
            }
        }
    }

    /// Value without admissibility checks. Entries are sorted first so the
    /// result is bit-identical under permutations of `lambda`.
    pub(crate) fn value(&self, lambda: &[f64]) -> f64 {
        let mut sorted = lambda.to_vec();
        sorted.sort_by(f64::total_cmp);
        self.value_sorted(&sorted)
    }

    fn value_sorted(&self, s: &[f64]) -> f64 {
        match *self {
            Operator::SigmaKRoot { k } => elementary(s, k)[k].powf(1.0 / k as f64),
            Operator::Quotient { k, l } => {
                let e = elementary(s, k);
                (e[k] / e[l]).powf(1.0 / (k - l) as f64)
            }
            Operator::PucciMin { k, delta } => {
                let total: f64 = s.iter().sum();
                delta * total + s[..k].iter().sum::<f64>()
            }
            Operator::InvPowerSum => s.iter().map(|x| x.powi(-2)).sum::<f64>().powf(-0.5),
            Operator::InvMonomialSum { k } => {
                let recip: Vec<f64> = s.iter().map(|x| x.recip()).collect();
                complete_homogeneous(&recip, &[], k)[k].powf(-1.0 / k as f64)
            }
            Operator::Shifted {
                ref inner,
                delta,
                ref inner2,
            } => {
                // A constant shift preserves the ordering.
                let shift = delta * inner2.value_sorted(s);
                let mu: Vec<f64> = s.iter().map(|x| x + shift).collect();
                inner.value_sorted(&mu)
            }
            Operator::RicciComposite { ref inner } => inner.value_sorted(&ricci_shift(s)),
        }
    }

    /// The cone on which the function is defined and positive.
    pub fn natural_cone(&self, n: usize) -> ConeKind {
        match self {
            Operator::SigmaKRoot { k } | Operator::Quotient { k, .. } => ConeKind::GammaK { k: *k },
            Operator::InvPowerSum | Operator::InvMonomialSum { .. } => ConeKind::GammaK { k: n },
            _ => ConeKind::Positivity(Box::new(self.clone())),
        }
    }
}

pub(crate) fn ricci_shift(lambda: &[f64]) -> Vec<f64> {
    let total: f64 = lambda.iter().sum();
    let shift = ricci_delta(lambda.len()) * total;
    lambda.iter().map(|x| x + shift).collect()
}

/// Complete homogeneous symmetric polynomials `[h_0, ..., h_k]` of `x` with
/// the entries at `skip` removed.
pub(crate) fn complete_homogeneous(x: &[f64], skip: &[usize], k: usize) -> Vec<f64> {
    let mut h = vec![0.0; k + 1];
    h[0] = 1.0;
    for (i, &xi) in x.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        for j in 1..=k {
            h[j] += xi * h[j - 1];
        }
    }
    h
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::SigmaKRoot { k } => write!(f, "sigma-root:k={k}"),
            Operator::Quotient { k, l } => write!(f, "quotient:k={k},l={l}"),
            Operator::PucciMin { k, delta } => write!(f, "pucci:k={k},delta={delta}"),
            Operator::InvPowerSum => write!(f, "inv-power"),
            Operator::InvMonomialSum { k } => write!(f, "inv-monomial:k={k}"),
            Operator::Shifted {
                inner,
                delta,
                inner2,
            } => write!(
                f,
                "shifted:delta={delta},inner={},inner2={}",
                nest(&inner.to_string()),
                nest(&inner2.to_string())
            ),
            Operator::RicciComposite { inner } => write!(f, "ricci:inner={inner}"),
        }
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = Descriptor::parse(s, &["inner"])?;
        let op = match d.name.as_str() {
            "sigma-root" => {
                d.only(&["k"])?;
                Operator::SigmaKRoot { k: d.usize("k")? }
            }
            "quotient" => {
                d.only(&["k", "l"])?;
                Operator::Quotient {
                    k: d.usize("k")?,
                    l: d.usize("l")?,
                }
            }
            "pucci" => {
                d.only(&["k", "delta"])?;
                Operator::PucciMin {
                    k: d.usize("k")?,
                    delta: d.f64_or("delta", 0.0)?,
                }
            }
            "inv-power" => {
                d.only(&[])?;
                Operator::InvPowerSum
            }
            "inv-monomial" => {
                d.only(&["k"])?;
                Operator::InvMonomialSum { k: d.usize("k")? }
            }
            "ricci" => {
                d.only(&["inner"])?;
                Operator::RicciComposite {
                    inner: Box::new(d.required("inner")?.parse()?),
                }
            }
            "shifted" => {
                d.only(&["delta", "inner", "inner2"])?;
                Operator::Shifted {
                    inner: Box::new(d.required("inner")?.parse()?),
                    delta: d.f64("delta")?,
                    inner2: Box::new(d.required("inner2")?.parse()?),
                }
            }
            other => {
                return Err(Error::parse(
                    "operator",
                    format!("unknown operator `{other}`"),
                ))
            }
        };
        Ok(op)
    }
}

impl TryFrom<String> for Operator {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Operator> for String {
    fn from(op: Operator) -> Self {
        op.to_string()
    }
}

/// A catalog operator bound to a dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    op: Operator,
    n: usize,
}

impl OperatorSpec {
    pub fn new(op: Operator, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Parameter(format!("dimension must be >= 3, got {n}")));
        }
        op.validate(n)?;
        Ok(Self { op, n })
    }

    /// Parses the canonical textual form, e.g. `"quotient:k=2,l=1"`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Self::new(text.parse()?, n)
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.op.alpha()
    }

    pub fn cone(&self) -> ConeSpec {
        ConeSpec::from_parts(self.op.natural_cone(self.n), self.n)
    }

    pub(crate) fn check_dim(&self, lambda: &EigenTuple) -> Result<()> {
        if lambda.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: lambda.n(),
            });
        }
        Ok(())
    }

    /// Admissibility of `lambda`, naming the violated condition.
    pub fn admissible(&self, lambda: &EigenTuple) -> Result<()> {
        self.check_dim(lambda)?;
        self.op.check(lambda.as_slice())?;
        Ok(())
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.op.fmt(f)
    }
}
