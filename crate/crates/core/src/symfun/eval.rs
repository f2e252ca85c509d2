use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::operator::{complete_homogeneous, ricci_shift};
use super::{elementary, elementary_without, ricci_delta, EigenTuple, Operator, OperatorSpec};

/// Relative gap below which two candidate minimizing subsets of the Pucci
/// operator count as tied.
pub const PUCCI_TIE_TOL: f64 = 1e-12;

/// `f(lambda)` for an admissible `lambda`.
pub fn eval_op(spec: &OperatorSpec, lambda: &EigenTuple) -> Result<f64> {
    spec.admissible(lambda)?;
    Ok(spec.operator().value(lambda.as_slice()))
}

/// Partial derivatives `f_i`. For non-smooth operators at a kink one
/// subgradient is returned with `non_smooth` set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub components: Vec<f64>,
    pub non_smooth: bool,
}

pub fn grad_op(spec: &OperatorSpec, lambda: &EigenTuple) -> Result<Gradient> {
    spec.admissible(lambda)?;
    Ok(gradient(spec.operator(), lambda.as_slice()))
}

pub(crate) fn gradient(op: &Operator, lambda: &[f64]) -> Gradient {
    // Work on the sorted tuple (stable, so ties keep index order) and scatter
    // back; this keeps gradients consistent with `Operator::value`.
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| lambda[i]).collect();
    let (g, non_smooth) = gradient_sorted(op, &sorted);
    let mut components = vec![0.0; lambda.len()];
    for (pos, &i) in order.iter().enumerate() {
        components[i] = g[pos];
    }
    Gradient {
        components,
        non_smooth,
    }
}

fn gradient_sorted(op: &Operator, s: &[f64]) -> (Vec<f64>, bool) {
    let n = s.len();
    match *op {
        Operator::SigmaKRoot { k } => {
            let sk = elementary(s, k)[k];
            let kf = k as f64;
            let scale = sk.powf(1.0 / kf - 1.0) / kf;
            let g = (0..n)
                .map(|i| scale * elementary_without(s, &[i], k - 1)[k - 1])
                .collect();
            (g, false)
        }
        Operator::Quotient { k, l } => {
            let e = elementary(s, k);
            let f = (e[k] / e[l]).powf(1.0 / (k - l) as f64);
            let m = (k - l) as f64;
            let g = (0..n)
                .map(|i| {
                    let without = elementary_without(s, &[i], k - 1);
                    let dl = if l == 0 { 0.0 } else { without[l - 1] / e[l] };
                    f / m * (without[k - 1] / e[k] - dl)
                })
                .collect();
            (g, false)
        }
        Operator::PucciMin { k, delta } => {
            let g = (0..n)
                .map(|i| delta + if i < k { 1.0 } else { 0.0 })
                .collect();
            let f = delta * s.iter().sum::<f64>() + s[..k].iter().sum::<f64>();
            let tied = k < n && s[k] - s[k - 1] < PUCCI_TIE_TOL * f.abs();
            (g, tied)
        }
        Operator::InvPowerSum => {
            let total: f64 = s.iter().map(|x| x.powi(-2)).sum();
            let scale = total.powf(-1.5);
            (s.iter().map(|x| scale * x.powi(-3)).collect(), false)
        }
        Operator::InvMonomialSum { k } => {
            let x: Vec<f64> = s.iter().map(|v| v.recip()).collect();
            let h = complete_homogeneous(&x, &[], k)[k];
            let kf = k as f64;
            let scale = h.powf(-1.0 / kf - 1.0) / kf;
            let g = (0..n)
                .map(|i| {
                    let rest = complete_homogeneous(&x, &[i], k);
                    // d h_k / d x_i = sum_m m x_i^{m-1} h_{k-m}(x without i)
                    let dh: f64 = (1..=k)
                        .map(|m| m as f64 * x[i].powi(m as i32 - 1) * rest[k - m])
                        .sum();
                    scale * dh * x[i] * x[i]
                })
                .collect();
            (g, false)
        }
        Operator::Shifted {
            ref inner,
            delta,
            ref inner2,
        } => {
            let shift = delta * inner2.value(s);
            let mu: Vec<f64> = s.iter().map(|x| x + shift).collect();
            let (g1, ns1) = gradient_sorted(inner, &mu);
            let (g2, ns2) = gradient_sorted(inner2, s);
            let total: f64 = g1.iter().sum();
            let g = g1
                .iter()
                .zip(&g2)
                .map(|(a, b)| a + delta * b * total)
                .collect();
            (g, ns1 || ns2)
        }
        Operator::RicciComposite { ref inner } => {
            let mu = ricci_shift(s);
            let (g1, ns) = gradient_sorted(inner, &mu);
            let total: f64 = g1.iter().sum();
            let shift = ricci_delta(n) * total;
            (g1.iter().map(|a| a + shift).collect(), ns)
        }
    }
}

/// Second-order behavior of `f` along a direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Concavity {
    /// `b^T (D^2 f) b`; concave means `<= 0`.
    QuadForm(f64),
    /// `(f(lambda + h b) + f(lambda - h b)) / 2 - f(lambda)` for operators
    /// without a Hessian; concave means `<= 0`.
    MidpointDefect { defect: f64, step: f64 },
}

impl Concavity {
    pub fn value(&self) -> f64 {
        match *self {
            Concavity::QuadForm(q) => q,
            Concavity::MidpointDefect { defect, .. } => defect,
        }
    }
}

/// `b^T (D^2 f)(lambda) b`.
///
/// Closed form for `sigma-root`, `quotient` and `inv-power`; central
/// differences of the analytic gradient for the smooth compositions; a
/// midpoint test for the piecewise-linear Pucci family.
pub fn concavity_quadform(
    spec: &OperatorSpec,
    lambda: &EigenTuple,
    direction: &EigenTuple,
) -> Result<Concavity> {
    spec.admissible(lambda)?;
    if direction.n() != spec.n() {
        return Err(Error::Dimension {
            expected: spec.n(),
            got: direction.n(),
        });
    }
    let l = lambda.as_slice();
    let b = direction.as_slice();
    let op = spec.operator();
    if !op.is_smooth(spec.n()) {
        return midpoint_defect(op, l, b);
    }
    let q = match *op {
        Operator::SigmaKRoot { k } => {
            let (s, ds, hs) = sigma_second_order(l, b, k);
            let kf = k as f64;
            s.powf(1.0 / kf - 1.0) / kf * (hs + (1.0 / kf - 1.0) * ds * ds / s)
        }
        Operator::Quotient { k, l: low } => {
            let (sk, dk, hk) = sigma_second_order(l, b, k);
            let (sl, dl, hl) = if low == 0 {
                (1.0, 0.0, 0.0)
            } else {
                sigma_second_order(l, b, low)
            };
            let m = (k - low) as f64;
            let f = (sk / sl).powf(1.0 / m);
            let dlog = (dk / sk - dl / sl) / m;
            let hlog = (hk / sk - (dk / sk).powi(2) - hl / sl + (dl / sl).powi(2)) / m;
            f * (dlog * dlog + hlog)
        }
        Operator::InvPowerSum => {
            let total: f64 = l.iter().map(|x| x.powi(-2)).sum();
            let ds: f64 = l.iter().zip(b).map(|(x, bi)| -2.0 * x.powi(-3) * bi).sum();
            let hs: f64 = l
                .iter()
                .zip(b)
                .map(|(x, bi)| 6.0 * x.powi(-4) * bi * bi)
                .sum();
            0.75 * total.powf(-2.5) * ds * ds - 0.5 * total.powf(-1.5) * hs
        }
        _ => gradient_difference(op, l, b)?,
    };
    Ok(Concavity::QuadForm(q))
}

/// `(sigma_k, D sigma_k . b, b^T D^2 sigma_k b)`.
fn sigma_second_order(l: &[f64], b: &[f64], k: usize) -> (f64, f64, f64) {
    let n = l.len();
    let s = elementary(l, k)[k];
    let mut ds = 0.0;
    let mut hs = 0.0;
    for i in 0..n {
        ds += b[i] * elementary_without(l, &[i], k - 1)[k - 1];
        if k >= 2 {
            for j in 0..n {
                if i != j {
                    hs += b[i] * b[j] * elementary_without(l, &[i, j], k - 2)[k - 2];
                }
            }
        }
    }
    (s, ds, hs)
}

/// Largest step (halving from `h0`) that keeps `lambda +- h b` admissible.
fn admissible_step(op: &Operator, l: &[f64], b: &[f64], h0: f64) -> Result<f64> {
    let mut h = h0;
    for _ in 0..200 {
        let plus: Vec<f64> = l.iter().zip(b).map(|(x, d)| x + h * d).collect();
        let minus: Vec<f64> = l.iter().zip(b).map(|(x, d)| x - h * d).collect();
        if op.check(&plus).is_ok() && op.check(&minus).is_ok() {
            return Ok(h);
        }
        h *= 0.5;
    }
    Err(Error::Numeric("no admissible difference step".into()))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn midpoint_defect(op: &Operator, l: &[f64], b: &[f64]) -> Result<Concavity> {
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(Concavity::MidpointDefect {
            defect: 0.0,
            step: 0.0,
        });
    }
    let h = admissible_step(op, l, b, 0.1 * norm(l).max(1e-300) / bn)?;
    let plus: Vec<f64> = l.iter().zip(b).map(|(x, d)| x + h * d).collect();
    let minus: Vec<f64> = l.iter().zip(b).map(|(x, d)| x - h * d).collect();
    let defect = 0.5 * (op.value(&plus) + op.value(&minus)) - op.value(l);
    Ok(Concavity::MidpointDefect { defect, step: h })
}

fn gradient_difference(op: &Operator, l: &[f64], b: &[f64]) -> Result<f64> {
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(0.0);
    }
    let h = admissible_step(op, l, b, 1e-4 * norm(l) / bn)?;
    let plus: Vec<f64> = l.iter().zip(b).map(|(x, d)| x + h * d).collect();
    let minus: Vec<f64> = l.iter().zip(b).map(|(x, d)| x - h * d).collect();
    let gp = gradient(op, &plus).components;
    let gm = gradient(op, &minus).components;
    Ok(gp
        .iter()
        .zip(&gm)
        .zip(b)
        .map(|((p, m), bi)| (p - m) * bi)
        .sum::<f64>()
        / (2.0 * h))
}
