//! Damped Newton solver for radial two-point problems
//! `f(lambda(A^v)) = phi(r) v^q` on a uniform grid.
//!
//! Interior rows use 3-point central differences, so the Jacobian is
//! tridiagonal. At `r0 = 0` a symmetry condition uses the ghost node
//! `v_{-1} = v_1`, and the tangential eigenvalue takes its limit `v'/r -> v''`.
//! Steps are halved until every node keeps at least 10% of its previous
//! cone margin and the residual max-norm strictly decreases.

mod config;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cones::{boundary_shift_slice, ConeSpec};
use crate::conformal::{format_two_column, radial_parts, ExactKind};
use crate::error::{Error, Result, Violation};
use crate::linalg::Tridiagonal;
use crate::symfun::{gradient, Operator, OperatorSpec};

pub use config::{Boundary, InitialGuess, Rhs, SolverConfig, Tolerances};

/// Nodes keep at least this fraction of their previous margin.
const MARGIN_RETENTION: f64 = 0.1;

/// Residual of a grid profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub values: Vec<f64>,
    pub max_norm: f64,
    /// Cone margin `-boundary_shift` per node; `None` on Dirichlet rows.
    pub margins: Vec<Option<f64>>,
    /// First node whose eigenvalues leave the cone. The residual is still
    /// filled in there with `f` evaluated by its formula, but Newton must
    /// not accept such a profile.
    pub invalid: Option<InvalidNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvalidNode {
    pub node: usize,
    #[serde(with = "violation_text")]
    pub violation: Violation,
}

mod violation_text {
    use serde::{Deserializer, Serializer};

    use crate::error::Violation;

    pub fn serialize<S: Serializer>(v: &Violation, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(_: D) -> Result<Violation, D::Error> {
        Err(serde::de::Error::custom("violations are output only"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// No damping factor down to the minimum step was acceptable.
    DampingUnderflow,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonStep {
    /// Residual max-norm after the step.
    pub residual: f64,
    pub damping: f64,
    /// Smallest node margin after the step.
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub n: usize,
    pub operator: String,
    pub exponent: f64,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub residual: f64,
    /// Residual max-norm of the initial guess.
    pub initial_residual: f64,
    pub history: Vec<NewtonStep>,
    pub margins: Vec<Option<f64>>,
    pub converged: bool,
    pub status: SolveStatus,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// The profile in the two-column `(r, v)` format.
    pub fn profile_text(&self) -> String {
        format_two_column(&self.r, &self.v)
    }

    /// `max_i |v_i - exact(r_i)|`.
    pub fn sup_error(&self, exact: ExactKind) -> Result<f64> {
        let mut err: f64 = 0.0;
        for (r, v) in self.r.iter().zip(&self.v) {
            err = err.max((v - exact.derivatives(self.n, *r)?.0).abs());
        }
        Ok(err)
    }
}

/// A validated configuration with everything resolved to numbers.
#[derive(Debug, Clone)]
pub struct Discretization {
    spec: OperatorSpec,
    cone: ConeSpec,
    r: Vec<f64>,
    h: f64,
    phi: Vec<f64>,
    q: f64,
    exponent: f64,
    left: Boundary,
    right: f64,
    tolerances: Tolerances,
}

impl Discretization {
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        let spec = cfg.operator_spec()?;
        let cone = cfg.cone_spec()?;
        let [r0, r1] = cfg.domain;
        if !(r0 >= 0.0 && r1 > r0 && r1.is_finite()) {
            return Err(Error::Parameter(format!(
                "domain needs r1 > r0 >= 0, got [{r0}, {r1}]"
            )));
        }
        if cfg.grid < 16 {
            return Err(Error::Parameter(format!(
                "grid needs N >= 16, got {}",
                cfg.grid
            )));
        }
        let tol = cfg.tolerances;
        if !(tol.residual > 0.0) || !(tol.min_step > 0.0 && tol.min_step <= 1.0) {
            return Err(Error::Parameter(
                "tolerances must be positive, min_step <= 1".into(),
            ));
        }
        match cfg.left {
            Boundary::Symmetry if r0 != 0.0 => {
                return Err(Error::Parameter("symmetry condition needs r0 = 0".into()));
            }
            Boundary::Dirichlet(a) if !(a > 0.0) => {
                return Err(Error::Parameter(format!(
                    "boundary value must be positive, got {a}"
                )));
            }
            _ => {}
        }
        let right = match cfg.right {
            Boundary::Dirichlet(b) if b > 0.0 => b,
            Boundary::Dirichlet(b) => {
                return Err(Error::Parameter(format!(
                    "boundary value must be positive, got {b}"
                )));
            }
            Boundary::Symmetry => {
                return Err(Error::Parameter(
                    "the right end needs a Dirichlet value".into(),
                ));
            }
        };
        let r = cfg.nodes();
        let phi: Vec<f64> = r.iter().map(|&x| cfg.rhs.eval(x)).collect();
        if let Some(i) = phi.iter().position(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::Parameter(format!(
                "rhs must be positive, got {} at r = {}",
                phi[i], r[i]
            )));
        }
        let exponent = cfg.exponent()?;
        if !exponent.is_finite() {
            return Err(Error::Parameter("exponent must be finite".into()));
        }
        Ok(Self {
            q: exponent - cfg.natural_exponent()?,
            exponent,
            h: (r1 - r0) / cfg.grid as f64,
            spec,
            cone,
            r,
            phi,
            left: cfg.left,
            right,
            tolerances: tol,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn op(&self) -> &Operator {
        self.spec.operator()
    }

    fn n(&self) -> usize {
        self.spec.n()
    }

    /// Whether row `i` carries the PDE (as opposed to a Dirichlet defect).
    fn is_pde_row(&self, i: usize) -> bool {
        if i + 1 == self.len() {
            return false;
        }
        i > 0 || self.left == Boundary::Symmetry
    }

    /// Finite differences `(d1, d1/r or its limit, d2)` at a PDE row.
    fn differences(&self, v: &[f64], i: usize) -> (f64, f64, f64) {
        let h = self.h;
        if i == 0 {
            let d2 = 2.0 * (v[1] - v[0]) / (h * h);
            (0.0, d2, d2)
        } else {
            let d1 = (v[i + 1] - v[i - 1]) / (2.0 * h);
            let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
            (d1, d1 / self.r[i], d2)
        }
    }

    fn eigenvalues(&self, v: &[f64], i: usize) -> Vec<f64> {
        let (d1, d1r, d2) = self.differences(v, i);
        let (pre, b_rad, b_tan) = radial_parts(self.n(), v[i], d1, d1r, d2);
        let mut lambda = vec![pre * b_tan; self.n()];
        lambda[0] = pre * b_rad;
        lambda
    }

    fn check_values(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: v.len(),
            });
        }
        if let Some(i) = v.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::Positivity {
                value: v[i],
                location: format!("node {i} (r = {})", self.r[i]),
            });
        }
        Ok(())
    }

    pub fn residual(&self, v: &[f64]) -> Result<Residual> {
        self.check_values(v)?;
        let m = self.len();
        let mut values = vec![0.0; m];
        let mut margins = vec![None; m];
        let mut invalid = None;
        for i in 0..m {
            if !self.is_pde_row(i) {
                values[i] = if i == 0 {
                    match self.left {
                        Boundary::Dirichlet(a) => v[0] - a,
                        Boundary::Symmetry => unreachable!(),
                    }
                } else {
                    v[i] - self.right
                };
                continue;
            }
            let lambda = self.eigenvalues(v, i);
            if let Err(violation) = self.op().check(&lambda).and(self.cone.check(&lambda)) {
                invalid.get_or_insert(InvalidNode { node: i, violation });
            }
            margins[i] = Some(-boundary_shift_slice(&self.cone, &lambda));
            values[i] = self.op().value(&lambda) - self.phi[i] * v[i].powf(self.q);
        }
        let max_norm = values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        Ok(Residual {
            values,
            max_norm,
            margins,
            invalid,
        })
    }

    /// Analytic Jacobian of [`Self::residual`]: the operator gradient chained
    /// through the radial eigenvalue formulas and the difference stencils.
    pub fn jacobian(&self, v: &[f64]) -> Result<Tridiagonal> {
        self.check_values(v)?;
        let m = self.len();
        let n = self.n();
        let nf = n as f64;
        let c1 = (nf - 1.0) / (nf - 2.0);
        let c2 = 1.0 / (nf - 2.0);
        let h = self.h;
        let mut jac = Tridiagonal::zeros(m);
        for i in 0..m {
            if !self.is_pde_row(i) {
                jac.diag[i] = 1.0;
                continue;
            }
            let lambda = self.eigenvalues(v, i);
            let g = gradient(self.op(), &lambda).components;
            let g_rad = g[0];
            let g_tan: f64 = g[1..].iter().sum();
            let (d1, d1r, d2) = self.differences(v, i);
            let vi = v[i];
            let (pre, b_rad, b_tan) = radial_parts(n, vi, d1, d1r, d2);
            let dpre = -(nf + 2.0) / (nf - 2.0) * pre / vi;

            // Stencil derivatives with respect to (v_{i-1}, v_i, v_{i+1}).
            let (dd1, dd1r, dd2): ([f64; 3], [f64; 3], [f64; 3]) = if i == 0 {
                let s = [0.0, -2.0 / (h * h), 2.0 / (h * h)];
                ([0.0; 3], s, s)
            } else {
                let a = 1.0 / (2.0 * h);
                let r = self.r[i];
                (
                    [-a, 0.0, a],
                    [-a / r, 0.0, a / r],
                    [1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)],
                )
            };
            let mut row = [0.0; 3];
            for (s, out) in row.iter_mut().enumerate() {
                let dv = if s == 1 { 1.0 } else { 0.0 };
                let dsq = 2.0 * d1 * dd1[s] / vi - d1 * d1 * dv / (vi * vi);
                let db_rad = -dd2[s] + c1 * dsq;
                let db_tan = -dd1r[s] - c2 * dsq;
                let dl_rad = dpre * dv * b_rad + pre * db_rad;
                let dl_tan = dpre * dv * b_tan + pre * db_tan;
                *out = g_rad * dl_rad + g_tan * dl_tan;
            }
            row[1] -= self.phi[i] * self.q * vi.powf(self.q - 1.0);
            jac.diag[i] = row[1];
            if i > 0 {
                jac.sub[i - 1] = row[0];
            }
            if i == 0 {
                // The ghost node folds v_{-1} into v_1.
                jac.sup[0] = row[2] + row[0];
            } else {
                jac.sup[i] = row[2];
            }
        }
        Ok(jac)
    }

    /// Evaluates the configured initial guess on the grid.
    pub fn initial_guess(&self, cfg: &SolverConfig) -> Result<Vec<f64>> {
        let [r0, r1] = cfg.domain;
        let s = |r: f64| (r - r0) / (r1 - r0);
        match &cfg.initial {
            InitialGuess::Geometric => {
                let a = match self.left {
                    Boundary::Dirichlet(a) => a,
                    Boundary::Symmetry => self.right,
                };
                Ok(self
                    .r
                    .iter()
                    .map(|&r| a.powf(1.0 - s(r)) * self.right.powf(s(r)))
                    .collect())
            }
            InitialGuess::Profile {
                profile,
                amplitude,
                mode,
            } => self
                .r
                .iter()
                .map(|&r| {
                    let base = profile.derivatives(self.n(), r)?.0;
                    let wave = match self.left {
                        Boundary::Dirichlet(_) => (*mode as f64 * PI * s(r)).sin(),
                        // Even at the origin, zero at the right end.
                        Boundary::Symmetry => ((*mode as f64 - 0.5) * PI * s(r)).cos(),
                    };
                    Ok(base * (1.0 + amplitude * wave))
                })
                .collect(),
            InitialGuess::Values(v) => {
                if v.len() != self.len() {
                    return Err(Error::Dimension {
                        expected: self.len(),
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
        }
    }

    /// Newton iteration from `v`.
    pub fn solve_from(&self, mut v: Vec<f64>) -> Result<SolveResult> {
        let mut res = self.residual(&v)?;
        if let Some(bad) = res.invalid {
            return Err(Error::InadmissibleNode {
                node: bad.node,
                violation: bad.violation,
            });
        }
        let tol = self.tolerances;
        let initial_residual = res.max_norm;
        let mut history = Vec::new();
        let mut status = SolveStatus::MaxIterations;
        loop {
            if res.max_norm < tol.residual {
                status = SolveStatus::Converged;
                break;
            }
            if history.len() >= tol.max_iterations {
                break;
            }
            let jac = self.jacobian(&v)?;
            let rhs: Vec<f64> = res.values.iter().map(|x| -x).collect();
            let delta = jac.solve(&rhs)?;
            let mut t = 1.0;
            let accepted = loop {
                if t < tol.min_step {
                    break None;
                }
                let trial: Vec<f64> = v.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
                if let Some(next) = self.acceptable(&trial, &res) {
                    break Some((trial, next));
                }
                t *= 0.5;
            };
            let Some((trial, next)) = accepted else {
                status = SolveStatus::DampingUnderflow;
                break;
            };
            history.push(NewtonStep {
                residual: next.max_norm,
                damping: t,
                min_margin: min_margin(&next),
            });
            v = trial;
            res = next;
        }
        Ok(SolveResult {
            n: self.n(),
            operator: self.spec.to_string(),
            exponent: self.exponent,
            r: self.r.clone(),
            v,
            residual: res.max_norm,
            initial_residual,
            history,
            margins: res.margins,
            converged: status == SolveStatus::Converged,
            status,
        })
    }

    fn acceptable(&self, trial: &[f64], current: &Residual) -> Option<Residual> {
        let next = self.residual(trial).ok()?;
        if next.invalid.is_some() || !(next.max_norm < current.max_norm) {
            return None;
        }
        let keeps_margin =
            next.margins
                .iter()
                .zip(&current.margins)
                .all(|(new, old)| match (new, old) {
                    (Some(a), Some(b)) => *a > 0.0 && *a >= MARGIN_RETENTION * b,
                    _ => true,
                });
        keeps_margin.then_some(next)
    }
}

fn min_margin(res: &Residual) -> f64 {
    res.margins
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Residual of the nodal values `v` for `cfg`.
pub fn residual(cfg: &SolverConfig, v: &[f64]) -> Result<Residual> {
    Discretization::new(cfg)?.residual(v)
}

/// Solves `cfg` from its initial guess. Non-convergence is reported in the
/// result, not raised.
pub fn newton_solve(cfg: &SolverConfig) -> Result<SolveResult> {
    let disc = Discretization::new(cfg)?;
    let v0 = disc.initial_guess(cfg)?;
    disc.solve_from(v0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationFailure {
    pub exponent: f64,
    pub message: String,
    /// The failed solve, when it ran.
    pub report: Option<SolveResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Continuation {
    pub results: Vec<SolveResult>,
    pub failure: Option<ContinuationFailure>,
}

impl Continuation {
    /// `max_i |v_i - w_i|` between consecutive solutions.
    pub fn successive_distances(&self) -> Vec<f64> {
        self.results
            .windows(2)
            .map(|w| {
                w[0].v
                    .iter()
                    .zip(&w[1].v)
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
            })
            .collect()
    }
}

/// Solves for each exponent of `schedule` in turn, warm-starting from the
/// previous solution. Stops at the first failure, keeping earlier results;
/// a failure at the first exponent is an error.
pub fn continuation_p(cfg: &SolverConfig, schedule: &[f64]) -> Result<Continuation> {
    let Some((&first, rest)) = schedule.split_first() else {
        return Err(Error::Parameter("empty exponent schedule".into()));
    };
    let with_p = |p: f64| SolverConfig {
        exponent: Some(p),
        ..cfg.clone()
    };
    let first_cfg = with_p(first);
    let result = newton_solve(&first_cfg)?;
    if !result.converged {
        return Err(not_converged(first, result));
    }
    let mut results = vec![result];
    let mut failure = None;
    for &p in rest {
        let outcome = Discretization::new(&with_p(p))
            .and_then(|d| d.solve_from(results.last().unwrap().v.clone()));
        match outcome {
            Ok(r) if r.converged => results.push(r),
            Ok(r) => {
                failure = Some(ContinuationFailure {
                    exponent: p,
                    message: format!("no convergence ({:?})", r.status),
                    report: Some(r),
                });
                break;
            }
            Err(e) => {
                failure = Some(ContinuationFailure {
                    exponent: p,
                    message: e.to_string(),
                    report: None,
                });
                break;
            }
        }
    }
    Ok(Continuation { results, failure })
}

fn not_converged(p: f64, r: SolveResult) -> Error {
    Error::Numeric(format!(
        "Newton did not converge at p = {p} ({:?} after {} steps, residual {:.3e})",
        r.status,
        r.iterations(),
        r.residual
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// `(N, max |v - exact|)` per level.
    pub levels: Vec<(usize, f64)>,
    /// `log2(e_N / e_{2N})` between consecutive levels.
    pub orders: Vec<f64>,
}

/// Solves on `N, 2N, 4N, ...` (`refinements + 1` levels) and measures the
/// sup-error against the configured exact solution.
pub fn convergence_study(cfg: &SolverConfig, refinements: usize) -> Result<ConvergenceStudy> {
    let exact = cfg
        .exact
        .ok_or_else(|| Error::Parameter("convergence study needs an exact profile".into()))?;
    let mut levels = Vec::new();
    for j in 0..=refinements {
        let level = SolverConfig {
            grid: cfg.grid << j,
            ..cfg.clone()
        };
        let disc = Discretization::new(&level)?;
        let exact_values = disc
            .nodes()
            .iter()
            .map(|&r| exact.derivatives(level.n, r).map(|d| d.0))
            .collect::<Result<Vec<f64>>>()?;
        // The exact solution must be admissible on the grid to be reachable.
        if let Some(bad) = disc.residual(&exact_values)?.invalid {
            return Err(Error::InadmissibleNode {
                node: bad.node,
                violation: bad.violation,
            });
        }
        let result = disc.solve_from(disc.initial_guess(&level)?)?;
        if !result.converged {
            return Err(not_converged(disc.exponent, result));
        }
        levels.push((level.grid, result.sup_error(exact)?));
    }
    let orders = levels
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).log2())
        .collect();
    Ok(ConvergenceStudy { levels, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bubble_values(disc: &Discretization, n: usize) -> Vec<f64> {
        let kind = ExactKind::Bubble { scale: 1.0 };
        disc.nodes()
            .iter()
            .map(|&r| kind.derivatives(n, r).unwrap().0)
            .collect()
    }

    #[test]
    fn bubble_residual_is_second_order() {
        let mut norms = Vec::new();
        for grid in [32, 64, 128] {
            let cfg = SolverConfig {
                rhs: Rhs::Constant(8.0),
                ..SolverConfig::bubble_annulus("sigma-root:k=1", 4, [0.1, 2.0], grid, 0.0).unwrap()
            };
            let disc = Discretization::new(&cfg).unwrap();
            let res = disc.residual(&bubble_values(&disc, 4)).unwrap();
            assert!(res.invalid.is_none());
            norms.push(res.max_norm);
        }
        for w in norms.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.3, "{norms:?}");
        }
    }

    #[test]
    fn constant_profile_is_marked_invalid() {
        let cfg = SolverConfig {
            left: Boundary::Dirichlet(1.0),
            right: Boundary::Dirichlet(1.0),
            rhs: Rhs::Constant(3.0),
            ..SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.1, 2.0], 32, 0.0).unwrap()
        };
        let res = residual(&cfg, &vec![1.0; 33]).unwrap();
        assert_eq!(res.invalid.unwrap().node, 1);
        for i in 1..32 {
            assert!((res.values[i] + 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        for (op, n, left, dp) in [
            ("sigma-root:k=2", 4, 0.1, 0.0),
            ("quotient:k=3,l=1", 5, 0.0, 0.0),
            ("inv-power", 3, 0.2, 0.0),
            ("sigma-root:k=2", 4, 0.1, 0.7),
        ] {
            let base = SolverConfig::bubble_annulus(op, n, [left, 2.0], 32, 0.03).unwrap();
            let cfg = SolverConfig {
                exponent: Some(base.natural_exponent().unwrap() + dp),
                ..base
            };
            let disc = Discretization::new(&cfg).unwrap();
            let v = disc.initial_guess(&cfg).unwrap();
            let jac = disc.jacobian(&v).unwrap().to_dense();
            let base = disc.residual(&v).unwrap();
            assert!(base.invalid.is_none());
            for j in 0..v.len() {
                let h = 1e-7 * v[j];
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[j] += h;
                vm[j] -= h;
                let rp = disc.residual(&vp).unwrap().values;
                let rm = disc.residual(&vm).unwrap().values;
                for i in 0..v.len() {
                    let fd = (rp[i] - rm[i]) / (2.0 * h);
                    let a = jac[(i, j)];
                    assert!(
                        (fd - a).abs() <= 1e-4 * a.abs().max(1.0),
                        "{op} ({i},{j}): {a} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn exact_start_needs_no_steps() {
        let cfg = SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.1, 2.0], 64, 0.0).unwrap();
        let disc = Discretization::new(&cfg).unwrap();
        let tol = Tolerances {
            residual: 1e-2,
            ..cfg.tolerances
        };
        let loose = Discretization {
            tolerances: tol,
            ..disc
        };
        let result = loose.solve_from(bubble_values(&loose, 4)).unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations(), 0);
    }

    #[test]
    fn rejects_bad_configs() {
        let good = SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.1, 2.0], 32, 0.0).unwrap();
        let bad = [
            SolverConfig {
                grid: 8,
                ..good.clone()
            },
            SolverConfig {
                domain: [1.0, 0.5],
                ..good.clone()
            },
            SolverConfig {
                left: Boundary::Symmetry,
                ..good.clone()
            },
            SolverConfig {
                right: Boundary::Dirichlet(-1.0),
                ..good.clone()
            },
            SolverConfig {
                rhs: Rhs::Constant(0.0),
                ..good.clone()
            },
        ];
        for cfg in bad {
            assert!(
                matches!(newton_solve(&cfg), Err(Error::Parameter(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn empty_schedule() {
        let cfg = SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.1, 2.0], 32, 0.0).unwrap();
        assert!(continuation_p(&cfg, &[]).is_err());
    }

    #[test]
    fn ball_continuation_upward() {
        let cfg = SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.0, 2.0], 64, 0.05).unwrap();
        let schedule: Vec<f64> = (0..5).map(|i| 3.0 + 0.1 * i as f64).collect();
        let cont = continuation_p(&cfg, &schedule).unwrap();
        assert!(
            cont.failure.is_none(),
            "{:?}",
            cont.failure.map(|f| f.message)
        );
        assert_eq!(cont.results.len(), 5);
        for d in cont.successive_distances() {
            assert!(d > 0.0 && d < 0.2, "{d}");
        }
    }

    #[test]
    fn continuation_keeps_results_past_a_failure() {
        let cfg = SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.0, 2.0], 32, 0.0).unwrap();
        let cont = continuation_p(&cfg, &[3.0, 3.05, 1e3]).unwrap();
        assert_eq!(cont.results.len(), 2);
        let failure = cont.failure.unwrap();
        assert_eq!(failure.exponent, 1e3);
    }

    #[test]
    fn annulus_branch_folds() {
        // The bubble branch on [0.1, 2] turns back shortly above the natural
        // exponent: the linearization loses rank.
        let base = SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.1, 2.0], 32, 0.0).unwrap();
        let smin = |p: f64| {
            let cfg = SolverConfig {
                exponent: Some(p),
                ..base.clone()
            };
            let d = Discretization::new(&cfg).unwrap();
            let r = d.solve_from(d.initial_guess(&cfg).unwrap()).unwrap();
            assert!(r.converged);
            let sv = d.jacobian(&r.v).unwrap().to_dense().singular_values();
            sv.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        let at_rest = smin(3.0);
        assert!(smin(3.015) < 0.8 * at_rest);
        let far = continuation_p(&base, &[3.0, 3.05]).unwrap();
        assert!(far.failure.is_some());
    }
}
