use serde::{Deserialize, Serialize};

use crate::cones::ConeSpec;
use crate::conformal::ExactKind;
use crate::error::{Error, Result};
use crate::symfun::OperatorSpec;

/// Right-hand side `phi(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Rhs {
    Constant(f64),
    /// `sum_i c_i r^i`.
    Polynomial(Vec<f64>),
}

impl Rhs {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Rhs::Constant(c) => *c,
            Rhs::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ci| acc * r + ci),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Boundary {
    Dirichlet(f64),
    /// `v'(0) = 0`; only at `r0 = 0`.
    Symmetry,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialGuess {
    /// `v0^{1-s} v1^s` with `s = (r - r0)/(r1 - r0)`; a constant when the
    /// left end is a symmetry condition.
    #[default]
    Geometric,
    /// `profile(r) * (1 + amplitude * sin(mode * pi * s))`; with a symmetry
    /// condition at the left end the wave is `cos((mode - 1/2) * pi * s)`.
    Profile {
        profile: ExactKind,
        #[serde(default)]
        amplitude: f64,
        #[serde(default = "default_mode")]
        mode: u32,
    },
    /// Explicit nodal values, one per grid node.
    Values(Vec<f64>),
}

fn default_mode() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max-norm of the residual.
    pub residual: f64,
    pub max_iterations: usize,
    /// Smallest damping factor tried before giving up.
    pub min_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            max_iterations: 50,
            min_step: 2f64.powi(-20),
        }
    }
}

/// A radial Dirichlet problem `f(lambda(A^v)) = phi(r) v^q` on `[r0, r1]`,
/// `q = p - alpha (n+2)/(n-2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub n: usize,
    pub operator: String,
    /// Cone used for admissibility margins; defaults to the operator's cone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<String>,
    pub domain: [f64; 2],
    /// Number of grid intervals; the grid has `grid + 1` nodes.
    pub grid: usize,
    pub rhs: Rhs,
    /// Defaults to `alpha (n+2)/(n-2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    pub left: Boundary,
    pub right: Boundary,
    #[serde(default)]
    pub initial: InitialGuess,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Known exact solution, for error measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactKind>,
}

impl SolverConfig {
    /// Dirichlet problem on `[r0, r1]` whose exact solution is the bubble of
    /// the given scale, with the right-hand side matched to `f(2, ..., 2)`
    /// and a perturbed bubble as initial guess.
    pub fn bubble_annulus(
        operator: &str,
        n: usize,
        domain: [f64; 2],
        grid: usize,
        amplitude: f64,
    ) -> Result<Self> {
        let spec = OperatorSpec::parse(operator, n)?;
        let kind = ExactKind::Bubble { scale: 1.0 };
        let phi = crate::symfun::eval_op(&spec, &crate::symfun::EigenTuple::diagonal(n, 2.0)?)?;
        let left = if domain[0] == 0.0 {
            Boundary::Symmetry
        } else {
            Boundary::Dirichlet(kind.derivatives(n, domain[0])?.0)
        };
        Ok(Self {
            n,
            operator: spec.to_string(),
            cone: None,
            domain,
            grid,
            rhs: Rhs::Constant(phi),
            exponent: None,
            left,
            right: Boundary::Dirichlet(kind.derivatives(n, domain[1])?.0),
            initial: InitialGuess::Profile {
                profile: kind,
                amplitude,
                mode: 1,
            },
            tolerances: Tolerances::default(),
            exact: Some(kind),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(json_field(&e), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn operator_spec(&self) -> Result<OperatorSpec> {
        OperatorSpec::parse(&self.operator, self.n)
    }

    pub fn cone_spec(&self) -> Result<ConeSpec> {
        match &self.cone {
            Some(text) => ConeSpec::parse(text, self.n),
            None => Ok(self.operator_spec()?.cone()),
        }
    }

    pub fn natural_exponent(&self) -> Result<f64> {
        let alpha = self.operator_spec()?.alpha();
        let n = self.n as f64;
        Ok(alpha * (n + 2.0) / (n - 2.0))
    }

    pub fn exponent(&self) -> Result<f64> {
        match self.exponent {
            Some(p) => Ok(p),
            None => self.natural_exponent(),
        }
    }

    /// The grid nodes `r_0, ..., r_N`.
    pub fn nodes(&self) -> Vec<f64> {
        let [r0, r1] = self.domain;
        let h = (r1 - r0) / self.grid as f64;
        (0..=self.grid)
            .map(|i| {
                if i == self.grid {
                    r1
                } else {
                    r0 + i as f64 * h
                }
            })
            .collect()
    }
}

/// Best-effort name of the offending field for serde errors.
fn json_field(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    for marker in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(start) = msg.find(marker) {
            let rest = &msg[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    format!("line {} column {}", e.line(), e.column())
}
