use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cones::{boundary_shift_slice, rng_from_seed, sample_cone};
use crate::error::{Error, Result};
use crate::linalg::sorted_eigenvalues;

use super::eval::gradient;
use super::OperatorSpec;

/// Thresholds used by [`verify_axioms`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomTolerances {
    /// `|f(t lambda) - t^alpha f(lambda)| / (t^alpha f(lambda))`.
    pub homogeneity_rel: f64,
    /// Lower bound on `f(mid) - (f(a) + f(b)) / 2`, relative to `max(1, f)`.
    pub concavity_midpoint: f64,
    /// Relative change of `F(O A O^T)` against `F(A)`.
    pub orthogonal_rel: f64,
    /// Along `lambda_b + s e` towards a boundary point `lambda_b`, require
    /// `f(s) / f(S) <= boundary_factor * (s/S)^{1/n}` at `s/S = 1e-8`.
    pub boundary_factor: f64,
}

impl Default for AxiomTolerances {
    fn default() -> Self {
        Self {
            homogeneity_rel: 1e-12,
            concavity_midpoint: -1e-12,
            orthogonal_rel: 1e-9,
            boundary_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomStat {
    pub violations: usize,
    /// Largest defect observed (in the units of the corresponding check).
    pub worst: f64,
}

impl AxiomStat {
    fn record(&mut self, defect: f64, violated: bool) {
        if violated {
            self.violations += 1;
        }
        if defect > self.worst || defect.is_nan() {
            self.worst = defect;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub operator: String,
    pub n: usize,
    pub samples: usize,
    pub tolerances: AxiomTolerances,
    /// f > 0 inside the cone.
    pub positivity: AxiomStat,
    /// f -> 0 approaching the boundary along the diagonal.
    pub boundary: AxiomStat,
    /// f_i > 0.
    pub gradient: AxiomStat,
    /// Midpoint concavity on random pairs.
    pub concavity: AxiomStat,
    /// Invariance under a random permutation.
    pub symmetry: AxiomStat,
    /// Homogeneity under a random t in (0.1, 10).
    pub homogeneity: AxiomStat,
    /// F(O A O^T) = F(A) for random orthogonal O.
    pub orthogonal: AxiomStat,
}

impl AxiomReport {
    pub fn total_violations(&self) -> usize {
        [
            &self.positivity,
            &self.boundary,
            &self.gradient,
            &self.concavity,
            &self.symmetry,
            &self.homogeneity,
            &self.orthogonal,
        ]
        .iter()
        .map(|s| s.violations)
        .sum()
    }
}

/// Sampled check of the structural conditions on `f` inside its cone.
/// Violations are counted, never raised.
pub fn verify_axioms(spec: &OperatorSpec, samples: usize, seed: u64) -> Result<AxiomReport> {
    verify_axioms_with(spec, samples, seed, AxiomTolerances::default())
}

pub fn verify_axioms_with(
    spec: &OperatorSpec,
    samples: usize,
    seed: u64,
    tol: AxiomTolerances,
) -> Result<AxiomReport> {
    if samples == 0 {
        return Err(Error::Parameter("samples must be positive".into()));
    }
    let n = spec.n();
    let op = spec.operator();
    let alpha = spec.alpha();
    let cone = spec.cone();
    let mut rng = rng_from_seed(seed);
    let mut report = AxiomReport {
        operator: spec.to_string(),
        n,
        samples,
        tolerances: tol,
        positivity: AxiomStat::default(),
        boundary: AxiomStat::default(),
        gradient: AxiomStat::default(),
        concavity: AxiomStat::default(),
        symmetry: AxiomStat::default(),
        homogeneity: AxiomStat::default(),
        orthogonal: AxiomStat::default(),
    };

    for _ in 0..samples {
        let lambda = sample_cone(&cone, &mut rng);
        let l = lambda.as_slice();
        let f = op.value(l);

        report.positivity.record(-f, !(f > 0.0));

        // Gradient: strictly positive components.
        let g = gradient(op, l);
        let gmin = g.components.iter().copied().fold(f64::INFINITY, f64::min);
        report.gradient.record(-gmin, !(gmin > 0.0));

        // Permutation symmetry.
        let mut perm = l.to_vec();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let fp = op.value(&perm);
        let sym_defect = (fp - f).abs() / f.abs();
        report.symmetry.record(sym_defect, sym_defect > 1e-14);

        // Homogeneity.
        let t = rng.random_range(0.1..10.0);
        let scaled: Vec<f64> = l.iter().map(|x| t * x).collect();
        let expected = t.powf(alpha) * f;
        let hom_defect = (op.value(&scaled) - expected).abs() / expected.abs();
        report
            .homogeneity
            .record(hom_defect, !(hom_defect <= tol.homogeneity_rel));

        // Midpoint concavity against a second sample.
        let other = sample_cone(&cone, &mut rng);
        let mid: Vec<f64> = l
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let fo = op.value(other.as_slice());
        let fm = op.value(&mid);
        let concave_defect = ((f + fo) / 2.0 - fm) / f.max(fo).max(1.0);
        report
            .concavity
            .record(concave_defect, !(-concave_defect >= tol.concavity_midpoint));

        // Orthogonal invariance of the matrix function F(A) = f(lambda(A)).
        let q = random_orthogonal(n, &mut rng);
        let a = &q * DMatrix::from_diagonal(&DVector::from_column_slice(l)) * q.transpose();
        let orth_defect = match sorted_eigenvalues(a) {
            Ok(eigs) if op.check(&eigs).is_ok() => (op.value(&eigs) - f).abs() / f.abs(),
            _ => f64::INFINITY,
        };
        report
            .orthogonal
            .record(orth_defect, !(orth_defect <= tol.orthogonal_rel));

        // Boundary limit along the diagonal.
        let depth = -boundary_shift_slice(&cone, l);
        let boundary_defect = boundary_ratio(spec, l, depth, tol.boundary_factor);
        report
            .boundary
            .record(boundary_defect, !(boundary_defect <= 1.0));
    }
    Ok(report)
}

/// Ratio of the observed decay of `f` towards the boundary to the allowed
/// decay; `<= 1` passes. Also fails when the values along the approach are
/// not strictly decreasing.
fn boundary_ratio(spec: &OperatorSpec, l: &[f64], depth: f64, factor: f64) -> f64 {
    let op = spec.operator();
    let n = spec.n() as f64;
    let at = |s: f64| -> Option<f64> {
        let p: Vec<f64> = l.iter().map(|x| x - depth + s).collect();
        op.check(&p).ok().map(|_| op.value(&p))
    };
    let Some(reference) = at(depth) else {
        return f64::INFINITY;
    };
    let mut previous = reference;
    let mut ratio = 0.0;
    for j in 1..=4 {
        let rel = 10f64.powi(-2 * j);
        let Some(v) = at(depth * rel) else {
            return f64::INFINITY;
        };
        if !(v < previous) {
            return f64::INFINITY;
        }
        previous = v;
        ratio = (v / reference) / (factor * rel.powf(1.0 / n));
    }
    ratio
}

fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    m.qr().q()
}
