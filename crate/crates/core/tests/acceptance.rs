//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed:
//! `cargo test -p chl-core --test acceptance`.

use std::time::{Duration, Instant};

use chl_core::cones::gamma_sigma_inclusion_test;
use chl_core::conformal::{
    conformal_hessian_matrix, kelvin, schouten_eigs, Background, Bubble, ConformalProfile,
    Constant, ExactKind, Gauge, Inversion, Mapped, RadialProfile, ScalarMap,
};
use chl_core::diagnostics::{
    bishop_gromov_curve, blowup_rescale, gradient_monitor, harnack_beta, oscillation, SampleGrid,
};
use chl_core::radial_solver::{
    continuation_p, convergence_study, newton_solve, Discretization, SolverConfig,
};
use chl_core::symfun::{verify_axioms, OperatorSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_917;

/// Criteria known not to hold; see the decisions ledger. The suite fails if
/// one of them starts passing, so the list stays accurate.
const EXPECTED_FAIL: &[usize] = &[11];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

fn random_point(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-hi..hi)).collect();
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > lo && norm < hi {
            return x;
        }
    }
}

fn flatness() -> Outcome {
    let mut r = rng();
    let mut worst: f64 = 0.0;
    for n in 3..=6 {
        let p = ConformalProfile::flat(Gauge::V, Inversion { n, c: 1.0 }).unwrap();
        for _ in 0..100 {
            let x = random_point(&mut r, n, 0.5, 2.0);
            worst = worst.max(conformal_hessian_matrix(&p, &x).unwrap().amax());
            for e in schouten_eigs(&p, &x).unwrap().as_slice() {
                worst = worst.max(e.abs());
            }
        }
    }
    outcome(worst < 1e-10, format!("max |entry| = {worst:.2e}"))
}

fn bubble_eigenvalues() -> Outcome {
    let mut r = rng();
    let mut worst: f64 = 0.0;
    for n in 3..=6 {
        let p = ConformalProfile::flat(Gauge::V, Bubble::centered(n, 1.0).unwrap()).unwrap();
        for _ in 0..100 {
            let x = random_point(&mut r, n, 0.0, 3.0);
            for e in schouten_eigs(&p, &x).unwrap().as_slice() {
                worst = worst.max((e - 2.0).abs());
            }
        }
    }
    let mut sphere: f64 = 0.0;
    for n in 3..=6 {
        let p = ConformalProfile::new(
            Gauge::V,
            Background::sphere(1.0).unwrap(),
            std::sync::Arc::new(Constant { n, c: 1.0 }),
        )
        .unwrap();
        for _ in 0..100 {
            let x = random_point(&mut r, n, 0.0, 3.0);
            for e in schouten_eigs(&p, &x).unwrap().as_slice() {
                sphere = sphere.max((e - 0.5).abs());
            }
        }
    }
    outcome(
        worst < 1e-8 && sphere < 1e-10,
        format!("bubble max |e - 2| = {worst:.2e}, sphere max |e - 1/2| = {sphere:.2e}"),
    )
}

fn axiom_suite() -> Outcome {
    let ops = [
        "sigma-root:k=2",
        "quotient:k=2,l=1",
        "pucci:k=1,delta=0.25",
        "inv-power",
        "inv-monomial:k=2",
        "shifted:delta=0.5,inner=[sigma-root:k=2],inner2=[sigma-root:k=1]",
    ];
    let mut violations = 0;
    let mut failing = Vec::new();
    for op in ops {
        for n in 3..=5 {
            let spec = OperatorSpec::parse(op, n).unwrap();
            let report = verify_axioms(&spec, 10_000, SEED).unwrap();
            if report.total_violations() > 0 {
                failing.push(format!("{op} n={n}"));
            }
            violations += report.total_violations();
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations {failing:?}"),
    )
}

fn cone_inclusion() -> Outcome {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for n in 3..=6 {
        for k in 2..=n {
            let report = gamma_sigma_inclusion_test(k, n, 100_000, SEED).unwrap();
            violations += report.violations;
            worst = worst.min(report.worst_relative_margin);
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations, smallest relative margin {worst:.2e}"),
    )
}

fn kelvin_covariance() -> Outcome {
    let mut r = rng();
    let mut worst: f64 = 0.0;
    let n = 4;
    let families: Vec<ConformalProfile> = vec![
        ConformalProfile::flat(
            Gauge::V,
            Bubble::new(vec![0.3, -0.2, 0.1, 0.0], 0.8).unwrap(),
        )
        .unwrap(),
        RadialProfile::exact(ExactKind::Sphere { radius: 1.5 }, n, Gauge::V)
            .unwrap()
            .lift(),
        ConformalProfile::flat(
            Gauge::V,
            Mapped {
                inner: std::sync::Arc::new(Bubble::new(vec![-0.5, 0.0, 0.4, 0.2], 1.3).unwrap()),
                map: ScalarMap::Scale(2.5),
            },
        )
        .unwrap(),
    ];
    for p in &families {
        let star = kelvin(p).unwrap();
        for _ in 0..1000 {
            let x = random_point(&mut r, n, 0.25, 3.0);
            let r2: f64 = x.iter().map(|c| c * c).sum();
            let y: Vec<f64> = x.iter().map(|c| c / r2).collect();
            let a = schouten_eigs(&star, &x).unwrap();
            let b = schouten_eigs(p, &y).unwrap();
            for (s, t) in a.as_slice().iter().zip(b.as_slice()) {
                worst = worst.max((s - t).abs());
            }
        }
    }
    outcome(worst < 1e-7, format!("max eigenvalue mismatch {worst:.2e}"))
}

fn solver_exactness() -> Outcome {
    let cfg = SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.1, 2.0], 32, 0.05).unwrap();
    let phi_ok = match cfg.rhs {
        chl_core::radial_solver::Rhs::Constant(c) => (c - 2.0 * 6f64.sqrt()).abs() < 1e-12,
        _ => false,
    };
    let mut admissible = true;
    let mut converged = true;
    for grid in [32, 64, 128] {
        let level = SolverConfig {
            grid,
            ..cfg.clone()
        };
        let disc = Discretization::new(&level).unwrap();
        let start = disc.initial_guess(&level).unwrap();
        admissible &= disc.residual(&start).unwrap().invalid.is_none();
        let result = newton_solve(&level).unwrap();
        converged &= result.converged;
        admissible &= result.history.iter().all(|s| s.min_margin > 0.0);
    }
    let study = convergence_study(&cfg, 2).unwrap();
    let orders_ok = study.orders.iter().all(|o| (o - 2.0).abs() <= 0.3);
    outcome(
        phi_ok && admissible && converged && orders_ok,
        format!(
            "errors {:?}, orders {:?}, all iterates admissible: {admissible}",
            study
                .levels
                .iter()
                .map(|(_, e)| format!("{e:.3e}"))
                .collect::<Vec<_>>(),
            study
                .orders
                .iter()
                .map(|o| format!("{o:.3}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn continuation() -> Outcome {
    // The annulus bubble branch folds just above the natural exponent; the
    // sweep runs on the ball [0, 2].
    let cfg = SolverConfig::bubble_annulus("sigma-root:k=2", 4, [0.0, 2.0], 64, 0.05).unwrap();
    let p0 = cfg.natural_exponent().unwrap();
    let schedule: Vec<f64> = (0..5).map(|i| p0 + 0.1 * i as f64).collect();
    let run = continuation_p(&cfg, &schedule).unwrap();
    let distances = run.successive_distances();
    let pass =
        run.failure.is_none() && run.results.len() == 5 && distances.iter().all(|d| *d < 0.2);
    outcome(
        pass,
        format!(
            "p = {schedule:?}, sup-distances {:?}",
            distances
                .iter()
                .map(|d| format!("{d:.4}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn bishop_gromov() -> Outcome {
    let radii: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
    let mut flat_err: f64 = 0.0;
    for n in [3, 4, 6] {
        let p = RadialProfile::exact(ExactKind::Constant { c: 1.0 }, n, Gauge::V).unwrap();
        let curve = bishop_gromov_curve(&p, &radii).unwrap();
        for (_, q) in &curve.points {
            flat_err = flat_err.max((q - 1.0).abs());
        }
    }
    let sphere = RadialProfile::exact(ExactKind::Sphere { radius: 1.0 }, 3, Gauge::V).unwrap();
    let pi = std::f64::consts::PI;
    let sphere_radii: Vec<f64> = (1..=20).map(|i| pi * i as f64 / 20.0).collect();
    let curve = bishop_gromov_curve(&sphere, &sphere_radii).unwrap();
    let q_pi = curve.points.last().unwrap().1;
    let target = 3.0 / (2.0 * pi * pi);
    let pass = flat_err < 1e-8 && curve.is_strictly_decreasing() && (q_pi - target).abs() < 1e-4;
    outcome(
        pass,
        format!(
            "flat max |Q - 1| = {flat_err:.2e}, sphere decreasing: {}, Q(pi) = {q_pi:.8} vs {target:.8}",
            curve.is_strictly_decreasing()
        ),
    )
}

fn harnack() -> Outcome {
    let zero = (3..=6).all(|n| harnack_beta(0.0, n).unwrap() == 1.0);
    let quarter = harnack_beta(0.25, 4).unwrap() == 0.4;
    let edge = (3..=6).all(|n| {
        harnack_beta(1.0 / (n as f64 - 2.0), n)
            .is_err_and(|e| matches!(e, chl_core::Error::Domain(_)))
    });
    outcome(
        zero && quarter && edge,
        format!("beta(0, n) = 1: {zero}, beta(1/4, 4) = 0.4: {quarter}, domain error at 1/(n-2): {edge}"),
    )
}

fn jacobian_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for (op, n, left) in [
        ("sigma-root:k=2", 4, 0.1),
        ("quotient:k=3,l=1", 5, 0.0),
        ("inv-power", 3, 0.2),
    ] {
        let cfg = SolverConfig::bubble_annulus(op, n, [left, 2.0], 32, 0.03).unwrap();
        let disc = Discretization::new(&cfg).unwrap();
        let v = disc.initial_guess(&cfg).unwrap();
        let jac = disc.jacobian(&v).unwrap().to_dense();
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
                worst = worst.max((fd - a).abs() / a.abs().max(1.0));
            }
        }
    }
    outcome(worst < 1e-4, format!("max relative mismatch {worst:.2e}"))
}

fn blowup() -> Outcome {
    let n = 4;
    let mut monitors = Vec::new();
    let mut oscillations = Vec::new();
    for eps in [0.5, 0.25, 0.125] {
        let p = ConformalProfile::flat(Gauge::V, Bubble::centered(n, eps).unwrap()).unwrap();
        let m = gradient_monitor(&p, 1.0, SampleGrid::RAY).unwrap();
        let rescaled = blowup_rescale(&p, &m.location).unwrap();
        monitors.push(m.supremum);
        oscillations
            .push(oscillation(&rescaled, 1.0, SampleGrid::Halton { points: 20_000 }).unwrap());
    }
    let grows = monitors.windows(2).all(|w| w[1] > w[0]);
    let shrinks = oscillations.windows(2).all(|w| w[1] < w[0]);
    outcome(
        grows && shrinks,
        format!(
            "monitor {:?} (increasing: {grows}), rescaled oscillation {:?} (decreasing: {shrinks})",
            monitors
                .iter()
                .map(|m| format!("{m:.4}"))
                .collect::<Vec<_>>(),
            oscillations
                .iter()
                .map(|o| format!("{o:.4}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 11] = [
        (
            "flatness identities",
            flatness,
            Some(Duration::from_secs(1)),
        ),
        (
            "bubble eigenvalues",
            bubble_eigenvalues,
            Some(Duration::from_secs(1)),
        ),
        ("axiom suite", axiom_suite, Some(Duration::from_secs(30))),
        (
            "cone inclusion",
            cone_inclusion,
            Some(Duration::from_secs(30)),
        ),
        (
            "Kelvin covariance",
            kelvin_covariance,
            Some(Duration::from_secs(5)),
        ),
        (
            "solver exactness",
            solver_exactness,
            Some(Duration::from_secs(10)),
        ),
        (
            "continuation in p",
            continuation,
            Some(Duration::from_secs(30)),
        ),
        ("Bishop-Gromov", bishop_gromov, Some(Duration::from_secs(5))),
        ("Harnack exponent", harnack, None),
        (
            "Jacobian check",
            jacobian_check,
            Some(Duration::from_secs(5)),
        ),
        (
            "blow-up demonstration",
            blowup,
            Some(Duration::from_secs(10)),
        ),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let pass = out.pass && in_time;
        let budget_text = budget.map_or(String::new(), |b| format!(" / {:.0} s", b.as_secs_f64()));
        println!(
            "{} {id:>2} {name}: {} [{:.3} s{budget_text}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
        if pass == EXPECTED_FAIL.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcome: {unexpected:?}");
        std::process::exit(1);
    }
}
