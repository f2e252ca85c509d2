use std::fmt::Write;

use chl_core::cones::{boundary_shift, gamma_sigma_inclusion_test, ConeSpec};
use chl_core::conformal::{
    kelvin, schouten_eigs, ConformalProfile, ExactKind, Gauge, RadialProfile,
};
use chl_core::diagnostics::{
    bishop_gromov_curve, gradient_monitor, hessian_monitor, HarnackReport, SampleGrid,
};
use chl_core::radial_solver::{continuation_p, convergence_study, newton_solve, SolverConfig};
use chl_core::symfun::{eval_op, grad_op, verify_axioms, EigenTuple, OperatorSpec};
use chl_core::{Error, Violation};
use serde::Serialize;
use serde_json::json;

use crate::params::{MonitorArg, Sampling};
use crate::{seed, CliError, Output, RunConfig, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_OK};

/// Inputs each subcommand reads (besides `out` and `format`).
pub(crate) fn inputs(name: &str) -> &'static [&'static str] {
    match name {
        "eval" | "grad" => &["op", "n", "lambda"],
        "axioms" => &["op", "n", "samples", "seed"],
        "cone" => &["cone", "n", "lambda"],
        "inclusion" => &["k", "n", "samples", "seed"],
        "schouten" => &["profile", "profile-file", "gauge", "n", "point"],
        "kelvin" => &["profile", "gauge", "n", "point"],
        "solve" => &["solver", "grid", "p"],
        "continue-p" => &["solver", "grid", "steps", "step", "schedule"],
        "converge" => &["solver", "grid", "refinements"],
        "monitor" => &[
            "profile",
            "profile-file",
            "gauge",
            "n",
            "radius",
            "monitor",
            "sampling",
            "grid",
        ],
        "bishop-gromov" => &["profile", "profile-file", "gauge", "n", "radii"],
        "harnack" => &["delta", "n", "holder-samples"],
        _ => &[],
    }
}

pub(crate) fn execute(name: &str, cfg: &RunConfig) -> Result<Output, CliError> {
    match name {
        "eval" => eval(cfg),
        "grad" => grad(cfg),
        "axioms" => axioms(cfg),
        "cone" => cone(cfg),
        "inclusion" => inclusion(cfg),
        "schouten" => schouten(cfg),
        "kelvin" => kelvin_cmd(cfg),
        "solve" => solve(cfg),
        "continue-p" => continue_p(cfg),
        "converge" => converge(cfg),
        "monitor" => monitor(cfg),
        "bishop-gromov" => bishop_gromov(cfg),
        "harnack" => harnack(cfg),
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

fn need<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

/// `--n`, else the length of `--lambda` or `--point`.
fn dim(cfg: &RunConfig) -> Result<usize, CliError> {
    cfg.n
        .or(cfg.lambda.as_ref().map(Vec::len))
        .or(cfg.point.as_ref().map(Vec::len))
        .ok_or_else(|| CliError::Usage("missing --n".into()))
}

fn to_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("report serializes")
}

fn list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| (v + 0.0).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn done(json: serde_json::Value, text: String, csv: Option<String>) -> Output {
    Output {
        json,
        text,
        csv,
        exit: EXIT_OK,
    }
}

fn operator(cfg: &RunConfig) -> Result<OperatorSpec, CliError> {
    Ok(OperatorSpec::parse(need(&cfg.op, "op")?, dim(cfg)?)?)
}

fn lambda(cfg: &RunConfig) -> Result<EigenTuple, CliError> {
    let n = dim(cfg)?;
    let values = need(&cfg.lambda, "lambda")?;
    if values.len() != n {
        return Err(CliError::Usage(format!(
            "--lambda has {} entries but --n is {n}",
            values.len()
        )));
    }
    Ok(EigenTuple::new(values.clone())?)
}

fn eval(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = operator(cfg)?;
    let value = eval_op(&spec, &lambda(cfg)?)?;
    Ok(done(
        json!({ "operator": spec.to_string(), "n": spec.n(), "value": value }),
        format!("{value}\n"),
        Some(format!("value\n{value}\n")),
    ))
}

fn grad(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = operator(cfg)?;
    let g = grad_op(&spec, &lambda(cfg)?)?;
    let mut text = list(&g.components);
    text.push('\n');
    if g.non_smooth {
        text.push_str("non-smooth point: one subgradient shown\n");
    }
    let header: Vec<String> = (1..=g.components.len()).map(|i| format!("f_{i}")).collect();
    let csv = format!("{}\n{}\n", header.join(","), list(&g.components));
    Ok(done(to_json(&g), text, Some(csv)))
}

fn axioms(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = operator(cfg)?;
    let report = verify_axioms(&spec, cfg.samples.unwrap_or(10_000), seed(cfg)?)?;
    let rows = [
        ("positivity", report.positivity),
        ("boundary", report.boundary),
        ("gradient", report.gradient),
        ("concavity", report.concavity),
        ("symmetry", report.symmetry),
        ("homogeneity", report.homogeneity),
        ("orthogonal", report.orthogonal),
    ];
    let mut text = format!(
        "{} n={} samples={}\n",
        report.operator, report.n, report.samples
    );
    let mut csv = String::from("axiom,violations,worst\n");
    for (name, stat) in rows {
        writeln!(
            text,
            "{name:<12} violations={} worst={:e}",
            stat.violations, stat.worst
        )
        .unwrap();
        writeln!(csv, "{name},{},{:e}", stat.violations, stat.worst).unwrap();
    }
    writeln!(text, "total violations: {}", report.total_violations()).unwrap();
    Ok(done(to_json(&report), text, Some(csv)))
}

fn subscript(j: usize) -> String {
    j.to_string()
        .chars()
        .map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap()).unwrap())
        .collect()
}

fn describe(v: &Violation) -> String {
    // `+ 0.0` prints a negative zero as `0`.
    match *v {
        Violation::Sigma { j, value } => format!("σ{} = {}", subscript(j), value + 0.0),
        Violation::SigmaDelta { margin } => format!("min λ + δ Σλ = {}", margin + 0.0),
        Violation::NonPositive { value } => format!("f = {}", value + 0.0),
        Violation::NonFinite { index } => format!("λ{} not finite", subscript(index + 1)),
    }
}

fn cone(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let spec = ConeSpec::parse(need(&cfg.cone, "cone")?, n)?;
    let lambda = lambda(cfg)?;
    let shift = boundary_shift(&spec, &lambda)?;
    let verdict = spec.check(lambda.as_slice());
    let json = json!({
        "cone": spec.to_string(),
        "lambda": lambda.as_slice(),
        "inside": verdict.is_ok(),
        "violation": verdict.err().map(|v| v.to_string()),
        "boundary_shift": shift,
    });
    Ok(match verdict {
        Ok(()) => done(json, format!("inside (boundary shift = {shift})\n"), None),
        Err(v) => Output {
            json,
            text: format!("outside ({})\n", describe(&v)),
            csv: None,
            exit: EXIT_DOMAIN,
        },
    })
}

fn inclusion(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let ks: Vec<usize> = match cfg.k {
        Some(k) => vec![k],
        None => (2..=n).collect(),
    };
    let samples = cfg.samples.unwrap_or(100_000);
    let seed = seed(cfg)?;
    let reports = ks
        .iter()
        .map(|&k| gamma_sigma_inclusion_test(k, n, samples, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::new();
    let mut csv = String::from("k,n,delta,samples,violations,worst_margin,worst_relative_margin\n");
    for r in &reports {
        writeln!(
            text,
            "k={} n={} delta={} samples={} violations={} worst_relative_margin={:e}",
            r.k, r.n, r.delta, r.samples, r.violations, r.worst_relative_margin
        )
        .unwrap();
        writeln!(
            csv,
            "{},{},{},{},{},{:e},{:e}",
            r.k, r.n, r.delta, r.samples, r.violations, r.worst_margin, r.worst_relative_margin
        )
        .unwrap();
    }
    Ok(done(to_json(&reports), text, Some(csv)))
}

fn radial_profile(cfg: &RunConfig) -> Result<RadialProfile, CliError> {
    let n = dim(cfg)?;
    let gauge = cfg.gauge.unwrap_or(Gauge::V);
    match (&cfg.profile, &cfg.profile_file) {
        (Some(text), None) => {
            let kind: ExactKind = text.parse()?;
            Ok(RadialProfile::exact(kind, n, gauge)?)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(RadialProfile::from_text(&text, n, gauge)?)
        }
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either --profile or --profile-file, not both".into(),
        )),
        (None, None) => Err(CliError::Usage(
            "missing --profile or --profile-file".into(),
        )),
    }
}

fn point(cfg: &RunConfig, n: usize) -> Result<Vec<f64>, CliError> {
    let x = need(&cfg.point, "point")?;
    if x.len() != n {
        return Err(CliError::Usage(format!(
            "--point has {} entries but --n is {n}",
            x.len()
        )));
    }
    Ok(x.clone())
}

fn schouten(cfg: &RunConfig) -> Result<Output, CliError> {
    let profile = radial_profile(cfg)?.lift();
    let x = point(cfg, profile.n())?;
    let eigs = schouten_eigs(&profile, &x)?;
    Ok(done(
        json!({ "point": x, "eigenvalues": eigs.as_slice() }),
        format!("{}\n", list(eigs.as_slice())),
        Some(format!(
            "{}\n{}\n",
            (1..=eigs.n())
                .map(|i| format!("lambda_{i}"))
                .collect::<Vec<_>>()
                .join(","),
            list(eigs.as_slice())
        )),
    ))
}

fn kelvin_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = dim(cfg)?;
    let kind: ExactKind = need(&cfg.profile, "profile")?.parse()?;
    let gauge = cfg.gauge.unwrap_or(Gauge::V);
    let profile = RadialProfile::exact(kind, n, gauge)?.lift();
    let x = point(cfg, n)?;
    let s: f64 = x.iter().map(|c| c * c).sum();
    if !(s > 0.0) {
        return Err(Error::Domain("the Kelvin transform is singular at the origin".into()).into());
    }
    let image: Vec<f64> = x.iter().map(|c| c / s).collect();
    let transformed = kelvin(&profile)?;
    let value = transformed.jet(&x)?.value;
    let at_x = schouten_eigs(&transformed, &x)?;
    let at_image = schouten_eigs(&profile, &image)?;
    let gap = at_x
        .as_slice()
        .iter()
        .zip(at_image.as_slice())
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let text = format!(
        "kelvin value: {value}\nschouten of transform at x: {}\nschouten of profile at x/|x|^2: {}\nmax difference: {gap:e}\n",
        list(at_x.as_slice()),
        list(at_image.as_slice())
    );
    Ok(done(
        json!({
            "point": x,
            "image": image,
            "value": value,
            "eigenvalues_transformed": at_x.as_slice(),
            "eigenvalues_at_image": at_image.as_slice(),
            "max_difference": gap,
        }),
        text,
        None,
    ))
}

fn solver_config(cfg: &RunConfig) -> Result<SolverConfig, CliError> {
    let mut solver = cfg
        .solver
        .clone()
        .ok_or_else(|| CliError::Usage("missing solver config (--config FILE)".into()))?;
    if let Some(grid) = cfg.grid {
        solver.grid = grid;
    }
    if let Some(p) = cfg.p {
        solver.exponent = Some(p);
    }
    Ok(solver)
}

fn solve(cfg: &RunConfig) -> Result<Output, CliError> {
    let result = newton_solve(&solver_config(cfg)?)?;
    let mut csv = String::from("r,v\n");
    for (r, v) in result.r.iter().zip(&result.v) {
        writeln!(csv, "{r:.16e},{v:.16e}").unwrap();
    }
    Ok(Output {
        json: to_json(&result),
        text: result.profile_text(),
        csv: Some(csv),
        exit: if result.converged {
            EXIT_OK
        } else {
            EXIT_NUMERIC
        },
    })
}

fn continue_p(cfg: &RunConfig) -> Result<Output, CliError> {
    let solver = solver_config(cfg)?;
    let schedule = match &cfg.schedule {
        Some(s) => s.clone(),
        None => {
            let p0 = solver.exponent()?;
            let step = cfg.step.unwrap_or(0.1);
            (0..cfg.steps.unwrap_or(5))
                .map(|i| p0 + step * i as f64)
                .collect()
        }
    };
    let cont = continuation_p(&solver, &schedule)?;
    let distances = cont.successive_distances();
    let mut text = String::new();
    let mut csv = String::from("p,iterations,residual,distance\n");
    for (i, r) in cont.results.iter().enumerate() {
        let d = if i == 0 { f64::NAN } else { distances[i - 1] };
        writeln!(
            text,
            "p={} iterations={} residual={:e} distance={}",
            r.exponent,
            r.iterations(),
            r.residual,
            if i == 0 {
                "-".to_string()
            } else {
                format!("{d:e}")
            }
        )
        .unwrap();
        writeln!(
            csv,
            "{},{},{:e},{}",
            r.exponent,
            r.iterations(),
            r.residual,
            if i == 0 {
                String::new()
            } else {
                format!("{d:e}")
            }
        )
        .unwrap();
    }
    if let Some(f) = &cont.failure {
        writeln!(text, "failed at p={}: {}", f.exponent, f.message).unwrap();
    }
    let exit = if cont.failure.is_some() {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    };
    Ok(Output {
        json: json!({
            "schedule": schedule,
            "distances": distances,
            "results": to_json(&cont.results),
            "failure": to_json(&cont.failure),
        }),
        text,
        csv: Some(csv),
        exit,
    })
}

fn converge(cfg: &RunConfig) -> Result<Output, CliError> {
    let study = convergence_study(&solver_config(cfg)?, cfg.refinements.unwrap_or(2))?;
    let mut text = String::new();
    let mut csv = String::from("grid,sup_error,order\n");
    for (i, (n, e)) in study.levels.iter().enumerate() {
        let order = if i == 0 {
            None
        } else {
            study.orders.get(i - 1)
        };
        let shown = order
            .map(|o| format!("{o:.4}"))
            .unwrap_or_else(|| "-".into());
        writeln!(text, "N={n} sup_error={e:e} order={shown}").unwrap();
        writeln!(
            csv,
            "{n},{e:e},{}",
            order.map(|o| o.to_string()).unwrap_or_default()
        )
        .unwrap();
    }
    Ok(done(to_json(&study), text, Some(csv)))
}

fn monitor(cfg: &RunConfig) -> Result<Output, CliError> {
    let profile: ConformalProfile = radial_profile(cfg)?.lift();
    let radius = cfg.radius.unwrap_or(1.0);
    let points = cfg.grid.unwrap_or(10_000);
    let grid = match cfg.sampling.unwrap_or(Sampling::Ray) {
        Sampling::Ray => SampleGrid::Ray { points },
        Sampling::Halton => SampleGrid::Halton { points },
    };
    let m = match cfg.monitor.unwrap_or(MonitorArg::Gradient) {
        MonitorArg::Gradient => gradient_monitor(&profile, radius, grid)?,
        MonitorArg::Hessian => hessian_monitor(&profile, radius, grid)?,
    };
    let text = format!(
        "supremum {}\nlocation {}\ndirection {}\n",
        m.supremum,
        list(&m.location),
        list(&m.direction)
    );
    Ok(done(to_json(&m), text, None))
}

fn bishop_gromov(cfg: &RunConfig) -> Result<Output, CliError> {
    let profile = radial_profile(cfg)?;
    let curve = bishop_gromov_curve(&profile, need(&cfg.radii, "radii")?)?;
    let mut text = String::new();
    for (r, q) in &curve.points {
        writeln!(text, "{r} {q}").unwrap();
    }
    writeln!(text, "non-increasing: {}", curve.is_non_increasing()).unwrap();
    let mut json = to_json(&curve);
    json["non_increasing"] = json!(curve.is_non_increasing());
    Ok(done(json, text, Some(curve.to_csv())))
}

fn holder_samples(path: &std::path::Path) -> Result<(Vec<Vec<f64>>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                field: format!("holder-samples line {}", i + 1),
                message: e.to_string(),
            })?;
        if row.len() < 2 {
            return Err(Error::Parse {
                field: format!("holder-samples line {}", i + 1),
                message: "need coordinates followed by a value".into(),
            }
            .into());
        }
        let (x, w) = row.split_at(row.len() - 1);
        points.push(x.to_vec());
        values.push(w[0]);
    }
    Ok((points, values))
}

fn harnack(cfg: &RunConfig) -> Result<Output, CliError> {
    let delta = *need(&cfg.delta, "delta")?;
    let n = dim(cfg)?;
    let samples = cfg
        .holder_samples
        .as_deref()
        .map(holder_samples)
        .transpose()?;
    let report = HarnackReport::new(
        delta,
        n,
        samples.as_ref().map(|(x, w)| (x.as_slice(), w.as_slice())),
    )?;
    let mut text = format!("beta {}\n", report.beta);
    if let Some(s) = report.seminorm {
        writeln!(text, "seminorm {s}").unwrap();
    }
    Ok(done(to_json(&report), text, None))
}
