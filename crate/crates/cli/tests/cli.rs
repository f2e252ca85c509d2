use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn chl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chl"))
        .args(args)
        .env_remove("CHL_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eval_prints_root_three() {
    let o = chl(&[
        "eval",
        "--op",
        "sigma-root:k=2",
        "--n",
        "3",
        "--lambda",
        "1,1,1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert_eq!(v, 3f64.sqrt());
}

#[test]
fn dimension_defaults_to_tuple_length() {
    let o = chl(&["eval", "--op", "sigma-root:k=2", "--lambda", "1,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 3f64.sqrt());
    let o = chl(&[
        "eval",
        "--op",
        "sigma-root:k=2",
        "--n",
        "4",
        "--lambda",
        "1,1,1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = chl(&["eval", "--op", "sigma-root:k=2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("missing --n"));
}

#[test]
fn cone_outside_exits_one() {
    let o = chl(&[
        "cone",
        "--cone",
        "gamma:k=2",
        "--n",
        "3",
        "--lambda",
        "1,1,-0.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "outside (σ₂ = 0)");
}

#[test]
fn cone_inside_reports_shift() {
    let o = chl(&[
        "cone",
        "--cone",
        "sigma:delta=0.5",
        "--n",
        "3",
        "--lambda",
        "1,1,1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["inside"], true);
    // -(1 + 0.5 * 3) / (1 + 3 * 0.5)
    assert_eq!(j["boundary_shift"].as_f64().unwrap(), -1.0);
}

#[test]
fn exit_codes() {
    // Inadmissible eigenvalues: domain error.
    let o = chl(&[
        "eval",
        "--op",
        "sigma-root:k=2",
        "--n",
        "3",
        "--lambda",
        "1,-2,-1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not admissible"));
    // Unknown subcommand and flag: usage error with help.
    let o = chl(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("Usage"));
    let o = chl(&["eval", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(3));
    // A flag the command does not use.
    let o = chl(&[
        "eval",
        "--op",
        "sigma-root:k=2",
        "--n",
        "3",
        "--lambda",
        "1,1,1",
        "--radius",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    // Length mismatch and malformed descriptors.
    let o = chl(&[
        "eval",
        "--op",
        "sigma-root:k=2",
        "--n",
        "3",
        "--lambda",
        "1,1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = chl(&[
        "eval",
        "--op",
        "sigma-root:q=2",
        "--n",
        "3",
        "--lambda",
        "1,1,1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    // Harnack exponent outside its range.
    let o = chl(&["harnack", "--delta", "0.5", "--n", "4"]);
    assert_eq!(o.status.code(), Some(1));
    // Help is not an error.
    assert_eq!(chl(&["--help"]).status.code(), Some(0));
}

#[test]
fn harnack_beta() {
    let o = chl(&["harnack", "--delta", "0.25", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "beta 0.4");
}

#[test]
fn holder_samples_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.csv");
    std::fs::write(&file, "# x, w\n1.0,0.0\n2.0,1.0\n").unwrap();
    let o = chl(&[
        "harnack",
        "--delta",
        "0",
        "--n",
        "3",
        "--holder-samples",
        path_str(&file),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["seminorm"].as_f64().unwrap(), 1.0);
    std::fs::write(&file, "1.0,x\n").unwrap();
    let o = chl(&[
        "harnack",
        "--delta",
        "0",
        "--n",
        "3",
        "--holder-samples",
        path_str(&file),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let cfg = config("bubble_annulus.json");
    for out in [&a, &b] {
        let o = chl(&[
            "solve",
            "--config",
            path_str(&cfg),
            "--out",
            path_str(out),
            "--format",
            "json",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let j: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(j["converged"], true);
    assert_eq!(j["v"].as_array().unwrap().len(), 65);
}

#[test]
fn solve_text_is_a_profile() {
    let cfg = config("bubble_annulus.json");
    let o = chl(&["solve", "--config", path_str(&cfg), "--grid", "32"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# r v\n"));
    assert_eq!(text.lines().count(), 34);
    let o = chl(&[
        "solve",
        "--config",
        path_str(&cfg),
        "--grid",
        "32",
        "--format",
        "csv",
    ]);
    assert!(stdout(&o).starts_with("r,v\n"));
}

#[test]
fn solve_without_convergence_exits_two() {
    let cfg = config("bubble_annulus.json");
    let o = chl(&["solve", "--config", path_str(&cfg), "--p", "1000"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(
        &file,
        r#"{"n": 4, "operator": "sigma-root:k=2", "domian": [0.1, 2.0]}"#,
    )
    .unwrap();
    let o = chl(&["solve", "--config", path_str(&file)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`domian`"), "{}", stderr(&o));
    std::fs::write(
        &file,
        r#"{"command": "eval", "op": "sigma-root:k=2", "lambada": [1, 2, 3]}"#,
    )
    .unwrap();
    let o = chl(&["eval", "--config", path_str(&file)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`lambada`"), "{}", stderr(&o));
}

#[test]
fn emitted_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let cfg = config("bubble_annulus.json");
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "eval",
            "--op",
            "quotient:k=2,l=1",
            "--n",
            "4",
            "--lambda",
            "1,2,3,-0.1",
        ],
        vec![
            "axioms",
            "--op",
            "inv-power",
            "--n",
            "3",
            "--samples",
            "10",
            "--seed",
            "7",
        ],
        vec![
            "solve",
            "--config",
            path_str(&cfg),
            "--grid",
            "16",
            "--p",
            "3.25",
        ],
        vec![
            "bishop-gromov",
            "--profile",
            "sphere:radius=1",
            "--n",
            "3",
            "--radii",
            "0.5,1",
            "--format",
            "csv",
        ],
    ];
    for args in cases {
        let mut a = args.clone();
        a.push("--emit-config");
        let o = chl(&a);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::write(&first, &o.stdout).unwrap();
        let o2 = chl(&[args[0], "--config", path_str(&first), "--emit-config"]);
        assert_eq!(o2.status.code(), Some(0), "{}", stderr(&o2));
        assert_eq!(o.stdout, o2.stdout, "{args:?}");
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.json");
    std::fs::write(
        &file,
        r#"{"command": "eval", "op": "sigma-root:k=1", "n": 3, "lambda": [1, 1, 1]}"#,
    )
    .unwrap();
    let o = chl(&["eval", "--config", path_str(&file)]);
    assert_eq!(stdout(&o).trim(), "3");
    let o = chl(&[
        "eval",
        "--config",
        path_str(&file),
        "--op",
        "sigma-root:k=3",
    ]);
    assert_eq!(stdout(&o).trim(), "1");
    // A config for another command is refused.
    let o = chl(&["grad", "--config", path_str(&file)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn seed_from_environment() {
    let run = |seed: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_chl"));
        cmd.args([
            "inclusion",
            "--k",
            "2",
            "--n",
            "3",
            "--samples",
            "50",
            "--format",
            "json",
        ]);
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        match seed {
            Some(s) => cmd.env("CHL_SEED", s),
            None => cmd.env_remove("CHL_SEED"),
        };
        let o = cmd.output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    let default = run(None, None);
    assert_eq!(default, run(Some("20240917"), None));
    assert_ne!(default, run(Some("1"), None));
    assert_eq!(run(Some("1"), None), run(Some("5"), Some("1")));
    let o = Command::new(env!("CARGO_BIN_EXE_chl"))
        .args(["inclusion", "--k", "2", "--n", "3"])
        .env("CHL_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn continuation_on_the_ball() {
    let cfg = config("bubble_ball.json");
    let o = chl(&["continue-p", "--config", path_str(&cfg), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let d = j["distances"].as_array().unwrap();
    assert_eq!(d.len(), 4);
    assert!(d.iter().all(|x| x.as_f64().unwrap() < 0.2));
}

#[test]
fn continuation_failure_keeps_results() {
    let cfg = config("bubble_ball.json");
    let o = chl(&[
        "continue-p",
        "--config",
        path_str(&cfg),
        "--grid",
        "32",
        "--schedule",
        "3,3.05,1000",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["results"].as_array().unwrap().len(), 2);
    assert_eq!(j["failure"]["exponent"].as_f64().unwrap(), 1000.0);
}

#[test]
fn convergence_study_orders() {
    let cfg = config("bubble_annulus.json");
    let o = chl(&[
        "converge",
        "--config",
        path_str(&cfg),
        "--grid",
        "32",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for order in j["orders"].as_array().unwrap() {
        assert!((order.as_f64().unwrap() - 2.0).abs() < 0.3);
    }
}

#[test]
fn profile_commands() {
    let o = chl(&[
        "schouten",
        "--profile",
        "bubble:scale=1",
        "--n",
        "4",
        "--point",
        "0.3,-0.2,0.1,0",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for e in j["eigenvalues"].as_array().unwrap() {
        assert!((e.as_f64().unwrap() - 2.0).abs() < 1e-8);
    }
    let o = chl(&[
        "kelvin",
        "--profile",
        "bubble:scale=0.5",
        "--n",
        "3",
        "--point",
        "0.4,0.1,-0.3",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(j["max_difference"].as_f64().unwrap() < 1e-7);
    let o = chl(&[
        "kelvin",
        "--profile",
        "bubble:scale=0.5",
        "--n",
        "3",
        "--point",
        "0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = chl(&[
        "monitor",
        "--profile",
        "const:c=2",
        "--n",
        "3",
        "--format",
        "json",
    ]);
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["supremum"].as_f64().unwrap(), 0.0);
    let o = chl(&[
        "bishop-gromov",
        "--profile",
        "sphere:radius=1",
        "--n",
        "3",
        "--radii",
        "3.141592653589793",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let q: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((q - 3.0 / (2.0 * std::f64::consts::PI.powi(2))).abs() < 1e-4);
    let o = chl(&[
        "bishop-gromov",
        "--profile",
        "sphere:radius=1",
        "--n",
        "3",
        "--radii",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn profile_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("u.txt");
    let mut text = String::from("# r u\n");
    for i in 0..=40 {
        text.push_str(&format!("{} 1\n", 0.05 * i as f64));
    }
    std::fs::write(&file, text).unwrap();
    let o = chl(&[
        "bishop-gromov",
        "--profile-file",
        path_str(&file),
        "--gauge",
        "u",
        "--n",
        "3",
        "--radii",
        "0.5,1.5",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for p in j["points"].as_array().unwrap() {
        assert!((p[1].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn csv_only_where_tabular() {
    let o = chl(&["harnack", "--delta", "0", "--n", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(3));
}
