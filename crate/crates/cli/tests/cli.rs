use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> &'static str {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    Box::leak(p.to_str().unwrap().to_owned().into_boxed_str())
}

fn crnstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnstab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_cycle() {
    let o = crnstab(&["analyze", data("cycle.crn")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("deficiency: 0, weakly reversible: yes, CB equilibrium: (1, 1)\n"));
}

#[test]
fn analyze_candidate_is_not_weakly_reversible() {
    let o = crnstab(&["analyze", data("candidate.crn")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("weakly reversible: no"));
    assert!(stdout(&o).contains("S-perp basis: (0.7071067812, 0.7071067812)"));
}

#[test]
fn analyze_json_mirrors_report() {
    let o = crnstab(&["analyze", data("reference.crn"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["deficiency"], 0);
    assert_eq!(v["weakly_reversible"], true);
    assert_eq!(v["complexes"].as_array().unwrap().len(), 2);
    let eq = v["cb_equilibrium"].as_array().unwrap();
    // x_A^3 = x_A x_B^2 with the rates equal.
    let (a, b) = (eq[0].as_f64().unwrap(), eq[1].as_f64().unwrap());
    assert!((a - b).abs() < 1e-9 * a);
}

#[test]
fn malformed_file_reports_line() {
    let o = crnstab(&["analyze", data("malformed.crn")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = crnstab(&["analyze", "/nonexistent/net.crn"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn realize_scalar_and_general_maps() {
    let o = crnstab(&["realize", data("cycle.crn"), "--Q", "2,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "A -> 2B : k=1, tau=0.5\n2B -> 2A + 2B : k=0.5, tau=1\n2A + 2B -> A : k=0.125, tau=1.5\n"
    );
    assert!(stderr(&o).contains("certificate: linearly conjugate"));

    let o = crnstab(&["realize", data("cycle.crn"), "--Q", "2,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "A -> B : k=1, tau=0.5\n2B -> 2A + B : k=2, tau=1\n2A + 2B -> A : k=0.5, tau=1.5\n\
         2B -> 4B : k=1\n2A + 2B -> 2A + 4B : k=0.25\n"
    );
}

#[test]
fn identity_map_reprints_canonically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.crn");
    let o = crnstab(&["realize", data("cycle.crn"), "--Q", "1,1", "--output", path(&first)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("certificate"));
    let canonical = fs::read_to_string(&first).unwrap();
    assert!(!canonical.contains('#'));
    let o = crnstab(&["realize", path(&first), "--Q", "1,1"]);
    assert_eq!(stdout(&o), canonical);
}

#[test]
fn realize_rejects_bad_map() {
    let o = crnstab(&["realize", data("cycle.crn"), "--Q", "2,-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = crnstab(&["realize", data("cycle.crn"), "--Q", "2,1,1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn classify_pair() {
    let o = crnstab(&["classify", data("candidate.crn"), "--against", data("reference.crn")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("accepted\n"));
    assert!(out.contains("b = 1, 1/2\n"));
    assert!(out.contains("companion delays: 0.1, 2\n"));
}

#[test]
fn classify_identical_files() {
    let r = data("reference.crn");
    let o = crnstab(&["classify", r, "--against", r]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("b = 1, 1\n"));
}

#[test]
fn classify_rejects_rate_perturbation() {
    let args = [
        "classify",
        data("candidate_perturbed.crn"),
        "--against",
        data("reference.crn"),
    ];
    let o = crnstab(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("rejected: b_2 = 2 > 1"));

    // The rate ratio 2 also disagrees with the vector factor 1/2.
    let mut allowed = args.to_vec();
    allowed.push("--allow-b-greater-1");
    assert_eq!(crnstab(&allowed).status.code(), Some(1));
}

#[test]
fn classify_allows_stretched_vectors_on_request() {
    let args = ["classify", data("wide_candidate.crn"), "--against", data("wide_reference.crn")];
    let o = crnstab(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("rejected: b_1 = 2 > 1"));

    let mut allowed = args.to_vec();
    allowed.push("--allow-b-greater-1");
    let o = crnstab(&allowed);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("b = 2, 1\n"));
    assert!(stdout(&o).contains("stability result applies: no"));
}

#[test]
fn classify_species_mismatch() {
    let o = crnstab(&["classify", data("candidate.crn"), "--against", data("other_species.crn")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn classify_json() {
    let o = crnstab(&[
        "classify",
        data("candidate.crn"),
        "--against",
        data("reference.crn"),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["accepted"], true);
    assert_eq!(v["b"], serde_json::json!(["1", "1/2"]));
    assert_eq!(v["companion_delays"], serde_json::json!(["0.1", "2"]));
}

#[test]
fn simulate_zero_horizon_has_one_row() {
    let o = crnstab(&["simulate", data("candidate.crn"), "--history", "const:5,1", "--t-end", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "t,x_A,x_B\n0,5,1\n");
}

#[test]
fn simulate_converges_to_class_limit() {
    let o = crnstab(&[
        "simulate",
        data("candidate.crn"),
        "--tau",
        "0.1,1",
        "--history",
        "expr:sin(s)+1,cos(s)+1",
        "--t-end",
        "100",
        "--sample-every",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 102);
    let last: Vec<f64> = out.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 100.0);
    // Root of 2e + 6.3 e^3 = c_a for this history.
    let e = 1.25705709216617493049;
    assert!((last[1] - e).abs() < 1e-6 && (last[2] - e).abs() < 1e-6, "{last:?}");
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate",
        data("candidate.crn"),
        "--history",
        "const:5,1",
        "--t-end",
        "2",
    ];
    assert_eq!(crnstab(&args).stdout, crnstab(&args).stdout);
}

#[test]
fn simulate_flag_validation() {
    let base = ["simulate", data("candidate.crn"), "--history", "const:5,1"];
    let with = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        crnstab(&a).status.code()
    };
    assert_eq!(with(&["--t-end", "-1"]), Some(2));
    assert_eq!(with(&["--t-end", "1", "--step", "0"]), Some(2));
    assert_eq!(with(&["--t-end", "1", "--tau", "1"]), Some(2));
    assert_eq!(with(&[]), Some(2));
    let o = crnstab(&["simulate", data("candidate.crn"), "--t-end", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_positivity_loss() {
    let o = crnstab(&["simulate", data("decay.crn"), "--history", "const:10", "--t-end", "5", "--step", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("positivity"));
}

#[test]
fn simulate_json() {
    let o = crnstab(&[
        "simulate",
        data("candidate.crn"),
        "--history",
        "const:5,1",
        "--t-end",
        "1",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["t"].as_array().unwrap().len(), 11);
    assert_eq!(v["x"][0], serde_json::json!([5.0, 1.0]));
}

#[test]
fn batch_runs_scenarios_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("runs.json");
    fs::write(
        &manifest,
        r#"[{"output": "a.csv", "tau": "0.1,1", "history": "const:5,1"},
            {"output": "b.csv", "tau": "2,0.5", "history": "expr:sin(s)+1,cos(s)+1", "sample_every": 0.5}]"#,
    )
    .unwrap();
    let o = crnstab(&[
        "simulate",
        data("candidate.crn"),
        "--t-end",
        "3",
        "--batch",
        path(&manifest),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a.lines().count(), 32);
    assert_eq!(b.lines().count(), 8);

    let single = crnstab(&[
        "simulate",
        data("candidate.crn"),
        "--tau",
        "0.1,1",
        "--history",
        "const:5,1",
        "--t-end",
        "3",
    ]);
    assert_eq!(stdout(&single), a);
    // Only the outputs and the manifest remain; no temporary files.
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn verify_trigonometric_history_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = crnstab(&[
        "verify",
        data("candidate.crn"),
        "--tau",
        "2,0.5",
        "--history",
        "expr:sin(s)+1,cos(s)+1",
        "--t-end",
        "20",
        "--lyapunov",
        "ref=1,1",
        "--conserved",
        "1,1",
        "--output",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = stdout(&o);
    assert!(summary.contains("dissipation: PASS"));
    assert!(summary.contains("conservation c_a1 (a = (1, 1)): PASS"));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x_A,x_B,V,c_a1");
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // c_a of this history, from high-precision quadrature.
    assert!((first[4] - 12.5345688047032419481).abs() < 1e-8);
}

#[test]
fn verify_realization_with_map() {
    let o = crnstab(&[
        "verify",
        data("reference.crn"),
        "--q",
        "2,1",
        "--history",
        "const:5,1",
        "--t-end",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("dissipation: PASS"));
    assert!(stdout(&o).starts_with("t,x_A,x_B,V,c_a1\n"));
}

#[test]
fn verify_flags_violations() {
    // Not conserved: a is not orthogonal to the reaction vectors.
    let o = crnstab(&[
        "verify",
        data("candidate.crn"),
        "--history",
        "const:5,1",
        "--t-end",
        "1",
        "--lyapunov",
        "ref=1,1",
        "--conserved",
        "1,0",
    ]);
    assert_eq!(o.status.code(), Some(3));

    // A reference that is not an equilibrium does not give a Lyapunov functional.
    let o = crnstab(&[
        "verify",
        data("candidate.crn"),
        "--history",
        "const:5,1",
        "--t-end",
        "5",
        "--lyapunov",
        "ref=5,0.2",
    ]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).contains("dissipation: FAIL"));
}

#[test]
fn verify_needs_reference_without_weak_reversibility() {
    let o = crnstab(&["verify", data("candidate.crn"), "--history", "const:5,1", "--t-end", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--lyapunov"));
}

#[test]
fn conjugate_finds_and_checks_maps() {
    let dir = tempfile::tempdir().unwrap();
    let real = dir.path().join("real.crn");
    crnstab(&["realize", data("cycle.crn"), "--Q", "2,1", "--output", path(&real)]);

    let o = crnstab(&["conjugate", path(&real), data("cycle.crn")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "conjugate: yes, Q = diag(2, 1)\n");

    let o = crnstab(&["conjugate", path(&real), data("cycle.crn"), "--Q", "2,2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatch"));

    let o = crnstab(&["conjugate", data("candidate.crn"), data("reference.crn")]);
    assert_eq!(o.status.code(), Some(1));
}
