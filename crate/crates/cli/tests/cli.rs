use std::path::PathBuf;
use std::process::{Command, Output};

fn carnot(args: &[&str]) -> Output {
    carnot_env(args, None)
}

fn carnot_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_carnot"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CARNOT_THREADS", t),
        None => cmd.env_remove("CARNOT_THREADS"),
    };
    cmd.output().expect("spawn carnot")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn check_algebra_reports_heisenberg() {
    let o = carnot(&["check-algebra", "heisenberg.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["summary"], "valid graded algebra, Q=4, step 2");
    assert_eq!(v["valid"], true);
    assert!(String::from_utf8_lossy(&o.stderr).contains("valid graded algebra, Q=4, step 2"));
}

#[test]
fn group_file_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, heisenberg_json()).unwrap();
    let o = carnot(&["check-algebra", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["group"], "heisenberg");
}

fn heisenberg_json() -> &'static str {
    r#"{"name": "heisenberg", "dim": 3, "weights": ["1", "1", "2"], "basis": ["X", "Y", "Z"],
        "brackets": [{"i": 1, "j": 2, "k": 3, "c": "1"}]}"#
}

#[test]
fn corrupted_algebra_lists_jacobi_violation() {
    let o = carnot(&["check-algebra", &data("corrupted.json")]);
    assert_eq!(o.status.code(), Some(1));
    let v = stdout_json(&o);
    assert_eq!(v["valid"], false);
    let listed: Vec<&str> = v["violations"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert!(listed.iter().any(|s| s.contains("Jacobi")), "{listed:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("Jacobi"));

    // other subcommands refuse it too
    let o = carnot(&["group-law", &data("corrupted.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Jacobi"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "dim": 2}"#).unwrap();
    assert_eq!(carnot(&["check-algebra", bad.to_str().unwrap()]).status.code(), Some(1));

    let rat = dir.path().join("rat.json");
    std::fs::write(&rat, r#"{"name": "x", "dim": 1, "weights": ["1/0"], "basis": ["X"], "brackets": []}"#).unwrap();
    assert_eq!(carnot(&["check-algebra", rat.to_str().unwrap()]).status.code(), Some(1));

    let missing = dir.path().join("missing.json");
    assert_eq!(carnot(&["check-algebra", missing.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(carnot(&["type0-kernel", "abelian1", "--grid-n", "64"]).status.code(), Some(1));
    assert_eq!(carnot(&["zoom-demo", "heisenberg", "--lambda-min", "2", "--lambda-max", "1"]).status.code(), Some(1));
    assert_eq!(carnot(&["group-law", "heisenberg", "--format", "csv"]).status.code(), Some(1));

    // --out pointing at a regular file cannot be created as a directory
    let file = dir.path().join("plain");
    std::fs::write(&file, "").unwrap();
    assert_eq!(carnot(&["strata", "heisenberg", "--out", file.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn strata_in_rank_order() {
    let o = carnot(&["strata", "heisenberg.json", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    let ds: Vec<serde_json::Value> = v["strata"].as_array().unwrap().iter().map(|s| s["d"].clone()).collect();
    assert_eq!(ds, vec![serde_json::json!([2, 1, 0]), serde_json::json!([0, 0, 0])]);
    let counts: u64 = v["strata"].as_array().unwrap().iter().map(|s| s["sample_count"].as_u64().unwrap()).sum();
    assert_eq!(counts, 200);
}

#[test]
fn out_directory_receives_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out");
    let o = carnot(&["orbit-dims", "filiform4", "--samples", "20", "--out", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(out.join("orbit-dims.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.starts_with("index,covector,d,s,t,"));
}

#[test]
fn exact_subcommands_succeed_on_bundled_groups() {
    for group in ["abelian2", "anisotropic3", "heisenberg", "filiform4"] {
        for cmd in ["group-law", "vector-fields", "rockland", "polarization"] {
            let o = carnot(&[cmd, group, "--samples", "30"]);
            assert_eq!(o.status.code(), Some(0), "{cmd} {group}: {}", String::from_utf8_lossy(&o.stderr));
        }
    }
    let v = stdout_json(&carnot(&["rockland", "heisenberg"]));
    assert_eq!(v["degree"], "4");
}

#[test]
fn fix_operator_writes_convergence_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["fix-operator", "heisenberg", "--grid-n", "9", "--lambda-min", "1e-2", "--lambda-max", "1e2", "--n-lambda", "20"];
    let mut full: Vec<&str> = args.to_vec();
    let out = dir.path().to_str().unwrap();
    full.extend(["--format", "csv", "--out", out]);
    let o = carnot(&full);
    let csv = std::fs::read_to_string(dir.path().join("fix-operator.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("cutoff_a,cutoff_b,diff_from_previous,norm"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0][2].is_empty());
    let diffs: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(diffs[1] < diffs[0], "{diffs:?}");
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let cases: [&[&str]; 4] = [
        &["strata", "filiform4", "--samples", "50", "--seed", "7"],
        &["type0-kernel", "heisenberg", "--grid-n", "17", "--n-lambda", "60", "--format", "csv"],
        &["decay-probe", "heisenberg", "--grid-n", "9", "--n-lambda", "3"],
        &["zoom-demo", "heisenberg", "--grid-n", "17", "--n-lambda", "2"],
    ];
    for args in cases {
        let a = carnot_env(args, Some("1"));
        let b = carnot_env(args, Some("1"));
        let c = carnot_env(args, Some("3"));
        assert!(!a.stdout.is_empty(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?} differs between runs");
        assert_eq!(a.stdout, c.stdout, "{args:?} differs between thread counts");
    }
}

#[test]
fn seed_changes_samples() {
    let a = carnot(&["orbit-dims", "heisenberg", "--samples", "10", "--seed", "1"]);
    let b = carnot(&["orbit-dims", "heisenberg", "--samples", "10", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}
