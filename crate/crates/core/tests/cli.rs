use std::path::Path;
use std::process::{Command, Output};

fn equinet(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equinet"))
        .args(args)
        .current_dir(cwd)
        .env_remove("EQUINET_OUT")
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn list_experiments_names_every_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let out = equinet(&["list-experiments"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let s = text(&out.stdout);
    for k in ["clt_sweep", "sn_invariance_fit", "basic_equivariance", "downsample_nonequivariance", "charge_rotation", "lambda_consistency", "invariant_poly_fit"] {
        assert!(s.contains(k), "{k} missing from {s}");
    }
}

#[test]
fn missing_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = equinet(&["run", "missing.json"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("missing.json") && err.contains("No such file"), "{err}");
}

#[test]
fn unknown_flag_prints_usage_and_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = equinet(&["run", "x.json", "--bogus"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("Usage"));
}

#[test]
fn invalid_config_lists_every_offending_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", r#"{"kind":"clt_sweep","lambdas":[0.25,0.5],"ratio_max":-1,"typo":3}"#);
    let out = equinet(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("typo"), "{err}");
    let cfg = write_config(tmp.path(), "bad2.json", r#"{"kind":"clt_sweep","lambdas":[0.25,0.5],"ratio_max":-1}"#);
    let err = text(&equinet(&["run", &cfg], tmp.path()).stderr);
    assert!(err.contains("lambdas") && err.contains("ratio_max"), "{err}");
}

#[test]
fn check_kernels_prints_two_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = equinet(&["check-kernels", "--ab", "1,0", "--lambdas", "0.5,0.25"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let s = text(&out.stdout);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 3, "{s}");
    assert!(lines[0].starts_with("a,b,lambda,gap"));
    assert!(lines[1].starts_with("1,0,0.5,") && lines[2].starts_with("1,0,0.25,"));
}

#[test]
fn check_kernels_rejects_ascending_lambdas() {
    let tmp = tempfile::tempdir().unwrap();
    let out = equinet(&["check-kernels", "--ab", "0,0", "--lambdas", "0.25,0.5"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_and_job_counts_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"kind":"downsample_nonequivariance","seed":7,"trials":3}"#);
    let run = |dir: &str, jobs: &str| {
        let out = equinet(&["--jobs", jobs, "run", &cfg, "--out", dir], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
        let d = tmp.path().join(dir);
        (std::fs::read(d.join("report.json")).unwrap(), std::fs::read(d.join("downsample.csv")).unwrap())
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "3"));
    assert!(tmp.path().join("a/timings.json").exists());
}

#[test]
fn seed_override_changes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"kind":"basic_equivariance","triples":4}"#);
    equinet(&["run", &cfg, "--out", "s1", "--seed", "1"], tmp.path());
    equinet(&["run", &cfg, "--out", "s2", "--seed", "2"], tmp.path());
    let r1 = std::fs::read_to_string(tmp.path().join("s1/report.json")).unwrap();
    let r2 = std::fs::read_to_string(tmp.path().join("s2/report.json")).unwrap();
    assert!(r1.contains("\"seed\": 1") && r2.contains("\"seed\": 2"));
    assert_ne!(r1, r2);
}

#[test]
fn failed_verdict_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"kind":"clt_sweep","pairs":[[0,0]],"lambdas":[1.0,0.5],"ratio_max":1e-6,"out_dir":"o"}"#);
    let out = equinet(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains("verdict: fail"));
    let report = std::fs::read_to_string(tmp.path().join("o/report.json")).unwrap();
    assert!(report.contains("\"verdict\": \"fail\""));
}

#[test]
fn env_var_overrides_config_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"kind":"clt_sweep","pairs":[[0,0]],"lambdas":[1.0,0.5],"ratio_max":0.5,"out_dir":"from_cfg"}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_equinet"))
        .args(["run", &cfg])
        .current_dir(tmp.path())
        .env("EQUINET_OUT", tmp.path().join("from_env"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert!(tmp.path().join("from_env/kernel_gap.csv").exists());
    assert!(!tmp.path().join("from_cfg").exists());
}
