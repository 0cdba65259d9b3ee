use std::path::Path;
use std::process::{Command, Output};

fn sievelab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sievelab"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn prints_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"experiment":"gap-tail","x":1e5,"lambdas":[1]}"#,
    );
    let out = sievelab(&["gap-tail", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tables"][0]["name"], "gap-tail-primes");
    assert_eq!(v["tables"][0]["provenance"], "exact");
    assert!(v["version"].is_string());
}

#[test]
fn writes_csv_and_overrides_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"experiment":"model-compare","x":1e5,"tuples":[[0,2]],"models":["cramer"],"seeds":[1,2,3]}"#,
    );
    let out_dir = dir.path().join("out");
    let out = sievelab(
        &[
            "model-compare",
            "--config",
            &cfg,
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "42",
            "--threads",
            "2",
        ],
        &[],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(out_dir.join("model-compare.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tuple,model,seed,count,singular_series,nominal_hl,nominal_cramer,ratio_hl,ratio_cramer"
    );
    // one seed row plus the mean
    assert_eq!(lines.filter(|l| l.contains(",42,")).count(), 1);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["config"]["seeds"], serde_json::json!([42]));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write(
        dir.path(),
        "a.json",
        r#"{"experiment":"gap-tail","x":1e5,"lambda":[1]}"#,
    );
    assert_eq!(
        sievelab(&["gap-tail", "--config", &bad_key], &[])
            .status
            .code(),
        Some(2)
    );
    let good = write(
        dir.path(),
        "b.json",
        r#"{"experiment":"gap-tail","x":1e5,"lambdas":[1]}"#,
    );
    assert_eq!(
        sievelab(&["poisson-fit", "--config", &good], &[])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sievelab(&["no-such", "--config", &good], &[]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        sievelab(&["gap-tail", "--config", missing.to_str().unwrap()], &[])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(sievelab(&["gap-tail"], &[]).status.code(), Some(2));
}

#[test]
fn sieve_cap_is_a_module_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"experiment":"gap-tail","x":1e6,"lambdas":[1]}"#,
    );
    let out = sievelab(
        &["gap-tail", "--config", &cfg],
        &[("SIEVELAB_MAX_X", "100000")],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the configured maximum"));
    let out = sievelab(
        &["gap-tail", "--config", &cfg],
        &[("SIEVELAB_MAX_X", "lots")],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_configs_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let dir = tempfile::tempdir().unwrap();
        let out = sievelab(
            &[
                &name,
                "--config",
                path.to_str().unwrap(),
                "--out",
                dir.path().to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(dir.path().join("report.json").exists());
        seen += 1;
    }
    assert_eq!(seen, 5);
}
