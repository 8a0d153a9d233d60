use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_estokes")).args(args).output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn solve_writes_vtk_and_summary() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "solve",
        "--config",
        config("benchmark.toml").to_str().unwrap(),
        "--problem",
        "pp",
        "--mesh-n",
        "4",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(out.path(), "solution.vtk").contains("UNSTRUCTURED_GRID"));
    assert!(read(out.path(), "summary.csv").lines().count() >= 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("pp solve"));
}

#[test]
fn sweep_writes_error_table_and_fits() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep",
        "--config",
        config("benchmark.toml").to_str().unwrap(),
        "--mesh-n",
        "4",
        "--eps-grid",
        "10:1000:10",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = read(out.path(), "sweep_pp.csv");
    let mut lines = sweep.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eps,err_u_l2,err_u_h1semi,err_p_l2,err_p_h1semi,reference"
    );
    assert_eq!(lines.count(), 3);
    assert!(read(out.path(), "fit_pp.csv").starts_with("column,slope,intercept,window_lo,window_hi"));
}

#[test]
fn asymptotics_writes_remainders() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "asymptotics",
        "--config",
        config("benchmark.toml").to_str().unwrap(),
        "--mesh-n",
        "4",
        "--k",
        "1",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rem = read(out.path(), "remainder_k1.csv");
    assert!(rem.starts_with("eps,rem_u_h1,rem_p_h1,k"));
    assert_eq!(rem.lines().count(), 5);
}

#[test]
fn mms_reports_rates() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "mms",
        "--config",
        config("mms_polynomial.toml").to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(out.path(), "mms.csv").lines().count(), 4);
    assert!(read(out.path(), "mms_rates.csv").contains("err_u_h1"));
}

#[test]
fn invalid_eps_fails_without_output() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "solve",
        "--config",
        config("benchmark.toml").to_str().unwrap(),
        "--eps",
        "-1",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps"));
    assert!(!out.path().join("solution.vtk").exists());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(config("benchmark.toml")).unwrap() + "\nmystery = 1\n";
    std::fs::write(&path, text).unwrap();
    let o = run(&["solve", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("mystery"));
}

#[test]
fn repeated_sweeps_write_identical_csv() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = run(&[
            "sweep",
            "--config",
            config("benchmark.toml").to_str().unwrap(),
            "--mesh-n",
            "4",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["sweep_pp.csv", "fit_pp.csv"] {
        assert_eq!(read(dirs[0].path(), name), read(dirs[1].path(), name), "{name}");
    }
}
