use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zaremba(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zaremba"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_gamma2_prints_three_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let o = zaremba(&["solve", "--family", "gamma", "--ell", "pi", "--beta", "0.25pi", "--k", "3", "--h", "0.1", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("lambda")).count(), 3);
    for f in ["manifest.txt", "solve.csv", "nodal.csv", "nodal_u2.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn sweep_rerun_from_manifest_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = zaremba(&[
        "sweep", "--ell", "pi", "--grid-den", "16", "--grid-max", "4", "--h", "0.2", "--estimate-tol", "false",
        "--out", path(a.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read(a.path().join("sweep.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 6);
    assert!(fs::read_to_string(a.path().join("sweep.svg")).unwrap().contains("<polyline"));

    let manifest = a.path().join("manifest.txt");
    let o = zaremba(&["--config", path(&manifest), "--out", path(b.path()), "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(b.path().join("sweep.csv")).unwrap(), csv);
}

#[test]
fn converge_dirichlet_reports_the_bessel_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = zaremba(&["converge", "--h-list", "0.2,0.1,0.05", "--k", "3", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = text.lines().find(|l| l.starts_with("0.05,")).unwrap();
    let l1: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((l1 - 5.7831859629).abs() < 0.01, "{l1}");
    assert!(text.contains("reference 5.7831859"));
}

#[test]
fn violated_check_exits_with_findings() {
    // A baseline grid holding only beta = 0 misses the true minimum, so
    // the minimizer check legitimately fails.
    let dir = tempfile::tempdir().unwrap();
    let o = zaremba(&[
        "minimize", "--grid-den", "1", "--grid-max", "0", "--samples", "1", "--h", "0.2", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FINDING"));
    assert!(dir.path().join("minimize.csv").exists());
}

#[test]
fn runtime_error_exits_two() {
    // Both ends of this bracket carry the same symmetry class.
    let dir = tempfile::tempdir().unwrap();
    let o = zaremba(&["beta-c", "--lo", "0", "--hi", "0.05", "--h", "0.2", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no symmetry flip"));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "command = solve\ncolour = red\n").unwrap();
    assert_eq!(zaremba(&["--config", path(&cfg)]).status.code(), Some(64));
    assert_eq!(zaremba(&[]).status.code(), Some(64));
    assert_eq!(zaremba(&["solve", "--beta", "quarter"]).status.code(), Some(64));
    assert_eq!(zaremba(&["solve", "--h", "0"]).status.code(), Some(64));
    assert_eq!(zaremba(&["bogus"]).status.code(), Some(64));
    assert_eq!(zaremba(&["solve", "--no-such-flag", "1"]).status.code(), Some(64));
    // Gamma(beta) needs beta <= (2pi - ell)/4.
    assert_eq!(zaremba(&["solve", "--beta", "1/2pi", "--out", path(dir.path())]).status.code(), Some(64));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("command = solve\nfamily = neumann\nh = 0.2\nk = 2\nout = {}\n", path(dir.path()))).unwrap();
    let o = zaremba(&["--config", path(&cfg), "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("lambda")).count(), 3);
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("k = 3"));
    assert!(manifest.contains("family = neumann"));
}

#[test]
fn help_lists_config_keys() {
    let o = zaremba(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in ["grading_levels", "h_list", "sample_seed", "workers"] {
        assert!(text.contains(key), "{key}");
    }
}
