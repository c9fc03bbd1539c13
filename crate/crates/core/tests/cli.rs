//! The `nlkg` binary: exit codes and CSV emission.

use std::path::{Path, PathBuf};
use std::process::Command;

fn nlkg(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_nlkg")).args(args).arg("--out").arg(out).output().expect("run nlkg");
    let text = String::from_utf8_lossy(&o.stdout).to_string() + &String::from_utf8_lossy(&o.stderr);
    (o.status.code().unwrap_or(-1), text)
}

fn scratch(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn body(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn config_errors_exit_2() {
    let d = scratch("config");
    assert_eq!(nlkg(&["evolve", "--set", "p=1.5"], &d).0, 2);
    assert_eq!(nlkg(&["evolve", "--set", "colour=red"], &d).0, 2);
    assert_eq!(nlkg(&["evolve", "--set", "n_points=many"], &d).0, 2);
    let (code, text) = nlkg(&["evolve", "--config", "/nonexistent/nlkg.cfg"], &d);
    assert_eq!(code, 2, "{text}");
}

#[test]
fn config_file_then_overrides() {
    let d = scratch("file");
    std::fs::create_dir_all(&d).unwrap();
    let cfg = d.join("run.cfg");
    std::fs::write(&cfg, "# short run\np = 1.8\nn_points = 1024\nt_final = 2\n").unwrap();
    let (code, text) = nlkg(&["evolve", "--config", cfg.to_str().unwrap(), "--set", "p=1.9"], &d);
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(d.join("evolve.csv")).unwrap();
    assert!(csv.starts_with("# nlkg-lab "));
    assert!(csv.contains("# p = 1.89999999999999991e0"));
    assert!(csv.contains("# n_points = 1024"));
    assert!(csv.contains("\nt,re_z1,im_z1,re_z2,im_z2,abs_z2,energy,eta_sigmaA,eta_l2kappa,eta_h1a,zdot_minus_ztilde\n"));
    assert!(csv.contains("# fitted_exponent = "));
}

#[test]
fn numerical_failure_exits_3_and_marks_csv() {
    let d = scratch("numerical");
    // the bracket does not contain a*, so there is no sign change
    let (code, text) = nlkg(&["shoot", "--set", "n_points=1024", "--set", "a_min=0.001", "--set", "a_max=0.002"], &d);
    assert_eq!(code, 3, "{text}");
    assert!(std::fs::read_to_string(d.join("shoot.csv")).unwrap().contains("# FAILED: "));
}

#[test]
fn fgr_scan_is_deterministic() {
    let (a, b) = (scratch("fgr_a"), scratch("fgr_b"));
    let args = ["fgr-scan", "--set", "p_count=4", "--set", "n_points=2048"];
    assert_eq!(nlkg(&args, &a).0, 0);
    assert_eq!(nlkg(&args, &b).0, 0);
    let (ba, bb) = (body(&a.join("fgr-scan.csv")), body(&b.join("fgr-scan.csv")));
    assert_eq!(ba, bb);
    assert_eq!(ba.lines().count(), 5);
}

#[test]
fn evolve_checkpoints_feed_virial() {
    let d = scratch("virial");
    let (code, text) = nlkg(&["evolve", "--set", "n_points=1024", "--set", "t_final=3", "--set", "checkpoint_every=2"], &d);
    assert_eq!(code, 0, "{text}");
    let ckpt = d.join("checkpoints");
    let (code, text) = nlkg(&["virial", "--set", "n_points=1024", "--set", &format!("input={}", ckpt.display())], &d);
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(d.join("virial.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("t,J_FGR,I1_1,I1_2,I2_1,I2_2,ddt_J_FGR"));
    assert!(header.contains("mismatch_I2_2") && header.contains("int_z2_4"));
    // a checkpoint series on another grid is rejected
    let (code, _) = nlkg(&["virial", "--set", "n_points=2048", "--set", &format!("input={}", ckpt.display())], &d);
    assert_eq!(code, 3);
}

#[test]
fn selftest_passes() {
    let d = scratch("selftest");
    let (code, text) = nlkg(&["selftest"], &d);
    assert_eq!(code, 0, "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 5);
    assert!(!text.contains("FAIL"));
}
