use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spindyn(args: &[&str]) -> Output {
    spindyn_env(args, &[])
}

fn spindyn_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spindyn"));
    cmd.args(args).env_remove("SPINDYN_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

/// Runs with the artifact sent to a file so the summary lands on stdout.
fn with_output(dir: &Path, name: &str, args: &[&str]) -> (Output, String) {
    let path = dir.join(name);
    let mut all = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    all.extend(["--output", &p]);
    let o = spindyn(&all);
    let artifact = std::fs::read_to_string(&path).unwrap_or_default();
    (o, artifact)
}

fn summary(o: &Output) -> Value {
    serde_json::from_str(stdout(o).lines().last().expect("summary line")).unwrap()
}

#[test]
fn pure_precession_conserves_spin() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) =
        with_output(dir.path(), "p.csv", &["precess", "--gamma", "0", "--B", "0,0,1", "--S", "1,0,0", "--steps", "1000", "--dt", "0.01"]);
    assert_eq!(code(&o), 0);
    assert!(csv.starts_with("t,Sx,Sy,Sz,theta,Smag\n"));
    assert_eq!(csv.lines().count(), 1002);
    assert!(summary(&o)["smag_drift"].as_f64().unwrap() < 1e-9);
}

#[test]
fn alignment_decays_at_beta_b() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = with_output(dir.path(), "a.csv", &["precess", "--gamma", "1", "--theta0", "0.785398"]);
    assert_eq!(code(&o), 0);
    let s = summary(&o);
    let rate = s["decay_rate"].as_f64().unwrap();
    assert!((rate - s["expected_decay_rate"].as_f64().unwrap()).abs() < 1e-6, "{s}");
}

#[test]
fn equator_is_held_by_align() {
    let dir = tempfile::tempdir().unwrap();
    let thetas = |csv: &str| -> Vec<f64> { csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect() };
    let half_pi = std::f64::consts::FRAC_PI_2;
    // exactly equatorial
    let (o, csv) = with_output(dir.path(), "e.csv", &["align", "--S", "1,0,0"]);
    assert_eq!(code(&o), 0);
    assert!(thetas(&csv).iter().all(|t| *t == half_pi));
    // 1.570796 sits 3.3e-7 off the repelling set: the offset grows as e^t
    let (o, csv) = with_output(dir.path(), "e.csv", &["align", "--theta0", "1.570796"]);
    assert_eq!(code(&o), 0);
    let th = thetas(&csv);
    let grown = (th.last().unwrap() - half_pi).abs() / (th[0] - half_pi).abs();
    assert!((grown / 10f64.exp() - 1.0).abs() < 1e-2, "{grown}");
    assert!(summary(&o)["alignment_time"].is_null());
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# alignment run\ngamma = 1\nsteps = 10\nB = 0, 0, 2\n").unwrap();
    let o = spindyn(&["precess", "--config", cfg.to_str().unwrap(), "--steps", "20"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 22);

    std::fs::write(&cfg, "gamma = 1\nstepz = 10\n").unwrap();
    let o = spindyn(&["precess", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'stepz'"));
}

#[test]
fn configuration_errors_exit_1() {
    for args in [
        &["precess", "--dt", "0"][..],
        &["precess", "--S", "1,0", "--steps", "3"],
        &["precess", "--S", "1,0,0", "--theta0", "0.3"],
        &["precess", "--scheme", "euler"],
        &["precess", "--no-such-flag"],
        &["accel", "--scenario", "magnetic"],
        &["accel", "--betas", "0.5,1.5"],
        &["mptd", "--kappa", "2"],
        &["mptd", "--r", "1.2"],
        &["qmcheck", "--samples", "0"],
        &["--threads", "0", "brackets"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&spindyn(args)), 1, "{args:?}");
    }
    let o = spindyn_env(&["qmcheck", "--samples", "1"], &[("SPINDYN_SEED", "twelve")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn help_exits_0() {
    assert_eq!(code(&spindyn(&["--help"])), 0);
    assert_eq!(code(&spindyn(&["mptd", "--help"])), 0);
}

#[test]
fn brackets_check_passes_and_reports_truncated_defect() {
    let o = spindyn(&["brackets", "--check", "--samples", "20"]);
    assert_eq!(code(&o), 0);
    let rows = json_lines(&stdout(&o));
    assert!(rows[..rows.len() - 1].iter().all(|r| r["pass"] == true));
    let last = rows.last().unwrap();
    assert_eq!(last["asserted"], false);
    assert_eq!(last["measured"].as_f64(), Some(0.5));

    let o = spindyn(&["brackets", "--S", "0,0,0.5", "--c", "2"]);
    assert!(stdout(&o).contains("x1,x2,0.125\n"));
    assert!(stdout(&o).contains("S1,S2,0.5\n"));
}

#[test]
fn accel_exponents_and_self_test() {
    let dir = tempfile::tempdir().unwrap();
    for (scenario, k, tol) in [("em", 1.5, 0.01), ("geodesic", 1.0, 0.02)] {
        let (o, csv) = with_output(dir.path(), "s.csv", &["accel", "--scenario", scenario]);
        assert_eq!(code(&o), 0);
        assert!(csv.starts_with("v,a_par,log_gap\n"));
        let e = summary(&o)["exponent"].as_f64().unwrap();
        assert!((e - k).abs() < tol, "{scenario}: {e}");
    }
    let o = spindyn(&["accel", "--self-test"]);
    assert_eq!(code(&o), 0);
    assert!(summary(&o)["error"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn mptd_spinless_circular_orbit_keeps_radius() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = with_output(dir.path(), "m.csv", &["mptd", "--kappa", "0", "--spin-scale", "0", "--steps", "2000"]);
    assert_eq!(code(&o), 0);
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let ri = header.iter().position(|h| *h == "r").unwrap();
    for line in csv.lines().skip(1) {
        let r: f64 = line.split(',').nth(ri).unwrap().parse().unwrap();
        assert!((r - 10.0).abs() < 1e-8, "{r}");
    }
}

#[test]
fn mptd_flat_space_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = with_output(dir.path(), "f.csv", &["mptd", "--flat", "--speed", "0.5", "--kappa", "1", "--steps", "200"]);
    assert_eq!(code(&o), 0);
    let s = summary(&o);
    assert_eq!(s["spin_change"].as_f64(), Some(0.0));
    assert!(s["line_deviation"].as_f64().unwrap() < 1e-12);
}

#[test]
fn mptd_compare_reports_quadratic_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = with_output(dir.path(), "c.csv", &["mptd", "--compare", "--spin-scale", "0.05", "--steps", "300"]);
    assert_eq!(code(&o), 0);
    let s = summary(&o);
    assert!(s["separation"].as_f64().unwrap() > 0.0);
    let ratio = s["lambda_scaling"]["ratio"].as_f64().unwrap();
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}

#[test]
fn mptd_horizon_stop_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = with_output(dir.path(), "h.csv", &["mptd", "--orbit", "radial", "--spin-scale", "0", "--steps", "5000"]);
    assert_eq!(code(&o), 2);
    assert!(summary(&o)["horizon_stop"].is_u64());
    assert!(csv.lines().count() > 2);
}

#[test]
fn qmcheck_lists_failed_identities_and_exits_2() {
    let o = spindyn(&["qmcheck", "--samples", "50", "--seed", "42"]);
    assert_eq!(code(&o), 2);
    let failed: Vec<String> = json_lines(&stdout(&o))
        .iter()
        .filter(|r| r["pass"] == false)
        .map(|r| r["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failed, ["pryce_su2", "pryce_casimir"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("pryce_su2, pryce_casimir"));
}

#[test]
fn qmcheck_zitter_frequency() {
    let o = spindyn(&["qmcheck", "--samples", "1", "--zitter"]);
    let rows = json_lines(&stdout(&o));
    let z = rows.iter().find(|r| r["name"] == "zitter_frequency").unwrap();
    assert_eq!(z["pass"], true);
    assert!(z["residual"].as_f64().unwrap().abs() < 0.01);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let runs: Vec<&[&str]> = vec![
        &["qmcheck", "--samples", "1", "--seed", "42"],
        &["brackets", "--check", "--samples", "10", "--seed", "7"],
        &["precess", "--gamma", "1", "--scheme", "rk45", "--steps", "200"],
        &["accel", "--scenario", "geodesic"],
        &["mptd", "--kappa", "1", "--steps", "200"],
    ];
    for args in runs {
        let a = spindyn(args);
        let b = spindyn_env(args, &[("SPINDYN_SEED", "999")]);
        let c = spindyn(&[&["--threads", "1"][..], args].concat());
        assert!(!a.stdout.is_empty());
        if args.contains(&"--seed") {
            assert_eq!(a.stdout, b.stdout, "{args:?}: explicit seed wins over the environment");
        }
        assert_eq!(a.stdout, c.stdout, "{args:?}");
        assert_eq!(a.stdout, spindyn(args).stdout, "{args:?}");
    }
    let env = spindyn_env(&["qmcheck", "--samples", "3"], &[("SPINDYN_SEED", "42")]);
    let flag = spindyn(&["qmcheck", "--samples", "3", "--seed", "42"]);
    let other = spindyn(&["qmcheck", "--samples", "3", "--seed", "43"]);
    assert_eq!(env.stdout, flag.stdout);
    assert_ne!(flag.stdout, other.stdout);
}

#[test]
fn report_rows_and_negative_control() {
    let o = spindyn(&["report", "--json"]);
    let rows = json_lines(&stdout(&o));
    let ids: std::collections::BTreeSet<u64> = rows.iter().map(|r| r["criterion"].as_u64().unwrap()).collect();
    assert_eq!(ids.len(), 14);
    let failed: Vec<&str> = rows.iter().filter(|r| r["pass"] == false).map(|r| r["claim"].as_str().unwrap()).collect();
    // the Pryce spin operator fails su(2) and the spin-half Casimir; see README
    assert_eq!(failed.len(), 2, "{failed:?}");
    assert!(failed.iter().all(|c| c.starts_with("Pryce spin")));
    assert_eq!(code(&o), 2);

    let bad = spindyn(&["report", "--json", "--inject-fault", "reversed-alignment"]);
    assert_eq!(code(&bad), 2);
    let bad_rows = json_lines(&stdout(&bad));
    let theta = |rs: &[Value]| rs.iter().find(|r| r["criterion"] == 1).unwrap()["pass"].clone();
    assert_eq!(theta(&rows), true);
    assert_eq!(theta(&bad_rows), false);
    assert!(!stdout(&spindyn(&["report", "--help"])).contains("inject"));
}
