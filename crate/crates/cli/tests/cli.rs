use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn chsolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chsolve")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_final_time_writes_initial_snapshot() {
    let dir = scratch("t0");
    let out = dir.to_str().unwrap();
    let o = chsolve(&["run", "--scheme", "first", "--ic", "single_peakon", "--k", "5", "--t-final", "0", "--output", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.join("snapshots.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,u"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 32);
    for r in &rows {
        assert_eq!(r[0], 0.0);
        assert_eq!(r[2], (-r[1].abs()).exp());
    }
    // 17 significant digits: one leading digit and 16 after the point
    let first = text.lines().nth(1).unwrap();
    let x = first.split(',').nth(1).unwrap();
    let mantissa = x.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.len(), 18, "{x}");
    assert_eq!(fs::read_to_string(dir.join("status.txt")).unwrap(), "ok\n");
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("override");
    let cfg = dir.join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# comment\nscheme = second\nic = single_peakon\nk = 6\nt_final = 0.5\nsnapshots = 1\noutput = {}\n",
            dir.join("from_file").display()
        ),
    )
    .unwrap();
    let over = dir.join("from_flag");
    let o = chsolve(&["run", "--config", cfg.to_str().unwrap(), "--k", "5", "--output", over.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("scheme=second nx=32"), "{stdout}");
    let snaps = fs::read_to_string(over.join("snapshots.csv")).unwrap();
    // snapshots at t = 0 and t = 0.5, 32 cells each
    assert_eq!(snaps.lines().count(), 1 + 2 * 32);
    assert!(!dir.join("from_file").exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = scratch("config");
    let out = dir.to_str().unwrap();
    let missing = chsolve(&["run", "--scheme", "first", "--k", "5", "--t-final", "1", "--output", out]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("ic"), "{}", stderr(&missing));

    let bad_nu = chsolve(&["run", "--scheme", "first", "--ic", "single_peakon", "--k", "5", "--t-final", "1", "--nu", "2", "--output", out]);
    assert_eq!(code(&bad_nu), 1);

    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "scheme=first\nic=single_peakon\nk=5\nt_final=1\ntheta=-1\n").unwrap();
    let bad_theta = chsolve(&["run", "--config", cfg.to_str().unwrap(), "--output", out]);
    assert_eq!(code(&bad_theta), 1);
    assert!(stderr(&bad_theta).contains("line 5"), "{}", stderr(&bad_theta));

    let bad_case = chsolve(&["convergence", "--case", "three_peakon", "--output", out]);
    assert_eq!(code(&bad_case), 1);
}

#[test]
fn io_errors_exit_three() {
    let dir = scratch("io");
    let missing_cfg = chsolve(&["run", "--config", dir.join("nope.cfg").to_str().unwrap()]);
    assert_eq!(code(&missing_cfg), 3);

    let blocker = dir.join("file");
    fs::write(&blocker, "x").unwrap();
    let o = chsolve(&[
        "run", "--scheme", "first", "--ic", "single_peakon", "--k", "5", "--t-final", "0",
        "--output", blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn blow_up_exits_two_and_keeps_partial_output() {
    let dir = scratch("unstable");
    let o = chsolve(&[
        "run", "--scheme", "second", "--ic", "single_peakon", "--k", "6", "--t-final", "20",
        "--pressure-node", "right", "--snapshots", "20", "--output", dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stdout));
    let status = fs::read_to_string(dir.join("status.txt")).unwrap();
    assert!(status.starts_with("unstable step="), "{status}");
    let diags = fs::read_to_string(dir.join("diagnostics.csv")).unwrap();
    assert!(diags.lines().count() > 2);
}

#[test]
fn runs_are_deterministic() {
    let a = scratch("det_a");
    let b = scratch("det_b");
    for dir in [&a, &b] {
        let o = chsolve(&[
            "run", "--scheme", "first", "--ic", "two_peakon", "--k", "7", "--t-final", "2",
            "--snapshots", "4", "--output", dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["snapshots.csv", "diagnostics.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn convergence_and_compare_write_tables() {
    let dir = scratch("tables");
    let out = dir.to_str().unwrap();
    let o = chsolve(&["convergence", "--case", "single", "--k-min", "5", "--k-max", "6", "--output", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = fs::read_to_string(dir.join("convergence_single.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.lines().next().unwrap().starts_with("k,dx,"));

    let o = chsolve(&["compare", "--ic", "single_peakon", "--k", "6", "--t-final", "1", "--output", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("L1 distance between schemes"));
    assert!(dir.join("compare.csv").exists());
}
