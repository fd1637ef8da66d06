use std::fs;
use std::process::{Command, Output};

fn gpquad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpquad"))
        .args(args)
        .env_remove("GPQUAD_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn points_csv_layout() {
    let o = gpquad(&["points", "--rule", "sr", "--dim", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,xi_1,xi_2,xi_3,w_mean,w_cov");
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[1], "0,1.73205080757,0,0,0.166666666667,0.166666666667");
}

#[test]
fn transform_reports_moments_and_integral_variance() {
    let o = gpquad(&[
        "transform", "--rule", "ut", "--func", "polar", "--mean", "1,0", "--cov", "0.25,0.01", "--method", "gpq",
        "--lengthscale", "60,6",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("quantity,row,col,value\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("cov,")).count(), 4);
    assert_eq!(text.lines().filter(|l| l.starts_with("cross_cov,")).count(), 4);
    assert!(text.lines().any(|l| l.starts_with("sigma_bar_sq,")));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["points", "--bogus"],
        vec!["points", "--rule", "gh", "--dim", "20", "--order", "10"],
        vec!["points", "--rule", "ut", "--dim", "0"],
        vec!["transform", "--func", "polar", "--mean", "1,0", "--cov", "1,2,3"],
        vec!["transform", "--func", "polar", "--mean", "1,0,0", "--cov", "1,1,1"],
        vec!["ungm", "--runs", "1", "--steps", "5"],
        vec![],
    ] {
        let o = gpquad(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).trim().is_empty());
        if !args.is_empty() {
            assert_eq!(stderr(&o).trim().lines().count(), 1, "{args:?}");
        }
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    let o = gpquad(&["transform", "--func", "polar", "--mean", "1,0", "--cov", "1,2;2,1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(stderr(&o).trim().lines().count(), 1);
}

#[test]
fn unwritable_output_is_reported() {
    let o = gpquad(&["points", "--dim", "1", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot write"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gpquad"))
        .args(["ungm", "--runs", "3", "--steps", "20"])
        .env("GPQUAD_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let runs = fs::read_to_string(dir.path().join("ungm.csv")).unwrap();
    let curves = fs::read_to_string(dir.path().join("ungm_curves.csv")).unwrap();
    assert_eq!(runs.lines().next(), Some("run,filter,rmse,nll,nci"));
    assert_eq!(runs.lines().count(), 1 + 2 * 3);
    assert_eq!(curves.lines().next(), Some("t,filter,component,rmse,nu"));
    assert_eq!(curves.lines().count(), 1 + 2 * 20);
}

#[test]
fn config_file_sets_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# desk run\nruns = 4\nsteps = 10\nseed = 9\n").unwrap();
    let out = dir.path().join("a.csv");
    let o = gpquad(&["ungm", "--config", cfg.to_str().unwrap(), "--runs", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 2 * 2);

    let explicit = dir.path().join("b.csv");
    let o = gpquad(&["ungm", "--runs", "2", "--steps", "10", "--seed", "9", "--out", explicit.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(&out).unwrap(), fs::read(&explicit).unwrap());
}

#[test]
fn seeds_change_benchmark_output() {
    let a = gpquad(&["reentry", "--runs", "3", "--duration", "2", "--seed", "1"]);
    let b = gpquad(&["reentry", "--runs", "3", "--duration", "2", "--seed", "2"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 2 * 3);
}

#[test]
fn help_lists_defaults() {
    let o = gpquad(&["reentry", "--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("[default: 20]"));
    assert!(text.contains("[default: 15,20,20]"));
    assert!(text.contains("--full-scale"));
}
