use std::fs;
use std::process::{Command, Output};

fn dtnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtnoise"))
        .args(args)
        .env_remove("DTNOISE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn xcorr_shannon_rows() {
    let o = dtnoise(&["xcorr", "--family", "shannon", "--M", "2", "--m", "1", "--mprime", "1", "--lags", "-3..3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("family,M,eps,d,m,mprime,lag,gamma,method,abs_err\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 7);
    let one = r.iter().find(|r| r[6] == "1").unwrap();
    assert!((one[7].parse::<f64>().unwrap() - 0.63662).abs() < 5e-6);
}

#[test]
fn xcorr_zero_lag_and_method_agreement() {
    let o = dtnoise(&["xcorr", "--family", "meyer", "--eps", "0.3333333333333333", "--m", "1", "--lags", "0..0"]);
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][7].parse::<f64>().unwrap(), 0.0);

    let run = |m: &str| {
        let o = dtnoise(&["xcorr", "--family", "haar", "--m", "1", "--lags", "-4..4", "--method", m]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        rows(&stdout(&o)).iter().map(|r| r[7].parse::<f64>().unwrap()).collect::<Vec<_>>()
    };
    for (a, b) in run("closed").iter().zip(run("quad")) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn table_rows_and_unknown_id() {
    let o = dtnoise(&["table", "dyadic_theory"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("table,family,M,eps,d,m,mprime,lag,quantity,computed,paper_value,delta,method\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 35);
    let haar = r.iter().find(|r| r[1] == "haar" && r[5] == "1" && r[7] == "1").unwrap();
    assert!((haar[9].parse::<f64>().unwrap() - 0.10816).abs() <= 5e-5);

    let o = dtnoise(&["table", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(dtnoise(&["xcorr", "--m", "1"]).status.code(), Some(2));
    assert_eq!(dtnoise(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(dtnoise(&["xcorr", "--family", "shannon", "--m", "7"]).status.code(), Some(2));
}

#[test]
fn cov_writes_under_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dtnoise(&["--out", out, "cov", "--family", "shannon", "--noise", "white", "--sigma2", "2", "--m", "1", "--lags", "1"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("cov.csv")).unwrap();
    assert!(text.starts_with("j,m,mprime,kind,lag,gamma,abs_err\n"));
    let r = rows(&text);
    assert!((r[0][5].parse::<f64>().unwrap() + 2.0 * 0.6366197723675814).abs() < 1e-12);
}

#[test]
fn mc_is_deterministic_and_reads_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "family = shannon\nlevels = 2\nlength = 512\noversample = 8\nruns = 4\nlags = 0..1\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let a = dtnoise(&["--config", cfg, "mc", "--seed", "7"]);
    let b = dtnoise(&["--config", cfg, "mc", "--seed", "7"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("j,m,mprime,kind,lag,mean,stderr,runs,theory,z\n"));
    assert_eq!(rows(&text)[0][7], "4");

    let env = Command::new(env!("CARGO_BIN_EXE_dtnoise"))
        .args(["--config", cfg, "mc"])
        .env("DTNOISE_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);

    assert_eq!(dtnoise(&["--config", cfg, "mc", "--runs", "1"]).status.code(), Some(2));
}

#[test]
fn field2d_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dtnoise(&[
        "--out", out, "field2d", "--family", "meyer", "--M", "3", "--eps", "0.25", "--side", "36", "--runs", "4",
        "--lags", "0..1", "--scale", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("field2d.csv")).unwrap();
    assert!(csv.starts_with("m1,m2,l1,l2,gamma_theory,gamma_mc,stderr\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 9 * 4);
    let origin = r.iter().find(|r| r[..4] == ["0", "0", "0", "0"]).unwrap();
    assert!((origin[4].parse::<f64>().unwrap() - 0.63411f64.powi(2)).abs() < 1e-4);
    let cross = r.iter().find(|r| r[..4] == ["1", "2", "0", "1"]).unwrap();
    assert_eq!(cross[4].parse::<f64>().unwrap(), 0.0);
    for name in ["field2d_theory.pgm", "field2d_mc.pgm"] {
        let pgm = fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = pgm.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("14 14"));
        assert_eq!(lines.next(), Some("255"));
    }
}

#[test]
fn verify_single_criterion() {
    let o = dtnoise(&["verify", "--criterion", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("PASS [5]"));
    assert!(text.contains("1/1 criteria passed"));
    assert_eq!(dtnoise(&["verify", "--criterion", "12"]).status.code(), Some(2));
}
