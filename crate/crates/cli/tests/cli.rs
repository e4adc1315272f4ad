use std::fs;
use std::process::{Command, Output};


fn preint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preint"))
        .args(args)
        .env_remove("PREINT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data lines (not comments, not the column header), split on commas.
fn records(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

/// Drops the last column (wall time) of every data line.
fn without_wall_time(text: &str) -> String {
    text.lines()
        .map(|l| if l.starts_with('#') { l } else { l.rsplit_once(',').map_or(l, |p| p.0) })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn point_linear_cdf() {
    let out = stdout(&preint(&[
        "point", "--model", "linear", "--coeffs", "1", "--offset", "0", "--kind", "cdf", "--t", "0", "--n", "1024",
        "--r", "4", "--seed", "1",
    ]));
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("# preint point config_hash="));
    assert!(first.contains(" seed=1 lattice=builtin:"));
    assert_eq!(out.lines().nth(1).unwrap(), "kind,t,N,R,estimate,stderr,rel_rmse,wall_time_s");
    let rec = &records(&out)[0];
    assert_eq!(rec[0], "cdf");
    assert_eq!(rec[2], "1024");
    assert_eq!(rec[3], "4");
    assert_eq!(num(&rec[4]), 0.5);
    assert_eq!(num(&rec[5]), 0.0);
}

#[test]
fn point_linear_pdf() {
    let out = stdout(&preint(&["point", "--kind", "pdf", "--model", "linear", "--coeffs", "2", "--offset", "1", "--t", "1"]));
    let rho0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((num(&records(&out)[0][4]) - 0.5 * rho0).abs() < 1e-14);
}

#[test]
fn config_errors_exit_2() {
    let o = preint(&["point", "--t", "1", "--lattice", "/nonexistent/vector.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/vector.txt"));

    assert_eq!(preint(&["point", "--t", "1", "--n", "1000"]).status.code(), Some(2));
    assert_eq!(preint(&["converge", "--t", "1", "--n-list", "1024,3000"]).status.code(), Some(2));
    assert_eq!(preint(&["point", "--t", "1", "--r", "0"]).status.code(), Some(2));
    assert_eq!(preint(&["point", "--t", "1", "--cov", "equicorr:4:1:2"]).status.code(), Some(2));
    assert_eq!(preint(&["point", "--t", "1", "--lattice", "builtin:nope"]).status.code(), Some(2));
    assert_eq!(preint(&["point"]).status.code(), Some(2));
    assert_eq!(preint(&["converge", "--kind", "pdf", "--t", "1", "--methods", "mc"]).status.code(), Some(2));
}

#[test]
fn curve_of_standard_normal() {
    let out = stdout(&preint(&["curve", "--model", "linear", "--coeffs", "1", "--a", "-2", "--b", "2", "--m", "8"]));
    let recs = records(&out);
    assert_eq!(recs.iter().filter(|r| r[0] == "node").count(), 9);
    assert_eq!(recs.iter().filter(|r| r[0] == "sample").count(), 201);
    // Phi(2 cos(k pi / 8)), 30-digit arithmetic.
    let exact = [
        9.772_498_680_518_207_91e-1,
        9.676_813_974_268_123_62e-1,
        9.213_503_964_748_573_92e-1,
        7.779_734_408_750_353_94e-1,
        0.5,
        2.220_265_591_249_646_62e-1,
        7.864_960_352_514_256_68e-2,
        3.231_860_257_318_763_11e-2,
        2.275_013_194_817_920_86e-2,
    ];
    for (r, want) in recs.iter().filter(|r| r[0] == "node").zip(exact) {
        assert!((num(&r[2]) - want).abs() <= 1e-15, "{r:?}");
    }
    // Degree 8 leaves an interpolation error of about 2e-4.
    for r in recs.iter().filter(|r| r[0] == "sample") {
        assert!((num(&r[2]) - normal_cdf(num(&r[1]))).abs() <= 5e-4, "{r:?}");
    }
    let out = stdout(&preint(&[
        "curve", "--model", "linear", "--coeffs", "1", "--a", "-2", "--b", "2", "--m", "20", "--n", "1024", "--r", "2",
    ]));
    for r in records(&out) {
        assert!((num(&r[2]) - normal_cdf(num(&r[1]))).abs() <= 1e-10, "{r:?}");
    }
}

#[test]
fn curves_of_lognormal_sum() {
    let base = ["--cov", "recipmax:16", "--a", "40", "--b", "100", "--n", "1024", "--r", "2", "--m", "12"];
    let cdf = stdout(&preint(&[&["curve", "--kind", "cdf"], &base[..]].concat()));
    let samples: Vec<f64> = records(&cdf).iter().filter(|r| r[0] == "sample").map(|r| num(&r[2])).collect();
    assert!(samples.windows(2).all(|w| w[1] >= w[0]), "{samples:?}");

    let pdf = stdout(&preint(&[&["curve", "--kind", "pdf", "--samples", "501"], &base[..]].concat()));
    assert!(records(&pdf).iter().all(|r| num(&r[2]) >= 0.0));
}

#[test]
fn output_is_reproducible_and_worker_independent() {
    let args = ["point", "--t", "30", "--n", "4096", "--r", "4", "--seed", "11"];
    let a = stdout(&preint(&args));
    let b = stdout(&preint(&args));
    let c = stdout(&preint(&[&args[..], &["--workers", "3"]].concat()));
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    assert_eq!(without_wall_time(&a), without_wall_time(&c));

    let curve = ["curve", "--kind", "pdf", "--a", "20", "--b", "60", "--n", "2048", "--r", "3"];
    let a = stdout(&preint(&curve));
    let c = stdout(&preint(&[&curve[..], &["--workers", "4"]].concat()));
    assert_eq!(a, c);

    let other_seed = stdout(&preint(&["point", "--t", "30", "--n", "4096", "--r", "4", "--seed", "12"]));
    assert_ne!(records(&other_seed)[0][4], records(&b)[0][4]);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let o = preint(&["point", "--t", "30", "--n", "1024", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&path).unwrap().contains("kind,t,N,R"));
}

fn seed_of(o: &Output) -> String {
    let text = stdout(o);
    let header = text.lines().next().unwrap();
    header.split(' ').find_map(|w| w.strip_prefix("seed=")).unwrap().to_owned()
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "seed = 3\nn = 1024\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let bin = env!("CARGO_BIN_EXE_preint");
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(bin);
        cmd.args(["--config", cfg, "point", "--t", "30", "--r", "1"]).args(extra);
        match env {
            Some(s) => cmd.env("PREINT_SEED", s),
            None => cmd.env_remove("PREINT_SEED"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(seed_of(&run(None, &[])), "3");
    assert_eq!(seed_of(&run(Some("5"), &[])), "5");
    assert_eq!(seed_of(&run(Some("5"), &["--seed", "7"])), "7");
    assert_eq!(seed_of(&run(None, &["--seed", "7"])), "7");
    assert_eq!(seed_of(&preint(&["point", "--t", "30", "--n", "1024", "--r", "1"])), "1");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        "# linear model\nmodel = linear\ncoeffs = 2,0\noffset = 1\nkind = pdf\nt = 1\nn = 2048\nsamples = 11\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = stdout(&preint(&["point", "--config", cfg]));
    let rec = &records(&out)[0];
    assert_eq!(rec[0], "pdf");
    assert_eq!(rec[2], "2048");

    let out = stdout(&preint(&["--config", cfg, "point", "--kind", "cdf", "--n", "1024"]));
    let rec = &records(&out)[0];
    assert_eq!(rec[0], "cdf");
    assert_eq!(rec[2], "1024");
    assert_eq!(num(&rec[4]), 0.5);

    fs::write(dir.path().join("bad.conf"), "frobnicate = 1\n").unwrap();
    let bad = dir.path().join("bad.conf");
    assert_eq!(preint(&["point", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(preint(&["point", "--config", "/nonexistent.conf"]).status.code(), Some(2));
}

#[test]
fn converge_study() {
    let out = stdout(&preint(&[
        "converge",
        "--methods",
        "mc,qmc_preint",
        "--n-list",
        "1024,2048,4096,8192,16384,32768,65536",
        "--r",
        "8",
    ]));
    let header = "method,N,M,t_or_interval,estimate,stderr,rel_rmse,rmise,slope_window,wall_time_s";
    assert!(out.lines().any(|l| l == header));
    assert_eq!(records(&out).iter().filter(|r| r.len() == 10).count(), 14);
    let slopes: Vec<&str> = out.lines().filter(|l| l.starts_with("# slope ")).collect();
    assert_eq!(slopes.len(), 2);
    assert!(slopes[0].starts_with("# slope mc "));
    assert!(slopes[1].starts_with("# slope qmc_preint "));
}

#[test]
fn converge_curve_study() {
    let out = stdout(&preint(&[
        "converge", "--model", "linear", "--coeffs", "1,0.5", "--a", "-1", "--b", "1", "--methods", "qmc_preint",
        "--n-list", "1024,2048,4096", "--r", "2", "--ref-n", "8192", "--ref-r", "2",
    ]));
    let recs = records(&out);
    assert_eq!(recs.iter().filter(|r| r.len() == 10).count(), 3);
    assert_eq!(recs[0][2], "16");
}

#[test]
fn timing_table() {
    let out = stdout(&preint(&[
        "time", "--cov", "equicorr:32:1:0.5", "--t", "60", "--n-list", "8192,16384,32768,65536", "--repeats", "1",
    ]));
    assert!(out.lines().any(|l| l == "N,qmc_cdf_s,preint_cdf_s,preint_pdf_s,increase_factor"));
    let recs = records(&out);
    assert_eq!(recs.len(), 4);
    for r in &recs {
        let factor = num(&r[4]);
        assert!(factor.is_finite() && factor > 0.0);
    }
}

#[test]
fn check_command() {
    let out = stdout(&preint(&["check", "--cov", "recipmax:8", "--fibers", "2000"]));
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 9);
    assert!(lines.iter().all(|l| l.starts_with("PASS ")), "{out}");

    let out = stdout(&preint(&["check", "--model", "linear", "--coeffs", "1,2,3", "--fibers", "500", "--korobov", "1571"]));
    assert!(out.lines().next().unwrap().ends_with("lattice=korobov:1571"));
    assert!(out.lines().skip(1).all(|l| l.starts_with("PASS ")), "{out}");
}
