use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use regsched::cli::{compare_columns, parse_config, RUN_COLUMNS, SWEEP_COLUMNS};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn regsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regsched")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], row: usize, name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    rows[row][i].parse().unwrap()
}

#[test]
fn run_matches_golden_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = regsched(&["run", fixture("asymmetric.toml").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let golden = fs::read_to_string(fixture("asymmetric_run.csv")).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), golden);
}

#[test]
fn run_schema_and_round_robin_total() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rr.csv");
    let o = regsched(&[
        "run",
        fixture("round_robin.toml").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--horizon",
        "40000",
        "--reps",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, RUN_COLUMNS);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4][0], "all");
    assert_eq!(column(&header, &rows, 4, "mean_t"), 6.0);
    for l in 0..4 {
        assert_eq!(column(&header, &rows, l, "norm_i2"), 1.0);
    }
}

#[test]
fn single_link_constant_service_is_perfectly_regular() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let o = regsched(&["run", fixture("single_link.toml").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (header, rows) = read_csv(&out);
    assert_eq!(column(&header, &rows, 0, "norm_i2"), 1.0);
    assert_eq!(column(&header, &rows, 0, "mean_t"), 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing_dir = dir.path().join("nope/run.csv");
    let cfg = fixture("round_robin.toml");
    let cfg = cfg.to_str().unwrap();

    assert_eq!(code(&regsched(&["run", cfg, "-o", missing_dir.to_str().unwrap(), "--horizon", "20000"])), 1);
    assert_eq!(code(&regsched(&["run", "/does/not/exist.toml"])), 1);
    let o = regsched(&["run", fixture("missing_policy.toml").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("policy"));
    assert_eq!(code(&regsched(&["run", cfg, "--horizon", "100", "--warmup", "200"])), 2);
    assert_eq!(code(&regsched(&["sweep", cfg, "--gamma", ""])), 2);
    assert_eq!(code(&regsched(&["sweep", cfg, "--gamma", " , "])), 2);
}

#[test]
fn bounds_command() {
    let o = regsched(&["bounds", fixture("symmetric.toml").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("{key},"))).unwrap();
        line.split(',').nth(1).unwrap().parse().unwrap()
    };
    assert!((value("additive_eps") - 0.025).abs() < 1e-9);
    assert!((value("regularity_lower_bound") - 1.35).abs() < 1e-12);
    assert!((value("queue_bound") - 418.0).abs() < 1e-6);

    let o = regsched(&["bounds", fixture("fading.toml").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let threshold: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("symmetric_threshold,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((threshold - 0.2496).abs() < 1e-9);

    assert_eq!(code(&regsched(&["bounds", fixture("overloaded.toml").to_str().unwrap()])), 3);
}

#[test]
fn sweep_rows_and_single_gamma_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("symmetric.toml");
    let cfg = cfg.to_str().unwrap();
    let fast = ["--horizon", "30000", "--warmup", "1000", "--reps", "2"];

    let sweep = dir.path().join("sweep.csv");
    let mut args = vec!["sweep", cfg, "--gamma", "pow2:-7..7", "-o", sweep.to_str().unwrap()];
    args.extend(fast);
    assert_eq!(code(&regsched(&args)), 0);
    let (header, rows) = read_csv(&sweep);
    assert_eq!(header, SWEEP_COLUMNS);
    assert_eq!(rows.len(), 15);

    // one gamma equals run + bounds under the same policy and seeds
    let single = dir.path().join("single.csv");
    let mut args = vec!["sweep", cfg, "--gamma", "1", "-o", single.to_str().unwrap()];
    args.extend(fast);
    assert_eq!(code(&regsched(&args)), 0);
    let (sh, srows) = read_csv(&single);
    let run_out = dir.path().join("run.csv");
    let mut args = vec!["run", cfg, "-o", run_out.to_str().unwrap()];
    args.extend(fast);
    assert_eq!(code(&regsched(&args)), 0);
    let (rh, rrows) = read_csv(&run_out);
    assert_eq!(column(&sh, &srows, 0, "regularity_metric"), column(&rh, &rrows, 4, "regularity_metric"));
    assert_eq!(column(&sh, &srows, 0, "total_mean_q"), column(&rh, &rrows, 4, "mean_q"));
    assert_eq!(column(&sh, &srows, 0, "sum_alpha_meanq"), column(&rh, &rrows, 4, "sum_alpha_meanq"));
    assert_eq!(column(&sh, &srows, 0, "lower_bound"), 1.35);

    // gamma = 0 row equals a max-weight run
    let zero = dir.path().join("zero.csv");
    let mut args = vec!["sweep", cfg, "--gamma", "0", "-o", zero.to_str().unwrap()];
    args.extend(fast);
    assert_eq!(code(&regsched(&args)), 0);
    let mws = dir.path().join("mws.csv");
    let mws_cfg = fixture("symmetric_mws.toml");
    let mut args = vec!["run", mws_cfg.to_str().unwrap(), "-o", mws.to_str().unwrap()];
    args.extend(fast);
    assert_eq!(code(&regsched(&args)), 0);
    let (zh, zrows) = read_csv(&zero);
    let (mh, mrows) = read_csv(&mws);
    assert_eq!(column(&zh, &zrows, 0, "total_mean_q"), column(&mh, &mrows, 4, "mean_q"));
    assert_eq!(column(&zh, &zrows, 0, "upper_bound_measuredH"), f64::INFINITY);
}

#[test]
fn compare_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let fast = ["--horizon", "100000", "--reps", "4"];
    let (a, b) = (fixture("two_link_mws.toml"), fixture("two_link_rsg.toml"));
    let mut args = vec!["compare", a.to_str().unwrap(), b.to_str().unwrap(), "-o", out.to_str().unwrap()];
    args.extend(fast);
    let o = regsched(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, compare_columns());
    assert_eq!(rows.len(), 3);
    assert!(column(&header, &rows, 0, "var_i_b") < column(&header, &rows, 0, "var_i_a"));
    assert!(column(&header, &rows, 0, "var_i_delta") < 0.0);

    let o = regsched(&[
        "compare",
        fixture("two_link_mws.toml").to_str().unwrap(),
        fixture("symmetric.toml").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fixtures_parse() {
    for name in ["symmetric.toml", "fading.toml", "asymmetric.toml", "two_link_rsg.toml", "switch.toml"] {
        parse_config(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
