use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ratchet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratchet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn paper_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper_scenario.toml")
}

fn stanza(out: &Output) -> Vec<(String, String)> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

fn value(out: &Output, key: &str) -> String {
    stanza(out)
        .into_iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("no {key} in output"))
        .1
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn paper_run_reports_cost_gain_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("daily.csv");
    let o = ratchet(&["run", "--config", paper_config().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&o, "cost_per_day"), "10000.00");
    assert_eq!(value(&o, "mtm_per_day"), "1000000.00");
    assert_eq!(value(&o, "gain_cost_ratio"), "100.000000");
    assert!(std::fs::read_to_string(out).unwrap().starts_with("day,prev_close,open,close,"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::fs::read_to_string(paper_config())
        .unwrap()
        .replace("sigma_daily = 0.0", "sigma_daily = 0.01");
    let cfg = write(dir.path(), "noisy.toml", &cfg);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = ratchet(&[
            "run", "--config", cfg.to_str().unwrap(), "--seed", "9", "--days", "50",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        (std::fs::read(out).unwrap(), stanza(&o))
    };
    let (a, sa) = run("a.csv");
    let (b, sb) = run("b.csv");
    assert_eq!(a, b);
    // Only the output path differs between the two stanzas.
    let strip = |s: Vec<(String, String)>| s.into_iter().filter(|(k, _)| k != "daily_csv").collect::<Vec<_>>();
    assert_eq!(strip(sa), strip(sb));
}

#[test]
fn negative_spread_exits_1_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::fs::read_to_string(paper_config())
        .unwrap()
        .replace("spread_open_bps = 15.0", "spread_open_bps = -15.0");
    let cfg = write(dir.path(), "bad.toml", &cfg);
    let o = ratchet(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("profile.spread_open_bps"));
    assert!(o.stdout.is_empty(), "nothing runs on an invalid config");
}

#[test]
fn unknown_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::fs::read_to_string(paper_config())
        .unwrap()
        .replace("[run]", "[run]\nspeed = 3");
    let cfg = write(dir.path(), "typo.toml", &cfg);
    let o = ratchet(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
}

#[test]
fn analyze_missing_open_column_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "p.csv", "date,high,low,close\n2020-01-02,1,1,1\n");
    let o = ratchet(&["analyze", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("open"));
}

#[test]
fn analyze_bad_row_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(
        dir.path(),
        "p.csv",
        "date,open,close\n2020-01-02,10,10\n2020-01-03,10,abc\n",
    );
    let o = ratchet(&["analyze", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn analyze_flat_series_is_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(
        dir.path(),
        "flat.csv",
        "date,open,close\n2020-01-02,50,50\n2020-01-03,50,50\n2020-01-06,50,50\n",
    );
    let o = ratchet(&["analyze", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for key in ["cum_overnight", "cum_intraday", "cum_total"] {
        assert_eq!(value(&o, key), "1.000000000000");
    }
}

#[test]
fn analyze_engine_output_shows_overnight_signature() {
    let dir = tempfile::tempdir().unwrap();
    let daily = dir.path().join("daily.csv");
    let report = dir.path().join("report.csv");
    let cfg = paper_config();
    let o = ratchet(&["run", "--config", cfg.to_str().unwrap(), "--days", "30", "--out", daily.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = ratchet(&["analyze", "--csv", daily.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&o, "cum_overnight").parse::<f64>().unwrap() > 1.0);
    assert!(value(&o, "cum_intraday").parse::<f64>().unwrap() < 1.0);
    let text = std::fs::read_to_string(report).unwrap();
    assert!(text.starts_with("day,overnight_ret,intraday_ret,cum_overnight,cum_intraday,cum_total\n"));
    assert_eq!(text.lines().count(), 31);
}

#[test]
fn sweep_table_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::fs::read_to_string(paper_config())
        .unwrap()
        .replace("sigma_daily = 0.0", "sigma_daily = 0.01");
    let cfg = write(dir.path(), "noisy.toml", &cfg);
    let table = |workers: &str| {
        let out = dir.path().join(format!("sweep{workers}.csv"));
        let o = ratchet(&[
            "sweep", "--config", cfg.to_str().unwrap(), "--days", "20",
            "--grid", "seed=1,2,3", "--grid", "book_value=1e8,1e10",
            "--workers", workers, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    let one = table("1");
    assert_eq!(one, table("8"));
    assert_eq!(String::from_utf8_lossy(&one).lines().count(), 7);
}

#[test]
fn sweep_locates_breakeven_book() {
    let o = ratchet(&[
        "sweep", "--config", paper_config().to_str().unwrap(),
        "--grid", "book_value=1e7,1e8,1e9,1e10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let x: f64 = value(&o, "breakeven_book_value").parse().unwrap();
    assert!((x / 1e8 - 1.0).abs() < 0.02);
}

#[test]
fn sweep_single_point_matches_run() {
    let cfg = paper_config();
    let run = ratchet(&["run", "--config", cfg.to_str().unwrap(), "--days", "5"]);
    let sweep = ratchet(&["sweep", "--config", cfg.to_str().unwrap(), "--days", "5", "--grid", "seed=42"]);
    assert_eq!(sweep.status.code(), Some(0));
    let table = String::from_utf8_lossy(&sweep.stdout);
    let row: Vec<&str> = table.lines().nth(2).unwrap().split(',').collect();
    for (i, key) in ["days", "initial_mid", "final_close", "total_drift_bps", "total_cost", "total_mtm"]
        .iter()
        .enumerate()
    {
        assert_eq!(row[i + 1], value(&run, key), "{key}");
    }
}

#[test]
fn sweep_with_all_cells_failing_exits_2() {
    let o = ratchet(&[
        "sweep", "--config", paper_config().to_str().unwrap(),
        "--grid", "leverage=-1,0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("failed=2"));
}

#[test]
fn sweep_unknown_parameter_exits_1() {
    let o = ratchet(&["sweep", "--config", paper_config().to_str().unwrap(), "--grid", "volume=1,2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn calibrate_one_bp_verifies() {
    let o = ratchet(&["calibrate", "--config", paper_config().to_str().unwrap(), "--target-bps", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("nudge 1.0000 bp"));
    let achieved: f64 = value(&o, "achieved_bps").parse().unwrap();
    assert!((achieved - 1.0).abs() < 1e-12);
}

#[test]
fn calibrate_zero_target_gives_zero_lambda() {
    let o = ratchet(&["calibrate", "--config", paper_config().to_str().unwrap(), "--target-bps", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&o, "lambda").parse::<f64>().unwrap(), 0.0);
}

#[test]
fn calibrate_symmetric_profile_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::fs::read_to_string(paper_config())
        .unwrap()
        .replace("spread_open_bps = 15.0", "spread_open_bps = 5.0")
        .replace("target_nudge_bps = 1.0", "lambda = 0.5");
    let cfg = write(dir.path(), "sym.toml", &cfg);
    let o = ratchet(&["calibrate", "--config", cfg.to_str().unwrap(), "--target-bps", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_config_exits_1() {
    let o = ratchet(&["run", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(1));
}
