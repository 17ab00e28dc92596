//! Command implementations behind the `ratchet` binary.
//!
//! Each command returns a [`Report`]: human-readable lines followed by a
//! `key=value` stanza carrying the same numbers for scripts. Errors map to
//! exit status 1 (configuration or input) or 2 (runtime) via [`exit_code`].

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ratchet_core::analysis::{decompose, read_ohlc_csv, write_decomposition_csv, DecompositionResult};
use ratchet_core::config::ScenarioConfig;
use ratchet_core::engine::{
    run_sim, run_sweep, write_daily_csv, DayRecord, ParameterGrid, RunSummary, Scenario,
    Simulation, SweepCell, SweepParam,
};
use ratchet_core::market::NoiseParams;
use ratchet_core::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

pub fn exit_code(err: &Error) -> u8 {
    if err.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_RUNTIME
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub lines: Vec<String>,
    pub values: Vec<(String, String)>,
}

impl Report {
    fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    fn value(&mut self, key: &str, value: impl ToString) {
        self.values.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Prose lines, a blank line, then one `key=value` per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out.push('\n');
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub days: Option<u32>,
    pub out: Option<PathBuf>,
}

/// Loads and validates a config, then applies flag overrides. Nothing runs
/// until the whole scenario has been checked.
pub fn load_scenario(config: &Path, overrides: &Overrides) -> Result<(ScenarioConfig, Scenario)> {
    let cfg = ScenarioConfig::load(config)?;
    let mut scenario = cfg.resolve()?;
    if let Some(seed) = overrides.seed {
        scenario.seed = seed;
    }
    if let Some(days) = overrides.days {
        if days == 0 {
            return Err(Error::Config {
                key: "--days".into(),
                message: "must be a positive integer".into(),
            });
        }
        scenario.days = days;
    }
    Ok((cfg, scenario))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn money(x: f64) -> String {
    format!("${x:.2}")
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DayRecord>,
    pub summary: RunSummary,
    pub daily_csv: Option<PathBuf>,
    pub report: Report,
}

/// Runs the configured scenario, writes the daily CSV to `--out` (else the
/// config's `output.daily_csv`, else nowhere) and summarises the run.
pub fn cmd_run(config: &Path, overrides: &Overrides) -> Result<RunOutput> {
    let (cfg, scenario) = load_scenario(config, overrides)?;
    let records = run_sim(&scenario)?;
    let summary = RunSummary::from_records(&records)?;
    let daily_csv = overrides.out.clone().or(cfg.output.daily_csv);
    if let Some(path) = &daily_csv {
        let mut file = create(path)?;
        write_daily_csv(&records, &mut file)?;
        file.flush()?;
    }

    let mut report = Report::default();
    report.line(format!("simulated {} day(s), seed {}", summary.days, scenario.seed));
    report.line(format!(
        "price {:.6} -> {:.6} (drift {:.4} bps)",
        summary.initial_mid,
        summary.final_close,
        summary.total_drift * 1e4
    ));
    report.line(format!(
        "cost {} total, {} per day",
        money(summary.total_cost),
        money(summary.cost_per_day)
    ));
    report.line(format!(
        "mark-to-market {} total, {} per day",
        money(summary.total_mtm),
        money(summary.mtm_per_day)
    ));
    report.line(format!("gain/cost ratio {:.4}", summary.gain_cost_ratio));
    report.line(format!(
        "cumulative factors: overnight {:.6}, intraday {:.6}, total {:.6}",
        summary.cum_overnight, summary.cum_intraday, summary.cum_total
    ));
    if let Some(path) = &daily_csv {
        report.line(format!("daily series written to {}", path.display()));
    }
    report.value("lambda", format!("{:.12e}", scenario.impact.lambda()));
    for (k, v) in summary.key_values() {
        report.value(k, v);
    }
    if let Some(path) = &daily_csv {
        report.value("daily_csv", path.display());
    }
    Ok(RunOutput {
        records,
        summary,
        daily_csv,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutput {
    pub decomposition: DecompositionResult,
    pub report: Report,
}

/// Decomposes a price series into overnight and intraday returns.
pub fn cmd_analyze(csv: &Path, out: Option<&Path>) -> Result<AnalyzeOutput> {
    let series = read_ohlc_csv(csv)?;
    let decomposition = decompose(&series)?;
    if let Some(path) = out {
        let mut file = create(path)?;
        write_decomposition_csv(&decomposition, &mut file)?;
        file.flush()?;
    }
    let breaks = series.continuity_breaks();

    let mut report = Report::default();
    report.line(format!("{} row(s) from {}", series.len(), csv.display()));
    report.line(format!(
        "cumulative factors: overnight {:.6}, intraday {:.6}, total {:.6}",
        decomposition.cumulative_overnight,
        decomposition.cumulative_intraday,
        decomposition.cumulative_total
    ));
    report.line(format!(
        "cumulative log returns: overnight {:.6}, intraday {:.6}, total {:.6}",
        decomposition.log_cumulative_overnight(),
        decomposition.log_cumulative_intraday(),
        decomposition.log_cumulative_total()
    ));
    if !breaks.is_empty() {
        report.line(format!(
            "{} row(s) whose previous close differs from the prior row's close",
            breaks.len()
        ));
    }
    if let Some(path) = out {
        report.line(format!("report written to {}", path.display()));
    }
    report.value("rows", series.len());
    report.value("cum_overnight", format!("{:.12}", decomposition.cumulative_overnight));
    report.value("cum_intraday", format!("{:.12}", decomposition.cumulative_intraday));
    report.value("cum_total", format!("{:.12}", decomposition.cumulative_total));
    report.value("log_cum_overnight", format!("{:.12}", decomposition.log_cumulative_overnight()));
    report.value("log_cum_intraday", format!("{:.12}", decomposition.log_cumulative_intraday()));
    report.value("log_cum_total", format!("{:.12}", decomposition.log_cumulative_total()));
    report.value("continuity_breaks", breaks.len());
    if let Some(path) = out {
        report.value("report_csv", path.display());
    }
    Ok(AnalyzeOutput {
        decomposition,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub grid: ParameterGrid,
    pub cells: Vec<SweepCell>,
    pub table_csv: Option<PathBuf>,
    pub report: Report,
}

impl SweepOutput {
    /// 0 when any cell succeeded, 2 when every cell failed.
    pub fn exit_code(&self) -> u8 {
        if self.cells.iter().any(|c| c.outcome.is_ok()) {
            EXIT_OK
        } else {
            EXIT_RUNTIME
        }
    }
}

/// Parses `name=v1,v2,...` axis specs into a grid.
pub fn parse_grid(specs: &[String]) -> Result<ParameterGrid> {
    let mut grid = ParameterGrid::new();
    for spec in specs {
        let (param, values) = ParameterGrid::parse_axis(spec).map_err(|e| Error::Config {
            key: format!("--grid {spec}"),
            message: e.to_string(),
        })?;
        grid.push_axis(param, values);
    }
    if grid.is_empty() {
        return Err(Error::Config {
            key: "--grid".into(),
            message: "at least one non-empty axis is required".into(),
        });
    }
    Ok(grid)
}

const SUMMARY_COLUMNS: [&str; 13] = [
    "days",
    "initial_mid",
    "final_close",
    "total_drift_bps",
    "total_cost",
    "total_mtm",
    "total_net_pnl",
    "cost_per_day",
    "mtm_per_day",
    "gain_cost_ratio",
    "cum_overnight",
    "cum_intraday",
    "cum_total",
];

/// Writes the sweep table: one column per axis, the summary columns, then
/// `error` (empty for successful cells).
pub fn write_sweep_csv<W: Write>(grid: &ParameterGrid, cells: &[SweepCell], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = grid.axes().iter().map(|(p, _)| p.name().to_string()).collect();
    header.extend(SUMMARY_COLUMNS.iter().map(|s| s.to_string()));
    header.push("error".into());
    writer.write_record(&header)?;
    for cell in cells {
        let mut row: Vec<String> = cell.params.iter().map(|(_, v)| v.to_string()).collect();
        match &cell.outcome {
            Ok(summary) => {
                row.extend(summary.key_values().into_iter().map(|(_, v)| v));
                row.push(String::new());
            }
            Err(message) => {
                row.extend(SUMMARY_COLUMNS.iter().map(|_| String::new()));
                row.push(message.clone());
            }
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Runs every grid cell against the configured scenario. The table is the
/// same for any worker count.
pub fn cmd_sweep(
    config: &Path,
    grid: &[String],
    overrides: &Overrides,
    workers: usize,
) -> Result<SweepOutput> {
    let grid = parse_grid(grid)?;
    let (cfg, scenario) = load_scenario(config, overrides)?;
    let cells = run_sweep(&scenario, &grid, workers)?;
    let table_csv = overrides.out.clone().or(cfg.output.sweep_csv);
    if let Some(path) = &table_csv {
        let mut file = create(path)?;
        write_sweep_csv(&grid, &cells, &mut file)?;
        file.flush()?;
    }

    let ok = cells.iter().filter(|c| c.outcome.is_ok()).count();
    let mut report = Report::default();
    report.line(format!(
        "{} cell(s) over {} axis/axes, {ok} succeeded, {} failed",
        cells.len(),
        grid.axes().len(),
        cells.len() - ok
    ));
    let mut table = Vec::new();
    write_sweep_csv(&grid, &cells, &mut table)?;
    if table_csv.is_none() {
        report.lines.extend(String::from_utf8_lossy(&table).lines().map(str::to_string));
    }
    // A book-value axis swept on its own gets its net P&L zero crossing.
    if let [(SweepParam::BookValue, _)] = grid.axes() {
        let points: Vec<(f64, f64)> = cells
            .iter()
            .filter_map(|c| Some((c.params[0].1, c.outcome.as_ref().ok()?.total_net_pnl)))
            .collect();
        if let Some(x) = ratchet_core::analysis::locate_zero_crossing(&points) {
            report.line(format!("net P&L changes sign at book value {}", money(x)));
            report.value("breakeven_book_value", format!("{x:.2}"));
        }
    }
    if let Some(path) = &table_csv {
        report.line(format!("table written to {}", path.display()));
    }
    report.value("cells", cells.len());
    report.value("succeeded", ok);
    report.value("failed", cells.len() - ok);
    if let Some(path) = &table_csv {
        report.value("sweep_csv", path.display());
    }
    Ok(SweepOutput {
        grid,
        cells,
        table_csv,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct CalibrateOutput {
    pub target_bps: f64,
    pub lambda: f64,
    /// Nudge measured on one noiseless simulated day with the new lambda.
    pub achieved_bps: f64,
    pub report: Report,
}

/// Solves for the lambda giving `target_bps` of net daily nudge and checks it
/// on one noiseless day.
pub fn cmd_calibrate(config: &Path, target_bps: f64) -> Result<CalibrateOutput> {
    if !target_bps.is_finite() {
        return Err(Error::Config {
            key: "--target-bps".into(),
            message: format!("must be finite, got {target_bps}"),
        });
    }
    let (_, mut scenario) = load_scenario(config, &Overrides::default())?;
    scenario.target_nudge_bps = Some(target_bps);
    let lambda = scenario.calibrate()?;

    let mut check = scenario.clone();
    check.noise = NoiseParams::quiet();
    check.days = 1;
    let mut sim = Simulation::new(&check)?;
    sim.step()?;
    let achieved_bps = sim.state().session_displacement_bps();

    let mut report = Report::default();
    report.line(format!("lambda {lambda:.12e} for a {target_bps} bp daily nudge"));
    report.line(format!("one noiseless day: nudge {achieved_bps:.4} bp"));
    report.value("target_bps", target_bps);
    report.value("lambda", format!("{lambda:.17e}"));
    report.value("achieved_bps", format!("{achieved_bps:.12}"));
    Ok(CalibrateOutput {
        target_bps,
        lambda,
        achieved_bps,
        report,
    })
}
