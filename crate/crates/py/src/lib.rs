//! Python bindings: scenarios, simulation runs, sweeps and the analysis
//! helpers. Configuration and input errors raise `ValueError`; failures
//! during a run raise `RuntimeError`.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ratchet_core::analysis::{self, PriceRow, PriceSeries};
use ratchet_core::config::ScenarioConfig;
use ratchet_core::engine::{self, ParameterGrid, RunSummary, SweepParam};
use ratchet_core::market::{self, NoiseParams};
use ratchet_core::Error;

fn to_py(err: Error) -> PyErr {
    if err.is_input_error() {
        PyValueError::new_err(err.to_string())
    } else {
        PyRuntimeError::new_err(err.to_string())
    }
}

/// One simulated trading day.
#[pyclass(module = "ratchet", name = "DayRecord", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDayRecord(engine::DayRecord);

#[pymethods]
impl PyDayRecord {
    #[getter]
    fn day(&self) -> u32 {
        self.0.day
    }
    #[getter]
    fn prev_close(&self) -> f64 {
        self.0.prev_close
    }
    #[getter]
    fn open(&self) -> f64 {
        self.0.open
    }
    #[getter]
    fn close(&self) -> f64 {
        self.0.close
    }
    #[getter]
    fn overnight_return(&self) -> f64 {
        self.0.overnight_return()
    }
    #[getter]
    fn intraday_return(&self) -> f64 {
        self.0.intraday_return()
    }
    /// Spread cost in currency; exact to the micro-unit.
    #[getter]
    fn total_cost(&self) -> f64 {
        self.0.total_cost.to_currency()
    }
    #[getter]
    fn total_cost_micros(&self) -> i64 {
        self.0.total_cost.raw()
    }
    #[getter]
    fn mtm_gain(&self) -> f64 {
        self.0.mtm_gain
    }
    #[getter]
    fn net_pnl(&self) -> f64 {
        self.0.net_pnl
    }
    fn __repr__(&self) -> String {
        format!(
            "DayRecord(day={}, open={:.6}, close={:.6}, net_pnl={:.2})",
            self.0.day, self.0.open, self.0.close, self.0.net_pnl
        )
    }
}

fn summary_dict<'py>(py: Python<'py>, summary: &RunSummary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("days", summary.days)?;
    d.set_item("initial_mid", summary.initial_mid)?;
    d.set_item("final_close", summary.final_close)?;
    d.set_item("total_drift", summary.total_drift)?;
    d.set_item("total_cost", summary.total_cost)?;
    d.set_item("total_mtm", summary.total_mtm)?;
    d.set_item("total_net_pnl", summary.total_net_pnl)?;
    d.set_item("cost_per_day", summary.cost_per_day)?;
    d.set_item("mtm_per_day", summary.mtm_per_day)?;
    d.set_item("gain_cost_ratio", summary.gain_cost_ratio)?;
    d.set_item("cum_overnight", summary.cum_overnight)?;
    d.set_item("cum_intraday", summary.cum_intraday)?;
    d.set_item("cum_total", summary.cum_total)?;
    Ok(d)
}

/// A fully validated simulation scenario.
#[pyclass(module = "ratchet", name = "Scenario", skip_from_py_object)]
#[derive(Clone)]
struct PyScenario(engine::Scenario);

#[pymethods]
impl PyScenario {
    /// One trader, $10B book, $10M legs at the open and close, 15/5 bps
    /// spreads, calibrated to a 1 bp daily nudge, no noise.
    #[staticmethod]
    fn paper() -> Self {
        Self(engine::Scenario::paper())
    }

    #[staticmethod]
    fn from_config(path: PathBuf) -> PyResult<Self> {
        let cfg = ScenarioConfig::load(path).map_err(to_py)?;
        cfg.resolve().map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let cfg = ScenarioConfig::from_toml_str(text).map_err(to_py)?;
        cfg.resolve().map(Self).map_err(to_py)
    }

    #[getter]
    fn days(&self) -> u32 {
        self.0.days
    }
    #[setter]
    fn set_days(&mut self, days: u32) -> PyResult<()> {
        if days == 0 {
            return Err(PyValueError::new_err("days must be positive"));
        }
        self.0.days = days;
        Ok(())
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }
    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.0.seed = seed;
    }
    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.impact.lambda()
    }
    #[getter]
    fn initial_mid(&self) -> f64 {
        self.0.initial_mid
    }
    #[getter]
    fn book_value(&self) -> f64 {
        self.0
            .agents
            .iter()
            .filter(|a| a.enabled())
            .map(|a| a.book_value())
            .sum()
    }

    /// Sets the daily noise; `half_life_days=None` disables mean reversion.
    #[pyo3(signature = (sigma_daily, half_life_days=None))]
    fn set_noise(&mut self, sigma_daily: f64, half_life_days: Option<f64>) -> PyResult<()> {
        self.0.noise = NoiseParams::new(sigma_daily, half_life_days).map_err(to_py)?;
        Ok(())
    }

    fn set_agents_enabled(&mut self, enabled: bool) {
        for agent in &mut self.0.agents {
            *agent = agent.clone().with_enabled(enabled);
        }
    }

    /// Recalibrates lambda to a target net daily nudge and returns it.
    fn calibrate(&mut self, target_nudge_bps: f64) -> PyResult<f64> {
        let mut next = self.0.clone();
        next.target_nudge_bps = Some(target_nudge_bps);
        let lambda = next.calibrate().map_err(to_py)?;
        self.0 = next;
        Ok(lambda)
    }

    fn run(&self, py: Python<'_>) -> PyResult<Vec<PyDayRecord>> {
        let scenario = self.0.clone();
        let records = py
            .detach(move || engine::run_sim(&scenario))
            .map_err(to_py)?;
        Ok(records.into_iter().map(PyDayRecord).collect())
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let scenario = self.0.clone();
        let summary = py
            .detach(move || engine::run_sim(&scenario).and_then(|r| RunSummary::from_records(&r)))
            .map_err(to_py)?;
        summary_dict(py, &summary)
    }

    /// Daily CSV of a run, as text.
    fn daily_csv(&self) -> PyResult<String> {
        let records = engine::run_sim(&self.0).map_err(to_py)?;
        let mut buf = Vec::new();
        engine::write_daily_csv(&records, &mut buf).map_err(to_py)?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Runs the cartesian product of `grid` (name -> values, in insertion
    /// order). Each cell yields a dict of its parameters plus either the run
    /// summary or an `error` message.
    #[pyo3(signature = (grid, workers=1))]
    fn sweep<'py>(
        &self,
        py: Python<'py>,
        grid: Vec<(String, Vec<f64>)>,
        workers: usize,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let mut g = ParameterGrid::new();
        for (name, values) in grid {
            let param: SweepParam = name.parse().map_err(to_py)?;
            g.push_axis(param, values);
        }
        let scenario = self.0.clone();
        let cells = py
            .detach(move || engine::run_sweep(&scenario, &g, workers))
            .map_err(to_py)?;
        cells
            .iter()
            .map(|cell| {
                let d = match &cell.outcome {
                    Ok(summary) => summary_dict(py, summary)?,
                    Err(message) => {
                        let d = PyDict::new(py);
                        d.set_item("error", message)?;
                        d
                    }
                };
                for (param, value) in &cell.params {
                    d.set_item(param.name(), value)?;
                }
                Ok(d)
            })
            .collect()
    }
}

/// Half-spread cost of one aggressive fill.
#[pyfunction]
fn crossing_cost(notional: f64, full_spread_bps: f64) -> PyResult<f64> {
    market::crossing_cost(notional, full_spread_bps).map_err(to_py)
}

/// Total impact in bps of an order at `tick` under the scenario's profile.
#[pyfunction]
fn impact_bps(scenario: &PyScenario, signed_notional: f64, tick: usize) -> PyResult<f64> {
    market::impact_bps(&scenario.0.impact, &scenario.0.profile, signed_notional, tick).map_err(to_py)
}

/// Lambda for a buy/sell round trip of `leg_notional` under the scenario's
/// profile and permanent fraction.
#[pyfunction]
fn calibrate_lambda(
    scenario: &PyScenario,
    leg_notional: f64,
    buy_tick: usize,
    sell_tick: usize,
    target_nudge_bps: f64,
) -> PyResult<f64> {
    market::calibrate_lambda(
        &scenario.0.profile,
        scenario.0.impact.permanent_fraction(),
        leg_notional,
        buy_tick,
        sell_tick,
        target_nudge_bps,
    )
    .map_err(to_py)
}

/// Smallest number of days for a constant nudge to double the price.
#[pyfunction]
fn doubling_time(nudge_bps: f64) -> PyResult<u64> {
    analysis::doubling_time(nudge_bps).map_err(to_py)
}

/// Book value at which daily mark-to-market gain equals daily cost, and
/// whether the spreads allow the nudge to arise at all.
#[pyfunction]
fn breakeven_book(
    leg_notional: f64,
    spread_open_bps: f64,
    spread_close_bps: f64,
    net_nudge_bps: f64,
) -> PyResult<(f64, bool)> {
    analysis::breakeven_book(leg_notional, spread_open_bps, spread_close_bps, net_nudge_bps)
        .map(|b| (b.book_value, b.nudge_attainable))
        .map_err(to_py)
}

fn decomposition_dict<'py>(
    py: Python<'py>,
    d: &analysis::DecompositionResult,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("labels", d.labels.clone())?;
    out.set_item("overnight", d.overnight.clone())?;
    out.set_item("intraday", d.intraday.clone())?;
    out.set_item("total", d.total.clone())?;
    out.set_item("cum_overnight", d.cumulative_overnight)?;
    out.set_item("cum_intraday", d.cumulative_intraday)?;
    out.set_item("cum_total", d.cumulative_total)?;
    Ok(out)
}

/// Splits `(prev_close | None, open, close)` rows into overnight and
/// intraday returns with cumulative factors.
#[pyfunction]
fn decompose<'py>(
    py: Python<'py>,
    rows: Vec<(Option<f64>, f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(i, (prev_close, open, close))| PriceRow {
            label: (i + 1).to_string(),
            prev_close,
            open,
            close,
        })
        .collect();
    let series = PriceSeries::new(rows).map_err(to_py)?;
    let d = analysis::decompose(&series).map_err(to_py)?;
    decomposition_dict(py, &d)
}

/// Reads an OHLC or daily CSV and decomposes it.
#[pyfunction]
fn analyze_csv(py: Python<'_>, path: PathBuf) -> PyResult<Bound<'_, PyDict>> {
    let series = analysis::read_ohlc_csv(path).map_err(to_py)?;
    let d = analysis::decompose(&series).map_err(to_py)?;
    decomposition_dict(py, &d)
}

#[pymodule]
fn ratchet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyDayRecord>()?;
    m.add_function(wrap_pyfunction!(crossing_cost, m)?)?;
    m.add_function(wrap_pyfunction!(impact_bps, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(doubling_time, m)?)?;
    m.add_function(wrap_pyfunction!(breakeven_book, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_csv, m)?)?;
    Ok(())
}
