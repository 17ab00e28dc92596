use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::engine::{run_sim, RunSummary, Scenario};
use crate::error::{Error, Result};
use crate::market::{ImpactParams, NoiseParams};

/// Numeric scenario fields a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    /// Aggregate book of all agents; capital is rescaled at fixed leverage.
    BookValue,
    Capital,
    Leverage,
    /// Aggregate leg notional of all agents.
    LegNotional,
    BuyTick,
    SellTick,
    Manipulators,
    Lambda,
    TargetNudgeBps,
    PermanentFraction,
    TemporaryDecayPerTick,
    SigmaDaily,
    /// Zero or negative switches mean reversion off.
    HalfLifeDays,
    SpreadOpenBps,
    SpreadCloseBps,
    Depth,
    Days,
    Seed,
    InitialMid,
}

const NAMES: [(SweepParam, &str); 19] = [
    (SweepParam::BookValue, "book_value"),
    (SweepParam::Capital, "capital"),
    (SweepParam::Leverage, "leverage"),
    (SweepParam::LegNotional, "leg_notional"),
    (SweepParam::BuyTick, "buy_tick"),
    (SweepParam::SellTick, "sell_tick"),
    (SweepParam::Manipulators, "manipulators"),
    (SweepParam::Lambda, "lambda"),
    (SweepParam::TargetNudgeBps, "target_nudge_bps"),
    (SweepParam::PermanentFraction, "permanent_fraction"),
    (SweepParam::TemporaryDecayPerTick, "temporary_decay_per_tick"),
    (SweepParam::SigmaDaily, "sigma_daily"),
    (SweepParam::HalfLifeDays, "mean_reversion_half_life_days"),
    (SweepParam::SpreadOpenBps, "spread_open_bps"),
    (SweepParam::SpreadCloseBps, "spread_close_bps"),
    (SweepParam::Depth, "depth"),
    (SweepParam::Days, "days"),
    (SweepParam::Seed, "seed"),
    (SweepParam::InitialMid, "initial_mid"),
];

impl SweepParam {
    pub fn name(self) -> &'static str {
        NAMES
            .iter()
            .find(|(p, _)| *p == self)
            .map(|(_, n)| *n)
            .expect("every parameter is named")
    }

    pub fn all_names() -> impl Iterator<Item = &'static str> {
        NAMES.iter().map(|(_, n)| *n)
    }

    fn apply(self, scenario: &mut Scenario, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::arg(format!("{} value must be finite", self.name())));
        }
        match self {
            SweepParam::BookValue => {
                let total: f64 = scenario.agents.iter().map(|a| a.book_value()).sum();
                rescale_agents(scenario, value / total, |a, k| {
                    let capital = a.capital() * k;
                    a.with_capital(capital)
                })?;
            }
            SweepParam::Capital => {
                let total: f64 = scenario.agents.iter().map(|a| a.capital()).sum();
                rescale_agents(scenario, value / total, |a, k| {
                    let capital = a.capital() * k;
                    a.with_capital(capital)
                })?;
            }
            SweepParam::Leverage => {
                map_agents(scenario, |a| a.with_leverage(value))?;
            }
            SweepParam::LegNotional => {
                let total: f64 = scenario.agents.iter().map(|a| a.leg_notional()).sum();
                if total == 0.0 {
                    let n = scenario.agents.len() as f64;
                    map_agents(scenario, |a| a.with_leg_notional(value / n))?;
                } else {
                    rescale_agents(scenario, value / total, |a, k| {
                        let leg = a.leg_notional() * k;
                        a.with_leg_notional(leg)
                    })?;
                }
            }
            SweepParam::BuyTick => {
                let tick = as_count(self, value)? as usize;
                map_agents(scenario, |a| {
                    let sell = a.sell_tick();
                    a.with_schedule(tick, sell)
                })?;
            }
            SweepParam::SellTick => {
                let tick = as_count(self, value)? as usize;
                map_agents(scenario, |a| {
                    let buy = a.buy_tick();
                    a.with_schedule(buy, tick)
                })?;
            }
            SweepParam::Manipulators => scenario.resplit(as_count(self, value)? as usize)?,
            SweepParam::Lambda => {
                scenario.impact = scenario.impact.with_lambda(value)?;
                scenario.target_nudge_bps = None;
            }
            SweepParam::TargetNudgeBps => scenario.target_nudge_bps = Some(value),
            SweepParam::PermanentFraction => {
                let p = scenario.impact;
                scenario.impact =
                    ImpactParams::new(p.lambda(), value, p.temporary_decay_per_tick())?;
            }
            SweepParam::TemporaryDecayPerTick => {
                let p = scenario.impact;
                scenario.impact = ImpactParams::new(p.lambda(), p.permanent_fraction(), value)?;
            }
            SweepParam::SigmaDaily => {
                let n = scenario.noise;
                scenario.noise = NoiseParams::new(value, n.mean_reversion_half_life_days())?;
            }
            SweepParam::HalfLifeDays => {
                let n = scenario.noise;
                let half_life = (value > 0.0).then_some(value);
                scenario.noise = NoiseParams::new(n.sigma_daily(), half_life)?;
            }
            SweepParam::SpreadOpenBps | SweepParam::SpreadCloseBps | SweepParam::Depth => {
                let mut spec = scenario.profile_spec.ok_or_else(|| {
                    Error::arg(format!(
                        "{} needs a profile built from endpoints",
                        self.name()
                    ))
                })?;
                match self {
                    SweepParam::SpreadOpenBps => spec.spread_open_bps = value,
                    SweepParam::SpreadCloseBps => spec.spread_close_bps = value,
                    _ => {
                        spec.depth_open = value;
                        spec.depth_close = value;
                    }
                }
                scenario.profile = spec.build(&scenario.clock)?;
                scenario.profile_spec = Some(spec);
            }
            SweepParam::Days => scenario.days = as_count(self, value)? as u32,
            SweepParam::Seed => scenario.seed = as_count(self, value)?,
            SweepParam::InitialMid => scenario.initial_mid = value,
        }
        Ok(())
    }
}

fn as_count(param: SweepParam, value: f64) -> Result<u64> {
    if value < 0.0 || value.fract() != 0.0 || value > 9.0e15 {
        return Err(Error::arg(format!(
            "{} must be a non-negative integer, got {value}",
            param.name()
        )));
    }
    Ok(value as u64)
}

fn map_agents(
    scenario: &mut Scenario,
    f: impl Fn(crate::agents::ManipulatorAgent) -> Result<crate::agents::ManipulatorAgent>,
) -> Result<()> {
    let agents = std::mem::take(&mut scenario.agents);
    scenario.agents = agents.into_iter().map(f).collect::<Result<_>>()?;
    Ok(())
}

fn rescale_agents(
    scenario: &mut Scenario,
    factor: f64,
    f: impl Fn(crate::agents::ManipulatorAgent, f64) -> Result<crate::agents::ManipulatorAgent>,
) -> Result<()> {
    if scenario.agents.is_empty() {
        return Err(Error::arg("scenario has no agents"));
    }
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::arg("rescaled value must be positive"));
    }
    map_agents(scenario, |a| f(a, factor))
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        NAMES
            .iter()
            .find(|(_, n)| *n == key)
            .map(|(p, _)| *p)
            .ok_or_else(|| {
                Error::arg(format!(
                    "unknown sweep parameter `{key}` (expected one of: {})",
                    SweepParam::all_names().collect::<Vec<_>>().join(", ")
                ))
            })
    }
}

/// Cartesian product of parameter axes; the last axis varies fastest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterGrid {
    axes: Vec<(SweepParam, Vec<f64>)>,
}

impl ParameterGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn axis(mut self, param: SweepParam, values: Vec<f64>) -> Self {
        self.axes.push((param, values));
        self
    }

    pub fn push_axis(&mut self, param: SweepParam, values: Vec<f64>) {
        self.axes.push((param, values));
    }

    /// Parses `name=v1,v2,...`.
    pub fn parse_axis(spec: &str) -> Result<(SweepParam, Vec<f64>)> {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::arg(format!("grid axis `{spec}` is not of the form name=v1,v2")))?;
        let param: SweepParam = name.parse()?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::arg(format!("bad value `{}` for {param}", v.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((param, values))
    }

    pub fn axes(&self) -> &[(SweepParam, Vec<f64>)] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(|(_, v)| v.len()).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> Vec<Vec<(SweepParam, f64)>> {
        let mut cells: Vec<Vec<(SweepParam, f64)>> = vec![Vec::new()];
        for (param, values) in &self.axes {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut cell = prefix.clone();
                        cell.push((*param, *v));
                        cell
                    })
                })
                .collect();
        }
        if self.is_empty() {
            Vec::new()
        } else {
            cells
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub params: Vec<(SweepParam, f64)>,
    pub outcome: std::result::Result<RunSummary, String>,
}

fn run_cell(base: &Scenario, params: &[(SweepParam, f64)]) -> std::result::Result<RunSummary, String> {
    let mut scenario = base.clone();
    for (param, value) in params {
        param.apply(&mut scenario, *value).map_err(|e| e.to_string())?;
    }
    scenario.calibrate().map_err(|e| e.to_string())?;
    let records = run_sim(&scenario).map_err(|e| e.to_string())?;
    RunSummary::from_records(&records).map_err(|e| e.to_string())
}

/// Runs one independent simulation per grid cell on `workers` threads.
/// Results come back in grid order whatever the worker count; a failing cell
/// records its error and does not stop the others.
pub fn run_sweep(base: &Scenario, grid: &ParameterGrid, workers: usize) -> Result<Vec<SweepCell>> {
    if grid.is_empty() {
        return Err(Error::arg("parameter grid is empty"));
    }
    let cells = grid.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        cells
            .into_par_iter()
            .map(|params| {
                let outcome = run_cell(base, &params);
                SweepCell { params, outcome }
            })
            .collect()
    }))
}
