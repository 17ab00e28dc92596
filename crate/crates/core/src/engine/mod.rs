//! Day and tick loops.
//!
//! Every tick is processed in a fixed order, which is part of the output
//! contract:
//!
//! 1. decay outstanding temporary impact,
//! 2. apply the noise increment (`sigma_daily / sqrt(ticks_per_day)`),
//! 3. execute every agent's orders for the tick, in agent-list order.
//!
//! The open is the mid after tick 0 has been processed and the close is the
//! mid after the last tick. Each day draws noise from its own `(seed, day)`
//! substream, so any day can be replayed independently.

mod sweep;

use std::io::Write;

use crate::agents::{split_manipulators, ManipulatorAgent};
use crate::analysis::{decompose, PriceSeries};
use crate::error::{Error, Result};
use crate::ledger::{Ledger, Micros};
use crate::market::{
    calibrate_lambda, ImpactParams, IntradayClock, Interpolation, MarketState, NoiseParams,
    SpreadDepthProfile, DEFAULT_CLOSE_SPREAD_BPS, DEFAULT_DEPTH, DEFAULT_OPEN_SPREAD_BPS,
};

pub use sweep::{run_sweep, ParameterGrid, SweepCell, SweepParam};

pub const DAILY_CSV_HEADER: [&str; 9] = [
    "day",
    "prev_close",
    "open",
    "close",
    "overnight_ret",
    "intraday_ret",
    "total_cost",
    "mtm_gain",
    "net_pnl",
];

/// Endpoint description of an interpolated spread/depth profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub spread_open_bps: f64,
    pub spread_close_bps: f64,
    pub depth_open: f64,
    pub depth_close: f64,
    pub interpolation: Interpolation,
}

impl ProfileSpec {
    pub fn build(&self, clock: &IntradayClock) -> Result<SpreadDepthProfile> {
        SpreadDepthProfile::interpolated(
            clock,
            self.spread_open_bps,
            self.spread_close_bps,
            self.depth_open,
            self.depth_close,
            self.interpolation,
        )
    }
}

impl Default for ProfileSpec {
    fn default() -> Self {
        Self {
            spread_open_bps: DEFAULT_OPEN_SPREAD_BPS,
            spread_close_bps: DEFAULT_CLOSE_SPREAD_BPS,
            depth_open: DEFAULT_DEPTH,
            depth_close: DEFAULT_DEPTH,
            interpolation: Interpolation::Exponential,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub clock: IntradayClock,
    pub profile: SpreadDepthProfile,
    /// Present when `profile` was built from endpoints; lets sweeps vary them.
    pub profile_spec: Option<ProfileSpec>,
    pub impact: ImpactParams,
    /// When set, `impact.lambda` is re-derived from the agents' schedule so
    /// that one round trip nudges the price by this many bps.
    pub target_nudge_bps: Option<f64>,
    pub noise: NoiseParams,
    pub agents: Vec<ManipulatorAgent>,
    pub days: u32,
    pub seed: u64,
    pub initial_mid: f64,
    pub initial_fundamental: f64,
}

impl Scenario {
    /// The round-number scenario: $10B book, $10M legs at the auctions,
    /// 15/5 bps spreads, calibrated to a 1 bp daily nudge, no noise.
    pub fn paper() -> Self {
        let clock = IntradayClock::default();
        let spec = ProfileSpec::default();
        let mut scenario = Self {
            clock,
            profile: spec.build(&clock).expect("default profile"),
            profile_spec: Some(spec),
            impact: ImpactParams::default(),
            target_nudge_bps: Some(1.0),
            noise: NoiseParams::quiet(),
            agents: vec![ManipulatorAgent::paper(&clock)],
            days: 1,
            seed: 0,
            initial_mid: 100.0,
            initial_fundamental: 100.0,
        };
        scenario.calibrate().expect("paper scenario calibrates");
        scenario
    }

    /// Checks cross-component invariants.
    pub fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::arg("days must be at least 1"));
        }
        if self.profile.ticks() != self.clock.ticks_per_day() {
            return Err(Error::arg(format!(
                "profile has {} ticks but the clock has {}",
                self.profile.ticks(),
                self.clock.ticks_per_day()
            )));
        }
        for agent in &self.agents {
            agent.check_schedule(&self.clock)?;
        }
        if !(self.initial_mid.is_finite() && self.initial_mid > 0.0) {
            return Err(Error::arg("initial_mid must be positive"));
        }
        if !(self.initial_fundamental.is_finite() && self.initial_fundamental > 0.0) {
            return Err(Error::arg("initial_fundamental must be positive"));
        }
        Ok(())
    }

    /// Re-derives lambda from `target_nudge_bps`, if set, and returns the
    /// lambda in force.
    pub fn calibrate(&mut self) -> Result<f64> {
        if let Some(target) = self.target_nudge_bps {
            let lambda = self.lambda_for(target)?;
            self.impact = self.impact.with_lambda(lambda)?;
        }
        Ok(self.impact.lambda())
    }

    /// Lambda giving a `target_bps` nudge for the enabled agents' aggregate
    /// round trip. All enabled agents must share one schedule.
    pub fn lambda_for(&self, target_bps: f64) -> Result<f64> {
        let mut enabled = self.agents.iter().filter(|a| a.enabled());
        let first = enabled.next().ok_or_else(|| {
            Error::InfeasibleCalibration("no enabled agent to calibrate against".into())
        })?;
        let (buy, sell) = (first.buy_tick(), first.sell_tick());
        let mut leg = first.leg_notional();
        for agent in enabled {
            if agent.buy_tick() != buy || agent.sell_tick() != sell {
                return Err(Error::InfeasibleCalibration(
                    "enabled agents do not share a schedule".into(),
                ));
            }
            leg += agent.leg_notional();
        }
        calibrate_lambda(
            &self.profile,
            self.impact.permanent_fraction(),
            leg,
            buy,
            sell,
            target_bps,
        )
    }

    /// Replaces the agent list by `n` equal parts of the aggregate trader.
    pub fn resplit(&mut self, n: usize) -> Result<()> {
        let first = self
            .agents
            .first()
            .ok_or_else(|| Error::arg("scenario has no agents to split"))?;
        let capital: f64 = self.agents.iter().map(|a| a.capital()).sum();
        let leg: f64 = self.agents.iter().map(|a| a.leg_notional()).sum();
        let name = first.name().split('#').next().unwrap_or("M").to_string();
        let template = first
            .clone()
            .with_name(name)
            .with_capital(capital)?
            .with_leg_notional(leg)?;
        self.agents = split_manipulators(n, &template)?;
        Ok(())
    }

    pub fn initial_state(&self) -> Result<MarketState> {
        MarketState::new(self.initial_mid, self.initial_fundamental, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayRecord {
    /// 1-based.
    pub day: u32,
    pub prev_close: f64,
    pub open: f64,
    pub close: f64,
    pub total_cost: Micros,
    pub mtm_gain: f64,
    pub net_pnl: f64,
}

impl DayRecord {
    pub fn overnight_return(&self) -> f64 {
        self.open / self.prev_close - 1.0
    }

    pub fn intraday_return(&self) -> f64 {
        self.close / self.open - 1.0
    }

    pub fn close_to_close_return(&self) -> f64 {
        self.close / self.prev_close - 1.0
    }
}

/// Simulates one day in place.
pub fn run_day(
    state: &mut MarketState,
    ledgers: &mut [Ledger],
    scenario: &Scenario,
    day: u32,
) -> Result<DayRecord> {
    run_day_inner(state, ledgers, scenario, day).map_err(|e| match e {
        e @ Error::DayFailed { .. } => e,
        e => Error::DayFailed {
            day,
            source: Box::new(e),
        },
    })
}

fn run_day_inner(
    state: &mut MarketState,
    ledgers: &mut [Ledger],
    scenario: &Scenario,
    day: u32,
) -> Result<DayRecord> {
    if ledgers.len() != scenario.agents.len() {
        return Err(Error::arg(format!(
            "{} ledgers for {} agents",
            ledgers.len(),
            scenario.agents.len()
        )));
    }
    state.begin_session(scenario.seed, u64::from(day));
    let prev_close = state.mid();
    for ledger in ledgers.iter_mut() {
        ledger.begin_day(day);
    }

    let dt = scenario.clock.tick_fraction();
    let quiet = scenario.noise.is_quiet();
    let mut open = prev_close;
    let mut total_cost = Micros::ZERO;
    for tick in 0..scenario.clock.ticks_per_day() {
        state.decay_temporary(&scenario.impact);
        if !quiet {
            state.advance_noise(&scenario.noise, dt)?;
        }
        for (agent, ledger) in scenario.agents.iter().zip(ledgers.iter_mut()) {
            for order in agent.orders_on_day(day, tick) {
                let fill = state.apply_aggressive_trade(
                    &scenario.profile,
                    &scenario.impact,
                    order.signed_notional,
                    tick,
                )?;
                ledger.record_fill(fill.fill_price, order.signed_notional, fill.cost)?;
                total_cost = total_cost.checked_add(Micros::from_currency(fill.cost)?)?;
            }
        }
        if tick == 0 {
            open = state.mid();
        }
    }
    let close = state.mid();

    // The book is a fixed holding sized at `book_value` on the initial mid,
    // so its value moves with the price and daily marks telescope.
    let price_level = prev_close / scenario.initial_mid;
    let mut mtm_gain = 0.0;
    for (agent, ledger) in scenario.agents.iter().zip(ledgers.iter_mut()) {
        if agent.enabled() {
            let book = agent.book_value_on(day) * price_level;
            mtm_gain += ledger.mark_to_market(book, prev_close, close)?;
        }
    }
    if !(open > 0.0 && close > 0.0) {
        return Err(Error::NumericDomain(format!(
            "non-positive prices (open {open}, close {close})"
        )));
    }
    Ok(DayRecord {
        day,
        prev_close,
        open,
        close,
        total_cost,
        mtm_gain,
        net_pnl: mtm_gain - total_cost.to_currency(),
    })
}

/// A run in progress: price state plus one ledger per agent.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    state: MarketState,
    ledgers: Vec<Ledger>,
    next_day: u32,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        Ok(Self {
            scenario,
            state: scenario.initial_state()?,
            ledgers: vec![Ledger::new(); scenario.agents.len()],
            next_day: 1,
        })
    }

    pub fn step(&mut self) -> Result<DayRecord> {
        let record = run_day(&mut self.state, &mut self.ledgers, self.scenario, self.next_day)?;
        self.next_day += 1;
        Ok(record)
    }

    pub fn state(&self) -> &MarketState {
        &self.state
    }

    pub fn ledgers(&self) -> &[Ledger] {
        &self.ledgers
    }

    pub fn run_to_end(mut self) -> Result<SimulationOutput> {
        let mut records = Vec::with_capacity(self.scenario.days as usize);
        while self.next_day <= self.scenario.days {
            records.push(self.step()?);
        }
        Ok(SimulationOutput {
            records,
            ledgers: self.ledgers,
            final_state: self.state,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub records: Vec<DayRecord>,
    pub ledgers: Vec<Ledger>,
    pub final_state: MarketState,
}

/// Runs every day of the scenario.
pub fn run_sim(scenario: &Scenario) -> Result<Vec<DayRecord>> {
    Ok(Simulation::new(scenario)?.run_to_end()?.records)
}

/// Aggregate view of a finished run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub days: u32,
    pub initial_mid: f64,
    pub final_close: f64,
    pub total_drift: f64,
    pub total_cost: f64,
    pub total_mtm: f64,
    pub total_net_pnl: f64,
    pub cost_per_day: f64,
    pub mtm_per_day: f64,
    pub gain_cost_ratio: f64,
    pub cum_overnight: f64,
    pub cum_intraday: f64,
    pub cum_total: f64,
}

impl RunSummary {
    pub fn from_records(records: &[DayRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::arg("cannot summarize an empty run"))?;
        let last = records.last().expect("non-empty");
        let mut cost = Micros::ZERO;
        for r in records {
            cost = cost.checked_add(r.total_cost)?;
        }
        let total_cost = cost.to_currency();
        let total_mtm: f64 = records.iter().map(|r| r.mtm_gain).sum();
        let days = records.len() as u32;
        let decomposition = decompose(&PriceSeries::from_records(records)?)?;
        Ok(Self {
            days,
            initial_mid: first.prev_close,
            final_close: last.close,
            total_drift: last.close / first.prev_close - 1.0,
            total_cost,
            total_mtm,
            total_net_pnl: total_mtm - total_cost,
            cost_per_day: total_cost / f64::from(days),
            mtm_per_day: total_mtm / f64::from(days),
            gain_cost_ratio: if total_cost > 0.0 {
                total_mtm / total_cost
            } else {
                f64::NAN
            },
            cum_overnight: decomposition.cumulative_overnight,
            cum_intraday: decomposition.cumulative_intraday,
            cum_total: decomposition.cumulative_total,
        })
    }

    /// Machine-readable `key=value` lines.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("days", self.days.to_string()),
            ("initial_mid", format!("{:.6}", self.initial_mid)),
            ("final_close", format!("{:.6}", self.final_close)),
            ("total_drift_bps", format!("{:.6}", self.total_drift * 1e4)),
            ("total_cost", format!("{:.2}", self.total_cost)),
            ("total_mtm", format!("{:.2}", self.total_mtm)),
            ("total_net_pnl", format!("{:.2}", self.total_net_pnl)),
            ("cost_per_day", format!("{:.2}", self.cost_per_day)),
            ("mtm_per_day", format!("{:.2}", self.mtm_per_day)),
            ("gain_cost_ratio", format!("{:.6}", self.gain_cost_ratio)),
            ("cum_overnight", format!("{:.12}", self.cum_overnight)),
            ("cum_intraday", format!("{:.12}", self.cum_intraday)),
            ("cum_total", format!("{:.12}", self.cum_total)),
        ]
    }
}

/// Writes the daily CSV: prices to 6 decimals, returns to 10, currency to 2.
pub fn write_daily_csv<W: Write>(records: &[DayRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(DAILY_CSV_HEADER)?;
    for r in records {
        writer.write_record([
            r.day.to_string(),
            format!("{:.6}", r.prev_close),
            format!("{:.6}", r.open),
            format!("{:.6}", r.close),
            format!("{:.10}", r.overnight_return()),
            format!("{:.10}", r.intraday_return()),
            format!("{:.2}", r.total_cost.to_currency()),
            format!("{:.2}", r.mtm_gain),
            format!("{:.2}", r.net_pnl),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
