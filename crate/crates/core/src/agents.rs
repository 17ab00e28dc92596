//! The round-trip trader and its order schedule.

use crate::error::{Error, Result};
use crate::market::IntradayClock;

/// A trader holding a large, slowly varying book who each day trades one
/// leg in the book's direction at `buy_tick` and the opposite leg at
/// `sell_tick`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManipulatorAgent {
    name: String,
    capital: f64,
    leverage: f64,
    leg_notional: f64,
    buy_tick: usize,
    sell_tick: usize,
    enabled: bool,
    growth_per_day: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderIntent {
    /// Positive buys, negative sells.
    pub signed_notional: f64,
    pub tick: usize,
    pub agent_id: String,
}

impl ManipulatorAgent {
    pub fn new(
        name: impl Into<String>,
        capital: f64,
        leverage: f64,
        leg_notional: f64,
        buy_tick: usize,
        sell_tick: usize,
    ) -> Result<Self> {
        let agent = Self {
            name: name.into(),
            capital,
            leverage,
            leg_notional,
            buy_tick,
            sell_tick,
            enabled: true,
            growth_per_day: 0.0,
        };
        agent.validate()?;
        Ok(agent)
    }

    /// $1B capital levered 10x, trading $10M legs at the opening and closing
    /// auctions.
    pub fn paper(clock: &IntradayClock) -> Self {
        Self::new(
            "M",
            1_000_000_000.0,
            10.0,
            10_000_000.0,
            clock.open_tick(),
            clock.close_tick(),
        )
        .expect("paper agent is valid")
    }

    fn validate(&self) -> Result<()> {
        if !(self.capital.is_finite() && self.capital > 0.0) {
            return Err(Error::arg(format!("capital must be positive, got {}", self.capital)));
        }
        if !(self.leverage.is_finite() && self.leverage > 0.0) {
            return Err(Error::arg(format!("leverage must be positive, got {}", self.leverage)));
        }
        if !(self.leg_notional.is_finite() && self.leg_notional >= 0.0) {
            return Err(Error::arg(format!(
                "leg_notional must be non-negative, got {}",
                self.leg_notional
            )));
        }
        if self.leg_notional > self.book_value() {
            return Err(Error::arg(format!(
                "leg_notional {} exceeds book value {}",
                self.leg_notional,
                self.book_value()
            )));
        }
        if self.buy_tick == self.sell_tick {
            return Err(Error::arg(format!(
                "buy and sell legs both at tick {}",
                self.buy_tick
            )));
        }
        if !(self.growth_per_day.is_finite() && self.growth_per_day > -1.0) {
            return Err(Error::arg(format!(
                "growth_per_day must exceed -1, got {}",
                self.growth_per_day
            )));
        }
        Ok(())
    }

    /// Checks the schedule against a clock.
    pub fn check_schedule(&self, clock: &IntradayClock) -> Result<()> {
        clock.check_tick(self.buy_tick)?;
        clock.check_tick(self.sell_tick)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn capital(&self) -> f64 {
        self.capital
    }

    pub fn leverage(&self) -> f64 {
        self.leverage
    }

    pub fn book_value(&self) -> f64 {
        self.capital * self.leverage
    }

    pub fn leg_notional(&self) -> f64 {
        self.leg_notional
    }

    pub fn buy_tick(&self) -> usize {
        self.buy_tick
    }

    pub fn sell_tick(&self) -> usize {
        self.sell_tick
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn growth_per_day(&self) -> f64 {
        self.growth_per_day
    }

    pub fn with_enabled(mut self, enabled: bool) -> Self {
        self.enabled = enabled;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_capital(mut self, capital: f64) -> Result<Self> {
        self.capital = capital;
        self.validate()?;
        Ok(self)
    }

    pub fn with_leverage(mut self, leverage: f64) -> Result<Self> {
        self.leverage = leverage;
        self.validate()?;
        Ok(self)
    }

    pub fn with_leg_notional(mut self, leg_notional: f64) -> Result<Self> {
        self.leg_notional = leg_notional;
        self.validate()?;
        Ok(self)
    }

    pub fn with_schedule(mut self, buy_tick: usize, sell_tick: usize) -> Result<Self> {
        self.buy_tick = buy_tick;
        self.sell_tick = sell_tick;
        self.validate()?;
        Ok(self)
    }

    /// Sets a compound daily growth rate applied to both the book and the
    /// legs, e.g. for new capital arriving over time. Zero keeps them
    /// constant.
    pub fn with_growth_per_day(mut self, growth: f64) -> Result<Self> {
        self.growth_per_day = growth;
        self.validate()?;
        Ok(self)
    }

    /// Scale applied on 1-based `day`.
    pub fn scale_on(&self, day: u32) -> f64 {
        if self.growth_per_day == 0.0 {
            1.0
        } else {
            (1.0 + self.growth_per_day).powi(day.saturating_sub(1) as i32)
        }
    }

    pub fn book_value_on(&self, day: u32) -> f64 {
        self.book_value() * self.scale_on(day)
    }

    pub fn leg_notional_on(&self, day: u32) -> f64 {
        self.leg_notional * self.scale_on(day)
    }

    pub fn orders_for_tick(&self, tick: usize) -> Vec<OrderIntent> {
        self.orders_on_day(1, tick)
    }

    pub fn orders_on_day(&self, day: u32, tick: usize) -> Vec<OrderIntent> {
        if !self.enabled {
            return Vec::new();
        }
        let signed = if tick == self.buy_tick {
            self.leg_notional_on(day)
        } else if tick == self.sell_tick {
            -self.leg_notional_on(day)
        } else {
            return Vec::new();
        };
        vec![OrderIntent {
            signed_notional: signed,
            tick,
            agent_id: self.name.clone(),
        }]
    }
}

/// Divides one trader into `n` identical traders with the same aggregate
/// book and order flow.
pub fn split_manipulators(n: usize, template: &ManipulatorAgent) -> Result<Vec<ManipulatorAgent>> {
    if n == 0 {
        return Err(Error::arg("cannot split a trader into zero parts"));
    }
    if n == 1 {
        return Ok(vec![template.clone()]);
    }
    let parts = n as f64;
    (1..=n)
        .map(|i| {
            let mut agent = template.clone();
            agent.name = format!("{}#{i}", template.name);
            agent.capital = template.capital / parts;
            agent.leg_notional = template.leg_notional / parts;
            agent.validate()?;
            Ok(agent)
        })
        .collect()
}
