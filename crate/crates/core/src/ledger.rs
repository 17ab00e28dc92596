//! Cash, cost and mark-to-market accounting for one trader.
//!
//! Cash and costs are integer micro-currency so that conservation identities
//! hold exactly. Overflow halts with an error instead of wrapping.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

const MICROS_PER_UNIT: f64 = 1_000_000.0;

/// Currency amount in units of 10^-6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Micros(i64);

impl Micros {
    pub const ZERO: Micros = Micros(0);

    pub fn from_raw(raw: i64) -> Self {
        Micros(raw)
    }

    /// Rounds to the nearest micro-unit, half away from zero.
    pub fn from_currency(amount: f64) -> Result<Self> {
        let scaled = (amount * MICROS_PER_UNIT).round();
        // 2^63 is exactly representable; anything at or beyond it overflows.
        if !scaled.is_finite() || scaled.abs() >= 9_223_372_036_854_775_808.0 {
            return Err(Error::Accounting(format!(
                "amount {amount} outside micro-currency range"
            )));
        }
        Ok(Micros(scaled as i64))
    }

    pub fn raw(self) -> i64 {
        self.0
    }

    pub fn to_currency(self) -> f64 {
        self.0 as f64 / MICROS_PER_UNIT
    }

    pub fn checked_add(self, other: Micros) -> Result<Micros> {
        self.0
            .checked_add(other.0)
            .map(Micros)
            .ok_or_else(|| Error::Accounting("micro-currency overflow".into()))
    }

    pub fn checked_sub(self, other: Micros) -> Result<Micros> {
        self.0
            .checked_sub(other.0)
            .map(Micros)
            .ok_or_else(|| Error::Accounting("micro-currency overflow".into()))
    }
}

impl fmt::Display for Micros {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:06}", abs / 1_000_000, abs % 1_000_000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillRecord {
    pub day: u32,
    pub fill_price: f64,
    pub signed_notional: Micros,
    pub cost: Micros,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger {
    cash: Micros,
    position: Micros,
    cumulative_cost: Micros,
    book_value_at_mark: f64,
    current_day: u32,
    fills: Vec<FillRecord>,
    daily_costs: BTreeMap<u32, Micros>,
    mtm_history: Vec<(u32, f64)>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cash(cash: Micros) -> Self {
        Self {
            cash,
            ..Self::default()
        }
    }

    /// Subsequent fills and marks are attributed to `day`.
    pub fn begin_day(&mut self, day: u32) {
        self.current_day = day;
    }

    pub fn current_day(&self) -> u32 {
        self.current_day
    }

    pub fn cash(&self) -> Micros {
        self.cash
    }

    /// Net signed notional traded so far (zero after complete round trips).
    pub fn position(&self) -> Micros {
        self.position
    }

    pub fn cumulative_cost(&self) -> Micros {
        self.cumulative_cost
    }

    pub fn book_value_at_mark(&self) -> f64 {
        self.book_value_at_mark
    }

    pub fn fills(&self) -> &[FillRecord] {
        &self.fills
    }

    pub fn mtm_history(&self) -> &[(u32, f64)] {
        &self.mtm_history
    }

    pub fn cost_on(&self, day: u32) -> Option<Micros> {
        self.daily_costs.get(&day).copied()
    }

    /// Books an aggressive fill. `signed_notional` is the mid value of the
    /// order; the fill's value at `fill_price` is that notional plus the
    /// half-spread `cost`, so cash moves by `-(signed_notional + cost)`.
    pub fn record_fill(&mut self, fill_price: f64, signed_notional: f64, cost: f64) -> Result<()> {
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(Error::arg(format!("fill cost must be non-negative, got {cost}")));
        }
        if !(fill_price.is_finite() && fill_price > 0.0) {
            return Err(Error::arg(format!("fill price must be positive, got {fill_price}")));
        }
        let notional = Micros::from_currency(signed_notional)?;
        let cost = Micros::from_currency(cost)?;
        let cash = self.cash.checked_sub(notional)?.checked_sub(cost)?;
        let position = self.position.checked_add(notional)?;
        let cumulative = self.cumulative_cost.checked_add(cost)?;
        let day_cost = self
            .daily_costs
            .get(&self.current_day)
            .copied()
            .unwrap_or_default()
            .checked_add(cost)?;

        self.cash = cash;
        self.position = position;
        self.cumulative_cost = cumulative;
        self.daily_costs.insert(self.current_day, day_cost);
        self.fills.push(FillRecord {
            day: self.current_day,
            fill_price,
            signed_notional: notional,
            cost,
        });
        Ok(())
    }

    /// Marks `book_value` from `mid_prev` to `mid_now` and records the gain
    /// against the current day.
    pub fn mark_to_market(&mut self, book_value: f64, mid_prev: f64, mid_now: f64) -> Result<f64> {
        if !(mid_prev.is_finite() && mid_prev > 0.0) {
            return Err(Error::arg(format!("previous mid must be positive, got {mid_prev}")));
        }
        if !mid_now.is_finite() || !book_value.is_finite() {
            return Err(Error::arg("mark inputs must be finite"));
        }
        let gain = book_value * (mid_now / mid_prev - 1.0);
        self.book_value_at_mark = book_value * mid_now / mid_prev;
        self.mtm_history.push((self.current_day, gain));
        Ok(gain)
    }

    pub fn mtm_on(&self, day: u32) -> Option<f64> {
        let mut found = false;
        let total = self
            .mtm_history
            .iter()
            .filter(|(d, _)| *d == day)
            .inspect(|_| found = true)
            .map(|(_, g)| g)
            .sum();
        found.then_some(total)
    }

    /// Mark-to-market gain minus costs for `day`.
    pub fn daily_net_pnl(&self, day: u32) -> Result<f64> {
        let mtm = self.mtm_on(day);
        let cost = self.cost_on(day);
        if mtm.is_none() && cost.is_none() {
            return Err(Error::UnknownDay(day));
        }
        Ok(mtm.unwrap_or(0.0) - cost.unwrap_or_default().to_currency())
    }
}
