use crate::error::{Error, Result};

/// Opening auction, 390 one-minute ticks, closing auction.
pub const DEFAULT_TICKS_PER_DAY: usize = 392;
pub const DEFAULT_DAYS_PER_YEAR: u32 = 252;

/// Discrete trading day: tick 0 is the opening auction, the last tick is the
/// closing auction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntradayClock {
    ticks_per_day: usize,
    days_per_year: u32,
}

impl IntradayClock {
    pub fn new(ticks_per_day: usize, days_per_year: u32) -> Result<Self> {
        if ticks_per_day < 2 {
            return Err(Error::arg(format!(
                "ticks_per_day must be at least 2, got {ticks_per_day}"
            )));
        }
        if days_per_year == 0 {
            return Err(Error::arg("days_per_year must be positive"));
        }
        Ok(Self {
            ticks_per_day,
            days_per_year,
        })
    }

    pub fn ticks_per_day(&self) -> usize {
        self.ticks_per_day
    }

    pub fn days_per_year(&self) -> u32 {
        self.days_per_year
    }

    pub fn open_tick(&self) -> usize {
        0
    }

    pub fn close_tick(&self) -> usize {
        self.ticks_per_day - 1
    }

    pub fn check_tick(&self, tick: usize) -> Result<()> {
        if tick < self.ticks_per_day {
            Ok(())
        } else {
            Err(Error::TickOutOfRange {
                tick,
                ticks_per_day: self.ticks_per_day,
            })
        }
    }

    /// Fraction of a trading day covered by one tick.
    pub fn tick_fraction(&self) -> f64 {
        1.0 / self.ticks_per_day as f64
    }
}

impl Default for IntradayClock {
    fn default() -> Self {
        Self {
            ticks_per_day: DEFAULT_TICKS_PER_DAY,
            days_per_year: DEFAULT_DAYS_PER_YEAR,
        }
    }
}
