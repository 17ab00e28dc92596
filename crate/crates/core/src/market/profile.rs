use crate::error::{Error, Result};
use crate::market::clock::IntradayClock;

pub const DEFAULT_OPEN_SPREAD_BPS: f64 = 15.0;
pub const DEFAULT_CLOSE_SPREAD_BPS: f64 = 5.0;
pub const DEFAULT_DEPTH: f64 = 50_000_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Exponential,
    Linear,
}

/// Per-tick full quoted spread (bps) and displayed depth (currency).
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadDepthProfile {
    full_spread_bps: Vec<f64>,
    depth: Vec<f64>,
}

impl SpreadDepthProfile {
    pub fn new(full_spread_bps: Vec<f64>, depth: Vec<f64>) -> Result<Self> {
        if full_spread_bps.len() != depth.len() {
            return Err(Error::arg(format!(
                "spread table has {} ticks but depth table has {}",
                full_spread_bps.len(),
                depth.len()
            )));
        }
        if full_spread_bps.len() < 2 {
            return Err(Error::arg("profile needs at least two ticks"));
        }
        for (t, (&s, &d)) in full_spread_bps.iter().zip(&depth).enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::arg(format!("full spread at tick {t} must be positive, got {s}")));
            }
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::arg(format!("depth at tick {t} must be positive, got {d}")));
            }
        }
        Ok(Self {
            full_spread_bps,
            depth,
        })
    }

    /// Builds a profile by interpolating between open and close values.
    /// The endpoint ticks carry the given values exactly.
    pub fn interpolated(
        clock: &IntradayClock,
        spread_open_bps: f64,
        spread_close_bps: f64,
        depth_open: f64,
        depth_close: f64,
        interpolation: Interpolation,
    ) -> Result<Self> {
        let n = clock.ticks_per_day();
        let spread = interpolate(n, spread_open_bps, spread_close_bps, interpolation)?;
        let depth = interpolate(n, depth_open, depth_close, interpolation)?;
        Self::new(spread, depth)
    }

    /// 15 bps at the open decaying exponentially to 5 bps at the close, over
    /// constant depth.
    pub fn paper_default(clock: &IntradayClock) -> Self {
        Self::interpolated(
            clock,
            DEFAULT_OPEN_SPREAD_BPS,
            DEFAULT_CLOSE_SPREAD_BPS,
            DEFAULT_DEPTH,
            DEFAULT_DEPTH,
            Interpolation::Exponential,
        )
        .expect("default profile is valid")
    }

    pub fn constant(clock: &IntradayClock, full_spread_bps: f64, depth: f64) -> Result<Self> {
        let n = clock.ticks_per_day();
        Self::new(vec![full_spread_bps; n], vec![depth; n])
    }

    pub fn ticks(&self) -> usize {
        self.full_spread_bps.len()
    }

    pub fn full_spread_bps(&self, tick: usize) -> Result<f64> {
        self.full_spread_bps
            .get(tick)
            .copied()
            .ok_or(Error::TickOutOfRange {
                tick,
                ticks_per_day: self.ticks(),
            })
    }

    pub fn depth(&self, tick: usize) -> Result<f64> {
        self.depth.get(tick).copied().ok_or(Error::TickOutOfRange {
            tick,
            ticks_per_day: self.ticks(),
        })
    }

    pub fn spreads(&self) -> &[f64] {
        &self.full_spread_bps
    }

    pub fn depths(&self) -> &[f64] {
        &self.depth
    }

    /// Half of the full spread at `tick`: what an aggressive fill pays
    /// relative to mid.
    pub fn quoted_half_spread(&self, tick: usize) -> Result<f64> {
        Ok(self.full_spread_bps(tick)? / 2.0)
    }

    /// Spread per unit of depth, the quantity that scales impact.
    pub fn impact_density(&self, tick: usize) -> Result<f64> {
        let depth = self.depth(tick)?;
        if depth <= 0.0 {
            return Err(Error::Model(format!("zero depth at tick {tick}")));
        }
        Ok(self.full_spread_bps(tick)? / depth)
    }
}

fn interpolate(n: usize, open: f64, close: f64, how: Interpolation) -> Result<Vec<f64>> {
    if !(open.is_finite() && open > 0.0 && close.is_finite() && close > 0.0) {
        return Err(Error::arg(format!(
            "profile endpoints must be positive, got {open} and {close}"
        )));
    }
    let last = (n - 1) as f64;
    let mut out: Vec<f64> = (0..n)
        .map(|t| {
            let x = t as f64 / last;
            match how {
                Interpolation::Exponential => open * (close / open).powf(x),
                Interpolation::Linear => open + (close - open) * x,
            }
        })
        .collect();
    out[0] = open;
    out[n - 1] = close;
    Ok(out)
}
