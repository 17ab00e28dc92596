//! Intraday clock, spread/depth profile, price impact and the price state of
//! the simulated security.

mod clock;
mod impact;
mod profile;
mod state;

pub use clock::{IntradayClock, DEFAULT_DAYS_PER_YEAR, DEFAULT_TICKS_PER_DAY};
pub use impact::{calibrate_lambda, crossing_cost, impact_bps, ImpactParams, BP};
pub use profile::{
    Interpolation, SpreadDepthProfile, DEFAULT_CLOSE_SPREAD_BPS, DEFAULT_DEPTH,
    DEFAULT_OPEN_SPREAD_BPS,
};
pub use state::{Fill, MarketState, NoiseParams};
