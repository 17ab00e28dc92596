//! Single-security market simulator in which price impact depends on the
//! time of day, together with a trader who exploits it by buying at the
//! open and selling at the close every day.
//!
//! Wide morning spreads and thin morning depth make an aggressive morning
//! order move the price more than an equal afternoon order, so a daily round
//! trip leaves a small permanent displacement. On a large book that
//! displacement shows up as mark-to-market gains far above the spread costs
//! paid, and in the price history as returns concentrated overnight (close
//! to open) rather than intraday.
//!
//! - [`market`]: clock, spread/depth profile, impact model, price state
//! - [`agents`]: the round-trip trader and cost-sharing splits
//! - [`ledger`]: exact micro-currency accounting and mark-to-market
//! - [`engine`]: deterministic day/tick loop and parameter sweeps
//! - [`analysis`]: overnight/intraday decomposition, doubling time, breakeven
//! - [`config`]: TOML scenario files

pub mod agents;
pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod ledger;
pub mod market;

pub use error::{Error, Result};
