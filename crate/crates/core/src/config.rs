//! Scenario configuration files.
//!
//! TOML with one table per scenario component:
//!
//! ```toml
//! [clock]
//! ticks_per_day = 392
//!
//! [profile]
//! spread_open_bps = 15.0
//! spread_close_bps = 5.0
//! depth = 50_000_000.0
//!
//! [impact]
//! target_nudge_bps = 1.0      # or: lambda = 0.25
//!
//! [noise]
//! sigma_daily = 0.0
//! mean_reversion_half_life_days = "none"
//!
//! [[agents]]
//! capital = 1_000_000_000.0
//! leverage = 10.0
//! leg_notional = 10_000_000.0
//! buy_tick = "open"
//! sell_tick = "close"
//!
//! [run]
//! days = 1
//! seed = 42
//! ```
//!
//! Unknown keys are rejected, and every value is checked before a scenario
//! is returned.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::agents::{split_manipulators, ManipulatorAgent};
use crate::engine::{ProfileSpec, Scenario};
use crate::error::{Error, Result};
use crate::market::{
    ImpactParams, Interpolation, IntradayClock, NoiseParams, DEFAULT_CLOSE_SPREAD_BPS,
    DEFAULT_DAYS_PER_YEAR, DEFAULT_DEPTH, DEFAULT_OPEN_SPREAD_BPS, DEFAULT_TICKS_PER_DAY,
};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub clock: ClockConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub impact: ImpactConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub agents: Vec<AgentConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ClockConfig {
    pub ticks_per_day: i64,
    pub days_per_year: i64,
}

impl Default for ClockConfig {
    fn default() -> Self {
        Self {
            ticks_per_day: DEFAULT_TICKS_PER_DAY as i64,
            days_per_year: i64::from(DEFAULT_DAYS_PER_YEAR),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum InterpolationConfig {
    #[default]
    Exponential,
    Linear,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub spread_open_bps: f64,
    pub spread_close_bps: f64,
    /// Shorthand for equal `depth_open` and `depth_close`.
    pub depth: Option<f64>,
    pub depth_open: Option<f64>,
    pub depth_close: Option<f64>,
    pub interpolation: InterpolationConfig,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            spread_open_bps: DEFAULT_OPEN_SPREAD_BPS,
            spread_close_bps: DEFAULT_CLOSE_SPREAD_BPS,
            depth: None,
            depth_open: None,
            depth_close: None,
            interpolation: InterpolationConfig::Exponential,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ImpactConfig {
    pub lambda: Option<f64>,
    pub target_nudge_bps: Option<f64>,
    pub permanent_fraction: f64,
    pub temporary_decay_per_tick: f64,
}

impl Default for ImpactConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            target_nudge_bps: None,
            permanent_fraction: 0.5,
            temporary_decay_per_tick: 0.5,
        }
    }
}

/// A half-life in days, or the string `"none"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum HalfLife {
    Days(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub sigma_daily: f64,
    pub mean_reversion_half_life_days: HalfLife,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_daily: 0.01,
            mean_reversion_half_life_days: HalfLife::Days(504.0),
        }
    }
}

/// A tick index, or `"open"` / `"close"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum TickSpec {
    Index(i64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub name: String,
    pub capital: f64,
    pub leverage: f64,
    pub leg_notional: f64,
    pub buy_tick: TickSpec,
    pub sell_tick: TickSpec,
    pub enabled: bool,
    /// Number of identical traders sharing this book and flow.
    pub count: i64,
    pub growth_per_day: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            name: "M".into(),
            capital: 1_000_000_000.0,
            leverage: 10.0,
            leg_notional: 10_000_000.0,
            buy_tick: TickSpec::Named("open".into()),
            sell_tick: TickSpec::Named("close".into()),
            enabled: true,
            count: 1,
            growth_per_day: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub days: i64,
    pub seed: u64,
    pub initial_mid: f64,
    pub initial_fundamental: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            days: 1,
            seed: 0,
            initial_mid: 100.0,
            initial_fundamental: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub daily_csv: Option<PathBuf>,
    pub sweep_csv: Option<PathBuf>,
    pub report_csv: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let key = e
                .span()
                .and_then(|span| text.get(span))
                .map(|s| s.trim().to_string())
                .unwrap_or_default();
            Error::Config { key, message }
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Validates every field and builds the scenario, calibrating lambda when
    /// a target nudge is configured.
    pub fn resolve(&self) -> Result<Scenario> {
        let clock = IntradayClock::new(
            positive_count("clock.ticks_per_day", self.clock.ticks_per_day)?,
            positive_count("clock.days_per_year", self.clock.days_per_year)? as u32,
        )
        .map_err(|e| retag("clock.ticks_per_day", e))?;

        let p = &self.profile;
        for (key, v) in [
            ("profile.spread_open_bps", p.spread_open_bps),
            ("profile.spread_close_bps", p.spread_close_bps),
        ] {
            positive("", v).map_err(|_| Error::config(key, format!("must be positive, got {v}")))?;
        }
        let depth = p.depth.unwrap_or(DEFAULT_DEPTH);
        let depth_open = p.depth_open.unwrap_or(depth);
        let depth_close = p.depth_close.unwrap_or(depth);
        for (key, v) in [
            ("profile.depth", depth),
            ("profile.depth_open", depth_open),
            ("profile.depth_close", depth_close),
        ] {
            positive(key, v)?;
        }
        let spec = ProfileSpec {
            spread_open_bps: p.spread_open_bps,
            spread_close_bps: p.spread_close_bps,
            depth_open,
            depth_close,
            interpolation: match p.interpolation {
                InterpolationConfig::Exponential => Interpolation::Exponential,
                InterpolationConfig::Linear => Interpolation::Linear,
            },
        };
        let profile = spec.build(&clock).map_err(|e| retag("profile", e))?;

        let i = &self.impact;
        if i.lambda.is_some() && i.target_nudge_bps.is_some() {
            return Err(Error::config(
                "impact.lambda",
                "set either lambda or target_nudge_bps, not both",
            ));
        }
        let lambda = i.lambda.unwrap_or(0.0);
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::config("impact.lambda", format!("must be non-negative, got {lambda}")));
        }
        if !(0.0..=1.0).contains(&i.permanent_fraction) {
            return Err(Error::config(
                "impact.permanent_fraction",
                format!("must lie in [0, 1], got {}", i.permanent_fraction),
            ));
        }
        if !(0.0..1.0).contains(&i.temporary_decay_per_tick) {
            return Err(Error::config(
                "impact.temporary_decay_per_tick",
                format!("must lie in [0, 1), got {}", i.temporary_decay_per_tick),
            ));
        }
        if let Some(t) = i.target_nudge_bps {
            if !t.is_finite() {
                return Err(Error::config("impact.target_nudge_bps", "must be finite"));
            }
        }
        let impact = ImpactParams::new(lambda, i.permanent_fraction, i.temporary_decay_per_tick)
            .map_err(|e| retag("impact", e))?;

        let n = &self.noise;
        if !(n.sigma_daily.is_finite() && n.sigma_daily >= 0.0) {
            return Err(Error::config(
                "noise.sigma_daily",
                format!("must be non-negative, got {}", n.sigma_daily),
            ));
        }
        let half_life = match &n.mean_reversion_half_life_days {
            HalfLife::Days(d) => Some(positive("noise.mean_reversion_half_life_days", *d)?),
            HalfLife::Keyword(k) if k.eq_ignore_ascii_case("none") => None,
            HalfLife::Keyword(k) => {
                return Err(Error::config(
                    "noise.mean_reversion_half_life_days",
                    format!("expected a number of days or \"none\", got \"{k}\""),
                ))
            }
        };
        let noise = NoiseParams::new(n.sigma_daily, half_life).map_err(|e| retag("noise", e))?;

        let mut agents = Vec::new();
        for (idx, a) in self.agents.iter().enumerate() {
            let key = |field: &str| format!("agents[{idx}].{field}");
            let buy = resolve_tick(&key("buy_tick"), &a.buy_tick, &clock)?;
            let sell = resolve_tick(&key("sell_tick"), &a.sell_tick, &clock)?;
            positive(&key("capital"), a.capital)?;
            positive(&key("leverage"), a.leverage)?;
            if !(a.leg_notional.is_finite() && a.leg_notional >= 0.0) {
                return Err(Error::config(key("leg_notional"), "must be non-negative"));
            }
            if a.leg_notional > a.capital * a.leverage {
                return Err(Error::config(
                    key("leg_notional"),
                    format!("{} exceeds the book value {}", a.leg_notional, a.capital * a.leverage),
                ));
            }
            if buy == sell {
                return Err(Error::config(key("sell_tick"), "must differ from buy_tick"));
            }
            let count = positive_count(&key("count"), a.count)?;
            let agent = ManipulatorAgent::new(a.name.clone(), a.capital, a.leverage, a.leg_notional, buy, sell)
                .and_then(|m| m.with_growth_per_day(a.growth_per_day))
                .map_err(|e| retag(&key("growth_per_day"), e))?
                .with_enabled(a.enabled);
            agents.extend(split_manipulators(count, &agent).map_err(|e| retag(&key("count"), e))?);
        }

        let r = &self.run;
        let days = positive_count("run.days", r.days)?;
        let days = u32::try_from(days).map_err(|_| Error::config("run.days", "too large"))?;
        let initial_mid = positive("run.initial_mid", r.initial_mid)?;
        let initial_fundamental =
            positive("run.initial_fundamental", r.initial_fundamental.unwrap_or(initial_mid))?;

        let mut scenario = Scenario {
            clock,
            profile,
            profile_spec: Some(spec),
            impact,
            target_nudge_bps: i.target_nudge_bps,
            noise,
            agents,
            days,
            seed: r.seed,
            initial_mid,
            initial_fundamental,
        };
        scenario
            .calibrate()
            .map_err(|e| retag("impact.target_nudge_bps", e))?;
        scenario.validate().map_err(|e| retag("run", e))?;
        Ok(scenario)
    }
}

fn retag(key: &str, err: Error) -> Error {
    match err {
        e @ Error::Config { .. } => e,
        e => Error::config(key, e.to_string()),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn positive_count(key: &str, v: i64) -> Result<usize> {
    if v >= 1 {
        Ok(v as usize)
    } else {
        Err(Error::config(key, format!("must be a positive integer, got {v}")))
    }
}

fn resolve_tick(key: &str, spec: &TickSpec, clock: &IntradayClock) -> Result<usize> {
    let tick = match spec {
        TickSpec::Index(i) if *i >= 0 => *i as usize,
        TickSpec::Index(i) => return Err(Error::config(key, format!("negative tick {i}"))),
        TickSpec::Named(s) if s.eq_ignore_ascii_case("open") => clock.open_tick(),
        TickSpec::Named(s) if s.eq_ignore_ascii_case("close") => clock.close_tick(),
        TickSpec::Named(s) => {
            return Err(Error::config(
                key,
                format!("expected a tick index, \"open\" or \"close\", got \"{s}\""),
            ))
        }
    };
    clock.check_tick(tick).map_err(|e| retag(key, e))?;
    Ok(tick)
}
