use std::f64::consts::LN_2;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::market::impact::{crossing_cost, impact_bps, ImpactParams, BP};
use crate::market::profile::SpreadDepthProfile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    sigma_daily: f64,
    mean_reversion_half_life_days: Option<f64>,
}

impl NoiseParams {
    pub fn new(sigma_daily: f64, mean_reversion_half_life_days: Option<f64>) -> Result<Self> {
        if !(sigma_daily.is_finite() && sigma_daily >= 0.0) {
            return Err(Error::arg(format!("sigma_daily must be non-negative, got {sigma_daily}")));
        }
        if let Some(h) = mean_reversion_half_life_days {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::arg(format!("mean reversion half-life must be positive, got {h}")));
            }
        }
        Ok(Self {
            sigma_daily,
            mean_reversion_half_life_days,
        })
    }

    /// No diffusion and no pull toward fundamental.
    pub fn quiet() -> Self {
        Self {
            sigma_daily: 0.0,
            mean_reversion_half_life_days: None,
        }
    }

    pub fn sigma_daily(&self) -> f64 {
        self.sigma_daily
    }

    pub fn mean_reversion_half_life_days(&self) -> Option<f64> {
        self.mean_reversion_half_life_days
    }

    pub fn is_quiet(&self) -> bool {
        self.sigma_daily == 0.0 && self.mean_reversion_half_life_days.is_none()
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            sigma_daily: 0.01,
            mean_reversion_half_life_days: Some(504.0),
        }
    }
}

/// Result of one aggressive order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fill {
    pub fill_price: f64,
    pub cost: f64,
    /// Total impact in bps, before the permanent/temporary split.
    pub impact_bps: f64,
}

/// Price state of the single simulated security.
///
/// The mid is held as a session reference price (the previous close) plus a
/// displacement in bps accumulated since the session began, so that permanent
/// impacts add exactly within a day and the close-to-close move of a
/// noiseless day is the plain sum of the permanent impacts.
#[derive(Debug, Clone)]
pub struct MarketState {
    session_reference: f64,
    displacement_bps: f64,
    fundamental: f64,
    temp_impact_bps: f64,
    rng: ChaCha12Rng,
}

impl MarketState {
    pub fn new(mid: f64, fundamental: f64, seed: u64) -> Result<Self> {
        check_price("mid", mid)?;
        check_price("fundamental", fundamental)?;
        Ok(Self {
            session_reference: mid,
            displacement_bps: 0.0,
            fundamental,
            temp_impact_bps: 0.0,
            rng: ChaCha12Rng::seed_from_u64(seed),
        })
    }

    pub fn mid(&self) -> f64 {
        if self.displacement_bps == 0.0 {
            self.session_reference
        } else {
            self.session_reference * (1.0 + self.displacement_bps * BP)
        }
    }

    pub fn fundamental(&self) -> f64 {
        self.fundamental
    }

    pub fn temp_impact_bps(&self) -> f64 {
        self.temp_impact_bps
    }

    /// Mid including the outstanding temporary impact.
    pub fn quoted_mid(&self) -> f64 {
        self.mid() * (1.0 + self.temp_impact_bps * BP)
    }

    pub fn session_reference(&self) -> f64 {
        self.session_reference
    }

    /// Move of the mid since the session began, in bps of the reference.
    pub fn session_displacement_bps(&self) -> f64 {
        self.displacement_bps
    }

    /// Starts a new session at the current mid and switches the generator to
    /// the `(seed, day)` substream.
    pub fn begin_session(&mut self, seed: u64, day: u64) {
        self.session_reference = self.mid();
        self.displacement_bps = 0.0;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(day);
        self.rng = rng;
    }

    pub fn decay_temporary(&mut self, params: &ImpactParams) {
        self.temp_impact_bps *= 1.0 - params.temporary_decay_per_tick();
    }

    /// One diffusion step of `dt_days` trading days.
    ///
    /// The gap `mid / fundamental - 1` shrinks by `exp(-ln2 * dt / half_life)`,
    /// then the mid takes a driftless log-normal shock with standard deviation
    /// `sigma_daily * sqrt(dt)`.
    pub fn advance_noise(&mut self, noise: &NoiseParams, dt_days: f64) -> Result<()> {
        if !(dt_days.is_finite() && dt_days > 0.0) {
            return Err(Error::arg(format!("dt_days must be positive, got {dt_days}")));
        }
        let mid = self.mid();
        let mut next = mid;
        if let Some(half_life) = noise.mean_reversion_half_life_days {
            let gap = mid / self.fundamental - 1.0;
            if gap != 0.0 {
                let keep = (-LN_2 * dt_days / half_life).exp();
                next = self.fundamental * (1.0 + gap * keep);
            }
        }
        if noise.sigma_daily > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            next *= (noise.sigma_daily * dt_days.sqrt() * z).exp();
        }
        if next != mid {
            if !(next.is_finite() && next > 0.0) {
                return Err(Error::NumericDomain(format!("noise step produced mid {next}")));
            }
            self.displacement_bps = (next / self.session_reference - 1.0) / BP;
        }
        Ok(())
    }

    /// Executes an aggressive order against the quoted spread.
    ///
    /// The fill is at `mid * (1 ± half_spread)`. The permanent share of the
    /// impact moves the mid; the remainder is added to the temporary impact.
    /// On error the state is left untouched.
    pub fn apply_aggressive_trade(
        &mut self,
        profile: &SpreadDepthProfile,
        params: &ImpactParams,
        signed_notional: f64,
        tick: usize,
    ) -> Result<Fill> {
        if !signed_notional.is_finite() {
            return Err(Error::arg(format!("notional must be finite, got {signed_notional}")));
        }
        let full_spread = profile.full_spread_bps(tick)?;
        let mid = self.mid();
        if signed_notional == 0.0 {
            return Ok(Fill {
                fill_price: mid,
                cost: 0.0,
                impact_bps: 0.0,
            });
        }
        let side = signed_notional.signum();
        let fill_price = mid * (1.0 + side * full_spread / 2.0 * BP);
        if fill_price.is_nan() || fill_price <= 0.0 {
            return Err(Error::NumericDomain(format!(
                "fill price {fill_price} at tick {tick} is not positive"
            )));
        }
        let cost = crossing_cost(signed_notional.abs(), full_spread)?;
        let impact = impact_bps(params, profile, signed_notional, tick)?;
        let permanent = impact * params.permanent_fraction();
        let temporary = impact - permanent;

        let displacement = self.displacement_bps + permanent;
        let new_mid = self.session_reference * (1.0 + displacement * BP);
        if !(new_mid.is_finite() && new_mid > 0.0) {
            return Err(Error::NumericDomain(format!(
                "impact of {impact} bps at tick {tick} drives mid to {new_mid}"
            )));
        }
        self.displacement_bps = displacement;
        self.temp_impact_bps += temporary;
        Ok(Fill {
            fill_price,
            cost,
            impact_bps: impact,
        })
    }
}

fn check_price(name: &str, price: f64) -> Result<()> {
    if price.is_finite() && price > 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be positive, got {price}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::calibrate_lambda;
    use crate::market::clock::IntradayClock;

    fn setup() -> (IntradayClock, SpreadDepthProfile, ImpactParams) {
        let clock = IntradayClock::default();
        let profile = SpreadDepthProfile::paper_default(&clock);
        let lambda = calibrate_lambda(&profile, 0.5, 1e7, 0, clock.close_tick(), 1.0).unwrap();
        (clock, profile, ImpactParams::new(lambda, 0.5, 0.5).unwrap())
    }

    #[test]
    fn zero_notional_leaves_state_alone() {
        let (_, profile, params) = setup();
        let mut state = MarketState::new(100.0, 100.0, 7).unwrap();
        let fill = state.apply_aggressive_trade(&profile, &params, 0.0, 0).unwrap();
        assert_eq!(fill.fill_price, 100.0);
        assert_eq!(fill.cost, 0.0);
        assert_eq!(state.mid(), 100.0);
        assert_eq!(state.temp_impact_bps(), 0.0);
    }

    #[test]
    fn buy_fills_above_mid_and_pays_half_spread() {
        let (_, profile, params) = setup();
        let mut state = MarketState::new(100.0, 100.0, 7).unwrap();
        let fill = state.apply_aggressive_trade(&profile, &params, 1e7, 0).unwrap();
        approx::assert_relative_eq!(fill.fill_price, 100.075, max_relative = 1e-14);
        assert_eq!(fill.cost, 7_500.0);
        approx::assert_relative_eq!(fill.impact_bps, 3.0, max_relative = 1e-14);
        approx::assert_relative_eq!(state.session_displacement_bps(), 1.5, max_relative = 1e-14);
        approx::assert_relative_eq!(state.temp_impact_bps(), 1.5, max_relative = 1e-14);
    }

    #[test]
    fn same_tick_round_trip_cancels_permanent_component() {
        let (_, profile, params) = setup();
        let mut state = MarketState::new(100.0, 100.0, 7).unwrap();
        state.apply_aggressive_trade(&profile, &params, 2.5e7, 100).unwrap();
        state.apply_aggressive_trade(&profile, &params, -2.5e7, 100).unwrap();
        assert_eq!(state.session_displacement_bps(), 0.0);
        assert_eq!(state.mid(), 100.0);
    }

    #[test]
    fn paper_round_trip_nudges_one_bp() {
        let (clock, profile, params) = setup();
        let mut state = MarketState::new(100.0, 100.0, 7).unwrap();
        state.apply_aggressive_trade(&profile, &params, 1e7, 0).unwrap();
        state.apply_aggressive_trade(&profile, &params, -1e7, clock.close_tick()).unwrap();
        approx::assert_relative_eq!(state.session_displacement_bps(), 1.0, max_relative = 1e-12);
        approx::assert_relative_eq!(state.mid(), 100.01, max_relative = 1e-14);
    }

    #[test]
    fn pathological_impact_is_rejected_without_mutation() {
        let clock = IntradayClock::default();
        let profile = SpreadDepthProfile::paper_default(&clock);
        let params = ImpactParams::new(1e6, 1.0, 0.5).unwrap();
        let mut state = MarketState::new(100.0, 100.0, 7).unwrap();
        let err = state.apply_aggressive_trade(&profile, &params, -1e9, 0).unwrap_err();
        assert!(matches!(err, Error::NumericDomain(_)));
        assert_eq!(state.mid(), 100.0);
    }

    #[test]
    fn temporary_impact_decays_geometrically() {
        let (_, profile, params) = setup();
        let mut state = MarketState::new(100.0, 100.0, 7).unwrap();
        state.apply_aggressive_trade(&profile, &params, 1e7, 0).unwrap();
        let start = state.temp_impact_bps();
        state.decay_temporary(&params);
        state.decay_temporary(&params);
        approx::assert_relative_eq!(state.temp_impact_bps(), start * 0.25, max_relative = 1e-15);
        assert!(state.quoted_mid() > state.mid());
    }

    #[test]
    fn quiet_noise_is_identity() {
        let mut state = MarketState::new(123.456, 80.0, 1).unwrap();
        for _ in 0..10_000 {
            state.advance_noise(&NoiseParams::quiet(), 1.0 / 392.0).unwrap();
        }
        assert_eq!(state.mid(), 123.456);
    }

    #[test]
    fn fundamental_is_a_fixed_point() {
        let noise = NoiseParams::new(0.0, Some(504.0)).unwrap();
        let mut state = MarketState::new(50.0, 50.0, 1).unwrap();
        for _ in 0..1_000 {
            state.advance_noise(&noise, 1.0).unwrap();
        }
        assert_eq!(state.mid(), 50.0);
    }

    #[test]
    fn half_life_halves_the_gap() {
        // Closed form: gap(t) = gap(0) * 2^(-t / h); from mid = 2F the ratio
        // after one half-life is 1 + 1/2.
        let noise = NoiseParams::new(0.0, Some(504.0)).unwrap();
        let mut state = MarketState::new(200.0, 100.0, 1).unwrap();
        for _ in 0..504 {
            state.advance_noise(&noise, 1.0).unwrap();
        }
        let ratio = state.mid() / state.fundamental();
        assert!((1.49..=1.51).contains(&ratio), "ratio {ratio}");
        approx::assert_relative_eq!(ratio, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn noise_is_deterministic_per_stream() {
        let noise = NoiseParams::new(0.01, None).unwrap();
        let run = |seed: u64, day: u64| {
            let mut state = MarketState::new(100.0, 100.0, 0).unwrap();
            state.begin_session(seed, day);
            for _ in 0..392 {
                state.advance_noise(&noise, 1.0 / 392.0).unwrap();
            }
            state.mid()
        };
        assert_eq!(run(3, 9).to_bits(), run(3, 9).to_bits());
        assert_ne!(run(3, 9), run(3, 10));
        assert_ne!(run(3, 9), run(4, 9));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(MarketState::new(0.0, 1.0, 0).is_err());
        assert!(MarketState::new(1.0, -1.0, 0).is_err());
        assert!(NoiseParams::new(-0.1, None).is_err());
        assert!(NoiseParams::new(0.1, Some(0.0)).is_err());
        let mut state = MarketState::new(1.0, 1.0, 0).unwrap();
        assert!(state.advance_noise(&NoiseParams::default(), 0.0).is_err());
    }
}
