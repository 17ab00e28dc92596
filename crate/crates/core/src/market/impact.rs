//! Linear, time-of-day dependent price impact.
//!
//! An aggressive order of signed notional `q` at tick `t` moves the price by
//!
//! ```text
//! impact_bps = lambda * full_spread_bps(t) * q / depth(t)
//! ```
//!
//! A `permanent_fraction` of that move stays in the mid; the rest is carried
//! as temporary impact that decays geometrically tick by tick. Wide, thin
//! morning markets therefore absorb a given order with more impact than the
//! tight, deep market near the close, and an equal-sized round trip leaves a
//! net permanent displacement in the direction of the morning leg.

use crate::error::{Error, Result};
use crate::market::profile::SpreadDepthProfile;

/// One basis point as a multiplier.
pub const BP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactParams {
    lambda: f64,
    permanent_fraction: f64,
    temporary_decay_per_tick: f64,
}

impl ImpactParams {
    pub fn new(lambda: f64, permanent_fraction: f64, temporary_decay_per_tick: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::arg(format!("lambda must be non-negative, got {lambda}")));
        }
        if !(0.0..=1.0).contains(&permanent_fraction) {
            return Err(Error::arg(format!(
                "permanent_fraction must lie in [0, 1], got {permanent_fraction}"
            )));
        }
        if !(0.0..1.0).contains(&temporary_decay_per_tick) {
            return Err(Error::arg(format!(
                "temporary_decay_per_tick must lie in [0, 1), got {temporary_decay_per_tick}"
            )));
        }
        Ok(Self {
            lambda,
            permanent_fraction,
            temporary_decay_per_tick,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn permanent_fraction(&self) -> f64 {
        self.permanent_fraction
    }

    /// Fraction of outstanding temporary impact removed at each tick.
    pub fn temporary_decay_per_tick(&self) -> f64 {
        self.temporary_decay_per_tick
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.permanent_fraction, self.temporary_decay_per_tick)
    }
}

impl Default for ImpactParams {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            permanent_fraction: 0.5,
            temporary_decay_per_tick: 0.5,
        }
    }
}

/// Half-spread cost of one aggressive fill of `notional` against mid.
pub fn crossing_cost(notional: f64, full_spread_bps: f64) -> Result<f64> {
    if !(notional.is_finite() && notional >= 0.0) {
        return Err(Error::arg(format!("notional must be non-negative, got {notional}")));
    }
    if !(full_spread_bps.is_finite() && full_spread_bps >= 0.0) {
        return Err(Error::arg(format!(
            "full spread must be non-negative, got {full_spread_bps}"
        )));
    }
    // notional * spread is exact for round figures; dividing once keeps
    // 10M x 15 bps at exactly 7,500.
    Ok(notional * full_spread_bps / 20_000.0)
}

/// Total (permanent + temporary) impact in bps of an aggressive order.
pub fn impact_bps(
    params: &ImpactParams,
    profile: &SpreadDepthProfile,
    signed_notional: f64,
    tick: usize,
) -> Result<f64> {
    let density = profile.impact_density(tick)?;
    Ok(params.lambda * density * signed_notional)
}

/// Solves for the lambda that makes a buy of `leg_notional` at `buy_tick`
/// followed by an equal sell at `sell_tick` leave a net permanent
/// displacement of `target_nudge_bps`.
pub fn calibrate_lambda(
    profile: &SpreadDepthProfile,
    permanent_fraction: f64,
    leg_notional: f64,
    buy_tick: usize,
    sell_tick: usize,
    target_nudge_bps: f64,
) -> Result<f64> {
    if buy_tick == sell_tick {
        return Err(Error::InfeasibleCalibration(
            "buy and sell legs share a tick".into(),
        ));
    }
    if !target_nudge_bps.is_finite() {
        return Err(Error::arg("target nudge must be finite"));
    }
    let asymmetry = profile.impact_density(buy_tick)? - profile.impact_density(sell_tick)?;
    if target_nudge_bps == 0.0 {
        return Ok(0.0);
    }
    let per_unit_lambda = permanent_fraction * leg_notional * asymmetry;
    if per_unit_lambda == 0.0 || !per_unit_lambda.is_finite() {
        return Err(Error::InfeasibleCalibration(format!(
            "schedule (buy tick {buy_tick}, sell tick {sell_tick}) has no impact asymmetry"
        )));
    }
    let lambda = target_nudge_bps / per_unit_lambda;
    if lambda < 0.0 {
        return Err(Error::InfeasibleCalibration(format!(
            "a {target_nudge_bps} bp nudge needs negative lambda on this schedule"
        )));
    }
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::clock::IntradayClock;
    use proptest::prelude::*;

    fn paper_profile() -> (IntradayClock, SpreadDepthProfile) {
        let clock = IntradayClock::default();
        let profile = SpreadDepthProfile::paper_default(&clock);
        (clock, profile)
    }

    #[test]
    fn crossing_cost_legs() {
        assert_eq!(crossing_cost(10_000_000.0, 15.0).unwrap(), 7_500.0);
        assert_eq!(crossing_cost(10_000_000.0, 5.0).unwrap(), 2_500.0);
        assert_eq!(crossing_cost(123_456.0, 0.0).unwrap(), 0.0);
        assert_eq!(
            crossing_cost(10_000_000.0, 15.0).unwrap() + crossing_cost(10_000_000.0, 5.0).unwrap(),
            10_000.0
        );
    }

    #[test]
    fn crossing_cost_rejects_negatives() {
        assert!(matches!(crossing_cost(-1.0, 5.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(crossing_cost(1.0, -5.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_notional_has_zero_impact() {
        let (clock, profile) = paper_profile();
        let params = ImpactParams::new(3.0, 0.5, 0.5).unwrap();
        assert_eq!(impact_bps(&params, &profile, 0.0, clock.open_tick()).unwrap(), 0.0);
    }

    #[test]
    fn calibration_matches_hand_algebra() {
        // Equal depths D, spreads 15 -> 5, pf 0.5, Q = 10M, 1 bp:
        // lambda = 1 / (0.5 * (Q/D) * 10) = 0.2 * D / Q.
        let (clock, profile) = paper_profile();
        let q = 10_000_000.0;
        let d = profile.depth(0).unwrap();
        let lambda = calibrate_lambda(&profile, 0.5, q, 0, clock.close_tick(), 1.0).unwrap();
        approx::assert_relative_eq!(lambda, 0.2 * d / q, max_relative = 1e-15);

        let four = calibrate_lambda(&profile, 0.5, q, 0, clock.close_tick(), 4.0).unwrap();
        approx::assert_relative_eq!(four, 4.0 * lambda, max_relative = 1e-15);
        assert_eq!(calibrate_lambda(&profile, 0.5, q, 0, clock.close_tick(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn calibrated_legs_net_to_target() {
        let (clock, profile) = paper_profile();
        let q = 10_000_000.0;
        let lambda = calibrate_lambda(&profile, 0.5, q, 0, clock.close_tick(), 1.0).unwrap();
        let params = ImpactParams::new(lambda, 0.5, 0.5).unwrap();
        let up = impact_bps(&params, &profile, q, 0).unwrap() * 0.5;
        let down = impact_bps(&params, &profile, -q, clock.close_tick()).unwrap() * 0.5;
        approx::assert_relative_eq!(up + down, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn calibration_rejects_symmetric_schedule() {
        let clock = IntradayClock::default();
        let flat = SpreadDepthProfile::constant(&clock, 10.0, 1e7).unwrap();
        assert!(matches!(
            calibrate_lambda(&flat, 0.5, 1e7, 0, clock.close_tick(), 4.0),
            Err(Error::InfeasibleCalibration(_))
        ));
        assert!(matches!(
            calibrate_lambda(&flat, 0.5, 1e7, 3, 3, 1.0),
            Err(Error::InfeasibleCalibration(_))
        ));
    }

    #[test]
    fn calibration_rejects_wrong_direction() {
        let (clock, profile) = paper_profile();
        // Buying into the tight close and selling into the wide open pushes
        // price down, so a positive target is unreachable.
        assert!(matches!(
            calibrate_lambda(&profile, 0.5, 1e7, clock.close_tick(), 0, 1.0),
            Err(Error::InfeasibleCalibration(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(ImpactParams::new(-1.0, 0.5, 0.5).is_err());
        assert!(ImpactParams::new(1.0, 1.5, 0.5).is_err());
        assert!(ImpactParams::new(1.0, 0.5, 1.0).is_err());
        assert!(ImpactParams::new(0.0, 0.0, 0.0).is_ok());
        assert!(ImpactParams::new(0.0, 1.0, 0.999).is_ok());
    }

    proptest! {
        #[test]
        fn impact_is_antisymmetric_and_linear(
            lambda in 0.0f64..50.0,
            q in 0.0f64..1e9,
            tick in 0usize..392,
        ) {
            let (_, profile) = paper_profile();
            let params = ImpactParams::new(lambda, 0.5, 0.5).unwrap();
            let up = impact_bps(&params, &profile, q, tick).unwrap();
            let down = impact_bps(&params, &profile, -q, tick).unwrap();
            prop_assert_eq!(down, -up);
            let double = impact_bps(&params, &profile, 2.0 * q, tick).unwrap();
            prop_assert_eq!(double, 2.0 * up);
        }

        #[test]
        fn open_impact_exceeds_close_impact(lambda in 1e-6f64..50.0, q in 1.0f64..1e9) {
            let (clock, profile) = paper_profile();
            let params = ImpactParams::new(lambda, 0.5, 0.5).unwrap();
            let open = impact_bps(&params, &profile, q, clock.open_tick()).unwrap();
            let close = impact_bps(&params, &profile, q, clock.close_tick()).unwrap();
            prop_assert!(open > close);
        }
    }
}
