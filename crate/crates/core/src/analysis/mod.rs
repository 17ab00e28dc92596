//! Overnight/intraday return decomposition and the closed-form doubling and
//! breakeven relations.
//!
//! For a day with previous close `c0`, open `o` and close `c`:
//!
//! ```text
//! overnight = o / c0 - 1
//! intraday  = c / o - 1
//! (1 + overnight) * (1 + intraday) = c / c0
//! ```

mod ingest;

use std::io::Write;

use crate::engine::DayRecord;
use crate::error::{Error, Result};
use crate::market::BP;

pub use ingest::{ingest_ohlc_csv, read_ohlc_csv};

pub const DECOMPOSITION_CSV_HEADER: [&str; 6] = [
    "day",
    "overnight_ret",
    "intraday_ret",
    "cum_overnight",
    "cum_intraday",
    "cum_total",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PriceRow {
    pub label: String,
    /// Absent for the first row of ingested data.
    pub prev_close: Option<f64>,
    pub open: f64,
    pub close: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceSeries {
    rows: Vec<PriceRow>,
}

impl PriceSeries {
    pub fn new(rows: Vec<PriceRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            let prices = [row.prev_close.unwrap_or(1.0), row.open, row.close];
            if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                return Err(Error::Data {
                    line: i as u64,
                    message: format!("row {i} ({}) has a non-positive price", row.label),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn from_records(records: &[DayRecord]) -> Result<Self> {
        Self::new(
            records
                .iter()
                .map(|r| PriceRow {
                    label: r.day.to_string(),
                    prev_close: Some(r.prev_close),
                    open: r.open,
                    close: r.close,
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[PriceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Indices `d` where `close[d] != prev_close[d + 1]`. Simulated series
    /// never have any; ingested data may.
    pub fn continuity_breaks(&self) -> Vec<usize> {
        self.rows
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1].prev_close.is_some_and(|p| p != w[0].close))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub labels: Vec<String>,
    /// `None` where the row has no previous close.
    pub overnight: Vec<Option<f64>>,
    pub intraday: Vec<f64>,
    pub total: Vec<f64>,
    pub log_overnight: Vec<Option<f64>>,
    pub log_intraday: Vec<f64>,
    pub cumulative_overnight: f64,
    pub cumulative_intraday: f64,
    pub cumulative_total: f64,
}

impl DecompositionResult {
    pub fn log_cumulative_overnight(&self) -> f64 {
        self.cumulative_overnight.ln()
    }

    pub fn log_cumulative_intraday(&self) -> f64 {
        self.cumulative_intraday.ln()
    }

    pub fn log_cumulative_total(&self) -> f64 {
        self.cumulative_total.ln()
    }
}

pub fn decompose(series: &PriceSeries) -> Result<DecompositionResult> {
    if series.is_empty() {
        return Err(Error::arg("cannot decompose an empty series"));
    }
    let n = series.len();
    let mut out = DecompositionResult {
        labels: Vec::with_capacity(n),
        overnight: Vec::with_capacity(n),
        intraday: Vec::with_capacity(n),
        total: Vec::with_capacity(n),
        log_overnight: Vec::with_capacity(n),
        log_intraday: Vec::with_capacity(n),
        cumulative_overnight: 1.0,
        cumulative_intraday: 1.0,
        cumulative_total: 1.0,
    };
    for row in series.rows() {
        let intraday = row.close / row.open;
        let (overnight, total) = match row.prev_close {
            Some(prev) => (Some(row.open / prev), row.close / prev),
            None => (None, intraday),
        };
        out.labels.push(row.label.clone());
        out.overnight.push(overnight.map(|g| g - 1.0));
        out.log_overnight.push(overnight.map(f64::ln));
        out.intraday.push(intraday - 1.0);
        out.log_intraday.push(intraday.ln());
        out.total.push(total - 1.0);
        out.cumulative_overnight *= overnight.unwrap_or(1.0);
        out.cumulative_intraday *= intraday;
        out.cumulative_total *= total;
    }
    Ok(out)
}

/// Writes `day,overnight_ret,intraday_ret,cum_overnight,cum_intraday,cum_total`
/// with running cumulative factors. A row without a previous close leaves
/// `overnight_ret` empty.
pub fn write_decomposition_csv<W: Write>(result: &DecompositionResult, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(DECOMPOSITION_CSV_HEADER)?;
    let (mut on, mut intra, mut total) = (1.0, 1.0, 1.0);
    for i in 0..result.labels.len() {
        on *= result.overnight[i].map_or(1.0, |r| 1.0 + r);
        intra *= 1.0 + result.intraday[i];
        total *= 1.0 + result.total[i];
        writer.write_record([
            result.labels[i].clone(),
            result.overnight[i].map_or_else(String::new, |r| format!("{r:.10}")),
            format!("{:.10}", result.intraday[i]),
            format!("{on:.12}"),
            format!("{intra:.12}"),
            format!("{total:.12}"),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Smallest number of days `n` with `(1 + nudge)^n >= 2`.
pub fn doubling_time(nudge_bps: f64) -> Result<u64> {
    if !(nudge_bps.is_finite() && nudge_bps > 0.0) {
        return Err(Error::arg(format!(
            "a nudge of {nudge_bps} bps never doubles the price"
        )));
    }
    let growth = nudge_bps * BP;
    let log_growth = growth.ln_1p();
    let mut n = (std::f64::consts::LN_2 / log_growth).ceil().max(1.0) as u64;
    // ceil() can land one off when ln2 / ln(1+g) is within rounding of an
    // integer; settle it against the defining inequality.
    let doubled = |k: u64| (1.0 + growth).powf(k as f64) >= 2.0;
    while n > 1 && doubled(n - 1) {
        n -= 1;
    }
    while !doubled(n) {
        n += 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakeven {
    /// Book value at which daily mark-to-market gain equals daily cost.
    pub book_value: f64,
    /// False when equal open and close spreads leave no impact asymmetry,
    /// so the nudge cannot arise from the round trip itself.
    pub nudge_attainable: bool,
}

pub fn breakeven_book(
    leg_notional: f64,
    spread_open_bps: f64,
    spread_close_bps: f64,
    net_nudge_bps: f64,
) -> Result<Breakeven> {
    if !(net_nudge_bps.is_finite() && net_nudge_bps > 0.0) {
        return Err(Error::InfeasibleCalibration(format!(
            "no breakeven book for a nudge of {net_nudge_bps} bps"
        )));
    }
    if leg_notional < 0.0 || spread_open_bps < 0.0 || spread_close_bps < 0.0 {
        return Err(Error::arg("notional and spreads must be non-negative"));
    }
    let daily_cost = leg_notional * (spread_open_bps + spread_close_bps) / 20_000.0;
    Ok(Breakeven {
        book_value: daily_cost / (net_nudge_bps * BP),
        nudge_attainable: spread_open_bps != spread_close_bps,
    })
}

/// First zero crossing of a piecewise-linear curve through `points`, which
/// must be sorted by x. Returns the x of an exact zero if one is sampled.
pub fn locate_zero_crossing(points: &[(f64, f64)]) -> Option<f64> {
    if let Some((x, _)) = points.iter().find(|(_, y)| *y == 0.0) {
        return Some(*x);
    }
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (y0.signum() != y1.signum()).then(|| x0 + (x1 - x0) * (-y0) / (y1 - y0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(prev: f64, open: f64, close: f64) -> PriceRow {
        PriceRow {
            label: String::new(),
            prev_close: Some(prev),
            open,
            close,
        }
    }

    #[test]
    fn flat_intraday_day() {
        let s = PriceSeries::new(vec![row(100.0, 102.0, 102.0)]).unwrap();
        let d = decompose(&s).unwrap();
        approx::assert_relative_eq!(d.overnight[0].unwrap(), 0.02, max_relative = 1e-14);
        assert_eq!(d.intraday[0], 0.0);
        approx::assert_relative_eq!(d.total[0], 0.02, max_relative = 1e-14);
    }

    #[test]
    fn constant_series_has_unit_factors() {
        let s = PriceSeries::new(vec![row(50.0, 50.0, 50.0); 20]).unwrap();
        let d = decompose(&s).unwrap();
        assert_eq!(d.cumulative_overnight, 1.0);
        assert_eq!(d.cumulative_intraday, 1.0);
        assert_eq!(d.cumulative_total, 1.0);
    }

    #[test]
    fn two_day_arithmetic() {
        let s = PriceSeries::new(vec![row(100.0, 101.0, 100.5), row(100.5, 101.5, 101.0)]).unwrap();
        let d = decompose(&s).unwrap();
        approx::assert_relative_eq!(d.cumulative_total, 1.01, max_relative = 1e-15);
        approx::assert_relative_eq!(
            d.cumulative_overnight,
            1.01 * (101.5 / 100.5),
            max_relative = 1e-15
        );
        approx::assert_relative_eq!(
            d.cumulative_intraday,
            d.cumulative_total / d.cumulative_overnight,
            max_relative = 1e-12
        );
    }

    #[test]
    fn first_row_without_prev_close() {
        let s = PriceSeries::new(vec![
            PriceRow { label: "a".into(), prev_close: None, open: 10.0, close: 11.0 },
            row(11.0, 12.0, 12.0),
        ])
        .unwrap();
        let d = decompose(&s).unwrap();
        assert_eq!(d.overnight[0], None);
        approx::assert_relative_eq!(d.cumulative_total, 1.2, max_relative = 1e-15);
        approx::assert_relative_eq!(
            d.cumulative_overnight * d.cumulative_intraday,
            d.cumulative_total,
            max_relative = 1e-12
        );
    }

    #[test]
    fn non_positive_price_names_row() {
        let err = PriceSeries::new(vec![row(1.0, 1.0, 1.0), row(1.0, 0.0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Data { line: 1, .. }));
        assert!(decompose(&PriceSeries::default()).is_err());
    }

    #[test]
    fn continuity_breaks_are_flagged() {
        let s = PriceSeries::new(vec![row(1.0, 1.0, 2.0), row(2.0, 2.0, 3.0), row(3.5, 3.0, 3.0)]).unwrap();
        assert_eq!(s.continuity_breaks(), vec![1]);
    }

    /// Brute force: multiply until the price has doubled.
    fn doubling_by_iteration(nudge_bps: f64) -> u64 {
        let g = 1.0 + nudge_bps * 1e-4;
        let mut price = 1.0f64;
        let mut n = 0;
        while price < 2.0 {
            price *= g;
            n += 1;
        }
        n
    }

    #[test]
    fn doubling_time_examples() {
        assert_eq!(doubling_by_iteration(4.0), 1734);
        assert_eq!(doubling_by_iteration(1.0), 6932);
        assert_eq!(doubling_time(10_000.0).unwrap(), 1);
        assert_eq!(doubling_time(4.0).unwrap(), 1734);
        assert_eq!(doubling_time(1.0).unwrap(), 6932);
        assert!(doubling_time(0.0).is_err());
        assert!(doubling_time(-2.0).is_err());
    }

    #[test]
    fn breakeven_examples() {
        let b = breakeven_book(1e7, 15.0, 5.0, 1.0).unwrap();
        approx::assert_relative_eq!(b.book_value, 1e8, max_relative = 1e-12);
        assert!(b.nudge_attainable);
        let b = breakeven_book(1e7, 15.0, 5.0, 4.0).unwrap();
        approx::assert_relative_eq!(b.book_value, 2.5e7, max_relative = 1e-12);
        let b = breakeven_book(1e7, 10.0, 10.0, 1.0).unwrap();
        approx::assert_relative_eq!(b.book_value, 1e8, max_relative = 1e-12);
        assert!(!b.nudge_attainable);
        assert!(matches!(
            breakeven_book(1e7, 15.0, 5.0, 0.0),
            Err(Error::InfeasibleCalibration(_))
        ));
    }

    #[test]
    fn zero_crossing_interpolates() {
        assert_eq!(locate_zero_crossing(&[(0.0, -1.0), (2.0, 1.0)]), Some(1.0));
        assert_eq!(locate_zero_crossing(&[(0.0, -1.0), (5.0, 0.0), (6.0, 1.0)]), Some(5.0));
        assert_eq!(locate_zero_crossing(&[(0.0, 1.0), (1.0, 2.0)]), None);
    }

    #[test]
    fn report_csv_layout() {
        let s = PriceSeries::new(vec![
            PriceRow { label: "2020-01-02".into(), prev_close: None, open: 10.0, close: 11.0 },
            row(11.0, 12.0, 12.0),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_decomposition_csv(&decompose(&s).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "day,overnight_ret,intraday_ret,cum_overnight,cum_intraday,cum_total");
        assert!(lines[1].starts_with("2020-01-02,,0.1000000000,"));
        assert_eq!(lines.len(), 3);
    }

    proptest! {
        #[test]
        fn product_identity_and_shuffle_invariance(
            raw in proptest::collection::vec((50.0f64..150.0, 50.0f64..150.0, 50.0f64..150.0), 1..200),
            seed in any::<u64>(),
        ) {
            let rows: Vec<PriceRow> = raw.iter().map(|(p, o, c)| row(*p, *o, *c)).collect();
            let d = decompose(&PriceSeries::new(rows.clone()).unwrap()).unwrap();
            let lhs = d.cumulative_overnight * d.cumulative_intraday;
            // Each factor is a product of n rounded terms; 1e-12 covers the
            // accumulated relative rounding for n up to a few thousand.
            prop_assert!(((lhs - d.cumulative_total) / d.cumulative_total).abs() <= 1e-12);

            let mut shuffled = rows;
            let mut state = seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (state >> 33) as usize % (i + 1));
            }
            let e = decompose(&PriceSeries::new(shuffled).unwrap()).unwrap();
            prop_assert!(((e.cumulative_overnight - d.cumulative_overnight) / d.cumulative_overnight).abs() <= 1e-12);
            prop_assert!(((e.cumulative_intraday - d.cumulative_intraday) / d.cumulative_intraday).abs() <= 1e-12);
            prop_assert!(((e.cumulative_total - d.cumulative_total) / d.cumulative_total).abs() <= 1e-12);
        }

        #[test]
        fn doubling_time_is_monotone(a in 0.01f64..10_000.0, b in 0.01f64..10_000.0) {
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            prop_assert!(doubling_time(hi).unwrap() <= doubling_time(lo).unwrap());
        }
    }
}
