//! OHLC CSV ingestion.
//!
//! Accepts either external daily bars (`date,open,high,low,close`, with high
//! and low optional and ignored) or the simulator's own daily output, which
//! carries `day` and `prev_close` columns. Column names are matched
//! case-insensitively. Without a `prev_close` column the previous row's
//! close is used and the first row gets no overnight return.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use crate::analysis::{PriceRow, PriceSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelKind {
    Date,
    Day,
}

#[derive(Debug, PartialEq)]
enum Label {
    Date(NaiveDate),
    Day(i64),
}

pub fn read_ohlc_csv(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    ingest_ohlc_csv(file)
}

pub fn ingest_ohlc_csv<R: Read>(input: R) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| data_error(1, format!("unreadable header: {e}")))?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let (label_col, label_kind) = match (find("date"), find("day")) {
        (Some(i), _) => (i, LabelKind::Date),
        (None, Some(i)) => (i, LabelKind::Day),
        (None, None) => return Err(Error::Input("missing required column `date`".into())),
    };
    let open_col = find("open").ok_or_else(|| Error::Input("missing required column `open`".into()))?;
    let close_col =
        find("close").ok_or_else(|| Error::Input("missing required column `close`".into()))?;
    let prev_col = find("prev_close");

    let mut rows: Vec<PriceRow> = Vec::new();
    let mut last_label: Option<Label> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_error(line, format!("malformed row: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |col: usize, name: &str| -> Result<&str> {
            record
                .get(col)
                .filter(|v| !v.is_empty())
                .ok_or_else(|| data_error(line, format!("missing `{name}` value")))
        };

        let raw_label = field(label_col, if label_kind == LabelKind::Date { "date" } else { "day" })?;
        let label = parse_label(raw_label, label_kind).map_err(|m| data_error(line, m))?;
        if let Some(prev) = &last_label {
            if !label_after(prev, &label) {
                return Err(data_error(line, format!("`{raw_label}` is not after the previous row")));
            }
        }

        let open = parse_price(field(open_col, "open")?, "open", line)?;
        let close = parse_price(field(close_col, "close")?, "close", line)?;
        let prev_close = match prev_col {
            Some(col) => Some(parse_price(field(col, "prev_close")?, "prev_close", line)?),
            None => rows.last().map(|r| r.close),
        };

        rows.push(PriceRow {
            label: raw_label.to_string(),
            prev_close,
            open,
            close,
        });
        last_label = Some(label);
    }
    if rows.is_empty() {
        return Err(Error::Input("no data rows".into()));
    }
    PriceSeries::new(rows)
}

fn data_error(line: u64, message: String) -> Error {
    Error::Data { line, message }
}

fn parse_label(raw: &str, kind: LabelKind) -> std::result::Result<Label, String> {
    match kind {
        LabelKind::Date => {
            // Accept a bare date or a datetime whose first ten characters are
            // the date.
            let date_part = raw.get(..10).unwrap_or(raw);
            NaiveDate::parse_from_str(date_part, "%Y-%m-%d")
                .map(Label::Date)
                .map_err(|_| format!("`{raw}` is not an ISO-8601 date"))
        }
        LabelKind::Day => raw
            .parse::<i64>()
            .map(Label::Day)
            .map_err(|_| format!("`{raw}` is not an integer day")),
    }
}

fn label_after(prev: &Label, next: &Label) -> bool {
    match (prev, next) {
        (Label::Date(a), Label::Date(b)) => b > a,
        (Label::Day(a), Label::Day(b)) => b > a,
        _ => false,
    }
}

fn parse_price(raw: &str, column: &str, line: u64) -> Result<f64> {
    let value: f64 = raw
        .parse()
        .map_err(|_| data_error(line, format!("`{raw}` in `{column}` is not a number")))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(data_error(line, format!("`{column}` must be positive, got {raw}")));
    }
    Ok(value)
}
