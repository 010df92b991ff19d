//! Price-series ingestion, calendar alignment and the event-window dummy.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DATE_FORMAT: &str = "%Y-%m-%d";

/// One daily close.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub value: f64,
}

/// A named, strictly date-ordered sequence of positive levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    name: String,
    observations: Vec<Observation>,
}

impl PriceSeries {
    /// Builds a series, checking ordering and positivity.
    pub fn new(name: impl Into<String>, observations: Vec<Observation>) -> Result<Self> {
        for (i, obs) in observations.iter().enumerate() {
            if !obs.value.is_finite() || obs.value <= 0.0 {
                return Err(Error::BadRow {
                    row: i + 1,
                    message: format!("value {} is not a positive finite number", obs.value),
                });
            }
        }
        if let Some(i) = observations
            .windows(2)
            .position(|w| w[0].date >= w[1].date)
        {
            return Err(Error::UnorderedDates { index: i + 1 });
        }
        Ok(Self {
            name: name.into(),
            observations,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.observations.iter().map(|o| o.date).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }
}

/// Inclusive calendar window flagged by the dummy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DummyWindow {
    start: NaiveDate,
    end: NaiveDate,
}

impl DummyWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidParameter(format!(
                "dummy window start {start} is after end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

impl Default for DummyWindow {
    /// The 50-day note-exchange window, 2016-11-09 through 2016-12-31.
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2016, 11, 9).unwrap(),
            end: NaiveDate::from_ymd_opt(2016, 12, 31).unwrap(),
        }
    }
}

/// 0/1 indicator aligned to a date sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DummySeries {
    values: Vec<f64>,
}

impl DummySeries {
    /// Wraps raw indicator values; every entry must be exactly 0 or 1.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dummy value at index {i} is {}, expected 0 or 1",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    /// All-zero dummy of the given length.
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of flagged dates.
    pub fn active_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }
}

/// Loads a price CSV from disk. See [`read_price_csv`].
pub fn load_price_csv(
    path: impl AsRef<Path>,
    date_column: &str,
    value_column: &str,
    date_format: &str,
) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    read_price_csv(file, &name, path, date_column, value_column, date_format)
}

/// Parses a headered CSV into a [`PriceSeries`] sorted by date.
///
/// Bad rows abort the load; nothing is skipped. Row numbers in errors count
/// data rows from 1 (the header is row 0).
pub fn read_price_csv<R: Read>(
    reader: R,
    name: &str,
    path: &Path,
    date_column: &str,
    value_column: &str,
    date_format: &str,
) -> Result<PriceSeries> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |column: &str| {
        headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: column.to_string(),
            })
    };
    let date_idx = find(date_column)?;
    let value_idx = find(value_column)?;

    let mut observations = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_err)?;
        let raw_date = record.get(date_idx).unwrap_or("");
        let raw_value = record.get(value_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, date_format).map_err(|e| Error::BadRow {
            row,
            message: format!("date `{raw_date}` does not match `{date_format}`: {e}"),
        })?;
        let value: f64 = raw_value.parse().map_err(|_| Error::BadRow {
            row,
            message: format!("value `{raw_value}` is not numeric"),
        })?;
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::BadRow {
                row,
                message: format!("value {value} is not positive"),
            });
        }
        if !seen.insert(date) {
            return Err(Error::DuplicateDate { row, date });
        }
        observations.push(Observation { date, value });
    }
    observations.sort_by_key(|o| o.date);
    PriceSeries::new(name, observations)
}

/// Restricts both series to their common dates (inner join, no filling).
pub fn align_by_date(a: &PriceSeries, b: &PriceSeries) -> Result<(PriceSeries, PriceSeries)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            available: a.len().min(b.len()),
        });
    }
    let (mut i, mut j) = (0, 0);
    let (oa, ob) = (a.observations(), b.observations());
    let mut keep_a = Vec::new();
    let mut keep_b = Vec::new();
    while i < oa.len() && j < ob.len() {
        match oa[i].date.cmp(&ob[j].date) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                keep_a.push(oa[i]);
                keep_b.push(ob[j]);
                i += 1;
                j += 1;
            }
        }
    }
    if keep_a.is_empty() {
        return Err(Error::EmptyIntersection {
            a: a.name.clone(),
            b: b.name.clone(),
        });
    }
    Ok((
        PriceSeries {
            name: a.name.clone(),
            observations: keep_a,
        },
        PriceSeries {
            name: b.name.clone(),
            observations: keep_b,
        },
    ))
}

/// Flags each date inside `window` with 1, everything else with 0.
pub fn build_dummy(dates: &[NaiveDate], window: &DummyWindow) -> DummySeries {
    DummySeries {
        values: dates
            .iter()
            .map(|&d| if window.contains(d) { 1.0 } else { 0.0 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn parse(text: &str) -> Result<PriceSeries> {
        read_price_csv(
            text.as_bytes(),
            "t",
            Path::new("inline.csv"),
            "Date",
            "Close",
            DEFAULT_DATE_FORMAT,
        )
    }

    fn series(name: &str, dates: &[NaiveDate]) -> PriceSeries {
        PriceSeries::new(
            name,
            dates
                .iter()
                .enumerate()
                .map(|(i, &date)| Observation {
                    date,
                    value: 100.0 + i as f64,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn loads_minimal_csv() {
        let s = parse("Date,Close\n2016-04-01,100\n2016-04-04,101\n2016-04-05,102\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.values(), vec![100.0, 101.0, 102.0]);
        assert!(s.dates().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sorts_out_of_order_rows() {
        let s = parse("Date,Close\n2016-04-05,102\n2016-04-01,100\n").unwrap();
        assert_eq!(s.dates(), vec![d(2016, 4, 1), d(2016, 4, 5)]);
    }

    #[test]
    fn rejects_duplicate_date() {
        let err = parse("Date,Close\n2016-04-01,100\n2016-04-01,101\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateDate { row: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_values_with_row() {
        let err = parse("Date,Close\n2016-04-01,100\n2016-04-04,-1\n").unwrap_err();
        assert!(matches!(err, Error::BadRow { row: 2, .. }));
        let err = parse("Date,Close\n2016-04-01,abc\n").unwrap_err();
        assert!(matches!(err, Error::BadRow { row: 1, .. }));
        let err = parse("Date,Close\n2016-04-01,\"8,421.2\"\n").unwrap_err();
        assert!(matches!(err, Error::BadRow { row: 1, .. }));
        let err = parse("Date,Close\n01/04/2016,100\n").unwrap_err();
        assert!(matches!(err, Error::BadRow { row: 1, .. }));
    }

    #[test]
    fn rejects_missing_column() {
        let err = parse("Day,Close\n2016-04-01,100\n").unwrap_err();
        assert!(matches!(err, Error::MissingColumn { ref column, .. } if column == "Date"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_price_csv("/nonexistent/x.csv", "Date", "Close", DEFAULT_DATE_FORMAT)
            .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn custom_date_format() {
        let s = read_price_csv(
            "when,px\n09/11/2016,5\n".as_bytes(),
            "t",
            Path::new("x"),
            "when",
            "px",
            "%d/%m/%Y",
        )
        .unwrap();
        assert_eq!(s.dates(), vec![d(2016, 11, 9)]);
    }

    #[test]
    fn align_intersection() {
        let a = series("a", &[d(2016, 4, 1), d(2016, 4, 4), d(2016, 4, 5)]);
        let b = series("b", &[d(2016, 4, 4), d(2016, 4, 5), d(2016, 4, 6)]);
        let (a2, b2) = align_by_date(&a, &b).unwrap();
        assert_eq!(a2.dates(), vec![d(2016, 4, 4), d(2016, 4, 5)]);
        assert_eq!(a2.dates(), b2.dates());
        assert_eq!(a2.values(), vec![101.0, 102.0]);
        assert_eq!(b2.values(), vec![100.0, 101.0]);

        let (a3, b3) = align_by_date(&a2, &b2).unwrap();
        assert_eq!(a3, a2);
        assert_eq!(b3, b2);
    }

    #[test]
    fn align_disjoint_is_error() {
        let a = series("a", &[d(2016, 4, 1)]);
        let b = series("b", &[d(2016, 4, 4)]);
        assert!(matches!(
            align_by_date(&a, &b),
            Err(Error::EmptyIntersection { .. })
        ));
    }

    #[test]
    fn dummy_window_membership() {
        let w = DummyWindow::default();
        let dates = [d(2016, 4, 1), d(2016, 11, 8), d(2016, 11, 9), d(2016, 12, 31), d(2017, 1, 2)];
        let dummy = build_dummy(&dates, &w);
        assert_eq!(dummy.values(), &[0.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(dummy.active_count(), 2);

        let late = DummyWindow::new(d(2020, 1, 1), d(2020, 1, 2)).unwrap();
        assert_eq!(build_dummy(&dates, &late).active_count(), 0);
        assert!(DummyWindow::new(d(2020, 1, 2), d(2020, 1, 1)).is_err());
    }

    #[test]
    fn dummy_from_values_checks_domain() {
        assert!(DummySeries::from_values(vec![0.0, 1.0]).is_ok());
        assert!(DummySeries::from_values(vec![0.5]).is_err());
    }
}
