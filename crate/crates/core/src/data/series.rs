//! Raw daily series and CSV ingestion.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// One named daily series with strictly increasing dates and finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub name: String,
    rows: Vec<(NaiveDate, f64)>,
}

impl RawSeries {
    pub fn new(name: impl Into<String>, mut rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        rows.sort_by_key(|(d, _)| *d);
        for pair in rows.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateDate(pair[0].0.to_string()));
            }
        }
        if let Some((d, v)) = rows.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "non-finite value {v} at {d}"
            )));
        }
        Ok(RawSeries {
            name: name.into(),
            rows,
        })
    }

    pub fn rows(&self) -> &[(NaiveDate, f64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.rows.first().map(|(d, _)| *d)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.rows.last().map(|(d, _)| *d)
    }
}

/// Load a `date,value`-style CSV: header row, ISO-8601 dates, UTF-8.
/// Column names select the fields; extra columns are ignored.
pub fn load_csv(path: &Path, date_column: &str, value_column: &str) -> Result<RawSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid_argument(format!("missing column '{name}' in {path:?}")))
    };
    let date_idx = find(date_column)?;
    let value_idx = find(value_column)?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows.len() + 2);
        let date_str = record.get(date_idx).ok_or_else(|| Error::Parse {
            line,
            message: "missing date field".into(),
        })?;
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            message: format!("bad date '{date_str}': {e}"),
        })?;
        let value_str = record.get(value_idx).ok_or_else(|| Error::Parse {
            line,
            message: "missing value field".into(),
        })?;
        let value: f64 = value_str.parse().map_err(|e| Error::Parse {
            line,
            message: format!("bad value '{value_str}': {e}"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("non-finite value {value}"),
            });
        }
        rows.push((date, value));
    }
    if rows.is_empty() {
        return Err(Error::invalid_argument(format!("{path:?} holds no data rows")));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    RawSeries::new(name, rows)
}

/// Write a series in the same `date,value` format `load_csv` reads.
pub fn write_csv(path: &Path, series: &RawSeries) -> Result<()> {
    let mut out = String::from("date,value\n");
    for (date, value) in series.rows() {
        out.push_str(&format!("{date},{value}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}
