//! Calendar alignment of the three input series.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::series::RawSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    Brent,
    Usdx,
    Sent,
}

impl Column {
    pub const ALL: [Column; 3] = [Column::Brent, Column::Usdx, Column::Sent];

    pub fn name(&self) -> &'static str {
        match self {
            Column::Brent => "BRENT",
            Column::Usdx => "USDX",
            Column::Sent => "SENT",
        }
    }
}

/// Complete daily table on the target series' calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedFrame {
    pub dates: Vec<NaiveDate>,
    pub brent: Vec<f64>,
    pub usdx: Vec<f64>,
    pub sent: Vec<f64>,
}

impl AlignedFrame {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn column(&self, c: Column) -> &[f64] {
        match c {
            Column::Brent => &self.brent,
            Column::Usdx => &self.usdx,
            Column::Sent => &self.sent,
        }
    }
}

/// Walk a sorted series and yield, per queried date, the most recent value
/// at or before that date.
struct ForwardFill<'a> {
    rows: &'a [(NaiveDate, f64)],
    next: usize,
    last: Option<f64>,
}

impl<'a> ForwardFill<'a> {
    fn new(series: &'a RawSeries) -> Self {
        ForwardFill {
            rows: series.rows(),
            next: 0,
            last: None,
        }
    }

    fn value_at(&mut self, date: NaiveDate) -> Option<f64> {
        while self.next < self.rows.len() && self.rows[self.next].0 <= date {
            self.last = Some(self.rows[self.next].1);
            self.next += 1;
        }
        self.last
    }
}

/// Keep exactly the target series' dates. Exogenous columns are
/// forward-filled from their most recent prior value; leading target dates
/// with no prior exogenous value are dropped.
pub fn align(brent: &RawSeries, usdx: &RawSeries, sent: &RawSeries) -> Result<AlignedFrame> {
    if brent.is_empty() || usdx.is_empty() || sent.is_empty() {
        return Err(Error::invalid_argument("align requires non-empty series"));
    }
    let mut usdx_fill = ForwardFill::new(usdx);
    let mut sent_fill = ForwardFill::new(sent);

    let mut frame = AlignedFrame {
        dates: Vec::new(),
        brent: Vec::new(),
        usdx: Vec::new(),
        sent: Vec::new(),
    };
    for &(date, value) in brent.rows() {
        let (Some(u), Some(s)) = (usdx_fill.value_at(date), sent_fill.value_at(date)) else {
            // leading gap: no prior exogenous observation yet
            continue;
        };
        frame.dates.push(date);
        frame.brent.push(value);
        frame.usdx.push(u);
        frame.sent.push(s);
    }
    if frame.is_empty() {
        return Err(Error::invalid_argument(
            "no target dates remain after leading-gap removal",
        ));
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, d).unwrap()
    }

    fn series(name: &str, points: &[(u32, f64)]) -> RawSeries {
        RawSeries::new(name, points.iter().map(|&(d, v)| (day(d), v)).collect()).unwrap()
    }

    #[test]
    fn identical_dates_align_one_to_one() {
        let b = series("b", &[(1, 10.0), (2, 11.0), (3, 12.0)]);
        let u = series("u", &[(1, 90.0), (2, 91.0), (3, 92.0)]);
        let s = series("s", &[(1, 0.1), (2, 0.2), (3, 0.3)]);
        let frame = align(&b, &u, &s).unwrap();
        assert_eq!(frame.len(), 3);
        assert_eq!(frame.usdx, vec![90.0, 91.0, 92.0]);
    }

    #[test]
    fn missing_mid_series_date_is_forward_filled() {
        let b = series("b", &[(1, 10.0), (2, 11.0), (3, 12.0)]);
        let u = series("u", &[(1, 90.0), (3, 92.0)]);
        let s = series("s", &[(1, 0.1), (2, 0.2), (3, 0.3)]);
        let frame = align(&b, &u, &s).unwrap();
        assert_eq!(frame.usdx, vec![90.0, 90.0, 92.0]);
    }

    #[test]
    fn leading_gap_drops_target_dates() {
        let b = series("b", &[(1, 10.0), (2, 11.0), (3, 12.0), (4, 13.0)]);
        let u = series("u", &[(1, 90.0), (2, 91.0), (3, 92.0), (4, 93.0)]);
        let s = series("s", &[(4, 0.4)]);
        let frame = align(&b, &u, &s).unwrap();
        assert_eq!(frame.len(), 1);
        assert_eq!(frame.dates[0], day(4));
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let b = series("b", &[(1, 10.0)]);
        let u = series("u", &[(5, 90.0)]);
        let s = series("s", &[(1, 0.1)]);
        assert!(align(&b, &u, &s).is_err());
    }

    #[test]
    fn exogenous_values_never_come_from_the_future() {
        let b = series("b", &[(2, 10.0), (4, 11.0)]);
        let u = series("u", &[(1, 90.0), (3, 91.0), (5, 99.0)]);
        let s = series("s", &[(1, 0.1), (5, 0.9)]);
        let frame = align(&b, &u, &s).unwrap();
        assert_eq!(frame.usdx, vec![90.0, 91.0]);
        assert_eq!(frame.sent, vec![0.1, 0.1]);
    }
}
