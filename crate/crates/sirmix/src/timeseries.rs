use chrono::NaiveDate;

use crate::error::{Error, Result};

/// A uniformly sampled series of real values anchored to a calendar date.
///
/// The sampling interval is one day unless a wrapper says otherwise
/// (weekly surveillance series reuse this type with week-start anchors,
/// see [`crate::matcher::ReferenceSeries`]). Values are always finite and
/// the series is never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start_date: NaiveDate,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series, rejecting empty or non-finite input.
    pub fn new(start_date: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("time series must contain at least one value".into()));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "time series value at index {idx} is not finite ({})",
                values[idx]
            )));
        }
        Ok(Self { start_date, values })
    }

    /// Builds a series indexed by season day rather than a real calendar
    /// season. Dictionary atoms use this; the anchor is [`day_zero`].
    pub fn day_indexed(values: Vec<f64>) -> Result<Self> {
        Self::new(day_zero(), values)
    }

    /// Same values, different calendar anchor.
    pub fn with_start_date(&self, start_date: NaiveDate) -> Self {
        Self { start_date, values: self.values.clone() }
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction
    }

    /// Date of sample `index` under daily cadence.
    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + chrono::Duration::days(index as i64)
    }

    /// Last sample date under daily cadence.
    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.values.len() - 1)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.values, other.values())
    }

    pub fn squared_norm(&self) -> f64 {
        dot(&self.values, &self.values)
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    /// (index, value) of the maximum sample; the earliest index wins ties.
    pub fn peak(&self) -> (usize, f64) {
        let mut best = (0, self.values[0]);
        for (i, &v) in self.values.iter().enumerate().skip(1) {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// Pointwise scaled copy.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            start_date: self.start_date,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Anchor date for series that are indexed by season day only.
pub fn day_zero() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 10, 1).expect("valid fixed date")
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn squared_norm(a: &[f64]) -> f64 {
    dot(a, a)
}
