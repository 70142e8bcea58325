//! Data ingestion and emission: ILI and reference CSVs, the run
//! configuration, synthetic ground-truth generation, and the plain-text
//! record formats consumed by the pipeline stages.

pub mod config;
pub mod records;
mod synth;

pub use synth::{synth_mixture, SynthComponent, SynthOutput, SynthSpec};

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::matcher::{Cadence, ReferenceSeries};
use crate::timeseries::TimeSeries;

/// Longest run of missing days that linear interpolation may bridge.
/// Anything longer makes the season unusable.
pub const MAX_GAP_DAYS: i64 = 7;

/// One season's worth of inputs: the daily ILI signal and the weekly
/// reference series it will be matched against.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonDataset {
    pub season: String,
    pub ili: TimeSeries,
    pub references: Vec<ReferenceSeries>,
}

/// Loads a daily `date,value` CSV.
///
/// Dates must be ISO-8601 and strictly increasing; values must be finite
/// and non-negative. Gaps of up to [`MAX_GAP_DAYS`] missing days are
/// filled by linear interpolation between the observed neighbours; longer
/// gaps are an error that names the gap.
pub fn load_ili_csv(path: &Path) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    check_headers(&mut reader, &["date", "value"], path)?;

    let mut days: Vec<(NaiveDate, f64)> = Vec::new();
    for (row_index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad_row(path, row_index, &e.to_string()))?;
        if record.len() != 2 {
            return Err(bad_row(path, row_index, "expected exactly 2 fields"));
        }
        let date: NaiveDate = record[0]
            .parse()
            .map_err(|_| bad_row(path, row_index, &format!("bad date '{}'", &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| bad_row(path, row_index, &format!("bad value '{}'", &record[1])))?;
        if !value.is_finite() {
            return Err(bad_row(path, row_index, "value is not finite"));
        }
        if value < 0.0 {
            return Err(bad_row(path, row_index, &format!("negative value {value}")));
        }
        if let Some((previous, _)) = days.last() {
            if date <= *previous {
                return Err(bad_row(
                    path,
                    row_index,
                    &format!("date {date} does not increase past {previous}"),
                ));
            }
        }
        days.push((date, value));
    }
    if days.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }

    let mut values = Vec::with_capacity(days.len());
    values.push(days[0].1);
    for pair in days.windows(2) {
        let (d0, v0) = pair[0];
        let (d1, v1) = pair[1];
        let missing = (d1 - d0).num_days() - 1;
        if missing > MAX_GAP_DAYS {
            return Err(Error::Data(format!(
                "{}: {missing}-day gap between {} and {} exceeds the {MAX_GAP_DAYS}-day \
                 interpolation limit (missing {} .. {})",
                path.display(),
                d0,
                d1,
                d0 + chrono::Duration::days(1),
                d1 - chrono::Duration::days(1),
            )));
        }
        for j in 1..=missing {
            values.push(v0 + (v1 - v0) * j as f64 / (missing + 1) as f64);
        }
        values.push(v1);
    }
    TimeSeries::new(days[0].0, values)
}

/// Loads a weekly `week_start,virus,value` CSV into one series per virus.
///
/// Each virus must form a gapless weekly sequence; duplicate
/// (week, virus) rows are rejected. Output is sorted by virus name.
pub fn load_reference_csv(path: &Path) -> Result<Vec<ReferenceSeries>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    check_headers(&mut reader, &["week_start", "virus", "value"], path)?;

    let mut by_virus: std::collections::BTreeMap<String, Vec<(NaiveDate, f64)>> =
        std::collections::BTreeMap::new();
    for (row_index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad_row(path, row_index, &e.to_string()))?;
        if record.len() != 3 {
            return Err(bad_row(path, row_index, "expected exactly 3 fields"));
        }
        let week: NaiveDate = record[0]
            .parse()
            .map_err(|_| bad_row(path, row_index, &format!("bad week_start '{}'", &record[0])))?;
        let virus = record[1].to_string();
        if virus.is_empty() {
            return Err(bad_row(path, row_index, "empty virus name"));
        }
        let value: f64 = record[2]
            .parse()
            .map_err(|_| bad_row(path, row_index, &format!("bad value '{}'", &record[2])))?;
        if !value.is_finite() || value < 0.0 {
            return Err(bad_row(path, row_index, &format!("value {value} must be >= 0")));
        }
        let rows = by_virus.entry(virus.clone()).or_default();
        if rows.iter().any(|(w, _)| *w == week) {
            return Err(Error::Data(format!(
                "{}: duplicate entry for virus '{virus}' in week {week}",
                path.display()
            )));
        }
        rows.push((week, value));
    }
    if by_virus.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }

    let mut references = Vec::with_capacity(by_virus.len());
    for (virus, mut rows) in by_virus {
        rows.sort_by_key(|(week, _)| *week);
        for pair in rows.windows(2) {
            let spacing = (pair[1].0 - pair[0].0).num_days();
            if spacing != 7 {
                return Err(Error::Data(format!(
                    "{}: virus '{virus}' has weeks {} and {} spaced {spacing} days apart; \
                     expected exactly 7",
                    path.display(),
                    pair[0].0,
                    pair[1].0
                )));
            }
        }
        let start = rows[0].0;
        let values = rows.into_iter().map(|(_, v)| v).collect();
        references.push(ReferenceSeries {
            virus_name: virus,
            cadence: Cadence::Weekly,
            series: TimeSeries::new(start, values)?,
        });
    }
    Ok(references)
}

/// Writes a daily series back out as a `date,value` CSV with full float
/// precision (round-trippable text).
pub fn write_ili_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["date", "value"]).map_err(csv_io)?;
    for (index, value) in series.values().iter().enumerate() {
        writer
            .write_record([series.date_at(index).to_string(), value.to_string()])
            .map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

fn check_headers(
    reader: &mut csv::Reader<std::fs::File>,
    expected: &[&str],
    path: &Path,
) -> Result<()> {
    let headers = reader.headers().map_err(|e| Error::Data(e.to_string()))?;
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(Error::Data(format!(
            "{}: expected header '{}', found '{}'",
            path.display(),
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn bad_row(path: &Path, row_index: usize, message: &str) -> Error {
    // +2: one for the header, one for 1-based numbering.
    Error::Data(format!("{} line {}: {message}", path.display(), row_index + 2))
}

fn csv_io(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}
