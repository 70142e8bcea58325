//! Plain-text record formats passed between pipeline stages: the
//! decomposition file, assignment records, plot-ready CSV emitters, and
//! the evaluation tables. Floats are written with shortest-round-trip
//! formatting so files reload exactly.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::evaluation::{MatchedComponent, RegressionResult, SeasonMatches, VirusParamSummary};
use crate::pursuit::Decomposition;
use crate::sir::{integrate_sir, SirParams};
use crate::timeseries::TimeSeries;

const DECOMPOSITION_TAG: &str = "sirmix-decomposition v1";

/// One component of a serialized decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRecord {
    pub index: usize,
    pub atom_id: usize,
    pub params: SirParams,
    pub gain: f64,
    /// Peak of the contribution, as a season-day index and a value.
    pub peak_day: usize,
    pub peak_value: f64,
}

/// A decomposition as written to disk. Carries enough context
/// (season length, integrator step, signal start date) to regenerate
/// every contribution curve deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionFile {
    pub population_size: f64,
    pub season_days: usize,
    pub step_days: f64,
    pub start_date: NaiveDate,
    pub final_r2: Option<f64>,
    pub r2_trace: Vec<f64>,
    pub components: Vec<ComponentRecord>,
}

impl DecompositionFile {
    pub fn from_decomposition(decomposition: &Decomposition, step_days: f64) -> Self {
        let components = decomposition
            .components
            .iter()
            .enumerate()
            .map(|(index, c)| {
                let (peak_day, peak_value) = c.contribution.peak();
                ComponentRecord {
                    index,
                    atom_id: c.atom_id,
                    params: c.params,
                    gain: c.gain,
                    peak_day,
                    peak_value,
                }
            })
            .collect();
        Self {
            population_size: decomposition.population_size,
            season_days: decomposition.residual.len(),
            step_days,
            start_date: decomposition.residual.start_date(),
            final_r2: decomposition.final_r2,
            r2_trace: decomposition.r2_trace.clone(),
            components,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "{DECOMPOSITION_TAG}");
        let _ = writeln!(out, "population_size = {}", self.population_size);
        let _ = writeln!(out, "season_days = {}", self.season_days);
        let _ = writeln!(out, "step_days = {}", self.step_days);
        let _ = writeln!(out, "start_date = {}", self.start_date);
        match self.final_r2 {
            Some(r2) => {
                let _ = writeln!(out, "final_r2 = {r2}");
            }
            None => {
                let _ = writeln!(out, "final_r2 = undefined");
            }
        }
        let trace: Vec<String> = self.r2_trace.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "r2_trace = {}", trace.join(" "));
        let _ = writeln!(out, "components = {}", self.components.len());
        let _ = writeln!(
            out,
            "# index atom_id population_size initial_infected r0 gamma theta gain peak_day peak_value"
        );
        for c in &self.components {
            let p = &c.params;
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {} {} {}",
                c.index,
                c.atom_id,
                p.population_size,
                p.initial_infected,
                p.r0,
                p.recovery_rate,
                p.phase_days,
                c.gain,
                c.peak_day,
                c.peak_value
            );
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let context = |message: String| Error::Data(format!("{}: {message}", path.display()));
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| context(format!("unexpected end of file before {what}")))
        };

        if next("format tag")? != DECOMPOSITION_TAG {
            return Err(context("not a decomposition file".into()));
        }
        let mut kv = |key: &str| -> Result<String> {
            let line = next(key)?;
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| context(format!("expected '{key} = ...'")))?;
            if k.trim() != key {
                return Err(context(format!("expected key '{key}', found '{}'", k.trim())));
            }
            Ok(v.trim().to_string())
        };

        let population_size: f64 = kv("population_size")?
            .parse()
            .map_err(|_| context("bad population_size".into()))?;
        let season_days: usize =
            kv("season_days")?.parse().map_err(|_| context("bad season_days".into()))?;
        let step_days: f64 =
            kv("step_days")?.parse().map_err(|_| context("bad step_days".into()))?;
        let start_date: NaiveDate =
            kv("start_date")?.parse().map_err(|_| context("bad start_date".into()))?;
        let final_r2 = match kv("final_r2")?.as_str() {
            "undefined" => None,
            other => {
                Some(other.parse::<f64>().map_err(|_| context("bad final_r2".into()))?)
            }
        };
        let r2_trace: Vec<f64> = kv("r2_trace")?
            .split_whitespace()
            .map(|tok| tok.parse().map_err(|_| context(format!("bad r2_trace entry '{tok}'"))))
            .collect::<Result<_>>()?;
        let count: usize =
            kv("components")?.parse().map_err(|_| context("bad component count".into()))?;

        let mut components = Vec::with_capacity(count);
        for _ in 0..count {
            let line = next("component record")?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 10 {
                return Err(context(format!(
                    "component record needs 10 fields, got {}",
                    fields.len()
                )));
            }
            let num = |i: usize| -> Result<f64> {
                fields[i]
                    .parse()
                    .map_err(|_| context(format!("bad component field '{}'", fields[i])))
            };
            components.push(ComponentRecord {
                index: num(0)? as usize,
                atom_id: num(1)? as usize,
                params: SirParams {
                    population_size: num(2)?,
                    initial_infected: num(3)?,
                    r0: num(4)?,
                    recovery_rate: num(5)?,
                    phase_days: num(6)?,
                },
                gain: num(7)?,
                peak_day: num(8)? as usize,
                peak_value: num(9)?,
            });
        }
        Ok(Self {
            population_size,
            season_days,
            step_days,
            start_date,
            final_r2,
            r2_trace,
            components,
        })
    }

    /// Regenerates the contribution curve of each component (gain times
    /// the unit-normalised integrated curve) on the recorded dates.
    pub fn rebuild_contributions(&self) -> Result<Vec<TimeSeries>> {
        self.components
            .iter()
            .map(|c| {
                let raw = integrate_sir(&c.params, self.season_days, self.step_days)?;
                let norm = raw.norm();
                if norm == 0.0 {
                    return Err(Error::Data(format!(
                        "component {} regenerates to an all-zero curve",
                        c.index
                    )));
                }
                Ok(raw.scaled(c.gain / norm).with_start_date(self.start_date))
            })
            .collect()
    }
}

/// One committed (component, virus) pair with the peak values used by the
/// evaluation stage.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentRecord {
    pub component_index: usize,
    pub virus_name: String,
    pub pearson_r: f64,
    pub component_peak: f64,
    pub reference_peak: f64,
}

pub fn write_assignment_csv(records: &[AssignmentRecord], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer
        .write_record(["component_index", "virus_name", "pearson_r", "component_peak", "reference_peak"])
        .map_err(|e| Error::Data(e.to_string()))?;
    for r in records {
        writer
            .write_record([
                r.component_index.to_string(),
                r.virus_name.clone(),
                r.pearson_r.to_string(),
                r.component_peak.to_string(),
                r.reference_peak.to_string(),
            ])
            .map_err(|e| Error::Data(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_assignment_csv(path: &Path) -> Result<Vec<AssignmentRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut records = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::Data(format!("{} row {row}: {e}", path.display())))?;
        if record.len() != 5 {
            return Err(Error::Data(format!(
                "{} row {row}: expected 5 fields, got {}",
                path.display(),
                record.len()
            )));
        }
        let parse = |i: usize| -> Result<f64> {
            record[i].parse().map_err(|_| {
                Error::Data(format!("{} row {row}: bad number '{}'", path.display(), &record[i]))
            })
        };
        records.push(AssignmentRecord {
            component_index: parse(0)? as usize,
            virus_name: record[1].to_string(),
            pearson_r: parse(2)?,
            component_peak: parse(3)?,
            reference_peak: parse(4)?,
        });
    }
    Ok(records)
}

/// Joins a decomposition file and its assignment records into the
/// season-level structure the evaluation stage consumes.
pub fn season_matches(
    season: &str,
    decomposition: &DecompositionFile,
    assignments: &[AssignmentRecord],
) -> Result<SeasonMatches> {
    let components = assignments
        .iter()
        .map(|record| {
            let component = decomposition
                .components
                .iter()
                .find(|c| c.index == record.component_index)
                .ok_or_else(|| {
                    Error::Data(format!(
                        "assignment references component {} which the decomposition \
                         does not contain",
                        record.component_index
                    ))
                })?;
            Ok(MatchedComponent {
                virus_name: record.virus_name.clone(),
                params: component.params,
                component_peak: record.component_peak,
                reference_peak: record.reference_peak,
                pearson_r: record.pearson_r,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SeasonMatches { season: season.to_string(), components })
}

/// Signal, composite, and per-component columns (in that order), one row
/// per season day. Column count is always `components + 2`.
pub fn write_composite_csv(
    signal: &TimeSeries,
    decomposition: &Decomposition,
    path: &Path,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["signal".to_string(), "composite".to_string()];
    header.extend((1..=decomposition.components.len()).map(|k| format!("component_{k}")));
    writer.write_record(&header).map_err(|e| Error::Data(e.to_string()))?;
    let composite = decomposition.composite();
    for day in 0..signal.len() {
        let mut row = vec![
            signal.values()[day].to_string(),
            composite.values()[day].to_string(),
        ];
        row.extend(
            decomposition.components.iter().map(|c| c.contribution.values()[day].to_string()),
        );
        writer.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Dated per-component contribution curves.
pub fn write_component_curves_csv(decomposition: &Decomposition, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["date".to_string()];
    header.extend((1..=decomposition.components.len()).map(|k| format!("component_{k}")));
    writer.write_record(&header).map_err(|e| Error::Data(e.to_string()))?;
    for day in 0..decomposition.residual.len() {
        let mut row = vec![decomposition.residual.date_at(day).to_string()];
        row.extend(
            decomposition.components.iter().map(|c| c.contribution.values()[day].to_string()),
        );
        writer.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-virus parameter table, one row per virus.
pub fn write_params_table(summaries: &[VirusParamSummary], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer
        .write_record(["virus", "seasons_matched", "mean_r0", "mean_initial_infected"])
        .map_err(|e| Error::Data(e.to_string()))?;
    for s in summaries {
        writer
            .write_record([
                s.virus_name.clone(),
                s.seasons_matched.to_string(),
                s.mean_r0.to_string(),
                s.mean_initial_infected.to_string(),
            ])
            .map_err(|e| Error::Data(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Coefficient table of the peak regression.
pub fn write_peakfit_table(result: &RegressionResult, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer
        .write_record(["attribute", "slope", "std_error", "p_value"])
        .map_err(|e| Error::Data(e.to_string()))?;
    for c in &result.coefficients {
        writer
            .write_record([
                c.name.to_string(),
                c.estimate.to_string(),
                c.std_error.to_string(),
                c.p_value.to_string(),
            ])
            .map_err(|e| Error::Data(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::build_custom_dictionary;
    use crate::pursuit::{decompose, PursuitOptions};
    use crate::sir::DEFAULT_STEP_DAYS;

    fn sample_decomposition() -> Decomposition {
        let params = [
            SirParams::new(1e6, 100.0, 2.5, 0.01, 0.0).unwrap(),
            SirParams::new(1e6, 500.0, 1.6, 5e-3, 30.0).unwrap(),
        ];
        let dict = build_custom_dictionary(&params, 212, DEFAULT_STEP_DAYS).unwrap();
        let signal_values: Vec<f64> = dict.atoms[0]
            .curve
            .values()
            .iter()
            .zip(dict.atoms[1].curve.values())
            .map(|(a, b)| 900.0 * a + 400.0 * b)
            .collect();
        let start = NaiveDate::from_ymd_opt(2012, 10, 1).unwrap();
        let signal = TimeSeries::new(start, signal_values).unwrap();
        decompose(&signal, &dict, &PursuitOptions::default()).unwrap()
    }

    #[test]
    fn decomposition_file_round_trips_and_rebuilds() {
        let decomposition = sample_decomposition();
        assert_eq!(decomposition.components.len(), 2);
        let file = DecompositionFile::from_decomposition(&decomposition, DEFAULT_STEP_DAYS);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("decomposition.txt");
        file.write(&path).unwrap();
        let back = DecompositionFile::read(&path).unwrap();
        assert_eq!(file, back);

        let rebuilt = back.rebuild_contributions().unwrap();
        for (regenerated, component) in rebuilt.iter().zip(&decomposition.components) {
            assert_eq!(regenerated.start_date(), component.contribution.start_date());
            for (a, b) in regenerated.values().iter().zip(component.contribution.values()) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn assignment_csv_round_trips_with_awkward_names() {
        let records = vec![
            AssignmentRecord {
                component_index: 0,
                virus_name: "Influenza A(H1N1)pdm09".into(),
                pearson_r: 0.91,
                component_peak: 1234.5,
                reference_peak: 21.25,
            },
            AssignmentRecord {
                component_index: 3,
                virus_name: "RSV, but weird".into(),
                pearson_r: -0.125,
                component_peak: 0.5,
                reference_peak: 2.0,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("assignment.csv");
        write_assignment_csv(&records, &path).unwrap();
        assert_eq!(read_assignment_csv(&path).unwrap(), records);
    }

    #[test]
    fn composite_csv_has_components_plus_two_columns() {
        let decomposition = sample_decomposition();
        let signal = {
            let composite = decomposition.composite();
            let values: Vec<f64> = composite
                .values()
                .iter()
                .zip(decomposition.residual.values())
                .map(|(c, r)| c + r)
                .collect();
            TimeSeries::new(composite.start_date(), values).unwrap()
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("composite.csv");
        write_composite_csv(&signal, &decomposition, &path).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let headers = reader.headers().unwrap().clone();
        assert_eq!(headers.len(), decomposition.components.len() + 2);
        assert_eq!(reader.records().count(), 212);
    }

    #[test]
    fn season_matches_joins_on_component_index() {
        let decomposition = sample_decomposition();
        let file = DecompositionFile::from_decomposition(&decomposition, DEFAULT_STEP_DAYS);
        let records = vec![AssignmentRecord {
            component_index: 1,
            virus_name: "RSV".into(),
            pearson_r: 0.8,
            component_peak: 11.0,
            reference_peak: 3.0,
        }];
        let season = season_matches("2012-2013", &file, &records).unwrap();
        assert_eq!(season.components.len(), 1);
        assert_eq!(season.components[0].params, file.components[1].params);

        let dangling = vec![AssignmentRecord {
            component_index: 9,
            virus_name: "RSV".into(),
            pearson_r: 0.8,
            component_peak: 11.0,
            reference_peak: 3.0,
        }];
        assert!(season_matches("2012-2013", &file, &dangling).is_err());
    }
}
