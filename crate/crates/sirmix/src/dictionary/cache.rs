//! Plain-text dictionary cache.
//!
//! The cache stores the grid spec, season length, integrator step, and
//! per-atom parameters plus the original curve norm — not the curves.
//! Curves are regenerated on load and their norms compared against the
//! stored values, which doubles as a determinism check on the integrator.
//! Any header mismatch against the caller's configuration is a cache
//! error; the caller is expected to rebuild.
//!
//! All numbers are written with Rust's shortest-round-trip float
//! formatting, so a save/load cycle is exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::{feasibility_filter, AxisSpec, Dictionary, DictionaryAtom, DictionarySet, GridSpec};
use crate::error::{Error, Result};
use crate::sir::integrate_sir;

const FORMAT_TAG: &str = "sirmix-dictionary-cache v1";

pub fn save_dictionary(set: &DictionarySet, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_TAG}");
    let _ = writeln!(out, "season_days = {}", set.season_days);
    let _ = writeln!(out, "step_days = {}", set.step_days);
    for (name, axis) in axis_fields(&set.spec) {
        let _ = writeln!(
            out,
            "axis.{name} = {} {} {} {}",
            axis.spacing.as_str(),
            axis.min,
            axis.max,
            axis.points
        );
    }
    let _ = writeln!(out, "dictionaries = {}", set.dictionaries.len());
    for (n_index, dict) in set.dictionaries.iter().enumerate() {
        let _ = writeln!(out, "dictionary {n_index} {} {}", dict.population_size, dict.len());
        for atom in &dict.atoms {
            let p = &atom.params;
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                atom.atom_id,
                p.initial_infected,
                p.r0,
                p.recovery_rate,
                p.phase_days,
                atom.original_norm
            );
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_dictionary(
    path: &Path,
    expected_spec: &GridSpec,
    expected_season_days: usize,
    expected_step_days: f64,
) -> Result<DictionarySet> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let (_, first) = next_line(&mut lines)?;
    if first != FORMAT_TAG {
        return Err(Error::Cache(format!("unsupported cache format '{first}'")));
    }
    let season_days: usize = parse_kv(&mut lines, "season_days")?;
    let step_days: f64 = parse_kv(&mut lines, "step_days")?;
    let spec = GridSpec {
        population_size: parse_axis(&mut lines, "population_size")?,
        initial_infected: parse_axis(&mut lines, "initial_infected")?,
        r0: parse_axis(&mut lines, "r0")?,
        gamma: parse_axis(&mut lines, "gamma")?,
        theta: parse_axis(&mut lines, "theta")?,
    };

    if season_days != expected_season_days {
        return Err(Error::Cache(format!(
            "cache was built for season_days = {season_days}, expected {expected_season_days}"
        )));
    }
    if step_days != expected_step_days {
        return Err(Error::Cache(format!(
            "cache was built for step_days = {step_days}, expected {expected_step_days}"
        )));
    }
    if &spec != expected_spec {
        return Err(Error::Cache("cache grid spec differs from the expected grid".into()));
    }

    let dict_count: usize = parse_kv(&mut lines, "dictionaries")?;
    let n_values = spec.population_size.values();
    if dict_count != n_values.len() {
        return Err(Error::Cache(format!(
            "cache lists {dict_count} dictionaries but the grid has {}",
            n_values.len()
        )));
    }

    let mut dictionaries = Vec::with_capacity(dict_count);
    for expected_index in 0..dict_count {
        let (line_no, header) = next_line(&mut lines)?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("dictionary") {
            return Err(Error::Cache(format!("line {}: expected dictionary header", line_no + 1)));
        }
        let n_index: usize = parse_field(parts.next(), line_no, "dictionary index")?;
        let population_size: f64 = parse_field(parts.next(), line_no, "population size")?;
        let atom_count: usize = parse_field(parts.next(), line_no, "atom count")?;
        if n_index != expected_index {
            return Err(Error::Cache(format!(
                "dictionary sections out of order: got {n_index}, expected {expected_index}"
            )));
        }
        if population_size != n_values[n_index] {
            return Err(Error::Cache(format!(
                "dictionary {n_index} stores N = {population_size}, grid has {}",
                n_values[n_index]
            )));
        }

        let candidates: HashMap<usize, crate::sir::SirParams> =
            spec.candidates_for(population_size).into_iter().collect();
        let mut records = Vec::with_capacity(atom_count);
        for _ in 0..atom_count {
            let (line_no, line) = next_line(&mut lines)?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(Error::Cache(format!(
                    "line {}: expected 6 atom fields, got {}",
                    line_no + 1,
                    fields.len()
                )));
            }
            let atom_id: usize = parse_field(Some(fields[0]), line_no, "atom_id")?;
            let stored = [
                parse_field::<f64>(Some(fields[1]), line_no, "initial_infected")?,
                parse_field::<f64>(Some(fields[2]), line_no, "r0")?,
                parse_field::<f64>(Some(fields[3]), line_no, "gamma")?,
                parse_field::<f64>(Some(fields[4]), line_no, "theta")?,
            ];
            let norm: f64 = parse_field(Some(fields[5]), line_no, "original_norm")?;
            let params = candidates.get(&atom_id).copied().ok_or_else(|| {
                Error::Cache(format!("atom_id {atom_id} is not a candidate of dictionary {n_index}"))
            })?;
            let grid_values = [
                params.initial_infected,
                params.r0,
                params.recovery_rate,
                params.phase_days,
            ];
            if stored != grid_values {
                return Err(Error::Cache(format!(
                    "atom {atom_id}: stored parameters {stored:?} disagree with the grid \
                     {grid_values:?}"
                )));
            }
            records.push((atom_id, params, norm));
        }

        let atoms: Vec<DictionaryAtom> = records
            .par_iter()
            .map(|&(atom_id, params, stored_norm)| -> Result<DictionaryAtom> {
                let raw = integrate_sir(&params, season_days, step_days)?;
                if !feasibility_filter(&raw, season_days) {
                    return Err(Error::Cache(format!(
                        "atom {atom_id} no longer passes the feasibility filter"
                    )));
                }
                let norm = raw.norm();
                if (norm - stored_norm).abs() > 1e-12 * stored_norm {
                    return Err(Error::Cache(format!(
                        "atom {atom_id}: regenerated norm {norm} differs from stored {stored_norm}"
                    )));
                }
                Ok(DictionaryAtom {
                    params,
                    curve: raw.scaled(1.0 / norm),
                    original_norm: norm,
                    atom_id,
                })
            })
            .collect::<Result<_>>()?;
        dictionaries.push(Dictionary { population_size, season_days, step_days, atoms });
    }

    Ok(DictionarySet { spec, season_days, step_days, dictionaries })
}

fn axis_fields(spec: &GridSpec) -> [(&'static str, &AxisSpec); 5] {
    [
        ("population_size", &spec.population_size),
        ("initial_infected", &spec.initial_infected),
        ("r0", &spec.r0),
        ("gamma", &spec.gamma),
        ("theta", &spec.theta),
    ]
}

fn next_line<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<(usize, &'a str)> {
    lines
        .next()
        .map(|(no, line)| (no, line.trim()))
        .ok_or_else(|| Error::Cache("unexpected end of cache file".into()))
}

fn parse_kv<'a, T: std::str::FromStr>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
) -> Result<T> {
    let (line_no, line) = next_line(lines)?;
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| Error::Cache(format!("line {}: expected '{key} = ...'", line_no + 1)))?;
    if k.trim() != key {
        return Err(Error::Cache(format!(
            "line {}: expected key '{key}', found '{}'",
            line_no + 1,
            k.trim()
        )));
    }
    v.trim()
        .parse()
        .map_err(|_| Error::Cache(format!("line {}: cannot parse value for '{key}'", line_no + 1)))
}

fn parse_axis<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    name: &str,
) -> Result<AxisSpec> {
    let value: String = parse_kv(lines, &format!("axis.{name}"))?;
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(Error::Cache(format!("axis.{name}: expected 'spacing min max points'")));
    }
    let spacing = parts[0].parse()?;
    let min = parts[1]
        .parse()
        .map_err(|_| Error::Cache(format!("axis.{name}: bad min '{}'", parts[1])))?;
    let max = parts[2]
        .parse()
        .map_err(|_| Error::Cache(format!("axis.{name}: bad max '{}'", parts[2])))?;
    let points = parts[3]
        .parse()
        .map_err(|_| Error::Cache(format!("axis.{name}: bad point count '{}'", parts[3])))?;
    Ok(AxisSpec { min, max, points, spacing })
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line_no: usize,
    what: &str,
) -> Result<T> {
    field
        .ok_or_else(|| Error::Cache(format!("line {}: missing {what}", line_no + 1)))?
        .parse()
        .map_err(|_| Error::Cache(format!("line {}: cannot parse {what}", line_no + 1)))
}
