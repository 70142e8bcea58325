//! Plain-text `section.key = value` run configuration.
//!
//! Unknown keys are rejected so typos fail loudly. A committed example
//! with every key lives at `data/config.example.txt`.

use std::path::Path;

use chrono::NaiveDate;

use crate::dictionary::{AxisSpec, GridSpec};
use crate::error::{Error, Result};
use crate::matcher::{MatchOptions, MatchStrategy};
use crate::pursuit::PursuitOptions;

/// Length of the default season window, October 1 through April 30 of a
/// non-leap year.
pub const DEFAULT_SEASON_DAYS: usize = 212;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid: GridSpec,
    pub step_days: f64,
    pub season_days: usize,
    pub season_start: NaiveDate,
    pub pursuit: PursuitOptions,
    pub matching: MatchOptions,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            step_days: crate::sir::DEFAULT_STEP_DAYS,
            season_days: DEFAULT_SEASON_DAYS,
            season_start: NaiveDate::from_ymd_opt(2012, 10, 1).unwrap(),
            pursuit: PursuitOptions::default(),
            matching: MatchOptions::default(),
        }
    }
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::default();
        for (line_no, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{} line {}: expected 'section.key = value'",
                    path.display(),
                    line_no + 1
                ))
            })?;
            config
                .apply(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("{} line {}: {e}", path.display(), line_no + 1)))?;
        }
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse '{value}' for {key}")))
        }
        match key {
            "integrator.step_days" => self.step_days = parse(key, value)?,
            "season.days" => self.season_days = parse(key, value)?,
            "season.start" => self.season_start = parse(key, value)?,
            "grid.population_size" => self.grid.population_size = parse_axis(key, value)?,
            "grid.initial_infected" => self.grid.initial_infected = parse_axis(key, value)?,
            "grid.r0" => self.grid.r0 = parse_axis(key, value)?,
            "grid.gamma" => self.grid.gamma = parse_axis(key, value)?,
            "grid.theta" => self.grid.theta = parse_axis(key, value)?,
            "pursuit.delta_r2_stop" => self.pursuit.delta_r2_stop = parse(key, value)?,
            "pursuit.max_components" => self.pursuit.max_components = parse(key, value)?,
            "pursuit.allow_negative_gain" => {
                self.pursuit.allow_negative_gain = parse(key, value)?
            }
            "pursuit.allow_reselection" => self.pursuit.allow_reselection = parse(key, value)?,
            "matching.floor" => self.matching.correlation_floor = parse(key, value)?,
            "matching.strategy" => {
                self.matching.strategy = match value {
                    "greedy" => MatchStrategy::Greedy,
                    "optimal" => MatchStrategy::Optimal,
                    other => {
                        return Err(Error::Config(format!(
                            "matching.strategy must be 'greedy' or 'optimal', got '{other}'"
                        )))
                    }
                }
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.season_days == 0 {
            return Err(Error::Config("season.days must be at least 1".into()));
        }
        if !(self.step_days > 0.0 && self.step_days <= 0.5) {
            return Err(Error::Config(format!(
                "integrator.step_days must lie in (0, 0.5], got {}",
                self.step_days
            )));
        }
        if !(self.pursuit.delta_r2_stop >= 0.0) {
            return Err(Error::Config("pursuit.delta_r2_stop must be >= 0".into()));
        }
        if self.pursuit.max_components == 0 {
            return Err(Error::Config("pursuit.max_components must be at least 1".into()));
        }
        Ok(())
    }
}

fn parse_axis(key: &str, value: &str) -> Result<AxisSpec> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "{key}: expected 'spacing min max points', got '{value}'"
        )));
    }
    let spacing = parts[0].parse()?;
    let bad = |what: &str, tok: &str| Error::Config(format!("{key}: bad {what} '{tok}'"));
    AxisSpec::new(
        parts[1].parse().map_err(|_| bad("min", parts[1]))?,
        parts[2].parse().map_err(|_| bad("max", parts[2]))?,
        parts[3].parse().map_err(|_| bad("point count", parts[3]))?,
        spacing,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::Spacing;
    use std::io::Write;

    #[test]
    fn defaults_match_the_documented_values() {
        let config = Config::default();
        assert_eq!(config.season_days, 212);
        assert_eq!(config.step_days, 0.05);
        assert_eq!(config.pursuit.delta_r2_stop, 0.01);
        assert_eq!(config.pursuit.max_components, 20);
        assert_eq!(config.matching.correlation_floor, -1.0);
        // Season window sanity: Oct 1 + 211 days = Apr 30.
        let end = config.season_start + chrono::Duration::days(211);
        assert_eq!(end, NaiveDate::from_ymd_opt(2013, 4, 30).unwrap());
    }

    #[test]
    fn parses_overrides_and_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# comment\nintegrator.step_days = 0.1").unwrap();
        writeln!(f, "season.days = 120").unwrap();
        writeln!(f, "grid.r0 = linear 1.0 4.0 5").unwrap();
        writeln!(f, "pursuit.max_components = 7").unwrap();
        writeln!(f, "matching.strategy = optimal").unwrap();
        drop(f);
        let config = Config::from_path(&path).unwrap();
        assert_eq!(config.step_days, 0.1);
        assert_eq!(config.season_days, 120);
        assert_eq!(config.grid.r0.points, 5);
        assert_eq!(config.grid.r0.spacing, Spacing::Linear);
        assert_eq!(config.pursuit.max_components, 7);
        assert_eq!(config.matching.strategy, MatchStrategy::Optimal);

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "integrator.stepdays = 0.1\n").unwrap();
        let err = Config::from_path(&bad).unwrap_err().to_string();
        assert!(err.contains("unknown key"), "{err}");
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.txt");
        std::fs::write(&path, "integrator.step_days = 0.9\n").unwrap();
        assert!(matches!(Config::from_path(&path), Err(Error::Config(_))));
    }
}
