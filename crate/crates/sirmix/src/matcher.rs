//! Assigning decomposition components to reference surveillance series.
//!
//! Components are daily, references are usually weekly, so a component is
//! first aggregated to weekly means over the reference's week boundaries.
//! Assignment is "without replacement": a global greedy that repeatedly
//! commits the highest remaining Pearson correlation among still
//! unassigned components and viruses. An exhaustive maximum-sum
//! assignment is available behind [`MatchStrategy::Optimal`] for
//! sensitivity runs; it is not the default.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cadence {
    Daily,
    Weekly,
}

/// One tracked virus: its label and surveillance series. Weekly series
/// anchor each value at a week-start date.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSeries {
    pub virus_name: String,
    pub cadence: Cadence,
    pub series: TimeSeries,
}

impl ReferenceSeries {
    /// Date of sample `index` under this reference's cadence.
    pub fn date_at(&self, index: usize) -> NaiveDate {
        let days = match self.cadence {
            Cadence::Daily => index as i64,
            Cadence::Weekly => 7 * index as i64,
        };
        self.series.start_date() + chrono::Duration::days(days)
    }
}

/// One committed (component, virus) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchPair {
    pub component_index: usize,
    pub virus_name: String,
    pub pearson_r: f64,
}

/// Injective component-to-virus assignment. Pairs are sorted by
/// descending correlation; whichever side is larger leaves leftovers.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchAssignment {
    pub pairs: Vec<MatchPair>,
    pub unmatched_components: Vec<usize>,
    pub unmatched_viruses: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchStrategy {
    /// Best remaining pair first. The default, and the pinned behaviour.
    Greedy,
    /// Exhaustive maximum-sum assignment; sensitivity analysis only.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOptions {
    /// Pairs below this correlation are never committed. The default of
    /// -1 disables the floor.
    pub correlation_floor: f64,
    pub strategy: MatchStrategy,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self { correlation_floor: -1.0, strategy: MatchStrategy::Greedy }
    }
}

/// Sample Pearson correlation of two equal-length series.
pub fn pearson(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    pearson_slices(a.values(), b.values())
}

pub(crate) fn pearson_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "pearson needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::Data(format!("pearson needs at least 3 samples, got {}", a.len())));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::UndefinedStatistic(
            "pearson is undefined for a constant series".into(),
        ));
    }
    Ok((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0))
}

/// Aggregates a daily component onto a weekly reference's week grid.
///
/// Every reference week whose seven days are fully covered by the
/// component contributes one (component weekly mean, reference value)
/// pair; partially covered weeks are dropped from both sides. Returns an
/// error only when no week overlaps at all — correlation itself imposes
/// its own minimum length.
pub fn weekly_align(
    component_daily: &TimeSeries,
    reference_weekly: &ReferenceSeries,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if reference_weekly.cadence != Cadence::Weekly {
        return Err(Error::Data(format!(
            "reference '{}' is not weekly",
            reference_weekly.virus_name
        )));
    }
    let mut component_means = Vec::new();
    let mut reference_values = Vec::new();
    for (k, &value) in reference_weekly.series.values().iter().enumerate() {
        let week_start = reference_weekly.date_at(k);
        let offset = (week_start - component_daily.start_date()).num_days();
        if offset < 0 || offset + 6 >= component_daily.len() as i64 {
            continue;
        }
        let start = offset as usize;
        let mean: f64 =
            component_daily.values()[start..start + 7].iter().sum::<f64>() / 7.0;
        component_means.push(mean);
        reference_values.push(value);
    }
    if component_means.is_empty() {
        return Err(Error::Data(format!(
            "component ({} .. {}) and reference '{}' share no complete week",
            component_daily.start_date(),
            component_daily.end_date(),
            reference_weekly.virus_name
        )));
    }
    Ok((component_means, reference_values))
}

fn aligned_correlation(component: &TimeSeries, reference: &ReferenceSeries) -> Option<f64> {
    let (a, b) = match reference.cadence {
        Cadence::Weekly => weekly_align(component, reference).ok()?,
        Cadence::Daily => {
            let offset = (reference.series.start_date() - component.start_date()).num_days();
            let len = reference
                .series
                .len()
                .min(component.len().saturating_sub(offset.max(0) as usize));
            if offset < 0 || len == 0 {
                return None;
            }
            let start = offset as usize;
            (
                component.values()[start..start + len].to_vec(),
                reference.series.values()[..len].to_vec(),
            )
        }
    };
    pearson_slices(&a, &b).ok()
}

/// Injective assignment of components to viruses by Pearson correlation.
///
/// The full correlation table is computed up front (in parallel); pairs
/// whose correlation is undefined — constant series, not enough shared
/// weeks — simply never match. Greedy commits the globally best remaining
/// pair; ties break on the lower component index, then the
/// lexicographically smaller virus name.
pub fn match_components(
    components: &[TimeSeries],
    references: &[ReferenceSeries],
    options: &MatchOptions,
) -> Result<MatchAssignment> {
    if components.is_empty() {
        return Err(Error::Data("no components to match".into()));
    }
    if references.is_empty() {
        return Err(Error::Data("no reference series to match against".into()));
    }
    let table: Vec<Vec<Option<f64>>> = components
        .par_iter()
        .map(|c| references.iter().map(|r| aligned_correlation(c, r)).collect())
        .collect();
    if table.iter().flatten().all(Option::is_none) {
        return Err(Error::Matching(
            "every component/reference correlation is undefined".into(),
        ));
    }

    let pairs = match options.strategy {
        MatchStrategy::Greedy => greedy_pairs(&table, references, options.correlation_floor),
        MatchStrategy::Optimal => optimal_pairs(&table, references, options.correlation_floor)?,
    };

    let mut component_taken = vec![false; components.len()];
    let mut reference_taken = vec![false; references.len()];
    for pair in &pairs {
        component_taken[pair.component_index] = true;
        let idx = references
            .iter()
            .position(|r| r.virus_name == pair.virus_name)
            .expect("pair names come from the reference list");
        reference_taken[idx] = true;
    }
    Ok(MatchAssignment {
        pairs,
        unmatched_components: (0..components.len()).filter(|&i| !component_taken[i]).collect(),
        unmatched_viruses: references
            .iter()
            .enumerate()
            .filter(|(i, _)| !reference_taken[*i])
            .map(|(_, r)| r.virus_name.clone())
            .collect(),
    })
}

fn greedy_pairs(
    table: &[Vec<Option<f64>>],
    references: &[ReferenceSeries],
    floor: f64,
) -> Vec<MatchPair> {
    let mut component_free = vec![true; table.len()];
    let mut reference_free = vec![true; references.len()];
    let mut pairs = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for (ci, row) in table.iter().enumerate() {
            if !component_free[ci] {
                continue;
            }
            for (ri, cell) in row.iter().enumerate() {
                if !reference_free[ri] {
                    continue;
                }
                let Some(r) = *cell else { continue };
                if r < floor {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bc, br, bv)) => {
                        r > bv
                            || (r == bv
                                && (ci < bc
                                    || (ci == bc
                                        && references[ri].virus_name
                                            < references[br].virus_name)))
                    }
                };
                if better {
                    best = Some((ci, ri, r));
                }
            }
        }
        let Some((ci, ri, r)) = best else { break };
        component_free[ci] = false;
        reference_free[ri] = false;
        pairs.push(MatchPair {
            component_index: ci,
            virus_name: references[ri].virus_name.clone(),
            pearson_r: r,
        });
    }
    pairs
}

/// Exhaustive maximum-sum injective assignment over the defined pairs.
fn optimal_pairs(
    table: &[Vec<Option<f64>>],
    references: &[ReferenceSeries],
    floor: f64,
) -> Result<Vec<MatchPair>> {
    const LIMIT: usize = 12;
    if table.len() > LIMIT {
        return Err(Error::Matching(format!(
            "optimal matching is exhaustive and limited to {LIMIT} components, got {}",
            table.len()
        )));
    }

    fn search(
        ci: usize,
        table: &[Vec<Option<f64>>],
        floor: f64,
        reference_free: &mut Vec<bool>,
        current: &mut Vec<(usize, usize, f64)>,
        best: &mut (f64, usize, Vec<(usize, usize, f64)>),
    ) {
        if ci == table.len() {
            let sum: f64 = current.iter().map(|(_, _, r)| r).sum();
            // Prefer more pairs, then a larger correlation sum.
            if (current.len(), sum) > (best.1, best.0) {
                *best = (sum, current.len(), current.clone());
            }
            return;
        }
        for ri in 0..reference_free.len() {
            if !reference_free[ri] {
                continue;
            }
            if let Some(r) = table[ci][ri] {
                if r >= floor {
                    reference_free[ri] = false;
                    current.push((ci, ri, r));
                    search(ci + 1, table, floor, reference_free, current, best);
                    current.pop();
                    reference_free[ri] = true;
                }
            }
        }
        // Leaving this component unmatched is always an option.
        search(ci + 1, table, floor, reference_free, current, best);
    }

    let mut reference_free = vec![true; references.len()];
    let mut best = (f64::NEG_INFINITY, 0, Vec::new());
    search(0, table, floor, &mut reference_free, &mut Vec::new(), &mut (best));
    let mut pairs: Vec<MatchPair> = best
        .2
        .into_iter()
        .map(|(ci, ri, r)| MatchPair {
            component_index: ci,
            virus_name: references[ri].virus_name.clone(),
            pearson_r: r,
        })
        .collect();
    pairs.sort_by(|a, b| b.pearson_r.partial_cmp(&a.pearson_r).unwrap());
    Ok(pairs)
}
