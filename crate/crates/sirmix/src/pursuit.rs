//! Greedy matching-pursuit decomposition over a SIR curve dictionary.
//!
//! Each iteration scores every unused atom by its inner product with the
//! current residual, commits the best-scoring atom with that inner product
//! as its gain, and subtracts the weighted curve from the residual. On
//! unit-norm atoms the subtraction removes exactly `gain^2` of squared
//! error, so the stopping rule — stop when the next component would raise
//! R-squared by less than `delta_r2_stop` — reduces to a threshold on
//! `gain^2 / SS_tot` and the under-threshold trial is never committed.
//!
//! Gains are non-negative by default (an epidemic cannot subtract
//! infections) and atoms are not reselected (each component stands for a
//! distinct pathogen). Both behaviours are knobs on [`PursuitOptions`]
//! for sensitivity runs.

use rayon::prelude::*;

use crate::dictionary::{Dictionary, DictionarySet};
use crate::error::{Error, Result};
use crate::sir::SirParams;
use crate::timeseries::{dot, squared_norm, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuitOptions {
    /// Minimum absolute R-squared improvement a component must bring.
    pub delta_r2_stop: f64,
    /// Hard cap on the number of components.
    pub max_components: usize,
    /// Select by largest inner-product magnitude and allow negative gains.
    pub allow_negative_gain: bool,
    /// Allow the same atom to be committed more than once.
    pub allow_reselection: bool,
}

impl Default for PursuitOptions {
    fn default() -> Self {
        Self {
            delta_r2_stop: 0.01,
            max_components: 20,
            allow_negative_gain: false,
            allow_reselection: false,
        }
    }
}

/// One selected atom with its gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub atom_id: usize,
    pub params: SirParams,
    pub gain: f64,
    /// `gain` times the unit atom curve, dated like the signal.
    pub contribution: TimeSeries,
}

/// Result of decomposing one signal against one per-N dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub population_size: f64,
    pub components: Vec<Component>,
    pub residual: TimeSeries,
    /// R-squared after each committed component.
    pub r2_trace: Vec<f64>,
    /// Last trace entry; `None` when nothing was committed or the signal
    /// is constant so R-squared is undefined.
    pub final_r2: Option<f64>,
}

impl Decomposition {
    /// Squared error of the residual; the per-N model selection criterion.
    pub fn residual_sq_error(&self) -> f64 {
        self.residual.squared_norm()
    }

    /// Sum of all contributions, dated like the signal.
    pub fn composite(&self) -> TimeSeries {
        let mut values = vec![0.0; self.residual.len()];
        for component in &self.components {
            for (acc, v) in values.iter_mut().zip(component.contribution.values()) {
                *acc += v;
            }
        }
        TimeSeries::new(self.residual.start_date(), values)
            .expect("composite of finite curves is finite")
    }
}

/// Coefficient of determination `1 - SS_res / SS_tot` with `SS_tot` taken
/// about the signal mean. May be negative for a poor approximation.
pub fn r_squared(signal: &TimeSeries, approximation: &TimeSeries) -> Result<f64> {
    if signal.len() != approximation.len() {
        return Err(Error::Data(format!(
            "signal has {} samples but approximation has {}",
            signal.len(),
            approximation.len()
        )));
    }
    if signal.len() < 2 {
        return Err(Error::Data("r_squared needs at least 2 samples".into()));
    }
    let ss_tot = centered_sum_of_squares(signal.values());
    if ss_tot == 0.0 {
        return Err(Error::UndefinedStatistic(
            "signal is constant, R-squared is undefined".into(),
        ));
    }
    let ss_res: f64 = signal
        .values()
        .iter()
        .zip(approximation.values())
        .map(|(y, f)| (y - f) * (y - f))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub(crate) fn centered_sum_of_squares(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// Decomposes `signal` over a single per-N dictionary.
pub fn decompose(
    signal: &TimeSeries,
    dictionary: &Dictionary,
    options: &PursuitOptions,
) -> Result<Decomposition> {
    if dictionary.is_empty() {
        return Err(Error::Config(format!(
            "dictionary for N = {} is empty",
            dictionary.population_size
        )));
    }
    let season_len = dictionary.atoms[0].curve.len();
    if signal.len() != season_len {
        return Err(Error::Data(format!(
            "signal has {} samples but dictionary curves span {season_len} days",
            signal.len()
        )));
    }

    let ss_tot = centered_sum_of_squares(signal.values());
    let mut residual: Vec<f64> = signal.values().to_vec();
    let mut components: Vec<Component> = Vec::new();
    let mut r2_trace: Vec<f64> = Vec::new();

    // A constant signal has undefined R-squared; report an empty
    // decomposition with the flag unset rather than inventing a fit.
    if ss_tot > 0.0 {
        let mut used = vec![false; dictionary.atoms.len()];
        while components.len() < options.max_components {
            // Ordered scores make the argmax independent of thread count;
            // ties fall to the lowest atom_id because the scan keeps the
            // first maximum.
            let scores: Vec<f64> = dictionary
                .atoms
                .par_iter()
                .map(|atom| dot(&residual, atom.curve.values()))
                .collect();
            let mut best: Option<(usize, f64)> = None;
            for (idx, &inner) in scores.iter().enumerate() {
                if used[idx] && !options.allow_reselection {
                    continue;
                }
                let score = if options.allow_negative_gain { inner.abs() } else { inner };
                if score <= 0.0 {
                    continue;
                }
                if best.is_none_or(|(_, b)| {
                    score > if options.allow_negative_gain { b.abs() } else { b }
                }) {
                    best = Some((idx, inner));
                }
            }
            let Some((idx, gain)) = best else {
                break; // nothing left with a usable inner product
            };
            if gain * gain / ss_tot < options.delta_r2_stop {
                break; // trial component is below the stopping threshold
            }
            let atom = &dictionary.atoms[idx];
            for (r, a) in residual.iter_mut().zip(atom.curve.values()) {
                *r -= gain * a;
            }
            used[idx] = true;
            components.push(Component {
                atom_id: atom.atom_id,
                params: atom.params,
                gain,
                contribution: atom.curve.scaled(gain).with_start_date(signal.start_date()),
            });
            r2_trace.push(1.0 - squared_norm(&residual) / ss_tot);
        }
    }

    let final_r2 = r2_trace.last().copied();
    Ok(Decomposition {
        population_size: dictionary.population_size,
        components,
        residual: TimeSeries::new(signal.start_date(), residual)?,
        r2_trace,
        final_r2,
    })
}

/// Runs [`decompose`] once per population size, skipping empty per-N
/// dictionaries. Errors if every dictionary is empty.
pub fn decompose_per_n(
    signal: &TimeSeries,
    set: &DictionarySet,
    options: &PursuitOptions,
) -> Result<Vec<Decomposition>> {
    let non_empty: Vec<&Dictionary> =
        set.dictionaries.iter().filter(|d| !d.is_empty()).collect();
    if non_empty.is_empty() {
        return Err(Error::Config("every per-N dictionary is empty".into()));
    }
    non_empty
        .par_iter()
        .map(|dict| decompose(signal, dict, options))
        .collect()
}

/// Model selection over N: the decomposition with the smallest residual
/// squared error wins; ties go to the smaller population size.
pub fn decompose_best_n(
    signal: &TimeSeries,
    set: &DictionarySet,
    options: &PursuitOptions,
) -> Result<Decomposition> {
    let runs = decompose_per_n(signal, set, options)?;
    Ok(runs
        .into_iter()
        .min_by(|a, b| {
            a.residual_sq_error()
                .partial_cmp(&b.residual_sq_error())
                .expect("residuals are finite")
                .then(
                    a.population_size
                        .partial_cmp(&b.population_size)
                        .expect("population sizes are finite"),
                )
        })
        .expect("at least one decomposition"))
}
