//! Overcomplete dictionary of feasible SIR infection curves.
//!
//! Candidates come from a per-parameter grid (population size N, initial
//! infected I0, basic reproduction number R0, recovery rate gamma, phase
//! theta). For each N the remaining four axes form a Cartesian product;
//! every candidate is integrated over the season, phase-shifted,
//! truncated, and kept only if its half-peak width covers enough of the
//! season. Survivors are normalised to unit Euclidean norm so that a
//! matching-pursuit gain is a plain inner product.
//!
//! Atom identifiers are indices into the per-N candidate grid, so they are
//! stable under filtering and across rebuilds from the same spec.

mod cache;

pub use cache::{load_dictionary, save_dictionary};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sir::{integrate_sir, SirParams};
use crate::timeseries::TimeSeries;

/// Axis spacing of one grid parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Logarithmic,
}

impl Spacing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Logarithmic => "log",
        }
    }
}

impl std::str::FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" | "logarithmic" => Ok(Spacing::Logarithmic),
            other => Err(Error::Config(format!("unknown spacing '{other}'"))),
        }
    }
}

/// One grid axis: closed interval `[min, max]` sampled at `points` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        let axis = Self { min, max, points, spacing };
        axis.validate("axis")?;
        Ok(axis)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Parameter(format!("{name}: bounds must be finite")));
        }
        if self.min >= self.max {
            return Err(Error::Parameter(format!(
                "{name}: min ({}) must be below max ({})",
                self.min, self.max
            )));
        }
        if self.points < 2 {
            return Err(Error::Parameter(format!("{name}: need at least 2 points")));
        }
        if self.spacing == Spacing::Logarithmic && self.min <= 0.0 {
            return Err(Error::Parameter(format!(
                "{name}: logarithmic spacing needs positive bounds"
            )));
        }
        Ok(())
    }

    /// Grid values including both endpoints; arithmetic for linear
    /// spacing, geometric for logarithmic.
    pub fn values(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|k| {
                if k == 0 {
                    self.min
                } else if k == last {
                    self.max
                } else {
                    let t = k as f64 / last as f64;
                    match self.spacing {
                        Spacing::Linear => self.min + t * (self.max - self.min),
                        Spacing::Logarithmic => {
                            (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                        }
                    }
                }
            })
            .collect()
    }
}

/// The five-axis parameter grid behind a dictionary build.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub population_size: AxisSpec,
    pub initial_infected: AxisSpec,
    pub r0: AxisSpec,
    pub gamma: AxisSpec,
    pub theta: AxisSpec,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            population_size: AxisSpec { min: 1e5, max: 1e8, points: 10, spacing: Spacing::Logarithmic },
            initial_infected: AxisSpec { min: 1e1, max: 1e3, points: 10, spacing: Spacing::Logarithmic },
            r0: AxisSpec { min: 0.7, max: 5.0, points: 10, spacing: Spacing::Linear },
            gamma: AxisSpec { min: 1e-6, max: 1e-2, points: 10, spacing: Spacing::Logarithmic },
            theta: AxisSpec { min: 0.0, max: 100.0, points: 10, spacing: Spacing::Linear },
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.population_size.validate("population_size")?;
        self.initial_infected.validate("initial_infected")?;
        self.r0.validate("r0")?;
        self.gamma.validate("gamma")?;
        self.theta.validate("theta")?;
        Ok(())
    }

    /// Candidate parameter sets for one population size, in atom-id order:
    /// R0 varies slowest, then gamma, then I0, then theta. Combinations
    /// with `I0 >= N` are dropped (their grid slots keep their ids).
    pub fn candidates_for(&self, population_size: f64) -> Vec<(usize, SirParams)> {
        let r0s = self.r0.values();
        let gammas = self.gamma.values();
        let i0s = self.initial_infected.values();
        let thetas = self.theta.values();
        let mut out =
            Vec::with_capacity(r0s.len() * gammas.len() * i0s.len() * thetas.len());
        let mut id = 0usize;
        for &r0 in &r0s {
            for &gamma in &gammas {
                for &i0 in &i0s {
                    for &theta in &thetas {
                        if i0 < population_size {
                            out.push((
                                id,
                                SirParams {
                                    population_size,
                                    initial_infected: i0,
                                    r0,
                                    recovery_rate: gamma,
                                    phase_days: theta,
                                },
                            ));
                        }
                        id += 1;
                    }
                }
            }
        }
        out
    }
}

/// Full grid as a flat list: N varies slowest, then the per-N candidate
/// order of [`GridSpec::candidates_for`].
pub fn build_grid(spec: &GridSpec) -> Result<Vec<SirParams>> {
    spec.validate()?;
    let mut out = Vec::new();
    for n in spec.population_size.values() {
        out.extend(spec.candidates_for(n).into_iter().map(|(_, p)| p));
    }
    Ok(out)
}

/// Shape constraint on a season-long infection curve: at least 15% of the
/// season's days must sit at or above half of the curve's peak. Curves
/// that concentrate their infections in a shorter burst, and identically
/// zero curves, are rejected.
pub fn feasibility_filter(raw_curve: &TimeSeries, season_days: usize) -> bool {
    debug_assert_eq!(raw_curve.len(), season_days);
    let peak = raw_curve.values().iter().cloned().fold(f64::MIN, f64::max);
    if peak <= 0.0 {
        return false;
    }
    let needed = (15 * season_days + 99) / 100; // ceil(0.15 * season_days)
    let half = 0.5 * peak;
    let wide = raw_curve.values().iter().filter(|&&v| v >= half).count();
    wide >= needed
}

/// One dictionary entry: a unit-norm feasible infection curve plus the
/// parameters that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryAtom {
    pub params: SirParams,
    /// Unit Euclidean norm curve over the season.
    pub curve: TimeSeries,
    /// Euclidean norm of the raw curve; `original_norm * curve`
    /// reconstructs it.
    pub original_norm: f64,
    /// Index into the per-N candidate grid.
    pub atom_id: usize,
}

/// All feasible atoms for one population size.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub population_size: f64,
    pub season_days: usize,
    pub step_days: f64,
    pub atoms: Vec<DictionaryAtom>,
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Per-N dictionaries built from one grid spec, ascending in N.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionarySet {
    pub spec: GridSpec,
    pub season_days: usize,
    pub step_days: f64,
    pub dictionaries: Vec<Dictionary>,
}

impl DictionarySet {
    pub fn total_atoms(&self) -> usize {
        self.dictionaries.iter().map(Dictionary::len).sum()
    }
}

fn build_atoms(
    candidates: &[(usize, SirParams)],
    population_size: f64,
    season_days: usize,
    step_days: f64,
) -> Result<Dictionary> {
    if season_days == 0 {
        return Err(Error::Parameter("season_days must be at least 1".into()));
    }
    let atoms: Vec<Option<DictionaryAtom>> = candidates
        .par_iter()
        .map(|(atom_id, params)| -> Result<Option<DictionaryAtom>> {
            let raw = integrate_sir(params, season_days, step_days).map_err(|e| {
                Error::Integration(format!("atom {atom_id} ({params:?}): {e}"))
            })?;
            if !feasibility_filter(&raw, season_days) {
                return Ok(None);
            }
            let norm = raw.norm();
            Ok(Some(DictionaryAtom {
                params: *params,
                curve: raw.scaled(1.0 / norm),
                original_norm: norm,
                atom_id: *atom_id,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(Dictionary {
        population_size,
        season_days,
        step_days,
        atoms: atoms.into_iter().flatten().collect(),
    })
}

/// Builds the dictionary for a single population size.
///
/// Candidates are integrated in parallel; output order and atom ids are a
/// function of the grid alone, so two builds from the same spec are
/// bit-identical.
pub fn build_dictionary_for(
    spec: &GridSpec,
    population_size: f64,
    season_days: usize,
    step_days: f64,
) -> Result<Dictionary> {
    spec.validate()?;
    build_atoms(&spec.candidates_for(population_size), population_size, season_days, step_days)
}

/// Dictionary over an explicit parameter list instead of a grid; atom ids
/// are positions in the list. Useful for narrowed or synthetic setups.
pub fn build_custom_dictionary(
    params: &[SirParams],
    season_days: usize,
    step_days: f64,
) -> Result<Dictionary> {
    if params.is_empty() {
        return Err(Error::Parameter("parameter list must not be empty".into()));
    }
    for p in params {
        p.validate()?;
    }
    let candidates: Vec<(usize, SirParams)> = params.iter().copied().enumerate().collect();
    build_atoms(&candidates, params[0].population_size, season_days, step_days)
}

/// Builds per-N dictionaries for every population size on the grid.
pub fn build_dictionary(spec: &GridSpec, season_days: usize, step_days: f64) -> Result<DictionarySet> {
    spec.validate()?;
    let dictionaries = spec
        .population_size
        .values()
        .into_iter()
        .map(|n| build_dictionary_for(spec, n, season_days, step_days))
        .collect::<Result<Vec<_>>>()?;
    Ok(DictionarySet { spec: spec.clone(), season_days, step_days, dictionaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sir::DEFAULT_STEP_DAYS;

    #[test]
    fn default_axes_match_the_stated_progressions() {
        let spec = GridSpec::default();
        let r0 = spec.r0.values();
        assert_eq!(r0.len(), 10);
        let step = (5.0 - 0.7) / 9.0;
        for (k, v) in r0.iter().enumerate() {
            assert!((v - (0.7 + k as f64 * step)).abs() < 1e-12, "r0[{k}] = {v}");
        }
        assert_eq!(r0[0], 0.7);
        assert_eq!(r0[9], 5.0);

        let gamma = spec.gamma.values();
        let ratio = 1e4f64.powf(1.0 / 9.0);
        for k in 1..10 {
            assert!(
                (gamma[k] / gamma[k - 1] - ratio).abs() < 1e-9,
                "gamma ratio at {k}: {}",
                gamma[k] / gamma[k - 1]
            );
        }
        assert_eq!(gamma[0], 1e-6);
        assert_eq!(gamma[9], 1e-2);
    }

    #[test]
    fn candidate_count_is_the_full_product() {
        let spec = GridSpec::default();
        // Max I0 (1e3) is below min N (1e5), so nothing is dropped.
        for n in spec.population_size.values() {
            assert_eq!(spec.candidates_for(n).len(), 10_000);
        }
        assert_eq!(build_grid(&spec).unwrap().len(), 100_000);
    }

    #[test]
    fn i0_at_or_above_n_is_dropped_but_ids_are_kept() {
        let mut spec = GridSpec::default();
        spec.population_size = AxisSpec::new(50.0, 2000.0, 2, Spacing::Logarithmic).unwrap();
        spec.initial_infected = AxisSpec::new(10.0, 100.0, 2, Spacing::Logarithmic).unwrap();
        spec.r0 = AxisSpec::new(1.0, 2.0, 2, Spacing::Linear).unwrap();
        spec.gamma = AxisSpec::new(0.05, 0.1, 2, Spacing::Logarithmic).unwrap();
        spec.theta = AxisSpec::new(0.0, 10.0, 2, Spacing::Linear).unwrap();
        let small = spec.candidates_for(50.0);
        // I0 = 100 >= N = 50 is dropped: half the 16 slots survive.
        assert_eq!(small.len(), 8);
        // Dropped slots leave holes in the id sequence rather than shifting it.
        let ids: Vec<usize> = small.iter().map(|(id, _)| *id).collect();
        assert_eq!(ids, vec![0, 1, 4, 5, 8, 9, 12, 13]);
        let full = spec.candidates_for(2000.0);
        assert_eq!(full.len(), 16);
    }

    #[test]
    fn feasibility_examples() {
        // 40 of 212 days at half peak (18.9%) passes; 20 (9.4%) does not.
        let mut wide = vec![0.0; 212];
        for v in wide.iter_mut().take(40) {
            *v = 10.0;
        }
        wide[40] = 4.0; // below half-peak filler
        let wide = TimeSeries::day_indexed(wide).unwrap();
        assert!(feasibility_filter(&wide, 212));

        let mut narrow = vec![0.0; 212];
        for v in narrow.iter_mut().take(20) {
            *v = 10.0;
        }
        let narrow = TimeSeries::day_indexed(narrow).unwrap();
        assert!(!feasibility_filter(&narrow, 212));

        let zero = TimeSeries::day_indexed(vec![0.0; 212]).unwrap();
        assert!(!feasibility_filter(&zero, 212));
    }

    #[test]
    fn known_feasible_set_yields_one_unit_norm_atom() {
        let params = SirParams::new(1e6, 100.0, 2.5, 0.01, 0.0).unwrap();
        let dict = build_custom_dictionary(&[params], 212, DEFAULT_STEP_DAYS).unwrap();
        assert_eq!(dict.len(), 1);
        let atom = &dict.atoms[0];
        assert!((atom.curve.norm() - 1.0).abs() < 1e-12);
        assert!(atom.original_norm > 0.0);
        assert!(atom.curve.values().iter().all(|&v| v >= 0.0));
        // original_norm * curve reconstructs the raw curve.
        let raw = integrate_sir(&atom.params, 212, DEFAULT_STEP_DAYS).unwrap();
        for (a, b) in atom.curve.values().iter().zip(raw.values()) {
            let scale = b.abs().max(1e-300);
            assert!((a * atom.original_norm - b).abs() / scale < 1e-9);
        }
    }

    #[test]
    fn known_infeasible_set_yields_empty_dictionary() {
        // Late onset plus fast exponential growth in a huge population:
        // the season truncates the curve in its rising phase, so the
        // half-peak span is short. Verified by direct curve inspection.
        let params = SirParams::new(1e8, 1000.0, 5.0, 1e-2, 100.0).unwrap();
        let raw = integrate_sir(&params, 212, DEFAULT_STEP_DAYS).unwrap();
        let peak = raw.peak().1;
        let above = raw.values().iter().filter(|&&v| v >= 0.5 * peak).count();
        assert!(above < 32, "curve is {above} days wide at half peak");

        let dict = build_custom_dictionary(&[params], 212, DEFAULT_STEP_DAYS).unwrap();
        assert!(dict.is_empty());
    }

    #[test]
    fn build_is_reproducible() {
        let mut spec = GridSpec::default();
        spec.r0 = AxisSpec::new(1.5, 3.0, 2, Spacing::Linear).unwrap();
        spec.gamma = AxisSpec::new(1e-3, 1e-2, 2, Spacing::Logarithmic).unwrap();
        spec.initial_infected = AxisSpec::new(10.0, 1000.0, 2, Spacing::Logarithmic).unwrap();
        spec.theta = AxisSpec::new(0.0, 50.0, 3, Spacing::Linear).unwrap();
        spec.population_size = AxisSpec::new(1e5, 1e6, 2, Spacing::Logarithmic).unwrap();
        let a = build_dictionary(&spec, 212, DEFAULT_STEP_DAYS).unwrap();
        let b = build_dictionary(&spec, 212, DEFAULT_STEP_DAYS).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dictionaries.len(), 2);
    }
}
