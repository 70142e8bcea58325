//! Deterministic SIR integration.
//!
//! The scalar system
//!
//! ```text
//! dS/dt = -beta * S * I
//! dI/dt =  beta * S * I - gamma * I
//! dR/dt =  gamma * I
//! ```
//!
//! is integrated with classical fixed-step RK4 and sampled once per day.
//! The multi-strain matrix generalisation lives in [`matrix`]. Everything
//! here is a pure function of its inputs: identical arguments produce
//! bit-identical output regardless of threading.

mod matrix;
mod rk4;

pub use matrix::{integrate_matrix_sir, ili_from_state, MultiSirState};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// Default integrator step, in days.
pub const DEFAULT_STEP_DAYS: f64 = 0.05;

/// Compartment values in `(-NEG_CLAMP_FRACTION * N, 0)` are treated as
/// round-off and clamped to zero; anything more negative is instability.
pub const NEG_CLAMP_FRACTION: f64 = 1e-9;

/// Epidemic parameters of a single pathogen.
///
/// `beta` is not stored; it is recovered as `r0 * recovery_rate /
/// population_size`, i.e. the standard relation with the whole population
/// initially susceptible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirParams {
    /// Population size N, individuals.
    pub population_size: f64,
    /// Individuals infected at onset, I(0).
    pub initial_infected: f64,
    /// Basic reproduction number.
    pub r0: f64,
    /// Recovery rate gamma, 1/day.
    pub recovery_rate: f64,
    /// Onset delay theta within the season, days.
    pub phase_days: f64,
}

impl SirParams {
    pub fn new(
        population_size: f64,
        initial_infected: f64,
        r0: f64,
        recovery_rate: f64,
        phase_days: f64,
    ) -> Result<Self> {
        let params = Self { population_size, initial_infected, r0, recovery_rate, phase_days };
        params.validate()?;
        Ok(params)
    }

    /// Infection rate beta = R0 * gamma / N, per individual per day.
    pub fn beta(&self) -> f64 {
        self.r0 * self.recovery_rate / self.population_size
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("population_size", self.population_size),
            ("initial_infected", self.initial_infected),
            ("r0", self.r0),
            ("recovery_rate", self.recovery_rate),
            ("phase_days", self.phase_days),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite, got {value}")));
            }
        }
        if self.population_size <= 0.0 {
            return Err(Error::Parameter(format!(
                "population_size must be positive, got {}",
                self.population_size
            )));
        }
        if self.initial_infected <= 0.0 {
            return Err(Error::Parameter(format!(
                "initial_infected must be positive, got {}",
                self.initial_infected
            )));
        }
        if self.initial_infected >= self.population_size {
            return Err(Error::Parameter(format!(
                "initial_infected ({}) must be below population_size ({})",
                self.initial_infected, self.population_size
            )));
        }
        if self.r0 <= 0.0 {
            return Err(Error::Parameter(format!("r0 must be positive, got {}", self.r0)));
        }
        if self.recovery_rate <= 0.0 {
            return Err(Error::Parameter(format!(
                "recovery_rate must be positive, got {}",
                self.recovery_rate
            )));
        }
        if self.phase_days < 0.0 {
            return Err(Error::Parameter(format!(
                "phase_days must be non-negative, got {}",
                self.phase_days
            )));
        }
        let beta = self.beta();
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Parameter(format!("derived beta is not usable: {beta}")));
        }
        Ok(())
    }

    /// Onset delay rounded to whole days; sub-day phase is unobservable in
    /// daily signals.
    pub fn phase_shift_days(&self) -> usize {
        self.phase_days.round() as usize
    }
}

/// Daily-sampled compartment trajectory of one scalar run.
///
/// Day `d < theta` (rounded) precedes the epidemic onset: the pathogen is
/// not yet seeded, so the state is (N, 0, 0).
#[derive(Debug, Clone, PartialEq)]
pub struct SirTrajectory {
    pub susceptible: Vec<f64>,
    pub infected: Vec<f64>,
    pub recovered: Vec<f64>,
}

impl SirTrajectory {
    pub fn len(&self) -> usize {
        self.infected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infected.is_empty()
    }

    /// Infected compartment as a season-day-indexed series.
    pub fn infected_series(&self) -> Result<TimeSeries> {
        TimeSeries::day_indexed(self.infected.clone())
    }
}

/// Integrates Eq.-style scalar SIR dynamics and samples all three
/// compartments at integer days `0..horizon_days`.
pub fn simulate_sir(params: &SirParams, horizon_days: usize, step_days: f64) -> Result<SirTrajectory> {
    params.validate()?;
    if horizon_days == 0 {
        return Err(Error::Parameter("horizon_days must be at least 1".into()));
    }
    let substeps = rk4::substeps_per_day(step_days)?;
    let dt = 1.0 / substeps as f64;

    let n = params.population_size;
    let beta = params.beta();
    let gamma = params.recovery_rate;
    let shift = params.phase_shift_days();

    let mut susceptible = Vec::with_capacity(horizon_days);
    let mut infected = Vec::with_capacity(horizon_days);
    let mut recovered = Vec::with_capacity(horizon_days);

    // Pre-onset days: pathogen not seeded yet.
    for _ in 0..shift.min(horizon_days) {
        susceptible.push(n);
        infected.push(0.0);
        recovered.push(0.0);
    }
    if shift >= horizon_days {
        return Ok(SirTrajectory { susceptible, infected, recovered });
    }

    let deriv = |state: &[f64; 3]| {
        let flow = beta * state[0] * state[1];
        let recov = gamma * state[1];
        [-flow, flow - recov, recov]
    };

    let clamp_floor = -NEG_CLAMP_FRACTION * n;
    let mut state = [n - params.initial_infected, params.initial_infected, 0.0];
    for day in 0..(horizon_days - shift) {
        susceptible.push(state[0]);
        infected.push(state[1]);
        recovered.push(state[2]);
        if day + 1 == horizon_days - shift {
            break;
        }
        for _ in 0..substeps {
            state = rk4::rk4_step(&state, dt, &deriv);
            for (idx, value) in state.iter_mut().enumerate() {
                if !value.is_finite() {
                    return Err(Error::Integration(format!(
                        "non-finite compartment {} on day {day} (params {params:?})",
                        ["S", "I", "R"][idx]
                    )));
                }
                if *value < 0.0 {
                    if *value > clamp_floor {
                        *value = 0.0;
                    } else {
                        return Err(Error::Integration(format!(
                            "compartment {} fell to {value} on day {day}; step {step_days} too \
                             large for params {params:?}",
                            ["S", "I", "R"][idx]
                        )));
                    }
                }
            }
        }
    }
    Ok(SirTrajectory { susceptible, infected, recovered })
}

/// Infected counts I(t) at integer days `0..horizon_days`, with the phase
/// applied as a right shift (zero before onset, truncated at the horizon).
pub fn integrate_sir(params: &SirParams, horizon_days: usize, step_days: f64) -> Result<TimeSeries> {
    simulate_sir(params, horizon_days, step_days)?.infected_series()
}
