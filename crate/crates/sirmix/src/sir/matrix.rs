//! Matrix-valued multi-strain SIR dynamics.
//!
//! For a pool of `v` viruses the compartments become v-by-v matrices and
//! the dynamics read
//!
//! ```text
//! dS/dt = -I * beta' * S
//! dI/dt =  S * beta' * I - gamma' * I
//! dR/dt =  gamma' * I
//! ```
//!
//! with `'` the transpose. The equations are implemented exactly in this
//! orientation; whether `beta[i][j]` means transmission "from i to j" or
//! "to i from j" is left to the caller's convention. With diagonal
//! matrices every strain evolves independently and the i-th diagonal
//! reproduces the scalar system, which is the only regime the
//! decomposition pipeline exercises. Off-diagonal couplings are supported
//! by the integrator but carry no positivity guarantee, so the round-off
//! clamp is applied to diagonal entries only.

use nalgebra::DMatrix;

use super::rk4::{self, OdeState};
use super::{SirParams, NEG_CLAMP_FRACTION};
use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// Full state of the multi-strain system: compartments plus rates.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSirState {
    pub susceptible: DMatrix<f64>,
    pub infected: DMatrix<f64>,
    pub recovered: DMatrix<f64>,
    /// Infection rates, 1/(individual * day).
    pub beta: DMatrix<f64>,
    /// Recovery rates, 1/day.
    pub gamma: DMatrix<f64>,
}

impl MultiSirState {
    pub fn new(
        susceptible: DMatrix<f64>,
        infected: DMatrix<f64>,
        recovered: DMatrix<f64>,
        beta: DMatrix<f64>,
        gamma: DMatrix<f64>,
    ) -> Result<Self> {
        let state = Self { susceptible, infected, recovered, beta, gamma };
        state.validate()?;
        Ok(state)
    }

    /// Diagonal (independent-strain) system from per-virus scalar
    /// parameters. Phase is ignored here; it is a dictionary concept.
    pub fn diagonal(params: &[SirParams]) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::Parameter("at least one strain is required".into()));
        }
        for p in params {
            p.validate()?;
        }
        let v = params.len();
        let diag = |f: &dyn Fn(&SirParams) -> f64| {
            DMatrix::from_fn(v, v, |r, c| if r == c { f(&params[r]) } else { 0.0 })
        };
        Self::new(
            diag(&|p| p.population_size - p.initial_infected),
            diag(&|p| p.initial_infected),
            DMatrix::zeros(v, v),
            diag(&|p| p.beta()),
            diag(&|p| p.recovery_rate),
        )
    }

    /// Number of strains `v`.
    pub fn dimension(&self) -> usize {
        self.susceptible.nrows()
    }

    /// Sum of the diagonal of I: the total infected sub-population in the
    /// independent-strain regime, i.e. the modeled ILI level.
    pub fn ili_level(&self) -> f64 {
        self.infected.diagonal().sum()
    }

    fn validate(&self) -> Result<()> {
        let v = self.susceptible.nrows();
        let all = [
            ("S", &self.susceptible),
            ("I", &self.infected),
            ("R", &self.recovered),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
        ];
        for (name, m) in all {
            if m.nrows() != m.ncols() {
                return Err(Error::Parameter(format!(
                    "{name} must be square, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.nrows() != v {
                return Err(Error::Parameter(format!(
                    "{name} is {}x{} but S is {v}x{v}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parameter(format!("{name} contains a non-finite entry")));
            }
        }
        if v == 0 {
            return Err(Error::Parameter("matrices must have dimension at least 1".into()));
        }
        Ok(())
    }

    /// Per-virus population sizes read off the compartment diagonals.
    fn diagonal_population(&self) -> Vec<f64> {
        (0..self.dimension())
            .map(|k| self.susceptible[(k, k)] + self.infected[(k, k)] + self.recovered[(k, k)])
            .collect()
    }
}

#[derive(Clone)]
struct Compartments {
    s: DMatrix<f64>,
    i: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl OdeState for Compartments {
    fn add_scaled(&self, other: &Self, factor: f64) -> Self {
        Compartments {
            s: &self.s + &other.s * factor,
            i: &self.i + &other.i * factor,
            r: &self.r + &other.r * factor,
        }
    }
}

/// Integrates the matrix system with the same RK4 stepper as the scalar
/// path and returns one state per integer day, `horizon_days` in total
/// (day 0 is the initial state).
pub fn integrate_matrix_sir(
    state0: &MultiSirState,
    horizon_days: usize,
    step_days: f64,
) -> Result<Vec<MultiSirState>> {
    state0.validate()?;
    if horizon_days == 0 {
        return Err(Error::Parameter("horizon_days must be at least 1".into()));
    }
    let substeps = rk4::substeps_per_day(step_days)?;
    let dt = 1.0 / substeps as f64;

    let beta_t = state0.beta.transpose();
    let gamma_t = state0.gamma.transpose();
    let deriv = |c: &Compartments| {
        let infection = &c.s * &beta_t * &c.i;
        let recovery = &gamma_t * &c.i;
        Compartments {
            s: -(&c.i * &beta_t * &c.s),
            i: infection - &recovery,
            r: recovery,
        }
    };

    let populations = state0.diagonal_population();
    let clamp_floor: Vec<f64> = populations.iter().map(|n| -NEG_CLAMP_FRACTION * n).collect();

    let mut current = Compartments {
        s: state0.susceptible.clone(),
        i: state0.infected.clone(),
        r: state0.recovered.clone(),
    };
    let mut trajectory = Vec::with_capacity(horizon_days);
    for day in 0..horizon_days {
        trajectory.push(MultiSirState {
            susceptible: current.s.clone(),
            infected: current.i.clone(),
            recovered: current.r.clone(),
            beta: state0.beta.clone(),
            gamma: state0.gamma.clone(),
        });
        if day + 1 == horizon_days {
            break;
        }
        for _ in 0..substeps {
            current = rk4::rk4_step(&current, dt, &deriv);
            for (name, m) in [("S", &mut current.s), ("I", &mut current.i), ("R", &mut current.r)]
            {
                if m.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Integration(format!(
                        "non-finite entry in {name} on day {day}"
                    )));
                }
                for k in 0..populations.len() {
                    let value = m[(k, k)];
                    if value < 0.0 {
                        if value > clamp_floor[k] {
                            m[(k, k)] = 0.0;
                        } else {
                            return Err(Error::Integration(format!(
                                "diagonal entry {k} of {name} fell to {value} on day {day}; \
                                 step {step_days} too large"
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(trajectory)
}

/// Daily ILI series of a trajectory: the sum of the diagonal of I.
pub fn ili_from_state(trajectory: &[MultiSirState]) -> Result<TimeSeries> {
    if trajectory.is_empty() {
        return Err(Error::Data("empty trajectory".into()));
    }
    TimeSeries::day_indexed(trajectory.iter().map(MultiSirState::ili_level).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sir::{integrate_sir, DEFAULT_STEP_DAYS};

    #[test]
    fn dimension_one_reduces_to_scalar() {
        let params = SirParams::new(1e6, 100.0, 2.5, 0.1, 0.0).unwrap();
        let state = MultiSirState::diagonal(&[params]).unwrap();
        let traj = integrate_matrix_sir(&state, 212, DEFAULT_STEP_DAYS).unwrap();
        let scalar = integrate_sir(&params, 212, DEFAULT_STEP_DAYS).unwrap();
        for (day, st) in traj.iter().enumerate() {
            let m = st.infected[(0, 0)];
            let s = scalar.values()[day];
            let scale = s.abs().max(1e-300);
            assert!(
                ((m - s) / scale).abs() < 1e-12,
                "day {day}: matrix {m} vs scalar {s}"
            );
        }
    }

    #[test]
    fn three_strain_diagonal_matches_independent_runs() {
        let all = [
            SirParams::new(1e6, 100.0, 2.5, 0.1, 0.0).unwrap(),
            SirParams::new(1e6, 500.0, 1.4, 0.05, 0.0).unwrap(),
            SirParams::new(1e6, 50.0, 3.5, 0.2, 0.0).unwrap(),
        ];
        let state = MultiSirState::diagonal(&all).unwrap();
        let traj = integrate_matrix_sir(&state, 212, DEFAULT_STEP_DAYS).unwrap();
        for (k, params) in all.iter().enumerate() {
            let scalar = integrate_sir(params, 212, DEFAULT_STEP_DAYS).unwrap();
            for (day, st) in traj.iter().enumerate() {
                let diff = (st.infected[(k, k)] - scalar.values()[day]).abs();
                assert!(diff <= 1e-9 * params.population_size, "strain {k} day {day}: {diff}");
            }
        }
        // Off-diagonal entries stay exactly zero for diagonal inputs.
        for st in &traj {
            for r in 0..3 {
                for c in 0..3 {
                    if r != c {
                        assert_eq!(st.infected[(r, c)], 0.0);
                        assert_eq!(st.susceptible[(r, c)], 0.0);
                        assert_eq!(st.recovered[(r, c)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn ili_is_diagonal_sum() {
        let all = [
            SirParams::new(1e6, 100.0, 2.5, 0.1, 0.0).unwrap(),
            SirParams::new(1e6, 500.0, 1.4, 0.05, 0.0).unwrap(),
            SirParams::new(1e6, 50.0, 3.5, 0.2, 0.0).unwrap(),
        ];
        let state = MultiSirState::diagonal(&all).unwrap();
        let traj = integrate_matrix_sir(&state, 212, DEFAULT_STEP_DAYS).unwrap();
        let ili = ili_from_state(&traj).unwrap();
        for (day, &level) in ili.values().iter().enumerate() {
            let sum: f64 = all
                .iter()
                .map(|p| integrate_sir(p, 212, DEFAULT_STEP_DAYS).unwrap().values()[day])
                .sum();
            assert!((level - sum).abs() <= 1e-9 * 1e6, "day {day}");
        }
    }

    #[test]
    fn zero_infected_gives_zero_ili() {
        let v = 2;
        let state = MultiSirState::new(
            DMatrix::from_diagonal_element(v, v, 1e6),
            DMatrix::zeros(v, v),
            DMatrix::zeros(v, v),
            DMatrix::from_diagonal_element(v, v, 2.5e-7),
            DMatrix::from_diagonal_element(v, v, 0.1),
        )
        .unwrap();
        let traj = integrate_matrix_sir(&state, 30, DEFAULT_STEP_DAYS).unwrap();
        let ili = ili_from_state(&traj).unwrap();
        assert!(ili.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let bad = MultiSirState::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(3, 3),
            DMatrix::zeros(2, 2),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        assert!(ili_from_state(&[]).is_err());
    }

    #[test]
    fn cross_coupling_fine_step_agreement() {
        // v=2 with a nonzero off-diagonal beta entry: the coarse run must
        // agree with a fine-step reference at the peak within 0.1%.
        let a = SirParams::new(1e6, 100.0, 2.5, 0.1, 0.0).unwrap();
        let b = SirParams::new(1e6, 200.0, 1.8, 0.08, 0.0).unwrap();
        let mut state = MultiSirState::diagonal(&[a, b]).unwrap();
        state.beta[(0, 1)] = 0.3 * state.beta[(0, 0)];

        let coarse = integrate_matrix_sir(&state, 212, DEFAULT_STEP_DAYS).unwrap();
        let fine = integrate_matrix_sir(&state, 212, 1e-3).unwrap();
        for k in 0..2 {
            let peak_day = (0..212)
                .max_by(|&x, &y| {
                    fine[x].infected[(k, k)].partial_cmp(&fine[y].infected[(k, k)]).unwrap()
                })
                .unwrap();
            let f = fine[peak_day].infected[(k, k)];
            let c = coarse[peak_day].infected[(k, k)];
            assert!(((f - c) / f).abs() < 1e-3, "strain {k}: fine {f} coarse {c}");
        }
    }
}
