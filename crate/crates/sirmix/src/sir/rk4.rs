//! Classical fixed-step 4th-order Runge-Kutta.
//!
//! The state type only needs `y + c * x`; that is enough for the scalar
//! compartment triple and the matrix-valued multi-strain state alike.

pub(crate) trait OdeState: Clone {
    /// `self + factor * other`, elementwise.
    fn add_scaled(&self, other: &Self, factor: f64) -> Self;
}

impl OdeState for [f64; 3] {
    fn add_scaled(&self, other: &Self, factor: f64) -> Self {
        [
            self[0] + factor * other[0],
            self[1] + factor * other[1],
            self[2] + factor * other[2],
        ]
    }
}

/// One RK4 step of size `dt` under the autonomous derivative `deriv`.
pub(crate) fn rk4_step<S, F>(state: &S, dt: f64, deriv: &F) -> S
where
    S: OdeState,
    F: Fn(&S) -> S,
{
    let k1 = deriv(state);
    let k2 = deriv(&state.add_scaled(&k1, 0.5 * dt));
    let k3 = deriv(&state.add_scaled(&k2, 0.5 * dt));
    let k4 = deriv(&state.add_scaled(&k3, dt));
    let weighted = k1
        .add_scaled(&k2, 2.0)
        .add_scaled(&k3, 2.0)
        .add_scaled(&k4, 1.0);
    state.add_scaled(&weighted, dt / 6.0)
}

/// Resolves a requested step into a whole number of sub-steps per day so
/// that daily samples land exactly on integration points. The effective
/// step is `1 / n` for the smallest `n` with `1 / n <= step_days`.
pub(crate) fn substeps_per_day(step_days: f64) -> crate::error::Result<usize> {
    if !step_days.is_finite() || step_days <= 0.0 || step_days > 0.5 {
        return Err(crate::error::Error::Parameter(format!(
            "step_days must lie in (0, 0.5], got {step_days}"
        )));
    }
    Ok((1.0 / step_days).ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_resolution() {
        assert_eq!(substeps_per_day(0.05).unwrap(), 20);
        assert_eq!(substeps_per_day(0.5).unwrap(), 2);
        assert_eq!(substeps_per_day(1e-3).unwrap(), 1000);
        assert_eq!(substeps_per_day(0.3).unwrap(), 4);
        assert!(substeps_per_day(0.6).is_err());
        assert!(substeps_per_day(0.0).is_err());
        assert!(substeps_per_day(-0.1).is_err());
    }

    #[test]
    fn rk4_matches_exact_exponential() {
        // dy/dt = -y, y(0) = 1; after 1.0 in 20 steps the RK4 error is O(dt^4).
        let mut y = [1.0, 0.0, 0.0];
        let deriv = |s: &[f64; 3]| [-s[0], 0.0, 0.0];
        for _ in 0..20 {
            y = rk4_step(&y, 0.05, &deriv);
        }
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-7);
    }
}
