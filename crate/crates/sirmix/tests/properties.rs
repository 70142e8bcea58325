//! Property tests for the spec's standing invariants.

mod common;

use proptest::prelude::*;
use sirmix::dictionary::{Dictionary, DictionaryAtom};
use sirmix::matcher::{match_components, Cadence, MatchOptions, ReferenceSeries};
use sirmix::pursuit::{decompose, PursuitOptions};
use sirmix::sir::{integrate_sir, simulate_sir, SirParams, DEFAULT_STEP_DAYS};
use sirmix::timeseries::TimeSeries;

fn params_strategy() -> impl Strategy<Value = SirParams> {
    (
        1e4f64..1e8,   // population
        1f64..1e3,     // initial infected
        0.2f64..5.0,   // r0
        1e-4f64..0.5,  // gamma
        0f64..100.0,   // theta
    )
        .prop_map(|(n, i0, r0, gamma, theta)| SirParams {
            population_size: n,
            initial_infected: i0.min(n / 2.0),
            r0,
            recovery_rate: gamma,
            phase_days: theta,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conservation_and_monotone_recovered(params in params_strategy()) {
        let traj = simulate_sir(&params, 212, DEFAULT_STEP_DAYS).unwrap();
        let n = params.population_size;
        for day in 0..traj.len() {
            let total = traj.susceptible[day] + traj.infected[day] + traj.recovered[day];
            prop_assert!((total - n).abs() <= 1e-6 * n);
            prop_assert!(traj.susceptible[day] >= 0.0);
            prop_assert!(traj.infected[day] >= 0.0);
            prop_assert!(traj.recovered[day] >= 0.0);
            if day > 0 {
                prop_assert!(traj.recovered[day] >= traj.recovered[day - 1]);
            }
        }
    }

    #[test]
    fn subcritical_infections_never_grow(
        mut params in params_strategy(),
        r0 in 0.05f64..1.0,
    ) {
        params.r0 = r0;
        params.phase_days = 0.0;
        let series = integrate_sir(&params, 212, DEFAULT_STEP_DAYS).unwrap();
        for pair in series.values().windows(2) {
            prop_assert!(pair[1] <= pair[0] * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn halving_the_step_changes_little(params in params_strategy()) {
        let coarse = integrate_sir(&params, 120, 0.05).unwrap();
        let fine = integrate_sir(&params, 120, 0.025).unwrap();
        for (a, b) in coarse.values().iter().zip(fine.values()) {
            let scale = b.abs().max(1.0);
            prop_assert!((a - b).abs() / scale < 1e-4);
        }
    }
}

fn toy_dictionary(curves: &[Vec<f64>]) -> Dictionary {
    let atoms = curves
        .iter()
        .enumerate()
        .map(|(id, values)| {
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            DictionaryAtom {
                params: SirParams {
                    population_size: 1e6,
                    initial_infected: 10.0,
                    r0: 2.0,
                    recovery_rate: 0.1,
                    phase_days: 0.0,
                },
                curve: TimeSeries::day_indexed(values.iter().map(|v| v / norm).collect())
                    .unwrap(),
                original_norm: norm,
                atom_id: id,
            }
        })
        .collect();
    Dictionary { population_size: 1e6, season_days: curves[0].len(), step_days: 0.05, atoms }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The decomposition identity and monotonicity invariants on random
    /// non-negative toy dictionaries and signals.
    #[test]
    fn pursuit_invariants_on_toy_dictionaries(
        curves in proptest::collection::vec(
            proptest::collection::vec(0.0f64..10.0, 16),
            2..6,
        ),
        signal in proptest::collection::vec(0.0f64..50.0, 16),
    ) {
        let curves: Vec<Vec<f64>> = curves
            .into_iter()
            .filter(|c| c.iter().map(|v| v * v).sum::<f64>() > 1e-6)
            .collect();
        prop_assume!(!curves.is_empty());
        let dict = toy_dictionary(&curves);
        let signal = TimeSeries::day_indexed(signal).unwrap();
        let options = PursuitOptions { delta_r2_stop: 1e-6, ..Default::default() };
        let result = decompose(&signal, &dict, &options).unwrap();

        // residual = signal - sum of contributions
        let composite = result.composite();
        for ((s, c), r) in signal
            .values()
            .iter()
            .zip(composite.values())
            .zip(result.residual.values())
        {
            prop_assert!((s - c - r).abs() <= 1e-9 * s.abs().max(1.0));
        }
        // non-negative model, monotone trace, gains positive
        prop_assert!(composite.values().iter().all(|&v| v >= -1e-9));
        for pair in result.r2_trace.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-12);
        }
        for component in &result.components {
            prop_assert!(component.gain > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Injectivity and descending order of greedy matching on random
    /// component/reference structures.
    #[test]
    fn matching_is_injective_and_sorted(
        component_values in proptest::collection::vec(
            proptest::collection::vec(0.0f64..100.0, 35),
            1..6,
        ),
        reference_values in proptest::collection::vec(
            proptest::collection::vec(0.0f64..100.0, 5),
            1..9,
        ),
    ) {
        let start = chrono::NaiveDate::from_ymd_opt(2012, 10, 1).unwrap();
        let components: Vec<TimeSeries> = component_values
            .into_iter()
            .map(|v| TimeSeries::new(start, v).unwrap())
            .collect();
        let references: Vec<ReferenceSeries> = reference_values
            .into_iter()
            .enumerate()
            .map(|(j, v)| ReferenceSeries {
                virus_name: format!("v{j}"),
                cadence: Cadence::Weekly,
                series: TimeSeries::new(start, v).unwrap(),
            })
            .collect();
        match match_components(&components, &references, &MatchOptions::default()) {
            Ok(assignment) => {
                let mut seen_c = std::collections::HashSet::new();
                let mut seen_v = std::collections::HashSet::new();
                for pair in &assignment.pairs {
                    prop_assert!(seen_c.insert(pair.component_index));
                    prop_assert!(seen_v.insert(pair.virus_name.clone()));
                }
                for pair in assignment.pairs.windows(2) {
                    prop_assert!(pair[0].pearson_r >= pair[1].pearson_r);
                }
                let matched = assignment.pairs.len();
                prop_assert_eq!(
                    matched + assignment.unmatched_components.len(),
                    components.len()
                );
                prop_assert_eq!(
                    matched + assignment.unmatched_viruses.len(),
                    references.len()
                );
            }
            // All-undefined correlation tables are a legal outcome for
            // degenerate random draws (e.g. constant series).
            Err(sirmix::Error::Matching(_)) => {}
            Err(other) => prop_assert!(false, "unexpected error {other}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// CSV write/read round trip is the identity.
    #[test]
    fn ili_csv_round_trip(values in proptest::collection::vec(0.0f64..1e6, 1..300)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let series = TimeSeries::new(
            chrono::NaiveDate::from_ymd_opt(2012, 10, 1).unwrap(),
            values,
        )
        .unwrap();
        sirmix::io::write_ili_csv(&series, &path).unwrap();
        let back = sirmix::io::load_ili_csv(&path).unwrap();
        prop_assert_eq!(series, back);
    }
}
