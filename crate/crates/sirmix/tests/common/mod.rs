//! Shared helpers for the integration and acceptance suites: seeded
//! Gaussian draws and planted-atom mixture construction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sirmix::dictionary::Dictionary;
use sirmix::timeseries::TimeSeries;

pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Pearson correlation of two curves, or 1.0 when undefined (constant
/// curves are treated as maximally redundant).
pub fn correlation(a: &TimeSeries, b: &TimeSeries) -> f64 {
    sirmix::matcher::pearson(a, b).unwrap_or(1.0)
}

/// Draws `k` distinct atoms from `pool` with pairwise |Pearson| below
/// `limit`, sampling each next atom uniformly from the still-admissible
/// set and restarting when it empties.
pub fn draw_atoms(
    dict: &Dictionary,
    pool: &[usize],
    k: usize,
    limit: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    for _ in 0..200 {
        let mut chosen: Vec<usize> = vec![pool[rng.gen_range(0..pool.len())]];
        while chosen.len() < k {
            let admissible: Vec<usize> = pool
                .iter()
                .copied()
                .filter(|idx| !chosen.contains(idx))
                .filter(|&idx| {
                    chosen.iter().all(|&other| {
                        correlation(&dict.atoms[idx].curve, &dict.atoms[other].curve).abs()
                            < limit
                    })
                })
                .collect();
            if admissible.is_empty() {
                break;
            }
            chosen.push(admissible[rng.gen_range(0..admissible.len())]);
        }
        if chosen.len() == k {
            return chosen;
        }
    }
    panic!("no {k}-atom set with pairwise correlation below {limit} found in 200 restarts");
}

pub struct Mixture {
    pub signal: TimeSeries,
    pub truth: TimeSeries,
    /// (atom_id, gain in unit-curve scale)
    pub planted: Vec<(usize, f64)>,
}

/// Plants `k` atoms with gains drawn as `original_norm * U[0.5, 2)` and
/// adds Gaussian noise at exactly `snr_db` (empirical power).
pub fn plant_mixture(
    dict: &Dictionary,
    pool: &[usize],
    k: usize,
    correlation_limit: f64,
    snr_db: f64,
    rng: &mut ChaCha8Rng,
) -> Mixture {
    let season_days = dict.season_days;
    let indices = draw_atoms(dict, pool, k, correlation_limit, rng);
    let mut truth = vec![0.0; season_days];
    let mut planted = Vec::with_capacity(k);
    for &idx in &indices {
        let atom = &dict.atoms[idx];
        let gain = atom.original_norm * rng.gen_range(0.5..2.0);
        for (acc, v) in truth.iter_mut().zip(atom.curve.values()) {
            *acc += gain * v;
        }
        planted.push((atom.atom_id, gain));
    }
    let power: f64 = truth.iter().map(|v| v * v).sum::<f64>() / season_days as f64;
    let raw: Vec<f64> = (0..season_days).map(|_| standard_normal(rng)).collect();
    let raw_power: f64 = raw.iter().map(|e| e * e).sum::<f64>() / season_days as f64;
    let scale = (power / 10f64.powf(snr_db / 10.0) / raw_power).sqrt();
    let signal: Vec<f64> =
        truth.iter().zip(&raw).map(|(v, e)| v + scale * e).collect();
    Mixture {
        signal: TimeSeries::day_indexed(signal).unwrap(),
        truth: TimeSeries::day_indexed(truth).unwrap(),
        planted,
    }
}
