//! Scratch probe: decomposition shape of the committed sample season.

use sirmix::dictionary::build_dictionary;
use sirmix::io::config::Config;
use sirmix::io::load_ili_csv;
use sirmix::pursuit::decompose_per_n;

#[test]
#[ignore = "scratch diagnostics"]
fn sample_decomposition_shape() {
    let mut config = Config::default();
    if std::env::var("PROBE_NEGATIVE_GAINS").is_ok() {
        config.pursuit.allow_negative_gain = true;
        println!("negative gains allowed");
    }
    let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/sample_season.csv");
    let signal = load_ili_csv(&path).unwrap();
    let set = build_dictionary(&config.grid, config.season_days, config.step_days).unwrap();
    let runs = decompose_per_n(&signal, &set, &config.pursuit).unwrap();
    for run in &runs {
        println!(
            "N = {:>14.2}: ssr = {:.4e}, k = {}, R2 = {:?}",
            run.population_size,
            run.residual_sq_error(),
            run.components.len(),
            run.final_r2
        );
    }
    let best = runs
        .iter()
        .min_by(|a, b| a.residual_sq_error().partial_cmp(&b.residual_sq_error()).unwrap())
        .unwrap();
    println!(
        "selected N = {:.2}, k = {}, R2 = {:?}",
        best.population_size,
        best.components.len(),
        best.final_r2
    );
    for c in &best.components {
        println!(
            "  atom {} gain {:.1} R0 {:.2} gamma {:.2e} theta {:.0} peak {:.0}@{}",
            c.atom_id,
            c.gain,
            c.params.r0,
            c.params.recovery_rate,
            c.params.phase_days,
            c.contribution.peak().1,
            c.contribution.peak().0
        );
    }
}
