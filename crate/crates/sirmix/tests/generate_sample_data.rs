//! Generator for the committed sample season under `data/`.
//!
//! `data/sample_season.csv` and `data/sample_references.csv` were
//! produced by `regenerate_sample_data` (fixed seeds; rerunning emits
//! byte-identical files). The season is a five-wave synthetic mixture
//! shaped like a winter ILI signal; the references are weekly series
//! derived from five of the waves (scaled, with seeded noise) plus four
//! unrelated series, under the virus names used by UK surveillance.

use chrono::NaiveDate;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sirmix::io::{synth_mixture, SynthComponent, SynthSpec};
use sirmix::sir::SirParams;

fn data_dir() -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn season_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2012, 10, 1).unwrap()
}

pub fn sample_spec() -> SynthSpec {
    let component = |n: f64, i0: f64, r0: f64, gamma: f64, theta: f64, gain: f64| SynthComponent {
        params: SirParams::new(n, i0, r0, gamma, theta).unwrap(),
        gain,
    };
    SynthSpec {
        components: vec![
            // Autumn wave already declining at season start (RSV-like).
            component(1e6, 30000.0, 0.3, 0.040, 0.0, 0.12),
            // Mid-winter wave (influenza A-like).
            component(1e6, 10000.0, 5.0, 0.010, 0.0, 0.012),
            // Late-winter wave (influenza B-like).
            component(1e6, 10000.0, 5.0, 0.010, 90.0, 0.008),
            // Slow season-long build-up (rhinovirus-like) keeping the
            // signal floor well above the noise.
            component(1e6, 10000.0, 4.0, 0.001, 20.0, 0.015),
        ],
        snr_db: 25.0,
        seed: 20121001,
        start_date: season_start(),
    }
}

#[test]
#[ignore = "writes the committed files under data/"]
fn regenerate_sample_data() {
    let spec = sample_spec();
    let output = synth_mixture(&spec, 212, 0.05).unwrap();
    let minimum = output.signal.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let maximum = output.signal.values().iter().cloned().fold(f64::MIN, f64::max);
    println!("signal range [{minimum:.1}, {maximum:.1}]");
    assert!(minimum >= 0.0, "sample must stay non-negative, got {minimum}");

    // Daily ILI CSV.
    sirmix::io::write_ili_csv(&output.signal, &data_dir().join("sample_season.csv")).unwrap();

    // Weekly references: 30 weeks starting with the season.
    let weeks = 30usize;
    let virus_for_component = ["RSV", "Influenza A(H3)", "Influenza B", "Rhinovirus"];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rows: Vec<(NaiveDate, String, f64)> = Vec::new();
    for (component, virus) in output.contributions.iter().zip(virus_for_component) {
        let peak = component.values().iter().cloned().fold(f64::MIN, f64::max);
        for week in 0..weeks {
            let start = 7 * week;
            let mean: f64 =
                component.values()[start..start + 7].iter().sum::<f64>() / 7.0;
            // Positivity-like percentage with mild multiplicative noise.
            let value = (mean / peak * 24.0) * (1.0 + 0.08 * (rng.gen::<f64>() - 0.5));
            rows.push((
                season_start() + chrono::Duration::weeks(week as i64),
                virus.to_string(),
                (value.max(0.0) * 1000.0).round() / 1000.0,
            ));
        }
    }
    // Unrelated series: bumps that match none of the components.
    let extras = [
        ("Influenza A(H1N1)pdm09", 6.0_f64, 3.0_f64),
        ("Influenza A(not subtyped)", 12.0, 4.0),
        ("Parainfluenza", 16.0, 4.5),
        ("Adenovirus", 20.0, 5.0),
        ("hMPV", 26.0, 3.5),
    ];
    for (virus, center_week, width) in extras {
        for week in 0..weeks {
            let z = (week as f64 - center_week) / width;
            let value = 8.0 * (-0.5 * z * z).exp() + 0.5 * rng.gen::<f64>();
            rows.push((
                season_start() + chrono::Duration::weeks(week as i64),
                virus.to_string(),
                (value * 1000.0).round() / 1000.0,
            ));
        }
    }
    rows.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut text = String::from("week_start,virus,value\n");
    for (week, virus, value) in rows {
        text.push_str(&format!("{week},{virus},{value}\n"));
    }
    std::fs::write(data_dir().join("sample_references.csv"), text).unwrap();
    println!("sample data written under {}", data_dir().display());
}
