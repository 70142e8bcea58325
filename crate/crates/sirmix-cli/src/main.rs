//! `sirmix` — simulate SIR systems, build curve dictionaries, decompose
//! ILI series, match components to surveillance data, and evaluate fits.
//!
//! Every subcommand is a pure function of its configuration and input
//! files (up to the manifest timestamp) and writes its outputs plus a
//! `manifest.txt` into `--out-dir`.

mod manifest;
mod matrixfile;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use manifest::Manifest;
use sirmix::dictionary::{build_dictionary, load_dictionary, save_dictionary, DictionarySet};
use sirmix::evaluation::{peak_regression, per_virus_params, PeakRow, RegressionResult};
use sirmix::io::config::Config;
use sirmix::io::records::{
    read_assignment_csv, season_matches, write_assignment_csv, write_component_curves_csv,
    write_composite_csv, write_params_table, write_peakfit_table, AssignmentRecord,
    DecompositionFile,
};
use sirmix::io::{load_ili_csv, load_reference_csv, write_ili_csv, SynthSpec};
use sirmix::matcher::{match_components, MatchStrategy};
use sirmix::pursuit::{decompose_per_n, Decomposition};
use sirmix::sir::{integrate_matrix_sir, simulate_sir, SirParams};

#[derive(Parser)]
#[command(name = "sirmix", version, about)]
struct Cli {
    /// Configuration file (section.key = value). Falls back to the
    /// SIRMIX_CONFIG environment variable, then to built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for dictionary builds and per-N pursuit; 0 uses all
    /// cores. Results are identical for any worker count.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one SIR system and write its daily compartments.
    Simulate {
        #[arg(long)]
        out_dir: PathBuf,
        /// Matrix system description file (multi-strain mode).
        #[arg(long, conflicts_with_all = ["population_size", "initial_infected", "r0", "recovery_rate", "phase"])]
        matrix: Option<PathBuf>,
        #[arg(long)]
        population_size: Option<f64>,
        #[arg(long)]
        initial_infected: Option<f64>,
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        recovery_rate: Option<f64>,
        /// Onset delay in days (scalar mode only).
        #[arg(long, default_value_t = 0.0)]
        phase: f64,
        /// Days to simulate; defaults to the configured season length.
        #[arg(long)]
        horizon_days: Option<usize>,
        #[arg(long)]
        step_days: Option<f64>,
    },
    /// Build the dictionary over the configured grid and cache it.
    BuildDict {
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Decompose a daily ILI CSV into SIR components.
    Decompose {
        #[arg(long)]
        ili: PathBuf,
        /// Dictionary cache from build-dict; omitted = build in memory.
        #[arg(long)]
        dict: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Match decomposition components to reference series.
    Match {
        #[arg(long)]
        decomposition: PathBuf,
        #[arg(long)]
        references: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Correlation floor below which a pair is never committed.
        #[arg(long)]
        floor: Option<f64>,
        /// "greedy" (default) or "optimal" (exhaustive, sensitivity only).
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Aggregate matched seasons into the parameter and peak-fit tables.
    Evaluate {
        /// One per season: LABEL:DECOMPOSITION_FILE:ASSIGNMENT_FILE
        #[arg(long = "season", required = true)]
        seasons: Vec<String>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Viruses must be matched in at least this many seasons to enter
        /// the parameter table.
        #[arg(long, default_value_t = 3)]
        min_seasons: usize,
        /// Comma-separated virus names reported via detection rate
        /// (indicator = 1 in the peak regression).
        #[arg(long)]
        rate_reported: Option<String>,
        /// Also emit the no-intercept regression variant.
        #[arg(long)]
        intercept_sensitivity: bool,
    },
    /// Generate a synthetic season with known ground truth.
    Synth {
        /// Recipe file (seed, snr_db, start, component lines).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Days to generate; defaults to the configured season length.
        #[arg(long)]
        days: Option<usize>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .context("initialising the worker pool")?;
    }
    let (config, config_path) = load_config(cli.config.as_deref())?;

    match cli.command {
        Command::Simulate {
            out_dir,
            matrix,
            population_size,
            initial_infected,
            r0,
            recovery_rate,
            phase,
            horizon_days,
            step_days,
        } => {
            let horizon = horizon_days.unwrap_or(config.season_days);
            let step = step_days.unwrap_or(config.step_days);
            std::fs::create_dir_all(&out_dir)?;
            let mut manifest = Manifest::new("simulate");
            note_config(&mut manifest, config_path.as_deref())?;
            manifest.set("horizon_days", horizon);
            manifest.set("step_days", step);
            match matrix {
                Some(matrix_path) => {
                    cmd_simulate_matrix(&matrix_path, horizon, step, &out_dir, &mut manifest)?
                }
                None => {
                    let missing = |name: &str| bail!("scalar simulate requires --{name}");
                    let Some(population_size) = population_size else {
                        return missing("population-size");
                    };
                    let Some(initial_infected) = initial_infected else {
                        return missing("initial-infected");
                    };
                    let Some(r0) = r0 else { return missing("r0") };
                    let Some(recovery_rate) = recovery_rate else {
                        return missing("recovery-rate");
                    };
                    let params =
                        SirParams::new(population_size, initial_infected, r0, recovery_rate, phase)?;
                    cmd_simulate_scalar(&params, horizon, step, &out_dir, &mut manifest)?;
                }
            }
            manifest.write(&out_dir)?;
        }
        Command::BuildDict { out_dir } => {
            std::fs::create_dir_all(&out_dir)?;
            let set = build_dictionary(&config.grid, config.season_days, config.step_days)?;
            let cache_path = out_dir.join("dictionary.cache");
            save_dictionary(&set, &cache_path)?;
            let mut manifest = Manifest::new("build-dict");
            note_config(&mut manifest, config_path.as_deref())?;
            manifest.set("season_days", config.season_days);
            manifest.set("step_days", config.step_days);
            manifest.set("total_atoms", set.total_atoms());
            for dict in &set.dictionaries {
                manifest.set(
                    &format!("atoms.N_{}", dict.population_size),
                    dict.len(),
                );
            }
            manifest.set_file_hash("output.dictionary", &cache_path)?;
            manifest.write(&out_dir)?;
            println!(
                "dictionary: {} atoms across {} population sizes -> {}",
                set.total_atoms(),
                set.dictionaries.len(),
                cache_path.display()
            );
        }
        Command::Decompose { ili, dict, out_dir } => {
            cmd_decompose(&config, config_path.as_deref(), &ili, dict.as_deref(), &out_dir)?;
        }
        Command::Match { decomposition, references, out_dir, floor, strategy } => {
            let mut options = config.matching;
            if let Some(floor) = floor {
                options.correlation_floor = floor;
            }
            if let Some(strategy) = strategy {
                options.strategy = match strategy.as_str() {
                    "greedy" => MatchStrategy::Greedy,
                    "optimal" => MatchStrategy::Optimal,
                    other => bail!("--strategy must be 'greedy' or 'optimal', got '{other}'"),
                };
            }
            cmd_match(&decomposition, &references, &options, config_path.as_deref(), &out_dir)?;
        }
        Command::Evaluate {
            seasons,
            out_dir,
            min_seasons,
            rate_reported,
            intercept_sensitivity,
        } => {
            cmd_evaluate(
                &seasons,
                min_seasons,
                rate_reported.as_deref(),
                intercept_sensitivity,
                config_path.as_deref(),
                &out_dir,
            )?;
        }
        Command::Synth { spec, out_dir, days } => {
            let season_days = days.unwrap_or(config.season_days);
            std::fs::create_dir_all(&out_dir)?;
            let synth_spec = SynthSpec::from_path(&spec)?;
            let output = sirmix::io::synth_mixture(&synth_spec, season_days, config.step_days)?;
            let ili_path = out_dir.join("ili.csv");
            write_ili_csv(&output.signal, &ili_path)?;
            let truth_path = out_dir.join("truth.csv");
            write_truth_csv(&output, &truth_path)?;
            let minimum =
                output.signal.values().iter().cloned().fold(f64::INFINITY, f64::min);
            if minimum < 0.0 {
                eprintln!(
                    "warning: noise drove the signal down to {minimum}; decompose input \
                     validation requires non-negative values"
                );
            }
            let mut manifest = Manifest::new("synth");
            note_config(&mut manifest, config_path.as_deref())?;
            manifest.set_file_hash("input.spec", &spec)?;
            manifest.set("season_days", season_days);
            manifest.set("components", output.contributions.len());
            if synth_spec.snr_db.is_finite() {
                manifest.set("measured_snr_db", output.measured_snr_db());
            }
            manifest.set_file_hash("output.ili", &ili_path)?;
            manifest.set_file_hash("output.truth", &truth_path)?;
            manifest.write(&out_dir)?;
            println!("synthetic season -> {}", ili_path.display());
        }
    }
    Ok(())
}

fn load_config(flag: Option<&Path>) -> Result<(Config, Option<PathBuf>)> {
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("SIRMIX_CONFIG").map(PathBuf::from));
    match path {
        Some(path) => {
            let config = Config::from_path(&path)
                .with_context(|| format!("loading config {}", path.display()))?;
            Ok((config, Some(path)))
        }
        None => Ok((Config::default(), None)),
    }
}

fn note_config(manifest: &mut Manifest, config_path: Option<&Path>) -> Result<()> {
    match config_path {
        Some(path) => manifest.set_file_hash("config", path)?,
        None => manifest.set("config", "default"),
    }
    Ok(())
}

fn cmd_simulate_scalar(
    params: &SirParams,
    horizon: usize,
    step: f64,
    out_dir: &Path,
    manifest: &mut Manifest,
) -> Result<()> {
    let trajectory = simulate_sir(params, horizon, step)?;
    let path = out_dir.join("simulation.csv");
    let mut out = String::from("day,S,I,R\n");
    for day in 0..trajectory.len() {
        out.push_str(&format!(
            "{day},{},{},{}\n",
            trajectory.susceptible[day], trajectory.infected[day], trajectory.recovered[day]
        ));
    }
    std::fs::write(&path, out)?;
    manifest.set("mode", "scalar");
    manifest.set("population_size", params.population_size);
    manifest.set("initial_infected", params.initial_infected);
    manifest.set("r0", params.r0);
    manifest.set("recovery_rate", params.recovery_rate);
    manifest.set("phase", params.phase_days);
    manifest.set_file_hash("output.simulation", &path)?;
    println!("scalar run -> {}", path.display());
    Ok(())
}

fn cmd_simulate_matrix(
    matrix_path: &Path,
    horizon: usize,
    step: f64,
    out_dir: &Path,
    manifest: &mut Manifest,
) -> Result<()> {
    let state = matrixfile::load_matrix_system(matrix_path)?;
    let trajectory = integrate_matrix_sir(&state, horizon, step)?;
    let v = state.dimension();
    let path = out_dir.join("simulation.csv");
    let mut header = vec!["day".to_string()];
    for k in 1..=v {
        header.push(format!("S_{k}"));
        header.push(format!("I_{k}"));
        header.push(format!("R_{k}"));
    }
    header.push("ili_l1".to_string());
    let mut out = header.join(",");
    out.push('\n');
    for (day, st) in trajectory.iter().enumerate() {
        let mut row = vec![day.to_string()];
        for k in 0..v {
            row.push(st.susceptible[(k, k)].to_string());
            row.push(st.infected[(k, k)].to_string());
            row.push(st.recovered[(k, k)].to_string());
        }
        row.push(st.ili_level().to_string());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(&path, out)?;
    manifest.set("mode", "matrix");
    manifest.set("strains", v);
    manifest.set_file_hash("input.matrix", matrix_path)?;
    manifest.set_file_hash("output.simulation", &path)?;
    println!("matrix run ({v} strains) -> {}", path.display());
    Ok(())
}

fn cmd_decompose(
    config: &Config,
    config_path: Option<&Path>,
    ili_path: &Path,
    dict_path: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let signal = load_ili_csv(ili_path)?;
    if signal.len() != config.season_days {
        bail!(
            "{}: signal spans {} days but season.days = {}",
            ili_path.display(),
            signal.len(),
            config.season_days
        );
    }
    let set: DictionarySet = match dict_path {
        Some(path) => load_dictionary(path, &config.grid, config.season_days, config.step_days)?,
        None => build_dictionary(&config.grid, config.season_days, config.step_days)?,
    };

    let runs = decompose_per_n(&signal, &set, &config.pursuit)?;
    println!("per-N residual squared error:");
    for run in &runs {
        println!(
            "  N = {:>14.2}: ssr = {:.6e}, components = {}, R2 = {}",
            run.population_size,
            run.residual_sq_error(),
            run.components.len(),
            run.final_r2.map_or("undefined".to_string(), |r| format!("{r:.4}")),
        );
    }
    let best: &Decomposition = runs
        .iter()
        .min_by(|a, b| {
            a.residual_sq_error()
                .partial_cmp(&b.residual_sq_error())
                .expect("finite residuals")
                .then(a.population_size.partial_cmp(&b.population_size).expect("finite N"))
        })
        .expect("at least one per-N run");
    println!(
        "selected N = {:.2} with {} components, final R2 = {}",
        best.population_size,
        best.components.len(),
        best.final_r2.map_or("undefined".to_string(), |r| format!("{r:.4}")),
    );

    let decomposition_path = out_dir.join("decomposition.txt");
    DecompositionFile::from_decomposition(best, config.step_days).write(&decomposition_path)?;
    let composite_path = out_dir.join("composite.csv");
    write_composite_csv(&signal, best, &composite_path)?;
    let components_path = out_dir.join("components.csv");
    write_component_curves_csv(best, &components_path)?;

    let mut manifest = Manifest::new("decompose");
    note_config(&mut manifest, config_path)?;
    manifest.set_file_hash("input.ili", ili_path)?;
    if let Some(path) = dict_path {
        manifest.set_file_hash("input.dictionary", path)?;
    } else {
        manifest.set("input.dictionary", "built in memory");
    }
    manifest.set("chosen_population_size", best.population_size);
    manifest.set(
        "final_r2",
        best.final_r2.map_or("undefined".to_string(), |r| r.to_string()),
    );
    manifest.set("component_count", best.components.len());
    manifest.set_file_hash("output.decomposition", &decomposition_path)?;
    manifest.set_file_hash("output.composite", &composite_path)?;
    manifest.set_file_hash("output.components", &components_path)?;
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_match(
    decomposition_path: &Path,
    references_path: &Path,
    options: &sirmix::matcher::MatchOptions,
    config_path: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let decomposition = DecompositionFile::read(decomposition_path)?;
    if decomposition.components.is_empty() {
        bail!(
            "{}: decomposition has no components to match",
            decomposition_path.display()
        );
    }
    let contributions = decomposition.rebuild_contributions()?;
    let references = load_reference_csv(references_path)?;
    let assignment = match_components(&contributions, &references, options)?;

    let records: Vec<AssignmentRecord> = assignment
        .pairs
        .iter()
        .map(|pair| {
            let reference = references
                .iter()
                .find(|r| r.virus_name == pair.virus_name)
                .expect("pair virus comes from the reference list");
            AssignmentRecord {
                component_index: pair.component_index,
                virus_name: pair.virus_name.clone(),
                pearson_r: pair.pearson_r,
                component_peak: decomposition.components[pair.component_index].peak_value,
                reference_peak: reference.series.peak().1,
            }
        })
        .collect();
    let assignment_path = out_dir.join("assignment.csv");
    write_assignment_csv(&records, &assignment_path)?;

    for record in &records {
        println!(
            "component {} -> {} (r = {:.3})",
            record.component_index, record.virus_name, record.pearson_r
        );
    }
    if !assignment.unmatched_components.is_empty() {
        println!("unmatched components: {:?}", assignment.unmatched_components);
    }
    if !assignment.unmatched_viruses.is_empty() {
        println!("unmatched viruses: {:?}", assignment.unmatched_viruses);
    }

    let mut manifest = Manifest::new("match");
    note_config(&mut manifest, config_path)?;
    manifest.set_file_hash("input.decomposition", decomposition_path)?;
    manifest.set_file_hash("input.references", references_path)?;
    manifest.set("pairs", records.len());
    manifest.set("unmatched_components", assignment.unmatched_components.len());
    manifest.set("unmatched_viruses", assignment.unmatched_viruses.len());
    manifest.set_file_hash("output.assignment", &assignment_path)?;
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_evaluate(
    season_args: &[String],
    min_seasons: usize,
    rate_reported: Option<&str>,
    intercept_sensitivity: bool,
    config_path: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let rate_reported_set: BTreeSet<String> = rate_reported
        .map(|list| list.split(',').map(|s| s.trim().to_string()).collect())
        .unwrap_or_default();

    let mut seasons = Vec::with_capacity(season_args.len());
    let mut manifest = Manifest::new("evaluate");
    note_config(&mut manifest, config_path)?;
    for arg in season_args {
        let parts: Vec<&str> = arg.splitn(3, ':').collect();
        if parts.len() != 3 {
            bail!("--season must be LABEL:DECOMPOSITION:ASSIGNMENT, got '{arg}'");
        }
        let (label, dec_path, asg_path) =
            (parts[0], PathBuf::from(parts[1]), PathBuf::from(parts[2]));
        let decomposition = DecompositionFile::read(&dec_path)?;
        let assignments = read_assignment_csv(&asg_path)?;
        seasons.push(season_matches(label, &decomposition, &assignments)?);
        manifest.set_file_hash(&format!("input.{label}.decomposition"), &dec_path)?;
        manifest.set_file_hash(&format!("input.{label}.assignment"), &asg_path)?;
    }

    let summaries = per_virus_params(&seasons, min_seasons);
    let params_path = out_dir.join("params_table.csv");
    write_params_table(&summaries, &params_path)?;
    println!("virus parameter table ({} viruses, >= {min_seasons} seasons):", summaries.len());
    for s in &summaries {
        println!(
            "  {:<28} seasons = {}  mean R0 = {:.2}  mean I0 = {:.0}",
            s.virus_name, s.seasons_matched, s.mean_r0, s.mean_initial_infected
        );
    }

    let rows: Vec<PeakRow> = seasons
        .iter()
        .flat_map(|season| {
            season.components.iter().map(|m| PeakRow {
                reference_peak: m.reference_peak,
                component_peak: m.component_peak,
                rate_reported: rate_reported_set.contains(&m.virus_name),
            })
        })
        .collect();
    let fit = peak_regression(&rows, true)?;
    let peakfit_path = out_dir.join("peakfit_table.csv");
    write_peakfit_table(&fit, &peakfit_path)?;
    print_fit("peak regression (with intercept)", &fit);
    manifest.set("regression.r_squared", fit.r_squared);
    manifest.set("regression.n", fit.n_observations);

    if intercept_sensitivity {
        let no_intercept = peak_regression(&rows, false)?;
        let alt_path = out_dir.join("peakfit_table_no_intercept.csv");
        write_peakfit_table(&no_intercept, &alt_path)?;
        print_fit("peak regression (no intercept)", &no_intercept);
        manifest.set("regression_no_intercept.r_squared", no_intercept.r_squared);
        manifest.set_file_hash("output.peakfit_no_intercept", &alt_path)?;
    }

    manifest.set("seasons", seasons.len());
    manifest.set_file_hash("output.params_table", &params_path)?;
    manifest.set_file_hash("output.peakfit_table", &peakfit_path)?;
    manifest.write(out_dir)?;
    Ok(())
}

fn print_fit(title: &str, fit: &RegressionResult) {
    println!("{title}: R2 = {:.3}, n = {}", fit.r_squared, fit.n_observations);
    for c in &fit.coefficients {
        println!(
            "  {:<16} slope = {:>9.3}  SE = {:>8.3}  p = {:.4}",
            c.name, c.estimate, c.std_error, c.p_value
        );
    }
}

fn write_truth_csv(output: &sirmix::io::SynthOutput, path: &Path) -> Result<()> {
    let mut header = vec!["date".to_string()];
    header.extend((1..=output.contributions.len()).map(|k| format!("component_{k}")));
    let mut text = header.join(",");
    text.push('\n');
    for day in 0..output.signal.len() {
        let mut row = vec![output.signal.date_at(day).to_string()];
        row.extend(output.contributions.iter().map(|c| c.values()[day].to_string()));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}
