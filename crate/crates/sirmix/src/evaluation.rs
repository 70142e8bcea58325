//! Evaluation of a season's decomposition against surveillance data:
//! strain-fraction construction, per-virus parameter averages across
//! seasons, and a linear estimator of the reported peak value.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::sir::SirParams;
use crate::timeseries::TimeSeries;

/// Per-strain prevalence proxy: the ILI rate times the strain's
/// laboratory detection fraction, week by week.
pub fn strain_fraction(
    ili_rate: &TimeSeries,
    detection_fraction: &TimeSeries,
) -> Result<TimeSeries> {
    if ili_rate.len() != detection_fraction.len() {
        return Err(Error::Data(format!(
            "ILI rate has {} weeks but detection fraction has {}",
            ili_rate.len(),
            detection_fraction.len()
        )));
    }
    if ili_rate.start_date() != detection_fraction.start_date() {
        return Err(Error::Data(format!(
            "week alignment mismatch: ILI starts {} but fractions start {}",
            ili_rate.start_date(),
            detection_fraction.start_date()
        )));
    }
    for (week, &f) in detection_fraction.values().iter().enumerate() {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Data(format!(
                "detection fraction {f} at week {week} is outside [0, 1]"
            )));
        }
    }
    let values = ili_rate
        .values()
        .iter()
        .zip(detection_fraction.values())
        .map(|(a, b)| a * b)
        .collect();
    TimeSeries::new(ili_rate.start_date(), values)
}

/// One component after matching: which virus it was assigned to, its SIR
/// parameters, and the two peak values used by the regression.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedComponent {
    pub virus_name: String,
    pub params: SirParams,
    /// Peak of the component contribution (gain times unit curve).
    pub component_peak: f64,
    /// Peak of the matched reference series within the season.
    pub reference_peak: f64,
    pub pearson_r: f64,
}

/// All matched components of one season.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonMatches {
    pub season: String,
    pub components: Vec<MatchedComponent>,
}

/// Average SIR parameters of the components matched to one virus.
#[derive(Debug, Clone, PartialEq)]
pub struct VirusParamSummary {
    pub virus_name: String,
    pub seasons_matched: usize,
    pub mean_r0: f64,
    pub mean_initial_infected: f64,
}

/// Per-virus mean R0 and I0 over the seasons in which the virus was
/// matched, restricted to viruses matched in at least `min_seasons`
/// seasons. Output is sorted by virus name.
pub fn per_virus_params(seasons: &[SeasonMatches], min_seasons: usize) -> Vec<VirusParamSummary> {
    let mut by_virus: std::collections::BTreeMap<&str, (usize, f64, f64)> =
        std::collections::BTreeMap::new();
    for season in seasons {
        for component in &season.components {
            let entry = by_virus.entry(&component.virus_name).or_insert((0, 0.0, 0.0));
            entry.0 += 1;
            entry.1 += component.params.r0;
            entry.2 += component.params.initial_infected;
        }
    }
    by_virus
        .into_iter()
        .filter(|(_, (count, _, _))| *count >= min_seasons)
        .map(|(name, (count, r0_sum, i0_sum))| VirusParamSummary {
            virus_name: name.to_string(),
            seasons_matched: count,
            mean_r0: r0_sum / count as f64,
            mean_initial_infected: i0_sum / count as f64,
        })
        .collect()
}

/// One (virus, season) observation for the peak regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRow {
    /// Response: the peak reported value for the virus that season.
    pub reference_peak: f64,
    /// The matched component's peak (gain already applied).
    pub component_peak: f64,
    /// Whether the virus is reported through a detection rate rather
    /// than positivity.
    pub rate_reported: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: &'static str,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    /// Two-sided p-value from the t distribution on the residual dof.
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub n_observations: usize,
    /// Residual degrees of freedom, n minus the coefficient count.
    pub dof: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Ordinary least squares of the reference peak on the reporting-type
/// indicator and the component peak, with classical standard errors.
/// The intercept is included by default; `include_intercept = false` is
/// the sensitivity variant.
pub fn peak_regression(rows: &[PeakRow], include_intercept: bool) -> Result<RegressionResult> {
    if rows.len() < 4 {
        return Err(Error::Regression(format!(
            "peak regression needs at least 4 observations, got {}",
            rows.len()
        )));
    }
    let mut names: Vec<&'static str> = Vec::new();
    if include_intercept {
        names.push("intercept");
    }
    names.push("rate_reported");
    names.push("component_peak");

    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            let mut x = Vec::with_capacity(names.len());
            if include_intercept {
                x.push(1.0);
            }
            x.push(if row.rate_reported { 1.0 } else { 0.0 });
            x.push(row.component_peak);
            x
        })
        .collect();
    let response: Vec<f64> = rows.iter().map(|r| r.reference_peak).collect();
    ols(&design, &response, &names)
}

/// OLS with classical covariance; shared by the peak regression and its
/// no-intercept variant.
fn ols(design: &[Vec<f64>], response: &[f64], names: &[&'static str]) -> Result<RegressionResult> {
    let n = design.len();
    let k = names.len();
    if n <= k {
        return Err(Error::Regression(format!(
            "{n} observations cannot identify {k} coefficients"
        )));
    }
    for row in design {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Regression("design matrix contains a non-finite value".into()));
        }
    }
    if response.iter().any(|v| !v.is_finite()) {
        return Err(Error::Regression("response contains a non-finite value".into()));
    }

    // Normal equations.
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &y) in design.iter().zip(response) {
        for i in 0..k {
            xty[i] += row[i] * y;
            for j in 0..k {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    let inverse = invert(&xtx)
        .ok_or_else(|| Error::Regression("singular design matrix (collinear columns)".into()))?;
    let estimates: Vec<f64> =
        (0..k).map(|i| (0..k).map(|j| inverse[i][j] * xty[j]).sum()).collect();

    let fitted: Vec<f64> = design
        .iter()
        .map(|row| row.iter().zip(&estimates).map(|(x, b)| x * b).sum())
        .collect();
    let ss_res: f64 = response.iter().zip(&fitted).map(|(y, f)| (y - f) * (y - f)).sum();
    let mean = response.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = response.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Regression("response is constant, fit is undefined".into()));
    }

    let dof = n - k;
    let sigma2 = ss_res / dof as f64;
    let student = StudentsT::new(0.0, 1.0, dof as f64)
        .map_err(|e| Error::Regression(format!("t distribution: {e}")))?;
    let coefficients = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let std_error = (sigma2 * inverse[i][i]).sqrt();
            let t_value = if std_error > 0.0 {
                estimates[i] / std_error
            } else if estimates[i] == 0.0 {
                0.0
            } else {
                f64::INFINITY * estimates[i].signum()
            };
            let p_value = if t_value.is_finite() {
                2.0 * (1.0 - student.cdf(t_value.abs()))
            } else {
                0.0
            };
            Coefficient { name, estimate: estimates[i], std_error, t_value, p_value }
        })
        .collect();

    Ok(RegressionResult {
        coefficients,
        r_squared: 1.0 - ss_res / ss_tot,
        n_observations: n,
        dof,
    })
}

/// Gauss-Jordan inverse with partial pivoting; `None` on singularity.
fn invert(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let k = matrix.len();
    let mut work: Vec<Vec<f64>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut extended = row.clone();
            extended.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            extended
        })
        .collect();
    for col in 0..k {
        let pivot_row = (col..k).max_by(|&a, &b| {
            work[a][col].abs().partial_cmp(&work[b][col].abs()).unwrap()
        })?;
        if work[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        work.swap(col, pivot_row);
        let pivot = work[col][col];
        for value in work[col].iter_mut() {
            *value /= pivot;
        }
        for row in 0..k {
            if row != col {
                let factor = work[row][col];
                if factor != 0.0 {
                    for j in 0..2 * k {
                        work[row][j] -= factor * work[col][j];
                    }
                }
            }
        }
    }
    Some(work.into_iter().map(|row| row[k..].to_vec()).collect())
}
