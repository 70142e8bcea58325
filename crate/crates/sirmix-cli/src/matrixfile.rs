//! Parser for the plain-text matrix system description used by
//! `sirmix simulate --matrix`:
//!
//! ```text
//! v = 2
//! beta  = 2.5e-7 0 ; 0 3.0e-7   # rows separated by ';'
//! gamma = 0.1 0 ; 0 0.2
//! s0    = 999900 0 ; 0 999800
//! i0    = 100 0 ; 0 200
//! r0    = 0 0 ; 0 0             # optional, defaults to zeros
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DMatrix;
use sirmix::sir::MultiSirState;

pub fn load_matrix_system(path: &Path) -> Result<MultiSirState> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading matrix file {}", path.display()))?;
    let mut dimension: Option<usize> = None;
    let mut matrices: std::collections::HashMap<String, DMatrix<f64>> =
        std::collections::HashMap::new();

    for (line_no, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{} line {}: expected 'key = value'", path.display(), line_no + 1))?;
        let key = key.trim();
        let value = value.trim();
        if key == "v" {
            dimension = Some(value.parse().with_context(|| {
                format!("{} line {}: bad dimension '{value}'", path.display(), line_no + 1)
            })?);
            continue;
        }
        let v = dimension
            .ok_or_else(|| anyhow!("{}: 'v = <dimension>' must come first", path.display()))?;
        let rows: Vec<&str> = value.split(';').map(str::trim).collect();
        if rows.len() != v {
            bail!(
                "{} line {}: '{key}' has {} rows, expected {v}",
                path.display(),
                line_no + 1,
                rows.len()
            );
        }
        let mut entries = Vec::with_capacity(v * v);
        for row in &rows {
            let numbers: Vec<f64> = row
                .split_whitespace()
                .map(|tok| {
                    tok.parse().with_context(|| {
                        format!("{} line {}: bad number '{tok}'", path.display(), line_no + 1)
                    })
                })
                .collect::<Result<_>>()?;
            if numbers.len() != v {
                bail!(
                    "{} line {}: row of '{key}' has {} entries, expected {v}",
                    path.display(),
                    line_no + 1,
                    numbers.len()
                );
            }
            entries.extend(numbers);
        }
        matrices.insert(key.to_string(), DMatrix::from_row_slice(v, v, &entries));
    }

    let v = dimension.ok_or_else(|| anyhow!("{}: missing 'v = <dimension>'", path.display()))?;
    let mut take = |key: &str| -> Result<DMatrix<f64>> {
        matrices
            .remove(key)
            .ok_or_else(|| anyhow!("{}: missing matrix '{key}'", path.display()))
    };
    let beta = take("beta")?;
    let gamma = take("gamma")?;
    let s0 = take("s0")?;
    let i0 = take("i0")?;
    let r0 = matrices.remove("r0").unwrap_or_else(|| DMatrix::zeros(v, v));
    if let Some(extra) = matrices.keys().next() {
        bail!("{}: unknown matrix '{extra}'", path.display());
    }
    Ok(MultiSirState::new(s0, i0, r0, beta, gamma)?)
}
