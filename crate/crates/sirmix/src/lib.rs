//! Decomposing influenza-like-illness signals into SIR components.
//!
//! An aggregate ILI time series mixes several co-circulating pathogens.
//! This crate simulates single- and multi-strain SIR dynamics, builds an
//! overcomplete dictionary of feasible season-long infection curves over a
//! parameter grid, greedily decomposes a daily ILI signal into a sparse
//! non-negative combination of those curves (matching pursuit with an
//! R-squared stopping rule and per-population-size model selection),
//! matches the recovered components to reference virological surveillance
//! series by Pearson correlation without replacement, and evaluates the
//! result with per-virus parameter summaries and a peak-value linear
//! regression.
//!
//! The high-level pipeline:
//!
//! ```
//! use sirmix::dictionary::{build_custom_dictionary, GridSpec};
//! use sirmix::pursuit::{decompose, PursuitOptions};
//! use sirmix::sir::{integrate_sir, SirParams};
//! use sirmix::timeseries::TimeSeries;
//!
//! // A one-atom dictionary and a signal that is 7.3 times that atom.
//! let params = SirParams::new(1e6, 100.0, 2.5, 0.01, 0.0).unwrap();
//! let dict = build_custom_dictionary(&[params], 212, 0.05).unwrap();
//! let signal = dict.atoms[0].curve.scaled(7.3);
//! let result = decompose(&signal, &dict, &PursuitOptions::default()).unwrap();
//! assert_eq!(result.components.len(), 1);
//! assert!((result.components[0].gain - 7.3).abs() < 1e-9);
//! ```
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! results regardless of how many worker threads are active.

pub mod dictionary;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod matcher;
pub mod pursuit;
pub mod sir;
pub mod timeseries;

pub use error::{Error, Result};
pub use timeseries::TimeSeries;
