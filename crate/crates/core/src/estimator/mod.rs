//! Monte Carlo estimates, exponent fits, ratio constancy and the mixing
//! probe.
//!
//! Quantitative targets are ratios across scales or geometries, so no
//! unknown normalization constant enters.

mod config;
mod fit;
mod mixing;
mod ratio;
mod record;
mod stats;

pub use config::{parse_column, CrossingProbe, ExperimentConfig, FkParams, ObservableSpec, Probe};
pub use fit::{chi2_p_value, fit_exponent, fit_window, ExponentFit, FitPoint, FitSpec};
pub use mixing::{mixing_exact, mixing_probe, MixingResult, MixingSpec};
pub use ratio::{ratio_constancy, Constancy, Measured, RatioInput, RatioRow};
pub use record::{estimate_event_probability, records_from_chains, EstimateRecord};
pub use stats::{batch_means, pooled_batch_means, BatchStats, DEFAULT_BATCHES, MIN_BATCHES};
