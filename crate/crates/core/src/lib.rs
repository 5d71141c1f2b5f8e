//! Critical FK-Ising random-cluster model on square-lattice domains.
//!
//! * [`lattice`]: domains, boundary conditions, medial graphs.
//! * [`patterns`]: link patterns, pair partitions, Pfaffians.
//! * [`sampler`]: Swendsen–Wang dynamics and Edwards–Sokal bonds.
//! * [`connectivity`]: cluster labels and connection events.
//! * [`exact`]: brute-force enumeration oracles.
//! * [`continuum`]: continuum correlation formulas and their checks.
//! * [`estimator`]: Monte Carlo estimates, fits and probes.
//! * [`campaign`]: config-driven sampling runs with CSV output.

pub mod campaign;
pub mod connectivity;
pub mod continuum;
mod error;
pub mod estimator;
pub mod exact;
pub mod exec;
pub mod lattice;
pub mod model;
pub mod patterns;
pub mod rng;
pub mod sampler;
pub mod unionfind;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
