//! Brute-force enumeration oracles.
//!
//! Every engine reduces its sum to integer histograms over a few exponents
//! (energy, open-edge and cluster counts, weight classes, winding phases)
//! and evaluates them once in double-double arithmetic at the end.

mod audit;
mod cache;
mod fk;
mod free_observable;
mod hightemp;
mod interfaces;
mod ising;
mod observable;

pub use audit::{es_coupling_audit, es_coupling_audit_at, even_subsets, AuditReport};
pub use cache::{sha256_hex, OracleCache};
pub use fk::{enumerate_fk, fk_outcome_distribution, FkEvent};
pub use free_observable::{
    fermionic_observable_free, free_observable_at_corner, free_observable_graph, kappa, FreeObservable,
};
pub use hightemp::{high_temp_Z, high_temp_expectation, GenVertex, HighTempGraph, WeightClass};
pub use interfaces::{trace_interfaces, Interfaces};
pub use ising::{enumerate_ising, ising_expectation};
pub use observable::{fermionic_observable_dobrushin, ObservableField, ObservableReport};
pub use twofloat::TwoFloat;

pub const MAX_ISING_SITES: usize = 20;
pub const MAX_FK_EDGES: usize = 24;
pub const MAX_HIGH_TEMP_EDGES: usize = 24;

/// Number of leading bits fixed per parallel work unit.
pub(crate) fn prefix_bits(n: usize) -> usize {
    n.min(8)
}

pub(crate) fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

pub(crate) fn sqrt2_minus_1() -> TwoFloat {
    tf(2.0).sqrt() - 1.0
}

/// Σ counts·weights in double-double, scanning in index order.
pub(crate) fn weighted_sum(counts: &[i64], weights: &[TwoFloat]) -> TwoFloat {
    counts
        .iter()
        .zip(weights)
        .filter(|(&c, _)| c != 0)
        .fold(tf(0.0), |acc, (&c, &w)| acc + w * c as f64)
}

/// xⁿ with 0⁰ = 1.
pub(crate) fn powu(x: TwoFloat, n: usize) -> TwoFloat {
    if n == 0 {
        tf(1.0)
    } else {
        x.powi(n as i32)
    }
}
