//! Continuum correlation functions, Möbius covariance and BPZ checks.
//!
//! Unknown multiplicative constants are set to one; every quantitative
//! check is a ratio or a normalized residual, so they cancel. Only C₃ is
//! numeric.

mod bpz;
mod formulas;
mod mobius;

pub use bpz::{
    bpz_apply, bpz_reading_report, bpz_residual, bpz_residual_with, BpzReading, BpzTerms, ReadingRow, DEFAULT_STEP,
};
pub use formulas::{
    c3, conformal_radius, eval_boundary_r, eval_bulk_boundary, eval_bulk_p3, eval_free_pfaffian, eval_mixed_r,
    eval_observable_f, magnetization_g, mixed_r1_closed, mixed_r2_closed, DomainTag, MAX_MIXED_N,
    ZETA_PRIME_MINUS_ONE,
};
pub use mobius::{
    mobius_covariance_residual, CorrelationFormula, MobiusMap, Slot, BC_CHANGE_WEIGHT, BULK_WEIGHT, SPIN_WEIGHT,
};
