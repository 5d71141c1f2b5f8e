//! Spatial mixing: sensitivity of an inner-box event to the outer
//! boundary condition.

use serde::{Deserialize, Serialize};

use super::config::CrossingProbe;
use super::stats::{batch_means, DEFAULT_BATCHES};
use crate::error::{Error, Result};
use crate::exact::fk_outcome_distribution;
use crate::exec::Exec;
use crate::lattice::{build_box, BoundarySpec, LatticeDomain};
use crate::model::{ModelGraph, ModelParams};
use crate::sampler::{ChainOptions, FkChain};

/// Inner box of `inner` vertices per side centred in an outer box of
/// `outer` vertices per side. The event is a left-right crossing of the
/// inner box by open edges inside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingSpec {
    pub inner: usize,
    pub outer: usize,
    pub pi: BoundarySpec,
    pub tau: BoundarySpec,
    /// Enforce 10·inner < outer.
    pub strict: bool,
}

impl MixingSpec {
    pub fn free_vs_wired(inner: usize, outer: usize) -> Self {
        Self { inner, outer, pi: BoundarySpec::free(), tau: BoundarySpec::wired(), strict: true }
    }

    fn build(&self) -> Result<(LatticeDomain, CrossingProbe)> {
        if self.inner < 2 || self.outer <= self.inner {
            return Err(Error::Config(format!("need 2 ≤ inner < outer, got {} and {}", self.inner, self.outer)));
        }
        if self.strict && 10 * self.inner >= self.outer {
            return Err(Error::Config(format!(
                "mixing needs 10·N < M, got N = {} and M = {}",
                self.inner, self.outer
            )));
        }
        let m = (self.outer - 1) as f64;
        let domain = build_box(1.0, [[0.0, 0.0], [m, m]])?;
        let lo = ((self.outer - self.inner) / 2) as i64;
        let hi = lo + self.inner as i64 - 1;
        let probe = CrossingProbe::new(&domain, [[lo, lo], [hi, hi]])?;
        Ok((domain, probe))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingResult {
    pub mu_pi: f64,
    pub mu_pi_err: f64,
    pub mu_tau: f64,
    pub mu_tau_err: f64,
    /// |μ^π(A) − μ^τ(A)| / μ^π(A)
    pub discrepancy: f64,
    pub error: f64,
}

impl MixingResult {
    fn from_parts(a: (f64, f64), b: (f64, f64)) -> Result<Self> {
        if !(a.0 > 0.0) {
            return Err(Error::InsufficientData("event never seen under π".into()));
        }
        let d = (a.0 - b.0).abs() / a.0;
        let err = ((b.1 / a.0).powi(2) + (b.0 * a.1 / (a.0 * a.0)).powi(2)).sqrt();
        Ok(Self { mu_pi: a.0, mu_pi_err: a.1, mu_tau: b.0, mu_tau_err: b.1, discrepancy: d, error: err })
    }
}

/// Monte Carlo estimate; π runs as chain 0 and τ as chain 1 of `seed`.
pub fn mixing_probe(spec: &MixingSpec, params: ModelParams, sweeps: u64, burn_in: u64, seed: u64, exec: Exec) -> Result<MixingResult> {
    let (domain, probe) = spec.build()?;
    let run = |bc: &BoundarySpec, chain: u64| -> Result<(f64, f64)> {
        let graph = ModelGraph::new(&domain, bc)?;
        let opts = ChainOptions { n_sweeps: sweeps, burn_in, thin: 1, seed, chain };
        let mut fk = FkChain::new(graph, params, opts, exec)?;
        let mut xs = Vec::with_capacity(sweeps as usize);
        while fk.advance().is_some() {
            xs.push(if probe.eval(fk.bonds().as_slice()) { 1.0 } else { 0.0 });
        }
        let s = batch_means(&xs, DEFAULT_BATCHES)?;
        Ok((s.mean, s.stderr))
    };
    MixingResult::from_parts(run(&spec.pi, 0)?, run(&spec.tau, 1)?)
}

/// Exact discrepancy by enumeration of both outer measures.
pub fn mixing_exact(spec: &MixingSpec, params: ModelParams) -> Result<MixingResult> {
    let (domain, probe) = spec.build()?;
    let prob = |bc: &BoundarySpec| -> Result<f64> {
        let graph = ModelGraph::new(&domain, bc)?;
        let law = fk_outcome_distribution(&graph, &params, Exec::default(), |open, _| probe.eval(open))?;
        Ok(law.get(&true).map(|&v| f64::from(v)).unwrap_or(0.0))
    };
    MixingResult::from_parts((prob(&spec.pi)?, 0.0), (prob(&spec.tau)?, 0.0))
}
