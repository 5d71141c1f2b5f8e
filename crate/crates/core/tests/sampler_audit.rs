//! Swendsen-Wang output against exact enumeration on graphs with at most
//! nine edges, one graph per boundary kind.

use std::collections::BTreeMap;

use fkcorr::estimator::{batch_means, chi2_p_value};
use fkcorr::exact::fk_outcome_distribution;
use fkcorr::lattice::{build_box, BoundarySpec, LatticeDomain};
use fkcorr::model::{ModelGraph, ModelParams};
use fkcorr::sampler::{ChainOptions, FkChain};
use fkcorr::Exec;

const SWEEPS: u64 = 1_000_000;

fn mask(open: &[bool]) -> u32 {
    open.iter().enumerate().map(|(e, &o)| u32::from(o) << e).sum()
}

fn boxed(w: f64, h: f64) -> LatticeDomain {
    build_box(1.0, [[0.0, 0.0], [w, h]]).unwrap()
}

/// Pearson chi-square of bond-state counts, pooling states expected fewer
/// than 5 times into one bin.
fn audit(name: &str, domain: &LatticeDomain, bc: BoundarySpec, seed: u64) {
    let graph = ModelGraph::new(domain, &bc).unwrap();
    assert!(graph.num_edges() <= 9, "{name}: {} edges", graph.num_edges());
    let params = ModelParams::critical();
    let law = fk_outcome_distribution(&graph, &params, Exec::Sequential, |open, _| mask(open)).unwrap();
    let opts = ChainOptions { n_sweeps: SWEEPS, burn_in: 100, thin: 1, seed, chain: 0 };
    let mut chain = FkChain::new(graph, params, opts, Exec::Sequential).unwrap();
    let mut seen: BTreeMap<u32, u64> = BTreeMap::new();
    while chain.advance().is_some() {
        *seen.entry(mask(chain.bonds().as_slice())).or_default() += 1;
    }
    let n = SWEEPS as f64;
    let (mut chi2, mut bins) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (state, p) in &law {
        let expect = f64::from(*p) * n;
        let obs = seen.remove(state).unwrap_or(0) as f64;
        if expect < 5.0 {
            pooled_obs += obs;
            pooled_exp += expect;
        } else {
            chi2 += (obs - expect).powi(2) / expect;
            bins += 1;
        }
    }
    assert!(seen.is_empty(), "{name}: sampler visited states of zero weight: {seen:?}");
    if pooled_exp > 0.0 {
        chi2 += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    let p = chi2_p_value(chi2, bins - 1);
    assert!(p > 0.001, "{name}: chi2 {chi2:.1} on {} dof, p = {p:.2e}", bins - 1);
}

#[test]
fn free_two_by_three() {
    audit("free 2x3", &boxed(1.0, 2.0), BoundarySpec::free(), 1);
}

#[test]
fn wired_three_by_two() {
    audit("wired 3x2", &boxed(2.0, 1.0), BoundarySpec::wired(), 2);
}

#[test]
fn dobrushin_two_by_three() {
    audit("dobrushin 2x3", &boxed(1.0, 2.0), BoundarySpec::dobrushin([0, 0], [1, 2]), 3);
}

#[test]
fn mixed_plus_arc_two_by_two() {
    audit("mixed 2x2", &boxed(1.0, 1.0), BoundarySpec::mixed_free_plus(vec![[0, 0], [1, 0]]), 4);
}

/// P[y₁ ↔ y₂] and σ_{y₁}σ_{y₂} on the same coupled samples.
fn es_consistency(bc: BoundarySpec, seed: u64) {
    let domain = boxed(4.0, 4.0);
    let graph = ModelGraph::new(&domain, &bc).unwrap();
    let (a, b) = (domain.index_of([0, 1]).unwrap(), domain.index_of([3, 4]).unwrap());
    let opts = ChainOptions { n_sweeps: 200_000, burn_in: 100, thin: 1, seed, chain: 0 };
    let mut chain = FkChain::new(graph, ModelParams::critical(), opts, Exec::Sequential).unwrap();
    let mut diff = Vec::new();
    while chain.advance().is_some() {
        let conn = f64::from(u8::from(chain.labels().connected(a, b)));
        let spin = f64::from(chain.spins().spin(a) * chain.spins().spin(b));
        diff.push(conn - spin);
    }
    let s = batch_means(&diff, 32).unwrap();
    assert!(s.mean.abs() <= 3.0 * s.stderr, "{bc:?}: {} ± {}", s.mean, s.stderr);
}

#[test]
fn edwards_sokal_free() {
    es_consistency(BoundarySpec::free(), 11);
}

#[test]
fn edwards_sokal_dobrushin() {
    es_consistency(BoundarySpec::dobrushin([0, 0], [4, 4]), 12);
}
