//! Exact Ising expectations by summing over all spin assignments.

use twofloat::TwoFloat;

use super::{powu, prefix_bits, tf, weighted_sum, MAX_ISING_SITES};
use crate::error::{capacity, Error, Result};
use crate::exec::Exec;
use crate::lattice::{BoundarySpec, LatticeDomain};
use crate::model::ModelGraph;

const PLUS: u32 = u32::MAX;

struct SpinProblem {
    nvars: usize,
    // neighbouring variables, one entry per coupling edge
    adj: Vec<Vec<u32>>,
    // couplings to the plus ghost
    field: Vec<i32>,
    // edges whose product is identically +1
    constant: i32,
    num_edges: i32,
    masks: Vec<u32>,
}

impl SpinProblem {
    fn new(graph: &ModelGraph, sets: &[Vec<u32>]) -> Result<Self> {
        capacity("Ising sites", graph.num_sites(), MAX_ISING_SITES)?;
        let n = graph.num_sites();
        let mut var = vec![PLUS; graph.num_nodes()];
        let mut nvars = 0u32;
        let fused: std::collections::HashSet<u32> = graph.fused().iter().map(|f| f[0]).collect();
        for s in 0..n as u32 {
            if !fused.contains(&s) {
                var[s as usize] = nvars;
                nvars += 1;
            }
        }
        for g in n as u32..graph.num_nodes() as u32 {
            if !graph.is_pinned(g) {
                var[g as usize] = nvars;
                nvars += 1;
            }
        }
        for &[s, g] in graph.fused() {
            var[s as usize] = var[g as usize];
        }
        let nv = nvars as usize;
        let mut adj = vec![Vec::new(); nv];
        let mut field = vec![0; nv];
        let mut constant = 0;
        for &[a, b] in graph.edges() {
            let (va, vb) = (var[a as usize], var[b as usize]);
            match (va, vb) {
                _ if va == vb => constant += 1,
                (PLUS, v) | (v, PLUS) => field[v as usize] += 1,
                _ => {
                    adj[va as usize].push(vb);
                    adj[vb as usize].push(va);
                }
            }
        }
        let mut masks = Vec::with_capacity(sets.len());
        for set in sets {
            let mut m = 0u32;
            for &s in set {
                if s as usize >= n {
                    return Err(Error::InvalidPoint(format!("site index {s} is outside the domain")));
                }
                if var[s as usize] != PLUS {
                    m ^= 1 << var[s as usize];
                }
            }
            masks.push(m);
        }
        Ok(Self { nvars: nv, adj, field, constant, num_edges: graph.num_edges() as i32, masks })
    }

    fn energy(&self, minus: u32) -> i32 {
        let s = |v: u32| if minus >> v & 1 == 1 { -1 } else { 1 };
        let mut e = self.constant;
        for v in 0..self.nvars as u32 {
            e += self.field[v as usize] * s(v);
            for &u in &self.adj[v as usize] {
                if u > v {
                    e += s(u) * s(v);
                }
            }
        }
        e
    }

    /// Histograms indexed by energy + num_edges: partition function counts,
    /// then signed counts per set.
    fn chunk(&self, prefix: u32, low: usize) -> Vec<Vec<i64>> {
        let width = 2 * self.num_edges as usize + 1;
        let mut h = vec![vec![0i64; width]; self.masks.len() + 1];
        let mut minus = prefix << low;
        let mut e = self.energy(minus);
        let mut record = |minus: u32, e: i32| {
            let idx = (e + self.num_edges) as usize;
            h[0][idx] += 1;
            for (k, &m) in self.masks.iter().enumerate() {
                h[k + 1][idx] += if (minus & m).count_ones() % 2 == 0 { 1 } else { -1 };
            }
        };
        record(minus, e);
        for t in 1u64..1 << low {
            let v = t.trailing_zeros();
            let sv = if minus >> v & 1 == 1 { -1 } else { 1 };
            let mut local = self.field[v as usize];
            for &u in &self.adj[v as usize] {
                local += if minus >> u & 1 == 1 { -1 } else { 1 };
            }
            e -= 2 * sv * local;
            minus ^= 1 << v;
            record(minus, e);
        }
        h
    }
}

/// E[σ_A] for each requested site set, on an already built model graph.
pub fn ising_expectation(graph: &ModelGraph, beta: f64, sets: &[Vec<u32>], exec: Exec) -> Result<Vec<TwoFloat>> {
    if !(beta >= 0.0) {
        return Err(Error::Config(format!("beta must be non-negative, got {beta}")));
    }
    let prob = SpinProblem::new(graph, sets)?;
    let k = prefix_bits(prob.nvars);
    let low = prob.nvars - k;
    let parts = exec.map(1 << k, |c| prob.chunk(c as u32, low));
    let mut total = parts[0].clone();
    for p in &parts[1..] {
        for (t, x) in total.iter_mut().zip(p) {
            t.iter_mut().zip(x).for_each(|(a, b)| *a += b);
        }
    }
    // weights e^{β(E − |E|)} = (1 − p)^{(|E| − E)/2}, with p the matching bond weight
    let m = prob.num_edges;
    let x = tf(1.0) - tf(-(-2.0 * beta).exp_m1());
    let weights: Vec<TwoFloat> = (-m..=m).map(|e| powu(x, ((m - e) / 2) as usize)).collect();
    let z = weighted_sum(&total[0], &weights);
    Ok(total[1..].iter().map(|h| weighted_sum(h, &weights) / z).collect())
}

/// Exact Gibbs expectations E[σ_A] under the boundary condition `bc`.
pub fn enumerate_ising(domain: &LatticeDomain, bc: &BoundarySpec, beta: f64, sets: &[Vec<u32>]) -> Result<Vec<TwoFloat>> {
    let graph = ModelGraph::new(domain, bc)?;
    ising_expectation(&graph, beta, sets, Exec::default())
}
