//! Model parameters and the effective graph with boundary ghosts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoundaryKind, BoundarySpec, LatticeDomain, DIRS};

/// β_c = ½ ln(1 + √2).
pub fn beta_c() -> f64 {
    0.5 * (1.0 + std::f64::consts::SQRT_2).ln()
}

/// p_c(q) = √q / (1 + √q).
pub fn p_c(q: f64) -> f64 {
    q.sqrt() / (1.0 + q.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub q: f64,
    pub p: f64,
    pub beta: f64,
    pub critical: bool,
}

impl ModelParams {
    pub fn critical() -> Self {
        Self { q: 2.0, p: p_c(2.0), beta: beta_c(), critical: true }
    }

    /// Ising coupling β with the matching Edwards–Sokal bond weight.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::Config(format!("beta must be non-negative, got {beta}")));
        }
        Ok(Self { q: 2.0, p: -(-2.0 * beta).exp_m1(), beta, critical: false })
    }

    /// Random-cluster parameters; β follows from p = 1 − e^{−2β}.
    pub fn fk(p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(q > 0.0) {
            return Err(Error::Config(format!("need p in [0,1] and q > 0, got p={p}, q={q}")));
        }
        Ok(Self { q, p, beta: -0.5 * (-p).ln_1p(), critical: false })
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) || !(self.beta >= 0.0) || !(self.q > 0.0) {
            return Err(Error::Config("invalid model parameters".into()));
        }
        if self.critical {
            let ok = (self.p - p_c(self.q)).abs() < 1e-12
                && (self.beta - beta_c()).abs() < 1e-12
                && (self.p + (-2.0 * self.beta).exp_m1()).abs() < 1e-12;
            if !ok {
                return Err(Error::Config("parameters flagged critical are not critical".into()));
            }
        }
        Ok(())
    }
}

/// Domain graph plus ghost vertices implementing the boundary condition.
///
/// Nodes `0..num_sites` are domain sites, followed by ghosts. Edges are the
/// domain edges followed by coupling edges to the plus ghost. Wired arcs
/// are identified with a ghost rather than joined by edges.
#[derive(Clone, Debug)]
pub struct ModelGraph {
    kind: BoundaryKind,
    num_sites: usize,
    pinned: Vec<bool>,
    plus: Option<u32>,
    edges: Vec<[u32; 2]>,
    num_domain_edges: usize,
    fused: Vec<[u32; 2]>,
    boundary: Vec<u32>,
    marked: Vec<u32>,
}

impl ModelGraph {
    pub fn new(domain: &LatticeDomain, bc: &BoundarySpec) -> Result<Self> {
        let r = bc.resolve(domain)?;
        let n = domain.num_sites();
        let mut g = ModelGraph {
            kind: bc.kind,
            num_sites: n,
            pinned: Vec::new(),
            plus: None,
            edges: domain.edges().to_vec(),
            num_domain_edges: domain.num_edges(),
            fused: Vec::new(),
            boundary: domain.boundary_sites().collect(),
            marked: r.marked.clone(),
        };
        if !r.plus_fused.is_empty() || !r.plus_coupled.is_empty() {
            let ghost = n as u32;
            g.pinned.push(true);
            g.plus = Some(ghost);
            g.fused.extend(r.plus_fused.iter().map(|&s| [s, ghost]));
            for &s in &r.plus_coupled {
                let p = domain.site(s);
                for d in DIRS {
                    if !domain.contains([p[0] + d[0], p[1] + d[1]]) {
                        g.edges.push([s, ghost]);
                    }
                }
            }
        }
        for block in &r.free_blocks {
            let ghost = (n + g.pinned.len()) as u32;
            g.pinned.push(false);
            g.fused.extend(block.iter().map(|&s| [s, ghost]));
        }
        Ok(g)
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn num_nodes(&self) -> usize {
        self.num_sites + self.pinned.len()
    }

    pub fn num_ghosts(&self) -> usize {
        self.pinned.len()
    }

    pub fn is_pinned(&self, node: u32) -> bool {
        (node as usize) >= self.num_sites && self.pinned[node as usize - self.num_sites]
    }

    /// The ghost held at +1, if the boundary condition has one.
    pub fn plus_ghost(&self) -> Option<u32> {
        self.plus
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_domain_edges(&self) -> usize {
        self.num_domain_edges
    }

    /// (site, ghost) identifications.
    pub fn fused(&self) -> &[[u32; 2]] {
        &self.fused
    }

    pub fn boundary_sites(&self) -> &[u32] {
        &self.boundary
    }

    pub fn marked(&self) -> &[u32] {
        &self.marked
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_box;

    #[test]
    fn critical_point_identities() {
        let m = ModelParams::critical();
        assert!((m.p - (2.0 - std::f64::consts::SQRT_2)).abs() < 1e-15);
        assert!((m.beta.tanh() - (std::f64::consts::SQRT_2 - 1.0)).abs() < 1e-15);
        m.validate().unwrap();
        let b = ModelParams::from_beta(beta_c()).unwrap();
        assert!((b.p - m.p).abs() < 1e-15);
        let mut bad = m;
        bad.p = 0.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ghosts_per_kind() {
        let d = build_box(1.0, [[0.0, 0.0], [3.0, 1.0]]).unwrap();
        let free = ModelGraph::new(&d, &BoundarySpec::free()).unwrap();
        assert_eq!(free.num_ghosts(), 0);
        let wired = ModelGraph::new(&d, &BoundarySpec::wired()).unwrap();
        assert_eq!(wired.fused().len(), 8);
        let mixed = ModelGraph::new(&d, &BoundarySpec::mixed_free_plus(vec![[0, 0], [1, 0], [2, 0]])).unwrap();
        // (1,0) has one outside neighbour, (2,0) one as well
        assert_eq!(mixed.num_edges(), d.num_edges() + 2);
        assert!(mixed.is_pinned(mixed.plus_ghost().unwrap()));
    }
}
