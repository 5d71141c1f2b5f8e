//! Edwards–Sokal audit: spin correlations against connection probabilities.

use serde::Serialize;

use super::fk::ConfigWalker;
use super::{ising_expectation, weighted_sum};
use crate::connectivity::realized_pattern;
use crate::error::Result;
use crate::exec::Exec;
use crate::lattice::{BoundarySpec, LatticeDomain};
use crate::model::{beta_c, ModelGraph, ModelParams};
use crate::patterns::LinkPattern;

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub set: Vec<u32>,
    pub spin: f64,
    pub connection: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub max_residual: f64,
    pub rows: Vec<AuditRow>,
}

/// Subsets of `sites` with 1 ≤ |A| ≤ max_size, even sizes only unless `odd`.
pub fn even_subsets(sites: &[u32], max_size: usize, odd: bool) -> Vec<Vec<u32>> {
    let n = sites.len();
    let mut out = Vec::new();
    for mask in 1u64..1 << n {
        let c = mask.count_ones() as usize;
        if c <= max_size && (odd || c % 2 == 0) {
            out.push((0..n).filter(|&i| mask >> i & 1 == 1).map(|i| sites[i]).collect());
        }
    }
    out.sort_by(|a: &Vec<u32>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Q ∈ 𝒬: every block has even size, except the one holding the ghost
/// (the last point) when `ghost` is set.
fn admissible(q: &LinkPattern, ghost: bool) -> bool {
    let g = q.n();
    q.blocks().iter().all(|b| (ghost && b.contains(&g)) || b.len() % 2 == 0)
}

/// Compare E[σ_A] with Σ_{Q∈𝒬} P[G(Q;A)] at inverse temperature β.
pub fn es_coupling_audit_at(graph: &ModelGraph, beta: f64, sets: &[Vec<u32>], exec: Exec) -> Result<AuditReport> {
    let spin = ising_expectation(graph, beta, sets, exec)?;
    let params = ModelParams::from_beta(beta)?;
    let ghost = graph.plus_ghost();
    let points: Vec<Vec<u32>> = sets
        .iter()
        .map(|a| a.iter().copied().chain(ghost).collect())
        .collect();
    let walker = ConfigWalker::new(graph)?;
    let n = walker.slots();
    let parts = walker.run(
        exec,
        || vec![vec![0i64; n]; sets.len() + 1],
        |h, _, labels, slot| {
            h[0][slot] += 1;
            for (i, pts) in points.iter().enumerate() {
                if admissible(&realized_pattern(labels, pts), ghost.is_some()) {
                    h[i + 1][slot] += 1;
                }
            }
        },
    );
    let mut total = vec![vec![0i64; n]; sets.len() + 1];
    for p in &parts {
        for (t, x) in total.iter_mut().zip(p) {
            t.iter_mut().zip(x).for_each(|(a, b)| *a += b);
        }
    }
    let w = walker.weights(&params);
    let z = weighted_sum(&total[0], &w);
    let mut rows = Vec::with_capacity(sets.len());
    let mut max_residual: f64 = 0.0;
    for (i, set) in sets.iter().enumerate() {
        let s: f64 = spin[i].into();
        let c: f64 = (weighted_sum(&total[i + 1], &w) / z).into();
        let r = (s - c).abs();
        max_residual = max_residual.max(r);
        rows.push(AuditRow { set: set.clone(), spin: s, connection: c, residual: r });
    }
    Ok(AuditReport { max_residual, rows })
}

/// Audit at β_c over all sets of up to four sites (odd sets too when a plus
/// ghost makes them nontrivial).
pub fn es_coupling_audit(domain: &LatticeDomain, bc: &BoundarySpec) -> Result<AuditReport> {
    let graph = ModelGraph::new(domain, bc)?;
    let sites: Vec<u32> = (0..domain.num_sites() as u32).collect();
    let sets = even_subsets(&sites, 4, graph.plus_ghost().is_some());
    es_coupling_audit_at(&graph, beta_c(), &sets, Exec::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, ShapeTag};

    #[test]
    fn single_edge_two_point() {
        let d = LatticeDomain::from_sites(1.0, ShapeTag::Custom, [[0, 0], [1, 0]]).unwrap();
        let r = es_coupling_audit(&d, &BoundarySpec::free()).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!((r.rows[0].spin - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(r.max_residual < 1e-15);
    }

    #[test]
    fn two_by_two_pairs() {
        let d = build_box(1.0, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let r = es_coupling_audit(&d, &BoundarySpec::free()).unwrap();
        // C(4,2) pairs plus the full set
        assert_eq!(r.rows.len(), 7);
        assert!(r.max_residual <= 1e-12, "{}", r.max_residual);
    }

    #[test]
    fn subset_listing() {
        let s = even_subsets(&[0, 1, 2], 3, false);
        assert_eq!(s, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(even_subsets(&[0, 1, 2], 3, true).len(), 7);
    }
}
