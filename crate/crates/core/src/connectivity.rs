//! Cluster labelling and connection events on bond configurations.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::lattice::{ball_boundary, LatticeDomain, Point};
use crate::model::ModelGraph;
use crate::patterns::{connection_partition, LinkPattern};
use crate::sampler::BondConfiguration;
use crate::unionfind::UnionFind;

/// Cluster id per node (sites, then ghosts), canonicalized to the least
/// node index in the cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLabeling {
    label: Vec<u32>,
    cluster_count: usize,
    num_sites: usize,
}

impl ClusterLabeling {
    pub(crate) fn from_union_find(uf: &mut UnionFind, num_sites: usize) -> Self {
        let n = uf.len();
        let mut least = vec![u32::MAX; n];
        let mut label = vec![0u32; n];
        let mut count = 0;
        for i in 0..n as u32 {
            let r = uf.find(i) as usize;
            if least[r] == u32::MAX {
                least[r] = i;
                count += 1;
            }
            label[i as usize] = least[r];
        }
        Self { label, cluster_count: count, num_sites }
    }

    pub(crate) fn refill(&mut self, uf: &mut UnionFind, scratch: &mut Vec<u32>) {
        let n = uf.len();
        scratch.clear();
        scratch.resize(n, u32::MAX);
        self.label.resize(n, 0);
        let mut count = 0;
        for i in 0..n as u32 {
            let r = uf.find(i) as usize;
            if scratch[r] == u32::MAX {
                scratch[r] = i;
                count += 1;
            }
            self.label[i as usize] = scratch[r];
        }
        self.cluster_count = count;
    }

    pub fn label(&self, node: u32) -> u32 {
        self.label[node as usize]
    }

    pub fn labels(&self) -> &[u32] {
        &self.label
    }

    /// k(ω^π): clusters after boundary identification, ghosts included.
    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn connected(&self, a: u32, b: u32) -> bool {
        self.label[a as usize] == self.label[b as usize]
    }
}

/// Union-find over open edges and the boundary identifications.
pub fn label_clusters(graph: &ModelGraph, bonds: &BondConfiguration) -> ClusterLabeling {
    let mut uf = UnionFind::new(graph.num_nodes());
    for &[s, g] in graph.fused() {
        uf.union(s, g);
    }
    for (e, &[a, b]) in graph.edges().iter().enumerate() {
        if bonds.is_open(e) {
            uf.union(a, b);
        }
    }
    ClusterLabeling::from_union_find(&mut uf, graph.num_sites())
}

fn check_nodes(labels: &ClusterLabeling, points: &[u32]) -> Result<()> {
    match points.iter().find(|&&p| p as usize >= labels.num_sites) {
        Some(p) => Err(Error::InvalidPoint(format!("site index {p} is outside the domain"))),
        None => Ok(()),
    }
}

/// G(Q; points): the clusters of the points realize exactly the pattern Q.
pub fn check_link_event(labels: &ClusterLabeling, points: &[u32], q: &LinkPattern) -> Result<bool> {
    if points.len() != q.n() {
        return Err(Error::Config(format!("{} points for a pattern on {}", points.len(), q.n())));
    }
    check_nodes(labels, points)?;
    Ok(link_event_unchecked(labels, points, q))
}

pub(crate) fn link_event_unchecked(labels: &ClusterLabeling, points: &[u32], q: &LinkPattern) -> bool {
    q.blocks().iter().all(|b| b.iter().all(|&i| labels.connected(points[i - 1], points[b[0] - 1])))
        && q.blocks().iter().enumerate().all(|(i, bi)| {
            q.blocks()[i + 1..]
                .iter()
                .all(|bj| !labels.connected(points[bi[0] - 1], points[bj[0] - 1]))
        })
}

/// Permissive variant: requested connections only, separations unchecked.
/// Not used by the acceptance suite.
pub fn check_link_connections(labels: &ClusterLabeling, points: &[u32], q: &LinkPattern) -> Result<bool> {
    if points.len() != q.n() {
        return Err(Error::Config(format!("{} points for a pattern on {}", points.len(), q.n())));
    }
    check_nodes(labels, points)?;
    Ok(q.blocks().iter().all(|b| b.iter().all(|&i| labels.connected(points[i - 1], points[b[0] - 1]))))
}

/// Link pattern realized by the given points.
pub fn realized_pattern(labels: &ClusterLabeling, points: &[u32]) -> LinkPattern {
    let ls: Vec<u32> = points.iter().map(|&p| labels.label(p)).collect();
    connection_partition(&ls)
}

/// Precomputed annulus crossing A_{r,R}(z).
#[derive(Clone, Debug)]
pub struct ArmProbe {
    inner: Vec<u32>,
    outer: Vec<u32>,
}

impl ArmProbe {
    pub fn new(domain: &LatticeDomain, z: [f64; 2], r: f64, big_r: f64) -> Result<Self> {
        if !(r < big_r) {
            return Err(Error::Config(format!("need r < R, got r={r}, R={big_r}")));
        }
        let inner = ball_boundary(domain, z, r);
        let outer = ball_boundary(domain, z, big_r);
        if inner.is_empty() || outer.is_empty() {
            return Err(Error::UndefinedEvent(format!("empty discrete circle around {z:?} (r={r}, R={big_r})")));
        }
        Ok(Self { inner, outer })
    }

    /// One-arm event from a site to ∂B_R around it.
    pub fn one_arm(domain: &LatticeDomain, z: Point, big_r: f64) -> Result<Self> {
        let i = crate::lattice::site_or_err(domain, z)?;
        let outer = ball_boundary(domain, domain.position(i), big_r);
        if outer.is_empty() {
            return Err(Error::UndefinedEvent(format!("empty discrete circle around {z:?} (R={big_r})")));
        }
        Ok(Self { inner: vec![i], outer })
    }

    pub fn eval(&self, labels: &ClusterLabeling) -> bool {
        if self.inner.len() == 1 {
            let l = labels.label(self.inner[0]);
            return self.outer.iter().any(|&o| labels.label(o) == l);
        }
        let inner: HashSet<u32> = self.inner.iter().map(|&i| labels.label(i)).collect();
        self.outer.iter().any(|&o| inner.contains(&labels.label(o)))
    }

    pub fn sites(&self) -> (&[u32], &[u32]) {
        (&self.inner, &self.outer)
    }
}

/// A_{r,R}(z): ∂B_r(z) and ∂B_R(z) share a cluster.
pub fn arm_event(labels: &ClusterLabeling, domain: &LatticeDomain, z: [f64; 2], r: f64, big_r: f64) -> Result<bool> {
    Ok(ArmProbe::new(domain, z, r, big_r)?.eval(labels))
}

/// z ↔ ∂Ω. Under wired conditions every boundary site carries the ghost's
/// label, so this reduces to sharing the ghost cluster.
pub fn boundary_connection(labels: &ClusterLabeling, graph: &ModelGraph, z: u32) -> bool {
    let l = labels.label(z);
    graph.boundary_sites().iter().any(|&b| labels.label(b) == l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, BoundarySpec};

    fn setup(kind: BoundarySpec) -> (LatticeDomain, ModelGraph) {
        let d = build_box(1.0, [[0.0, 0.0], [6.0, 6.0]]).unwrap();
        let g = ModelGraph::new(&d, &kind).unwrap();
        (d, g)
    }

    #[test]
    fn extremes() {
        let (d, g) = setup(BoundarySpec::free());
        let closed = BondConfiguration::all(g.num_edges(), false);
        assert_eq!(label_clusters(&g, &closed).cluster_count(), d.num_sites());
        let open = BondConfiguration::all(g.num_edges(), true);
        assert_eq!(label_clusters(&g, &open).cluster_count(), 1);
    }

    #[test]
    fn wired_two_by_two() {
        let d = build_box(1.0, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::wired()).unwrap();
        let closed = BondConfiguration::all(g.num_edges(), false);
        assert_eq!(label_clusters(&g, &closed).cluster_count(), 1);
    }

    #[test]
    fn link_patterns() {
        let (d, g) = setup(BoundarySpec::free());
        let mut b = BondConfiguration::all(g.num_edges(), false);
        let e01 = d.edge_between(0, 1).unwrap();
        b.set(e01 as usize, true);
        let l = label_clusters(&g, &b);
        let pts = [0, 1, 2, 3];
        let q = LinkPattern::new(vec![vec![1, 2], vec![3], vec![4]]).unwrap();
        assert!(check_link_event(&l, &pts, &q).unwrap());
        let bad = LinkPattern::new(vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert!(!check_link_event(&l, &pts, &bad).unwrap());
        assert!(check_link_event(&l, &[0, 1, 2, 999], &q).is_err());
    }

    #[test]
    fn arms() {
        let (d, g) = setup(BoundarySpec::free());
        let open = BondConfiguration::all(g.num_edges(), true);
        let closed = BondConfiguration::all(g.num_edges(), false);
        let lo = label_clusters(&g, &open);
        let lc = label_clusters(&g, &closed);
        assert!(arm_event(&lo, &d, [3.0, 3.0], 1.2, 2.5).unwrap());
        assert!(!arm_event(&lc, &d, [3.0, 3.0], 1.2, 2.5).unwrap());
        // a straight path from the centre to the right side
        let mut path = closed.clone();
        for x in 3..6 {
            let a = d.index_of([x, 3]).unwrap();
            let b = d.index_of([x + 1, 3]).unwrap();
            path.set(d.edge_between(a, b).unwrap() as usize, true);
        }
        let lp = label_clusters(&g, &path);
        assert!(arm_event(&lp, &d, [3.0, 3.0], 1.2, 2.5).unwrap());
        let z = d.index_of([3, 3]).unwrap();
        assert!(boundary_connection(&lp, &g, z));
        assert!(!boundary_connection(&lc, &g, z));
        let corner = d.index_of([0, 0]).unwrap();
        assert!(boundary_connection(&lc, &g, corner));
        assert!(matches!(arm_event(&lo, &d, [3.0, 3.0], 2.0, 50.0), Err(Error::UndefinedEvent(_))));
    }
}
