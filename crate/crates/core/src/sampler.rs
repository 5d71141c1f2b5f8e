//! Swendsen–Wang dynamics for the Ising model and the FK configurations
//! it produces through the Edwards–Sokal coupling.

use rand::{Rng, RngCore};

use crate::connectivity::ClusterLabeling;
use crate::error::Result;
use crate::exec::Exec;
use crate::lattice::{BoundarySpec, LatticeDomain};
use crate::model::{ModelGraph, ModelParams};
use crate::rng::{Purpose, StreamKey};
use crate::unionfind::UnionFind;

const EDGE_CHUNK: usize = 4096;
const WORD_CHUNK: usize = 4096;

/// Spins per node; ghosts included, the plus ghost is always +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
    num_sites: usize,
}

impl SpinConfiguration {
    pub fn all_plus(graph: &ModelGraph) -> Self {
        Self { spins: vec![1; graph.num_nodes()], num_sites: graph.num_sites() }
    }

    pub fn from_site_spins(graph: &ModelGraph, sites: &[i8]) -> Self {
        let mut s = Self::all_plus(graph);
        s.spins[..sites.len()].copy_from_slice(sites);
        // identified sites follow their ghost
        for &[site, g] in graph.fused() {
            s.spins[site as usize] = s.spins[g as usize];
        }
        s
    }

    pub fn spin(&self, node: u32) -> i8 {
        self.spins[node as usize]
    }

    pub fn site_spins(&self) -> &[i8] {
        &self.spins[..self.num_sites]
    }

    pub fn node_spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn product(&self, nodes: &[u32]) -> i8 {
        nodes.iter().map(|&n| self.spins[n as usize]).product()
    }
}

/// Open/closed state per model edge (domain edges, then ghost couplings).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BondConfiguration {
    open: Vec<bool>,
}

impl BondConfiguration {
    pub fn all(num_edges: usize, open: bool) -> Self {
        Self { open: vec![open; num_edges] }
    }

    pub fn from_bits(num_edges: usize, bits: u64) -> Self {
        Self { open: (0..num_edges).map(|e| bits >> e & 1 == 1).collect() }
    }

    pub fn is_open(&self, e: usize) -> bool {
        self.open[e]
    }

    pub fn set(&mut self, e: usize, open: bool) {
        self.open[e] = open;
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn closed_count(&self) -> usize {
        self.len() - self.open_count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.open
    }
}

fn threshold(p: f64) -> u64 {
    (p.clamp(0.0, 1.0) * 4294967296.0).round() as u64
}

/// Reusable buffers for cluster updates on one graph.
#[derive(Clone, Debug)]
pub struct SwendsenWang {
    params: ModelParams,
    threshold: u64,
    exec: Exec,
    spins: SpinConfiguration,
    bonds: BondConfiguration,
    uf: UnionFind,
    bits: Vec<u32>,
    labels: ClusterLabeling,
    scratch: Vec<u32>,
}

impl SwendsenWang {
    pub fn new(graph: &ModelGraph, params: ModelParams, exec: Exec) -> Self {
        let mut uf = UnionFind::new(graph.num_nodes());
        let labels = ClusterLabeling::from_union_find(&mut uf, graph.num_sites());
        Self {
            params,
            threshold: threshold(params.p),
            exec,
            spins: SpinConfiguration::all_plus(graph),
            bonds: BondConfiguration::all(graph.num_edges(), false),
            uf,
            bits: vec![0; graph.num_nodes().div_ceil(32)],
            labels,
            scratch: Vec::new(),
        }
    }

    pub fn spins(&self) -> &SpinConfiguration {
        &self.spins
    }

    pub fn set_spins(&mut self, spins: SpinConfiguration) {
        self.spins = spins;
    }

    pub fn bonds(&self) -> &BondConfiguration {
        &self.bonds
    }

    pub fn labels(&self) -> &ClusterLabeling {
        &self.labels
    }

    /// Edwards–Sokal bonds: aligned edges open with probability p.
    pub fn draw_bonds(&mut self, graph: &ModelGraph, key: &StreamKey, sweep: u64) {
        let thr = self.threshold;
        let spins = &self.spins.spins;
        let edges = graph.edges();
        self.exec.for_chunks_mut(&mut self.bonds.open, EDGE_CHUNK, |c, chunk| {
            let mut rng = key.rng(sweep, Purpose::Bonds, c as u32);
            let base = c * EDGE_CHUNK;
            for (k, o) in chunk.iter_mut().enumerate() {
                let [a, b] = edges[base + k];
                *o = spins[a as usize] == spins[b as usize] && (rng.next_u32() as u64) < thr;
            }
        });
    }

    fn build_clusters(&mut self, graph: &ModelGraph) {
        self.uf.reset();
        for &[s, g] in graph.fused() {
            self.uf.union(s, g);
        }
        for (e, &[a, b]) in graph.edges().iter().enumerate() {
            if self.bonds.open[e] {
                self.uf.union(a, b);
            }
        }
    }

    /// Fresh uniform spin per cluster; the plus ghost's cluster stays +1.
    fn refresh_spins(&mut self, graph: &ModelGraph, key: &StreamKey, sweep: u64) {
        self.exec.for_chunks_mut(&mut self.bits, WORD_CHUNK, |c, chunk| {
            let mut rng = key.rng(sweep, Purpose::Spins, c as u32);
            chunk.iter_mut().for_each(|w| *w = rng.next_u32());
        });
        let plus_root = graph.plus_ghost().map(|g| self.uf.find(g));
        for i in 0..graph.num_nodes() as u32 {
            let r = self.uf.find(i);
            self.spins.spins[i as usize] = if Some(r) == plus_root || self.bits[r as usize / 32] >> (r % 32) & 1 == 1 {
                1
            } else {
                -1
            };
        }
    }

    /// One sweep: bonds from spins, clusters, new spins. With `label` the
    /// cluster labelling of the drawn bonds is kept for measurement.
    pub fn sweep(&mut self, graph: &ModelGraph, key: &StreamKey, sweep: u64, label: bool) {
        self.draw_bonds(graph, key, sweep);
        self.build_clusters(graph);
        if label {
            self.labels.refill(&mut self.uf, &mut self.scratch);
        }
        self.refresh_spins(graph, key, sweep);
    }

    /// Size of the largest cluster of the most recent bonds, ghosts excluded.
    pub fn largest_cluster(&mut self, graph: &ModelGraph) -> usize {
        let mut sizes = vec![0u32; graph.num_nodes()];
        for i in 0..graph.num_sites() as u32 {
            sizes[self.uf.find(i) as usize] += 1;
        }
        sizes.into_iter().max().unwrap_or(0) as usize
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }
}

/// One cluster update of `state`, randomness drawn from `rng`.
pub fn cluster_sweep(
    graph: &ModelGraph,
    state: &SpinConfiguration,
    params: ModelParams,
    rng: &mut impl Rng,
) -> SpinConfiguration {
    let key = StreamKey::new(rng.next_u64(), 0);
    let mut sw = SwendsenWang::new(graph, params, Exec::Sequential);
    sw.set_spins(state.clone());
    sw.sweep(graph, &key, 0, false);
    sw.spins
}

/// Edwards–Sokal bonds for the given spins.
pub fn es_bonds_from_spins(
    graph: &ModelGraph,
    spins: &SpinConfiguration,
    params: ModelParams,
    rng: &mut impl Rng,
) -> BondConfiguration {
    let key = StreamKey::new(rng.next_u64(), 0);
    let mut sw = SwendsenWang::new(graph, params, Exec::Sequential);
    sw.set_spins(spins.clone());
    sw.draw_bonds(graph, &key, 0);
    sw.bonds
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainOptions {
    pub n_sweeps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub chain: u64,
}

impl ChainOptions {
    pub fn new(n_sweeps: u64, burn_in: u64, seed: u64) -> Self {
        Self { n_sweeps, burn_in, thin: 1, seed, chain: 0 }
    }
}

/// A Markov chain emitting FK configurations after burn-in.
pub struct FkChain {
    graph: ModelGraph,
    sw: SwendsenWang,
    key: StreamKey,
    opts: ChainOptions,
    next_sweep: u64,
    emitted: u64,
}

impl FkChain {
    pub fn new(graph: ModelGraph, params: ModelParams, opts: ChainOptions, exec: Exec) -> Result<Self> {
        params.validate()?;
        if opts.n_sweeps == 0 || opts.thin == 0 {
            return Err(crate::Error::Config("n_sweeps and thin must be at least 1".into()));
        }
        let sw = SwendsenWang::new(&graph, params, exec);
        Ok(Self { key: StreamKey::new(opts.seed, opts.chain), graph, sw, opts, next_sweep: 0, emitted: 0 })
    }

    pub fn graph(&self) -> &ModelGraph {
        &self.graph
    }

    /// Advance to the next retained sweep. Returns its index, or `None`
    /// once `n_sweeps` configurations have been emitted.
    pub fn advance(&mut self) -> Option<u64> {
        if self.emitted == self.opts.n_sweeps {
            return None;
        }
        loop {
            let s = self.next_sweep;
            self.next_sweep += 1;
            let keep = s >= self.opts.burn_in && (s - self.opts.burn_in) % self.opts.thin == 0;
            self.sw.sweep(&self.graph, &self.key, s, keep);
            if keep {
                self.emitted += 1;
                return Some(s);
            }
        }
    }

    pub fn bonds(&self) -> &BondConfiguration {
        self.sw.bonds()
    }

    pub fn labels(&self) -> &ClusterLabeling {
        self.sw.labels()
    }

    /// Spins drawn after the current bonds.
    pub fn spins(&self) -> &SpinConfiguration {
        self.sw.spins()
    }

    pub fn largest_cluster(&mut self) -> usize {
        self.sw.largest_cluster(&self.graph)
    }
}

/// Owned stream of FK configurations; see [`FkChain`] for the borrowing form.
pub struct FkStream {
    chain: FkChain,
}

impl Iterator for FkStream {
    type Item = (u64, BondConfiguration);

    fn next(&mut self) -> Option<Self::Item> {
        let s = self.chain.advance()?;
        Some((s, self.chain.bonds().clone()))
    }
}

pub fn sample_fk(
    domain: &LatticeDomain,
    bc: &BoundarySpec,
    params: ModelParams,
    opts: ChainOptions,
) -> Result<FkStream> {
    let graph = ModelGraph::new(domain, bc)?;
    Ok(FkStream { chain: FkChain::new(graph, params, opts, Exec::default())? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, LatticeDomain, ShapeTag};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_edge() -> (LatticeDomain, ModelGraph) {
        let d = LatticeDomain::from_sites(1.0, ShapeTag::Custom, vec![[0, 0], [1, 0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::free()).unwrap();
        (d, g)
    }

    #[test]
    fn forced_bonds() {
        let (_, g) = single_edge();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plus = SpinConfiguration::all_plus(&g);
        let p1 = ModelParams::fk(1.0, 2.0).unwrap();
        assert_eq!(es_bonds_from_spins(&g, &plus, p1, &mut rng).open_count(), 1);
        let d = build_box(1.0, [[0.0, 0.0], [3.0, 3.0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::free()).unwrap();
        let checker: Vec<i8> = d.sites().iter().map(|p| if (p[0] + p[1]) % 2 == 0 { 1 } else { -1 }).collect();
        let s = SpinConfiguration::from_site_spins(&g, &checker);
        assert_eq!(es_bonds_from_spins(&g, &s, p1, &mut rng).open_count(), 0);
    }

    #[test]
    fn single_vertex_symmetric() {
        let d = LatticeDomain::from_sites(1.0, ShapeTag::Custom, vec![[0, 0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::free()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = SpinConfiguration::all_plus(&g);
        let mut sum = 0i64;
        for _ in 0..10_000 {
            s = cluster_sweep(&g, &s, ModelParams::critical(), &mut rng);
            sum += s.spin(0) as i64;
        }
        assert!((sum as f64 / 1e4).abs() <= 0.05);
    }

    #[test]
    fn same_seed_same_stream() {
        let d = build_box(1.0, [[0.0, 0.0], [7.0, 7.0]]).unwrap();
        let opts = ChainOptions { n_sweeps: 20, burn_in: 5, thin: 2, seed: 9, chain: 0 };
        let a: Vec<_> = sample_fk(&d, &BoundarySpec::free(), ModelParams::critical(), opts).unwrap().collect();
        let b: Vec<_> = sample_fk(&d, &BoundarySpec::free(), ModelParams::critical(), opts).unwrap().collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert_eq!(a[1].0, 7);
    }

    #[test]
    fn plus_ghost_stays_plus() {
        let d = build_box(1.0, [[0.0, 0.0], [3.0, 3.0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::wired()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = SpinConfiguration::all_plus(&g);
        for _ in 0..200 {
            s = cluster_sweep(&g, &s, ModelParams::critical(), &mut rng);
            for &b in g.boundary_sites() {
                assert_eq!(s.spin(b), 1);
            }
        }
    }

    #[test]
    fn dobrushin_needs_marks() {
        let d = build_box(1.0, [[0.0, 0.0], [3.0, 3.0]]).unwrap();
        let bc = BoundarySpec { kind: crate::lattice::BoundaryKind::Dobrushin, marked_points: vec![], wired_arcs: vec![] };
        assert!(matches!(
            sample_fk(&d, &bc, ModelParams::critical(), ChainOptions::new(1, 0, 0)),
            Err(crate::Error::Config(_))
        ));
    }
}
