//! Exact random-cluster probabilities by summing over all bond configurations.

use std::collections::BTreeMap;

use twofloat::TwoFloat;

use super::{powu, prefix_bits, tf, weighted_sum, MAX_FK_EDGES};
use crate::connectivity::{boundary_connection, link_event_unchecked, ArmProbe, ClusterLabeling};
use crate::error::{capacity, Error, Result};
use crate::exec::Exec;
use crate::model::{ModelGraph, ModelParams};
use crate::patterns::LinkPattern;
use crate::unionfind::UnionFind;

/// Events on a single bond configuration. Nodes are model-graph nodes.
#[derive(Clone, Debug)]
pub enum FkEvent {
    EdgeOpen(u32),
    Connected(u32, u32),
    Link { points: Vec<u32>, pattern: LinkPattern },
    Arm(ArmProbe),
    /// z ↔ ∂Ω
    BoundaryConnection(u32),
    /// z ↔ the plus ghost (the wired arc under Dobrushin conditions)
    GhostConnection(u32),
}

impl FkEvent {
    fn validate(&self, graph: &ModelGraph) -> Result<()> {
        let node_ok = |n: u32| (n as usize) < graph.num_nodes();
        let ok = match self {
            FkEvent::EdgeOpen(e) => (*e as usize) < graph.num_edges(),
            FkEvent::Connected(a, b) => node_ok(*a) && node_ok(*b),
            FkEvent::Link { points, pattern } => {
                if points.len() != pattern.n() {
                    return Err(Error::Config(format!("{} points for a pattern on {}", points.len(), pattern.n())));
                }
                points.iter().all(|&p| node_ok(p))
            }
            FkEvent::Arm(_) => true,
            FkEvent::BoundaryConnection(z) => (*z as usize) < graph.num_sites(),
            FkEvent::GhostConnection(z) => {
                if graph.plus_ghost().is_none() {
                    return Err(Error::UndefinedEvent("no plus ghost under this boundary condition".into()));
                }
                (*z as usize) < graph.num_sites()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPoint(format!("event {self:?} refers to a missing node or edge")))
        }
    }

    pub fn eval(&self, graph: &ModelGraph, open: &[bool], labels: &ClusterLabeling) -> bool {
        match self {
            FkEvent::EdgeOpen(e) => open[*e as usize],
            FkEvent::Connected(a, b) => labels.connected(*a, *b),
            FkEvent::Link { points, pattern } => link_event_unchecked(labels, points, pattern),
            FkEvent::Arm(probe) => probe.eval(labels),
            FkEvent::BoundaryConnection(z) => boundary_connection(labels, graph, *z),
            FkEvent::GhostConnection(z) => graph.plus_ghost().is_some_and(|g| labels.connected(*z, g)),
        }
    }
}

/// Walks every bond configuration of a model graph with fresh cluster labels.
pub(crate) struct ConfigWalker<'a> {
    graph: &'a ModelGraph,
    pub(crate) stride: usize,
}

impl<'a> ConfigWalker<'a> {
    pub(crate) fn new(graph: &'a ModelGraph) -> Result<Self> {
        capacity("FK edges", graph.num_edges(), MAX_FK_EDGES)?;
        Ok(Self { graph, stride: graph.num_nodes() + 1 })
    }

    /// Histogram slot of a configuration with `o` open edges and `k` clusters.
    pub(crate) fn slot(&self, o: usize, k: usize) -> usize {
        o * self.stride + k
    }

    pub(crate) fn slots(&self) -> usize {
        (self.graph.num_edges() + 1) * self.stride
    }

    /// p^o (1−p)^{|E|−o} q^k per slot.
    pub(crate) fn weights(&self, params: &ModelParams) -> Vec<TwoFloat> {
        let m = self.graph.num_edges();
        let (p, q) = (tf(params.p), tf(params.q));
        let one_minus = tf(1.0) - p;
        let mut w = vec![tf(0.0); self.slots()];
        for o in 0..=m {
            let po = powu(p, o) * powu(one_minus, m - o);
            for k in 0..self.stride {
                w[self.slot(o, k)] = po * powu(q, k);
            }
        }
        w
    }

    /// Run `visit(state, open, labels, slot)` over all configurations, split
    /// into fixed work units; states come back in unit order.
    pub(crate) fn run<S, I, V>(&self, exec: Exec, init: I, visit: V) -> Vec<S>
    where
        S: Send,
        I: Fn() -> S + Sync + Send,
        V: Fn(&mut S, &[bool], &ClusterLabeling, usize) + Sync + Send,
    {
        let m = self.graph.num_edges();
        let k = prefix_bits(m);
        let low = m - k;
        let g = self.graph;
        exec.map(1 << k, |unit| {
            let mut state = init();
            let mut open = vec![false; m];
            for b in 0..k {
                open[low + b] = unit >> b & 1 == 1;
            }
            let mut o = open.iter().filter(|&&x| x).count();
            let mut uf = UnionFind::new(g.num_nodes());
            let mut labels = ClusterLabeling::from_union_find(&mut uf, g.num_sites());
            let mut scratch = Vec::new();
            for t in 0u64..1 << low {
                if t > 0 {
                    let e = t.trailing_zeros() as usize;
                    open[e] = !open[e];
                    if open[e] {
                        o += 1;
                    } else {
                        o -= 1;
                    }
                }
                uf.reset();
                for &[s, gh] in g.fused() {
                    uf.union(s, gh);
                }
                for (e, &[a, b]) in g.edges().iter().enumerate() {
                    if open[e] {
                        uf.union(a, b);
                    }
                }
                labels.refill(&mut uf, &mut scratch);
                let slot = self.slot(o, labels.cluster_count());
                visit(&mut state, &open, &labels, slot);
            }
            state
        })
    }
}

fn add_into(total: &mut [i64], part: &[i64]) {
    total.iter_mut().zip(part).for_each(|(a, b)| *a += b);
}

/// Exact probabilities of the given events.
pub fn enumerate_fk(graph: &ModelGraph, params: &ModelParams, events: &[FkEvent], exec: Exec) -> Result<Vec<TwoFloat>> {
    params.validate()?;
    for ev in events {
        ev.validate(graph)?;
    }
    let walker = ConfigWalker::new(graph)?;
    let n = walker.slots();
    let parts = walker.run(
        exec,
        || vec![vec![0i64; n]; events.len() + 1],
        |h, open, labels, slot| {
            h[0][slot] += 1;
            for (i, ev) in events.iter().enumerate() {
                if ev.eval(graph, open, labels) {
                    h[i + 1][slot] += 1;
                }
            }
        },
    );
    let mut total = vec![vec![0i64; n]; events.len() + 1];
    for p in &parts {
        for (t, x) in total.iter_mut().zip(p) {
            add_into(t, x);
        }
    }
    let w = walker.weights(params);
    let z = weighted_sum(&total[0], &w);
    Ok(total[1..].iter().map(|h| weighted_sum(h, &w) / z).collect())
}

/// Law of an arbitrary configuration statistic `f`.
pub fn fk_outcome_distribution<K, F>(graph: &ModelGraph, params: &ModelParams, exec: Exec, f: F) -> Result<BTreeMap<K, TwoFloat>>
where
    K: Ord + Clone + Send,
    F: Fn(&[bool], &ClusterLabeling) -> K + Sync + Send,
{
    params.validate()?;
    let walker = ConfigWalker::new(graph)?;
    let n = walker.slots();
    let parts = walker.run(exec, BTreeMap::<K, Vec<i64>>::new, |h, open, labels, slot| {
        h.entry(f(open, labels)).or_insert_with(|| vec![0; n])[slot] += 1;
    });
    let mut total: BTreeMap<K, Vec<i64>> = BTreeMap::new();
    for p in parts {
        for (k, h) in p {
            match total.get_mut(&k) {
                Some(t) => add_into(t, &h),
                None => {
                    total.insert(k, h);
                }
            }
        }
    }
    let w = walker.weights(params);
    let mut z = tf(0.0);
    let mut out = BTreeMap::new();
    for (k, h) in total {
        let s = weighted_sum(&h, &w);
        z += s;
        out.insert(k, s);
    }
    for v in out.values_mut() {
        *v /= z;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, BoundarySpec, LatticeDomain, ShapeTag};
    use crate::model::p_c;

    fn f(x: TwoFloat) -> f64 {
        x.into()
    }

    fn one_edge() -> ModelGraph {
        let d = LatticeDomain::from_sites(1.0, ShapeTag::Custom, [[0, 0], [1, 0]]).unwrap();
        ModelGraph::new(&d, &BoundarySpec::free()).unwrap()
    }

    #[test]
    fn single_edge_at_criticality() {
        let g = one_edge();
        let r = enumerate_fk(&g, &ModelParams::critical(), &[FkEvent::EdgeOpen(0)], Exec::Sequential).unwrap();
        let pc = p_c(2.0);
        let expect = pc / (pc + 2.0 * (1.0 - pc));
        assert!((f(r[0]) - expect).abs() < 1e-15);
        assert!((f(r[0]) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn p_one_is_all_open() {
        let d = build_box(1.0, [[0.0, 0.0], [2.0, 1.0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::free()).unwrap();
        let m = g.num_edges();
        let dist = fk_outcome_distribution(&g, &ModelParams::fk(1.0, 2.0).unwrap(), Exec::Sequential, |o, _| {
            o.iter().filter(|&&x| x).count()
        })
        .unwrap();
        assert_eq!(f(dist[&m]), 1.0);
    }

    #[test]
    fn bernoulli_at_q_one() {
        let d = build_box(1.0, [[0.0, 0.0], [2.0, 1.0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::free()).unwrap();
        let params = ModelParams::fk(0.3, 1.0).unwrap();
        let events: Vec<FkEvent> = (0..g.num_edges() as u32).map(FkEvent::EdgeOpen).collect();
        let r = enumerate_fk(&g, &params, &events, Exec::Parallel).unwrap();
        assert!(r.iter().all(|&x| (f(x) - 0.3).abs() < 1e-15));
        // two edges both open: product measure
        let a = d.edge_between(0, 1).unwrap();
        let b = d.edge_between(1, 2).unwrap();
        let both = fk_outcome_distribution(&g, &params, Exec::Sequential, |o, _| {
            o[a as usize] && o[b as usize]
        })
        .unwrap();
        assert!((f(both[&true]) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn capacity_enforced() {
        let d = build_box(1.0, [[0.0, 0.0], [4.0, 4.0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::free()).unwrap();
        assert!(matches!(
            enumerate_fk(&g, &ModelParams::critical(), &[], Exec::Sequential),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn modes_agree() {
        let d = build_box(1.0, [[0.0, 0.0], [3.0, 2.0]]).unwrap();
        let g = ModelGraph::new(&d, &BoundarySpec::wired()).unwrap();
        let ev = [FkEvent::Connected(5, 6), FkEvent::BoundaryConnection(5)];
        let a = enumerate_fk(&g, &ModelParams::critical(), &ev, Exec::Sequential).unwrap();
        let b = enumerate_fk(&g, &ModelParams::critical(), &ev, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
