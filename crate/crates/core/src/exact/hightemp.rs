//! High-temperature expansion for the mixed free/plus boundary condition.
//!
//! The graph Ω̄ is a box plus a ghost row directly below the plus arc
//! [y₃, y₄]. Edges are only split into half-edges at marked midpoints, and
//! stubs (outer normals, corner edges) are only added when marked; unmarked
//! ones are pendant and never carry an even-degree configuration.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::{powu, sqrt2_minus_1, tf, MAX_HIGH_TEMP_EDGES};
use crate::error::{capacity, Error, Result};
use crate::lattice::{LatticeDomain, Point, DIRS};

/// Generalized vertex. Midpoints use doubled coordinates; corner `q` sits
/// at site + (√2/4)·e^{i(π/4 + qπ/2)}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenVertex {
    Site(Point),
    Midpoint(Point),
    Corner(Point, u8),
}

impl GenVertex {
    /// Position in units of a quarter mesh.
    fn quarter_position(&self) -> Point {
        match *self {
            GenVertex::Site(p) => [4 * p[0], 4 * p[1]],
            GenVertex::Midpoint(m) => [2 * m[0], 2 * m[1]],
            GenVertex::Corner(p, q) => {
                let (sx, sy) = [(1, 1), (-1, 1), (-1, -1), (1, -1)][q as usize % 4];
                [4 * p[0] + sx, 4 * p[1] + sy]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightClass {
    /// √2 − 1
    Full,
    /// (√2 − 1)^{1/2}
    Half,
    /// (√2 − 1)^{1/2}·cos(π/8)
    Corner,
    /// ghost-row edges, excluded from the product
    Ghost,
}

#[derive(Clone, Debug)]
pub struct HighTempGraph {
    vertices: Vec<GenVertex>,
    index: HashMap<GenVertex, u32>,
    edges: Vec<[u32; 2]>,
    class: Vec<WeightClass>,
    num_sites: usize,
    ghost_anchor: GenVertex,
    arc: [Point; 2],
}

impl HighTempGraph {
    /// Ω̄ for the plus arc from `y3` to `y4` (same bottom row, y3.x ≤ y4.x),
    /// with the given midpoints and corners marked.
    pub fn new(domain: &LatticeDomain, y3: Point, y4: Point, marks: &[GenVertex]) -> Result<Self> {
        if y3[1] != y4[1] || y3[0] > y4[0] {
            return Err(Error::InvalidMarking(format!("plus arc {y3:?}..{y4:?} must run rightwards along one row")));
        }
        let mut g = HighTempGraph {
            vertices: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            class: Vec::new(),
            num_sites: domain.num_sites(),
            ghost_anchor: GenVertex::Site([y3[0], y3[1] - 1]),
            arc: [y3, y4],
        };
        for &p in domain.sites() {
            g.add_vertex(GenVertex::Site(p));
        }
        for &[a, b] in domain.edges() {
            g.push_edge(a, b, WeightClass::Full);
        }
        let mut prev = None;
        for x in y3[0]..=y4[0] {
            let p = [x, y3[1]];
            let v = domain.index_of(p).ok_or_else(|| Error::InvalidMarking(format!("{p:?} is not a site")))?;
            let outside: Vec<usize> = (0..4).filter(|&d| !domain.contains([p[0] + DIRS[d][0], p[1] + DIRS[d][1]])).collect();
            if outside != [3] {
                return Err(Error::InvalidMarking(format!(
                    "plus arc site {p:?} must have exactly one outside neighbour, directly below"
                )));
            }
            let w = g.add_vertex(GenVertex::Site([x, y3[1] - 1]));
            g.push_edge(v, w, WeightClass::Full);
            if let Some(u) = prev {
                g.push_edge(u, w, WeightClass::Ghost);
            }
            prev = Some(w);
        }
        for &m in marks {
            g.mark(m)?;
        }
        capacity("generalized edges", g.edges.len(), MAX_HIGH_TEMP_EDGES)?;
        Ok(g)
    }

    fn add_vertex(&mut self, v: GenVertex) -> u32 {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.vertices.len() as u32;
        self.vertices.push(v);
        self.index.insert(v, i);
        i
    }

    fn push_edge(&mut self, a: u32, b: u32, c: WeightClass) {
        self.edges.push([a, b]);
        self.class.push(c);
    }

    fn mark(&mut self, m: GenVertex) -> Result<()> {
        if self.index.contains_key(&m) {
            return Err(Error::InvalidMarking(format!("{m:?} is already a vertex")));
        }
        match m {
            GenVertex::Site(_) => Err(Error::InvalidMarking(format!("{m:?}: only midpoints and corners can be marked"))),
            GenVertex::Midpoint(d) => {
                if (d[0] + d[1]).rem_euclid(2) != 1 {
                    return Err(Error::InvalidMarking(format!("{d:?} is not a doubled edge midpoint")));
                }
                let (a, b) = if d[0].rem_euclid(2) == 1 {
                    ([(d[0] - 1) / 2, d[1] / 2], [(d[0] + 1) / 2, d[1] / 2])
                } else {
                    ([d[0] / 2, (d[1] - 1) / 2], [d[0] / 2, (d[1] + 1) / 2])
                };
                let ia = self.index.get(&GenVertex::Site(a)).copied();
                let ib = self.index.get(&GenVertex::Site(b)).copied();
                match (ia, ib) {
                    (Some(ia), Some(ib)) => {
                        let e = self
                            .edges
                            .iter()
                            .position(|&[x, y]| (x, y) == (ia, ib) || (x, y) == (ib, ia))
                            .ok_or_else(|| Error::Internal(format!("no edge under {d:?}")))?;
                        if self.class[e] == WeightClass::Ghost {
                            return Err(Error::InvalidMarking("midpoints of the ghost row cannot be marked".into()));
                        }
                        let mid = self.add_vertex(m);
                        self.edges[e] = [ia, mid];
                        self.class[e] = WeightClass::Half;
                        self.push_edge(mid, ib, WeightClass::Half);
                        Ok(())
                    }
                    // outer normal
                    (Some(v), None) | (None, Some(v)) => {
                        let mid = self.add_vertex(m);
                        self.push_edge(v, mid, WeightClass::Half);
                        Ok(())
                    }
                    (None, None) => Err(Error::InvalidMarking(format!("midpoint {d:?} is not adjacent to the graph"))),
                }
            }
            GenVertex::Corner(p, q) => {
                if q > 3 {
                    return Err(Error::InvalidMarking(format!("corner index {q} out of range")));
                }
                let v = self
                    .index
                    .get(&GenVertex::Site(p))
                    .copied()
                    .ok_or_else(|| Error::InvalidMarking(format!("corner of a missing site {p:?}")))?;
                let c = self.add_vertex(m);
                self.push_edge(v, c, WeightClass::Corner);
                Ok(())
            }
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[GenVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn class(&self, e: usize) -> WeightClass {
        self.class[e]
    }

    pub fn vertex_index(&self, v: GenVertex) -> Option<u32> {
        self.index.get(&v).copied()
    }

    /// Number of box sites; they come first and keep the domain's order.
    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    /// y₃ − ia
    pub fn ghost_anchor(&self) -> GenVertex {
        self.ghost_anchor
    }

    pub fn ghost_anchor_site(&self) -> Point {
        [self.arc[0][0], self.arc[0][1] - 1]
    }

    pub fn arc(&self) -> [Point; 2] {
        self.arc
    }

    pub(crate) fn quarter_position(&self, v: u32) -> Point {
        self.vertices[v as usize].quarter_position()
    }

    pub(crate) fn resolve(&self, set: &[GenVertex]) -> Result<Vec<u32>> {
        set.iter()
            .map(|v| self.vertex_index(*v).ok_or_else(|| Error::InvalidPoint(format!("{v:?} is not a generalized vertex"))))
            .collect()
    }

    /// Masks of a particular configuration with odd set `odd` and of a
    /// cycle basis; `None` if no configuration exists.
    pub(crate) fn solution_space(&self, odd: &[u32]) -> Option<(u64, Vec<u64>)> {
        let n = self.vertices.len();
        let mut adj: Vec<Vec<(u32, usize)>> = vec![Vec::new(); n];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            adj[a as usize].push((b, e));
            adj[b as usize].push((a, e));
        }
        // spanning forest, BFS order
        let mut parent: Vec<Option<(u32, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut tree = 0u64;
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let start = order.len();
            order.push(root as u32);
            let mut head = start;
            while head < order.len() {
                let v = order[head];
                head += 1;
                for &(u, e) in &adj[v as usize] {
                    if !seen[u as usize] {
                        seen[u as usize] = true;
                        parent[u as usize] = Some((v, e));
                        tree |= 1 << e;
                        order.push(u);
                    }
                }
            }
        }
        let mut demand = vec![false; n];
        for &v in odd {
            demand[v as usize] ^= true;
        }
        let mut particular = 0u64;
        for &v in order.iter().rev() {
            if demand[v as usize] {
                match parent[v as usize] {
                    Some((p, e)) => {
                        particular ^= 1 << e;
                        demand[v as usize] = false;
                        demand[p as usize] ^= true;
                    }
                    None => return None,
                }
            }
        }
        let path_to_root = |mut v: u32| {
            let mut m = 0u64;
            while let Some((p, e)) = parent[v as usize] {
                m ^= 1 << e;
                v = p;
            }
            m
        };
        let cycles = (0..self.edges.len())
            .filter(|&e| tree >> e & 1 == 0)
            .map(|e| {
                let [a, b] = self.edges[e];
                (1u64 << e) ^ path_to_root(a) ^ path_to_root(b)
            })
            .collect();
        Some((particular, cycles))
    }

    /// Visit every configuration with odd-degree set exactly `odd`, in Gray
    /// code order over the cycle space.
    pub(crate) fn for_each_config(&self, odd: &[u32], mut f: impl FnMut(u64)) {
        let Some((mut s, cycles)) = self.solution_space(odd) else {
            return;
        };
        f(s);
        for t in 1u64..1 << cycles.len() {
            s ^= cycles[t.trailing_zeros() as usize];
            f(s);
        }
    }

    fn class_masks(&self) -> [u64; 3] {
        let mut m = [0u64; 3];
        for (e, c) in self.class.iter().enumerate() {
            match c {
                WeightClass::Full => m[0] |= 1 << e,
                WeightClass::Half => m[1] |= 1 << e,
                WeightClass::Corner => m[2] |= 1 << e,
                WeightClass::Ghost => {}
            }
        }
        m
    }

    /// (exponent of (√2−1)^{1/2}, number of corner edges) of a configuration.
    pub(crate) fn weight_key(&self, masks: &[u64; 3], s: u64) -> (usize, usize) {
        let full = (s & masks[0]).count_ones() as usize;
        let half = (s & masks[1]).count_ones() as usize;
        let corner = (s & masks[2]).count_ones() as usize;
        (2 * full + half + corner, corner)
    }

    pub(crate) fn weight_table(&self) -> (Vec<Vec<TwoFloat>>, [u64; 3]) {
        let r = sqrt2_minus_1().sqrt();
        let c = tf((std::f64::consts::PI / 8.0).cos());
        let m = self.edges.len();
        let table = (0..=2 * m)
            .map(|h| (0..=m).map(|k| powu(r, h) * powu(c, k)).collect())
            .collect();
        (table, self.class_masks())
    }
}

/// Z(Ω̄; A): weighted count of edge sets whose odd-degree vertices are A.
#[allow(non_snake_case)]
pub fn high_temp_Z(graph: &HighTempGraph, a: &[GenVertex]) -> Result<TwoFloat> {
    let odd = graph.resolve(a)?;
    let (table, masks) = graph.weight_table();
    let m = graph.num_edges();
    let mut hist = vec![0i64; (2 * m + 1) * (m + 1)];
    graph.for_each_config(&odd, |s| {
        let (h, k) = graph.weight_key(&masks, s);
        hist[h * (m + 1) + k] += 1;
    });
    let mut z = tf(0.0);
    for (i, &c) in hist.iter().enumerate() {
        if c != 0 {
            z += table[i / (m + 1)][i % (m + 1)] * c as f64;
        }
    }
    Ok(z)
}

/// E^m[σ_A] through the expansion: Z(A)/Z(∅) for even |A|, otherwise
/// Z(A ∪ {y₃ − ia})/Z(∅).
pub fn high_temp_expectation(graph: &HighTempGraph, sites: &[Point]) -> Result<TwoFloat> {
    let mut a: Vec<GenVertex> = sites.iter().map(|&p| GenVertex::Site(p)).collect();
    if a.len() % 2 == 1 {
        a.push(graph.ghost_anchor());
    }
    Ok(high_temp_Z(graph, &a)? / high_temp_Z(graph, &[])?)
}
