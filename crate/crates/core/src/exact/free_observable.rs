//! Ising fermionic observable with free boundary conditions, summed over
//! high-temperature configurations of Ω̄.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use twofloat::TwoFloat;

use super::hightemp::{high_temp_Z, GenVertex, HighTempGraph};
use super::{sqrt2_minus_1, tf};
use crate::error::{Error, Result};
use crate::lattice::Point;

/// κ(e) = (ie/|e|)^{−1/2} on the principal branch.
pub fn kappa(e: Complex64) -> Complex64 {
    let u = Complex64::i() * e / e.norm();
    Complex64::from_polar(1.0, -u.arg() / 2.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeObservable {
    pub value: Complex64,
    /// Z(Ω̄; {y₁, y₂}) / ((√2−1)^{1/2}·cos(π/8)·Z(Ω̄; {y₁, y₃−ia}))
    pub ratio: f64,
    /// ||F(b₂)| − ratio|
    pub residual: f64,
    /// Distinct windings of γ, in eighth turns.
    pub windings: BTreeSet<i32>,
    pub configurations: u64,
}

/// Heading of the vector from `a` to `b` in eighth turns.
fn heading(a: Point, b: Point) -> Result<i32> {
    let d = [(b[0] - a[0]).signum(), (b[1] - a[1]).signum()];
    let h = match d {
        [1, 0] => 0,
        [1, 1] => 1,
        [0, 1] => 2,
        [-1, 1] => 3,
        [-1, 0] => 4,
        [-1, -1] => 5,
        [0, -1] => 6,
        [1, -1] => 7,
        _ => return Err(Error::Internal(format!("degenerate edge {a:?} -> {b:?}"))),
    };
    Ok(h)
}

struct Walker<'a> {
    graph: &'a HighTempGraph,
    adj: Vec<Vec<(u32, usize)>>,
}

impl Walker<'_> {
    /// Winding of γ from `start` to `end` in configuration `s`, turning as
    /// far left as possible at every vertex so γ never crosses the loops.
    fn winding(&self, s: u64, start: u32, end: u32) -> Result<i32> {
        let g = self.graph;
        let mut used = 0u64;
        let mut v = start;
        let mut h_in: Option<i32> = None;
        let mut w = 0;
        while v != end || h_in.is_none() {
            let mut best: Option<(i32, u32, usize, i32)> = None;
            for &(u, e) in &self.adj[v as usize] {
                if s >> e & 1 == 0 || used >> e & 1 == 1 {
                    continue;
                }
                let h = heading(g.quarter_position(v), g.quarter_position(u))?;
                let t = match h_in {
                    None => 0,
                    Some(hi) => {
                        let t = (h - hi).rem_euclid(8);
                        if t > 4 {
                            t - 8
                        } else {
                            t
                        }
                    }
                };
                if t == 4 {
                    return Err(Error::Internal("path reverses along a straight line".into()));
                }
                if best.is_none_or(|b| t > b.0) {
                    best = Some((t, u, e, h));
                }
            }
            let (t, u, e, h) = best.ok_or_else(|| Error::Internal("path stops before its endpoint".into()))?;
            used |= 1 << e;
            w += t;
            h_in = Some(h);
            v = u;
        }
        Ok(w)
    }
}

/// F at `z`: the sum over Conf(Ω̄; b₁, z), normalized by
/// (√2−1)^{3/2}·cos(π/8)·Z(Ω̄; {y₁, y₃−ia}). `b1` is the marked midpoint of
/// the outer normal below y₁. Returns the value and the windings seen.
fn observable_at(graph: &HighTempGraph, b1: GenVertex, z: GenVertex) -> Result<(Complex64, BTreeSet<i32>, u64)> {
    let [ib1, iz] = [b1, z].map(|v| graph.vertex_index(v).ok_or_else(|| Error::InvalidPoint(format!("{v:?} is not marked"))));
    let (ib1, iz) = (ib1?, iz?);
    let mut adj: Vec<Vec<(u32, usize)>> = vec![Vec::new(); graph.num_vertices()];
    for (e, &[a, b]) in graph.edges().iter().enumerate() {
        adj[a as usize].push((b, e));
        adj[b as usize].push((a, e));
    }
    if adj[ib1 as usize].len() != 1 {
        return Err(Error::InvalidMarking(format!("{b1:?} is not an outer normal")));
    }
    let y1 = adj[ib1 as usize][0].0;
    let walker = Walker { graph, adj };
    let (table, masks) = graph.weight_table();
    let m = graph.num_edges();
    // (weight exponent, corner count, phase class of e^{−iπW/8})
    let mut hist = vec![0i64; (2 * m + 1) * (m + 1) * 16];
    let mut windings = BTreeSet::new();
    let mut count = 0u64;
    let mut err = None;
    graph.for_each_config(&[ib1, iz], |s| {
        if err.is_some() {
            return;
        }
        match walker.winding(s, ib1, iz) {
            Ok(w) => {
                windings.insert(w);
                let (h, k) = graph.weight_key(&masks, s);
                let class = (-w).rem_euclid(16) as usize;
                hist[(h * (m + 1) + k) * 16 + class] += 1;
                count += 1;
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut by_phase = [tf(0.0); 16];
    for (i, &c) in hist.iter().enumerate() {
        if c != 0 {
            let hk = i / 16;
            by_phase[i % 16] += table[hk / (m + 1)][hk % (m + 1)] * c as f64;
        }
    }
    let anchor = GenVertex::Site(graph.ghost_anchor_site());
    let norm: TwoFloat = sqrt2_minus_1().powi(3).sqrt()
        * tf((PI / 8.0).cos())
        * high_temp_Z(graph, &[graph.vertices()[y1 as usize], anchor])?;
    let sum = (0..16).fold(Complex64::new(0.0, 0.0), |acc, c| {
        acc + Complex64::from_polar(1.0, c as f64 * PI / 8.0) * f64::from(by_phase[c] / norm)
    });
    let q1 = graph.quarter_position(ib1);
    let qy1 = graph.quarter_position(y1);
    let b1_vec = Complex64::new((q1[0] - qy1[0]) as f64, (q1[1] - qy1[1]) as f64);
    Ok((Complex64::i() * kappa(b1_vec) * sum, windings, count))
}

/// F(b₂) and the ratio identity on a graph whose marks include the outer
/// normals below `y1` and `y2` (y₁ < y₂ < y₃ on the bottom row).
pub fn fermionic_observable_free(graph: &HighTempGraph, y1: Point, y2: Point) -> Result<FreeObservable> {
    let [y3, _] = graph.arc();
    if !(y1[1] == y3[1] && y2[1] == y3[1] && y1[0] < y2[0] && y2[0] < y3[0]) {
        return Err(Error::Ordering(format!("need y1 < y2 < y3 on one row, got {y1:?}, {y2:?}, {y3:?}")));
    }
    let below = |p: Point| GenVertex::Midpoint([2 * p[0], 2 * p[1] - 1]);
    let (value, windings, configurations) = observable_at(graph, below(y1), below(y2))?;
    let anchor = GenVertex::Site(graph.ghost_anchor_site());
    let z12 = high_temp_Z(graph, &[GenVertex::Site(y1), GenVertex::Site(y2)])?;
    let z13 = high_temp_Z(graph, &[GenVertex::Site(y1), anchor])?;
    let ratio: f64 = (z12 / (sqrt2_minus_1().sqrt() * tf((PI / 8.0).cos()) * z13)).into();
    Ok(FreeObservable { value, ratio, residual: (value.norm() - ratio).abs(), windings, configurations })
}

/// F at the corner edge b₃ leaving y₃ − ia towards the south-west.
pub fn free_observable_at_corner(graph: &HighTempGraph, y1: Point) -> Result<Complex64> {
    let b3 = GenVertex::Corner(graph.ghost_anchor_site(), 2);
    Ok(observable_at(graph, GenVertex::Midpoint([2 * y1[0], 2 * y1[1] - 1]), b3)?.0)
}

/// Ω̄ with the outer normals below y₁, y₂ and the corner b₃ marked.
pub fn free_observable_graph(domain: &crate::lattice::LatticeDomain, y: [Point; 4]) -> Result<HighTempGraph> {
    let [y1, y2, y3, y4] = y;
    let marks = [
        GenVertex::Midpoint([2 * y1[0], 2 * y1[1] - 1]),
        GenVertex::Midpoint([2 * y2[0], 2 * y2[1] - 1]),
        GenVertex::Corner([y3[0], y3[1] - 1], 2),
    ];
    HighTempGraph::new(domain, y3, y4, &marks)
}
