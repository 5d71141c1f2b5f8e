//! FK-Ising fermionic observable on a Dobrushin domain by full enumeration.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;
use twofloat::TwoFloat;

use super::fk::ConfigWalker;
use super::interfaces::cumulative_winding;
use super::{tf, weighted_sum};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lattice::DobrushinDomain;
use crate::lattice::{BoundarySpec, Point};
use crate::model::{ModelGraph, ModelParams};

/// Observable values on medial edges and vertices. Vertices without a
/// defined value (outer corners and the marked vertices) hold `None`.
#[derive(Clone, Debug, Serialize)]
pub struct ObservableField {
    pub edges: Vec<Complex64>,
    pub vertices: Vec<Option<Complex64>>,
    /// Unit phase making the anchor configuration's contribution at the
    /// probe vertex positive real.
    pub sign_anchor: Complex64,
}

impl ObservableField {
    pub fn anchored_vertex(&self, v: u32) -> Option<Complex64> {
        self.vertices[v as usize].map(|z| z * self.sign_anchor)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservableReport {
    pub field: ObservableField,
    /// u₃⋄ and its edges e₃,₋⋄, e₃,₊⋄
    pub probe: (u32, u32, u32),
    pub value: Complex64,
    /// P[u₃ ↔ wired arc]
    pub probability: f64,
    pub passage_minus: f64,
    pub passage_plus: f64,
    /// Configurations where the three events of the identity disagree.
    pub event_mismatches: u64,
    /// Distinct forward windings from e₃,₋⋄ to e₂⋄, in quarter turns.
    pub windings_minus: BTreeSet<i32>,
    pub windings_plus: BTreeSet<i32>,
    /// |F(u₃⋄) − 2√2 cos(π/8)·P| after anchoring.
    pub residual: f64,
}

/// ν(e) = (e/|e|)^{−1/2} on the principal branch, for heading h (angle π/4 + hπ/2).
fn nu(heading: u8) -> Complex64 {
    let mut theta = FRAC_PI_4 + heading as f64 * PI / 2.0;
    if theta > PI {
        theta -= 2.0 * PI;
    }
    Complex64::from_polar(1.0, -theta / 2.0)
}

fn phase(class: usize) -> Complex64 {
    Complex64::from_polar(1.0, class as f64 * FRAC_PI_4)
}

struct Acc {
    // per medial edge, per phase class e^{iπc/4}
    edge: Vec<[TwoFloat; 8]>,
    z: Vec<i64>,
    conn: Vec<i64>,
    minus: Vec<i64>,
    plus: Vec<i64>,
    mismatches: u64,
    wind_minus: BTreeSet<i32>,
    wind_plus: BTreeSet<i32>,
    path: Vec<u32>,
    turns: Vec<i8>,
    winding: Vec<i32>,
}

/// Edge and vertex observable, plus the checks tying F(u₃⋄) to
/// P[u₃ ↔ (x₁ x₂)], for the probe site `u3` on the free arc.
pub fn fermionic_observable_dobrushin(dob: &DobrushinDomain, u3: Point, exec: Exec) -> Result<ObservableReport> {
    let base = dob.base();
    let x1 = base.site(dob.x1());
    let x2 = base.site(dob.x2());
    let graph = ModelGraph::new(base, &BoundarySpec::dobrushin(x1, x2))?;
    let ghost = graph.plus_ghost().ok_or_else(|| Error::Internal("Dobrushin graph without ghost".into()))?;
    let u3i = crate::lattice::site_or_err(base, u3)?;
    let (v3, e3m, e3p) = dob
        .free_boundary_vertex(u3i)
        .ok_or_else(|| Error::InvalidPoint(format!("{u3:?} has no medial vertex on the free arc")))?;
    let params = ModelParams::critical();
    let walker = ConfigWalker::new(&graph)?;
    let weights = walker.weights(&params);
    let g = dob.medial();
    let (e1, e2) = dob.outer_corner_edges();
    let n_slots = walker.slots();
    let ne = g.num_edges();

    let parts = walker.run(
        exec,
        || Acc {
            edge: vec![[tf(0.0); 8]; ne],
            z: vec![0; n_slots],
            conn: vec![0; n_slots],
            minus: vec![0; n_slots],
            plus: vec![0; n_slots],
            mismatches: 0,
            wind_minus: BTreeSet::new(),
            wind_plus: BTreeSet::new(),
            path: Vec::with_capacity(ne),
            turns: Vec::with_capacity(ne),
            winding: Vec::with_capacity(ne),
        },
        |acc, open, labels, slot| {
            acc.path.clear();
            acc.path.push(e1);
            let mut e = e1;
            while let Some(next) = g.successor(e, |p| open[p as usize]) {
                acc.path.push(next);
                e = next;
            }
            debug_assert_eq!(e, e2);
            cumulative_winding(dob, &acc.path, &mut acc.turns, &mut acc.winding);
            let total = acc.winding[acc.winding.len() - 1];
            let w = weights[slot];
            let (mut pm, mut pp) = (false, false);
            for (i, &e) in acc.path.iter().enumerate() {
                let t = total - acc.winding[i];
                // e^{−iπT/4}
                let class = (-t).rem_euclid(8) as usize;
                acc.edge[e as usize][class] += w;
                if e == e3m {
                    pm = true;
                    acc.wind_minus.insert(t);
                }
                if e == e3p {
                    pp = true;
                    acc.wind_plus.insert(t);
                }
            }
            let c = labels.connected(u3i, ghost);
            acc.z[slot] += 1;
            acc.conn[slot] += c as i64;
            acc.minus[slot] += pm as i64;
            acc.plus[slot] += pp as i64;
            if c != pm || c != pp {
                acc.mismatches += 1;
            }
        },
    );

    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one work unit");
    for p in it {
        for (a, b) in acc.edge.iter_mut().zip(&p.edge) {
            for c in 0..8 {
                a[c] += b[c];
            }
        }
        for (t, x) in [(&mut acc.z, &p.z), (&mut acc.conn, &p.conn), (&mut acc.minus, &p.minus), (&mut acc.plus, &p.plus)] {
            t.iter_mut().zip(x).for_each(|(a, b)| *a += b);
        }
        acc.mismatches += p.mismatches;
        acc.wind_minus.extend(p.wind_minus);
        acc.wind_plus.extend(p.wind_plus);
    }
    let z = weighted_sum(&acc.z, &weights);
    let prob = |h: &[i64]| -> f64 { (weighted_sum(h, &weights) / z).into() };
    let nu2 = nu(g.edge(e2).heading());
    let edges: Vec<Complex64> = acc
        .edge
        .iter()
        .map(|s| {
            let v = (0..8).fold(Complex64::new(0.0, 0.0), |a, c| a + phase(c) * f64::from(s[c] / z));
            nu2 * v
        })
        .collect();

    let (x1m, x2m) = dob.marked_medial();
    let (w1, w2) = dob.outer_corners();
    let free: BTreeSet<u32> = dob.free_arc_vertices().into_iter().collect();
    let rot = Complex64::from_polar(SQRT_2, -FRAC_PI_4);
    let rot_c = rot.conj();
    let vertex_value = |v: u32| -> Option<Complex64> {
        if [x1m, x2m, w1, w2].contains(&v) {
            return None;
        }
        match g.degree(v) {
            4 => Some(g.incoming(v).iter().chain(g.outgoing(v)).map(|&e| edges[e as usize]).sum::<Complex64>() * 0.5),
            2 => {
                let em = edges[g.incoming(v)[0] as usize];
                let ep = edges[g.outgoing(v)[0] as usize];
                Some(if free.contains(&v) { rot * em + rot_c * ep } else { rot * ep + rot_c * em })
            }
            _ => None,
        }
    };
    let vertices: Vec<Option<Complex64>> = (0..g.num_vertices() as u32).map(vertex_value).collect();

    // anchor: all edges open, where γ hugs the free arc through e₃,₋⋄ and e₃,₊⋄
    let anchor_open = vec![true; graph.num_edges()];
    let path = dob.trace_path(|p| anchor_open[p as usize])?;
    let (mut turns, mut winding) = (Vec::new(), Vec::new());
    cumulative_winding(dob, &path, &mut turns, &mut winding);
    let total = winding[winding.len() - 1];
    let contrib = |e: u32| -> Complex64 {
        path.iter()
            .position(|&x| x == e)
            .map(|i| phase((winding[i] - total).rem_euclid(8) as usize))
            .unwrap_or_default()
    };
    let c = nu2 * (rot * contrib(e3m) + rot_c * contrib(e3p));
    if c.norm() == 0.0 {
        return Err(Error::Internal("anchor configuration does not reach the probe".into()));
    }
    let sign_anchor = c.conj() / c.norm();

    let field = ObservableField { edges, vertices, sign_anchor };
    let value = field.anchored_vertex(v3).expect("probe vertex has a value");
    let probability = prob(&acc.conn);
    let target = 2.0 * SQRT_2 * (PI / 8.0).cos() * probability;
    Ok(ObservableReport {
        probe: (v3, e3m, e3p),
        value,
        probability,
        passage_minus: prob(&acc.minus),
        passage_plus: prob(&acc.plus),
        event_mismatches: acc.mismatches,
        windings_minus: acc.wind_minus,
        windings_plus: acc.wind_plus,
        residual: (value - Complex64::new(target, 0.0)).norm(),
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_box;
    use crate::lattice::build_dobrushin;

    #[test]
    fn nu_has_unit_modulus() {
        for h in 0..4 {
            assert!((nu(h).norm() - 1.0).abs() < 1e-15);
        }
        // ν² is the inverse direction
        let d = Complex64::from_polar(1.0, FRAC_PI_4);
        assert!((nu(0) * nu(0) * d - 1.0).norm() < 1e-15);
    }

    #[test]
    fn identity_on_small_box() {
        let d = build_box(1.0, [[0.0, 0.0], [2.0, 1.0]]).unwrap();
        let dob = build_dobrushin(d, [0, 0], [2, 0]).unwrap();
        let r = fermionic_observable_dobrushin(&dob, [1, 1], Exec::Sequential).unwrap();
        assert_eq!(r.event_mismatches, 0);
        assert_eq!(r.windings_minus.len(), 1);
        assert!(r.residual < 1e-12, "{r:?}");
        assert!((r.passage_minus - r.probability).abs() < 1e-15);
    }
}
