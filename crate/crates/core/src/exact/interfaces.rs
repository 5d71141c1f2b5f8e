//! Interfaces and loops drawn on the medial graph of a Dobrushin domain.

use crate::error::{Error, Result};
use crate::lattice::DobrushinDomain;

/// The interface γ from e₁⋄ to e₂⋄ and the loops made of all other medial
/// edges. Windings are in quarter turns, counterclockwise positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interfaces {
    pub path: Vec<u32>,
    /// `turns[i]` turns from `path[i]` into `path[i + 1]`.
    pub turns: Vec<i8>,
    /// Accumulated turning from `path[0]` up to `path[i]`.
    pub winding: Vec<i32>,
    pub loops: Vec<Vec<u32>>,
}

impl Interfaces {
    pub fn position(&self, e: u32) -> Option<usize> {
        self.path.iter().position(|&x| x == e)
    }

    /// Forward turning along γ from `path[i]` to e₂⋄.
    pub fn winding_to_end(&self, i: usize) -> i32 {
        self.winding[self.winding.len() - 1] - self.winding[i]
    }

    pub fn edges_used(&self) -> usize {
        self.path.len() + self.loops.iter().map(Vec::len).sum::<usize>()
    }
}

pub(crate) fn cumulative_winding(dob: &DobrushinDomain, path: &[u32], turns: &mut Vec<i8>, winding: &mut Vec<i32>) {
    let g = dob.medial();
    turns.clear();
    winding.clear();
    winding.push(0);
    for w in path.windows(2) {
        let t = g.turn(w[0], w[1]);
        turns.push(t);
        winding.push(winding[winding.len() - 1] + t as i32);
    }
}

/// Decompose the medial edges for the primal edge states `open`, indexed
/// like the domain edges.
pub fn trace_interfaces(open: &[bool], dob: &DobrushinDomain) -> Result<Interfaces> {
    let g = dob.medial();
    if open.len() < dob.base().num_edges() {
        return Err(Error::Config(format!(
            "{} edge states for a domain with {} edges",
            open.len(),
            dob.base().num_edges()
        )));
    }
    let is_open = |e: u32| open[e as usize];
    let path = dob.trace_path(is_open)?;
    let mut used = vec![false; g.num_edges()];
    for &e in &path {
        if std::mem::replace(&mut used[e as usize], true) {
            return Err(Error::Internal("interface visits a medial edge twice".into()));
        }
    }
    let mut loops = Vec::new();
    for start in 0..g.num_edges() as u32 {
        if used[start as usize] {
            continue;
        }
        let mut lp = vec![start];
        used[start as usize] = true;
        let mut e = start;
        loop {
            let next = g
                .successor(e, is_open)
                .ok_or_else(|| Error::Internal("loop runs into the outer corner".into()))?;
            if next == start {
                break;
            }
            if std::mem::replace(&mut used[next as usize], true) {
                return Err(Error::Internal("loops share a medial edge".into()));
            }
            lp.push(next);
            e = next;
        }
        loops.push(lp);
    }
    let (mut turns, mut winding) = (Vec::new(), Vec::new());
    cumulative_winding(dob, &path, &mut turns, &mut winding);
    Ok(Interfaces { path, turns, winding, loops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_box;
    use crate::lattice::build_dobrushin;

    fn dob() -> DobrushinDomain {
        build_dobrushin(build_box(1.0, [[0.0, 0.0], [2.0, 2.0]]).unwrap(), [0, 0], [2, 0]).unwrap()
    }

    #[test]
    fn all_open_hugs_free_arc() {
        let d = dob();
        let m = d.base().num_edges();
        let it = trace_interfaces(&vec![true; m], &d).unwrap();
        assert_eq!(&it.path[1..it.path.len() - 1], &d.free_arc().iter().rev().copied().collect::<Vec<_>>()[..]);
        // one loop around each of the four dual vertices
        assert_eq!(it.loops.len(), 4);
        assert!(it.loops.iter().all(|l| l.len() == 4));
        assert_eq!(it.edges_used(), d.medial().num_edges());
    }

    #[test]
    fn all_closed_hugs_wired_arc() {
        let d = dob();
        let m = d.base().num_edges();
        let it = trace_interfaces(&vec![false; m], &d).unwrap();
        assert_eq!(&it.path[1..it.path.len() - 1], d.wired_arc());
        // the centre site and the two upper corners are enclosed by loops;
        // the remaining loops run around the sites of the free arc
        assert_eq!(it.edges_used(), d.medial().num_edges());
        assert!(it.loops.iter().any(|l| l.len() == 4));
    }

    #[test]
    fn windings_along_path() {
        let d = dob();
        let m = d.base().num_edges();
        let it = trace_interfaces(&vec![true; m], &d).unwrap();
        assert_eq!(it.turns.len() + 1, it.path.len());
        assert_eq!(it.winding_to_end(it.path.len() - 1), 0);
        let g = d.medial();
        let (e1, e2) = d.outer_corner_edges();
        // net turning between the two outer corner headings
        let net = (g.edge(e2).heading() as i32 - g.edge(e1).heading() as i32).rem_euclid(4);
        assert_eq!(it.winding_to_end(0).rem_euclid(4), net);
    }
}
