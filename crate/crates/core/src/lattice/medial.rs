//! Medial graph of a Dobrushin domain.
//!
//! Medial vertices are edge midpoints, stored in doubled coordinates.
//! A medial edge is a corner (site, quadrant) and is oriented clockwise
//! around its site, hence counterclockwise around the dual vertex.
//! Quadrants: 0 = NE, 1 = NW, 2 = SW, 3 = SE; quadrant q sits between
//! directions q and q + 1.

use std::collections::HashMap;

use super::{LatticeDomain, Point, DIRS, NONE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MedialEdge {
    pub site: u32,
    pub quadrant: u8,
    pub from: u32,
    pub to: u32,
}

impl MedialEdge {
    /// Direction index in units of π/2 counted from angle π/4:
    /// 0 = NE, 1 = NW, 2 = SW, 3 = SE.
    pub fn heading(&self) -> u8 {
        // clockwise corner in quadrant q heads along q + 3 (mod 4)
        (self.quadrant + 3) % 4
    }
}

#[derive(Clone, Debug)]
pub struct MedialGraph {
    vertices: Vec<Point>,
    vertex_index: HashMap<Point, u32>,
    edges: Vec<MedialEdge>,
    corner_index: HashMap<(u32, u8), u32>,
    // domain edge under each medial vertex, NONE for stubs leaving the domain
    primal: Vec<u32>,
    succ_open: Vec<u32>,
    succ_closed: Vec<u32>,
    incoming: Vec<Vec<u32>>,
    outgoing: Vec<Vec<u32>>,
}

fn mid(v: Point, d: usize) -> Point {
    [2 * v[0] + DIRS[d][0], 2 * v[1] + DIRS[d][1]]
}

fn face_is_interior(domain: &LatticeDomain, v: Point, q: u8) -> bool {
    let (sx, sy) = match q {
        0 => (1, 1),
        1 => (-1, 1),
        2 => (-1, -1),
        _ => (1, -1),
    };
    [[v[0] + sx, v[1]], [v[0], v[1] + sy], [v[0] + sx, v[1] + sy]]
        .iter()
        .all(|&p| domain.contains(p))
}

impl MedialGraph {
    fn build(domain: &LatticeDomain, corners: &[(u32, u8)]) -> Self {
        let mut g = MedialGraph {
            vertices: Vec::new(),
            vertex_index: HashMap::new(),
            edges: Vec::with_capacity(corners.len()),
            corner_index: HashMap::new(),
            primal: Vec::new(),
            succ_open: Vec::new(),
            succ_closed: Vec::new(),
            incoming: Vec::new(),
            outgoing: Vec::new(),
        };
        let vertex = |g: &mut MedialGraph, site: u32, d: usize| -> u32 {
            let m = mid(domain.site(site), d);
            if let Some(&i) = g.vertex_index.get(&m) {
                return i;
            }
            let i = g.vertices.len() as u32;
            g.vertices.push(m);
            g.vertex_index.insert(m, i);
            g.primal.push(domain.edge_towards(site, d));
            g.incoming.push(Vec::new());
            g.outgoing.push(Vec::new());
            i
        };
        for &(site, q) in corners {
            let from = vertex(&mut g, site, (q as usize + 1) % 4);
            let to = vertex(&mut g, site, q as usize);
            let id = g.edges.len() as u32;
            g.edges.push(MedialEdge { site, quadrant: q, from, to });
            g.corner_index.insert((site, q), id);
            g.outgoing[from as usize].push(id);
            g.incoming[to as usize].push(id);
        }
        for e in 0..g.edges.len() {
            let MedialEdge { site, quadrant: q, .. } = g.edges[e];
            let p = domain.site(site);
            let step = DIRS[q as usize];
            let open = domain
                .index_of([p[0] + step[0], p[1] + step[1]])
                .and_then(|v| g.corner_index.get(&(v, (q + 1) % 4)).copied())
                .unwrap_or(NONE);
            let closed = g.corner_index.get(&(site, (q + 3) % 4)).copied().unwrap_or(NONE);
            g.succ_open.push(open);
            g.succ_closed.push(closed);
        }
        g
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Doubled coordinates of a medial vertex.
    pub fn vertex(&self, v: u32) -> Point {
        self.vertices[v as usize]
    }

    pub fn vertex_at(&self, doubled: Point) -> Option<u32> {
        self.vertex_index.get(&doubled).copied()
    }

    pub fn edge(&self, e: u32) -> MedialEdge {
        self.edges[e as usize]
    }

    pub fn edges(&self) -> &[MedialEdge] {
        &self.edges
    }

    pub fn corner(&self, site: u32, quadrant: u8) -> Option<u32> {
        self.corner_index.get(&(site, quadrant)).copied()
    }

    pub fn incoming(&self, v: u32) -> &[u32] {
        &self.incoming[v as usize]
    }

    pub fn outgoing(&self, v: u32) -> &[u32] {
        &self.outgoing[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.incoming[v as usize].len() + self.outgoing[v as usize].len()
    }

    /// Domain edge under a medial vertex; `None` for stubs.
    pub fn primal_edge(&self, v: u32) -> Option<u32> {
        let e = self.primal[v as usize];
        (e != NONE).then_some(e)
    }

    /// Next medial edge along an interface after `e`, given the primal edge
    /// states. Forced moves ignore the state; `None` at the outer corner.
    pub fn successor(&self, e: u32, is_open: impl Fn(u32) -> bool) -> Option<u32> {
        let o = self.succ_open[e as usize];
        let c = self.succ_closed[e as usize];
        match (o != NONE, c != NONE) {
            (true, true) => {
                let v = self.edges[e as usize].to;
                Some(if is_open(self.primal[v as usize]) { o } else { c })
            }
            (true, false) => Some(o),
            (false, true) => Some(c),
            (false, false) => None,
        }
    }

    /// Turn from `a` into `b` in quarter turns, +1 counterclockwise.
    pub fn turn(&self, a: u32, b: u32) -> i8 {
        let ha = self.edges[a as usize].heading() as i8;
        let hb = self.edges[b as usize].heading() as i8;
        match (hb - ha).rem_euclid(4) {
            1 => 1,
            3 => -1,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DobrushinDomain {
    base: LatticeDomain,
    x1: u32,
    x2: u32,
    wired_sites: Vec<u32>,
    medial: MedialGraph,
    w1: u32,
    w2: u32,
    e1: u32,
    e2: u32,
    x1m: u32,
    x2m: u32,
    arc_wired: Vec<u32>,
    arc_free: Vec<u32>,
}

/// Mark x₁, x₂ on the boundary; the arc from x₁ to x₂ counterclockwise is wired.
pub fn build_dobrushin(domain: LatticeDomain, x1: Point, x2: Point) -> Result<DobrushinDomain> {
    if x1 == x2 {
        return Err(Error::InvalidMarking("x1 and x2 must be distinct".into()));
    }
    let i1 = domain.require_boundary(x1)?;
    let i2 = domain.require_boundary(x2)?;
    let walk = domain.boundary_walk();
    // exterior corners in walk order, remembering which visit swept them
    let mut ext: Vec<(u32, u8)> = Vec::new();
    let mut span: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
    for &(site, din, dout) in &walk {
        let a = (din + 2) % 4;
        let mut count = (dout + 4 - a) % 4;
        if count == 0 {
            count = 4;
        }
        let start = ext.len();
        for k in 0..count {
            ext.push((site, ((a + k) % 4) as u8));
        }
        span.entry(site).or_default().push((start, count));
    }
    let visit = |i: u32, name: &str| -> Result<(usize, usize)> {
        match span.get(&i).map(|v| v.as_slice()) {
            Some([one]) if one.1 >= 2 => Ok(*one),
            Some([_]) => Err(Error::InvalidMarking(format!("{name} sits in a concave corner"))),
            _ => Err(Error::InvalidMarking(format!("{name} is visited more than once by the boundary"))),
        }
    };
    let (s1, _) = visit(i1, "x1")?;
    let (s2, c2) = visit(i2, "x2")?;
    let l2 = s2 + c2 - 1;
    let n = ext.len();
    let mut wired_corner = vec![false; n];
    let mut k = (s1 + 1) % n;
    while k != l2 {
        wired_corner[k] = true;
        k = (k + 1) % n;
    }
    let mut corners: Vec<(u32, u8)> = Vec::new();
    for s in 0..domain.num_sites() as u32 {
        let p = domain.site(s);
        for q in 0..4u8 {
            if face_is_interior(&domain, p, q) {
                corners.push((s, q));
            }
        }
    }
    corners.extend(ext.iter().zip(&wired_corner).filter(|(_, &w)| !w).map(|(c, _)| *c));
    corners.sort_unstable();
    let medial = MedialGraph::build(&domain, &corners);

    let e1 = medial.corner(ext[s1].0, ext[s1].1).unwrap();
    let e2 = medial.corner(ext[l2].0, ext[l2].1).unwrap();
    let w1 = medial.edge(e1).from;
    let x1m = medial.edge(e1).to;
    let x2m = medial.edge(e2).from;
    let w2 = medial.edge(e2).to;
    for v in 0..medial.num_vertices() as u32 {
        if v == w1 || v == w2 {
            continue;
        }
        let (i, o) = (medial.incoming(v).len(), medial.outgoing(v).len());
        if i != o || !(i == 1 || i == 2) {
            return Err(Error::Internal(format!(
                "medial vertex {:?} has in/out degree {i}/{o}",
                medial.vertex(v)
            )));
        }
    }
    let wired_sites = domain.boundary_arc(i1, i2)?;
    let mut dob = DobrushinDomain {
        base: domain,
        x1: i1,
        x2: i2,
        wired_sites,
        medial,
        w1,
        w2,
        e1,
        e2,
        x1m,
        x2m,
        arc_wired: Vec::new(),
        arc_free: Vec::new(),
    };
    let hug = |dob: &DobrushinDomain, open: bool| -> Result<Vec<u32>> {
        let path = dob.trace_path(|_| open)?;
        Ok(path[1..path.len() - 1].to_vec())
    };
    dob.arc_wired = hug(&dob, false)?;
    // the free side is walked against the medial orientation
    let mut free = hug(&dob, true)?;
    free.reverse();
    dob.arc_free = free;
    Ok(dob)
}

impl DobrushinDomain {
    pub fn base(&self) -> &LatticeDomain {
        &self.base
    }

    /// Forget the marks.
    pub fn into_base(self) -> LatticeDomain {
        self.base
    }

    pub fn x1(&self) -> u32 {
        self.x1
    }

    pub fn x2(&self) -> u32 {
        self.x2
    }

    /// Sites of the wired arc (x₁ x₂).
    pub fn wired_sites(&self) -> &[u32] {
        &self.wired_sites
    }

    pub fn medial(&self) -> &MedialGraph {
        &self.medial
    }

    /// Outer corners w₁⋄, w₂⋄.
    pub fn outer_corners(&self) -> (u32, u32) {
        (self.w1, self.w2)
    }

    /// Outer corner edges e₁⋄ (leaving w₁⋄) and e₂⋄ (ending at w₂⋄).
    pub fn outer_corner_edges(&self) -> (u32, u32) {
        (self.e1, self.e2)
    }

    /// Medial vertices x₁⋄, x₂⋄.
    pub fn marked_medial(&self) -> (u32, u32) {
        (self.x1m, self.x2m)
    }

    /// Medial edges of the arc (x₁⋄ x₂⋄), in orientation order.
    pub fn wired_arc(&self) -> &[u32] {
        &self.arc_wired
    }

    /// Medial edges of the arc (x₂⋄ x₁⋄), listed from x₂⋄; each edge is
    /// walked against its orientation.
    pub fn free_arc(&self) -> &[u32] {
        &self.arc_free
    }

    /// Vertex sequence of (x₁⋄ x₂⋄).
    pub fn wired_arc_vertices(&self) -> Vec<u32> {
        let mut v = vec![self.x1m];
        v.extend(self.arc_wired.iter().map(|&e| self.medial.edge(e).to));
        v
    }

    /// Vertex sequence of (x₂⋄ x₁⋄).
    pub fn free_arc_vertices(&self) -> Vec<u32> {
        let mut v = vec![self.x2m];
        v.extend(self.arc_free.iter().map(|&e| self.medial.edge(e).from));
        v
    }

    /// Degree-2 medial vertex on the free arc next to a site, with its
    /// incoming and outgoing edges (e₋, e₊).
    pub fn free_boundary_vertex(&self, site: u32) -> Option<(u32, u32, u32)> {
        let free = self.free_arc_vertices();
        let p = self.base.site(site);
        (0..4).find_map(|d| {
            let v = self.medial.vertex_at(mid(p, d))?;
            if self.medial.degree(v) != 2 || !free.contains(&v) || v == self.x1m || v == self.x2m {
                return None;
            }
            Some((v, self.medial.incoming(v)[0], self.medial.outgoing(v)[0]))
        })
    }

    /// Follow the interface from e₁⋄ to e₂⋄.
    pub fn trace_path(&self, is_open: impl Fn(u32) -> bool) -> Result<Vec<u32>> {
        let mut path = vec![self.e1];
        let limit = self.medial.num_edges();
        let mut e = self.e1;
        while let Some(next) = self.medial.successor(e, &is_open) {
            path.push(next);
            if path.len() > limit {
                return Err(Error::Internal("interface does not terminate".into()));
            }
            e = next;
        }
        if e != self.e2 {
            return Err(Error::Internal("interface stopped before e2".into()));
        }
        Ok(path)
    }
}
