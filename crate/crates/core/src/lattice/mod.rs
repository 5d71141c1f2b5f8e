//! Square-lattice domains, boundary specifications and geometric queries.
//!
//! Vertices are stored in integer lattice units; the mesh only enters
//! metric queries such as [`ball_boundary`].

mod medial;

pub use medial::{build_dobrushin, DobrushinDomain, MedialEdge, MedialGraph};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [i64; 2];

/// Unit steps indexed E, N, W, S (counterclockwise).
pub const DIRS: [Point; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];

pub const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeTag {
    Box,
    HalfPlaneStrip,
    Custom,
}

#[derive(Clone, Debug)]
pub struct LatticeDomain {
    mesh: f64,
    shape: ShapeTag,
    sites: Vec<Point>,
    edges: Vec<[u32; 2]>,
    boundary: Vec<bool>,
    // neighbour site per direction, NONE when outside
    nbr: Vec<[u32; 4]>,
    // edge id per direction, NONE when absent
    nbr_edge: Vec<[u32; 4]>,
    origin: Point,
    width: usize,
    height: usize,
    grid: Vec<u32>,
}

impl PartialEq for LatticeDomain {
    fn eq(&self, other: &Self) -> bool {
        self.mesh == other.mesh
            && self.shape == other.shape
            && self.sites == other.sites
            && self.edges == other.edges
    }
}

impl LatticeDomain {
    /// Induced subgraph of Z² on the given sites. Must be connected and
    /// without holes.
    pub fn from_sites<I>(mesh: f64, shape: ShapeTag, sites: I) -> Result<Self>
    where
        I: IntoIterator<Item = Point>,
    {
        if !(mesh > 0.0 && mesh.is_finite()) {
            return Err(Error::InvalidGeometry(format!("mesh must be positive, got {mesh}")));
        }
        let mut sites: Vec<Point> = sites.into_iter().collect();
        // row-major order: y first, then x
        sites.sort_by_key(|p| (p[1], p[0]));
        sites.dedup();
        if sites.is_empty() {
            return Err(Error::InvalidGeometry("domain has no vertices".into()));
        }
        let xmin = sites.iter().map(|p| p[0]).min().unwrap();
        let xmax = sites.iter().map(|p| p[0]).max().unwrap();
        let ymin = sites.iter().map(|p| p[1]).min().unwrap();
        let ymax = sites.iter().map(|p| p[1]).max().unwrap();
        let width = (xmax - xmin + 1) as usize;
        let height = (ymax - ymin + 1) as usize;
        let mut grid = vec![NONE; width * height];
        for (i, p) in sites.iter().enumerate() {
            grid[(p[1] - ymin) as usize * width + (p[0] - xmin) as usize] = i as u32;
        }
        let mut dom = LatticeDomain {
            mesh,
            shape,
            sites,
            edges: Vec::new(),
            boundary: Vec::new(),
            nbr: Vec::new(),
            nbr_edge: Vec::new(),
            origin: [xmin, ymin],
            width,
            height,
            grid,
        };
        let n = dom.sites.len();
        dom.nbr = (0..n)
            .map(|i| {
                let p = dom.sites[i];
                let mut out = [NONE; 4];
                for (d, s) in DIRS.iter().enumerate() {
                    out[d] = dom.index_of([p[0] + s[0], p[1] + s[1]]).unwrap_or(NONE);
                }
                out
            })
            .collect();
        // edges sorted lexicographically by (low, high) endpoint index
        for i in 0..n {
            for d in [0usize, 1] {
                let j = dom.nbr[i][d];
                if j != NONE {
                    dom.edges.push([i as u32, j]);
                }
            }
        }
        dom.edges.sort_unstable();
        dom.nbr_edge = vec![[NONE; 4]; n];
        for (e, &[a, b]) in dom.edges.iter().enumerate() {
            let d = (0..4).find(|&d| dom.nbr[a as usize][d] == b).unwrap();
            dom.nbr_edge[a as usize][d] = e as u32;
            dom.nbr_edge[b as usize][(d + 2) % 4] = e as u32;
        }
        dom.boundary = dom.nbr.iter().map(|nb| nb.iter().any(|&j| j == NONE)).collect();
        dom.check_topology()?;
        Ok(dom)
    }

    fn check_topology(&self) -> Result<()> {
        let n = self.sites.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &self.nbr[i] {
                if j != NONE && !seen[j as usize] {
                    seen[j as usize] = true;
                    count += 1;
                    stack.push(j as usize);
                }
            }
        }
        if count != n {
            return Err(Error::InvalidGeometry("domain is not connected".into()));
        }
        if self.euler_characteristic() != 2 {
            return Err(Error::InvalidGeometry("domain has holes".into()));
        }
        Ok(())
    }

    /// V − E + F with F counting unit squares plus the outer face.
    pub fn euler_characteristic(&self) -> i64 {
        let faces = self.unit_faces().count() as i64 + 1;
        self.sites.len() as i64 - self.edges.len() as i64 + faces
    }

    /// Lower-left corners of the unit squares whose four vertices lie in the domain.
    pub fn unit_faces(&self) -> impl Iterator<Item = Point> + '_ {
        self.sites.iter().copied().filter(move |&[x, y]| {
            self.contains([x + 1, y]) && self.contains([x, y + 1]) && self.contains([x + 1, y + 1])
        })
    }

    /// SHA-256 over mesh, shape tag and site list, hex encoded.
    pub fn fingerprint(&self) -> String {
        let doc = serde_json::json!({ "mesh": self.mesh, "shape_tag": self.shape, "sites": self.sites });
        crate::exact::sha256_hex(doc.to_string().as_bytes())
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn shape(&self) -> ShapeTag {
        self.shape
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn site(&self, i: u32) -> Point {
        self.sites[i as usize]
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary(&self, i: u32) -> bool {
        self.boundary[i as usize]
    }

    pub fn boundary_sites(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.sites.len() as u32).filter(move |&i| self.boundary[i as usize])
    }

    pub fn neighbors(&self, i: u32) -> [u32; 4] {
        self.nbr[i as usize]
    }

    pub fn edge_towards(&self, i: u32, dir: usize) -> u32 {
        self.nbr_edge[i as usize][dir]
    }

    pub fn edge_between(&self, a: u32, b: u32) -> Option<u32> {
        (0..4)
            .find(|&d| self.nbr[a as usize][d] == b)
            .map(|d| self.nbr_edge[a as usize][d])
    }

    pub fn index_of(&self, p: Point) -> Option<u32> {
        let x = p[0] - self.origin[0];
        let y = p[1] - self.origin[1];
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return None;
        }
        let i = self.grid[y as usize * self.width + x as usize];
        (i != NONE).then_some(i)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.index_of(p).is_some()
    }

    /// Bounding box as (lower-left, upper-right) lattice points.
    pub fn bounds(&self) -> (Point, Point) {
        (
            self.origin,
            [
                self.origin[0] + self.width as i64 - 1,
                self.origin[1] + self.height as i64 - 1,
            ],
        )
    }

    /// Physical position of a site.
    pub fn position(&self, i: u32) -> [f64; 2] {
        let p = self.sites[i as usize];
        [p[0] as f64 * self.mesh, p[1] as f64 * self.mesh]
    }

    /// Counterclockwise walk around the outer boundary with the domain on the
    /// left. Each step is (site, incoming direction, outgoing direction).
    pub fn boundary_walk(&self) -> Vec<(u32, usize, usize)> {
        let mut walk = Vec::new();
        if self.edges.is_empty() {
            return walk;
        }
        // site 0 is lowest, then leftmost: nothing to its west or south
        let turn = |site: u32, din: usize| -> usize {
            for k in [3usize, 0, 1, 2] {
                let d = (din + k) % 4;
                if self.nbr[site as usize][d] != NONE {
                    return d;
                }
            }
            unreachable!("connected domain with edges")
        };
        let start = 0u32;
        let d0 = turn(start, 3);
        let (mut site, mut din, mut dout) = (start, 3usize, d0);
        loop {
            walk.push((site, din, dout));
            site = self.nbr[site as usize][dout];
            din = dout;
            dout = turn(site, din);
            if site == start && dout == d0 {
                break;
            }
        }
        walk[0].1 = walk.last().map(|w| w.2).unwrap();
        walk
    }

    /// Boundary vertices met walking counterclockwise from `from` to `to`,
    /// both included.
    pub fn boundary_arc(&self, from: u32, to: u32) -> Result<Vec<u32>> {
        let walk = self.boundary_walk();
        let sites: Vec<u32> = if walk.is_empty() {
            vec![0]
        } else {
            walk.iter().map(|w| w.0).collect()
        };
        let start = sites
            .iter()
            .position(|&s| s == from)
            .ok_or_else(|| Error::InvalidMarking(format!("{:?} is not on the boundary", self.site(from))))?;
        if !sites.contains(&to) {
            return Err(Error::InvalidMarking(format!("{:?} is not on the boundary", self.site(to))));
        }
        let mut arc = Vec::new();
        let mut seen = HashSet::new();
        for k in 0..=sites.len() {
            let s = sites[(start + k) % sites.len()];
            if seen.insert(s) {
                arc.push(s);
            }
            if s == to {
                break;
            }
        }
        Ok(arc)
    }

    pub(crate) fn require_site(&self, p: Point) -> Result<u32> {
        self.index_of(p)
            .ok_or_else(|| Error::InvalidPoint(format!("{p:?} is not a vertex of the domain")))
    }

    fn require_boundary(&self, p: Point) -> Result<u32> {
        let i = self
            .index_of(p)
            .ok_or_else(|| Error::InvalidMarking(format!("{p:?} is not a vertex of the domain")))?;
        if !self.is_boundary(i) {
            return Err(Error::InvalidMarking(format!("{p:?} is not a boundary vertex")));
        }
        Ok(i)
    }
}

/// All lattice points of `mesh·Z²` inside the closed rectangle.
pub fn build_box(mesh: f64, corners: [[f64; 2]; 2]) -> Result<LatticeDomain> {
    build_rect(mesh, corners, ShapeTag::Box)
}

/// A tall box standing in for the half-plane; the bottom side plays the
/// role of the real line.
pub fn build_strip(mesh: f64, corners: [[f64; 2]; 2]) -> Result<LatticeDomain> {
    build_rect(mesh, corners, ShapeTag::HalfPlaneStrip)
}

fn build_rect(mesh: f64, corners: [[f64; 2]; 2], shape: ShapeTag) -> Result<LatticeDomain> {
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(Error::InvalidGeometry(format!("mesh must be positive, got {mesh}")));
    }
    let [a, b] = corners;
    let (x0, x1) = (a[0].min(b[0]), a[0].max(b[0]));
    let (y0, y1) = (a[1].min(b[1]), a[1].max(b[1]));
    if !(x1 - x0 > 0.0 && y1 - y0 > 0.0) {
        return Err(Error::InvalidGeometry("rectangle has zero area".into()));
    }
    // tolerate corners that are lattice points up to rounding
    let eps = 1e-9;
    let ix0 = (x0 / mesh - eps).ceil() as i64;
    let ix1 = (x1 / mesh + eps).floor() as i64;
    let iy0 = (y0 / mesh - eps).ceil() as i64;
    let iy1 = (y1 / mesh + eps).floor() as i64;
    if ix1 <= ix0 || iy1 <= iy0 {
        return Err(Error::InvalidGeometry(
            "rectangle contains fewer than two lattice columns or rows".into(),
        ));
    }
    let sites = (iy0..=iy1).flat_map(|y| (ix0..=ix1).map(move |x| [x, y]));
    LatticeDomain::from_sites(mesh, shape, sites)
}

/// Discrete ∂B_r(center): sites strictly inside the ball with a domain
/// neighbour at distance ≥ r. Empty when `radius ≤ mesh`.
pub fn ball_boundary(domain: &LatticeDomain, center: [f64; 2], radius: f64) -> Vec<u32> {
    let a = domain.mesh();
    if !(radius > a) {
        return Vec::new();
    }
    let r2 = radius * radius;
    let d2 = |i: u32| {
        let p = domain.position(i);
        (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)
    };
    let (lo, hi) = domain.bounds();
    let xa = ((center[0] - radius) / a).floor().max(lo[0] as f64) as i64;
    let xb = ((center[0] + radius) / a).ceil().min(hi[0] as f64) as i64;
    let ya = ((center[1] - radius) / a).floor().max(lo[1] as f64) as i64;
    let yb = ((center[1] + radius) / a).ceil().min(hi[1] as f64) as i64;
    let mut out = Vec::new();
    for y in ya..=yb {
        for x in xa..=xb {
            let Some(i) = domain.index_of([x, y]) else { continue };
            if d2(i) >= r2 {
                continue;
            }
            if domain.neighbors(i).iter().any(|&j| j != NONE && d2(j) >= r2) {
                out.push(i);
            }
        }
    }
    out.sort_unstable();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Free,
    Wired,
    Dobrushin,
    MixedFreePlus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub kind: BoundaryKind,
    #[serde(default)]
    pub marked_points: Vec<Point>,
    /// Extra wired arcs as (from, to) pairs walked counterclockwise; each
    /// arc is its own partition block. Only meaningful with free kind.
    #[serde(default)]
    pub wired_arcs: Vec<[Point; 2]>,
}

impl BoundarySpec {
    pub fn free() -> Self {
        Self { kind: BoundaryKind::Free, marked_points: Vec::new(), wired_arcs: Vec::new() }
    }

    pub fn wired() -> Self {
        Self { kind: BoundaryKind::Wired, ..Self::free() }
    }

    pub fn dobrushin(x1: Point, x2: Point) -> Self {
        Self { kind: BoundaryKind::Dobrushin, marked_points: vec![x1, x2], wired_arcs: Vec::new() }
    }

    /// `points` are x₁ … x_{N+2}; the plus arc runs from x_{N+1} to x_{N+2}.
    pub fn mixed_free_plus(points: Vec<Point>) -> Self {
        Self { kind: BoundaryKind::MixedFreePlus, marked_points: points, wired_arcs: Vec::new() }
    }

    /// Resolve against a domain into ghost attachments.
    pub fn resolve(&self, domain: &LatticeDomain) -> Result<ResolvedBoundary> {
        let marked = self
            .marked_points
            .iter()
            .map(|&p| domain.require_boundary(p))
            .collect::<Result<Vec<_>>>()?;
        let mut out = ResolvedBoundary::default();
        match self.kind {
            BoundaryKind::Free => {}
            BoundaryKind::Wired => {
                out.plus_fused = domain.boundary_sites().collect();
            }
            BoundaryKind::Dobrushin => {
                if marked.len() != 2 {
                    return Err(Error::Config(format!(
                        "dobrushin boundary needs exactly two marked points, got {}",
                        marked.len()
                    )));
                }
                if marked[0] == marked[1] {
                    return Err(Error::InvalidMarking("x1 and x2 coincide".into()));
                }
                out.plus_fused = domain.boundary_arc(marked[0], marked[1])?;
            }
            BoundaryKind::MixedFreePlus => {
                if marked.len() < 2 {
                    return Err(Error::Config("mixed boundary needs the two plus-arc endpoints".into()));
                }
                let k = marked.len();
                out.plus_coupled = domain.boundary_arc(marked[k - 2], marked[k - 1])?;
            }
        }
        if !self.wired_arcs.is_empty() && self.kind != BoundaryKind::Free {
            return Err(Error::Config("explicit wired arcs need the free kind".into()));
        }
        let mut used: HashSet<u32> = HashSet::new();
        for &[a, b] in &self.wired_arcs {
            let arc = domain.boundary_arc(domain.require_boundary(a)?, domain.require_boundary(b)?)?;
            if arc.iter().any(|s| !used.insert(*s)) {
                return Err(Error::Config("wired arcs overlap".into()));
            }
            out.free_blocks.push(arc);
        }
        out.marked = marked;
        Ok(out)
    }
}

/// A boundary specification resolved to site indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResolvedBoundary {
    pub marked: Vec<u32>,
    /// Sites identified with the pinned +1 ghost.
    pub plus_fused: Vec<u32>,
    /// Sites joined by a coupling edge to the pinned +1 ghost, one edge per
    /// outside neighbour.
    pub plus_coupled: Vec<u32>,
    /// Wired arcs with their own unpinned ghost each.
    pub free_blocks: Vec<Vec<u32>>,
}

/// JSON description of a domain used by campaign configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub shape_tag: ShapeTag,
    pub mesh: f64,
    #[serde(default)]
    pub corners: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub sites: Option<Vec<Point>>,
}

impl DomainSpec {
    pub fn build(&self) -> Result<LatticeDomain> {
        match (self.shape_tag, &self.corners, &self.sites) {
            (ShapeTag::Box, Some(c), None) => build_box(self.mesh, *c),
            (ShapeTag::HalfPlaneStrip, Some(c), None) => build_strip(self.mesh, *c),
            (ShapeTag::Custom, None, Some(s)) => LatticeDomain::from_sites(self.mesh, ShapeTag::Custom, s.clone()),
            (ShapeTag::Custom, _, _) => Err(Error::Config("custom domains take `sites` only".into())),
            _ => Err(Error::Config("box and strip domains take `corners` only".into())),
        }
    }
}

pub(crate) fn site_or_err(domain: &LatticeDomain, p: Point) -> Result<u32> {
    domain.require_site(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square() {
        let d = build_box(1.0, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert_eq!(d.num_sites(), 4);
        assert_eq!(d.num_edges(), 4);
        assert_eq!(d.boundary_sites().count(), 4);
    }

    #[test]
    fn five_by_three() {
        let d = build_box(1.0, [[-2.0, 0.0], [2.0, 2.0]]).unwrap();
        assert_eq!(d.num_sites(), 15);
        assert_eq!(d.num_edges(), 22);
        assert_eq!(d.euler_characteristic(), 2);
    }

    #[test]
    fn half_mesh_same_graph() {
        let a = build_box(0.5, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let b = build_box(1.0, [[0.0, 0.0], [2.0, 2.0]]).unwrap();
        assert_eq!(a.sites(), b.sites());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn degenerate_rectangle() {
        assert!(matches!(
            build_box(1.0, [[0.0, 0.0], [3.0, 0.0]]),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn holes_rejected() {
        let ring = (0..3).flat_map(|y| (0..3).map(move |x| [x, y])).filter(|p| *p != [1, 1]);
        assert!(LatticeDomain::from_sites(1.0, ShapeTag::Custom, ring).is_err());
        let split = vec![[0, 0], [2, 0]];
        assert!(LatticeDomain::from_sites(1.0, ShapeTag::Custom, split).is_err());
    }

    #[test]
    fn walk_is_counterclockwise() {
        let d = build_box(1.0, [[0.0, 0.0], [2.0, 1.0]]).unwrap();
        let w: Vec<Point> = d.boundary_walk().iter().map(|s| d.site(s.0)).collect();
        assert_eq!(w, vec![[0, 0], [1, 0], [2, 0], [2, 1], [1, 1], [0, 1]]);
    }

    #[test]
    fn ball_boundary_radius_one_and_a_half() {
        let d = build_box(1.0, [[-5.0, -5.0], [5.0, 5.0]]).unwrap();
        let mut got: Vec<Point> = ball_boundary(&d, [0.0, 0.0], 1.5).iter().map(|&i| d.site(i)).collect();
        got.sort();
        // (±1,±1) sit at distance √2 < 1.5 and have neighbours at √5
        let mut want = vec![[-1, -1], [-1, 0], [-1, 1], [0, -1], [0, 1], [1, -1], [1, 0], [1, 1]];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn ball_boundary_edge_cases() {
        let d = build_box(1.0, [[-5.0, -5.0], [5.0, 5.0]]).unwrap();
        assert!(ball_boundary(&d, [0.0, 0.0], 0.5).is_empty());
        assert!(ball_boundary(&d, [0.0, 0.0], 100.0).is_empty());
    }

    #[test]
    fn resolve_kinds() {
        let d = build_box(1.0, [[0.0, 0.0], [3.0, 2.0]]).unwrap();
        let w = BoundarySpec::wired().resolve(&d).unwrap();
        assert_eq!(w.plus_fused.len(), 10);
        let dob = BoundarySpec::dobrushin([0, 0], [3, 0]).resolve(&d).unwrap();
        assert_eq!(dob.plus_fused.len(), 4);
        let m = BoundarySpec::mixed_free_plus(vec![[0, 0], [1, 0], [2, 0], [3, 0]]).resolve(&d).unwrap();
        assert_eq!(m.plus_coupled.len(), 2);
        assert!(BoundarySpec::dobrushin([1, 1], [3, 0]).resolve(&d).is_err());
    }

    #[test]
    fn domain_json_roundtrip() {
        let spec = DomainSpec { shape_tag: ShapeTag::Box, mesh: 1.0, corners: Some([[0.0, 0.0], [4.0, 4.0]]), sites: None };
        let text = serde_json::to_string(&spec).unwrap();
        let back: DomainSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), spec.build().unwrap());
    }
}
