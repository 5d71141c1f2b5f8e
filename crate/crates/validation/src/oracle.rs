//! Independent brute-force oracle for the inner-box crossing probability on a
//! small square box, with its own graph, union-find and weight sums.

use fkcorr::exact::TwoFloat;
use fkcorr::model::ModelParams;

pub const MAX_EDGES: usize = 24;

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn join(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// μ(left-right crossing of the centred `inner` box by its own edges) on the
/// `outer` × `outer` vertex box, free or with the whole boundary wired.
pub fn crossing_probability(outer: usize, inner: usize, wired: bool, params: ModelParams) -> f64 {
    let n = outer;
    let id = |x: usize, y: usize| y * n + x;
    let mut edges = Vec::new();
    for y in 0..n {
        for x in 0..n {
            if x + 1 < n {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < n {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    let m = edges.len();
    assert!(m <= MAX_EDGES, "{m} edges is too many to enumerate");
    let on_boundary = |v: usize| {
        let (x, y) = (v % n, v / n);
        x == 0 || y == 0 || x == n - 1 || y == n - 1
    };
    // wired: every boundary vertex is the single node 0
    let node = |v: usize| if wired && on_boundary(v) { 0 } else { v };
    let lo = (outer - inner) / 2;
    let hi = lo + inner - 1;
    let inside = |v: usize| (lo..=hi).contains(&(v % n)) && (lo..=hi).contains(&(v / n));
    let inner_edges: Vec<usize> = (0..m).filter(|&e| inside(edges[e].0) && inside(edges[e].1)).collect();
    let nodes: Vec<usize> = (0..n * n).filter(|&v| node(v) == v).collect();

    // counts[event][open][clusters]
    let mut counts = vec![vec![vec![0u64; n * n + 1]; m + 1]; 2];
    for mask in 0u32..1 << m {
        let mut dsu = Dsu::new(n * n);
        for (e, &(a, b)) in edges.iter().enumerate() {
            if mask >> e & 1 == 1 {
                dsu.join(node(a), node(b));
            }
        }
        let k = nodes.iter().filter(|&&v| dsu.find(v) == v).count();
        let mut box_dsu = Dsu::new(n * n);
        for &e in &inner_edges {
            if mask >> e & 1 == 1 {
                box_dsu.join(edges[e].0, edges[e].1);
            }
        }
        let crossed = (lo..=hi).any(|y| (lo..=hi).any(|y2| box_dsu.find(id(lo, y)) == box_dsu.find(id(hi, y2))));
        counts[usize::from(crossed)][mask.count_ones() as usize][k] += 1;
    }

    let (p, q) = (TwoFloat::from(params.p), TwoFloat::from(params.q));
    let pow = |x: TwoFloat, k: usize| (0..k).fold(TwoFloat::from(1.0), |acc, _| acc * x);
    let mut z = [TwoFloat::from(0.0); 2];
    for (ev, table) in counts.iter().enumerate() {
        for (o, row) in table.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                if c > 0 {
                    z[ev] += TwoFloat::from(c as f64) * pow(p, o) * pow(TwoFloat::from(1.0) - p, m - o) * pow(q, k);
                }
            }
        }
    }
    f64::from(z[1] / (z[0] + z[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_square() {
        // any crossing of the 2 x 2 box uses one of its two horizontal edges
        let p = ModelParams::fk(0.5, 1.0).unwrap();
        assert_eq!(crossing_probability(2, 2, false, p), 0.75);
        assert_eq!(crossing_probability(2, 2, true, p), 0.75);
    }
}
