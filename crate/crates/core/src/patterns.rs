//! Set partitions of marked points, pair partitions with signs, Pfaffians.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition of {1..n} into blocks; serialized as sorted block lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct LinkPattern {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl LinkPattern {
    /// Blocks use 1-based labels. Blocks are normalized: each sorted, then
    /// ordered by least element.
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        let n: usize = blocks.iter().map(|b| b.len()).sum();
        let mut seen = vec![false; n + 1];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Config("empty block in link pattern".into()));
            }
            for &i in b {
                if i == 0 || i > n || seen[i] {
                    return Err(Error::Config(format!("link pattern blocks must partition 1..={n}")));
                }
                seen[i] = true;
            }
        }
        Ok(Self { n, blocks })
    }

    /// All points in one block.
    pub fn full(n: usize) -> Self {
        Self { n, blocks: vec![(1..=n).collect()] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks.iter().any(|b| b.len() == 1)
    }

    /// Reject singleton blocks, as connection probabilities require.
    pub fn for_connection(self) -> Result<Self> {
        if self.has_singleton() {
            return Err(Error::Config("link pattern has a singleton block".into()));
        }
        Ok(self)
    }
}

impl TryFrom<Vec<Vec<usize>>> for LinkPattern {
    type Error = Error;
    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self> {
        LinkPattern::new(blocks)
    }
}

impl From<LinkPattern> for Vec<Vec<usize>> {
    fn from(p: LinkPattern) -> Self {
        p.blocks
    }
}

/// Group point indices by equal cluster label.
pub fn connection_partition<L: Eq + Hash + Copy>(labels: &[L]) -> LinkPattern {
    let mut by_label: HashMap<L, usize> = HashMap::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let b = *by_label.entry(*l).or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[b].push(i + 1);
    }
    // first occurrence order already sorts blocks by least element
    LinkPattern { n: labels.len(), blocks }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairPartition {
    /// Pairs (c, d), 1-based, with c < d and c increasing.
    pub pairs: Vec<(usize, usize)>,
    pub sign: i8,
}

pub const MAX_PAIR_HALF: usize = 8;

/// Sign of the product Π (c−e)(c−f)(d−e)(d−f) over distinct pairs.
pub fn pair_sign(pairs: &[(usize, usize)]) -> i8 {
    let mut negative = false;
    for (i, &(c, d)) in pairs.iter().enumerate() {
        for &(e, f) in &pairs[i + 1..] {
            let factors = [c as i64 - e as i64, c as i64 - f as i64, d as i64 - e as i64, d as i64 - f as i64];
            for x in factors {
                if x < 0 {
                    negative = !negative;
                }
            }
        }
    }
    if negative {
        -1
    } else {
        1
    }
}

/// All (2n−1)!! pair partitions of {1..2n}. Order: the partner of the
/// smallest free index runs upward, recursively.
pub fn enumerate_pair_partitions(n: usize) -> Result<Vec<PairPartition>> {
    if n == 0 {
        return Err(Error::Config("pair partitions need n ≥ 1".into()));
    }
    crate::error::capacity("pair-partition half size", n, MAX_PAIR_HALF)?;
    let mut out = Vec::new();
    let mut free: Vec<usize> = (1..=2 * n).collect();
    let mut pairs = Vec::with_capacity(n);
    recurse(&mut free, &mut pairs, &mut out);
    Ok(out)
}

fn recurse(free: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, out: &mut Vec<PairPartition>) {
    if free.is_empty() {
        out.push(PairPartition { sign: pair_sign(pairs), pairs: pairs.clone() });
        return;
    }
    let c = free.remove(0);
    for k in 0..free.len() {
        let d = free.remove(k);
        pairs.push((c, d));
        recurse(free, pairs, out);
        pairs.pop();
        free.insert(k, d);
    }
    free.insert(0, c);
}

pub const MAX_PFAFFIAN_DIM: usize = 16;

fn check_antisymmetric(a: &[Vec<f64>]) -> Result<usize> {
    let m = a.len();
    if m % 2 == 1 {
        return Err(Error::InvalidMatrix(format!("odd dimension {m}")));
    }
    crate::error::capacity("Pfaffian dimension", m, MAX_PFAFFIAN_DIM)?;
    for (i, row) in a.iter().enumerate() {
        if row.len() != m {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        for j in 0..m {
            if (a[i][j] + a[j][i]).abs() > 1e-12 {
                return Err(Error::InvalidMatrix(format!("entries ({i},{j}) break antisymmetry")));
            }
        }
    }
    Ok(m)
}

/// Pfaffian by the signed pair-partition sum.
pub fn pfaffian_pair_sum(a: &[Vec<f64>]) -> Result<f64> {
    let m = check_antisymmetric(a)?;
    if m == 0 {
        return Ok(1.0);
    }
    Ok(enumerate_pair_partitions(m / 2)?
        .iter()
        .map(|p| p.sign as f64 * p.pairs.iter().map(|&(c, d)| a[c - 1][d - 1]).product::<f64>())
        .sum())
}

/// Pfaffian by expansion along the first row.
pub fn pfaffian_expansion(a: &[Vec<f64>]) -> Result<f64> {
    let m = check_antisymmetric(a)?;
    let idx: Vec<usize> = (0..m).collect();
    Ok(expand(a, &idx))
}

fn expand(a: &[Vec<f64>], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let i = idx[0];
    let mut total = 0.0;
    for k in 1..idx.len() {
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[k]).collect();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * a[i][idx[k]] * expand(a, &rest);
    }
    total
}

/// Pfaffian of an antisymmetric matrix, cross-checked by two evaluations.
pub fn pfaffian(a: &[Vec<f64>]) -> Result<f64> {
    let p = pfaffian_pair_sum(a)?;
    let q = pfaffian_expansion(a)?;
    let scale = p.abs().max(q.abs()).max(f64::MIN_POSITIVE);
    if (p - q).abs() > 1e-10 * scale && (p - q).abs() > 1e-300 {
        return Err(Error::Internal(format!("Pfaffian evaluations disagree: {p} vs {q}")));
    }
    Ok(p)
}
