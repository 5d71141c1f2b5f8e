//! Second-order BPZ operators applied by central finite differences.

use serde::{Deserialize, Serialize};

use super::formulas::eval_mixed_r;
use super::mobius::{CorrelationFormula, Slot};
use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-4;

/// Which operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpzReading {
    /// (3/2)∂²_j + Σ_{k≠j} [2/(x_k−x_j)·∂_k − 2Δ_k/(x_k−x_j)²]
    PartialK,
    /// as printed for the mixed boundary: ∂_j inside the sum
    PartialJ,
    /// ∂_k operator with Δ = 1/16 at the two arc endpoints, applied to
    /// R_N·(x_{N+2} − x_{N+1})^{−1/8}
    BcChangeWeight,
}

impl BpzReading {
    pub const ALL: [BpzReading; 3] = [BpzReading::PartialK, BpzReading::PartialJ, BpzReading::BcChangeWeight];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BpzTerms {
    pub value: f64,
    /// Σ of the magnitudes of the individual terms
    pub scale: f64,
}

impl BpzTerms {
    pub fn residual(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

fn shifted<F: Fn(&[f64]) -> Result<f64>>(f: &F, xs: &[f64], k: usize, by: f64) -> Result<f64> {
    let mut ys = xs.to_vec();
    ys[k] += by;
    f(&ys)
}

fn first<F: Fn(&[f64]) -> Result<f64>>(f: &F, xs: &[f64], k: usize, h: f64) -> Result<f64> {
    Ok((shifted(f, xs, k, h)? - shifted(f, xs, k, -h)?) / (2.0 * h))
}

fn second<F: Fn(&[f64]) -> Result<f64>>(f: &F, xs: &[f64], k: usize, h: f64, f0: f64) -> Result<f64> {
    Ok((shifted(f, xs, k, h)? - 2.0 * f0 + shifted(f, xs, k, -h)?) / (h * h))
}

/// Apply the operator at index `j` (0-based) with weights `deltas`.
/// `richardson` combines steps h and h/2 to cancel the O(h²) error.
pub fn bpz_apply<F>(f: F, xs: &[f64], deltas: &[f64], j: usize, h: f64, partial_j: bool, richardson: bool) -> Result<BpzTerms>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if xs.len() != deltas.len() || j >= xs.len() {
        return Err(Error::Config(format!("index {j} with {} points and {} weights", xs.len(), deltas.len())));
    }
    if !(1e-5..=1e-3).contains(&h) {
        return Err(Error::Conditioning(format!("step {h} outside [1e-5, 1e-3]")));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[1] - w[0] < 100.0 * h) {
        return Err(Error::Conditioning(format!("points {} and {} closer than 100 steps", w[0], w[1])));
    }
    let f0 = f(xs)?;
    let d1 = |k: usize| -> Result<f64> {
        let a = first(&f, xs, k, h)?;
        if richardson {
            Ok((4.0 * first(&f, xs, k, h / 2.0)? - a) / 3.0)
        } else {
            Ok(a)
        }
    };
    let d2 = {
        let a = second(&f, xs, j, h, f0)?;
        if richardson {
            (4.0 * second(&f, xs, j, h / 2.0, f0)? - a) / 3.0
        } else {
            a
        }
    };
    let mut value = 1.5 * d2;
    let mut scale = (1.5 * d2).abs();
    let dj = if partial_j { Some(d1(j)?) } else { None };
    for k in (0..xs.len()).filter(|&k| k != j) {
        let dx = xs[k] - xs[j];
        let deriv = match dj {
            Some(v) => v,
            None => d1(k)?,
        };
        let t1 = 2.0 / dx * deriv;
        let t2 = -2.0 * deltas[k] / (dx * dx) * f0;
        value += t1 + t2;
        scale += t1.abs() + t2.abs();
    }
    Ok(BpzTerms { value, scale })
}

fn spin_weights(formula: &CorrelationFormula) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs = formula
        .boundary_points()
        .ok_or_else(|| Error::Config(format!("{} has no boundary-only BPZ equation", formula.family())))?;
    let deltas = formula
        .slots()?
        .into_iter()
        .map(|s| match s {
            Slot::Boundary(_, w) => w,
            Slot::Bulk(_, w) => w,
        })
        .collect();
    Ok((xs, deltas))
}

fn eval_at(formula: &CorrelationFormula, ys: &[f64]) -> Result<f64> {
    formula
        .with_boundary_points(ys)
        .ok_or_else(|| Error::Internal("formula lost its boundary points".into()))?
        .eval()
}

/// Normalized residual of the operator at point index `j` (0-based),
/// ∂_k reading, with the family's own weights.
pub fn bpz_residual(formula: &CorrelationFormula, j: usize, h: f64) -> Result<f64> {
    bpz_residual_with(formula, j, h, BpzReading::PartialK)
}

pub fn bpz_residual_with(formula: &CorrelationFormula, j: usize, h: f64, reading: BpzReading) -> Result<f64> {
    let (xs, mut deltas) = spin_weights(formula)?;
    let terms = match reading {
        BpzReading::PartialK => bpz_apply(|ys: &[f64]| eval_at(formula, ys), &xs, &deltas, j, h, false, false)?,
        BpzReading::PartialJ => bpz_apply(|ys: &[f64]| eval_at(formula, ys), &xs, &deltas, j, h, true, false)?,
        BpzReading::BcChangeWeight => {
            let CorrelationFormula::MixedRN { n, .. } = *formula else {
                return Err(Error::Config("the boundary-condition-change reading needs mixed_RN".into()));
            };
            deltas[n] = 1.0 / 16.0;
            deltas[n + 1] = 1.0 / 16.0;
            let z = |ys: &[f64]| -> Result<f64> { Ok(eval_mixed_r(n, ys)? * (ys[n + 1] - ys[n]).powf(-0.125)) };
            bpz_apply(z, &xs, &deltas, j, h, false, false)?
        }
    };
    Ok(terms.residual())
}

#[derive(Clone, Debug, Serialize)]
pub struct ReadingRow {
    pub reading: BpzReading,
    pub j: usize,
    pub residual: f64,
    pub annihilates: bool,
}

/// Evaluate every reading of the mixed-boundary operator on R_N at each
/// spin index; `annihilates` compares against `tol`.
pub fn bpz_reading_report(n: usize, xs: &[f64], h: f64, tol: f64) -> Result<Vec<ReadingRow>> {
    let f = CorrelationFormula::MixedRN { n, xs: xs.to_vec() };
    let mut rows = Vec::new();
    for reading in BpzReading::ALL {
        for j in 0..n {
            let residual = bpz_residual_with(&f, j, h, reading)?;
            rows.push(ReadingRow { reading, j, residual, annihilates: residual <= tol });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_function() {
        let xs = [0.0, 1.0, 3.0];
        let deltas = [0.5, 0.5, 0.0];
        let t = bpz_apply(|_: &[f64]| Ok(1.0), &xs, &deltas, 0, 1e-4, false, false).unwrap();
        let expect = -(2.0 * 0.5 / 1.0 + 0.0);
        assert_eq!(t.value, expect);
    }

    #[test]
    fn free_pfaffian_annihilated() {
        let f = CorrelationFormula::FreePfaffian { xs: vec![0.0, 1.0, 2.0, 3.0] };
        for j in 0..4 {
            let r = bpz_residual(&f, j, 1e-4).unwrap();
            assert!(r <= 1e-5, "j={j}: {r}");
        }
    }

    #[test]
    fn two_point_annihilated() {
        let f = CorrelationFormula::BoundaryR2 { xs: [-0.5, 1.7] };
        assert!(bpz_residual(&f, 0, 1e-4).unwrap() <= 1e-6);
    }

    #[test]
    fn bc_change_weight_annihilates_mixed() {
        let f = CorrelationFormula::MixedRN { n: 2, xs: vec![0.0, 1.0, 2.0, 3.0] };
        for j in 0..2 {
            let r = bpz_residual_with(&f, j, 1e-4, BpzReading::BcChangeWeight).unwrap();
            assert!(r <= 1e-6, "j={j}: {r}");
        }
    }

    #[test]
    fn stencil_conditioning() {
        let f = CorrelationFormula::FreePfaffian { xs: vec![0.0, 0.005, 2.0, 3.0] };
        assert!(matches!(bpz_residual(&f, 0, 1e-4), Err(Error::Conditioning(_))));
        let g = CorrelationFormula::FreePfaffian { xs: vec![0.0, 1.0] };
        assert!(matches!(bpz_residual(&g, 0, 1e-2), Err(Error::Conditioning(_))));
    }
}
