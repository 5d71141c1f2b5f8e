//! Constancy of correlation ratios across geometries.

use serde::{Deserialize, Serialize};

use super::fit::chi2_p_value;
use crate::error::{Error, Result};

/// (value, error)
pub type Measured = (f64, f64);

/// numerator / (Π denominators)^power for one geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioInput {
    pub label: String,
    pub numerator: Measured,
    pub denominators: Vec<Measured>,
    pub power: f64,
}

impl RatioInput {
    /// P(Q₃)/√(P(Q₂)P(Q₂')P(Q₂''))
    pub fn factorization(label: impl Into<String>, three: Measured, pairs: [Measured; 3]) -> Self {
        Self { label: label.into(), numerator: three, denominators: pairs.to_vec(), power: 0.5 }
    }

    /// Ratio with first-order error propagation, treating inputs as
    /// independent.
    pub fn eval(&self) -> Result<Measured> {
        let all = std::iter::once(&self.numerator).chain(&self.denominators);
        if let Some(m) = all.clone().find(|m| !(m.0 > 0.0) || !(m.1 >= 0.0)) {
            return Err(Error::InsufficientData(format!("{}: unusable estimate {m:?}", self.label)));
        }
        let den: f64 = self.denominators.iter().map(|d| d.0).product::<f64>().powf(self.power);
        let r = self.numerator.0 / den;
        let rel2 = (self.numerator.1 / self.numerator.0).powi(2)
            + self.power.powi(2) * self.denominators.iter().map(|d| (d.1 / d.0).powi(2)).sum::<f64>();
        Ok((r, r * rel2.sqrt()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub label: String,
    pub ratio: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constancy {
    pub rows: Vec<RatioRow>,
    pub common: f64,
    pub common_error: f64,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl Constancy {
    /// Largest |ratio − common| in units of the row's own error.
    pub fn max_pull(&self) -> f64 {
        self.rows.iter().map(|r| (r.ratio - self.common).abs() / r.error).fold(0.0, f64::max)
    }
}

pub fn ratio_constancy(inputs: &[RatioInput]) -> Result<Constancy> {
    if inputs.len() < 3 {
        return Err(Error::InsufficientData(format!("constancy needs three geometries, got {}", inputs.len())));
    }
    let rows = inputs
        .iter()
        .map(|i| {
            let (ratio, error) = i.eval()?;
            if !(error > 0.0) {
                return Err(Error::InsufficientData(format!("{}: zero error", i.label)));
            }
            Ok(RatioRow { label: i.label.clone(), ratio, error })
        })
        .collect::<Result<Vec<_>>>()?;
    let w: Vec<f64> = rows.iter().map(|r| r.error.powi(-2)).collect();
    let sw: f64 = w.iter().sum();
    let common = rows.iter().zip(&w).map(|(r, w)| w * r.ratio).sum::<f64>() / sw;
    let chi2: f64 = rows.iter().zip(&w).map(|(r, w)| w * (r.ratio - common).powi(2)).sum();
    let dof = rows.len() - 1;
    Ok(Constancy { rows, common, common_error: sw.powf(-0.5), chi2, dof, p_value: chi2_p_value(chi2, dof) })
}
