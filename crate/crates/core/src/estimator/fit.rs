//! Log-log exponent fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// (scale, estimate, error) triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub scale: f64,
    pub value: f64,
    pub error: f64,
}

impl FitPoint {
    pub fn new(scale: f64, value: f64, error: f64) -> Self {
        Self { scale, value, error }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub slope_error: f64,
    pub intercept: f64,
    pub chi2: f64,
    pub dof: usize,
    /// P[χ²_dof ≥ chi2]; 1 when dof = 0 or the fit is unweighted.
    pub p_value: f64,
    pub window: [f64; 2],
}

/// Upper tail of χ²_dof.
pub fn chi2_p_value(chi2: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - d.cdf(chi2)
}

/// Weighted least squares of log value on log scale.
///
/// Weights are 1/σ² with σ = error/value, or uniform when every error is
/// zero. The slope is a fixed linear combination of the log values, and
/// its error is propagated through that combination.
pub fn fit_exponent(points: &[FitPoint]) -> Result<ExponentFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!("a slope needs two scales, got {}", points.len())));
    }
    for p in points {
        if !(p.scale > 0.0) || !(p.value > 0.0) {
            return Err(Error::LogDomain(format!("scale {} and value {} must be positive", p.scale, p.value)));
        }
        if !(p.error >= 0.0) {
            return Err(Error::Config(format!("negative or NaN error {}", p.error)));
        }
    }
    let x: Vec<f64> = points.iter().map(|p| p.scale.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    let sig: Vec<f64> = points.iter().map(|p| p.error / p.value).collect();
    let weighted = sig.iter().all(|&s| s > 0.0);
    if !weighted && sig.iter().any(|&s| s > 0.0) {
        return Err(Error::Config("errors must be all zero or all positive".into()));
    }
    let w: Vec<f64> = sig.iter().map(|&s| if weighted { 1.0 / (s * s) } else { 1.0 }).collect();
    let sw: f64 = w.iter().sum();
    let xbar = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - xbar).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Singular("all scales coincide".into()));
    }
    let c: Vec<f64> = w.iter().zip(&x).map(|(w, x)| w * (x - xbar) / sxx).collect();
    let slope: f64 = c.iter().zip(&y).map(|(c, y)| c * y).sum();
    let ybar = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let intercept = ybar - slope * xbar;
    let slope_error = c.iter().zip(&sig).map(|(c, s)| (c * s).powi(2)).sum::<f64>().sqrt();
    let dof = points.len() - 2;
    let (chi2, p_value) = if weighted {
        let chi2: f64 = (0..points.len()).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
        (chi2, chi2_p_value(chi2, dof))
    } else {
        (0.0, 1.0)
    };
    let lo = points.iter().map(|p| p.scale).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.scale).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentFit { slope, slope_error, intercept, chi2, dof, p_value, window: [lo, hi] })
}

/// Fit window policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    /// Scales below this are excluded up front.
    #[serde(default = "default_min_scale")]
    pub min_scale: f64,
    /// Refit without the smallest scale when the full fit has p below
    /// `chi2_alpha`.
    #[serde(default = "default_true")]
    pub drop_smallest_on_chi2_fail: bool,
    #[serde(default = "default_alpha")]
    pub chi2_alpha: f64,
}

fn default_min_scale() -> f64 {
    8.0
}

fn default_true() -> bool {
    true
}

fn default_alpha() -> f64 {
    0.01
}

impl Default for FitSpec {
    fn default() -> Self {
        Self { min_scale: default_min_scale(), drop_smallest_on_chi2_fail: true, chi2_alpha: default_alpha() }
    }
}

pub fn fit_window(points: &[FitPoint], spec: &FitSpec) -> Result<ExponentFit> {
    let mut kept: Vec<FitPoint> = points.iter().copied().filter(|p| p.scale >= spec.min_scale).collect();
    kept.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    let fit = fit_exponent(&kept)?;
    if spec.drop_smallest_on_chi2_fail && fit.p_value < spec.chi2_alpha && kept.len() > 3 {
        return fit_exponent(&kept[1..]);
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_power_law() {
        let pts: Vec<FitPoint> = [1.0, 2.0, 4.0, 8.0].iter().map(|&s: &f64| FitPoint::new(s, s.powf(-0.125), 0.0)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.slope + 0.125).abs() < 1e-15);
        assert_eq!(f.slope_error, 0.0);
    }

    #[test]
    fn two_points() {
        let f = fit_exponent(&[FitPoint::new(1.0, 1.0, 0.0), FitPoint::new(2.0, 2f64.powf(-0.25), 0.0)]).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-15);
        assert_eq!(f.dof, 0);
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_exponent(&[FitPoint::new(1.0, 1.0, 0.0)]), Err(Error::InsufficientData(_))));
        let bad = [FitPoint::new(1.0, 1.0, 0.1), FitPoint::new(2.0, 0.0, 0.1), FitPoint::new(4.0, 0.5, 0.1)];
        assert!(matches!(fit_exponent(&bad), Err(Error::LogDomain(_))));
    }

    #[test]
    fn noisy_power_law_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut covered = 0;
        for _ in 0..100 {
            let pts: Vec<FitPoint> = [8.0, 16.0, 32.0, 64.0, 128.0]
                .iter()
                .map(|&s: &f64| {
                    let v = 0.7 * s.powf(-0.25);
                    FitPoint::new(s, v * (1.0 + noise.sample(&mut rng)), 0.05 * v)
                })
                .collect();
            let f = fit_exponent(&pts).unwrap();
            if (f.slope + 0.25).abs() <= 2.0 * f.slope_error {
                covered += 1;
            }
        }
        assert!(covered >= 93, "{covered}");
    }

    #[test]
    fn window_drops_smallest_on_bad_chi2() {
        let mut pts: Vec<FitPoint> =
            [4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&s: &f64| FitPoint::new(s, s.powf(-0.5), 1e-3 * s.powf(-0.5))).collect();
        pts[1].value *= 1.2;
        let f = fit_window(&pts, &FitSpec::default()).unwrap();
        assert_eq!(f.window, [16.0, 64.0]);
        assert!((f.slope + 0.5).abs() < 1e-12);
    }
}
