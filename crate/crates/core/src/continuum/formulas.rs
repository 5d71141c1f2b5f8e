//! Closed-form continuum correlation functions, all at unit constants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{capacity, Error, Result};
use crate::patterns::{enumerate_pair_partitions, pfaffian};

/// ζ'(−1)
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;

/// C₃ = 2^{5/12}·e^{−(3/2)ζ'(−1)}
pub fn c3() -> f64 {
    2f64.powf(5.0 / 12.0) * (-1.5 * ZETA_PRIME_MINUS_ONE).exp()
}

pub const MAX_MIXED_N: usize = 10;

fn check_increasing(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite point in {xs:?}")));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Ordering(format!("points must be strictly increasing: {xs:?}")));
    }
    Ok(())
}

/// Π_{j<k} |z_j − z_k|^{−1/8}
pub fn eval_bulk_p3(z: [Complex64; 3]) -> Result<f64> {
    let mut prod = 1.0;
    for j in 0..3 {
        for k in j + 1..3 {
            let d = (z[j] - z[k]).norm();
            if d == 0.0 {
                return Err(Error::Singular(format!("coincident bulk points {} and {}", z[j], z[k])));
            }
            prod *= d;
        }
    }
    Ok(prod.powf(-0.125))
}

/// |x₁−x₂|^{−1} for two points, Π|x_j−x_k|^{−1/2} for three.
pub fn eval_boundary_r(xs: &[f64]) -> Result<f64> {
    check_increasing(xs)?;
    match xs.len() {
        2 => Ok(1.0 / (xs[1] - xs[0])),
        3 => Ok(((xs[1] - xs[0]) * (xs[2] - xs[0]) * (xs[2] - xs[1])).powf(-0.5)),
        n => Err(Error::Config(format!("boundary connection formula for {n} points"))),
    }
}

/// y^{3/8}/|z − x| with y = Im z.
pub fn eval_bulk_boundary(z: Complex64, x: f64) -> Result<f64> {
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("{z} is not in the upper half-plane")));
    }
    Ok(z.im.powf(0.375) / (z - x).norm())
}

/// ((x_b − x_c)(x_a − x_d) + (x_b − x_d)(x_a − x_c)) / (x_d − x_c) for arc
/// endpoints x_b < x_a.
fn pair_factor(xs: &[f64], c: usize, d: usize, b: f64, a: f64) -> f64 {
    ((b - xs[c]) * (a - xs[d]) + (b - xs[d]) * (a - xs[c])) / (xs[d] - xs[c])
}

/// R_N(x₁, …, x_N; x_{N+1}, x_{N+2}) for the free/plus mixed boundary.
pub fn eval_mixed_r(n: usize, xs: &[f64]) -> Result<f64> {
    if n == 0 {
        return Err(Error::Config("mixed correlation needs N ≥ 1".into()));
    }
    capacity("mixed correlation N", n, MAX_MIXED_N)?;
    if xs.len() != n + 2 {
        return Err(Error::Config(format!("R_{n} takes {} points, got {}", n + 2, xs.len())));
    }
    check_increasing(xs)?;
    let (b, a) = (xs[n], xs[n + 1]);
    let pre: f64 = xs[..n].iter().map(|&x| 1.0 / ((a - x) * (b - x)).sqrt()).product();
    if n % 2 == 0 {
        let sum: f64 = enumerate_pair_partitions(n / 2)?
            .iter()
            .map(|p| p.sign as f64 * p.pairs.iter().map(|&(c, d)| pair_factor(xs, c - 1, d - 1, b, a)).product::<f64>())
            .sum();
        Ok(pre * sum)
    } else {
        // index N+1 is a virtual partner; the pair holding it contributes 1
        let virt = n + 1;
        let sum: f64 = enumerate_pair_partitions(virt / 2)?
            .iter()
            .map(|p| {
                p.sign as f64
                    * p.pairs
                        .iter()
                        .filter(|&&(_, d)| d != virt)
                        .map(|&(c, d)| pair_factor(xs, c - 1, d - 1, b, a))
                        .product::<f64>()
            })
            .sum();
        Ok((a - b).sqrt() * pre * sum)
    }
}

/// √(x₃ − x₂)/(√(x₃ − x₁)·√(x₂ − x₁))
pub fn mixed_r1_closed(x1: f64, x2: f64, x3: f64) -> f64 {
    (x3 - x2).sqrt() / ((x3 - x1).sqrt() * (x2 - x1).sqrt())
}

/// The N = 2 closed form.
pub fn mixed_r2_closed(x1: f64, x2: f64, x3: f64, x4: f64) -> f64 {
    ((x4 - x1) * (x3 - x2) + (x4 - x2) * (x3 - x1))
        / ((x2 - x1) * (x3 - x1).sqrt() * (x4 - x1).sqrt() * (x3 - x2).sqrt() * (x4 - x2).sqrt())
}

/// Pf[1/(x_k − x_j)]
pub fn eval_free_pfaffian(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() || xs.len() % 2 == 1 {
        return Err(Error::Config(format!("free Pfaffian needs an even number of points, got {}", xs.len())));
    }
    check_increasing(xs)?;
    let m = xs.len();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..m).map(|k| if j == k { 0.0 } else { 1.0 / (xs[k] - xs[j]) }).collect())
        .collect();
    pfaffian(&a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    UpperHalfPlane,
    UnitDisk,
}

pub fn conformal_radius(domain: DomainTag, z: Complex64) -> Result<f64> {
    match domain {
        DomainTag::UnitDisk if z.norm_sqr() < 1.0 => Ok(1.0 - z.norm_sqr()),
        DomainTag::UpperHalfPlane if z.im > 0.0 => Ok(2.0 * z.im),
        _ => Err(Error::Domain(format!("{z} is not inside {domain:?}"))),
    }
}

/// C₃·rad(z, Ω)^{−1/8}
pub fn magnetization_g(domain: DomainTag, z: Complex64) -> Result<f64> {
    Ok(c3() * conformal_radius(domain, z)?.powf(-0.125))
}

/// Free-boundary fermionic observable in H with the plus arc [x₃, x₄],
/// principal square roots.
pub fn eval_observable_f(z: Complex64, x1: f64, x3: f64, x4: f64) -> Result<Complex64> {
    check_increasing(&[x1, x3, x4])?;
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("{z} is not in the upper half-plane")));
    }
    let pre = (x4 - x1) * (x3 - x1) / ((x4 - x3).sqrt() * std::f64::consts::PI.sqrt());
    let num = (1.0 / (x4 - x1) + 1.0 / (x3 - x1)) * (z - x1) - 2.0;
    Ok(pre * num / ((z - x3).sqrt() * (z - x4).sqrt() * (z - x1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_c3() {
        assert!((c3() - 1.710_769_109_070_487_3).abs() < 1e-15);
        assert_eq!(magnetization_g(DomainTag::UnitDisk, c(0.0, 0.0)).unwrap(), c3());
    }

    #[test]
    fn bulk_three_point() {
        let h = 3f64.sqrt() / 2.0;
        assert!((eval_bulk_p3([c(0.0, 0.0), c(1.0, 0.0), c(0.5, h)]).unwrap() - 1.0).abs() < 1e-15);
        let v = eval_bulk_p3([c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((v - 0.917_004_043_204_671_2).abs() < 1e-15);
        assert!(matches!(eval_bulk_p3([c(1.0, 1.0), c(1.0, 1.0), c(0.0, 0.0)]), Err(Error::Singular(_))));
    }

    #[test]
    fn boundary_connections() {
        assert_eq!(eval_boundary_r(&[0.0, 1.0]).unwrap(), 1.0);
        assert!((eval_boundary_r(&[0.0, 1.0, 3.0]).unwrap() - 0.408_248_290_463_863).abs() < 1e-15);
        assert!(matches!(eval_boundary_r(&[1.0, 0.0]), Err(Error::Ordering(_))));
    }

    #[test]
    fn bulk_boundary_values() {
        assert!((eval_bulk_boundary(c(0.0, 1.0), 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((eval_bulk_boundary(c(0.0, 4.0), 0.0).unwrap() - 0.420_448_207_626_856_9).abs() < 1e-15);
        assert!(matches!(eval_bulk_boundary(c(0.0, 0.0), 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn mixed_values() {
        assert!((eval_mixed_r(1, &[0.0, 1.0, 2.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((eval_mixed_r(2, &[0.0, 1.0, 2.0, 3.0]).unwrap() - 7.0 / 12f64.sqrt()).abs() < 1e-14);
        assert!(matches!(eval_mixed_r(11, &[0.0; 13]), Err(Error::Capacity { .. })));
        assert!(matches!(eval_mixed_r(2, &[0.0, 2.0, 1.0, 3.0]), Err(Error::Ordering(_))));
    }

    #[test]
    fn free_pfaffian_values() {
        assert_eq!(eval_free_pfaffian(&[0.0, 1.0]).unwrap(), 1.0);
        assert!((eval_free_pfaffian(&[0.0, 1.0, 2.0, 3.0]).unwrap() - 13.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn conformal_radii() {
        assert_eq!(conformal_radius(DomainTag::UnitDisk, c(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(conformal_radius(DomainTag::UpperHalfPlane, c(0.0, 1.0)).unwrap(), 2.0);
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let r = conformal_radius(DomainTag::UnitDisk, c(k as f64 / 20.0, 0.0)).unwrap();
            assert!(r < last);
            last = r;
        }
        assert!(conformal_radius(DomainTag::UnitDisk, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn observable_pole_at_x1() {
        for theta in [0.3, 1.2, 2.8] {
            let mut prev: Option<f64> = None;
            for k in 3..9 {
                let eps = 10f64.powi(-k);
                let z = Complex64::from_polar(eps, theta) + 0.0;
                let v = eval_observable_f(z, 0.0, 1.0, 2.0).unwrap().norm() * eps;
                if let Some(p) = prev {
                    assert!(((v - p) / p).abs() < 1e-2);
                }
                prev = Some(v);
            }
        }
    }
}
