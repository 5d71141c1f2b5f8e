//! Möbius maps of the upper half-plane and conformal covariance checks.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::formulas::{
    eval_boundary_r, eval_bulk_boundary, eval_bulk_p3, eval_free_pfaffian, eval_mixed_r, eval_observable_f,
    magnetization_g, DomainTag,
};
use crate::error::{Error, Result};

/// z ↦ (az + b)/(cz + d) with real coefficients and ad − bc > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusMap {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return Err(Error::Config(format!("Möbius map with determinant {det} does not preserve H")));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn scaling(lambda: f64) -> Result<Self> {
        Self::new(lambda, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    fn denom(&self, z: Complex64) -> Result<Complex64> {
        let w = self.c * z + self.d;
        // relative to the map's scale
        if w.norm() <= 1e-12 * (self.c.abs() + self.d.abs()) {
            return Err(Error::Singular(format!("{z} is the pole of the map")));
        }
        Ok(w)
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.a * z + self.b) / self.denom(z)?)
    }

    pub fn apply_real(&self, x: f64) -> Result<f64> {
        Ok(self.apply(Complex64::new(x, 0.0))?.re)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let w = self.denom(z)?;
        Ok(self.det() / (w * w))
    }

    /// Real pole −d/c, if any.
    pub fn pole(&self) -> Option<f64> {
        (self.c != 0.0).then(|| -self.d / self.c)
    }

    /// A random map of unit determinant whose pole lies outside
    /// [lo − margin, hi + margin], so the order of points in [lo, hi] is kept.
    pub fn random_admissible<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64, margin: f64) -> Self {
        loop {
            let a: f64 = rng.random_range(-2.0..2.0);
            let b: f64 = rng.random_range(-2.0..2.0);
            let c: f64 = rng.random_range(-1.0..1.0);
            let d: f64 = rng.random_range(-2.0..2.0);
            let det = a * d - b * c;
            if det.abs() < 0.2 {
                continue;
            }
            let s = det.abs().sqrt();
            let (a, b, c, d) = if det > 0.0 { (a / s, b / s, c / s, d / s) } else { (-a / s, -b / s, c / s, d / s) };
            let m = Self { a, b, c, d };
            match m.pole() {
                Some(p) if p > lo - margin && p < hi + margin => continue,
                _ => return m,
            }
        }
    }
}

/// A continuum formula with its arguments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CorrelationFormula {
    BulkP3 { z: [Complex64; 3] },
    BoundaryR2 { xs: [f64; 2] },
    BoundaryR3 { xs: [f64; 3] },
    MixedRN { n: usize, xs: Vec<f64> },
    FreePfaffian { xs: Vec<f64> },
    BulkBoundaryRz { z: Complex64, x: f64 },
    MagnetizationG { z: Complex64 },
    ObservableF { z: Complex64, x1: f64, x3: f64, x4: f64 },
}

/// A point of a formula and its scaling weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slot {
    Bulk(Complex64, f64),
    Boundary(f64, f64),
}

pub const BULK_WEIGHT: f64 = 0.125;
pub const SPIN_WEIGHT: f64 = 0.5;
pub const BC_CHANGE_WEIGHT: f64 = 0.0;

impl CorrelationFormula {
    pub fn family(&self) -> &'static str {
        match self {
            Self::BulkP3 { .. } => "bulk_P3",
            Self::BoundaryR2 { .. } => "boundary_R2",
            Self::BoundaryR3 { .. } => "boundary_R3",
            Self::MixedRN { .. } => "mixed_RN",
            Self::FreePfaffian { .. } => "free_pfaffian",
            Self::BulkBoundaryRz { .. } => "bulk_boundary_Rz",
            Self::MagnetizationG { .. } => "magnetization_g",
            Self::ObservableF { .. } => "observable_F",
        }
    }

    /// Real value; the observable contributes its modulus.
    pub fn eval(&self) -> Result<f64> {
        match self {
            Self::BulkP3 { z } => eval_bulk_p3(*z),
            Self::BoundaryR2 { xs } => eval_boundary_r(xs),
            Self::BoundaryR3 { xs } => eval_boundary_r(xs),
            Self::MixedRN { n, xs } => eval_mixed_r(*n, xs),
            Self::FreePfaffian { xs } => eval_free_pfaffian(xs),
            Self::BulkBoundaryRz { z, x } => eval_bulk_boundary(*z, *x),
            Self::MagnetizationG { z } => magnetization_g(DomainTag::UpperHalfPlane, *z),
            Self::ObservableF { z, x1, x3, x4 } => Ok(eval_observable_f(*z, *x1, *x3, *x4)?.norm()),
        }
    }

    /// Arguments with their weights, in order.
    pub fn slots(&self) -> Result<Vec<Slot>> {
        let boundary = |xs: &[f64], w: f64| xs.iter().map(move |&x| Slot::Boundary(x, w)).collect::<Vec<_>>();
        Ok(match self {
            Self::BulkP3 { z } => z.iter().map(|&z| Slot::Bulk(z, BULK_WEIGHT)).collect(),
            Self::BoundaryR2 { xs } => boundary(xs, SPIN_WEIGHT),
            Self::BoundaryR3 { xs } => boundary(xs, SPIN_WEIGHT),
            Self::MixedRN { n, xs } => {
                let mut s = boundary(&xs[..(*n).min(xs.len())], SPIN_WEIGHT);
                s.extend(boundary(&xs[(*n).min(xs.len())..], BC_CHANGE_WEIGHT));
                s
            }
            Self::FreePfaffian { xs } => boundary(xs, SPIN_WEIGHT),
            Self::BulkBoundaryRz { z, x } => vec![Slot::Bulk(*z, BULK_WEIGHT), Slot::Boundary(*x, SPIN_WEIGHT)],
            Self::MagnetizationG { z } => vec![Slot::Bulk(*z, BULK_WEIGHT)],
            Self::ObservableF { .. } => {
                return Err(Error::Config("observable_F is a spinor; it has no scalar covariance rule".into()))
            }
        })
    }

    /// The same family at φ(points).
    pub fn mapped(&self, map: &MobiusMap) -> Result<Self> {
        let re = |xs: &[f64]| xs.iter().map(|&x| map.apply_real(x)).collect::<Result<Vec<f64>>>();
        Ok(match self {
            Self::BulkP3 { z } => Self::BulkP3 { z: [map.apply(z[0])?, map.apply(z[1])?, map.apply(z[2])?] },
            Self::BoundaryR2 { xs } => Self::BoundaryR2 { xs: [map.apply_real(xs[0])?, map.apply_real(xs[1])?] },
            Self::BoundaryR3 { xs } => {
                Self::BoundaryR3 { xs: [map.apply_real(xs[0])?, map.apply_real(xs[1])?, map.apply_real(xs[2])?] }
            }
            Self::MixedRN { n, xs } => Self::MixedRN { n: *n, xs: re(xs)? },
            Self::FreePfaffian { xs } => Self::FreePfaffian { xs: re(xs)? },
            Self::BulkBoundaryRz { z, x } => Self::BulkBoundaryRz { z: map.apply(*z)?, x: map.apply_real(*x)? },
            Self::MagnetizationG { z } => Self::MagnetizationG { z: map.apply(*z)? },
            Self::ObservableF { z, x1, x3, x4 } => Self::ObservableF {
                z: map.apply(*z)?,
                x1: map.apply_real(*x1)?,
                x3: map.apply_real(*x3)?,
                x4: map.apply_real(*x4)?,
            },
        })
    }

    /// Boundary coordinates, for the real-argument families.
    pub fn boundary_points(&self) -> Option<Vec<f64>> {
        match self {
            Self::BoundaryR2 { xs } => Some(xs.to_vec()),
            Self::BoundaryR3 { xs } => Some(xs.to_vec()),
            Self::MixedRN { xs, .. } | Self::FreePfaffian { xs } => Some(xs.clone()),
            _ => None,
        }
    }

    /// Same family with new boundary coordinates.
    pub fn with_boundary_points(&self, ys: &[f64]) -> Option<Self> {
        match self {
            Self::BoundaryR2 { .. } => Some(Self::BoundaryR2 { xs: ys.try_into().ok()? }),
            Self::BoundaryR3 { .. } => Some(Self::BoundaryR3 { xs: ys.try_into().ok()? }),
            Self::MixedRN { n, .. } => Some(Self::MixedRN { n: *n, xs: ys.to_vec() }),
            Self::FreePfaffian { .. } => Some(Self::FreePfaffian { xs: ys.to_vec() }),
            _ => None,
        }
    }
}

/// |f(φ(w)) − f(w)·Π|φ'(w_j)|^{−Δ_j}|, relative to the predicted value
/// f(w)·Π|φ'(w_j)|^{−Δ_j}.
pub fn mobius_covariance_residual(formula: &CorrelationFormula, map: &MobiusMap) -> Result<f64> {
    let slots = formula.slots()?;
    let mut factor = 1.0;
    for s in &slots {
        let (z, w) = match *s {
            Slot::Bulk(z, w) => (z, w),
            Slot::Boundary(x, w) => (Complex64::new(x, 0.0), w),
        };
        factor *= map.derivative(z)?.norm().powf(-w);
    }
    let f = formula.eval()?;
    let g = formula.mapped(map)?.eval()?;
    if f == 0.0 {
        return Err(Error::Singular(format!("{} vanishes at the base point", formula.family())));
    }
    let predicted = f * factor;
    Ok((g - predicted).abs() / predicted.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_exact() {
        let f = CorrelationFormula::MixedRN { n: 2, xs: vec![0.0, 1.0, 2.0, 3.0] };
        assert_eq!(mobius_covariance_residual(&f, &MobiusMap::identity()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_orientation_reversal() {
        assert!(MobiusMap::new(-1.0, 0.0, 0.0, 1.0).is_err());
        let m = MobiusMap::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert!(matches!(m.apply(c(0.0, 0.0)), Err(Error::Singular(_))));
        // z ↦ −1/z keeps H
        assert!(m.apply(c(0.3, 0.7)).unwrap().im > 0.0);
    }

    #[test]
    fn bulk_boundary_under_scaling() {
        let f = CorrelationFormula::BulkBoundaryRz { z: c(0.3, 1.1), x: -0.4 };
        let r = mobius_covariance_residual(&f, &MobiusMap::scaling(4.0).unwrap()).unwrap();
        assert!(r <= 1e-12, "{r}");
    }

    #[test]
    fn random_maps_keep_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = MobiusMap::random_admissible(&mut rng, 0.0, 3.0, 0.5);
            assert!((m.det() - 1.0).abs() < 1e-12);
            let ys: Vec<f64> = [0.0, 1.0, 2.0, 3.0].iter().map(|&x| m.apply_real(x).unwrap()).collect();
            assert!(ys.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn observable_has_no_scalar_rule() {
        let f = CorrelationFormula::ObservableF { z: c(0.0, 1.0), x1: 0.0, x3: 1.0, x4: 2.0 };
        assert!(mobius_covariance_residual(&f, &MobiusMap::identity()).is_err());
    }
}
