//! Gaussian kernels and the Gaussian-weighted area functional
//! `F(x₀, t₀) = (4πt₀)^{−n/2} ∫ exp(−|x − x₀|² / 4t₀)`, its gradient, its
//! supremum over centers and scales, closed-form entropies of spheres and
//! cylinders, and the localized (cutoff-weighted) variant.

mod cutoff;
mod entropy;
mod quadrature;
mod stone;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;
use crate::vector::Vec3;

pub use cutoff::{ecker_cutoff, localized_f, CutoffSpec, SpaceTimePoint};
pub use entropy::{entropy, maximize_gaussian, EntropyOptions, EntropyResult, ScaleFrame};
pub use quadrature::{gauss_legendre, QuadratureNodes};
pub use stone::{cylinder_product_check, gamma, stone_entropy, unit_sphere_area, FLAT_ENTROPY};

/// A Gaussian center `x₀` and scale `t₀ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianCenter<T> {
    pub center: Vec3<T>,
    pub scale: T,
}

impl<T: Real> GaussianCenter<T> {
    pub fn new(center: Vec3<T>, scale: T) -> Result<Self> {
        let g = Self { center, scale };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale > T::zero() && self.scale.is_finite() {
            Ok(())
        } else {
            Err(Error::NonpositiveScale(format!("Gaussian scale must be positive, got {}", self.scale)))
        }
    }
}

/// Heat kernel `(4πt)^{−n/2} exp(−|x|² / 4t)`.
pub fn phi_kernel<T: Real>(x: Vec3<T>, t: T, n: usize) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::NonpositiveScale(format!("kernel scale must be positive, got {t}")));
    }
    Ok(normalization(t, n) * (-x.norm_sq() / (T::lit(4.0) * t)).exp())
}

#[inline]
pub(crate) fn normalization<T: Real>(t: T, n: usize) -> T {
    (T::lit(4.0) * T::PI() * t).powf(-T::from_count(n) / T::lit(2.0))
}

/// Gaussian-weighted measure of `surface` at `g`.
pub fn f_functional<T: Real>(surface: &DiscreteHypersurface<T>, g: &GaussianCenter<T>) -> Result<T> {
    g.validate()?;
    Ok(QuadratureNodes::from_surface(surface).evaluate(g))
}

/// Exact derivative of the discrete functional with respect to the center
/// and to `ln t₀`.
pub fn f_gradient<T: Real>(surface: &DiscreteHypersurface<T>, g: &GaussianCenter<T>) -> Result<(Vec3<T>, T)> {
    g.validate()?;
    let (_, dx, dlog) = QuadratureNodes::from_surface(surface).value_and_gradient(g);
    Ok((dx, dlog))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn kernel_normalization_point() {
        let v = phi_kernel(Vec3::<f64>::zero(), 1.0 / (4.0 * std::f64::consts::PI), 2).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_unit_exponent() {
        let t = 0.37f64;
        let x = Vec3::new(2.0 * t.sqrt(), 0.0, 0.0);
        for n in 1..4 {
            let expect = (4.0 * std::f64::consts::PI * t).powf(-(n as f64) / 2.0) * (-1.0f64).exp();
            assert!((phi_kernel(x, t, n).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_rejects_nonpositive_scale() {
        assert!(matches!(phi_kernel(Vec3::<f64>::zero(), 0.0, 2), Err(Error::NonpositiveScale(_))));
        assert!(GaussianCenter::new(Vec3::<f64>::zero(), -1.0).is_err());
    }

    #[test]
    fn shrinker_circle_attains_stone_value() {
        let c = shapes::circle(2f64.sqrt(), 4096).unwrap();
        let f = f_functional(&c, &GaussianCenter::new(Vec3::zero(), 1.0).unwrap()).unwrap();
        assert!((f - (2.0 * std::f64::consts::PI / std::f64::consts::E).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn shrinker_sphere_attains_stone_value() {
        let s = shapes::icosphere(2.0, 4).unwrap();
        let f = f_functional(&s, &GaussianCenter::new(Vec3::zero(), 1.0).unwrap()).unwrap();
        assert!((f - 4.0 / std::f64::consts::E).abs() < 5e-3);
    }

    #[test]
    fn huge_scale_decays() {
        let s = shapes::ellipsoid([2.0, 1.0, 1.0], 2).unwrap();
        let d = s.diameter();
        let f = f_functional(&s, &GaussianCenter::new(Vec3::zero(), 1e6 * d * d).unwrap()).unwrap();
        assert!(f <= 1e-3);
    }

    #[test]
    fn gradient_vanishes_at_shrinker() {
        let s = shapes::icosphere(2.0f64, 7).unwrap();
        let (dx, dlog) = f_gradient(&s, &GaussianCenter::new(Vec3::zero(), 1.0).unwrap()).unwrap();
        let norm = (dx.norm_sq() + dlog * dlog).sqrt();
        assert!(norm <= 1e-4, "{norm}");
    }
}
