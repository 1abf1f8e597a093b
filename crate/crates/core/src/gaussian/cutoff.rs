use serde::{Deserialize, Serialize};

use super::{normalization, QuadratureNodes};
use crate::error::{Error, Result};
use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;
use crate::vector::Vec3;

/// A point `(x₀, t₀)` of space-time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint<T> {
    pub point: Vec3<T>,
    pub time: T,
}

/// Translated cubic cutoff `φ_{(x₀,t₀),ρ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec<T> {
    pub center: SpaceTimePoint<T>,
    pub radius: T,
}

impl<T: Real> CutoffSpec<T> {
    pub fn new(center: SpaceTimePoint<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidArgument(format!("cutoff radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }
}

/// `max(0, 1 − (|x − x₀|² + 2n(t − t₀)) / ρ²)³`.
pub fn ecker_cutoff<T: Real>(x: Vec3<T>, t: T, spec: &CutoffSpec<T>, n: usize) -> T {
    let q = (x - spec.center.point).norm_sq() + T::lit(2.0) * T::from_count(n) * (t - spec.center.time);
    let v = T::one() - q / (spec.radius * spec.radius);
    if v > T::zero() {
        v * v * v
    } else {
        T::zero()
    }
}

/// `∫_{M_t} Φ_{(x₀,t₀)}(·, t) φ(·, t)` where `surface` is the time-`t` slice and
/// `focus` is the backward heat kernel's pole.
pub fn localized_f<T: Real>(
    surface: &DiscreteHypersurface<T>,
    focus: &SpaceTimePoint<T>,
    t: T,
    spec: &CutoffSpec<T>,
) -> Result<T> {
    let tau = focus.time - t;
    if !(tau > T::zero()) {
        return Err(Error::NonpositiveScale(format!("flow time {t} must precede the kernel time {}", focus.time)));
    }
    let nodes = QuadratureNodes::from_surface(surface);
    let n = surface.dim();
    let inv = T::one() / (T::lit(4.0) * tau);
    let s: T = nodes
        .points()
        .iter()
        .zip(nodes.weights())
        .map(|(p, &w)| {
            let c = ecker_cutoff(*p, t, spec, n);
            if c > T::zero() {
                w * c * (-(*p - focus.point).norm_sq() * inv).exp()
            } else {
                T::zero()
            }
        })
        .sum();
    Ok(normalization(tau, n) * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{f_functional, GaussianCenter};
    use crate::geometry::shapes;

    fn spec(x: Vec3<f64>, t: f64, rho: f64) -> CutoffSpec<f64> {
        CutoffSpec::new(SpaceTimePoint { point: x, time: t }, rho).unwrap()
    }

    #[test]
    fn cutoff_is_one_at_center() {
        let s = spec(Vec3::new(1.0, 2.0, 3.0), 0.4, 0.7);
        assert_eq!(ecker_cutoff(Vec3::new(1.0, 2.0, 3.0), 0.4, &s, 2), 1.0);
    }

    #[test]
    fn cutoff_vanishes_outside() {
        let s = spec(Vec3::zero(), 0.0, 1.0);
        assert_eq!(ecker_cutoff(Vec3::new(1.0, 0.0, 0.0), 0.0, &s, 1), 0.0);
        assert_eq!(ecker_cutoff(Vec3::new(0.5, 0.0, 0.0), 0.5, &s, 2), 0.0);
    }

    #[test]
    fn cutoff_support_ball() {
        let s = spec(Vec3::zero(), 1.0, 2.0);
        let t = 0.6f64;
        let r = (4.0 - 2.0 * 2.0 * (t - 1.0)).sqrt();
        assert!(ecker_cutoff(Vec3::new(r * 0.999, 0.0, 0.0), t, &s, 2) > 0.0);
        assert_eq!(ecker_cutoff(Vec3::new(r * 1.001, 0.0, 0.0), t, &s, 2), 0.0);
    }

    #[test]
    fn large_radius_recovers_functional() {
        let c = shapes::circle(1.0, 256).unwrap();
        let focus = SpaceTimePoint { point: Vec3::planar(0.2, 0.1), time: 0.7 };
        let v = localized_f(&c, &focus, 0.1, &spec(focus.point, focus.time, 1e9)).unwrap();
        let f = f_functional(&c, &GaussianCenter::new(focus.point, 0.6).unwrap()).unwrap();
        assert!(((v - f) / f).abs() < 1e-10);
    }

    #[test]
    fn disjoint_support_is_zero() {
        let c = shapes::circle(1.0, 64).unwrap();
        let focus = SpaceTimePoint { point: Vec3::planar(5.0, 0.0), time: 1.0 };
        assert_eq!(localized_f(&c, &focus, 0.0, &spec(focus.point, 1.0, 2.0)).unwrap(), 0.0);
        assert!(matches!(localized_f(&c, &focus, 1.0, &spec(focus.point, 1.0, 2.0)), Err(Error::NonpositiveScale(_))));
    }
}
