use serde::Serialize;

use crate::geometry::{compute_curvature, DiscreteHypersurface};
use crate::error::Result;
use crate::linalg::{least_squares, symmetric_eigen3};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Default relative fit error below which a model is accepted.
pub const CLASSIFICATION_TOLERANCE: f64 = 2e-2;

/// Best-fitting model shape. Radii are compared against `√(2k)` to decide
/// whether the fitted shape is itself a self-shrinker about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Classification<T> {
    Plane { normal: Vec3<T>, fit_error: T },
    Sphere { center: Vec3<T>, radius: T, fit_error: T, shrinker: bool },
    Cylinder { axis: Vec3<T>, radius: T, fit_error: T, shrinker: bool },
    Unknown { fit_error: T },
}

impl<T: Real> Classification<T> {
    pub fn fit_error(&self) -> T {
        match *self {
            Classification::Plane { fit_error, .. }
            | Classification::Sphere { fit_error, .. }
            | Classification::Cylinder { fit_error, .. }
            | Classification::Unknown { fit_error } => fit_error,
        }
    }

    pub fn sphere_radius(&self) -> Option<T> {
        match *self {
            Classification::Sphere { radius, .. } => Some(radius),
            _ => None,
        }
    }
}

/// Raw relative errors of every model tried; `None` where the fit was
/// degenerate or not applicable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitErrors<T> {
    pub plane: Option<T>,
    pub sphere: Option<T>,
    pub cylinder: Option<T>,
}

/// Residual of the shrinker equation `H = ⟨X, ν⟩ / 2`.
#[derive(Debug, Clone, Serialize)]
pub struct ShrinkerReport<T> {
    pub residual: Vec<T>,
    /// Area-weighted RMS of `residual`.
    pub l2_residual: T,
    pub linf_residual: T,
    pub classification: Classification<T>,
    pub fits: FitErrors<T>,
}

pub fn shrinker_residual<T: Real>(surface: &DiscreteHypersurface<T>) -> Result<ShrinkerReport<T>> {
    shrinker_residual_with(surface, T::lit(CLASSIFICATION_TOLERANCE))
}

/// As [`shrinker_residual`] with an explicit classification tolerance.
pub fn shrinker_residual_with<T: Real>(surface: &DiscreteHypersurface<T>, tolerance: T) -> Result<ShrinkerReport<T>> {
    let field = compute_curvature(surface)?;
    let half = T::lit(0.5);
    let residual: Vec<T> = surface
        .vertices()
        .iter()
        .zip(&field.normal)
        .zip(&field.mean_curvature)
        .map(|((&x, &nu), &h)| h - x.dot(nu) * half)
        .collect();
    let mut sq = T::zero();
    let mut area = T::zero();
    for (&r, &a) in residual.iter().zip(&field.vertex_area) {
        sq += a * r * r;
        area += a;
    }
    let l2_residual = (sq / area).sqrt();
    let linf_residual = residual.iter().fold(T::zero(), |m, r| m.max(r.abs()));
    let (classification, fits) = classify(surface, tolerance);
    Ok(ShrinkerReport { residual, l2_residual, linf_residual, classification, fits })
}

/// Fits a plane, a sphere and (for surfaces) a circular cylinder to the
/// vertices and returns the best model under `tolerance`.
pub fn classify<T: Real>(surface: &DiscreteHypersurface<T>, tolerance: T) -> (Classification<T>, FitErrors<T>) {
    let pts = surface.vertices();
    let n = surface.dim();
    let centroid = surface.centroid();
    let frames = principal_axes(pts, centroid, n);
    let scale = surface.diameter() * T::lit(0.5);

    let plane = {
        let normal = frames[0];
        let err = rms(pts.iter().map(|&p| (p - centroid).dot(normal))) / scale;
        (normal, err)
    };
    let sphere = fit_sphere(pts, n);
    let cylinder = if n == 2 {
        frames
            .iter()
            .filter_map(|&axis| fit_cylinder(pts, centroid, axis).map(|(r, e)| (axis, r, e)))
            .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
    } else {
        None
    };
    let fits = FitErrors { plane: Some(plane.1), sphere: sphere.map(|s| s.2), cylinder: cylinder.map(|c| c.2) };

    let label = |radius: T, k: usize| ((radius - T::from_count(2 * k).sqrt()).abs() / T::from_count(2 * k).sqrt()) < tolerance;
    let mut candidates: Vec<Classification<T>> = vec![Classification::Plane { normal: plane.0, fit_error: plane.1 }];
    if let Some((center, radius, fit_error)) = sphere {
        candidates.push(Classification::Sphere { center, radius, fit_error, shrinker: label(radius, n) });
    }
    if let Some((axis, radius, fit_error)) = cylinder {
        candidates.push(Classification::Cylinder { axis, radius, fit_error, shrinker: label(radius, n - 1) });
    }
    let best = candidates
        .into_iter()
        .filter(|c| c.fit_error().is_finite())
        .reduce(|a, b| if b.fit_error() < a.fit_error() { b } else { a });
    let classification = match best {
        Some(c) if c.fit_error() < tolerance => c,
        Some(c) => Classification::Unknown { fit_error: c.fit_error() },
        None => Classification::Unknown { fit_error: T::infinity() },
    };
    (classification, fits)
}

fn rms<T: Real>(values: impl Iterator<Item = T>) -> T {
    let mut s = T::zero();
    let mut k = 0usize;
    for v in values {
        s += v * v;
        k += 1;
    }
    (s / T::from_count(k.max(1))).sqrt()
}

/// Principal directions of the vertex cloud, least variance first. Curves
/// keep all three in the plane `z = 0` except the last.
fn principal_axes<T: Real>(pts: &[Vec3<T>], centroid: Vec3<T>, n: usize) -> [Vec3<T>; 3] {
    let mut m = [[T::zero(); 3]; 3];
    for &p in pts {
        let d = (p - centroid).to_array();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += d[i] * d[j];
            }
        }
    }
    if n == 1 {
        m[2][2] = (m[0][0] + m[1][1]) * T::lit(2.0) + T::one();
    }
    let (_, v) = symmetric_eigen3(m);
    [0, 1, 2].map(|k| Vec3::new(v[0][k], v[1][k], v[2][k]))
}

/// Algebraic sphere (circle for curves) fit `|x|² = 2c·x + d`, returning
/// center, radius and the RMS radial error relative to the radius.
fn fit_sphere<T: Real>(pts: &[Vec3<T>], n: usize) -> Option<(Vec3<T>, T, T)> {
    let m = n + 1;
    let rows: Vec<Vec<T>> = pts
        .iter()
        .map(|p| {
            let mut r: Vec<T> = p.to_array()[..m].iter().map(|&x| x * T::lit(2.0)).collect();
            r.push(T::one());
            r
        })
        .collect();
    let y: Vec<T> = pts.iter().map(|p| p.norm_sq()).collect();
    let sol = least_squares(&rows, &y)?;
    let mut c = [T::zero(); 3];
    c[..m].copy_from_slice(&sol[..m]);
    let center = Vec3::from_array(c);
    let r2 = sol[m] + center.norm_sq();
    if !(r2 > T::zero()) || !r2.is_finite() {
        return None;
    }
    let radius = r2.sqrt();
    let err = rms(pts.iter().map(|&p| p.distance(center) - radius)) / radius;
    Some((center, radius, err))
}

/// Circle fit of the vertices projected along `axis`.
fn fit_cylinder<T: Real>(pts: &[Vec3<T>], centroid: Vec3<T>, axis: Vec3<T>) -> Option<(T, T)> {
    let u = axis.any_orthogonal();
    let w = axis.cross(u);
    let flat: Vec<Vec3<T>> = pts
        .iter()
        .map(|&p| {
            let d = p - centroid;
            Vec3::planar(d.dot(u), d.dot(w))
        })
        .collect();
    fit_sphere(&flat, 1).map(|(_, r, e)| (r, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::{circle, icosphere};

    #[test]
    fn unit_circle_residual_is_half() {
        let c = circle(1.0f64, 512).unwrap();
        let r = shrinker_residual(&c).unwrap();
        assert!((r.l2_residual - 0.5).abs() < 1e-4);
        assert!(r.l2_residual <= r.linf_residual);
        match r.classification {
            Classification::Sphere { radius, shrinker, .. } => {
                assert!((radius - 1.0).abs() < 1e-9);
                assert!(!shrinker);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sphere_of_radius_two_is_a_shrinker() {
        let s = icosphere(2.0f64, 4).unwrap();
        let r = shrinker_residual(&s).unwrap();
        assert!(r.linf_residual < 5e-2, "{}", r.linf_residual);
        assert!(matches!(r.classification, Classification::Sphere { shrinker: true, .. }));
        assert!(r.fits.plane.unwrap() > 0.1);
    }

    #[test]
    fn stretched_sphere_is_unknown() {
        let s = crate::geometry::shapes::ellipsoid([2.0f64, 1.0, 1.0], 3).unwrap();
        let r = shrinker_residual(&s).unwrap();
        assert!(matches!(r.classification, Classification::Unknown { .. }), "{:?}", r.classification);
    }
}
