//! Per-vertex curvature. Polygons use the circumscribed-circle curvature of
//! consecutive vertex triples; meshes use the cotangent Laplacian with
//! mixed-Voronoi areas, plus a two-ring quadric fit for the principal
//! curvatures.

use rayon::prelude::*;

use super::{DiscreteHypersurface, MeshTopology, Topology};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::scalar::Real;
use crate::vector::Vec3;

/// Pointwise curvature data of a discrete hypersurface.
#[derive(Debug, Clone)]
pub struct CurvatureField<T> {
    /// Signed mean curvature, positive on spheres (`n / R`).
    pub mean_curvature: Vec<T>,
    /// Unit outward normal.
    pub normal: Vec<Vec3<T>>,
    /// Lumped vertex measure; sums to the total length/area.
    pub vertex_area: Vec<T>,
    /// `|A|² = κ₁² + κ₂²` from a two-ring quadric fit (`H²` on curves).
    pub second_form_norm_sq: Vec<T>,
    /// Mean curvature `κ₁ + κ₂` of the same quadric fit (equal to
    /// `mean_curvature` on curves). Pairs with `second_form_norm_sq` in
    /// pointwise ratios, which the cotangent value is too noisy for on
    /// irregular meshes.
    pub fitted_mean_curvature: Vec<T>,
}

impl<T: Real> CurvatureField<T> {
    pub fn max_abs_mean(&self) -> T {
        self.mean_curvature.iter().fold(T::zero(), |m, h| m.max(h.abs()))
    }

    pub fn min_mean(&self) -> T {
        self.mean_curvature.iter().fold(T::infinity(), |m, &h| m.min(h))
    }

    pub fn max_second_form_norm(&self) -> T {
        self.second_form_norm_sq.iter().fold(T::zero(), |m, &a| m.max(a)).sqrt()
    }
}

pub fn compute_curvature<T: Real>(surface: &DiscreteHypersurface<T>) -> Result<CurvatureField<T>> {
    match surface.topology() {
        Topology::Cycle(_) => polygon_curvature(surface),
        Topology::Mesh(m) => mesh_curvature(surface, m, true),
    }
}

/// As [`compute_curvature`] but skips the quadric fits; `second_form_norm_sq`
/// then holds the umbilic lower bound `H² / n`.
pub(crate) fn mean_curvature_field<T: Real>(surface: &DiscreteHypersurface<T>) -> Result<CurvatureField<T>> {
    match surface.topology() {
        Topology::Cycle(_) => polygon_curvature(surface),
        Topology::Mesh(m) => mesh_curvature(surface, m, false),
    }
}

fn polygon_curvature<T: Real>(surface: &DiscreteHypersurface<T>) -> Result<CurvatureField<T>> {
    let p = surface.vertices();
    let n = p.len();
    let sign: T = surface.orientation().sign();
    let tol = T::degeneracy_tol() * surface.bounding_extent();
    let mut field = CurvatureField {
        mean_curvature: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
        vertex_area: Vec::with_capacity(n),
        second_form_norm_sq: Vec::with_capacity(n),
        fitted_mean_curvature: Vec::with_capacity(n),
    };
    for i in 0..n {
        let prev = p[(i + n - 1) % n];
        let next = p[(i + 1) % n];
        let a = p[i].distance(prev);
        let b = next.distance(p[i]);
        let chord = next - prev;
        let c = chord.norm();
        if !(a > tol && b > tol && c > tol) {
            return Err(Error::DegenerateElement(format!("vertex {i} has a degenerate stencil")));
        }
        let turn = (p[i] - prev).cross2(next - p[i]);
        let h = T::lit(2.0) * turn / (a * b * c) * sign;
        field.mean_curvature.push(h);
        field.normal.push(Vec3::planar(chord.y, -chord.x) * (sign / c));
        field.vertex_area.push((a + b) * T::lit(0.5));
        field.second_form_norm_sq.push(h * h);
        field.fitted_mean_curvature.push(h);
    }
    Ok(field)
}

/// Lumped mass and symmetric stiffness of the Laplace–Beltrami operator:
/// `(mass, [(i, j, w_ij)])` with `(K x)_i = Σ_j w_ij (x_i − x_j)`. For meshes
/// `w_ij` is half the cotangent sum and the mass is the mixed-Voronoi area;
/// for polygons `w_ij = 1/|e_ij|` and the mass is the half-edge arc length.
pub fn cotan_system<T: Real>(surface: &DiscreteHypersurface<T>) -> Result<(Vec<T>, Vec<(usize, usize, T)>)> {
    let p = surface.vertices();
    let tol = T::degeneracy_tol() * surface.bounding_extent();
    match surface.topology() {
        Topology::Cycle(n) => {
            let n = *n;
            let mut mass = vec![T::zero(); n];
            let mut w = Vec::with_capacity(n);
            for i in 0..n {
                let j = (i + 1) % n;
                let l = p[i].distance(p[j]);
                if !(l > tol) {
                    return Err(Error::DegenerateElement(format!("edge ({i}, {j}) has zero length")));
                }
                mass[i] += l * T::lit(0.5);
                mass[j] += l * T::lit(0.5);
                w.push((i, j, T::one() / l));
            }
            Ok((mass, w))
        }
        Topology::Mesh(m) => {
            let mut mass = vec![T::zero(); p.len()];
            let mut w = Vec::with_capacity(m.triangles.len() * 3);
            let eighth = T::lit(0.125);
            for (f, t) in m.triangles.iter().enumerate() {
                let x = t.map(|k| p[k]);
                let twice_area = (x[1] - x[0]).cross(x[2] - x[0]).norm();
                if !(twice_area > tol * tol) {
                    return Err(Error::DegenerateElement(format!("triangle {f} has zero area")));
                }
                let area = twice_area * T::lit(0.5);
                let mut cot = [T::zero(); 3];
                for k in 0..3 {
                    let e1 = x[(k + 1) % 3] - x[k];
                    let e2 = x[(k + 2) % 3] - x[k];
                    cot[k] = e1.dot(e2) / twice_area;
                }
                let obtuse = (0..3).find(|&k| cot[k] < T::zero());
                for k in 0..3 {
                    let (i, j) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                    w.push((i, j, cot[k] * T::lit(0.5)));
                    let contribution = match obtuse {
                        None => {
                            let eb = x[(k + 1) % 3] - x[k];
                            let ec = x[(k + 2) % 3] - x[k];
                            (eb.norm_sq() * cot[(k + 2) % 3] + ec.norm_sq() * cot[(k + 1) % 3]) * eighth
                        }
                        Some(o) if o == k => area * T::lit(0.5),
                        Some(_) => area * T::lit(0.25),
                    };
                    mass[t[k]] += contribution;
                }
            }
            if let Some(i) = mass.iter().position(|&a| !(a > tol * tol)) {
                return Err(Error::DegenerateElement(format!("vertex {i} has vanishing mixed area")));
            }
            Ok((mass, w))
        }
    }
}

fn mesh_curvature<T: Real>(
    surface: &DiscreteHypersurface<T>,
    topo: &MeshTopology,
    second_form: bool,
) -> Result<CurvatureField<T>> {
    let p = surface.vertices();
    let nv = p.len();
    let sign: T = surface.orientation().sign();
    let (mass, weights) = cotan_system(surface)?;
    let mut lap = vec![Vec3::zero(); nv];
    for &(i, j, w) in &weights {
        let d = (p[i] - p[j]) * w;
        lap[i] += d;
        lap[j] -= d;
    }
    let mut normal_acc = vec![Vec3::zero(); nv];
    for t in &topo.triangles {
        let x = t.map(|k| p[k]);
        let nrm = (x[1] - x[0]).cross(x[2] - x[0]);
        for &k in t {
            normal_acc[k] += nrm;
        }
    }
    let normal: Vec<Vec3<T>> = normal_acc.into_iter().map(|v| v.normalized() * sign).collect();
    let mean_curvature: Vec<T> = (0..nv)
        .map(|i| {
            let k = lap[i] / mass[i];
            let mag = k.norm();
            if k.dot(normal[i]) < T::zero() {
                -mag
            } else {
                mag
            }
        })
        .collect();
    let half = T::lit(0.5);
    if !second_form {
        let second_form_norm_sq = mean_curvature.iter().map(|&h| h * h * half).collect();
        let fitted_mean_curvature = mean_curvature.clone();
        return Ok(CurvatureField { mean_curvature, normal, vertex_area: mass, second_form_norm_sq, fitted_mean_curvature });
    }
    let two_ring = topo.two_ring();
    let fits: Vec<(T, T)> = (0..nv)
        .into_par_iter()
        .map(|i| match quadric_shape(p, i, normal[i], &two_ring[i]) {
            // outward normal: convex quadrics bend towards −ν
            Some((trace, det)) => (-trace, (trace * trace - T::lit(2.0) * det).max(trace * trace * half)),
            None => (mean_curvature[i], mean_curvature[i] * mean_curvature[i] * half),
        })
        .collect();
    let (fitted_mean_curvature, second_form_norm_sq) = fits.into_iter().unzip();
    Ok(CurvatureField { mean_curvature, normal, vertex_area: mass, second_form_norm_sq, fitted_mean_curvature })
}

/// Trace and determinant of the shape operator of the least-squares quadric
/// `w = au² + buv + cv² + du + ev` through the stencil.
fn quadric_shape<T: Real>(p: &[Vec3<T>], i: usize, normal: Vec3<T>, stencil: &[usize]) -> Option<(T, T)> {
    if stencil.len() < 5 {
        return None;
    }
    let e1 = normal.any_orthogonal();
    let e2 = normal.cross(e1);
    let scale = stencil.iter().map(|&j| p[j].distance(p[i])).sum::<T>() / T::from_count(stencil.len());
    let mut rows = Vec::with_capacity(stencil.len());
    let mut rhs = Vec::with_capacity(stencil.len());
    for &j in stencil {
        let d = (p[j] - p[i]) / scale;
        let (u, v, w) = (d.dot(e1), d.dot(e2), d.dot(normal));
        rows.push(vec![u * u, u * v, v * v, u, v]);
        rhs.push(w);
    }
    let c = least_squares(&rows, &rhs)?;
    let (a, b, cc, du, dv) = (c[0] / scale, c[1] / scale, c[2] / scale, c[3], c[4]);
    let ee = T::one() + du * du;
    let ff = du * dv;
    let gg = T::one() + dv * dv;
    let root = (T::one() + du * du + dv * dv).sqrt();
    let l = T::lit(2.0) * a / root;
    let m = b / root;
    let nn = T::lit(2.0) * cc / root;
    let det_i = ee * gg - ff * ff;
    let trace = (gg * l - T::lit(2.0) * ff * m + ee * nn) / det_i;
    let det = (l * nn - m * m) / det_i;
    Some((trace, det))
}

#[cfg(test)]
mod tests {
    use super::super::shapes;
    use super::*;

    #[test]
    fn regular_polygon_has_exact_circle_curvature() {
        let c = shapes::circle(1.0f64, 256).unwrap();
        let f = compute_curvature(&c).unwrap();
        for (h, n) in f.mean_curvature.iter().zip(&f.normal) {
            assert!((h - 1.0).abs() < 1e-3);
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
        let total: f64 = f.vertex_area.iter().sum();
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-3);
        assert!((total - c.total_measure()).abs() < 1e-12);
    }

    #[test]
    fn icosphere_radius_two() {
        let s = shapes::icosphere(2.0f64, 4).unwrap();
        let f = compute_curvature(&s).unwrap();
        for &h in &f.mean_curvature {
            assert!((h - 1.0).abs() < 2e-2, "H = {h}");
        }
        let total: f64 = f.vertex_area.iter().sum();
        assert!((total - 16.0 * std::f64::consts::PI).abs() < 1e-1);
        assert!((total - s.total_measure()).abs() < 1e-10);
        for &a in &f.second_form_norm_sq {
            assert!((a - 0.5).abs() < 2e-2, "|A|^2 = {a}");
        }
    }

    #[test]
    fn clockwise_circle_still_has_positive_curvature() {
        let c = shapes::circle(2.0f64, 64).unwrap();
        let rev: Vec<_> = c.vertices().iter().rev().copied().collect();
        let r = DiscreteHypersurface::polyline(rev).unwrap();
        let f = compute_curvature(&r).unwrap();
        assert!(f.mean_curvature.iter().all(|&h| (h - 0.5).abs() < 1e-3));
        let p = r.vertices()[5];
        assert!(f.normal[5].dot(p) > 0.0);
    }

    #[test]
    fn flat_base_vertices_have_zero_curvature() {
        let dome = shapes::dome(1.0f64, 3).unwrap();
        let f = compute_curvature(&dome).unwrap();
        let interior = shapes::flat_interior_vertices(&dome);
        assert!(!interior.is_empty());
        for i in interior {
            assert!(f.mean_curvature[i].abs() < 1e-10);
        }
    }

    #[test]
    fn pinching_bound_holds_pointwise() {
        let e = shapes::ellipsoid([2.0, 1.0, 1.0], 3).unwrap();
        let f = compute_curvature(&e).unwrap();
        for (a, h) in f.second_form_norm_sq.iter().zip(&f.mean_curvature) {
            assert!(*a >= h * h / 2.0 - 1e-12);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let c = shapes::circle(1.0f32, 64).unwrap();
        let f = compute_curvature(&c).unwrap();
        assert!(f.mean_curvature.iter().all(|&h| (h - 1.0).abs() < 1e-4));
    }
}
