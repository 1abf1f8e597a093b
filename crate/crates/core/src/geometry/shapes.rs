//! Generators for the reference geometries: regular polygons, icospheres,
//! ellipsoids and a flat-based dome.

use std::collections::HashMap;

use super::DiscreteHypersurface;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Regular `segments`-gon inscribed in the circle of `radius` about the
/// origin, counter-clockwise, first vertex on the positive x axis.
pub fn circle<T: Real>(radius: T, segments: usize) -> Result<DiscreteHypersurface<T>> {
    circle_at(Vec3::zero(), radius, segments)
}

pub fn circle_at<T: Real>(center: Vec3<T>, radius: T, segments: usize) -> Result<DiscreteHypersurface<T>> {
    if !(radius > T::zero()) || segments < 3 {
        return Err(Error::InvalidArgument("circle needs radius > 0 and at least 3 segments".into()));
    }
    let step = T::TAU() / T::from_count(segments);
    let pts = (0..segments)
        .map(|k| {
            let (s, c) = (step * T::from_count(k)).sin_cos();
            Vec3::planar(center.x + radius * c, center.y + radius * s)
        })
        .collect();
    DiscreteHypersurface::polyline(pts)
}

fn icosahedron<T: Real>() -> (Vec<Vec3<T>>, Vec<[usize; 3]>) {
    let t = (T::one() + T::lit(5.0).sqrt()) / T::lit(2.0);
    let (o, z) = (T::one(), T::zero());
    let v = vec![
        Vec3::new(-o, t, z),
        Vec3::new(o, t, z),
        Vec3::new(-o, -t, z),
        Vec3::new(o, -t, z),
        Vec3::new(z, -o, t),
        Vec3::new(z, o, t),
        Vec3::new(z, -o, -t),
        Vec3::new(z, o, -t),
        Vec3::new(t, z, -o),
        Vec3::new(t, z, o),
        Vec3::new(-t, z, -o),
        Vec3::new(-t, z, o),
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v.into_iter().map(|p| p.normalized()).collect(), f)
}

/// Unit-sphere icosahedral subdivision: `10·4^s + 2` vertices.
fn unit_icosphere<T: Real>(subdivisions: usize) -> (Vec<Vec3<T>>, Vec<[usize; 3]>) {
    let (mut verts, mut faces) = icosahedron::<T>();
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3<T>>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * T::lit(0.5)).normalized());
                verts.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts, faces)
}

/// Icosphere of `radius` about the origin.
pub fn icosphere<T: Real>(radius: T, subdivisions: usize) -> Result<DiscreteHypersurface<T>> {
    ellipsoid_scaled([radius; 3], subdivisions)
}

/// Axis-aligned ellipsoid with semi-axes `axes`, meshed as a stretched icosphere.
pub fn ellipsoid<T: Real>(axes: [T; 3], subdivisions: usize) -> Result<DiscreteHypersurface<T>> {
    ellipsoid_scaled(axes, subdivisions)
}

fn ellipsoid_scaled<T: Real>(axes: [T; 3], subdivisions: usize) -> Result<DiscreteHypersurface<T>> {
    if axes.iter().any(|a| !(*a > T::zero())) {
        return Err(Error::InvalidArgument("axes must be positive".into()));
    }
    if subdivisions > 7 {
        return Err(Error::InvalidArgument(format!("subdivision level {subdivisions} too large")));
    }
    let (verts, faces) = unit_icosphere::<T>(subdivisions);
    let verts = verts.into_iter().map(|p| Vec3::new(p.x * axes[0], p.y * axes[1], p.z * axes[2])).collect();
    DiscreteHypersurface::triangle_mesh(verts, faces)
}

/// Closed dome: the upper hemisphere of an icosphere of `radius`, with the
/// lower hemisphere flattened onto the disk `z = 0` by an azimuthal
/// equidistant map (polar angle from the south pole becomes radius).
pub fn dome<T: Real>(radius: T, subdivisions: usize) -> Result<DiscreteHypersurface<T>> {
    let (verts, faces) = unit_icosphere::<T>(subdivisions);
    let half_pi = T::FRAC_PI_2();
    let verts = verts
        .into_iter()
        .map(|p| {
            if p.z >= T::zero() {
                return p * radius;
            }
            let polar = (-p.z).min(T::one()).acos();
            let planar = (p.x * p.x + p.y * p.y).sqrt();
            let r = radius * polar / half_pi;
            if planar > T::zero() {
                Vec3::new(p.x / planar * r, p.y / planar * r, T::zero())
            } else {
                Vec3::zero()
            }
        })
        .collect();
    DiscreteHypersurface::triangle_mesh(verts, faces)
}

/// Vertices of a mesh whose whole one-ring lies in the plane `z = 0`.
pub fn flat_interior_vertices<T: Real>(surface: &DiscreteHypersurface<T>) -> Vec<usize> {
    let Some(topo) = surface.mesh_topology() else {
        return Vec::new();
    };
    let p = surface.vertices();
    (0..p.len())
        .filter(|&i| p[i].z == T::zero() && topo.one_ring[i].iter().all(|&j| p[j].z == T::zero()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn icosphere_vertex_counts() {
        for s in 0..5 {
            let m = icosphere(1.0, s).unwrap();
            assert_eq!(m.vertex_count(), 10 * 4usize.pow(s as u32) + 2);
            assert_eq!(m.element_count(), 20 * 4usize.pow(s as u32));
        }
    }

    #[test]
    fn polygon_perimeter_formula() {
        let c = circle(1.0, 1024).unwrap();
        let exact = 2.0 * 1024.0 * (PI / 1024.0).sin();
        assert!((c.total_measure() - exact).abs() < 1e-12);
        assert!((c.total_measure() - 2.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn ellipsoid_volume_close_to_formula() {
        let e = ellipsoid([2.0, 1.0, 1.0], 4).unwrap();
        let exact = 4.0 * PI / 3.0 * 2.0;
        assert!((e.enclosed_volume() - exact).abs() < 0.02 * exact);
    }

    #[test]
    fn dome_is_closed_with_flat_base() {
        let d = dome(1.0, 3).unwrap();
        assert!(d.enclosed_volume() > 0.0);
        assert!(flat_interior_vertices(&d).len() > 50);
    }
}
