use rayon::prelude::*;

use super::DiscreteHypersurface;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

pub fn point_segment_distance<T: Real>(p: Vec3<T>, a: Vec3<T>, b: Vec3<T>) -> T {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == T::zero() {
        return p.distance(a);
    }
    let s = ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one());
    p.distance(a + ab * s)
}

/// Distance from `p` to the closed triangle `abc` (closest-point by Voronoi
/// region classification).
pub fn point_triangle_distance<T: Real>(p: Vec3<T>, a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> T {
    let zero = T::zero();
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= zero && d2 <= zero {
        return p.distance(a);
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= zero && d4 <= d3 {
        return p.distance(b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= zero && d1 >= zero && d3 <= zero {
        let v = d1 / (d1 - d3);
        return p.distance(a + ab * v);
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= zero && d5 <= d6 {
        return p.distance(c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= zero && d2 >= zero && d6 <= zero {
        let w = d2 / (d2 - d6);
        return p.distance(a + ac * w);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= zero && (d4 - d3) >= zero && (d5 - d6) >= zero {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return p.distance(b + (c - b) * w);
    }
    let denom = T::one() / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    p.distance(a + ab * v + ac * w)
}

fn distance_to_surface<T: Real>(p: Vec3<T>, s: &DiscreteHypersurface<T>) -> T {
    let v = s.vertices();
    if s.dim() == 1 {
        let n = v.len();
        (0..n).fold(T::infinity(), |m, i| m.min(point_segment_distance(p, v[i], v[(i + 1) % n])))
    } else {
        s.triangles()
            .iter()
            .fold(T::infinity(), |m, t| m.min(point_triangle_distance(p, v[t[0]], v[t[1]], v[t[2]])))
    }
}

fn one_sided<T: Real>(from: &DiscreteHypersurface<T>, to: &DiscreteHypersurface<T>) -> T {
    from.vertices()
        .par_iter()
        .map(|&p| distance_to_surface(p, to))
        .reduce(T::zero, |a, b| a.max(b))
}

/// Symmetric Hausdorff distance between the vertex set of each surface and
/// the full (segment/triangle) geometry of the other.
pub fn hausdorff_distance<T: Real>(a: &DiscreteHypersurface<T>, b: &DiscreteHypersurface<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare a dimension-{} surface with a dimension-{} surface",
            a.dim(),
            b.dim()
        )));
    }
    Ok(one_sided(a, b).max(one_sided(b, a)))
}
