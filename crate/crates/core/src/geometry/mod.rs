//! Closed discrete hypersurfaces: polygons in the plane (`n = 1`) and
//! oriented triangle meshes in space (`n = 2`).

mod curvature;
mod hausdorff;
pub mod io;
mod remesh;
pub mod shapes;
mod transform;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

pub use curvature::{compute_curvature, cotan_system, CurvatureField};
pub(crate) use curvature::mean_curvature_field;
pub use hausdorff::{hausdorff_distance, point_segment_distance, point_triangle_distance};
pub use remesh::remesh;
pub use transform::{transform, RigidDilation};

/// Whether the stored winding already points outward (`Positive`) or must be
/// flipped to obtain outward normals (`Negative`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Orientation::Positive => T::one(),
            Orientation::Negative => -T::one(),
        }
    }
}

#[derive(Debug)]
pub(crate) struct MeshTopology {
    pub triangles: Vec<[usize; 3]>,
    /// Undirected edges `(a, b)` with `a < b`.
    pub edges: Vec<[usize; 2]>,
    pub one_ring: Vec<Vec<usize>>,
    two_ring: OnceLock<Vec<Vec<usize>>>,
}

impl MeshTopology {
    pub fn two_ring(&self) -> &[Vec<usize>] {
        self.two_ring.get_or_init(|| {
            self.one_ring
                .iter()
                .enumerate()
                .map(|(v, ring)| {
                    let mut out: Vec<usize> = ring.clone();
                    for &w in ring {
                        out.extend(self.one_ring[w].iter().copied().filter(|&u| u != v));
                    }
                    out.sort_unstable();
                    out.dedup();
                    out
                })
                .collect()
        })
    }
}

#[derive(Debug)]
pub(crate) enum Topology {
    Cycle(usize),
    Mesh(MeshTopology),
}

/// A closed polygon in the `z = 0` plane or a closed oriented triangle mesh.
#[derive(Debug, Clone)]
pub struct DiscreteHypersurface<T> {
    vertices: Vec<Vec3<T>>,
    topology: Arc<Topology>,
    orientation: Orientation,
    diameter: OnceLock<T>,
}

impl<T: Real> DiscreteHypersurface<T> {
    /// Closed polygon through `points` (implicitly closed). All points must
    /// lie in the `z = 0` plane.
    pub fn polyline(points: Vec<Vec3<T>>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidSurface(format!("polyline needs at least 3 vertices, got {}", points.len())));
        }
        if points.iter().any(|p| p.z != T::zero()) {
            return Err(Error::DimensionMismatch("polyline vertices must lie in the z = 0 plane".into()));
        }
        let topology = Arc::new(Topology::Cycle(points.len()));
        Self::assemble(points, topology)
    }

    pub fn polyline_xy(points: &[[T; 2]]) -> Result<Self> {
        Self::polyline(points.iter().map(|p| Vec3::planar(p[0], p[1])).collect())
    }

    /// Closed, oriented, edge-manifold triangle mesh.
    pub fn triangle_mesh(vertices: Vec<Vec3<T>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let topology = Arc::new(Topology::Mesh(build_mesh_topology(vertices.len(), triangles)?));
        Self::assemble(vertices, topology)
    }

    /// Same connectivity, new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Vec3<T>>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} vertices, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        if self.dim() == 1 && vertices.iter().any(|p| p.z != T::zero()) {
            return Err(Error::DimensionMismatch("polyline vertices must lie in the z = 0 plane".into()));
        }
        Self::assemble(vertices, Arc::clone(&self.topology))
    }

    fn assemble(vertices: Vec<Vec3<T>>, topology: Arc<Topology>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidSurface(format!("vertex {i} is not finite")));
        }
        let mut s = Self { vertices, topology, orientation: Orientation::Positive, diameter: OnceLock::new() };
        let extent = s.bounding_extent();
        let tol = T::degeneracy_tol() * extent;
        let (min_edge, _) = s.edge_length_range();
        if !(min_edge > tol) {
            return Err(Error::DegenerateElement(format!(
                "minimum edge length {:e} below tolerance {:e}",
                min_edge.to_f64_lossy(),
                tol.to_f64_lossy()
            )));
        }
        if s.dim() == 1 {
            check_simple_polygon(&s.vertices, tol)?;
        } else {
            for (i, t) in s.triangles().iter().enumerate() {
                let [a, b, c] = t.map(|k| s.vertices[k]);
                if !((b - a).cross(c - a).norm() > tol * tol) {
                    return Err(Error::DegenerateElement(format!("triangle {i} has zero area")));
                }
            }
        }
        let signed = s.signed_volume();
        if signed == T::zero() {
            return Err(Error::InvalidSurface("enclosed volume is zero".into()));
        }
        s.orientation = if signed > T::zero() { Orientation::Positive } else { Orientation::Negative };
        Ok(s)
    }

    /// Intrinsic dimension `n` (1 for curves, 2 for meshes).
    pub fn dim(&self) -> usize {
        match *self.topology {
            Topology::Cycle(_) => 1,
            Topology::Mesh(_) => 2,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim() + 1
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Triangles of a mesh; empty for polylines.
    pub fn triangles(&self) -> &[[usize; 3]] {
        match &*self.topology {
            Topology::Cycle(_) => &[],
            Topology::Mesh(m) => &m.triangles,
        }
    }

    /// Number of segments (curves) or triangles (meshes).
    pub fn element_count(&self) -> usize {
        match &*self.topology {
            Topology::Cycle(n) => *n,
            Topology::Mesh(m) => m.triangles.len(),
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub(crate) fn topology(&self) -> &Topology {
        &self.topology
    }

    pub(crate) fn mesh_topology(&self) -> Option<&MeshTopology> {
        match &*self.topology {
            Topology::Mesh(m) => Some(m),
            Topology::Cycle(_) => None,
        }
    }

    /// True when both surfaces share the same connectivity object.
    pub fn shares_connectivity(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.topology, &other.topology) {
            return true;
        }
        match (&*self.topology, &*other.topology) {
            (Topology::Cycle(a), Topology::Cycle(b)) => a == b,
            (Topology::Mesh(a), Topology::Mesh(b)) => a.triangles == b.triangles,
            _ => false,
        }
    }

    /// Undirected edges as vertex index pairs.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        match &*self.topology {
            Topology::Cycle(n) => (0..*n).map(|i| [i, (i + 1) % n]).collect(),
            Topology::Mesh(m) => m.edges.clone(),
        }
    }

    /// `(min, max)` edge length.
    pub fn edge_length_range(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::zero();
        let mut visit = |a: usize, b: usize| {
            let l = self.vertices[a].distance(self.vertices[b]);
            lo = lo.min(l);
            hi = hi.max(l);
        };
        match &*self.topology {
            Topology::Cycle(n) => (0..*n).for_each(|i| visit(i, (i + 1) % n)),
            Topology::Mesh(m) => m.edges.iter().for_each(|e| visit(e[0], e[1])),
        }
        (lo, hi)
    }

    pub fn mean_edge_length(&self) -> T {
        let edges = self.edges();
        let total: T = edges.iter().map(|e| self.vertices[e[0]].distance(self.vertices[e[1]])).sum();
        total / T::from_count(edges.len())
    }

    /// Length (n = 1) or area (n = 2).
    pub fn total_measure(&self) -> T {
        match &*self.topology {
            Topology::Cycle(n) => (0..*n).map(|i| self.vertices[i].distance(self.vertices[(i + 1) % n])).sum(),
            Topology::Mesh(m) => m
                .triangles
                .iter()
                .map(|t| {
                    let [a, b, c] = t.map(|k| self.vertices[k]);
                    (b - a).cross(c - a).norm() * T::lit(0.5)
                })
                .sum(),
        }
    }

    /// Signed enclosed volume of the stored winding: shoelace area for
    /// polygons, divergence-theorem sum for meshes.
    fn signed_volume(&self) -> T {
        match &*self.topology {
            Topology::Cycle(n) => {
                let s: T = (0..*n).map(|i| self.vertices[i].cross2(self.vertices[(i + 1) % n])).sum();
                s * T::lit(0.5)
            }
            Topology::Mesh(m) => {
                let s: T = m
                    .triangles
                    .iter()
                    .map(|t| {
                        let [a, b, c] = t.map(|k| self.vertices[k]);
                        a.dot(b.cross(c))
                    })
                    .sum();
                s / T::lit(6.0)
            }
        }
    }

    /// Enclosed area (n = 1) or volume (n = 2); positive.
    pub fn enclosed_volume(&self) -> T {
        self.signed_volume() * self.orientation.sign()
    }

    /// Measure-weighted centroid of the surface.
    pub fn centroid(&self) -> Vec3<T> {
        let half = T::lit(0.5);
        let third = T::one() / T::lit(3.0);
        let (sum, w) = match &*self.topology {
            Topology::Cycle(n) => (0..*n).fold((Vec3::zero(), T::zero()), |(s, w), i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let l = a.distance(b);
                (s + (a + b) * (half * l), w + l)
            }),
            Topology::Mesh(m) => m.triangles.iter().fold((Vec3::zero(), T::zero()), |(s, w), t| {
                let [a, b, c] = t.map(|k| self.vertices[k]);
                let area = (b - a).cross(c - a).norm() * half;
                (s + (a + b + c) * (third * area), w + area)
            }),
        };
        sum / w
    }

    /// Largest distance between two vertices. Exact (quadratic scan),
    /// computed once and cached.
    pub fn diameter(&self) -> T {
        *self.diameter.get_or_init(|| {
            let v = &self.vertices;
            (0..v.len())
                .into_par_iter()
                .map(|i| v[i + 1..].iter().fold(T::zero(), |m, q| m.max(v[i].distance(*q))))
                .reduce(T::zero, |a, b| a.max(b))
        })
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn bounding_extent(&self) -> T {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn bounding_box(&self) -> (Vec3<T>, Vec3<T>) {
        let inf = T::infinity();
        let mut lo = Vec3::new(inf, inf, inf);
        let mut hi = -lo;
        for p in &self.vertices {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        (lo, hi)
    }

    /// Copies the surface into another scalar type.
    pub fn cast<U: Real>(&self) -> Result<DiscreteHypersurface<U>> {
        let conv = |x: T| U::lit(x.to_f64_lossy());
        let verts: Vec<Vec3<U>> = self.vertices.iter().map(|p| Vec3::new(conv(p.x), conv(p.y), conv(p.z))).collect();
        match &*self.topology {
            Topology::Cycle(_) => DiscreteHypersurface::polyline(verts),
            Topology::Mesh(m) => DiscreteHypersurface::triangle_mesh(verts, m.triangles.clone()),
        }
    }
}

fn build_mesh_topology(nv: usize, triangles: Vec<[usize; 3]>) -> Result<MeshTopology> {
    if nv < 4 || triangles.len() < 4 {
        return Err(Error::InvalidSurface("closed mesh needs at least 4 vertices and 4 triangles".into()));
    }
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 3);
    for (f, t) in triangles.iter().enumerate() {
        if t.iter().any(|&k| k >= nv) {
            return Err(Error::InvalidSurface(format!("triangle {f} references a missing vertex")));
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::InvalidSurface(format!("triangle {f} repeats a vertex")));
        }
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            if directed.insert(e, f).is_some() {
                return Err(Error::InvalidSurface(format!(
                    "directed edge {:?} used twice (inconsistent orientation or non-manifold)",
                    e
                )));
            }
        }
    }
    let mut edges = Vec::with_capacity(directed.len() / 2);
    let mut one_ring = vec![Vec::new(); nv];
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) {
            return Err(Error::InvalidSurface(format!("edge ({a}, {b}) is a boundary edge")));
        }
        if a < b {
            edges.push([a, b]);
            one_ring[a].push(b);
            one_ring[b].push(a);
        }
    }
    edges.sort_unstable();
    for ring in one_ring.iter_mut() {
        ring.sort_unstable();
    }
    // each vertex fan must be a single cycle
    let mut next: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for t in &triangles {
        for k in 0..3 {
            next[t[k]].push((t[(k + 1) % 3], t[(k + 2) % 3]));
        }
    }
    for (v, fan) in next.iter().enumerate() {
        if fan.is_empty() {
            return Err(Error::InvalidSurface(format!("vertex {v} is isolated")));
        }
        let map: HashMap<usize, usize> = fan.iter().copied().collect();
        let start = fan[0].0;
        let mut cur = start;
        let mut steps = 0;
        loop {
            cur = map[&cur];
            steps += 1;
            if cur == start || steps > fan.len() {
                break;
            }
        }
        if steps != fan.len() {
            return Err(Error::InvalidSurface(format!("vertex {v} is non-manifold")));
        }
    }
    Ok(MeshTopology { triangles, edges, one_ring, two_ring: OnceLock::new() })
}

/// Rejects polygons with intersecting non-adjacent segments (grid-bucketed).
fn check_simple_polygon<T: Real>(pts: &[Vec3<T>], tol: T) -> Result<()> {
    let n = pts.len();
    let mean: T = (0..n).map(|i| pts[i].distance(pts[(i + 1) % n])).sum::<T>() / T::from_count(n);
    let cell = mean * T::lit(2.0);
    let key = |v: T| -> i64 { (v / cell).floor().to_i64().unwrap_or(0) };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for gx in key(a.x.min(b.x))..=key(a.x.max(b.x)) {
            for gy in key(a.y.min(b.y))..=key(a.y.max(b.y)) {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let mut keys: Vec<_> = grid.keys().copied().collect();
    keys.sort_unstable();
    for k in keys {
        let segs = &grid[&k];
        for (ii, &i) in segs.iter().enumerate() {
            for &j in &segs[ii + 1..] {
                let adjacent = j == (i + 1) % n || i == (j + 1) % n;
                if adjacent {
                    continue;
                }
                if segments_close(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n], tol) {
                    return Err(Error::InvalidSurface(format!("polyline self-intersects at segments {i} and {j}")));
                }
            }
        }
    }
    Ok(())
}

fn segments_close<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>, d: Vec3<T>, tol: T) -> bool {
    let o1 = (b - a).cross2(c - a);
    let o2 = (b - a).cross2(d - a);
    let o3 = (d - c).cross2(a - c);
    let o4 = (d - c).cross2(b - c);
    if ((o1 > T::zero() && o2 < T::zero()) || (o1 < T::zero() && o2 > T::zero()))
        && ((o3 > T::zero() && o4 < T::zero()) || (o3 < T::zero() && o4 > T::zero()))
    {
        return true;
    }
    let d1 = point_segment_distance(c, a, b).min(point_segment_distance(d, a, b));
    let d2 = point_segment_distance(a, c, d).min(point_segment_distance(b, c, d));
    d1.min(d2) <= tol
}

#[cfg(test)]
mod tests {
    use super::shapes;
    use super::*;

    #[test]
    fn square_measures() {
        let s = DiscreteHypersurface::polyline_xy(&[[0.0f64, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.total_measure() - 4.0).abs() < 1e-15);
        assert!((s.enclosed_volume() - 1.0).abs() < 1e-15);
        assert_eq!(s.orientation(), Orientation::Positive);
        assert!((s.diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clockwise_polygon_flags_negative_orientation() {
        let s = DiscreteHypersurface::polyline_xy(&[[0.0f64, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(s.orientation(), Orientation::Negative);
        assert!((s.enclosed_volume() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bow_tie_is_rejected() {
        let err = DiscreteHypersurface::polyline_xy(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidSurface(_)));
    }

    #[test]
    fn repeated_vertex_is_degenerate() {
        let err = DiscreteHypersurface::polyline_xy(&[[0.0f64, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateElement(_)));
    }

    #[test]
    fn open_mesh_is_rejected() {
        let sphere = shapes::icosphere(1.0, 1).unwrap();
        let mut tris = sphere.triangles().to_vec();
        tris.pop();
        let err = DiscreteHypersurface::triangle_mesh(sphere.vertices().to_vec(), tris).unwrap_err();
        assert!(matches!(err, Error::InvalidSurface(_)));
    }

    #[test]
    fn flipped_triangle_is_rejected() {
        let sphere = shapes::icosphere(1.0, 1).unwrap();
        let mut tris = sphere.triangles().to_vec();
        tris[3].swap(0, 1);
        assert!(DiscreteHypersurface::triangle_mesh(sphere.vertices().to_vec(), tris).is_err());
    }

    #[test]
    fn inverted_mesh_has_negative_orientation() {
        let sphere = shapes::icosphere(1.0f64, 2).unwrap();
        let tris: Vec<[usize; 3]> = sphere.triangles().iter().map(|t| [t[0], t[2], t[1]]).collect();
        let inv = DiscreteHypersurface::triangle_mesh(sphere.vertices().to_vec(), tris).unwrap();
        assert_eq!(inv.orientation(), Orientation::Negative);
        assert!((inv.enclosed_volume() - sphere.enclosed_volume()).abs() < 1e-14);
    }
}
