//! Resolution control. Polygons are resampled uniformly in arc length;
//! meshes go through edge split/collapse passes followed by tangential
//! relaxation.

use std::collections::HashMap;

use super::{DiscreteHypersurface, Topology};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::scalar::Real;
use crate::vector::Vec3;

const SPLIT_FACTOR: f64 = 1.33;
const COLLAPSE_FACTOR: f64 = 0.66;
const MAX_PASSES: usize = 30;
const RELAX_ITERATIONS: usize = 3;
const RELAX_STEP: f64 = 0.5;

pub fn remesh<T: Real>(surface: &DiscreteHypersurface<T>, target_edge: T) -> Result<DiscreteHypersurface<T>> {
    if !(target_edge > T::zero()) {
        return Err(Error::InvalidArgument("target edge length must be positive".into()));
    }
    match surface.topology() {
        Topology::Cycle(_) => resample_polygon(surface, target_edge),
        Topology::Mesh(m) => remesh_triangles(surface.vertices().to_vec(), m.triangles.clone(), target_edge),
    }
}

fn resample_polygon<T: Real>(surface: &DiscreteHypersurface<T>, target: T) -> Result<DiscreteHypersurface<T>> {
    let p = surface.vertices();
    let n = p.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(T::zero());
    for i in 0..n {
        let l = *cumulative.last().unwrap() + p[i].distance(p[(i + 1) % n]);
        cumulative.push(l);
    }
    let total = cumulative[n];
    let count = (total / target).round().to_usize().unwrap_or(3).max(3);
    let spacing = total / T::from_count(count);
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 0..count {
        let s = spacing * T::from_count(k);
        while seg + 1 < n && cumulative[seg + 1] <= s {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let u = ((s - cumulative[seg]) / len).max(T::zero()).min(T::one());
        out.push(hermite(p, seg, u));
    }
    DiscreteHypersurface::polyline(out).map_err(|e| Error::RemeshFailure(e.to_string()))
}

/// Cubic Hermite point on segment `i → i+1` with chord-direction tangents,
/// so resampled vertices follow the curve rather than its chords.
fn hermite<T: Real>(p: &[Vec3<T>], i: usize, u: T) -> Vec3<T> {
    let n = p.len();
    let (a, b) = (p[i], p[(i + 1) % n]);
    let len = a.distance(b);
    let ta = (b - p[(i + n - 1) % n]).normalized() * len;
    let tb = (p[(i + 2) % n] - a).normalized() * len;
    let (u2, u3) = (u * u, u * u * u);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    a * (two * u3 - three * u2 + T::one()) + ta * (u3 - two * u2 + u) + b * (three * u2 - two * u3) + tb * (u3 - u2)
}

fn vertex_normals<T: Real>(v: &[Vec3<T>], faces: &[[usize; 3]]) -> Vec<Vec3<T>> {
    let mut normals = vec![Vec3::zero(); v.len()];
    for f in faces {
        let x = f.map(|k| v[k]);
        let nrm = (x[1] - x[0]).cross(x[2] - x[0]);
        for &k in f {
            normals[k] += nrm;
        }
    }
    normals.into_iter().map(|n| if n.norm_sq() > T::zero() { n.normalized() } else { n }).collect()
}

/// Midpoint of edge `ab` lifted off the chord using the endpoint normals
/// (Hermite interpolation with tangents projected into each tangent plane).
fn curved_midpoint<T: Real>(a: Vec3<T>, b: Vec3<T>, na: Vec3<T>, nb: Vec3<T>) -> Vec3<T> {
    let e = b - a;
    (a + b) * T::lit(0.5) + (nb * e.dot(nb) - na * e.dot(na)) * T::lit(0.125)
}

fn edge_faces(faces: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut map = HashMap::with_capacity(faces.len() * 3);
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            map.insert((f[k], f[(k + 1) % 3]), fi);
        }
    }
    map
}

/// Rotates `f` so that it starts with `a` (which must be one of its corners).
fn rotate_to(f: [usize; 3], a: usize) -> [usize; 3] {
    if f[0] == a {
        f
    } else if f[1] == a {
        [f[1], f[2], f[0]]
    } else {
        [f[2], f[0], f[1]]
    }
}

fn split_long_edges<T: Real>(v: &mut Vec<Vec3<T>>, faces: &mut Vec<[usize; 3]>, max_len: T) -> usize {
    let map = edge_faces(faces);
    let mut candidates: Vec<(T, usize, usize)> = map
        .keys()
        .filter(|(a, b)| a < b)
        .map(|&(a, b)| (v[a].distance(v[b]), a, b))
        .filter(|(l, _, _)| *l > max_len)
        .collect();
    candidates.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then((x.1, x.2).cmp(&(y.1, y.2))));
    let normals = vertex_normals(v, faces);
    let mut locked = vec![false; faces.len()];
    let mut splits = 0;
    for (_, a, b) in candidates {
        let (f1, f2) = (map[&(a, b)], map[&(b, a)]);
        if locked[f1] || locked[f2] {
            continue;
        }
        locked[f1] = true;
        locked[f2] = true;
        let m = v.len();
        v.push(curved_midpoint(v[a], v[b], normals[a], normals[b]));
        let c = rotate_to(faces[f1], a)[2];
        let d = rotate_to(faces[f2], b)[2];
        faces[f1] = [a, m, c];
        faces.push([m, b, c]);
        faces[f2] = [b, m, d];
        faces.push([m, a, d]);
        locked.push(true);
        locked.push(true);
        splits += 1;
    }
    splits
}

fn collapse_short_edges<T: Real>(v: &mut [Vec3<T>], faces: &mut Vec<[usize; 3]>, min_len: T, max_len: T, alive: &mut [bool]) -> usize {
    let map = edge_faces(faces);
    let mut vertex_faces: Vec<Vec<usize>> = vec![Vec::new(); v.len()];
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); v.len()];
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            vertex_faces[f[k]].push(fi);
            neighbors[f[k]].push(f[(k + 1) % 3]);
        }
    }
    let live_vertices = alive.iter().filter(|&&a| a).count();
    let mut candidates: Vec<(T, usize, usize)> = map
        .keys()
        .filter(|(a, b)| a < b)
        .map(|&(a, b)| (v[a].distance(v[b]), a, b))
        .filter(|(l, _, _)| *l < min_len)
        .collect();
    candidates.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then((x.1, x.2).cmp(&(y.1, y.2))));
    let normals = vertex_normals(v, faces);
    let mut locked = vec![false; v.len()];
    let mut removed = vec![false; faces.len()];
    let mut collapses = 0;
    for (_, a, b) in candidates {
        if live_vertices - collapses <= 6 {
            break;
        }
        if locked[a] || locked[b] {
            continue;
        }
        let (f1, f2) = (map[&(a, b)], map[&(b, a)]);
        let c = rotate_to(faces[f1], a)[2];
        let d = rotate_to(faces[f2], b)[2];
        let common: Vec<usize> = neighbors[a].iter().copied().filter(|x| neighbors[b].contains(x)).collect();
        if common.len() != 2 || !common.contains(&c) || !common.contains(&d) {
            continue;
        }
        if neighbors[a].len() + neighbors[b].len() < 7 || neighbors[c].len() <= 3 || neighbors[d].len() <= 3 {
            continue;
        }
        let m = curved_midpoint(v[a], v[b], normals[a], normals[b]);
        let mut ok = true;
        for &fi in vertex_faces[a].iter().chain(&vertex_faces[b]) {
            if fi == f1 || fi == f2 {
                continue;
            }
            let old = faces[fi].map(|k| v[k]);
            let new = faces[fi].map(|k| if k == a || k == b { m } else { v[k] });
            let n_old = (old[1] - old[0]).cross(old[2] - old[0]);
            let n_new = (new[1] - new[0]).cross(new[2] - new[0]);
            let too_long = (0..3).any(|k| new[k].distance(new[(k + 1) % 3]) > max_len);
            if n_new.dot(n_old) <= T::zero() || too_long {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        removed[f1] = true;
        removed[f2] = true;
        for &fi in &vertex_faces[b] {
            for k in faces[fi].iter_mut() {
                if *k == b {
                    *k = a;
                }
            }
        }
        v[a] = m;
        alive[b] = false;
        for &x in neighbors[a].iter().chain(&neighbors[b]) {
            locked[x] = true;
        }
        locked[a] = true;
        locked[b] = true;
        collapses += 1;
    }
    if collapses > 0 {
        let kept: Vec<[usize; 3]> = faces.iter().zip(&removed).filter(|(_, &r)| !r).map(|(f, _)| *f).collect();
        *faces = kept;
    }
    collapses
}

fn relax_tangentially<T: Real>(v: &mut [Vec3<T>], faces: &[[usize; 3]]) {
    let n = v.len();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for f in faces {
        for k in 0..3 {
            neighbors[f[k]].push(f[(k + 1) % 3]);
        }
    }
    for _ in 0..RELAX_ITERATIONS {
        let normals = vertex_normals(v, faces);
        let updated: Vec<Vec3<T>> = (0..n)
            .map(|i| {
                if neighbors[i].is_empty() {
                    return v[i];
                }
                let nu = normals[i];
                let c = neighbors[i].iter().map(|&j| v[j]).sum::<Vec3<T>>() / T::from_count(neighbors[i].len());
                let d = c - v[i];
                let shift = (d - nu * d.dot(nu)) * T::lit(RELAX_STEP);
                v[i] + shift + nu * height_on_fit(v, i, nu, &neighbors[i], shift)
            })
            .collect();
        v.copy_from_slice(&updated);
    }
}

/// Height above the tangent plane at `v[i]` of the osculating quadric
/// `w = αu² + βuv + γv²` (fitted to the one-ring) at tangent offset `shift`.
fn height_on_fit<T: Real>(v: &[Vec3<T>], i: usize, nu: Vec3<T>, ring: &[usize], shift: Vec3<T>) -> T {
    if ring.len() < 3 {
        return T::zero();
    }
    let e1 = nu.any_orthogonal();
    let e2 = nu.cross(e1);
    let rows: Vec<Vec<T>> = ring
        .iter()
        .map(|&j| {
            let d = v[j] - v[i];
            let (u, w) = (d.dot(e1), d.dot(e2));
            vec![u * u, u * w, w * w]
        })
        .collect();
    let rhs: Vec<T> = ring.iter().map(|&j| (v[j] - v[i]).dot(nu)).collect();
    match least_squares(&rows, &rhs) {
        Some(c) => {
            let (u, w) = (shift.dot(e1), shift.dot(e2));
            c[0] * u * u + c[1] * u * w + c[2] * w * w
        }
        None => T::zero(),
    }
}

fn remesh_triangles<T: Real>(mut v: Vec<Vec3<T>>, mut faces: Vec<[usize; 3]>, target: T) -> Result<DiscreteHypersurface<T>> {
    let max_len = target * T::lit(SPLIT_FACTOR);
    let min_len = target * T::lit(COLLAPSE_FACTOR);
    let mut alive = vec![true; v.len()];
    for _ in 0..MAX_PASSES {
        let splits = split_long_edges(&mut v, &mut faces, max_len);
        alive.resize(v.len(), true);
        let collapses = collapse_short_edges(&mut v, &mut faces, min_len, max_len, &mut alive);
        if splits + collapses == 0 {
            break;
        }
    }
    let mut remap = vec![usize::MAX; v.len()];
    let mut compact = Vec::with_capacity(v.len());
    for (i, p) in v.iter().enumerate() {
        if alive[i] {
            remap[i] = compact.len();
            compact.push(*p);
        }
    }
    let faces: Vec<[usize; 3]> = faces.iter().map(|f| f.map(|k| remap[k])).collect();
    if faces.iter().flatten().any(|&k| k == usize::MAX) {
        return Err(Error::RemeshFailure("collapsed vertex still referenced".into()));
    }
    relax_tangentially(&mut compact, &faces);
    DiscreteHypersurface::triangle_mesh(compact, faces).map_err(|e| Error::RemeshFailure(e.to_string()))
}
