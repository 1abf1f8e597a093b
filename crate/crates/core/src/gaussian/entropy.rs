//! Multi-start quasi-Newton maximization of the Gaussian functional over
//! centers and log-scales.
//!
//! The search runs in normalized coordinates `u = (x₀ − origin) / L` and
//! `s = ln(t₀ / L²)`, where `origin` is the surface centroid and `L` its
//! diameter, so the iterates commute with rigid motions and dilations of the
//! input. Each start runs BFGS with a backtracking Armijo search. The scale
//! is bounded below by a multiple of the longest edge, where the fixed
//! quadrature stops resolving the Gaussian.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GaussianCenter, QuadratureNodes};
use crate::error::{Error, Result};
use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyOptions {
    /// Number of vertex starts in addition to the centroid.
    pub starts: usize,
    pub max_iterations: usize,
    /// Tolerance on the normalized gradient norm.
    pub gradient_tolerance: f64,
    /// Offsets the evenly spaced vertex starts.
    pub seed: u64,
    /// Scales are kept above `(factor · longest edge)²`.
    pub min_scale_edge_factor: f64,
    /// Keep every evaluated `(center, value)` pair in the result.
    pub record_trace: bool,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            max_iterations: 200,
            gradient_tolerance: 1e-8,
            seed: 0,
            min_scale_edge_factor: 1.0,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyResult<T> {
    pub entropy: T,
    pub argmax: GaussianCenter<T>,
    pub starts_tried: usize,
    /// Whether the winning start met the gradient tolerance.
    pub converged: bool,
    pub best_gradient_norm: T,
    pub evaluations: usize,
    #[serde(skip)]
    pub trace: Vec<(GaussianCenter<T>, T)>,
}

/// Affine normalization of the search space.
#[derive(Debug, Clone, Copy)]
pub struct ScaleFrame<T> {
    pub origin: Vec3<T>,
    pub length: T,
    /// Lower bound on `t₀`.
    pub min_scale: T,
}

impl<T: Real> ScaleFrame<T> {
    fn to_center(&self, z: &[T]) -> GaussianCenter<T> {
        let m = z.len() - 1;
        let mut c = self.origin;
        let offs = [&mut c.x, &mut c.y, &mut c.z];
        for (k, o) in offs.into_iter().enumerate().take(m) {
            *o += self.length * z[k];
        }
        GaussianCenter { center: c, scale: self.length * self.length * z[m].exp() }
    }

    fn from_center(&self, g: &GaussianCenter<T>, m: usize) -> Vec<T> {
        let d = (g.center - self.origin) / self.length;
        let mut z: Vec<T> = [d.x, d.y, d.z].into_iter().take(m).collect();
        z.push((g.scale / (self.length * self.length)).ln());
        z
    }
}

struct StartOutcome<T> {
    value: T,
    center: GaussianCenter<T>,
    gradient_norm: T,
    converged: bool,
    evaluations: usize,
    trace: Vec<(GaussianCenter<T>, T)>,
}

/// Entropy of a closed discrete hypersurface.
pub fn entropy<T: Real>(surface: &DiscreteHypersurface<T>, opts: &EntropyOptions) -> Result<EntropyResult<T>> {
    let nodes = QuadratureNodes::from_surface(surface);
    let diameter = surface.diameter();
    let centroid = surface.centroid();
    let (_, longest) = surface.edge_length_range();
    let floor = T::lit(opts.min_scale_edge_factor) * longest;
    let frame = ScaleFrame { origin: centroid, length: diameter, min_scale: floor * floor };
    let verts = surface.vertices();
    let mut points = vec![centroid];
    let k = opts.starts.min(verts.len());
    for j in 0..k {
        let idx = (opts.seed as usize % verts.len() + j * verts.len() / k.max(1)) % verts.len();
        points.push(verts[idx]);
    }
    let scales = [diameter / T::lit(4.0), diameter / T::lit(2.0), diameter].map(|l| l * l);
    let starts: Vec<GaussianCenter<T>> = points
        .iter()
        .flat_map(|&p| scales.iter().map(move |&s| GaussianCenter { center: p, scale: s }))
        .collect();
    maximize_gaussian(&nodes, &frame, &starts, opts)
}

/// Maximizes the Gaussian functional of `nodes` from every start and returns
/// the best value seen over all evaluations (ties go to the earliest start).
pub fn maximize_gaussian<T: Real>(
    nodes: &QuadratureNodes<T>,
    frame: &ScaleFrame<T>,
    starts: &[GaussianCenter<T>],
    opts: &EntropyOptions,
) -> Result<EntropyResult<T>> {
    if starts.is_empty() {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    if !(frame.length > T::zero()) {
        return Err(Error::InvalidArgument("frame length must be positive".into()));
    }
    let outcomes: Vec<Result<StartOutcome<T>>> =
        starts.par_iter().map(|g| ascend(nodes, frame, g, opts)).collect();
    let mut best: Option<StartOutcome<T>> = None;
    let mut evaluations = 0;
    let mut trace = Vec::new();
    for o in outcomes {
        let mut o = o?;
        evaluations += o.evaluations;
        if opts.record_trace {
            trace.append(&mut o.trace);
        }
        if best.as_ref().map_or(true, |b| o.value > b.value) {
            best = Some(o);
        }
    }
    let best = best.expect("non-empty starts");
    Ok(EntropyResult {
        entropy: best.value,
        argmax: best.center,
        starts_tried: starts.len(),
        converged: best.converged,
        best_gradient_norm: best.gradient_norm,
        evaluations,
        trace,
    })
}

fn ascend<T: Real>(
    nodes: &QuadratureNodes<T>,
    frame: &ScaleFrame<T>,
    start: &GaussianCenter<T>,
    opts: &EntropyOptions,
) -> Result<StartOutcome<T>> {
    let m = nodes.dim() + 1;
    let dim = m + 1;
    let s_min = (frame.min_scale / (frame.length * frame.length)).ln();
    let tol = T::lit(opts.gradient_tolerance);
    let max_step = T::one();
    let armijo = T::lit(1e-4);
    let noise = T::epsilon() * T::from_count(nodes.points().len()).sqrt() * T::lit(4.0);

    let mut evaluations = 0;
    let mut trace = Vec::new();
    let mut eval = |z: &[T]| -> Result<(T, Vec<T>, GaussianCenter<T>)> {
        let g = frame.to_center(z);
        let (f, dx, dlog) = nodes.value_and_gradient(&g);
        evaluations += 1;
        let mut grad: Vec<T> = [dx.x, dx.y, dx.z].into_iter().take(m).map(|v| v * frame.length).collect();
        grad.push(dlog);
        if !f.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::OptimizerDiverged(format!("non-finite objective at center {:?}", g)));
        }
        if opts.record_trace {
            trace.push((g, f));
        }
        Ok((f, grad, g))
    };
    let projected = |z: &[T], g: &[T]| -> Vec<T> {
        let mut p = g.to_vec();
        if z[m] <= s_min && p[m] < T::zero() {
            p[m] = T::zero();
        }
        p
    };
    let norm = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>().sqrt();

    let mut z = frame.from_center(start, m);
    if z[m] < s_min {
        z[m] = s_min;
    }
    let (mut f, mut grad, mut center) = eval(&z)?;
    let mut best = (f, center, norm(&projected(&z, &grad)));
    let mut hinv = identity::<T>(dim);
    let mut first_update = true;
    let mut converged = false;

    for _ in 0..opts.max_iterations {
        let pg = projected(&z, &grad);
        let pg_norm = norm(&pg);
        if pg_norm < tol {
            converged = true;
            break;
        }
        let mut dir = mat_vec(&hinv, &pg);
        if z[m] <= s_min && dir[m] < T::zero() {
            dir[m] = T::zero();
        }
        if !(dot(&dir, &pg) > T::zero()) {
            hinv = identity(dim);
            first_update = true;
            dir = pg.clone();
        }
        let dn = norm(&dir);
        if dn > max_step {
            dir.iter_mut().for_each(|d| *d = *d * max_step / dn);
        }
        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..50 {
            let mut trial: Vec<T> = z.iter().zip(&dir).map(|(&a, &d)| a + alpha * d).collect();
            if trial[m] < s_min {
                trial[m] = s_min;
            }
            let (ft, gt, ct) = eval(&trial)?;
            if ft > best.0 {
                best = (ft, ct, norm(&projected(&trial, &gt)));
            }
            let step: Vec<T> = trial.iter().zip(&z).map(|(&a, &b)| a - b).collect();
            let flat = ft >= f - noise * f.abs() && norm(&projected(&trial, &gt)) < pg_norm;
            if ft >= f + armijo * dot(&pg, &step) || flat {
                accepted = Some((trial, ft, gt, ct, step));
                break;
            }
            alpha = alpha * T::lit(0.5);
        }
        let Some((trial, ft, gt, ct, step)) = accepted else {
            break;
        };
        // curvature pair for minimizing −F
        let y: Vec<T> = grad.iter().zip(&gt).map(|(&a, &b)| a - b).collect();
        let sy = dot(&step, &y);
        if sy > T::epsilon() * norm(&step) * norm(&y) {
            if first_update {
                let yy = dot(&y, &y);
                hinv = identity(dim);
                hinv.iter_mut().enumerate().for_each(|(i, row)| row[i] = sy / yy);
                first_update = false;
            }
            bfgs_update(&mut hinv, &step, &y, sy);
            if hinv.iter().flatten().any(|v| !v.is_finite()) {
                hinv = identity(dim);
                first_update = true;
            }
        }
        z = trial;
        f = ft;
        grad = gt;
        center = ct;
    }
    let _ = center;
    if !converged {
        converged = best.2 < tol;
    }
    Ok(StartOutcome { value: best.0, center: best.1, gradient_norm: best.2, converged, evaluations, trace })
}

fn identity<T: Real>(n: usize) -> Vec<Vec<T>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn mat_vec<T: Real>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Inverse-Hessian BFGS update `H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`.
fn bfgs_update<T: Real>(h: &mut [Vec<T>], s: &[T], y: &[T], sy: T) {
    let n = s.len();
    let rho = T::one() / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] = h[i][j] - rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::f_functional;
    use crate::geometry::shapes;
    use std::f64::consts::{E, PI};

    #[test]
    fn circle_entropy_and_argmax() {
        let r = 0.7;
        let c = shapes::circle_at(Vec3::planar(0.3, -1.2), r, 1024).unwrap();
        let res = entropy(&c, &EntropyOptions::default()).unwrap();
        assert!((res.entropy - (2.0 * PI / E).sqrt()).abs() < 2e-3);
        assert!((res.argmax.center - Vec3::planar(0.3, -1.2)).norm() < 1e-3);
        assert!((res.argmax.scale - r * r / 2.0).abs() < 1e-3 * r * r);
        assert_eq!(res.starts_tried, 27);
        assert!(res.converged);
    }

    #[test]
    fn entropy_dominates_every_trial() {
        let e = shapes::ellipsoid([1.5, 1.0, 0.8], 3).unwrap();
        let opts = EntropyOptions { record_trace: true, starts: 2, ..Default::default() };
        let res = entropy(&e, &opts).unwrap();
        assert!(!res.trace.is_empty());
        for (_, v) in &res.trace {
            assert!(res.entropy >= *v);
        }
        assert_eq!(f_functional(&e, &res.argmax).unwrap(), res.entropy);
        assert!(res.entropy >= 1.0 - 1e-6, "{res:?}");
    }

    #[test]
    fn bfgs_update_satisfies_secant() {
        let mut h = identity::<f64>(3);
        let s = [0.3, -0.1, 0.2];
        let y = [0.5, 0.1, 0.4];
        let sy = dot(&s, &y);
        bfgs_update(&mut h, &s, &y, sy);
        let hy = mat_vec(&h, &y);
        for i in 0..3 {
            assert!((hy[i] - s[i]).abs() < 1e-14);
        }
    }
}
