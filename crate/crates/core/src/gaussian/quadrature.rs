use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;
use crate::vector::Vec3;

use super::{normalization, GaussianCenter};

/// Weighted point set representing an `n`-dimensional measure. Curves use a
/// two-point Gauss rule per segment; meshes the mid-edge rule (one node per
/// edge carrying a third of each adjacent triangle's area).
#[derive(Debug, Clone)]
pub struct QuadratureNodes<T> {
    dim: usize,
    points: Vec<Vec3<T>>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureNodes<T> {
    pub fn new(dim: usize, points: Vec<Vec3<T>>, weights: Vec<T>) -> Self {
        assert_eq!(points.len(), weights.len());
        Self { dim, points, weights }
    }

    pub fn from_surface(surface: &DiscreteHypersurface<T>) -> Self {
        let v = surface.vertices();
        if surface.dim() == 1 {
            let n = v.len();
            let offset = T::lit(0.5) / T::lit(3.0).sqrt();
            let half = T::lit(0.5);
            let mut points = Vec::with_capacity(2 * n);
            let mut weights = Vec::with_capacity(2 * n);
            for i in 0..n {
                let (a, b) = (v[i], v[(i + 1) % n]);
                let w = a.distance(b) * half;
                for u in [half - offset, half + offset] {
                    points.push(a + (b - a) * u);
                    weights.push(w);
                }
            }
            Self { dim: 1, points, weights }
        } else {
            let tris = surface.triangles();
            let mut edge_weight: std::collections::BTreeMap<(usize, usize), T> = Default::default();
            let third = T::one() / T::lit(3.0);
            for t in tris {
                let x = t.map(|k| v[k]);
                let area = (x[1] - x[0]).cross(x[2] - x[0]).norm() * T::lit(0.5);
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    *edge_weight.entry((a.min(b), a.max(b))).or_insert_with(T::zero) += area * third;
                }
            }
            let mut points = Vec::with_capacity(edge_weight.len());
            let mut weights = Vec::with_capacity(edge_weight.len());
            for ((a, b), w) in edge_weight {
                points.push((v[a] + v[b]) * T::lit(0.5));
                weights.push(w);
            }
            Self { dim: 2, points, weights }
        }
    }

    /// Area measure of the graph `z = u(x, y)` over the square
    /// `[−half_width, half_width]²`, by a tensor Gauss–Legendre rule of
    /// `order` points on each of `panels × panels` cells. `height` returns
    /// `(u, ∂u/∂x, ∂u/∂y)`.
    pub fn graph<F>(height: F, half_width: T, panels: usize, order: usize) -> Self
    where
        F: Fn(T, T) -> (T, T, T),
    {
        let (gx, gw) = gauss_legendre::<T>(order);
        let h = T::lit(2.0) * half_width / T::from_count(panels);
        let half = h * T::lit(0.5);
        let mut axis = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = -half_width + h * (T::from_count(p) + T::lit(0.5));
            axis.extend(gx.iter().zip(&gw).map(|(&x, &w)| (mid + half * x, half * w)));
        }
        let mut points = Vec::with_capacity(axis.len() * axis.len());
        let mut weights = Vec::with_capacity(axis.len() * axis.len());
        for &(x, wx) in &axis {
            for &(y, wy) in &axis {
                let (u, ux, uy) = height(x, y);
                points.push(Vec3::new(x, y, u));
                weights.push(wx * wy * (T::one() + ux * ux + uy * uy).sqrt());
            }
        }
        Self { dim: 2, points, weights }
    }

    /// Intrinsic dimension `n` of the measure.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn evaluate(&self, g: &GaussianCenter<T>) -> T {
        let inv = T::one() / (T::lit(4.0) * g.scale);
        let s: T = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * (-(*p - g.center).norm_sq() * inv).exp())
            .sum();
        normalization(g.scale, self.dim) * s
    }

    /// `(F, ∂F/∂x₀, ∂F/∂ln t₀)`.
    pub fn value_and_gradient(&self, g: &GaussianCenter<T>) -> (T, Vec3<T>, T) {
        let t = g.scale;
        let inv = T::one() / (T::lit(4.0) * t);
        let mut s = T::zero();
        let mut sx = Vec3::zero();
        let mut sr = T::zero();
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let d = *p - g.center;
            let r2 = d.norm_sq() * inv;
            let e = w * (-r2).exp();
            s += e;
            sx += d * e;
            sr += e * r2;
        }
        let c = normalization(t, self.dim);
        let value = c * s;
        let dx = sx * (c / (T::lit(2.0) * t));
        let dlog = c * (sr - s * T::from_count(self.dim) / T::lit(2.0));
        (value, dx, dlog)
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); order];
    let mut weights = vec![T::zero(); order];
    let nf = T::from_count(order);
    for i in 0..order.div_ceil(2) {
        let mut x = (T::PI() * (T::from_count(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), x);
            for k in 2..=order {
                let kf = T::from_count(k);
                let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 0 { T::one() } else if order == 1 { x } else { p1 };
            let pm = if order == 1 { T::one() } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - T::one());
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}
