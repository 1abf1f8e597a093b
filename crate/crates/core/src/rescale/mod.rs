//! Parabolic rescaling `M^λ_s = λ^{−1}(M_{λ²s + t₀} − x₀)` of flow
//! trajectories, Gaussian densities, tangent-flow extraction and
//! self-shrinker residuals.

mod shrinker;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::gaussian::{GaussianCenter, QuadratureNodes};
use crate::geometry::{hausdorff_distance, transform, DiscreteHypersurface, RigidDilation};
use crate::scalar::Real;
use crate::vector::Vec3;

pub use shrinker::{
    classify, shrinker_residual, shrinker_residual_with, Classification, FitErrors, ShrinkerReport,
    CLASSIFICATION_TOLERANCE,
};

/// The flow at time `t`: linear interpolation between the bracketing
/// snapshots when they share vertex correspondence, otherwise the nearest
/// snapshot.
pub fn surface_at<T: Real>(traj: &Trajectory<T>, t: T) -> Result<DiscreteHypersurface<T>> {
    let snaps = traj.snapshots();
    let (t_first, t_last) = (traj.first().time, traj.last().time);
    let slack = T::epsilon() * T::lit(8.0) * t_first.abs().max(t_last.abs()).max(T::one());
    if !(t >= t_first - slack && t <= t_last + slack) {
        return Err(Error::OutOfRange(format!("time {t} outside the trajectory range [{t_first}, {t_last}]")));
    }
    let k = snaps.partition_point(|s| s.time <= t);
    if k == 0 {
        return Ok(snaps[0].surface.clone());
    }
    if k == snaps.len() {
        return Ok(snaps[k - 1].surface.clone());
    }
    let (a, b) = (&snaps[k - 1], &snaps[k]);
    let u = (t - a.time) / (b.time - a.time);
    if a.epoch == b.epoch && a.surface.shares_connectivity(&b.surface) {
        if u == T::zero() {
            return Ok(a.surface.clone());
        }
        let verts =
            a.surface.vertices().iter().zip(b.surface.vertices()).map(|(&p, &q)| p + (q - p) * u).collect();
        return a.surface.with_vertices(verts);
    }
    Ok(if u <= T::lit(0.5) { a.surface.clone() } else { b.surface.clone() })
}

/// `λ^{−1}(M_{λ²s + t₀} − x₀)`.
pub fn parabolic_rescale<T: Real>(
    traj: &Trajectory<T>,
    center: Vec3<T>,
    t0: T,
    lambda: T,
    s: T,
) -> Result<DiscreteHypersurface<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::NonpositiveScale(format!("rescaling factor must be positive, got {lambda}")));
    }
    let surface = surface_at(traj, lambda * lambda * s + t0)?;
    let inv = T::one() / lambda;
    transform(&surface, &RigidDilation::new(crate::vector::Mat3::identity(), -center * inv, inv))
}

/// Limit of `∫_{M_t} Φ_{(x₀,t₀)}` as `t ↗ t₀`.
#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate<T> {
    pub value: T,
    /// `(t, ∫_{M_t} Φ_{(x₀,t₀)})`, increasing in `t`.
    pub samples: Vec<(T, T)>,
    pub extrapolation_error: T,
}

/// Samples `∫_{M_t} Φ_{(x₀,t₀)}` at `times` and extrapolates to `t = t₀`
/// with first-order Richardson extrapolation in `t₀ − t` over the last three
/// usable samples. Times at or after `t₀`, outside the trajectory, or not
/// increasing are skipped.
pub fn gaussian_density<T: Real>(
    traj: &Trajectory<T>,
    center: Vec3<T>,
    t0: T,
    times: &[T],
) -> Result<DensityEstimate<T>> {
    let mut usable: Vec<T> = Vec::with_capacity(times.len());
    for &t in times {
        let in_range = t >= traj.first().time && t <= traj.last().time && t < t0;
        if in_range && usable.last().map_or(true, |&p| t > p) {
            usable.push(t);
        }
    }
    if usable.len() < 3 {
        return Err(Error::InsufficientSamples(format!("{} usable sample times, need at least 3", usable.len())));
    }
    let samples: Vec<(T, T)> = usable
        .par_iter()
        .map(|&t| {
            let surface = surface_at(traj, t)?;
            let g = GaussianCenter { center, scale: t0 - t };
            Ok((t, QuadratureNodes::from_surface(&surface).evaluate(&g)))
        })
        .collect::<Result<_>>()?;
    let tail = &samples[samples.len() - 3..];
    let extrapolate = |(ta, fa): (T, T), (tb, fb): (T, T)| {
        let (ha, hb) = (t0 - ta, t0 - tb);
        (ha * fb - hb * fa) / (ha - hb)
    };
    let e1 = extrapolate(tail[0], tail[1]);
    let e2 = extrapolate(tail[1], tail[2]);
    Ok(DensityEstimate { value: e2, samples, extrapolation_error: (e2 - e1).abs() })
}

/// One rescaled time slice `M^λ_s`.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledSlice<T> {
    pub lambda: T,
    pub s: T,
    #[serde(skip)]
    pub surface: DiscreteHypersurface<T>,
}

/// Parabolic rescalings of a trajectory about `(x₀, t₀)` at decreasing
/// scales.
#[derive(Debug, Clone, Serialize)]
pub struct RescaleSequence<'a, T> {
    #[serde(skip)]
    pub base: &'a Trajectory<T>,
    pub center: Vec3<T>,
    pub singular_time: T,
    pub scales: Vec<T>,
    pub rescaled: Vec<RescaledSlice<T>>,
}

impl<T: Real> RescaleSequence<'_, T> {
    /// The slice at scale index `j` and time `s`, if it was produced.
    pub fn slice(&self, j: usize, s: T) -> Option<&DiscreteHypersurface<T>> {
        let lambda = *self.scales.get(j)?;
        self.rescaled.iter().find(|r| r.lambda == lambda && r.s == s).map(|r| &r.surface)
    }
}

/// Evidence that the rescalings settle on a self-similar limit.
#[derive(Debug, Clone, Serialize)]
pub struct TangentFlowReport<'a, T> {
    pub sequence: RescaleSequence<'a, T>,
    /// `d(M^j_{−1}, M^{j+1}_{−1})`.
    pub pairwise_hausdorff: Vec<T>,
    /// Shrinker residual of each `M^j_{−1}`.
    pub residuals: Vec<ShrinkerReport<T>>,
    /// `d(√2 · M^j_{−1}, M^j_{−2})`.
    pub self_similarity: Vec<T>,
}

/// Rescales the trajectory at `λ_j = 2^{−j} √(t₀ − t_mid)` for
/// `j < scale_count`, where `t_mid` is halfway between the first snapshot
/// and `t₀`, and checks convergence of `M^j_{−1}` and self-similarity
/// against `M^j_{−2}`.
pub fn tangent_flow_extract<T: Real>(
    traj: &Trajectory<T>,
    center: Vec3<T>,
    t0: T,
    scale_count: usize,
) -> Result<TangentFlowReport<'_, T>> {
    if scale_count < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 scales, got {scale_count}")));
    }
    let t_mid = (traj.first().time + t0) * T::lit(0.5);
    if !(t0 > t_mid) {
        return Err(Error::OutOfRange(format!("t₀ = {t0} does not follow the first snapshot")));
    }
    let base = (t0 - t_mid).sqrt();
    let scales: Vec<T> = (0..scale_count).map(|j| base * T::lit(0.5).powi(j as i32)).collect();
    let (minus_one, minus_two) = (-T::one(), -T::lit(2.0));
    let slices: Vec<(DiscreteHypersurface<T>, DiscreteHypersurface<T>)> = scales
        .par_iter()
        .map(|&l| Ok((parabolic_rescale(traj, center, t0, l, minus_one)?, parabolic_rescale(traj, center, t0, l, minus_two)?)))
        .collect::<Result<_>>()?;
    let pairwise_hausdorff =
        slices.windows(2).map(|w| hausdorff_distance(&w[0].0, &w[1].0)).collect::<Result<Vec<_>>>()?;
    let residuals = slices.par_iter().map(|(m1, _)| shrinker_residual(m1)).collect::<Result<Vec<_>>>()?;
    let grow = RigidDilation::dilation(T::lit(2.0).sqrt());
    let self_similarity = slices
        .par_iter()
        .map(|(m1, m2)| hausdorff_distance(&transform(m1, &grow)?, m2))
        .collect::<Result<Vec<_>>>()?;
    let rescaled = scales
        .iter()
        .zip(slices)
        .flat_map(|(&lambda, (m1, m2))| {
            [RescaledSlice { lambda, s: minus_one, surface: m1 }, RescaledSlice { lambda, s: minus_two, surface: m2 }]
        })
        .collect();
    Ok(TangentFlowReport {
        sequence: RescaleSequence { base: traj, center, singular_time: t0, scales, rescaled },
        pairwise_hausdorff,
        residuals,
        self_similarity,
    })
}
