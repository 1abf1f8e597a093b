use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FlowState, Trajectory};
use crate::error::{Error, Result};
use crate::gaussian::{localized_f, CutoffSpec, GaussianCenter, QuadratureNodes, SpaceTimePoint};
use crate::geometry::{compute_curvature, DiscreteHypersurface};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingularityCriteria {
    /// Threshold on `max |A| · initial diameter`.
    pub curvature_diameter: f64,
    /// Threshold on `volume / initial volume`.
    pub volume_fraction: f64,
    /// Steps between checks inside the flow driver.
    pub check_every: usize,
}

impl Default for SingularityCriteria {
    fn default() -> Self {
        Self { curvature_diameter: 1e3, volume_fraction: 1e-9, check_every: 8 }
    }
}

impl SingularityCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(self.curvature_diameter > 0.0) || !(self.volume_fraction >= 0.0) {
            return Err(Error::InvalidArgument("singularity thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// Scale of the initial surface against which blow-up is measured.
#[derive(Debug, Clone, Copy)]
pub struct SingularityReference<T> {
    pub diameter: T,
    pub volume: T,
}

impl<T: Real> SingularityReference<T> {
    pub fn of(surface: &DiscreteHypersurface<T>) -> Self {
        Self { diameter: surface.diameter(), volume: surface.enclosed_volume() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularity<T> {
    Regular,
    NearSingular { location: Vec3<T> },
}

/// Flags states whose curvature or enclosed volume has blown up relative to
/// `reference`. The location is the area-weighted centroid of the vertices in
/// the top percentile of `|A|²`.
pub fn detect_singularity<T: Real>(
    state: &FlowState<T>,
    reference: &SingularityReference<T>,
    criteria: &SingularityCriteria,
) -> Result<Regularity<T>> {
    let s = &state.surface;
    let field = compute_curvature(s)?;
    let a_max = field.max_second_form_norm();
    let curvature_hit = a_max * reference.diameter > T::lit(criteria.curvature_diameter);
    let volume_hit = s.enclosed_volume() < T::lit(criteria.volume_fraction) * reference.volume;
    if !(curvature_hit || volume_hit) {
        return Ok(Regularity::Regular);
    }
    let mut order: Vec<usize> = (0..s.vertex_count()).collect();
    order.sort_by(|&a, &b| field.second_form_norm_sq[b].partial_cmp(&field.second_form_norm_sq[a]).unwrap_or(std::cmp::Ordering::Equal));
    let top = (s.vertex_count() / 100).max(1);
    let mut acc = Vec3::zero();
    let mut w = T::zero();
    for &i in &order[..top] {
        acc += s.vertices()[i] * field.vertex_area[i];
        w += field.vertex_area[i];
    }
    Ok(Regularity::NearSingular { location: acc / w })
}

/// `∫_{M_t} Φ_{(y,τ)}` at every snapshot.
pub fn huisken_series<T: Real>(traj: &Trajectory<T>, y: Vec3<T>, tau: T) -> Result<Vec<(T, T)>> {
    if let Some(s) = traj.snapshots().iter().find(|s| s.time >= tau) {
        return Err(Error::NonpositiveScale(format!("snapshot at t = {} is not before τ = {tau}", s.time)));
    }
    Ok(traj
        .snapshots()
        .par_iter()
        .map(|s| {
            let g = GaussianCenter { center: y, scale: tau - s.time };
            (s.time, QuadratureNodes::from_surface(&s.surface).evaluate(&g))
        })
        .collect())
}

/// Cutoff-weighted Huisken integral `∫_{M_t} Φ_{(x₀,t₀)} φ_{(x₀,t₀),ρ}` at
/// every snapshot.
pub fn localized_series<T: Real>(traj: &Trajectory<T>, focus: SpaceTimePoint<T>, radius: T) -> Result<Vec<(T, T)>> {
    let spec = CutoffSpec::new(focus, radius)?;
    traj.snapshots().par_iter().map(|s| Ok((s.time, localized_f(&s.surface, &focus, s.time, &spec)?))).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PinchingReport<T> {
    pub times: Vec<T>,
    /// `max |A|² / H²` per snapshot, both from the per-vertex quadric fit;
    /// meaningful only where `valid`.
    pub ratios: Vec<T>,
    /// False where some vertex has `H ≤ 0`.
    pub valid: Vec<bool>,
    pub min_mean_curvature: Vec<T>,
}

impl<T: Real> PinchingReport<T> {
    /// Largest ratio over valid snapshots.
    pub fn max_ratio(&self) -> Option<T> {
        self.ratios.iter().zip(&self.valid).filter(|(_, &v)| v).map(|(&r, _)| r).reduce(T::max)
    }

    pub fn initial_ratio(&self) -> Option<T> {
        self.valid.first().copied().filter(|&v| v).map(|_| self.ratios[0])
    }
}

pub fn pinching_report<T: Real>(traj: &Trajectory<T>) -> Result<PinchingReport<T>> {
    let rows: Vec<(T, T, bool, T)> = traj
        .snapshots()
        .par_iter()
        .map(|s| {
            let f = compute_curvature(&s.surface)?;
            let min_h = f.min_mean();
            let valid = min_h > T::zero() && f.fitted_mean_curvature.iter().all(|&h| h > T::zero());
            let ratio = if valid {
                f.second_form_norm_sq
                    .iter()
                    .zip(&f.fitted_mean_curvature)
                    .map(|(&a, &h)| a / (h * h))
                    .fold(T::zero(), T::max)
            } else {
                T::nan()
            };
            Ok((s.time, ratio, valid, min_h))
        })
        .collect::<Result<_>>()?;
    Ok(PinchingReport {
        times: rows.iter().map(|r| r.0).collect(),
        ratios: rows.iter().map(|r| r.1).collect(),
        valid: rows.iter().map(|r| r.2).collect(),
        min_mean_curvature: rows.iter().map(|r| r.3).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run_flow, FlowControls, Termination};
    use crate::geometry::{shapes, transform, RigidDilation};

    fn circle_at_time(t: f64) -> FlowState<f64> {
        let c = shapes::circle(1.0f64, 256).unwrap();
        let c = transform(&c, &RigidDilation::dilation((1.0 - 2.0 * t).sqrt())).unwrap();
        FlowState::new(c, t)
    }

    #[test]
    fn detection_on_analytic_circles() {
        let reference = SingularityReference { diameter: 2.0, volume: std::f64::consts::PI };
        let crit = SingularityCriteria::default();
        assert_eq!(detect_singularity(&circle_at_time(0.1), &reference, &crit).unwrap(), Regularity::Regular);
        match detect_singularity(&circle_at_time(0.5 - 1e-7), &reference, &crit).unwrap() {
            Regularity::NearSingular { location } => assert!(location.norm() < 1e-2),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn detection_on_sphere() {
        let s = shapes::icosphere(2.0f64, 2).unwrap();
        let reference = SingularityReference::of(&s);
        let small = transform(&s, &RigidDilation::dilation((1e-7f64).sqrt() / 2.0)).unwrap();
        let r = detect_singularity(&FlowState::new(small, 1.0 - 1e-7), &reference, &SingularityCriteria::default()).unwrap();
        assert!(matches!(r, Regularity::NearSingular { location } if location.norm() < 1e-3));
    }

    #[test]
    fn huisken_rejects_late_tau() {
        let c = shapes::circle(1.0f64, 64).unwrap();
        let traj = run_flow(&c, &FlowControls { t_end: 0.1, ..Default::default() }).unwrap();
        assert!(matches!(huisken_series(&traj, Vec3::zero(), 0.1), Err(Error::NonpositiveScale(_))));
        assert_eq!(huisken_series(&traj, Vec3::zero(), 0.5).unwrap().len(), traj.snapshots().len());
    }

    #[test]
    fn sphere_pinching_is_umbilic() {
        let s = shapes::icosphere(2.0f64, 3).unwrap();
        let traj = run_flow(&s, &FlowControls { t_end: 0.3, snapshot_every: 0.1, ..Default::default() }).unwrap();
        assert_eq!(traj.termination(), Termination::ReachedTime);
        let rep = pinching_report(&traj).unwrap();
        for (r, v) in rep.ratios.iter().zip(&rep.valid) {
            assert!(*v);
            assert!((r - 0.5).abs() < 5e-2, "{r}");
        }
    }

    #[test]
    fn invalid_snapshots_are_excluded() {
        let rep = PinchingReport { times: vec![0.0, 1.0], ratios: vec![0.7, f64::NAN], valid: vec![true, false], min_mean_curvature: vec![0.1, -0.1] };
        assert_eq!(rep.max_ratio(), Some(0.7));
    }
}
