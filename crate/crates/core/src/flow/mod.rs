//! Mean curvature flow of discrete hypersurfaces: single steps, a driver with
//! adaptive time steps and remeshing, and monitors evaluated along the
//! resulting trajectory.

mod monitor;
mod persist;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cotan_system, mean_curvature_field, remesh, DiscreteHypersurface};
use crate::linalg::{conjugate_gradient, CsrMatrix};
use crate::scalar::Real;
use crate::vector::Vec3;

pub use monitor::{
    detect_singularity, huisken_series, localized_series, pinching_report, PinchingReport, Regularity,
    SingularityCriteria, SingularityReference,
};
pub use persist::{load_trajectory, save_trajectory, MANIFEST_NAME};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Explicit,
    #[default]
    SemiImplicit,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Scheme::Explicit),
            "semi-implicit" => Ok(Scheme::SemiImplicit),
            _ => Err(Error::InvalidArgument(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowState<T> {
    pub surface: DiscreteHypersurface<T>,
    pub time: T,
    pub step_count: usize,
    /// Incremented whenever remeshing changes the connectivity; snapshots
    /// sharing an epoch have corresponding vertices.
    pub epoch: usize,
}

impl<T: Real> FlowState<T> {
    pub fn new(surface: DiscreteHypersurface<T>, time: T) -> Self {
        Self { surface, time, step_count: 0, epoch: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ReachedTime,
    SingularityDetected,
    StepFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowControls {
    pub t_end: f64,
    pub cfl: f64,
    /// Remesh every this many steps; 0 disables remeshing.
    pub remesh_every: usize,
    /// Snapshot cadence in flow time.
    pub snapshot_every: f64,
    /// Also snapshot once the measure has dropped below this fraction of the
    /// last snapshot's measure; 0 disables the trigger.
    pub snapshot_area_ratio: f64,
    pub scheme: Scheme,
    pub singularity: SingularityCriteria,
    pub max_steps: usize,
}

impl Default for FlowControls {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            cfl: 0.5,
            remesh_every: 50,
            snapshot_every: 0.01,
            snapshot_area_ratio: 0.98,
            scheme: Scheme::SemiImplicit,
            singularity: SingularityCriteria::default(),
            max_steps: 10_000_000,
        }
    }
}

impl FlowControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidArgument(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.snapshot_every > 0.0) {
            return Err(Error::InvalidArgument("snapshot_every must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.snapshot_area_ratio) {
            return Err(Error::InvalidArgument("snapshot_area_ratio must lie in [0, 1)".into()));
        }
        self.singularity.validate()
    }
}

/// Time-ordered snapshots of a flow run.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    snapshots: Vec<FlowState<T>>,
    controls: FlowControls,
    termination: Termination,
    singular_time: Option<T>,
    singular_location: Option<Vec3<T>>,
    max_dt: T,
}

impl<T: Real> Trajectory<T> {
    pub fn from_parts(
        snapshots: Vec<FlowState<T>>,
        controls: FlowControls,
        termination: Termination,
        singular_time: Option<T>,
        singular_location: Option<Vec3<T>>,
        max_dt: T,
    ) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InvalidArgument("trajectory needs at least one snapshot".into()));
        }
        if snapshots.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::InvalidArgument("snapshot times must be strictly increasing".into()));
        }
        Ok(Self { snapshots, controls, termination, singular_time, singular_location, max_dt })
    }

    pub fn snapshots(&self) -> &[FlowState<T>] {
        &self.snapshots
    }

    pub fn first(&self) -> &FlowState<T> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &FlowState<T> {
        self.snapshots.last().expect("non-empty trajectory")
    }

    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn controls(&self) -> &FlowControls {
        &self.controls
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Extrapolated first singular time, if a singularity was detected.
    pub fn singular_time(&self) -> Option<T> {
        self.singular_time
    }

    pub fn singular_location(&self) -> Option<Vec3<T>> {
        self.singular_location
    }

    /// Largest time step taken.
    pub fn max_dt(&self) -> T {
        self.max_dt
    }
}

/// A run that stopped on an error, with everything recorded up to it.
#[derive(Debug, Clone)]
pub struct FlowAbort<T> {
    pub error: Error,
    pub partial: Box<Trajectory<T>>,
}

impl<T> From<FlowAbort<T>> for Error {
    fn from(a: FlowAbort<T>) -> Self {
        a.error
    }
}

/// One time step of length `dt`.
pub fn step<T: Real>(state: &FlowState<T>, dt: T, scheme: Scheme) -> Result<FlowState<T>> {
    if !(dt >= T::zero()) {
        return Err(Error::InvalidArgument(format!("time step must be non-negative, got {dt}")));
    }
    if dt == T::zero() {
        return Ok(state.clone());
    }
    let surface = &state.surface;
    let positions = match scheme {
        Scheme::Explicit => {
            let field = mean_curvature_field(surface)?;
            surface
                .vertices()
                .iter()
                .zip(field.mean_curvature.iter().zip(&field.normal))
                .map(|(&x, (&h, &nu))| x - nu * (h * dt))
                .collect()
        }
        Scheme::SemiImplicit => semi_implicit_positions(surface, dt)?,
    };
    let surface = surface.with_vertices(positions)?;
    Ok(FlowState { surface, time: state.time + dt, step_count: state.step_count + 1, epoch: state.epoch })
}

/// Solves `(M + dt K) X⁺ = M X` coordinate-wise.
fn semi_implicit_positions<T: Real>(surface: &DiscreteHypersurface<T>, dt: T) -> Result<Vec<Vec3<T>>> {
    let (mass, weights) = cotan_system(surface)?;
    let nv = mass.len();
    let mut triplets = Vec::with_capacity(nv + 4 * weights.len());
    for (i, &m) in mass.iter().enumerate() {
        triplets.push((i, i, m));
    }
    for &(i, j, w) in &weights {
        let a = dt * w;
        triplets.push((i, i, a));
        triplets.push((j, j, a));
        triplets.push((i, j, -a));
        triplets.push((j, i, -a));
    }
    let a = CsrMatrix::from_triplets(nv, triplets);
    let p = surface.vertices();
    let coords = if surface.dim() == 1 { 2 } else { 3 };
    let mut out = p.to_vec();
    let tol = T::epsilon().sqrt() * T::epsilon().powf(T::lit(0.25));
    for c in 0..coords {
        let b: Vec<T> = (0..nv).map(|i| mass[i] * p[i][c]).collect();
        let mut x: Vec<T> = p.iter().map(|v| v[c]).collect();
        conjugate_gradient(&a, &b, &mut x, tol, 10 * nv + 100)?;
        for (o, v) in out.iter_mut().zip(x) {
            match c {
                0 => o.x = v,
                1 => o.y = v,
                _ => o.z = v,
            }
        }
    }
    Ok(out)
}

/// Stable step size `cfl · h_min² / (2(n + 1))`.
pub fn cfl_step<T: Real>(surface: &DiscreteHypersurface<T>, cfl: T) -> T {
    let (h_min, _) = surface.edge_length_range();
    cfl * h_min * h_min / (T::lit(2.0) * T::from_count(surface.dim() + 1))
}

const EXTRAPOLATION_WINDOW: usize = 32;

/// Runs the flow from `initial` at time 0.
pub fn run_flow<T: Real>(
    initial: &DiscreteHypersurface<T>,
    controls: &FlowControls,
) -> std::result::Result<Trajectory<T>, FlowAbort<T>> {
    let state = FlowState::new(initial.clone(), T::zero());
    let empty = |error: Error| FlowAbort {
        error,
        partial: Box::new(Trajectory {
            snapshots: vec![state.clone()],
            controls: controls.clone(),
            termination: Termination::ReachedTime,
            singular_time: None,
            singular_location: None,
            max_dt: T::zero(),
        }),
    };
    controls.validate().map_err(empty)?;
    let mut driver = Driver::new(state.clone(), controls);
    match driver.run() {
        Ok(()) => Ok(driver.finish()),
        Err(error) => Err(FlowAbort { error, partial: Box::new(driver.finish()) }),
    }
}

struct Driver<'a, T> {
    controls: &'a FlowControls,
    state: FlowState<T>,
    snapshots: Vec<FlowState<T>>,
    reference: SingularityReference<T>,
    initial_mean_edge: T,
    initial_measure: T,
    history: Vec<(T, T)>,
    termination: Termination,
    singular_time: Option<T>,
    singular_location: Option<Vec3<T>>,
    max_dt: T,
}

impl<'a, T: Real> Driver<'a, T> {
    fn new(state: FlowState<T>, controls: &'a FlowControls) -> Self {
        let s = &state.surface;
        Self {
            controls,
            reference: SingularityReference::of(s),
            initial_mean_edge: s.mean_edge_length(),
            initial_measure: s.total_measure(),
            history: Vec::new(),
            snapshots: vec![state.clone()],
            state,
            termination: Termination::ReachedTime,
            singular_time: None,
            singular_location: None,
            max_dt: T::zero(),
        }
    }

    fn run(&mut self) -> Result<()> {
        let c = self.controls;
        let t_end = T::lit(c.t_end);
        let cadence = T::lit(c.snapshot_every);
        let floor = T::lit(1e-14) * self.reference.diameter * self.reference.diameter;
        let n = self.state.surface.dim();
        let mut next_snapshot = cadence;
        let mut last_snapshot_measure = self.initial_measure;
        self.history.push((self.state.time, measure_power(self.initial_measure, n)));

        while self.state.time < t_end && self.state.step_count < c.max_steps {
            let dt_cfl = cfl_step(&self.state.surface, T::lit(c.cfl));
            if dt_cfl < floor {
                self.termination = Termination::StepFloor;
                break;
            }
            let target = next_snapshot.min(t_end);
            let on_cadence = self.state.time + dt_cfl >= target;
            let dt = if on_cadence { target - self.state.time } else { dt_cfl };
            let mut next = step(&self.state, dt, c.scheme)?;
            if on_cadence {
                next.time = target;
            }
            self.max_dt = self.max_dt.max(dt);
            if c.remesh_every > 0 && next.step_count % c.remesh_every == 0 {
                next = self.remeshed(next)?;
            }
            self.state = next;
            let measure = self.state.surface.total_measure();
            self.history.push((self.state.time, measure_power(measure, n)));
            if self.history.len() > EXTRAPOLATION_WINDOW {
                self.history.remove(0);
            }

            let check = c.singularity.check_every.max(1);
            if self.state.step_count % check == 0 || on_cadence {
                if let Regularity::NearSingular { location } =
                    detect_singularity(&self.state, &self.reference, &c.singularity)?
                {
                    self.termination = Termination::SingularityDetected;
                    self.singular_location = Some(location);
                    self.singular_time = Some(extrapolate_extinction(&self.history).unwrap_or(self.state.time));
                    break;
                }
            }
            let ratio_hit = c.snapshot_area_ratio > 0.0 && measure <= T::lit(c.snapshot_area_ratio) * last_snapshot_measure;
            if on_cadence || ratio_hit {
                self.snapshots.push(self.state.clone());
                last_snapshot_measure = measure;
                while next_snapshot <= self.state.time {
                    next_snapshot += cadence;
                }
            }
        }
        Ok(())
    }

    fn remeshed(&self, state: FlowState<T>) -> Result<FlowState<T>> {
        let n = state.surface.dim();
        let ratio = state.surface.total_measure() / self.initial_measure;
        let target = self.initial_mean_edge * ratio.powf(T::one() / T::from_count(n));
        let surface = remesh(&state.surface, target)?;
        let epoch = if surface.shares_connectivity(&state.surface) { state.epoch } else { state.epoch + 1 };
        Ok(FlowState { surface, epoch, ..state })
    }

    fn finish(mut self) -> Trajectory<T> {
        if self.snapshots.last().map(|s| s.time) != Some(self.state.time) {
            self.snapshots.push(self.state.clone());
        }
        Trajectory {
            snapshots: self.snapshots,
            controls: self.controls.clone(),
            termination: self.termination,
            singular_time: self.singular_time,
            singular_location: self.singular_location,
            max_dt: self.max_dt,
        }
    }
}

/// `A^{2/n}`, which is affine in time for shrinking spheres.
fn measure_power<T: Real>(measure: T, n: usize) -> T {
    measure.powf(T::lit(2.0) / T::from_count(n))
}

/// Zero of the least-squares line through `(t, A^{2/n})` samples.
fn extrapolate_extinction<T: Real>(history: &[(T, T)]) -> Option<T> {
    if history.len() < 2 {
        return None;
    }
    let k = T::from_count(history.len());
    let mt = history.iter().map(|p| p.0).sum::<T>() / k;
    let my = history.iter().map(|p| p.1).sum::<T>() / k;
    let sxy: T = history.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: T = history.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    if !(sxx > T::zero()) {
        return None;
    }
    let slope = sxy / sxx;
    if !(slope < T::zero()) {
        return None;
    }
    Some(mt - my / slope)
}
