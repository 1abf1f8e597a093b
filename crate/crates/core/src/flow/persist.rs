//! Trajectory directories: `manifest.toml` plus one geometry file per
//! snapshot.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FlowControls, FlowState, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::io::{native_extension, read_surface, write_surface};
use crate::scalar::Real;
use crate::vector::Vec3;

pub const MANIFEST_NAME: &str = "manifest.toml";
const FORMAT: &str = "entroflow-trajectory";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: String,
    version: u32,
    dimension: usize,
    termination: Termination,
    max_dt: f64,
    singular_time: Option<f64>,
    singular_location: Option<[f64; 3]>,
    controls: FlowControls,
    snapshots: Vec<SnapshotEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotEntry {
    file: String,
    time: f64,
    step_count: usize,
    epoch: usize,
}

pub fn save_trajectory<T: Real>(traj: &Trajectory<T>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let dim = traj.first().surface.dim();
    let ext = native_extension(dim);
    let mut snapshots = Vec::with_capacity(traj.snapshots().len());
    for (k, s) in traj.snapshots().iter().enumerate() {
        let file = format!("snapshot_{k:05}.{ext}");
        write_surface(&s.surface, &dir.join(&file))?;
        snapshots.push(SnapshotEntry { file, time: s.time.to_f64_lossy(), step_count: s.step_count, epoch: s.epoch });
    }
    let manifest = Manifest {
        format: FORMAT.into(),
        version: 1,
        dimension: dim,
        termination: traj.termination(),
        max_dt: traj.max_dt().to_f64_lossy(),
        singular_time: traj.singular_time().map(|t| t.to_f64_lossy()),
        singular_location: traj.singular_location().map(|p| p.to_f64()),
        controls: traj.controls().clone(),
        snapshots,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_NAME), text)?;
    Ok(())
}

pub fn load_trajectory<T: Real>(dir: &Path) -> Result<Trajectory<T>> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let m: Manifest = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if m.format != FORMAT {
        return Err(Error::Parse(format!("unexpected manifest format '{}'", m.format)));
    }
    let mut snapshots = Vec::with_capacity(m.snapshots.len());
    for e in &m.snapshots {
        let surface = read_surface::<T>(&dir.join(&e.file))?;
        if surface.dim() != m.dimension {
            return Err(Error::DimensionMismatch(format!("snapshot {} has the wrong dimension", e.file)));
        }
        snapshots.push(FlowState { surface, time: T::lit(e.time), step_count: e.step_count, epoch: e.epoch });
    }
    Trajectory::from_parts(
        snapshots,
        m.controls,
        m.termination,
        m.singular_time.map(T::lit),
        m.singular_location.map(Vec3::from_f64),
        T::lit(m.max_dt),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::run_flow;
    use crate::geometry::shapes;

    #[test]
    fn round_trip() {
        let c = shapes::icosphere(1.0f64, 1).unwrap();
        let traj = run_flow(&c, &FlowControls { t_end: 0.05, snapshot_every: 0.02, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_trajectory(&traj, dir.path()).unwrap();
        let back: Trajectory<f64> = load_trajectory(dir.path()).unwrap();
        assert_eq!(back.times(), traj.times());
        assert_eq!(back.termination(), traj.termination());
        for (a, b) in back.snapshots().iter().zip(traj.snapshots()) {
            assert_eq!(a.surface.vertices(), b.surface.vertices());
            assert_eq!(a.epoch, b.epoch);
        }
        let first = std::fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap();
        save_trajectory(&back, dir.path()).unwrap();
        assert_eq!(first, std::fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap());
    }
}
