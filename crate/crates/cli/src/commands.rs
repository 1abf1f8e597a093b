use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use entroflow::flow::{load_trajectory, run_flow, save_trajectory, FlowControls, Scheme, Termination};
use entroflow::gaussian::{entropy as lambda, stone_entropy, EntropyOptions, EntropyResult};
use entroflow::geometry::io::{read_surface, write_surface};
use entroflow::geometry::{compute_curvature, shapes};
use entroflow::rescale::{gaussian_density, shrinker_residual, tangent_flow_extract, Classification};
use entroflow::{Point, Run, Surface};

use crate::config::{parse_point, pick, require, RunConfig};
use crate::report::{csv, emit, significant, to_json, write_file};
use crate::{EntropyArgs, Failure, FlowArgs, MakeArgs, PointArgs, Shape, ShrinkerArgs, StoneArgs};

fn load_surface(path: &Path) -> Result<Surface, Failure> {
    if !path.exists() {
        return Err(Failure::io(format!("input {} does not exist", path.display())));
    }
    Ok(read_surface(path)?)
}

fn load_run(path: &Path) -> Result<Run, Failure> {
    if !path.is_dir() {
        return Err(Failure::io(format!("trajectory directory {} does not exist", path.display())));
    }
    Ok(load_trajectory(path)?)
}

pub fn make(a: &MakeArgs, cfg: &RunConfig) -> Result<u8, Failure> {
    let out = require(pick(a.out.clone(), &cfg.out), "out")?;
    let radius = a.radius.unwrap_or(1.0);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Failure::usage(format!("radius must be positive, got {radius}")));
    }
    let subdiv = a.subdiv.unwrap_or(3);
    if matches!(a.shape, Shape::Sphere | Shape::Ellipsoid) && subdiv > 6 {
        return Err(Failure::usage(format!("subdivision level must lie in 0..=6, got {subdiv}")));
    }
    let surface = match a.shape {
        Shape::Circle => {
            let segments = a.segments.unwrap_or(256);
            if segments < 3 {
                return Err(Failure::usage("a polygon needs at least 3 segments"));
            }
            shapes::circle(radius, segments)?
        }
        Shape::Sphere => shapes::icosphere(radius, subdiv)?,
        Shape::Ellipsoid => {
            let axes = a.axes.clone().unwrap_or_else(|| vec![2.0, 1.0, 1.0]);
            let [x, y, z] = axes[..] else {
                return Err(Failure::usage(format!("--axes needs 3 values, got {}", axes.len())));
            };
            if [x, y, z].iter().any(|v| !(*v > 0.0)) {
                return Err(Failure::usage("axes must be positive"));
            }
            shapes::ellipsoid([x, y, z], subdiv)?
        }
        Shape::Polygon | Shape::Obj => {
            let input = require(pick(a.input.clone(), &cfg.input), "input")?;
            let s = load_surface(&input)?;
            let want = if matches!(a.shape, Shape::Obj) { 2 } else { 1 };
            if s.dim() != want {
                return Err(Failure::usage(format!("{} is not a {}", input.display(), if want == 2 { "mesh" } else { "polygon" })));
            }
            s
        }
    };
    write_surface(&surface, &out)?;
    println!("vertices {}", surface.vertex_count());
    println!("elements {}", surface.element_count());
    println!("measure {}", crate::report::float(surface.total_measure()));
    println!("volume {}", crate::report::float(surface.enclosed_volume()));
    Ok(0)
}

fn flow_controls(a: &FlowArgs, cfg: &RunConfig) -> Result<FlowControls, Failure> {
    let mut c = FlowControls::default();
    if let Some(s) = pick(a.scheme.clone(), &cfg.scheme) {
        c.scheme = s.parse::<Scheme>().map_err(|e| Failure::usage(e.to_string()))?;
    }
    if let Some(v) = pick(a.cfl, &cfg.cfl) {
        c.cfl = v;
    }
    if let Some(v) = pick(a.t_end, &cfg.t_end) {
        c.t_end = v;
    }
    if let Some(v) = pick(a.snapshot_every, &cfg.snapshot_every) {
        c.snapshot_every = v;
    }
    if let Some(v) = pick(a.remesh_every, &cfg.remesh_every) {
        c.remesh_every = v;
    }
    if let Some(v) = cfg.snapshot_area_ratio {
        c.snapshot_area_ratio = v;
    }
    if let Some(v) = cfg.max_steps {
        c.max_steps = v;
    }
    if let Some(v) = cfg.curvature_diameter {
        c.singularity.curvature_diameter = v;
    }
    if let Some(v) = cfg.volume_fraction {
        c.singularity.volume_fraction = v;
    }
    c.validate()?;
    Ok(c)
}

#[derive(Serialize)]
struct FlowSummary {
    termination: Termination,
    error: Option<String>,
    singular_time: Option<f64>,
    singular_location: Option<Point>,
    final_time: f64,
    final_area: f64,
    steps: usize,
    snapshots: usize,
    max_dt: f64,
    controls: FlowControls,
}

pub fn flow(a: &FlowArgs, cfg: &RunConfig) -> Result<u8, Failure> {
    let input = require(pick(a.input.clone(), &cfg.input), "input")?;
    let out = require(pick(a.out.clone(), &cfg.out), "out")?;
    let controls = flow_controls(a, cfg)?;
    let initial = load_surface(&input)?;
    let clock = Instant::now();
    let (traj, error) = match run_flow(&initial, &controls) {
        Ok(t) => (t, None),
        Err(abort) => (*abort.partial, Some(abort.error)),
    };
    let elapsed = clock.elapsed();
    save_trajectory(&traj, &out)?;
    let last = traj.last();
    let summary = FlowSummary {
        termination: traj.termination(),
        error: error.as_ref().map(|e| e.to_string()),
        singular_time: traj.singular_time(),
        singular_location: traj.singular_location(),
        final_time: last.time,
        final_area: last.surface.total_measure(),
        steps: last.step_count,
        snapshots: traj.snapshots().len(),
        max_dt: traj.max_dt(),
        controls,
    };
    write_file(&out.join("summary.json"), &to_json(&summary)?)?;
    let rows: Vec<[f64; 8]> = traj
        .snapshots()
        .par_iter()
        .map(|s| {
            let (max_h, min_h) = match compute_curvature(&s.surface) {
                Ok(f) => (f.max_abs_mean(), f.min_mean()),
                Err(_) => (f64::NAN, f64::NAN),
            };
            [
                s.time,
                s.step_count as f64,
                s.epoch as f64,
                s.surface.vertex_count() as f64,
                s.surface.total_measure(),
                s.surface.enclosed_volume(),
                max_h,
                min_h,
            ]
        })
        .collect();
    let header = ["time", "step", "epoch", "vertices", "area", "volume", "max_h", "min_h"];
    write_file(&out.join("series.csv"), &csv(&header, &rows))?;
    write_file(&out.join("run.log"), &format!("wall_seconds {}\n", elapsed.as_secs_f64()))?;
    println!("termination {:?}", traj.termination());
    if let Some(t) = traj.singular_time() {
        println!("singular_time {}", crate::report::float(t));
    }
    match error {
        Some(e) => Err(Failure { code: crate::EXIT_NUMERIC, message: format!("flow aborted, partial trajectory kept: {e}") }),
        None => Ok(0),
    }
}

#[derive(Serialize)]
struct EntropyReport {
    input: String,
    vertices: usize,
    diameter: f64,
    options: EntropyOptions,
    result: EntropyResult<f64>,
}

pub fn entropy(a: &EntropyArgs, cfg: &RunConfig) -> Result<u8, Failure> {
    let input = require(pick(a.input.clone(), &cfg.input), "input")?;
    let surface = load_surface(&input)?;
    let mut opts = EntropyOptions::default();
    if let Some(v) = pick(a.starts, &cfg.starts) {
        opts.starts = v;
    }
    if let Some(v) = pick(a.seed, &cfg.seed) {
        opts.seed = v;
    }
    if let Some(v) = cfg.max_iterations {
        opts.max_iterations = v;
    }
    if let Some(v) = cfg.gradient_tolerance {
        opts.gradient_tolerance = v;
    }
    let result = lambda(&surface, &opts)?;
    let report = EntropyReport {
        input: file_label(&input),
        vertices: surface.vertex_count(),
        diameter: surface.diameter(),
        options: opts,
        result,
    };
    emit(pick(a.out.clone(), &cfg.out).as_deref(), &to_json(&report)?)?;
    Ok(0)
}

fn file_label(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Space-time point from flags, config, or the trajectory's own estimate.
fn space_time(a: &PointArgs, cfg: &RunConfig, traj: &Run) -> Result<(Point, f64), Failure> {
    let center = match pick(a.center.clone(), &cfg.center) {
        Some(c) => Point::from_f64(parse_point(&c)?),
        None => traj
            .singular_location()
            .ok_or_else(|| Failure::usage("no --center given and the trajectory has no singular point"))?,
    };
    let time = match pick(a.time, &cfg.time) {
        Some(t) => t,
        None => traj
            .singular_time()
            .ok_or_else(|| Failure::usage("no --time given and the trajectory has no singular time"))?,
    };
    Ok((center, time))
}

#[derive(Serialize)]
struct DensityReport {
    center: Point,
    time: f64,
    value: f64,
    extrapolation_error: f64,
    samples: Vec<(f64, f64)>,
}

pub fn density(a: &PointArgs, cfg: &RunConfig) -> Result<u8, Failure> {
    let input = require(pick(a.input.clone(), &cfg.input), "input")?;
    let traj = load_run(&input)?;
    let (center, t0) = space_time(a, cfg, &traj)?;
    let times = match pick(a.times.clone(), &cfg.times) {
        Some(t) => t,
        None => {
            let span = t0 - traj.first().time;
            (1..=12).map(|k| t0 - span * 0.5f64.powi(k)).collect()
        }
    };
    let mut times = times;
    times.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let d = gaussian_density(&traj, center, t0, &times)?;
    if let Some(path) = pick(a.csv.clone(), &cfg.csv) {
        let rows: Vec<[f64; 2]> = d.samples.iter().map(|&(t, f)| [t, f]).collect();
        write_file(&path, &csv(&["time", "integral"], &rows))?;
    }
    let report = DensityReport {
        center,
        time: t0,
        value: d.value,
        extrapolation_error: d.extrapolation_error,
        samples: d.samples,
    };
    emit(pick(a.out.clone(), &cfg.out).as_deref(), &to_json(&report)?)?;
    Ok(0)
}

pub fn rescale(a: &PointArgs, cfg: &RunConfig) -> Result<u8, Failure> {
    let input = require(pick(a.input.clone(), &cfg.input), "input")?;
    let traj = load_run(&input)?;
    let (center, t0) = space_time(a, cfg, &traj)?;
    let scales = pick(a.scales, &cfg.scales).unwrap_or(4);
    let rep = tangent_flow_extract(&traj, center, t0, scales)?;
    if let Some(path) = pick(a.csv.clone(), &cfg.csv) {
        let rows: Vec<[f64; 7]> = (0..scales)
            .map(|j| {
                let r = &rep.residuals[j];
                let radius = match r.classification {
                    Classification::Sphere { radius, .. } | Classification::Cylinder { radius, .. } => radius,
                    _ => f64::NAN,
                };
                [
                    j as f64,
                    rep.sequence.scales[j],
                    rep.pairwise_hausdorff.get(j).copied().unwrap_or(f64::NAN),
                    r.l2_residual,
                    r.linf_residual,
                    rep.self_similarity[j],
                    radius,
                ]
            })
            .collect();
        let header = ["j", "lambda", "hausdorff_next", "l2_residual", "linf_residual", "self_similarity", "fit_radius"];
        write_file(&path, &csv(&header, &rows))?;
    }
    emit(pick(a.out.clone(), &cfg.out).as_deref(), &to_json(&rep)?)?;
    Ok(0)
}

pub fn shrinker(a: &ShrinkerArgs, cfg: &RunConfig) -> Result<u8, Failure> {
    let input: PathBuf = require(pick(a.input.clone(), &cfg.input), "input")?;
    let surface = load_surface(&input)?;
    let report = shrinker_residual(&surface)?;
    emit(pick(a.out.clone(), &cfg.out).as_deref(), &to_json(&report)?)?;
    Ok(0)
}

pub fn stone(a: &StoneArgs) -> Result<u8, Failure> {
    if a.from == 0 || a.to < a.from {
        return Err(Failure::usage(format!("need 1 ≤ from ≤ to, got {}..{}", a.from, a.to)));
    }
    let mut rows = Vec::new();
    for k in a.from..=a.to {
        let v = stone_entropy(k)?;
        println!("{k} {}", significant(v, 12));
        rows.push([k as f64, v]);
    }
    if let Some(path) = &a.out {
        write_file(path, &csv(&["k", "entropy"], &rows))?;
    }
    Ok(0)
}
