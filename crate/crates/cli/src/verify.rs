use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use entroflow::flow::{huisken_series, localized_series, pinching_report, run_flow, FlowControls, Scheme};
use entroflow::gaussian::{entropy, EntropyOptions, SpaceTimePoint};
use entroflow::geometry::{hausdorff_distance, shapes, transform, RigidDilation};
use entroflow::rescale::tangent_flow_extract;
use entroflow::{Mat3, Point, Run, Surface};

use crate::config::{pick, RunConfig};
use crate::report::{emit, to_json};
use crate::{Failure, Suite, VerifyArgs, EXIT_VERIFY};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    suite: String,
    pass: bool,
    checks: Vec<Check>,
}

pub fn run(a: &VerifyArgs, cfg: &RunConfig) -> Result<u8, Failure> {
    let seed = pick(a.seed, &cfg.seed).unwrap_or(7);
    let checks = match a.suite {
        Suite::Monotonicity => monotonicity(seed)?,
        Suite::EntropyInvariance => entropy_invariance(seed)?,
        Suite::ShrinkingSphere => shrinking_sphere()?,
        Suite::TangentCircle => tangent_circle()?,
        Suite::Pinching => pinching()?,
    };
    for c in &checks {
        println!(
            "{} {} value {:.6e} tolerance {:.6e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    let pass = checks.iter().all(|c| c.pass);
    if let Some(out) = pick(a.out.clone(), &cfg.out) {
        let report = VerifyReport { suite: format!("{:?}", a.suite), pass, checks };
        emit(Some(&out), &to_json(&report)?)?;
    }
    Ok(if pass { 0 } else { EXIT_VERIFY })
}

fn explicit_flow(surface: &Surface, t_end: f64) -> Result<Run, Failure> {
    let controls = FlowControls { t_end, scheme: Scheme::Explicit, remesh_every: 50, ..Default::default() };
    run_flow(surface, &controls).map_err(|a| Failure::from(a.error))
}

/// Largest increase between consecutive entries of a time series.
fn max_increase(series: &[(f64, f64)]) -> f64 {
    series.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max)
}

fn monotonicity(seed: u64) -> Result<Vec<Check>, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let cases: [(&str, Surface, f64, usize); 3] = [
        ("circle", shapes::circle(1.0, 128)?, 0.45, 2),
        ("sphere", shapes::icosphere(1.0, 3)?, 0.2, 3),
        ("ellipsoid", shapes::ellipsoid([2.0, 1.0, 1.0], 3)?, 0.3, 3),
    ];
    for (label, surface, t_end, ambient) in cases {
        let traj = explicit_flow(&surface, t_end)?;
        let last = traj.last().time;
        let tol = 1e-3 + 10.0 * traj.max_dt();
        for k in 0..5 {
            let mut y = [0.0; 3];
            for c in y.iter_mut().take(ambient) {
                *c = rng.gen_range(-1.0..1.0);
            }
            let tau = last + rng.gen_range(0.01..0.3);
            let y = Point::from_f64(y);
            let series = huisken_series(&traj, y, tau)?;
            checks.push(Check::at_most(format!("{label} huisken #{k}"), max_increase(&series), tol));
            let local = localized_series(&traj, SpaceTimePoint { point: y, time: tau }, 2.0)?;
            checks.push(Check::at_most(format!("{label} localized #{k}"), max_increase(&local), tol));
        }
        if label == "circle" {
            let series = huisken_series(&traj, Point::zero(), 0.5)?;
            let lo = series.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
            let hi = series.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::at_most("circle shrinker-centered spread", hi - lo, 2e-3));
        }
    }
    Ok(checks)
}

fn entropy_invariance(seed: u64) -> Result<Vec<Check>, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = shapes::ellipsoid([2.0, 1.0, 1.0], 2)?;
    let opts = EntropyOptions::default();
    let reference = entropy(&base, &opts)?;
    let mut checks = Vec::new();
    for k in 0..3 {
        let axis = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.0));
        let rotation = Mat3::rotation_axis_angle(axis, rng.gen_range(0.0..std::f64::consts::TAU));
        let shift = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let dilation = rng.gen_range(0.5..2.0);
        let map = RigidDilation::new(rotation, shift, dilation);
        let moved = transform(&base, &map)?;
        let r = entropy(&moved, &opts)?;
        checks.push(Check::at_most(format!("entropy change #{k}"), (r.entropy - reference.entropy).abs(), 1e-6));
        let expect = map.apply(reference.argmax.center);
        checks.push(Check::at_most(
            format!("argmax displacement #{k}"),
            expect.distance(r.argmax.center) / moved.diameter(),
            1e-4,
        ));
    }
    Ok(checks)
}

fn radius_error(traj: &Run, r0: f64, n: f64) -> f64 {
    let t_sing = r0 * r0 / (2.0 * n);
    traj.snapshots()
        .iter()
        .filter(|s| s.time <= 0.8 * t_sing)
        .map(|s| {
            let v = s.surface.enclosed_volume();
            let r = if n == 1.0 {
                (v / std::f64::consts::PI).sqrt()
            } else {
                (0.75 * v / std::f64::consts::PI).cbrt()
            };
            (r / (r0 * r0 - 2.0 * n * s.time).sqrt() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn shrinking_sphere() -> Result<Vec<Check>, Failure> {
    let mut checks = Vec::new();
    for (label, surface, r0, n) in
        [("circle", shapes::circle(1.0, 256)?, 1.0, 1.0), ("sphere", shapes::icosphere(2.0, 4)?, 2.0, 2.0)]
    {
        let traj = explicit_flow(&surface, 2.0 * r0 * r0)?;
        checks.push(Check::at_most(format!("{label} radius error"), radius_error(&traj, r0, n), 1e-3));
        let t_sing = r0 * r0 / (2.0 * n);
        let t = traj.singular_time().unwrap_or(f64::INFINITY);
        checks.push(Check::at_most(format!("{label} singular time error"), (t / t_sing - 1.0).abs(), 1e-2));
    }
    Ok(checks)
}

fn tangent_circle() -> Result<Vec<Check>, Failure> {
    let traj = explicit_flow(&shapes::circle(1.0, 256)?, 1.0)?;
    let limit = shapes::circle(2f64.sqrt(), 4096)?;
    let rep = tangent_flow_extract(&traj, Point::zero(), 0.5, 4)?;
    let mut checks = Vec::new();
    for j in 0..rep.sequence.scales.len() {
        let slice = rep.sequence.slice(j, -1.0).expect("slice present");
        let d = hausdorff_distance(slice, &limit)?;
        checks.push(Check::at_most(format!("scale {j} distance to limit"), d, 5e-3));
        checks.push(Check::at_most(format!("scale {j} residual"), rep.residuals[j].linf_residual, 1e-2));
        checks.push(Check::at_most(format!("scale {j} self-similarity"), rep.self_similarity[j], 2.0 * d + 1e-2));
    }
    Ok(checks)
}

fn pinching() -> Result<Vec<Check>, Failure> {
    let traj = explicit_flow(&shapes::ellipsoid([2.0, 1.0, 1.0], 3)?, 1.0)?;
    let rep = pinching_report(&traj)?;
    let initial = rep.initial_ratio().unwrap_or(f64::NAN);
    let max = rep.max_ratio().unwrap_or(f64::NAN);
    let invalid = rep.valid.iter().filter(|v| !**v).count() as f64;
    let floor = rep.ratios.iter().zip(&rep.valid).filter(|(_, v)| **v).map(|(r, _)| *r).fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most("max ratio growth", max - initial, 0.05),
        Check::at_most("snapshots with H <= 0", invalid, 0.0),
        Check::at_most("ratio below 1/n", 0.5 - 1e-6 - floor, 0.0),
    ])
}
