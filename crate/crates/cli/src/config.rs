use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

/// Parameters that may come from a TOML file; command-line flags take
/// precedence over every key here.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub scheme: Option<String>,
    pub cfl: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshot_every: Option<f64>,
    pub snapshot_area_ratio: Option<f64>,
    pub remesh_every: Option<usize>,
    pub max_steps: Option<usize>,
    pub curvature_diameter: Option<f64>,
    pub volume_fraction: Option<f64>,
    pub starts: Option<usize>,
    pub max_iterations: Option<usize>,
    pub gradient_tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub scales: Option<usize>,
    pub center: Option<Vec<f64>>,
    pub time: Option<f64>,
    pub times: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Flag value if given, else config value.
pub fn pick<T>(flag: Option<T>, config: &Option<T>) -> Option<T>
where
    T: Clone,
{
    flag.or_else(|| config.clone())
}

pub fn require<T>(value: Option<T>, name: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("missing --{name} (flag or config key)")))
}

/// Parses `x,y` or `x,y,z`.
pub fn parse_point(values: &[f64]) -> Result<[f64; 3], Failure> {
    match values {
        [x, y] => Ok([*x, *y, 0.0]),
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(Failure::usage(format!("a point needs 2 or 3 coordinates, got {}", values.len()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("cfl = 0.5\nbogus = 1\n").is_err());
        let c: RunConfig = toml::from_str("cfl = 0.25\ncenter = [0.0, 1.0]\n").unwrap();
        assert_eq!(c.cfl, Some(0.25));
    }

    #[test]
    fn flags_override_config() {
        assert_eq!(pick(Some(2), &Some(1)), Some(2));
        assert_eq!(pick(None, &Some(1)), Some(1));
        assert_eq!(pick::<u8>(None, &None), None);
    }
}
