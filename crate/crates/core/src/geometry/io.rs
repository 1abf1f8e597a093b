//! Wavefront OBJ (`v`/`f` records) for meshes and a plain `x y` per line
//! format for closed polylines. Writers use 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::DiscreteHypersurface;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Formats a value with 17 significant digits.
pub fn fmt_full<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

pub fn write_obj_string<T: Real>(surface: &DiscreteHypersurface<T>) -> Result<String> {
    if surface.dim() != 2 {
        return Err(Error::DimensionMismatch("OBJ output requires a triangle mesh".into()));
    }
    let mut out = String::new();
    for p in surface.vertices() {
        writeln!(out, "v {} {} {}", fmt_full(p.x), fmt_full(p.y), fmt_full(p.z)).unwrap();
    }
    for t in surface.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    Ok(out)
}

pub fn read_obj_str<T: Real>(text: &str) -> Result<DiscreteHypersurface<T>> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok.take(3).map(|s| parse_f64(s, ln)).collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(Error::Parse(format!("line {}: vertex needs 3 coordinates", ln + 1)));
                }
                verts.push(Vec3::new(T::lit(c[0]), T::lit(c[1]), T::lit(c[2])));
            }
            Some("f") => {
                let idx: Vec<usize> = tok
                    .map(|s| {
                        let first = s.split('/').next().unwrap_or("");
                        first
                            .parse::<usize>()
                            .ok()
                            .filter(|&i| i >= 1)
                            .map(|i| i - 1)
                            .ok_or_else(|| Error::Parse(format!("line {}: bad face index '{s}'", ln + 1)))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::Parse(format!("line {}: only triangular faces are supported", ln + 1)));
                }
                tris.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    DiscreteHypersurface::triangle_mesh(verts, tris)
}

pub fn write_polyline_string<T: Real>(surface: &DiscreteHypersurface<T>) -> Result<String> {
    if surface.dim() != 1 {
        return Err(Error::DimensionMismatch("polyline output requires a curve".into()));
    }
    let mut out = String::new();
    for p in surface.vertices() {
        writeln!(out, "{} {}", fmt_full(p.x), fmt_full(p.y)).unwrap();
    }
    Ok(out)
}

pub fn read_polyline_str<T: Real>(text: &str) -> Result<DiscreteHypersurface<T>> {
    let mut pts = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let c: Vec<f64> = line.split_whitespace().map(|s| parse_f64(s, ln)).collect::<Result<_>>()?;
        if c.len() != 2 {
            return Err(Error::Parse(format!("line {}: expected 'x y'", ln + 1)));
        }
        pts.push(Vec3::planar(T::lit(c[0]), T::lit(c[1])));
    }
    DiscreteHypersurface::polyline(pts)
}

fn parse_f64(s: &str, ln: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: bad number '{s}'", ln + 1)))
}

/// Writes a surface in its native format (`.obj` for meshes, polyline text otherwise).
pub fn write_surface<T: Real>(surface: &DiscreteHypersurface<T>, path: &Path) -> Result<()> {
    let text = if surface.dim() == 2 { write_obj_string(surface)? } else { write_polyline_string(surface)? };
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a surface, choosing the format by extension (`.obj` → mesh).
pub fn read_surface<T: Real>(path: &Path) -> Result<DiscreteHypersurface<T>> {
    let text = std::fs::read_to_string(path)?;
    let is_obj = path.extension().map(|e| e.eq_ignore_ascii_case("obj")).unwrap_or(false);
    if is_obj {
        read_obj_str(&text)
    } else {
        read_polyline_str(&text)
    }
}

/// File extension used for a surface of intrinsic dimension `dim`.
pub fn native_extension(dim: usize) -> &'static str {
    if dim == 2 {
        "obj"
    } else {
        "txt"
    }
}
