//! Velocity and pressure sampled along a straight line, as CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::SolutionField;
use crate::error::{Error, Result};
use crate::mesh::geometry::{dot, norm, sub, Point};

/// Segment from `start` to `end`. Nodes within `tolerance` of it are
/// sampled; `coord` runs from -1 at `start` to 1 at `end`. The velocity
/// component `component` is divided by `velocity_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileLine {
    pub start: Point,
    pub end: Point,
    pub tolerance: f64,
    pub component: usize,
    pub velocity_scale: f64,
}

impl ProfileLine {
    /// Diameter along x through the pipe axis at the node layer nearest
    /// mid-length, normalized by `velocity_scale`.
    pub fn pipe_diameter(field: &SolutionField, radius: f64, velocity_scale: f64) -> Self {
        let nodes = field.mesh.nodes();
        let z_lo = nodes.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
        let z_hi = nodes.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (z_lo + z_hi);
        let z = nodes
            .iter()
            .map(|p| p[2])
            .min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()))
            .unwrap_or(mid);
        Self {
            start: [-radius, 0.0, z],
            end: [radius, 0.0, z],
            tolerance: 1e-9 * radius,
            component: 2,
            velocity_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub coord: f64,
    pub u_r: f64,
    pub u_i: f64,
    pub p_r: f64,
    pub p_i: f64,
}

/// Rows for every node on `line`, ordered by `coord` and then node index.
pub fn profile_rows(field: &SolutionField, line: &ProfileLine) -> Result<Vec<ProfileRow>> {
    let axis = sub(&line.end, &line.start);
    let len = norm(&axis);
    if len == 0.0 || line.velocity_scale == 0.0 || line.component >= field.mesh.dimension() {
        return Err(Error::Invalid("profile line needs distinct ends, a nonzero scale and a valid component".into()));
    }
    let mut rows: Vec<(f64, usize)> = field
        .mesh
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(n, p)| {
            let rel = sub(p, &line.start);
            let t = dot(&rel, &axis) / (len * len);
            let off = sub(&rel, &[axis[0] * t, axis[1] * t, axis[2] * t]);
            ((-1e-12..=1.0 + 1e-12).contains(&t) && norm(&off) <= line.tolerance).then_some((2.0 * t - 1.0, n))
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let s = line.velocity_scale;
    Ok(rows
        .into_iter()
        .map(|(coord, n)| ProfileRow {
            coord,
            u_r: field.u_r[n][line.component] / s,
            u_i: field.u_i[n][line.component] / s,
            p_r: field.p_r[n],
            p_i: field.p_i[n],
        })
        .collect())
}

pub fn write_profile_csv_to(rows: &[ProfileRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "coord,u_r,u_i,p_r,p_i")?;
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.coord, r.u_r, r.u_i, r.p_r, r.p_i)?;
    }
    Ok(())
}

pub fn write_profile_csv(field: &SolutionField, line: &ProfileLine, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let rows = profile_rows(field, line)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_profile_csv_to(&rows, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
