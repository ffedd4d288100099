//! Dense signed-distance grids for rigid indenter shells.

use std::io::{Read, Write};
use std::path::Path;

use crate::contact::point_triangle_closest;
use crate::error::{Error, Result};
use crate::geometry::surface::SurfaceMesh;
use crate::math::Vec3;

/// Regular grid of signed distances, negative inside, x-fastest storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfGrid {
    pub origin: Vec3,
    pub spacing: f64,
    pub dims: [usize; 3],
    pub values: Vec<f32>,
}

/// One query result: distance, unit gradient, and whether the query point had
/// to be clamped into the grid or hit a degenerate gradient.
#[derive(Debug, Clone, Copy)]
pub struct SdfSample {
    pub distance: f64,
    pub normal: Vec3,
    pub clamped: bool,
    pub degenerate: bool,
}

impl SdfGrid {
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    pub fn value_at_node(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)] as f64
    }

    pub fn max_corner(&self) -> Vec3 {
        self.origin
            + Vec3::new(
                (self.dims[0] - 1) as f64,
                (self.dims[1] - 1) as f64,
                (self.dims[2] - 1) as f64,
            ) * self.spacing
    }

    /// Trilinear interpolation; clamps to the grid box and reports it.
    pub fn interpolate(&self, point: &Vec3) -> (f64, bool) {
        let mut clamped = false;
        let mut local = (point - self.origin) / self.spacing;
        for a in 0..3 {
            let max = (self.dims[a] - 1) as f64;
            if local[a] < 0.0 {
                local[a] = 0.0;
                clamped = true;
            } else if local[a] > max {
                local[a] = max;
                clamped = true;
            }
        }
        let cell = [
            (local.x.floor() as usize).min(self.dims[0] - 2),
            (local.y.floor() as usize).min(self.dims[1] - 2),
            (local.z.floor() as usize).min(self.dims[2] - 2),
        ];
        let f = Vec3::new(
            local.x - cell[0] as f64,
            local.y - cell[1] as f64,
            local.z - cell[2] as f64,
        );
        let mut value = 0.0;
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let w = (if dx == 1 { f.x } else { 1.0 - f.x })
                        * (if dy == 1 { f.y } else { 1.0 - f.y })
                        * (if dz == 1 { f.z } else { 1.0 - f.z });
                    value += w * self.value_at_node(cell[0] + dx, cell[1] + dy, cell[2] + dz);
                }
            }
        }
        (value, clamped)
    }
}

/// Build a signed-distance grid around a watertight shell.
///
/// Distance is the exact minimum over triangles; the inside test uses the
/// generalized winding number, which is robust for closed shells.
pub fn build_sdf_grid(shell: &SurfaceMesh, dims: [usize; 3], padding: f64) -> Result<SdfGrid> {
    if dims.iter().any(|&d| d < 8) {
        return Err(Error::invalid(format!(
            "sdf grid dims must be at least 8 per axis, got {dims:?}"
        )));
    }
    shell.check_watertight()?;
    let (lo, hi) = shell.bounds();
    let lo = lo - Vec3::repeat(padding);
    let hi = hi + Vec3::repeat(padding);
    let span = hi - lo;
    let spacing = (span.x / (dims[0] - 1) as f64)
        .max(span.y / (dims[1] - 1) as f64)
        .max(span.z / (dims[2] - 1) as f64);
    // Center the (possibly oversized) cube-celled grid on the box.
    let grid_span = Vec3::new(
        (dims[0] - 1) as f64,
        (dims[1] - 1) as f64,
        (dims[2] - 1) as f64,
    ) * spacing;
    let origin = lo - (grid_span - span) * 0.5;

    let tris: Vec<[Vec3; 3]> = (0..shell.triangles.len())
        .map(|t| shell.triangle_vertices(t))
        .collect();
    let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let p = origin
                    + Vec3::new(i as f64, j as f64, k as f64) * spacing;
                let mut d2 = f64::INFINITY;
                for tri in &tris {
                    let (closest, _) = point_triangle_closest(&p, tri);
                    d2 = d2.min((p - closest).norm_squared());
                }
                let d = d2.sqrt();
                let sign = if winding_number(&p, &tris) > 0.5 { -1.0 } else { 1.0 };
                values.push((sign * d) as f32);
            }
        }
    }
    Ok(SdfGrid {
        origin,
        spacing,
        dims,
        values,
    })
}

/// Generalized winding number of a triangle soup around `p` (1 inside a
/// closed shell, 0 outside). Solid angle per triangle by van Oosterom-Strackee.
fn winding_number(p: &Vec3, tris: &[[Vec3; 3]]) -> f64 {
    let mut total = 0.0;
    for tri in tris {
        let a = tri[0] - p;
        let b = tri[1] - p;
        let c = tri[2] - p;
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Trilinear distance and central-difference unit gradient at `point`.
pub fn sdf_query(grid: &SdfGrid, point: &Vec3) -> SdfSample {
    let (distance, clamped) = grid.interpolate(point);
    let h = 0.5 * grid.spacing;
    let mut g = Vec3::zeros();
    let mut g_clamped = clamped;
    for a in 0..3 {
        let mut hi = *point;
        let mut lo = *point;
        hi[a] += h;
        lo[a] -= h;
        let (vh, ch) = grid.interpolate(&hi);
        let (vl, cl) = grid.interpolate(&lo);
        g[a] = (vh - vl) / (2.0 * h);
        g_clamped |= ch || cl;
    }
    let norm = g.norm();
    if norm < 1e-12 {
        return SdfSample {
            distance,
            normal: Vec3::zeros(),
            clamped: g_clamped,
            degenerate: true,
        };
    }
    SdfSample {
        distance,
        normal: g / norm,
        clamped: g_clamped,
        degenerate: false,
    }
}

const SDF_MAGIC: &[u8; 4] = b"SDF1";

/// Cache format: magic `SDF1`, little-endian u32 dims, f64 origin xyz,
/// f64 spacing, then f32 values in x-fastest order.
pub fn save_sdf(grid: &SdfGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(&path_str, e))?,
    );
    let werr = |e: std::io::Error| Error::io(&path_str, e);
    out.write_all(SDF_MAGIC).map_err(werr)?;
    for &d in &grid.dims {
        out.write_all(&(d as u32).to_le_bytes()).map_err(werr)?;
    }
    for a in 0..3 {
        out.write_all(&grid.origin[a].to_le_bytes()).map_err(werr)?;
    }
    out.write_all(&grid.spacing.to_le_bytes()).map_err(werr)?;
    for v in &grid.values {
        out.write_all(&v.to_le_bytes()).map_err(werr)?;
    }
    Ok(())
}

pub fn load_sdf(path: impl AsRef<Path>) -> Result<SdfGrid> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(&path_str, e))?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)
        .map_err(|e| Error::io(&path_str, e))?;
    let bad = |reason: &str| Error::Parse {
        path: path_str.clone(),
        line: 0,
        reason: reason.to_string(),
    };
    if buf.len() < 4 + 12 + 24 + 8 || &buf[0..4] != SDF_MAGIC {
        return Err(bad("missing SDF1 header"));
    }
    let mut off = 4;
    let mut take_u32 = || {
        let v = u32::from_le_bytes(buf[off..off + 4].try_into().unwrap());
        off += 4;
        v as usize
    };
    let dims = [take_u32(), take_u32(), take_u32()];
    let mut take_f64 = || {
        let v = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
        off += 8;
        v
    };
    let origin = Vec3::new(take_f64(), take_f64(), take_f64());
    let spacing = take_f64();
    let count = dims[0] * dims[1] * dims[2];
    if buf.len() != off + 4 * count {
        return Err(bad("value payload size mismatch"));
    }
    let mut values = Vec::with_capacity(count);
    for c in 0..count {
        let s = off + 4 * c;
        values.push(f32::from_le_bytes(buf[s..s + 4].try_into().unwrap()));
    }
    Ok(SdfGrid {
        origin,
        spacing,
        dims,
        values,
    })
}
