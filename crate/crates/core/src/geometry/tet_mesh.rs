//! Tetrahedral meshes for the deformable gel pad.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};

/// Tetrahedral mesh in its rest configuration.
///
/// `inv_rest_shape[t]` is the inverse of the rest edge matrix
/// `[v1-v0 | v2-v0 | v3-v0]`, used to form deformation gradients.
#[derive(Debug, Clone)]
pub struct TetMesh {
    pub vertices: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
    /// Vertex indices with prescribed zero displacement.
    pub dirichlet: BTreeSet<usize>,
    pub rest_volumes: Vec<f64>,
    pub inv_rest_shape: Vec<Mat3>,
}

impl TetMesh {
    /// Build from vertices and tets, orienting every tet to positive volume.
    pub fn new(vertices: Vec<Vec3>, mut tets: Vec<[usize; 4]>) -> Result<Self> {
        let n = vertices.len();
        for (i, tet) in tets.iter_mut().enumerate() {
            for &v in tet.iter() {
                if v >= n {
                    return Err(Error::InvalidMesh(format!(
                        "tet {i} references vertex {v} out of {n}"
                    )));
                }
            }
            if signed_volume(&vertices, tet) < 0.0 {
                tet.swap(2, 3);
            }
        }
        let mut rest_volumes = Vec::with_capacity(tets.len());
        let mut inv_rest_shape = Vec::with_capacity(tets.len());
        for (i, tet) in tets.iter().enumerate() {
            let vol = signed_volume(&vertices, tet);
            if vol <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "tet {i} is degenerate (volume {vol:e})"
                )));
            }
            let d = edge_matrix(&vertices, tet);
            let inv = d.try_inverse().ok_or_else(|| {
                Error::InvalidMesh(format!("tet {i} has a singular rest shape"))
            })?;
            rest_volumes.push(vol);
            inv_rest_shape.push(inv);
        }
        Ok(TetMesh {
            vertices,
            tets,
            dirichlet: BTreeSet::new(),
            rest_volumes,
            inv_rest_shape,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Per-node lumped masses: each tet spreads a quarter of its rest mass
    /// onto each of its vertices.
    pub fn lumped_masses(&self, density: f64) -> Vec<f64> {
        let mut masses = vec![0.0; self.vertices.len()];
        for (tet, vol) in self.tets.iter().zip(&self.rest_volumes) {
            let share = 0.25 * density * vol;
            for &v in tet {
                masses[v] += share;
            }
        }
        masses
    }

    pub fn total_volume(&self) -> f64 {
        self.rest_volumes.iter().sum()
    }

    /// Axis-aligned bounding box of the rest vertices.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        bounds_of(&self.vertices)
    }
}

pub(crate) fn bounds_of(points: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

fn edge_matrix(vertices: &[Vec3], tet: &[usize; 4]) -> Mat3 {
    Mat3::from_columns(&[
        vertices[tet[1]] - vertices[tet[0]],
        vertices[tet[2]] - vertices[tet[0]],
        vertices[tet[3]] - vertices[tet[0]],
    ])
}

pub(crate) fn signed_volume(vertices: &[Vec3], tet: &[usize; 4]) -> f64 {
    edge_matrix(vertices, tet).determinant() / 6.0
}

/// Axis-aligned box pad split into `resolution` cells of 6 tets each.
///
/// The pad spans `[-ex/2, ex/2] x [-ey/2, ey/2] x [0, ez]`; the bottom face
/// (`z = 0`) is fixed. Every cell is cut along its main diagonal into the six
/// tets of the diagonal subdivision, which is conforming across cells and
/// symmetric under axis swaps.
pub fn build_gel_pad(extent: Vec3, resolution: [usize; 3]) -> Result<TetMesh> {
    if !(extent.x > 0.0 && extent.y > 0.0 && extent.z > 0.0) {
        return Err(Error::invalid(format!("pad extent must be positive, got {extent:?}")));
    }
    if resolution.iter().any(|&r| r == 0) {
        return Err(Error::invalid(format!(
            "pad resolution must be at least 1 per axis, got {resolution:?}"
        )));
    }
    let [nx, ny, nz] = resolution;
    let step = Vec3::new(
        extent.x / nx as f64,
        extent.y / ny as f64,
        extent.z / nz as f64,
    );
    let origin = Vec3::new(-0.5 * extent.x, -0.5 * extent.y, 0.0);

    let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(
                    origin + Vec3::new(i as f64 * step.x, j as f64 * step.y, k as f64 * step.z),
                );
            }
        }
    }

    // Six tets per cell, all sharing the cell diagonal c000-c111. Listing the
    // axis orders explicitly keeps the split identical in every cell, so
    // shared faces get matching diagonals.
    const AXIS_ORDERS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(nx * ny * nz * 6);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let corner = |b: [usize; 3]| vid(i + b[0], j + b[1], k + b[2]);
                for order in AXIS_ORDERS {
                    let mut b = [0usize; 3];
                    let v0 = corner(b);
                    b[order[0]] = 1;
                    let v1 = corner(b);
                    b[order[1]] = 1;
                    let v2 = corner(b);
                    b[order[2]] = 1;
                    let v3 = corner(b);
                    tets.push([v0, v1, v2, v3]);
                }
            }
        }
    }

    let mut mesh = TetMesh::new(vertices, tets)?;
    for j in 0..=ny {
        for i in 0..=nx {
            mesh.dirichlet.insert(vid(i, j, 0));
        }
    }
    Ok(mesh)
}

/// Load the ASCII tet format: header `tet <V> <T>`, V vertex lines, T index lines.
pub fn load_tet_file(path: impl AsRef<Path>) -> Result<TetMesh> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&path_str, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let parse = |line: usize, reason: &str| Error::Parse {
        path: path_str.clone(),
        line,
        reason: reason.to_string(),
    };

    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((n, Err(e))) => return Err(parse(n + 1, &e.to_string())),
        None => return Err(parse(1, "empty file")),
    };
    let mut parts = header.split_whitespace();
    if parts.next() != Some("tet") {
        return Err(parse(1, "expected header `tet <V> <T>`"));
    }
    let nv: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse(1, "bad vertex count"))?;
    let nt: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse(1, "bad tet count"))?;

    let mut vertices = Vec::with_capacity(nv);
    let mut tets = Vec::with_capacity(nt);
    for (idx, line) in lines {
        let line = line.map_err(|e| parse(idx + 1, &e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if vertices.len() < nv {
            if fields.len() != 3 {
                return Err(parse(idx + 1, "expected 3 vertex coordinates"));
            }
            let mut coords = [0.0; 3];
            for (c, f) in coords.iter_mut().zip(&fields) {
                *c = f
                    .parse()
                    .map_err(|_| parse(idx + 1, "bad vertex coordinate"))?;
            }
            vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
        } else if tets.len() < nt {
            if fields.len() != 4 {
                return Err(parse(idx + 1, "expected 4 tet indices"));
            }
            let mut tet = [0usize; 4];
            for (t, f) in tet.iter_mut().zip(&fields) {
                *t = f.parse().map_err(|_| parse(idx + 1, "bad tet index"))?;
            }
            tets.push(tet);
        }
    }
    if vertices.len() != nv || tets.len() != nt {
        return Err(parse(
            0,
            &format!(
                "expected {nv} vertices and {nt} tets, found {} and {}",
                vertices.len(),
                tets.len()
            ),
        ));
    }
    TetMesh::new(vertices, tets)
}

pub fn save_tet_file(mesh: &TetMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(&path_str, e))?,
    );
    let write = |e: std::io::Error| Error::io(&path_str, e);
    writeln!(out, "tet {} {}", mesh.vertices.len(), mesh.tets.len()).map_err(write)?;
    for v in &mesh.vertices {
        writeln!(out, "{:.17e} {:.17e} {:.17e}", v.x, v.y, v.z).map_err(write)?;
    }
    for t in &mesh.tets {
        writeln!(out, "{} {} {} {}", t[0], t[1], t[2], t[3]).map_err(write)?;
    }
    Ok(())
}
