//! Triangle surface meshes: boundary extraction, OBJ loading, and signed
//! distance queries against watertight shells.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::contact::point_triangle_closest;
use crate::error::{Error, Result};
use crate::geometry::tet_mesh::{bounds_of, TetMesh};
use crate::math::Vec3;

/// Triangle mesh of boundary faces, with a deduplicated edge list.
///
/// `volume_map[i]` is the index of surface vertex `i` in the tet mesh it was
/// extracted from (identity for standalone shells).
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub volume_map: Vec<usize>,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        for (i, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {i} references vertex {v} out of {n}"
                    )));
                }
            }
        }
        let edges = unique_edges(&triangles);
        let volume_map = (0..n).collect();
        Ok(SurfaceMesh {
            vertices,
            triangles,
            edges,
            volume_map,
        })
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        bounds_of(&self.vertices)
    }

    /// Errors with the offending edge unless every edge is shared by exactly
    /// two triangles with opposite winding.
    pub fn check_watertight(&self) -> Result<()> {
        let mut count: BTreeMap<(usize, usize), i32> = BTreeMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                // Directed edges cancel in a consistently wound closed shell.
                let (key, sign) = if a < b { ((a, b), 1) } else { ((b, a), -1) };
                *count.entry(key).or_insert(0) += sign;
            }
        }
        let mut seen: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e].min(tri[(e + 1) % 3]);
                let b = tri[e].max(tri[(e + 1) % 3]);
                *seen.entry((a, b)).or_insert(0) += 1;
            }
        }
        for (&(a, b), &n) in &seen {
            if n != 2 || count[&(a, b)] != 0 {
                return Err(Error::OpenEdge(a, b));
            }
        }
        Ok(())
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }
}

fn unique_edges(triangles: &[[usize; 3]]) -> Vec<[usize; 2]> {
    let mut set: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for tri in triangles {
        for e in 0..3 {
            let a = tri[e];
            let b = tri[(e + 1) % 3];
            set.insert((a.min(b), a.max(b)), ());
        }
    }
    set.keys().map(|&(a, b)| [a, b]).collect()
}

/// Extract the boundary triangles of a tet mesh, outward-oriented, with
/// surface vertices compacted and mapped back through `volume_map`.
pub fn extract_surface(mesh: &TetMesh) -> SurfaceMesh {
    // Faces of a positively oriented tet, wound so normals point outward.
    const FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];
    let mut face_count: BTreeMap<[usize; 3], ([usize; 3], u32)> = BTreeMap::new();
    for tet in &mesh.tets {
        for f in FACES {
            let tri = [tet[f[0]], tet[f[1]], tet[f[2]]];
            let mut key = tri;
            key.sort_unstable();
            face_count
                .entry(key)
                .and_modify(|e| e.1 += 1)
                .or_insert((tri, 1));
        }
    }

    let mut volume_map: Vec<usize> = Vec::new();
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut triangles = Vec::new();
    for (_, (tri, n)) in &face_count {
        if *n != 1 {
            continue;
        }
        let mut out = [0usize; 3];
        for (slot, &v) in out.iter_mut().zip(tri) {
            *slot = *remap.entry(v).or_insert_with(|| {
                volume_map.push(v);
                volume_map.len() - 1
            });
        }
        triangles.push(out);
    }
    let vertices = volume_map.iter().map(|&v| mesh.vertices[v]).collect();
    let edges = unique_edges(&triangles);
    SurfaceMesh {
        vertices,
        triangles,
        edges,
        volume_map,
    }
}

/// Precomputed angle-weighted pseudonormals for signed distance queries.
#[derive(Debug, Clone)]
pub struct ShellNormals {
    pub face: Vec<Vec3>,
    pub vertex: Vec<Vec3>,
    /// Keyed by sorted edge, same order as `SurfaceMesh::edges`.
    pub edge: Vec<Vec3>,
}

impl ShellNormals {
    pub fn build(shell: &SurfaceMesh) -> Self {
        let mut face = Vec::with_capacity(shell.triangles.len());
        let mut vertex = vec![Vec3::zeros(); shell.vertices.len()];
        let mut edge_map: BTreeMap<(usize, usize), Vec3> = BTreeMap::new();
        for tri in &shell.triangles {
            let [a, b, c] = *tri;
            let (pa, pb, pc) = (shell.vertices[a], shell.vertices[b], shell.vertices[c]);
            let n = (pb - pa).cross(&(pc - pa));
            let n_unit = n.normalize();
            face.push(n_unit);
            for (v, (p, q)) in [(a, (pb, pc)), (b, (pc, pa)), (c, (pa, pb))] {
                let u = p - shell.vertices[v];
                let w = q - shell.vertices[v];
                let angle = u.angle(&w);
                vertex[v] += angle * n_unit;
            }
            for e in 0..3 {
                let i = tri[e];
                let j = tri[(e + 1) % 3];
                *edge_map
                    .entry((i.min(j), i.max(j)))
                    .or_insert_with(Vec3::zeros) += n_unit;
            }
        }
        for v in vertex.iter_mut() {
            let norm = v.norm();
            if norm > 0.0 {
                *v /= norm;
            }
        }
        let edge = shell
            .edges
            .iter()
            .map(|&[a, b]| {
                edge_map
                    .get(&(a, b))
                    .map(|n| {
                        let norm = n.norm();
                        if norm > 0.0 {
                            n / norm
                        } else {
                            Vec3::zeros()
                        }
                    })
                    .unwrap_or_else(Vec3::zeros)
            })
            .collect();
        ShellNormals {
            face,
            vertex,
            edge,
        }
    }

    /// Normals of the shell after a rigid rotation; pseudonormals transform
    /// exactly under rotation.
    pub fn rotated(&self, q: &nalgebra::UnitQuaternion<f64>) -> Self {
        let rot = |v: &Vec3| q * v;
        ShellNormals {
            face: self.face.iter().map(rot).collect(),
            vertex: self.vertex.iter().map(rot).collect(),
            edge: self.edge.iter().map(rot).collect(),
        }
    }
}

/// Signed distance from `point` to a watertight shell at `positions`
/// (posed copies of the shell vertices), negative inside.
///
/// Sign comes from the angle-weighted pseudonormal at the closest feature,
/// which is exact for watertight, consistently wound shells.
pub fn signed_distance_to_shell(
    point: &Vec3,
    shell: &SurfaceMesh,
    positions: &[Vec3],
    normals: &ShellNormals,
) -> f64 {
    debug_assert_eq!(positions.len(), shell.vertices.len());
    let mut best_d2 = f64::INFINITY;
    let mut best_tri = 0usize;
    let mut best_point = Vec3::zeros();
    let mut best_bary = [0.0; 3];
    for (t, tri) in shell.triangles.iter().enumerate() {
        let pts = [
            positions[tri[0]],
            positions[tri[1]],
            positions[tri[2]],
        ];
        let (closest, bary) = point_triangle_closest(point, &pts);
        let d2 = (point - closest).norm_squared();
        if d2 < best_d2 {
            best_d2 = d2;
            best_tri = t;
            best_point = closest;
            best_bary = bary;
        }
    }
    let tri = shell.triangles[best_tri];
    // Pick the pseudonormal of the closest feature from barycentrics.
    let eps = 1e-9;
    let on = [best_bary[0] > eps, best_bary[1] > eps, best_bary[2] > eps];
    let normal = match on {
        [true, true, true] => normals.face[best_tri],
        [true, false, false] => normals.vertex[tri[0]],
        [false, true, false] => normals.vertex[tri[1]],
        [false, false, true] => normals.vertex[tri[2]],
        _ => {
            let (a, b) = match on {
                [true, true, false] => (tri[0], tri[1]),
                [false, true, true] => (tri[1], tri[2]),
                _ => (tri[0], tri[2]),
            };
            let key = [a.min(b), a.max(b)];
            match shell.edges.binary_search(&key) {
                Ok(idx) => normals.edge[idx],
                Err(_) => normals.face[best_tri],
            }
        }
    };
    // Rest-frame normals are valid for posed queries only up to rotation;
    // callers posing the shell must rotate `normals` alongside `positions`.
    let diff = point - best_point;
    let d = diff.norm();
    if diff.dot(&normal) >= 0.0 {
        d
    } else {
        -d
    }
}

/// Load a Wavefront OBJ, `v`/`f` records only; polygon faces are fanned.
pub fn load_obj(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&path_str, e))?;
    let reader = BufReader::new(file);
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            path: path_str.clone(),
            line: idx + 1,
            reason: e.to_string(),
        })?;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let mut coords = [0.0; 3];
                for c in coords.iter_mut() {
                    *c = fields
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::Parse {
                            path: path_str.clone(),
                            line: idx + 1,
                            reason: "bad vertex coordinate".into(),
                        })?;
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let ids: Vec<usize> = fields
                    .map(|tok| {
                        let first = tok.split('/').next().unwrap_or("");
                        first.parse::<usize>().map_err(|_| Error::Parse {
                            path: path_str.clone(),
                            line: idx + 1,
                            reason: format!("bad face index `{tok}`"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if ids.len() < 3 {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        line: idx + 1,
                        reason: "face with fewer than 3 vertices".into(),
                    });
                }
                for i in 1..ids.len() - 1 {
                    triangles.push([ids[0] - 1, ids[i] - 1, ids[i + 1] - 1]);
                }
            }
            _ => {}
        }
    }
    SurfaceMesh::new(vertices, triangles)
}

/// Write a shell as OBJ (v/f records).
pub fn save_obj(shell: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    use std::io::Write;
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(&path_str, e))?,
    );
    let write = |e: std::io::Error| Error::io(&path_str, e);
    for v in &shell.vertices {
        writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z).map_err(write)?;
    }
    for t in &shell.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).map_err(write)?;
    }
    Ok(())
}
