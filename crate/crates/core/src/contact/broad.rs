//! Spatial-hash broad phase between two surface meshes.

use std::collections::BTreeMap;

use crate::geometry::SurfaceMesh;
use crate::math::Vec3;

/// Candidate primitive pairs between mesh `a` and mesh `b`.
/// Indices refer to each mesh's own vertex/edge/triangle lists.
#[derive(Debug, Clone, Default)]
pub struct CandidatePairs {
    pub vert_a_tri_b: Vec<(usize, usize)>,
    pub vert_b_tri_a: Vec<(usize, usize)>,
    pub edge_edge: Vec<(usize, usize)>,
}

impl CandidatePairs {
    pub fn len(&self) -> usize {
        self.vert_a_tri_b.len() + self.vert_b_tri_a.len() + self.edge_edge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn of(points: &[Vec3]) -> Self {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        Aabb { lo, hi }
    }

    fn distance(&self, other: &Aabb) -> f64 {
        let mut d2 = 0.0;
        for a in 0..3 {
            let gap = (self.lo[a] - other.hi[a]).max(other.lo[a] - self.hi[a]).max(0.0);
            d2 += gap * gap;
        }
        d2.sqrt()
    }
}

type Cell = (i64, i64, i64);

struct Hash {
    cell: f64,
    map: BTreeMap<Cell, Vec<usize>>,
}

impl Hash {
    fn new(cell: f64) -> Self {
        Hash {
            cell,
            map: BTreeMap::new(),
        }
    }

    fn cell_range(&self, b: &Aabb) -> (Cell, Cell) {
        let lo = (
            (b.lo.x / self.cell).floor() as i64,
            (b.lo.y / self.cell).floor() as i64,
            (b.lo.z / self.cell).floor() as i64,
        );
        let hi = (
            (b.hi.x / self.cell).floor() as i64,
            (b.hi.y / self.cell).floor() as i64,
            (b.hi.z / self.cell).floor() as i64,
        );
        (lo, hi)
    }

    fn insert(&mut self, id: usize, b: &Aabb) {
        let (lo, hi) = self.cell_range(b);
        for x in lo.0..=hi.0 {
            for y in lo.1..=hi.1 {
                for z in lo.2..=hi.2 {
                    self.map.entry((x, y, z)).or_default().push(id);
                }
            }
        }
    }

    /// Ids whose cells intersect `b` inflated by one cell.
    fn query(&self, b: &Aabb, out: &mut Vec<usize>) {
        out.clear();
        let inflated = Aabb {
            lo: b.lo - Vec3::repeat(self.cell),
            hi: b.hi + Vec3::repeat(self.cell),
        };
        let (lo, hi) = self.cell_range(&inflated);
        for x in lo.0..=hi.0 {
            for y in lo.1..=hi.1 {
                for z in lo.2..=hi.2 {
                    if let Some(ids) = self.map.get(&(x, y, z)) {
                        out.extend_from_slice(ids);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

/// All primitive pairs between `a` and `b` whose AABB gap is at most
/// `radius`: a superset of the pairs within exact distance `radius`.
/// The hash cell size equals `radius`.
pub fn broad_phase(
    a: &SurfaceMesh,
    a_positions: &[Vec3],
    b: &SurfaceMesh,
    b_positions: &[Vec3],
    radius: f64,
) -> CandidatePairs {
    assert!(radius > 0.0, "broad phase radius must be positive");
    let tri_boxes = |m: &SurfaceMesh, x: &[Vec3]| -> Vec<Aabb> {
        m.triangles
            .iter()
            .map(|t| Aabb::of(&[x[t[0]], x[t[1]], x[t[2]]]))
            .collect()
    };
    let edge_boxes = |m: &SurfaceMesh, x: &[Vec3]| -> Vec<Aabb> {
        m.edges.iter().map(|e| Aabb::of(&[x[e[0]], x[e[1]]])).collect()
    };
    let a_tris = tri_boxes(a, a_positions);
    let b_tris = tri_boxes(b, b_positions);
    let a_edges = edge_boxes(a, a_positions);
    let b_edges = edge_boxes(b, b_positions);

    let mut b_tri_hash = Hash::new(radius);
    for (i, bb) in b_tris.iter().enumerate() {
        b_tri_hash.insert(i, bb);
    }
    let mut a_tri_hash = Hash::new(radius);
    for (i, bb) in a_tris.iter().enumerate() {
        a_tri_hash.insert(i, bb);
    }
    let mut b_edge_hash = Hash::new(radius);
    for (i, bb) in b_edges.iter().enumerate() {
        b_edge_hash.insert(i, bb);
    }

    let mut out = CandidatePairs::default();
    let mut scratch = Vec::new();
    for (v, p) in a_positions.iter().enumerate() {
        let pb = Aabb { lo: *p, hi: *p };
        b_tri_hash.query(&pb, &mut scratch);
        for &t in scratch.iter() {
            if pb.distance(&b_tris[t]) <= radius {
                out.vert_a_tri_b.push((v, t));
            }
        }
    }
    for (v, p) in b_positions.iter().enumerate() {
        let pb = Aabb { lo: *p, hi: *p };
        a_tri_hash.query(&pb, &mut scratch);
        for &t in scratch.iter() {
            if pb.distance(&a_tris[t]) <= radius {
                out.vert_b_tri_a.push((v, t));
            }
        }
    }
    for (e, eb) in a_edges.iter().enumerate() {
        b_edge_hash.query(eb, &mut scratch);
        for &f in scratch.iter() {
            if eb.distance(&b_edges[f]) <= radius {
                out.edge_edge.push((e, f));
            }
        }
    }
    out.vert_a_tri_b.sort_unstable();
    out.vert_b_tri_a.sort_unstable();
    out.edge_edge.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::distance::{edge_edge_distance, point_triangle_distance};
    use crate::geometry::box_shell;

    fn shifted(m: &SurfaceMesh, dx: Vec3) -> Vec<Vec3> {
        m.vertices.iter().map(|v| v + dx).collect()
    }

    #[test]
    fn separated_meshes_no_candidates() {
        let a = box_shell(Vec3::new(0.01, 0.01, 0.01));
        let b = box_shell(Vec3::new(0.01, 0.01, 0.01));
        let r = 1e-3;
        let pairs = broad_phase(
            &a,
            &a.vertices,
            &b,
            &shifted(&b, Vec3::new(0.05, 0.0, 0.0)),
            r,
        );
        assert!(pairs.is_empty());
    }

    #[test]
    fn overlapping_meshes_all_pairs_present() {
        let a = box_shell(Vec3::new(0.004, 0.004, 0.004));
        let b = a.clone();
        let r = 0.02; // larger than the box: everything is within radius
        let pairs = broad_phase(&a, &a.vertices, &b, &b.vertices, r);
        assert_eq!(
            pairs.vert_a_tri_b.len(),
            a.vertices.len() * b.triangles.len()
        );
        assert_eq!(
            pairs.vert_b_tri_a.len(),
            b.vertices.len() * a.triangles.len()
        );
        assert_eq!(pairs.edge_edge.len(), a.edges.len() * b.edges.len());
    }

    #[test]
    fn superset_of_brute_force() {
        let a = box_shell(Vec3::new(0.01, 0.008, 0.006));
        let b = box_shell(Vec3::new(0.006, 0.01, 0.008));
        let bx = shifted(&b, Vec3::new(0.009, 0.002, 0.003));
        let r = 2.5e-3;
        let pairs = broad_phase(&a, &a.vertices, &b, &bx, r);

        for (v, p) in a.vertices.iter().enumerate() {
            for (t, tri) in b.triangles.iter().enumerate() {
                let d = point_triangle_distance(p, &[bx[tri[0]], bx[tri[1]], bx[tri[2]]]);
                if d <= r {
                    assert!(
                        pairs.vert_a_tri_b.binary_search(&(v, t)).is_ok(),
                        "missing vertex-triangle pair ({v}, {t}) at distance {d}"
                    );
                }
            }
        }
        for (e, ea) in a.edges.iter().enumerate() {
            for (f, eb) in b.edges.iter().enumerate() {
                let d = edge_edge_distance(
                    &a.vertices[ea[0]],
                    &a.vertices[ea[1]],
                    &bx[eb[0]],
                    &bx[eb[1]],
                );
                if d <= r {
                    assert!(
                        pairs.edge_edge.binary_search(&(e, f)).is_ok(),
                        "missing edge pair ({e}, {f}) at distance {d}"
                    );
                }
            }
        }
    }
}
