//! Contact detection between the deformable surface and rigid shells,
//! producing the active barrier pair set.

mod broad;
mod distance;

pub use broad::{broad_phase, CandidatePairs};
pub use distance::{
    edge_edge_distance, point_triangle_closest, point_triangle_distance, segment_segment_closest,
};

use nalgebra::Matrix3x2;

use crate::energy::{barrier_term, BarrierParams};
use crate::error::{Error, Result};
use crate::geometry::SurfaceMesh;
use crate::math::{Pose, Vec3};

/// Contact primitive pairing, deformable side first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ContactKind {
    /// Deformable surface vertex against a rigid triangle.
    PointTriangle,
    /// Rigid vertex against a deformable surface triangle.
    TrianglePoint,
    /// Deformable surface edge against a rigid edge.
    EdgeEdge,
}

/// Geometry needed to re-evaluate one pair's distance during a solve.
/// Rigid-side positions are frozen at the posed configuration.
#[derive(Debug, Clone)]
pub enum PairGeometry {
    DefVertexRigidTri { vertex: usize, tri: [Vec3; 3] },
    RigidVertexDefTri { point: Vec3, tri: [usize; 3] },
    DefEdgeRigidEdge { edge: [usize; 2], rigid: [Vec3; 2] },
}

/// Fresh evaluation of a pair at given deformable positions.
///
/// `d = |a(x) - b|` with `a` the deformable-side closest point
/// `sum w_i x_nodes_i` and `normal` the unit vector from the rigid side
/// toward the deformable side, so `grad_{x_i} d = w_i * normal`.
#[derive(Debug, Clone, Copy)]
pub struct PairEval {
    pub d: f64,
    pub normal: Vec3,
    pub nodes: [usize; 3],
    pub weights: [f64; 3],
    pub count: usize,
    /// Rigid-side contact point (world).
    pub rigid_point: Vec3,
}

/// One active barrier pair with its lagged friction anchor.
#[derive(Debug, Clone)]
pub struct ContactPair {
    pub kind: ContactKind,
    /// (deformable primitive index, rigid primitive index).
    pub ids: (usize, usize),
    pub geometry: PairGeometry,
    /// Distance at creation.
    pub d: f64,
    /// Lagged normal force magnitude, set by `build_friction_anchors`.
    pub lambda_n: f64,
    /// Contact normal at anchor time (rigid toward deformable).
    pub normal: Vec3,
    /// Tangent-plane basis, columns orthonormal and orthogonal to `normal`.
    pub tangent: Matrix3x2<f64>,
    /// Deformable node ids and barycentric weights at anchor time.
    pub anchor_nodes: [usize; 3],
    pub anchor_weights: [f64; 3],
    pub anchor_count: usize,
    /// Rigid-side contact point at detection (world).
    pub rigid_point: Vec3,
    /// Displacement of the rigid-side contact point over the step.
    pub rigid_step_disp: Vec3,
}

impl ContactPair {
    /// Re-solve the closest points at current positions (frozen topology).
    pub fn evaluate(&self, x: &[Vec3]) -> PairEval {
        match &self.geometry {
            PairGeometry::DefVertexRigidTri { vertex, tri } => {
                let p = x[*vertex];
                let (closest, _) = point_triangle_closest(&p, tri);
                let u = p - closest;
                let d = u.norm();
                PairEval {
                    d,
                    normal: if d > 0.0 { u / d } else { Vec3::zeros() },
                    nodes: [*vertex, 0, 0],
                    weights: [1.0, 0.0, 0.0],
                    count: 1,
                    rigid_point: closest,
                }
            }
            PairGeometry::RigidVertexDefTri { point, tri } => {
                let pts = [x[tri[0]], x[tri[1]], x[tri[2]]];
                let (closest, bary) = point_triangle_closest(point, &pts);
                let u = closest - point;
                let d = u.norm();
                PairEval {
                    d,
                    normal: if d > 0.0 { u / d } else { Vec3::zeros() },
                    nodes: *tri,
                    weights: bary,
                    count: 3,
                    rigid_point: *point,
                }
            }
            PairGeometry::DefEdgeRigidEdge { edge, rigid } => {
                let (a0, a1) = (x[edge[0]], x[edge[1]]);
                let (s, t) = segment_segment_closest(&a0, &a1, &rigid[0], &rigid[1]);
                let pa = a0 + (a1 - a0) * s;
                let pb = rigid[0] + (rigid[1] - rigid[0]) * t;
                let u = pa - pb;
                let d = u.norm();
                PairEval {
                    d,
                    normal: if d > 0.0 { u / d } else { Vec3::zeros() },
                    nodes: [edge[0], edge[1], 0],
                    weights: [1.0 - s, s, 0.0],
                    count: 2,
                    rigid_point: pb,
                }
            }
        }
    }

    /// Deformable-side contact point at anchor weights.
    pub fn anchored_point(&self, x: &[Vec3]) -> Vec3 {
        let mut p = Vec3::zeros();
        for i in 0..self.anchor_count {
            p += self.anchor_weights[i] * x[self.anchor_nodes[i]];
        }
        p
    }
}

/// Active constraint set for one solve; pairs sorted by `(kind, ids)`.
#[derive(Debug, Clone, Default)]
pub struct ContactSet {
    pub pairs: Vec<ContactPair>,
    pub dhat: f64,
}

impl ContactSet {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Minimum fresh distance over all pairs, +inf when empty.
    pub fn min_distance(&self, x: &[Vec3]) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.evaluate(x).d)
            .fold(f64::INFINITY, f64::min)
    }

    /// Record each pair's rigid contact point motion over the coming step.
    /// `prev` and `current` are the rigid poses at the step start and after
    /// the scripted move; the pair's rigid point was detected at `current`.
    pub fn set_rigid_step_motion(&mut self, prev: &Pose, current: &Pose) {
        for pair in &mut self.pairs {
            let local = current.apply_inverse(&pair.rigid_point);
            pair.rigid_step_disp = pair.rigid_point - prev.apply(&local);
        }
    }
}

/// Exact distances on broad-phase candidates; keeps pairs closer than
/// `dhat`, deduplicates vertex pairs to their minimal-distance triangle, and
/// keeps only interior-interior edge pairs (endpoint cases are covered by
/// vertex pairs).
///
/// Both position slices are surface-local (index i is vertex i of the mesh).
/// Output pairs address tet-mesh nodes through `deformable.volume_map`, so
/// `ContactPair::evaluate` takes full volume positions.
pub fn narrow_phase(
    candidates: &CandidatePairs,
    deformable: &SurfaceMesh,
    deformable_positions: &[Vec3],
    rigid: &SurfaceMesh,
    rigid_positions: &[Vec3],
    dhat: f64,
) -> Result<ContactSet> {
    let mut pairs: Vec<ContactPair> = Vec::new();
    let feasibility = |d: f64, what: String| -> Result<()> {
        if d <= 0.0 {
            Err(Error::FeasibilityViolation(format!(
                "{what} at distance {d:e}"
            )))
        } else {
            Ok(())
        }
    };

    // Deformable vertex vs rigid triangle: keep min-distance triangle per vertex.
    let mut best_for_vertex: Vec<Option<(f64, usize)>> = vec![None; deformable.vertices.len()];
    for &(v, t) in &candidates.vert_a_tri_b {
        let p = deformable_positions[v];
        let tri = rigid.triangles[t];
        let pts = [
            rigid_positions[tri[0]],
            rigid_positions[tri[1]],
            rigid_positions[tri[2]],
        ];
        let (closest, _) = point_triangle_closest(&p, &pts);
        let d = (p - closest).norm();
        if d < dhat {
            feasibility(d, format!("deformable vertex {v} vs rigid triangle {t}"))?;
            let better = match best_for_vertex[v] {
                None => true,
                Some((bd, bt)) => d < bd || (d == bd && t < bt),
            };
            if better {
                best_for_vertex[v] = Some((d, t));
            }
        }
    }
    for (v, best) in best_for_vertex.iter().enumerate() {
        if let Some((d, t)) = best {
            let tri = rigid.triangles[*t];
            let node = deformable.volume_map[v];
            let pts = [
                rigid_positions[tri[0]],
                rigid_positions[tri[1]],
                rigid_positions[tri[2]],
            ];
            let (closest, _) = point_triangle_closest(&deformable_positions[v], &pts);
            pairs.push(make_pair(
                ContactKind::PointTriangle,
                (v, *t),
                PairGeometry::DefVertexRigidTri { vertex: node, tri: pts },
                *d,
                closest,
            ));
        }
    }

    // Rigid vertex vs deformable triangle: keep min-distance triangle per vertex.
    let mut best_for_rigid: Vec<Option<(f64, usize)>> = vec![None; rigid.vertices.len()];
    for &(v, t) in &candidates.vert_b_tri_a {
        let p = rigid_positions[v];
        let tri = deformable.triangles[t];
        let pts = [
            deformable_positions[tri[0]],
            deformable_positions[tri[1]],
            deformable_positions[tri[2]],
        ];
        let (closest, _) = point_triangle_closest(&p, &pts);
        let d = (closest - p).norm();
        if d < dhat {
            feasibility(d, format!("rigid vertex {v} vs deformable triangle {t}"))?;
            let better = match best_for_rigid[v] {
                None => true,
                Some((bd, bt)) => d < bd || (d == bd && t < bt),
            };
            if better {
                best_for_rigid[v] = Some((d, t));
            }
        }
    }
    for (v, best) in best_for_rigid.iter().enumerate() {
        if let Some((d, t)) = best {
            let tri = deformable.triangles[*t];
            pairs.push(make_pair(
                ContactKind::TrianglePoint,
                (*t, v),
                PairGeometry::RigidVertexDefTri {
                    point: rigid_positions[v],
                    tri: [
                        deformable.volume_map[tri[0]],
                        deformable.volume_map[tri[1]],
                        deformable.volume_map[tri[2]],
                    ],
                },
                *d,
                rigid_positions[v],
            ));
        }
    }

    // Edge-edge, interior closest points only.
    const INTERIOR: f64 = 1e-9;
    for &(e, f) in &candidates.edge_edge {
        let ea = deformable.edges[e];
        let eb = rigid.edges[f];
        let a0 = deformable_positions[ea[0]];
        let a1 = deformable_positions[ea[1]];
        let b0 = rigid_positions[eb[0]];
        let b1 = rigid_positions[eb[1]];
        let (s, t) = segment_segment_closest(&a0, &a1, &b0, &b1);
        if s <= INTERIOR || s >= 1.0 - INTERIOR || t <= INTERIOR || t >= 1.0 - INTERIOR {
            continue;
        }
        let pb = b0 + (b1 - b0) * t;
        let d = ((a0 + (a1 - a0) * s) - pb).norm();
        if d < dhat {
            feasibility(d, format!("deformable edge {e} vs rigid edge {f}"))?;
            pairs.push(make_pair(
                ContactKind::EdgeEdge,
                (e, f),
                PairGeometry::DefEdgeRigidEdge {
                    edge: [deformable.volume_map[ea[0]], deformable.volume_map[ea[1]]],
                    rigid: [b0, b1],
                },
                d,
                pb,
            ));
        }
    }

    pairs.sort_by(|a, b| (a.kind, a.ids).cmp(&(b.kind, b.ids)));
    Ok(ContactSet { pairs, dhat })
}

fn make_pair(
    kind: ContactKind,
    ids: (usize, usize),
    geometry: PairGeometry,
    d: f64,
    rigid_point: Vec3,
) -> ContactPair {
    ContactPair {
        kind,
        ids,
        geometry,
        d,
        lambda_n: 0.0,
        normal: Vec3::zeros(),
        tangent: Matrix3x2::zeros(),
        anchor_nodes: [0; 3],
        anchor_weights: [0.0; 3],
        anchor_count: 0,
        rigid_point,
        rigid_step_disp: Vec3::zeros(),
    }
}

/// Freeze friction anchors at the step start: lagged normal force
/// `lambda = max(0, -kappa b'(d))`, contact normal, and an orthonormal
/// tangent basis.
pub fn build_friction_anchors(
    mut set: ContactSet,
    x_t: &[Vec3],
    bp: &BarrierParams,
) -> ContactSet {
    for pair in &mut set.pairs {
        let eval = pair.evaluate(x_t);
        let (_, db, _) = barrier_term(eval.d, bp);
        pair.lambda_n = (-db).max(0.0);
        pair.d = eval.d;
        pair.rigid_point = eval.rigid_point;
        pair.normal = eval.normal;
        pair.tangent = tangent_basis(&eval.normal);
        pair.anchor_nodes = eval.nodes;
        pair.anchor_weights = eval.weights;
        pair.anchor_count = eval.count;
    }
    set
}

/// Orthonormal 3x2 basis spanning the plane orthogonal to unit `n`.
pub fn tangent_basis(n: &Vec3) -> Matrix3x2<f64> {
    let helper = if n.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let t1 = helper.cross(n).normalize();
    let t2 = n.cross(&t1);
    Matrix3x2::from_columns(&[t1, t2])
}
