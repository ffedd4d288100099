//! Lagged friction dissipation potential
//! `D(x) = mu_f sum_k lambda_k f(|T_k^T dx_k|)`.

use nalgebra::Matrix2;

use crate::contact::ContactSet;
use crate::energy::{EnergyReport, FrictionParams};
use crate::math::{Vec2, Vec3};

/// C1 mollifier of `|s|`:
/// `f(s) = -s^3/(3 e^2) + s^2/e + e/3` below the knot `e`, `s` above.
pub fn friction_mollifier(s: f64, eps_v: f64) -> (f64, f64) {
    debug_assert!(s >= 0.0);
    if s < eps_v {
        let value = -s * s * s / (3.0 * eps_v * eps_v) + s * s / eps_v + eps_v / 3.0;
        let deriv = -s * s / (eps_v * eps_v) + 2.0 * s / eps_v;
        (value, deriv)
    } else {
        (s, 1.0)
    }
}

/// Second derivative of the mollifier (zero on the linear branch).
fn mollifier_curvature(s: f64, eps_v: f64) -> f64 {
    if s < eps_v {
        -2.0 * s / (eps_v * eps_v) + 2.0 / eps_v
    } else {
        0.0
    }
}

/// 2x2 Hessian of `f(|u|)` in tangent coordinates; PSD for this mollifier.
fn tangent_hessian(u: &Vec2, s: f64, fp: &FrictionParams) -> Matrix2<f64> {
    if s < 1e-14 * fp.eps_v {
        return Matrix2::identity() * (2.0 / fp.eps_v);
    }
    let uhat = u / s;
    let f2 = mollifier_curvature(s, fp.eps_v);
    let (_, f1) = friction_mollifier(s, fp.eps_v);
    let outer = uhat * uhat.transpose();
    outer * f2 + (Matrix2::identity() - outer) * (f1 / s)
}

/// Friction energy over an active set with frozen anchors.
///
/// Per pair, the step's relative tangential slip is
/// `T^T (sum_i w_i (x_i - x_t_i) - rigid_step_disp)` using the anchor
/// weights, normal force, and tangent basis frozen at the step start.
pub fn friction_energy(
    set: &ContactSet,
    x: &[Vec3],
    x_t: &[Vec3],
    fp: &FrictionParams,
) -> EnergyReport {
    let mut out = EnergyReport::zeros(x.len());
    accumulate_friction(set, x, x_t, fp, &mut out);
    out
}

pub(crate) fn accumulate_friction(
    set: &ContactSet,
    x: &[Vec3],
    x_t: &[Vec3],
    fp: &FrictionParams,
    out: &mut EnergyReport,
) {
    if fp.mu_f == 0.0 {
        return;
    }
    for pair in &set.pairs {
        if pair.lambda_n <= 0.0 {
            continue;
        }
        let scale = fp.mu_f * pair.lambda_n;
        let mut slip3 = -pair.rigid_step_disp;
        for i in 0..pair.anchor_count {
            let node = pair.anchor_nodes[i];
            slip3 += pair.anchor_weights[i] * (x[node] - x_t[node]);
        }
        let u: Vec2 = pair.tangent.transpose() * slip3;
        let s = u.norm();
        let (value, deriv) = friction_mollifier(s, fp.eps_v);
        out.value += scale * value;

        let grad3: Vec3 = if s > 1e-300 {
            pair.tangent * (u * (deriv / s)) * scale
        } else {
            Vec3::zeros()
        };
        let h2 = tangent_hessian(&u, s, fp) * scale;
        let h3 = pair.tangent * h2 * pair.tangent.transpose();
        for i in 0..pair.anchor_count {
            let node = pair.anchor_nodes[i];
            let w = pair.anchor_weights[i];
            out.gradient[node] += w * grad3;
            out.diag_hessian[node] +=
                w * w * Vec3::new(h3[(0, 0)].max(0.0), h3[(1, 1)].max(0.0), h3[(2, 2)].max(0.0));
        }
    }
}

/// Gauss-Newton `p^T H p` of the friction term.
pub fn quadform_friction(set: &ContactSet, fp: &FrictionParams, x: &[Vec3], x_t: &[Vec3], p: &[Vec3]) -> f64 {
    if fp.mu_f == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for pair in &set.pairs {
        if pair.lambda_n <= 0.0 {
            continue;
        }
        let mut slip3 = -pair.rigid_step_disp;
        let mut dir3 = Vec3::zeros();
        for i in 0..pair.anchor_count {
            let node = pair.anchor_nodes[i];
            slip3 += pair.anchor_weights[i] * (x[node] - x_t[node]);
            dir3 += pair.anchor_weights[i] * p[node];
        }
        let u: Vec2 = pair.tangent.transpose() * slip3;
        let du: Vec2 = pair.tangent.transpose() * dir3;
        let h2 = tangent_hessian(&u, u.norm(), fp);
        q += fp.mu_f * pair.lambda_n * du.dot(&(h2 * du));
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{tangent_basis, ContactKind, ContactPair, PairGeometry};

    fn single_pair_set(lambda: f64, normal: Vec3, rigid_disp: Vec3) -> ContactSet {
        let pair = ContactPair {
            kind: ContactKind::PointTriangle,
            ids: (0, 0),
            geometry: PairGeometry::DefVertexRigidTri {
                vertex: 0,
                tri: [
                    Vec3::new(-1.0, -1.0, -0.001),
                    Vec3::new(1.0, -1.0, -0.001),
                    Vec3::new(0.0, 1.0, -0.001),
                ],
            },
            d: 1e-3,
            lambda_n: lambda,
            normal,
            tangent: tangent_basis(&normal),
            anchor_nodes: [0, 0, 0],
            anchor_weights: [1.0, 0.0, 0.0],
            anchor_count: 1,
            rigid_point: Vec3::zeros(),
            rigid_step_disp: rigid_disp,
        };
        ContactSet {
            pairs: vec![pair],
            dhat: 1e-3,
        }
    }

    #[test]
    fn mollifier_at_zero_and_knot() {
        let e = 1e-5;
        let (f0, d0) = friction_mollifier(0.0, e);
        assert_eq!(f0, e / 3.0);
        assert_eq!(d0, 0.0);
        let below = friction_mollifier(e - 1e-16, e);
        let above = friction_mollifier(e, e);
        assert!((below.0 - above.0).abs() < 1e-10);
        assert!((below.1 - above.1).abs() < 1e-10);
        assert_eq!(above.0, e);
        assert_eq!(above.1, 1.0);
        assert_eq!(friction_mollifier(2.0 * e, e), (2.0 * e, 1.0));
    }

    #[test]
    fn zero_slip_energy_and_gradient() {
        let fp = FrictionParams {
            eps_v: 1e-5,
            mu_f: 0.8,
        };
        let set = single_pair_set(2.0, Vec3::z(), Vec3::zeros());
        let x = vec![Vec3::new(0.0, 0.0, 1e-3)];
        let out = friction_energy(&set, &x, &x, &fp);
        assert!((out.value - 0.8 * 2.0 * fp.eps_v / 3.0).abs() < 1e-18);
        assert_eq!(out.gradient[0].norm(), 0.0);
    }

    #[test]
    fn sliding_branch_linear() {
        let fp = FrictionParams {
            eps_v: 1e-5,
            mu_f: 0.8,
        };
        let lambda = 2.0;
        let set = single_pair_set(lambda, Vec3::z(), Vec3::zeros());
        let x_t = vec![Vec3::new(0.0, 0.0, 1e-3)];
        let slide = 3e-4; // far beyond eps_v
        let x = vec![Vec3::new(slide, 0.0, 1e-3)];
        let out = friction_energy(&set, &x, &x_t, &fp);
        assert!((out.value - fp.mu_f * lambda * slide).abs() < 1e-12);
        let g = out.gradient[0];
        assert!((g.norm() - fp.mu_f * lambda).abs() < 1e-9);
        assert!(g.x > 0.0, "gradient opposes further sliding energy decrease");
        assert!(g.z.abs() < 1e-12, "no normal component");
    }

    #[test]
    fn rigid_motion_offsets_slip() {
        let fp = FrictionParams {
            eps_v: 1e-5,
            mu_f: 1.0,
        };
        // Rigid moved tangentially with the node: no relative slip.
        let motion = Vec3::new(2e-4, 0.0, 0.0);
        let set = single_pair_set(1.0, Vec3::z(), motion);
        let x_t = vec![Vec3::new(0.0, 0.0, 1e-3)];
        let x = vec![x_t[0] + motion];
        let out = friction_energy(&set, &x, &x_t, &fp);
        assert!((out.value - fp.eps_v / 3.0).abs() < 1e-18);
        assert_eq!(out.gradient[0].norm(), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let fp = FrictionParams {
            eps_v: 1e-5,
            mu_f: 0.7,
        };
        let normal = Vec3::new(0.2, -0.3, 1.0).normalize();
        let set = single_pair_set(1.7, normal, Vec3::new(1e-6, -2e-6, 0.0));
        let x_t = vec![Vec3::new(0.0, 0.0, 1e-3)];
        for slip in [2e-6, 8e-6, 5e-5] {
            let x = vec![x_t[0] + Vec3::new(slip, 0.5 * slip, 0.0)];
            let out = friction_energy(&set, &x, &x_t, &fp);
            let gnorm = out.gradient[0].norm();
            let h = 1e-9;
            for a in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[0][a] += h;
                xm[0][a] -= h;
                let op = friction_energy(&set, &xp, &x_t, &fp);
                let om = friction_energy(&set, &xm, &x_t, &fp);
                let fd = (op.value - om.value) / (2.0 * h);
                assert!(
                    (fd - out.gradient[0][a]).abs() <= 1e-5 * gnorm.max(1e-12),
                    "slip {slip} axis {a}: fd {fd} vs {}",
                    out.gradient[0][a]
                );
            }
        }
    }

    #[test]
    fn diag_and_quadform_nonnegative() {
        let fp = FrictionParams {
            eps_v: 1e-5,
            mu_f: 0.7,
        };
        let set = single_pair_set(1.0, Vec3::z(), Vec3::zeros());
        let x_t = vec![Vec3::new(0.0, 0.0, 1e-3)];
        let x = vec![x_t[0] + Vec3::new(4e-6, 0.0, 0.0)];
        let out = friction_energy(&set, &x, &x_t, &fp);
        assert!(out.diag_hessian[0].iter().all(|&d| d >= 0.0));
        let p = vec![Vec3::new(0.3, -0.8, 0.1)];
        assert!(quadform_friction(&set, &fp, &x, &x_t, &p) >= 0.0);
    }
}
