//! Exact closest-point queries between contact primitives.

use crate::math::Vec3;

/// Closest point on triangle `[a, b, c]` to `p`, with barycentric weights.
///
/// Region-aware: classifies against vertex, edge, and face Voronoi regions
/// (Ericson, Real-Time Collision Detection, 5.1.5).
pub fn point_triangle_closest(p: &Vec3, tri: &[Vec3; 3]) -> (Vec3, [f64; 3]) {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;

    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, [1.0, 0.0, 0.0]);
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, [0.0, 1.0, 0.0]);
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, [0.0, 0.0, 1.0]);
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

pub fn point_triangle_distance(p: &Vec3, tri: &[Vec3; 3]) -> f64 {
    let (closest, _) = point_triangle_closest(p, tri);
    (p - closest).norm()
}

/// Closest points between segments `a0-a1` and `b0-b1`.
///
/// Returns `(s, t)` such that the closest points are `a0 + s*(a1-a0)` and
/// `b0 + t*(b1-b0)`. Degenerate/parallel cases resolve to a canonical
/// clamped minimizer (Ericson 5.1.9).
pub fn segment_segment_closest(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3) -> (f64, f64) {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let r = a0 - b0;
    let aa = d1.norm_squared();
    let ee = d2.norm_squared();
    let f = d2.dot(&r);

    if aa <= f64::EPSILON && ee <= f64::EPSILON {
        return (0.0, 0.0);
    }
    if aa <= f64::EPSILON {
        return (0.0, (f / ee).clamp(0.0, 1.0));
    }
    let c = d1.dot(&r);
    if ee <= f64::EPSILON {
        return ((-c / aa).clamp(0.0, 1.0), 0.0);
    }

    let b = d1.dot(&d2);
    let denom = aa * ee - b * b;
    let mut s = if denom > 1e-14 * aa * ee {
        ((b * f - c * ee) / denom).clamp(0.0, 1.0)
    } else {
        0.0 // parallel: canonical representative at s = 0
    };
    let mut t = (b * s + f) / ee;
    if t < 0.0 {
        t = 0.0;
        s = (-c / aa).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / aa).clamp(0.0, 1.0);
    }
    (s, t)
}

pub fn edge_edge_distance(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3) -> f64 {
    let (s, t) = segment_segment_closest(a0, a1, b0, b1);
    let pa = a0 + (a1 - a0) * s;
    let pb = b0 + (b1 - b0) * t;
    (pa - pb).norm()
}
