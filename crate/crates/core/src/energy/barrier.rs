//! Log-barrier contact potential `b(d) = -(d - dhat)^2 ln(d / dhat)`.

use crate::contact::ContactSet;
use crate::energy::{BarrierParams, EnergyReport};
use crate::error::{Error, Result};
use crate::math::Vec3;

/// Raw barrier value and first two derivatives for `d > 0`, zero at and
/// beyond `dhat`. C2 at the knot: value, slope, and curvature all vanish.
pub(crate) fn barrier_raw(d: f64, dhat: f64) -> (f64, f64, f64) {
    if d >= dhat {
        return (0.0, 0.0, 0.0);
    }
    let t = d - dhat;
    let ln = (d / dhat).ln();
    let b = -t * t * ln;
    let db = -2.0 * t * ln - t * t / d;
    let ddb = -2.0 * ln - 4.0 * t / d + t * t / (d * d);
    (b, db, ddb)
}

/// Scaled barrier `kappa * b(d)` with derivatives in `d`.
///
/// Panics on `d <= 0`: a non-positive contact distance means the simulation
/// has already interpenetrated, which step-level feasibility checks are
/// supposed to catch first.
pub fn barrier_term(d: f64, p: &BarrierParams) -> (f64, f64, f64) {
    assert!(
        d > 0.0,
        "barrier evaluated at non-positive distance {d:e}; feasibility violated"
    );
    let (b, db, ddb) = barrier_raw(d, p.dhat);
    (p.kappa * b, p.kappa * db, p.kappa * ddb)
}

/// Total barrier energy over an active set, with gradient and a positive
/// semidefinite (Gauss-Newton) diagonal: `kappa b''(d) (grad d)^2` per axis,
/// dropping the indefinite `b' Hess(d)` part.
pub fn barrier_energy(set: &ContactSet, x: &[Vec3], params: &BarrierParams) -> Result<EnergyReport> {
    let mut out = EnergyReport::zeros(x.len());
    accumulate_barrier(set, x, params, &mut out)?;
    Ok(out)
}

pub(crate) fn accumulate_barrier(
    set: &ContactSet,
    x: &[Vec3],
    params: &BarrierParams,
    out: &mut EnergyReport,
) -> Result<()> {
    for pair in &set.pairs {
        let eval = pair.evaluate(x);
        if eval.d <= 0.0 {
            return Err(Error::FeasibilityViolation(format!(
                "pair {:?} {:?} reached distance {:e}",
                pair.kind, pair.ids, eval.d
            )));
        }
        if eval.d >= params.dhat {
            continue;
        }
        let (b, db, ddb) = barrier_raw(eval.d, params.dhat);
        out.value += params.kappa * b;
        let ddb = ddb.max(0.0);
        for i in 0..eval.count {
            let node = eval.nodes[i];
            let w = eval.weights[i];
            out.gradient[node] += params.kappa * db * w * eval.normal;
            let gn = w * eval.normal;
            out.diag_hessian[node] += params.kappa * ddb * gn.component_mul(&gn);
        }
    }
    Ok(())
}

/// Gauss-Newton `p^T H p` of the barrier term along direction `p`.
pub fn quadform_barrier(set: &ContactSet, x: &[Vec3], params: &BarrierParams, p: &[Vec3]) -> f64 {
    let mut q = 0.0;
    for pair in &set.pairs {
        let eval = pair.evaluate(x);
        if eval.d <= 0.0 || eval.d >= params.dhat {
            continue;
        }
        let (_, _, ddb) = barrier_raw(eval.d, params.dhat);
        let ddb = ddb.max(0.0);
        let mut dd = 0.0; // directional derivative of d along p
        for i in 0..eval.count {
            dd += eval.weights[i] * eval.normal.dot(&p[eval.nodes[i]]);
        }
        q += params.kappa * ddb * dd * dd;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: BarrierParams = BarrierParams {
        dhat: 1.0,
        kappa: 1.0,
    };

    #[test]
    fn zero_at_activation_boundary() {
        let (b, db, ddb) = barrier_term(1.0, &P);
        assert_eq!(b, 0.0);
        assert_eq!(db, 0.0);
        assert_eq!(ddb, 0.0);
        // C2: approaching the knot from below everything tends to zero.
        let (b, db, ddb) = barrier_term(1.0 - 1e-8, &P);
        assert!(b.abs() < 1e-14);
        assert!(db.abs() < 1e-6);
        assert!(ddb.abs() < 1e-6);
    }

    #[test]
    fn half_dhat_value() {
        // b(0.5) = -(0.5 - 1)^2 ln(0.5) = 0.25 ln 2
        let (b, _, _) = barrier_term(0.5, &P);
        assert!((b - 0.25 * std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let d = 0.3;
        let h = 1e-7;
        let (_, db, ddb) = barrier_term(d, &P);
        let fd = (barrier_term(d + h, &P).0 - barrier_term(d - h, &P).0) / (2.0 * h);
        assert!((fd - db).abs() <= 1e-6 * db.abs());
        let fd2 = (barrier_term(d + h, &P).1 - barrier_term(d - h, &P).1) / (2.0 * h);
        assert!((fd2 - ddb).abs() <= 1e-6 * ddb.abs());
    }

    #[test]
    fn monotone_decreasing_and_unbounded() {
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let d = k as f64 / 100.0;
            let (b, db, _) = barrier_term(d, &P);
            assert!(b < prev);
            assert!(db < 0.0, "b' must be negative on (0, dhat)");
            prev = b;
        }
        let near = barrier_term(1e-8, &P).0;
        let far = barrier_term(1e-4, &P).0;
        assert!(near > far);
    }

    #[test]
    fn scaled_by_kappa() {
        let p = BarrierParams {
            dhat: 1e-3,
            kappa: 1e5,
        };
        let (b1, _, _) = barrier_term(5e-4, &p);
        let raw = barrier_raw(5e-4, 1e-3).0;
        assert_eq!(b1, 1e5 * raw);
    }

    #[test]
    #[should_panic(expected = "feasibility")]
    fn non_positive_distance_panics() {
        barrier_term(0.0, &P);
    }
}
