//! Preconditioned Dai-Kou conjugate gradient direction and the analytical
//! step bound that replaces collision-detection line search.

use crate::math::{dot, inf_norm};

/// Preconditioned Dai-Kou search direction.
///
/// With history `(g_prev, p_prev)`:
///
/// ```text
/// y = g - g_prev
/// beta = g'Py / y'p  -  (y'Py / y'p) (p'g / y'p)
/// p_next = -Pg + beta p_prev
/// ```
///
/// First iteration (no history) returns `-Pg`. A degenerate curvature
/// denominator `|y'p| < 1e-30 * scale` restarts with `beta = 0`.
pub fn dk_direction(
    g: &[f64],
    precond: &[f64],
    history: Option<(&[f64], &[f64])>,
) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    dk_direction_into(g, precond, history, &mut out);
    out
}

pub fn dk_direction_into(
    g: &[f64],
    precond: &[f64],
    history: Option<(&[f64], &[f64])>,
    out: &mut [f64],
) {
    debug_assert_eq!(g.len(), precond.len());
    debug_assert_eq!(g.len(), out.len());
    let beta = match history {
        None => 0.0,
        Some((g_prev, p_prev)) => {
            debug_assert_eq!(g.len(), g_prev.len());
            let mut y_dot_p = 0.0;
            let mut g_p_y = 0.0; // g' P y
            let mut y_p_y = 0.0; // y' P y
            let mut p_dot_g = 0.0;
            let mut y_inf: f64 = 0.0;
            for i in 0..g.len() {
                let y = g[i] - g_prev[i];
                y_dot_p += y * p_prev[i];
                g_p_y += g[i] * precond[i] * y;
                y_p_y += y * precond[i] * y;
                p_dot_g += p_prev[i] * g[i];
                y_inf = y_inf.max(y.abs());
            }
            let scale = y_inf * inf_norm(p_prev) * g.len() as f64;
            if y_dot_p.abs() < 1e-30 * scale.max(f64::MIN_POSITIVE) {
                0.0
            } else {
                g_p_y / y_dot_p - (y_p_y / y_dot_p) * (p_dot_g / y_dot_p)
            }
        }
    };
    match history {
        Some((_, p_prev)) if beta != 0.0 => {
            for i in 0..g.len() {
                out[i] = -precond[i] * g[i] + beta * p_prev[i];
            }
        }
        _ => {
            for i in 0..g.len() {
                out[i] = -precond[i] * g[i];
            }
        }
    }
}

/// Step-size decision for one inner iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// Zero direction: the iterate is stationary.
    Converged,
    Alpha {
        alpha: f64,
        /// True when the barrier-distance cap was the binding constraint.
        capped: bool,
    },
}

/// Quadratic-model step with the analytical cap `dhat / (2 |p|_inf)`.
///
/// `alpha_bar = -g'p / quadform`; non-positive curvature falls back to the
/// cap. The returned alpha is nudged down by ulps until
/// `alpha * |p|_inf <= dhat/2` holds exactly in floating point, so capped
/// steps can never exceed half the barrier activation distance. A negative
/// return (ascent direction with positive curvature) signals the caller to
/// restart along steepest descent.
pub fn step_size(g: &[f64], p: &[f64], quadform: f64, dhat: f64) -> StepSize {
    let p_inf = inf_norm(p);
    if p_inf == 0.0 {
        return StepSize::Converged;
    }
    let upper = dhat / (2.0 * p_inf);
    let (mut alpha, capped) = if quadform > 0.0 {
        let bar = -dot(g, p) / quadform;
        if bar < upper {
            (bar, false)
        } else {
            (upper, true)
        }
    } else {
        (upper, true)
    };
    if alpha > 0.0 {
        while alpha * p_inf > 0.5 * dhat {
            alpha = f64::from_bits(alpha.to_bits() - 1);
        }
    }
    StepSize::Alpha { alpha, capped }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_iteration_steepest_descent() {
        let g = [1.0, -2.0, 3.0];
        let precond = [1.0, 1.0, 1.0];
        let p = dk_direction(&g, &precond, None);
        assert_eq!(p, vec![-1.0, 2.0, -3.0]);
    }

    #[test]
    fn zero_gradient_zero_direction() {
        let g = [0.0, 0.0];
        let g_prev = [1.0, -1.0];
        let p_prev = [-1.0, 1.0];
        let precond = [2.0, 0.5];
        // Both beta terms carry a factor of g or p'g with g = 0.
        let p = dk_direction(&g, &precond, Some((&g_prev, &p_prev)));
        assert_eq!(p, vec![0.0, 0.0]);
    }

    #[test]
    fn degenerate_history_restarts() {
        let g = [1.0, 1.0];
        let same = [1.0, 1.0];
        let p_prev = [0.5, -0.5];
        let precond = [1.0, 1.0];
        // y = 0 -> restart with plain preconditioned descent.
        let p = dk_direction(&g, &precond, Some((&same, &p_prev)));
        assert_eq!(p, vec![-1.0, -1.0]);
    }

    #[test]
    fn unit_hessian_exact_step() {
        let g = [0.3, -0.4, 0.5];
        let p: Vec<f64> = g.iter().map(|x| -x).collect();
        let quadform = dot(&p, &p); // H = I
        match step_size(&g, &p, quadform, 1e9) {
            StepSize::Alpha { alpha, capped } => {
                assert!((alpha - 1.0).abs() < 1e-15);
                assert!(!capped);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cap_arithmetic() {
        let g = [0.0; 1]; // irrelevant: quadform <= 0 path
        let p = [0.01];
        match step_size(&g, &p, 0.0, 1e-3) {
            StepSize::Alpha { alpha, capped } => {
                assert!(capped);
                assert!((alpha - 0.05).abs() <= 1e-17);
                assert!(alpha * 0.01 <= 0.5e-3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alpha_never_exceeds_cap() {
        let g = [-1.0, 2.0, 0.5, -0.3];
        let p = [1.0, -2.0, -0.5, 0.3];
        for quadform in [1e-8, 1e-3, 1.0, 1e6] {
            let dhat = 1e-4;
            if let StepSize::Alpha { alpha, .. } = step_size(&g, &p, quadform, dhat) {
                let upper = dhat / (2.0 * inf_norm(&p));
                assert!(alpha <= upper * (1.0 + 1e-15));
                assert!(alpha * inf_norm(&p) <= 0.5 * dhat);
            } else {
                panic!("expected a step");
            }
        }
    }

    #[test]
    fn zero_direction_is_convergence() {
        assert_eq!(step_size(&[1.0], &[0.0], 1.0, 1e-3), StepSize::Converged);
    }

    /// With exact steps on an SPD quadratic and P = I, Dai-Kou reduces to
    /// textbook conjugate gradients.
    #[test]
    fn matches_cg_on_quadratic() {
        // E(x) = 1/2 x'Ax - b'x with a fixed SPD 2x2.
        let a = [[4.0, 1.0], [1.0, 3.0]];
        let b = [1.0, 2.0];
        let grad = |x: &[f64]| {
            [
                a[0][0] * x[0] + a[0][1] * x[1] - b[0],
                a[1][0] * x[0] + a[1][1] * x[1] - b[1],
            ]
        };
        let hp = |p: &[f64]| {
            [
                a[0][0] * p[0] + a[0][1] * p[1],
                a[1][0] * p[0] + a[1][1] * p[1],
            ]
        };
        let precond = [1.0, 1.0];

        // Reference: textbook CG.
        let mut x_cg = [0.0, 0.0];
        let mut r = [b[0], b[1]]; // r = b - Ax = -grad
        let mut p_cg = r;
        let mut cg_iterates = vec![x_cg];
        for _ in 0..2 {
            let ap = hp(&p_cg);
            let alpha = dot(&r, &r) / dot(&p_cg, &ap);
            x_cg = [x_cg[0] + alpha * p_cg[0], x_cg[1] + alpha * p_cg[1]];
            let r_new = [r[0] - alpha * ap[0], r[1] - alpha * ap[1]];
            let beta = dot(&r_new, &r_new) / dot(&r, &r);
            p_cg = [r_new[0] + beta * p_cg[0], r_new[1] + beta * p_cg[1]];
            r = r_new;
            cg_iterates.push(x_cg);
        }

        // Dai-Kou with exact line search.
        let mut x = vec![0.0, 0.0];
        let mut history: Option<(Vec<f64>, Vec<f64>)> = None;
        for k in 1..=2 {
            let g = grad(&x).to_vec();
            let p = match &history {
                None => dk_direction(&g, &precond, None),
                Some((gp, pp)) => dk_direction(&g, &precond, Some((gp.as_slice(), pp.as_slice()))),
            };
            let q = dot(&p, &hp(&p));
            let alpha = match step_size(&g, &p, q, f64::INFINITY) {
                StepSize::Alpha { alpha, .. } => alpha,
                StepSize::Converged => break,
            };
            for i in 0..2 {
                x[i] += alpha * p[i];
            }
            for i in 0..2 {
                assert!(
                    (x[i] - cg_iterates[k][i]).abs() < 1e-10,
                    "iterate {k} differs: {x:?} vs {:?}",
                    cg_iterates[k]
                );
            }
            history = Some((g, p));
        }
    }
}
