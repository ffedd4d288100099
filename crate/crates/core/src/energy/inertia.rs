//! Inertia potential `1/2 (x - xhat)^T M (x - xhat)` with lumped masses.

use crate::energy::EnergyReport;
use crate::math::Vec3;

/// Gradient is `M (x - xhat)`, diagonal is the lumped mass per node.
pub fn inertia_energy(x: &[Vec3], xhat: &[Vec3], masses: &[f64]) -> EnergyReport {
    debug_assert_eq!(x.len(), xhat.len());
    debug_assert_eq!(x.len(), masses.len());
    let mut out = EnergyReport::zeros(x.len());
    accumulate_inertia(x, xhat, masses, &mut out);
    out
}

pub(crate) fn accumulate_inertia(
    x: &[Vec3],
    xhat: &[Vec3],
    masses: &[f64],
    out: &mut EnergyReport,
) {
    for i in 0..x.len() {
        let diff = x[i] - xhat[i];
        let m = masses[i];
        out.value += 0.5 * m * diff.norm_squared();
        out.gradient[i] += m * diff;
        out.diag_hessian[i] += Vec3::repeat(m);
    }
}

/// `p^T M p` for the inertia term.
pub fn quadform_inertia(masses: &[f64], p: &[Vec3]) -> f64 {
    masses
        .iter()
        .zip(p)
        .map(|(m, pi)| m * pi.norm_squared())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_prediction() {
        let x = vec![Vec3::new(0.1, 0.2, 0.3); 4];
        let masses = vec![2.0; 4];
        let r = inertia_energy(&x, &x, &masses);
        assert_eq!(r.value, 0.0);
        assert!(r.gradient.iter().all(|g| g.norm() == 0.0));
    }

    #[test]
    fn single_node_arithmetic() {
        let x = vec![Vec3::new(1.0, 0.0, 0.0)];
        let xhat = vec![Vec3::zeros()];
        let r = inertia_energy(&x, &xhat, &[2.0]);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.gradient[0], Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(r.diag_hessian[0], Vec3::repeat(2.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = vec![
            Vec3::new(0.01, -0.02, 0.005),
            Vec3::new(-0.004, 0.013, 0.02),
        ];
        let xhat = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.001, 0.01, 0.019)];
        let masses = [0.7, 1.3];
        let r = inertia_energy(&x, &xhat, &masses);
        let h = 1e-6 * 0.02;
        for i in 0..x.len() {
            for a in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i][a] += h;
                xm[i][a] -= h;
                let fd = (inertia_energy(&xp, &xhat, &masses).value
                    - inertia_energy(&xm, &xhat, &masses).value)
                    / (2.0 * h);
                let g = r.gradient[i][a];
                assert!(
                    (fd - g).abs() <= 1e-8 * g.abs().max(1e-12),
                    "node {i} axis {a}: fd {fd} vs {g}"
                );
            }
        }
    }

    #[test]
    fn quadform_matches_definition() {
        let masses = [0.5, 2.0];
        let p = [Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.0, 1.0)];
        assert_eq!(quadform_inertia(&masses, &p), 0.5 * 14.0 + 2.0 * 2.0);
    }
}
