//! Assembled energy term output.

use crate::math::Vec3;

/// Value, per-node gradient, and per-node diagonal Hessian entries of one
/// energy term (or a sum of terms).
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub value: f64,
    pub gradient: Vec<Vec3>,
    pub diag_hessian: Vec<Vec3>,
}

impl EnergyReport {
    pub fn zeros(node_count: usize) -> Self {
        EnergyReport {
            value: 0.0,
            gradient: vec![Vec3::zeros(); node_count],
            diag_hessian: vec![Vec3::zeros(); node_count],
        }
    }

    pub fn reset(&mut self) {
        self.value = 0.0;
        for g in self.gradient.iter_mut() {
            g.fill(0.0);
        }
        for d in self.diag_hessian.iter_mut() {
            d.fill(0.0);
        }
    }

    /// Accumulate another term of the same shape.
    pub fn add(&mut self, other: &EnergyReport) {
        debug_assert_eq!(self.gradient.len(), other.gradient.len());
        self.value += other.value;
        for (a, b) in self.gradient.iter_mut().zip(&other.gradient) {
            *a += b;
        }
        for (a, b) in self.diag_hessian.iter_mut().zip(&other.diag_hessian) {
            *a += b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.iter().all(|v| v.is_finite()))
            && self
                .diag_hessian
                .iter()
                .all(|d| d.iter().all(|v| v.is_finite()))
    }
}
