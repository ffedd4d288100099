//! Shared math aliases and rigid poses.

use nalgebra::{Matrix3, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Rigid transform: `world = orientation * local + position`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            position: Vec3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn from_translation(position: Vec3) -> Self {
        Pose {
            position,
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vec3, orientation: UnitQuaternion<f64>) -> Self {
        Pose {
            position,
            orientation,
        }
    }

    pub fn apply(&self, local: &Vec3) -> Vec3 {
        self.orientation * local + self.position
    }

    pub fn apply_inverse(&self, world: &Vec3) -> Vec3 {
        self.orientation.inverse() * (world - self.position)
    }

    /// Rotate a direction (no translation).
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.orientation * v
    }

    /// Linear interpolation of position, slerp of orientation, `s` in [0, 1].
    pub fn interpolate(&self, other: &Pose, s: f64) -> Pose {
        Pose {
            position: self.position.lerp(&other.position, s),
            orientation: self.orientation.slerp(&other.orientation, s),
        }
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

/// Max absolute component over a flat scalar slice.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Dot product of two flat scalar slices of equal length.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pose_roundtrip() {
        let pose = Pose::new(
            Vec3::new(0.1, -0.2, 0.3),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.7),
        );
        let p = Vec3::new(0.01, 0.02, 0.03);
        let back = pose.apply_inverse(&pose.apply(&p));
        assert_relative_eq!(back, p, epsilon = 1e-14);
    }

    #[test]
    fn interpolate_endpoints() {
        let a = Pose::from_translation(Vec3::new(1.0, 0.0, 0.0));
        let b = Pose::new(
            Vec3::new(2.0, 1.0, 0.0),
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), 0.4),
        );
        assert_eq!(a.interpolate(&b, 0.0).position, a.position);
        assert_relative_eq!(a.interpolate(&b, 1.0).position, b.position, epsilon = 1e-15);
    }
}
