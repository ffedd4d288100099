//! Desk-scale visuotactile contact simulation.
//!
//! The crate simulates a soft sensor gel pad pressed by rigid indenters and
//! extracts the 7x9 marker displacement field that a vision-based tactile
//! sensor would observe. Three tactile models are provided:
//!
//! - [`solver`]: implicit-Euler incremental potential contact, minimized by a
//!   preconditioned Dai-Kou nonlinear conjugate gradient with an analytical
//!   step bound instead of continuous collision detection,
//! - [`baselines::mpm`]: an explicit material point method,
//! - [`baselines::penalty`]: SDF-penalty point sampling on the sensor surface.
//!
//! All quantities are SI (meters, kilograms, seconds) unless a function name
//! says otherwise.

pub mod baselines;
pub mod contact;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod math;
pub mod solver;
pub mod tactile;

pub use error::{Error, Result};
pub use math::{Mat3, Pose, Vec2, Vec3};
