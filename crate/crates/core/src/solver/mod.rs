//! Implicit-Euler time stepping of the contact energy by preconditioned
//! nonlinear conjugate gradients with a barrier-distance step cap.

mod pncg;
mod script;
mod step;

pub use pncg::{dk_direction, dk_direction_into, step_size, StepSize};
pub use script::{RigidScript, ScriptFrame};
pub use step::{
    implicit_euler_step, simulate_sequence, DeformableBody, FrameResult, RigidCollider,
    SimState, StepDiagnostics,
};

use serde::{Deserialize, Serialize};

use crate::energy::{BarrierParams, FrictionParams};
use crate::error::{Error, Result};
use crate::math::Vec3;

/// Time stepper configuration. All defaults are conventions, not measured
/// values, and every field is overridable from scene files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Time step (s).
    pub h: f64,
    pub max_iters: usize,
    /// Convergence threshold on the per-iteration displacement |dx|_inf (m).
    pub tol_dx: f64,
    pub barrier: BarrierParams,
    pub friction: FrictionParams,
    /// Gravity acceleration; off by default (insertion-style tasks must not
    /// rely on it).
    pub gravity: Option<Vec3>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 5e-3,
            max_iters: 200,
            tol_dx: 1e-6,
            barrier: BarrierParams {
                dhat: 1e-4,
                kappa: 1e5,
            },
            friction: FrictionParams {
                eps_v: 1e-5,
                mu_f: 1.0,
            },
            gravity: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {}", self.h)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.tol_dx > 0.0) {
            return Err(Error::invalid(format!("tol_dx must be positive, got {}", self.tol_dx)));
        }
        self.barrier.validate()?;
        self.friction.validate()
    }
}
