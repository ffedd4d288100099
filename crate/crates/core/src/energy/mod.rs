//! Potential energy terms of the per-step objective: inertia, hyperelastic,
//! contact barrier, and friction dissipation, each with value, gradient, and
//! diagonal Hessian entries for the Jacobi preconditioner.

mod barrier;
mod elastic;
mod friction;
mod inertia;
mod material;
mod report;

pub use barrier::{barrier_energy, barrier_term, quadform_barrier};
pub use elastic::{elastic_energy, quadform_elastic};
pub use friction::{friction_energy, friction_mollifier, quadform_friction};
pub use inertia::{inertia_energy, quadform_inertia};
pub use material::{BarrierParams, FrictionParams, Material};
pub use report::EnergyReport;

pub(crate) use barrier::accumulate_barrier;
pub(crate) use elastic::accumulate_elastic;
pub(crate) use friction::accumulate_friction;
pub(crate) use inertia::accumulate_inertia;
