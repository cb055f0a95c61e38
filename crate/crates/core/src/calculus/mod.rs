//! Cylinder functions, the intrinsic and add-one-point gradients, and the Charlier system.

mod cylinder;
mod intrinsic;
mod poisson;

pub use cylinder::{CylinderFunction, Functional, OuterFunction, OuterJet, MAX_ARGS};
pub use intrinsic::{
    carre, directional_derivative, divergence_gamma, generator_cylinder, intrinsic_gradient,
    log_derivative_b, mixed_gradient, TangentVector,
};
pub use poisson::{
    charlier, poisson_adjoint, poisson_directional, poisson_gradient, CharlierSystem, DEFAULT_MAX_ORDER,
};
