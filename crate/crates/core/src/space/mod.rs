//! Flat ambient space: boxes in `R^d`, intensities, test functions, quadrature.

pub mod geometry;
pub mod intensity;
pub mod quadrature;
pub mod testfn;

pub use geometry::{Point, Vector, Window, MAX_DIM};
pub use intensity::{integrate_against_sigma, intensity_mass, l2_inner, sigma_pairing, IntensityModel};
pub use quadrature::{gauss_legendre, Breaks, GaussLegendre, Integrator, QuadratureEstimate, QuadratureRule};
pub use testfn::{evaluate_jet, Bump, Jet, Polynomial, SmoothTestFunction, SmoothVectorField};
