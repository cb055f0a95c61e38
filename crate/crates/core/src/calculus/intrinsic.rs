//! Intrinsic calculus: gradients along diffeomorphism flows of the base space.

use super::cylinder::{CylinderFunction, MAX_ARGS};
use crate::config::Configuration;
use crate::error::{precondition, Result};
use crate::space::{IntensityModel, Point, SmoothVectorField, Vector};

/// A vector attached to every point of a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    points: Vec<Point>,
    vectors: Vec<Vector>,
}

impl TangentVector {
    pub fn new(gamma: &Configuration, vectors: Vec<Vector>) -> Result<TangentVector> {
        if vectors.len() != gamma.len() {
            return precondition("one vector per point is required");
        }
        Ok(TangentVector {
            points: gamma.points().to_vec(),
            vectors,
        })
    }

    pub fn zero(gamma: &Configuration) -> TangentVector {
        TangentVector {
            points: gamma.points().to_vec(),
            vectors: vec![Point::zero(gamma.dim()); gamma.len()],
        }
    }

    /// Restriction of a vector field to the points of `gamma`.
    pub fn from_field(v: &SmoothVectorField, gamma: &Configuration) -> TangentVector {
        TangentVector {
            points: gamma.points().to_vec(),
            vectors: gamma.iter().map(|x| v.value(x)).collect(),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    /// Vector at the point `x`, if `x` is one of the points.
    pub fn at(&self, x: &Point) -> Option<&Vector> {
        self.points
            .binary_search_by(|p| p.lex_cmp(x))
            .ok()
            .map(|i| &self.vectors[i])
    }

    /// Inner product in the tangent space: `sum_x <w_x, u_x>`.
    pub fn inner(&self, other: &TangentVector) -> Result<f64> {
        if self.points != other.points {
            return precondition("tangent vectors are attached to different configurations");
        }
        Ok(self
            .vectors
            .iter()
            .zip(other.vectors.iter())
            .map(|(a, b)| a.dot(b))
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm_sq()).sum()
    }
}

/// `grad F(gamma; x) = sum_i d_i g(...) grad phi_i(x)` for every `x` in `gamma`.
pub fn intrinsic_gradient(f: &CylinderFunction, gamma: &Configuration) -> TangentVector {
    let s = f.pairings(gamma);
    let j = f.jet_pairings(&s);
    let vectors = gamma.iter().map(|x| gradient_at(f, &j.grad, x)).collect();
    TangentVector {
        points: gamma.points().to_vec(),
        vectors,
    }
}

fn gradient_at(f: &CylinderFunction, dg: &[f64; MAX_ARGS], x: &Point) -> Vector {
    let mut w = Point::zero(x.dim());
    for (i, phi) in f.inner().iter().enumerate() {
        if dg[i] != 0.0 {
            w = w + phi.gradient(x) * dg[i];
        }
    }
    w
}

/// `sum_i d_i g(...) <gamma, <grad phi_i, v>>`.
pub fn directional_derivative(f: &CylinderFunction, v: &SmoothVectorField, gamma: &Configuration) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let s = f.pairings(gamma);
    let j = f.jet_pairings(&s);
    let mut total = 0.0;
    for (i, phi) in f.inner().iter().enumerate() {
        if j.grad[i] == 0.0 {
            continue;
        }
        let pairing: f64 = gamma.iter().map(|x| phi.gradient(x).dot(&v.value(x))).sum();
        total += j.grad[i] * pairing;
    }
    total
}

/// `<grad F, grad G>` in the tangent space at `gamma`.
pub fn carre(f: &CylinderFunction, g: &CylinderFunction, gamma: &Configuration) -> f64 {
    let jf = f.jet_pairings(&f.pairings(gamma));
    let jg = g.jet_pairings(&g.pairings(gamma));
    gamma
        .iter()
        .map(|x| gradient_at(f, &jf.grad, x).dot(&gradient_at(g, &jg.grad, x)))
        .sum()
}

/// `B_v(gamma) = sum_x [<beta(x), v(x)> + div v(x)]`.
pub fn log_derivative_b(v: &SmoothVectorField, model: &IntensityModel, gamma: &Configuration) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    gamma
        .iter()
        .map(|x| {
            let (vx, div) = v.eval(x);
            model.log_derivative(x).dot(&vx) + div
        })
        .sum()
}

/// `div(G v)(gamma) = <grad G, v> + G(gamma) B_v(gamma)`.
pub fn divergence_gamma(
    g: &CylinderFunction,
    v: &SmoothVectorField,
    model: &IntensityModel,
    gamma: &Configuration,
) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    directional_derivative(g, v, gamma) + g.eval(gamma) * log_derivative_b(v, model, gamma)
}

/// The intrinsic Dirichlet operator on a cylinder function:
/// `-sum_x [ sum_ij d_ij g <grad phi_i, grad phi_j>(x) + sum_i d_i g (lap phi_i + <beta, grad phi_i>)(x) ]`.
pub fn generator_cylinder(f: &CylinderFunction, model: &IntensityModel, gamma: &Configuration) -> f64 {
    if f.is_constant() {
        return 0.0;
    }
    let n = f.arity();
    let j = f.jet_pairings(&f.pairings(gamma));
    let mut total = 0.0;
    for x in gamma {
        let beta = model.log_derivative(x);
        let jets: Vec<_> = f.inner().iter().map(|phi| phi.jet(x)).collect();
        let mut term = 0.0;
        for a in 0..n {
            for b in 0..n {
                if j.hess[a][b] != 0.0 {
                    term += j.hess[a][b] * jets[a].gradient.dot(&jets[b].gradient);
                }
            }
            if j.grad[a] != 0.0 {
                term += j.grad[a] * (jets[a].laplacian + beta.dot(&jets[a].gradient));
            }
        }
        total += term;
    }
    -total
}

/// `grad_x (F(gamma + eps_x) - F(gamma)) = sum_i d_i g(<gamma, phi> + phi(x)) grad phi_i(x)`.
pub fn mixed_gradient(f: &CylinderFunction, pairings: &[f64; MAX_ARGS], x: &Point) -> Vector {
    let shifted = f.shifted(pairings, x);
    let j = f.jet_pairings(&shifted);
    gradient_at(f, &j.grad, x)
}
