//! Intensity densities `rho` with closed-form gradients.

use super::geometry::{Point, Vector, Window};
use super::quadrature::{Breaks, Integrator, QuadratureEstimate};
use super::testfn::{Bump, Polynomial, SmoothTestFunction};
use crate::error::{precondition, Error, Result};

/// Density `rho` of the intensity measure `sigma = rho * m`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntensityModel {
    /// `rho = z`.
    Constant { z: f64 },
    /// `rho = z * exp(-alpha |x - c|^2)`.
    ExpQuadratic { z: f64, center: Point, alpha: f64 },
    /// A nonnegative polynomial on a box, zero outside.
    WindowPolynomial { poly: Polynomial, support: Window },
    /// `rho = base + amplitude * bump(x)`.
    BumpModulated { base: f64, amplitude: f64, bump: Bump },
}

impl IntensityModel {
    pub fn constant(z: f64) -> Result<IntensityModel> {
        if !(z >= 0.0 && z.is_finite()) {
            return precondition(format!("constant intensity must be finite and >= 0, got {z}"));
        }
        Ok(IntensityModel::Constant { z })
    }

    pub fn exp_quadratic(z: f64, center: impl Into<Point>, alpha: f64) -> Result<IntensityModel> {
        let center = center.into();
        if !(z >= 0.0 && z.is_finite() && alpha.is_finite() && center.is_finite()) {
            return precondition("exp-quadratic intensity needs finite z >= 0 and finite alpha");
        }
        if alpha < 0.0 {
            return precondition("exp-quadratic intensity needs alpha >= 0 to stay bounded");
        }
        Ok(IntensityModel::ExpQuadratic { z, center, alpha })
    }

    /// Rejects polynomials that go negative on a grid of the support.
    pub fn window_polynomial(poly: Polynomial, support: Window) -> Result<IntensityModel> {
        if poly.dim() != support.dim() {
            return precondition("polynomial and support dimensions differ");
        }
        let per_axis = match support.dim() {
            1 => 1001,
            2 => 101,
            _ => 31,
        };
        let d = support.dim();
        let mut idx = vec![0usize; d];
        loop {
            let u: Vec<f64> = idx.iter().map(|&k| k as f64 / (per_axis - 1) as f64).collect();
            let x = support.from_unit(&u);
            if poly.value(&x) < -1e-12 {
                return precondition(format!("polynomial intensity is negative at {x:?}"));
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    return Ok(IntensityModel::WindowPolynomial { poly, support });
                }
                idx[axis] += 1;
                if idx[axis] < per_axis {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }

    pub fn bump_modulated(base: f64, amplitude: f64, bump: Bump) -> Result<IntensityModel> {
        if !(base >= 0.0 && amplitude >= 0.0 && base.is_finite() && amplitude.is_finite()) {
            return precondition("bump-modulated intensity needs base >= 0 and amplitude >= 0");
        }
        if bump.scale != 1.0 {
            return precondition("bump-modulated intensity uses a unit-scale bump");
        }
        Ok(IntensityModel::BumpModulated {
            base,
            amplitude,
            bump,
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            IntensityModel::Constant { .. } => "constant",
            IntensityModel::ExpQuadratic { .. } => "expquad",
            IntensityModel::WindowPolynomial { .. } => "polynomial",
            IntensityModel::BumpModulated { .. } => "bump",
        }
    }

    /// Dimension the model is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            IntensityModel::Constant { .. } => None,
            IntensityModel::ExpQuadratic { center, .. } => Some(center.dim()),
            IntensityModel::WindowPolynomial { support, .. } => Some(support.dim()),
            IntensityModel::BumpModulated { bump, .. } => Some(bump.dim()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, IntensityModel::Constant { .. })
    }

    pub fn density(&self, x: &Point) -> f64 {
        match self {
            IntensityModel::Constant { z } => *z,
            IntensityModel::ExpQuadratic { z, center, alpha } => z * (-alpha * center.dist_sq(x)).exp(),
            IntensityModel::WindowPolynomial { poly, support } => {
                if support.contains(x) {
                    poly.value(x).max(0.0)
                } else {
                    0.0
                }
            }
            IntensityModel::BumpModulated {
                base,
                amplitude,
                bump,
            } => base + amplitude * bump.value(x),
        }
    }

    pub fn gradient(&self, x: &Point) -> Vector {
        match self {
            IntensityModel::Constant { .. } => Point::zero(x.dim()),
            IntensityModel::ExpQuadratic { alpha, center, .. } => {
                (*x - *center) * (-2.0 * alpha * self.density(x))
            }
            IntensityModel::WindowPolynomial { poly, support } => {
                if support.contains(x) {
                    poly.jet(x).gradient
                } else {
                    Point::zero(x.dim())
                }
            }
            IntensityModel::BumpModulated { amplitude, bump, .. } => bump.jet(x).gradient * *amplitude,
        }
    }

    /// `beta(x) = grad rho / rho`, and the zero vector where `rho = 0`.
    pub fn log_derivative(&self, x: &Point) -> Vector {
        match self {
            IntensityModel::Constant { .. } => Point::zero(x.dim()),
            IntensityModel::ExpQuadratic { alpha, center, z } => {
                if *z == 0.0 {
                    Point::zero(x.dim())
                } else {
                    (*x - *center) * (-2.0 * alpha)
                }
            }
            _ => {
                let rho = self.density(x);
                if rho > 0.0 {
                    self.gradient(x) * (1.0 / rho)
                } else {
                    Point::zero(x.dim())
                }
            }
        }
    }

    /// Upper bound of `rho` on `w`, used by rejection sampling.
    pub fn sup_bound(&self, w: &Window) -> Result<f64> {
        let bound = match self {
            IntensityModel::Constant { z } => *z,
            IntensityModel::ExpQuadratic { z, center, alpha } => {
                // distance from the center to the nearest point of w
                let d2: f64 = (0..w.dim())
                    .map(|i| {
                        let c = center[i].clamp(w.lower()[i], w.upper()[i]);
                        (c - center[i]) * (c - center[i])
                    })
                    .sum();
                z * (-alpha * d2).exp()
            }
            IntensityModel::WindowPolynomial { poly, support } => match support.intersect(w) {
                Some(b) => poly.sup_abs_on(&b),
                None => 0.0,
            },
            IntensityModel::BumpModulated {
                base,
                amplitude,
                bump,
            } => base + amplitude * bump.sup_abs(),
        };
        if !bound.is_finite() {
            return Err(Error::NoSupBound(self.family().to_string()));
        }
        Ok(bound)
    }

    /// Panel edges where `rho` loses smoothness.
    pub fn breakpoints(&self, breaks: &mut Breaks) {
        match self {
            IntensityModel::WindowPolynomial { support, .. } => breaks.add_box(support),
            IntensityModel::BumpModulated { bump, .. } => breaks.add_box(&bump.support()),
            _ => {}
        }
    }

    fn check_dim(&self, w: &Window) -> Result<()> {
        match self.dim() {
            Some(d) if d != w.dim() => precondition(format!(
                "intensity lives in dimension {d}, window in dimension {}",
                w.dim()
            )),
            _ => Ok(()),
        }
    }
}

/// `sigma(w)`, with the order-doubling error estimate.
pub fn intensity_mass(model: &IntensityModel, w: &Window) -> Result<QuadratureEstimate> {
    model.check_dim(w)?;
    if let IntensityModel::Constant { z } = model {
        return Ok(QuadratureEstimate {
            value: z * w.volume(),
            error: 0.0,
            order: 0,
        });
    }
    let mut breaks = Breaks::new(w.dim());
    model.breakpoints(&mut breaks);
    Integrator::default().integrate(w, &breaks, |x| model.density(x))
}

/// `(phi, psi)` in `L^2(sigma)` over `w`.
pub fn l2_inner(
    phi: &SmoothTestFunction,
    psi: &SmoothTestFunction,
    model: &IntensityModel,
    w: &Window,
) -> Result<f64> {
    integrate_against_sigma(&[phi, psi], model, w, |x| phi.value(x) * psi.value(x))
}

/// `<sigma, phi>`.
pub fn sigma_pairing(phi: &SmoothTestFunction, model: &IntensityModel, w: &Window) -> Result<f64> {
    integrate_against_sigma(&[phi], model, w, |x| phi.value(x))
}

/// `int f rho dm` over the common support of `factors`, which must lie in `w`.
pub fn integrate_against_sigma(
    factors: &[&SmoothTestFunction],
    model: &IntensityModel,
    w: &Window,
    f: impl Fn(&Point) -> f64,
) -> Result<f64> {
    model.check_dim(w)?;
    let mut region = *w;
    for phi in factors {
        if phi.dim() != w.dim() {
            return precondition("test function and window dimensions differ");
        }
        let s = phi.support();
        if !w.contains_box(&s) {
            return precondition(format!("test function support {s:?} escapes the window"));
        }
        match region.intersect(&s) {
            Some(r) => region = r,
            None => return Ok(0.0),
        }
    }
    let mut breaks = Breaks::new(w.dim());
    model.breakpoints(&mut breaks);
    for phi in factors {
        phi.breakpoints(&mut breaks);
    }
    let est = Integrator::default().integrate(&region, &breaks, |x| f(x) * model.density(x))?;
    Ok(est.value)
}
