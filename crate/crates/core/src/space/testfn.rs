//! Closed-form test functions and vector fields.
//!
//! Every family here comes with hand-written first and second derivatives.
//! The finite-difference suite in `tests/derivatives.rs` pins them down.

use super::geometry::{Point, Vector, Window, MAX_DIM};
use super::quadrature::Breaks;
use crate::error::{precondition, Result};

/// Value, gradient and Laplacian of a scalar function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vector,
    pub laplacian: f64,
}

impl Jet {
    pub fn zero(dim: usize) -> Jet {
        Jet {
            value: 0.0,
            gradient: Point::zero(dim),
            laplacian: 0.0,
        }
    }

    /// Jet of a pointwise product.
    fn product(self, other: Jet) -> Jet {
        Jet {
            value: self.value * other.value,
            gradient: self.gradient * other.value + other.gradient * self.value,
            laplacian: self.laplacian * other.value
                + 2.0 * self.gradient.dot(&other.gradient)
                + self.value * other.laplacian,
        }
    }

    fn add(self, other: Jet) -> Jet {
        Jet {
            value: self.value + other.value,
            gradient: self.gradient + other.gradient,
            laplacian: self.laplacian + other.laplacian,
        }
    }
}

/// A polynomial in `d` variables, stored as a list of monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(f64, [u32; MAX_DIM])>,
}

impl Polynomial {
    /// Terms are `(coefficient, exponents)` with one exponent per axis.
    pub fn new(dim: usize, terms: &[(f64, Vec<u32>)]) -> Result<Polynomial> {
        if !(1..=MAX_DIM).contains(&dim) {
            return precondition(format!("polynomial dimension must be 1..={MAX_DIM}"));
        }
        let mut out = Vec::with_capacity(terms.len());
        for (c, e) in terms {
            if e.len() != dim {
                return precondition(format!("monomial has {} exponents, expected {dim}", e.len()));
            }
            if !c.is_finite() {
                return precondition("non-finite polynomial coefficient");
            }
            let mut ex = [0u32; MAX_DIM];
            ex[..dim].copy_from_slice(e);
            out.push((*c, ex));
        }
        Ok(Polynomial { dim, terms: out })
    }

    /// `c[0] + c[1] x + c[2] x^2 + ...` in one variable.
    pub fn univariate(coeffs: &[f64]) -> Result<Polynomial> {
        let terms: Vec<(f64, Vec<u32>)> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| (*c, vec![k as u32]))
            .collect();
        Polynomial::new(1, &terms)
    }

    pub fn constant(dim: usize, c: f64) -> Result<Polynomial> {
        Polynomial::new(dim, &[(c, vec![0; dim])])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(_, e)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn scaled(&self, a: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(c, e)| (a * c, *e)).collect(),
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * (0..self.dim).map(|i| pow(x[i], e[i])).product::<f64>())
            .sum()
    }

    pub fn jet(&self, x: &Point) -> Jet {
        let d = self.dim;
        let mut value = 0.0;
        let mut grad = [0.0; MAX_DIM];
        let mut lap = 0.0;
        for (c, e) in &self.terms {
            let p: [f64; MAX_DIM] = std::array::from_fn(|i| if i < d { pow(x[i], e[i]) } else { 1.0 });
            let others = |skip: usize| -> f64 { (0..d).filter(|&j| j != skip).map(|j| p[j]).product() };
            value += c * (0..d).map(|i| p[i]).product::<f64>();
            for k in 0..d {
                let ek = e[k];
                if ek >= 1 {
                    grad[k] += c * ek as f64 * pow(x[k], ek - 1) * others(k);
                }
                if ek >= 2 {
                    lap += c * (ek * (ek - 1)) as f64 * pow(x[k], ek - 2) * others(k);
                }
            }
        }
        Jet {
            value,
            gradient: Point::from_slice(&grad[..d]),
            laplacian: lap,
        }
    }

    /// Crude bound of `|p|` on a box: each monomial bounded by its largest corner.
    pub fn sup_abs_on(&self, w: &Window) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                c.abs()
                    * (0..self.dim)
                        .map(|i| pow(w.lower()[i].abs().max(w.upper()[i].abs()), e[i]))
                        .product::<f64>()
            })
            .sum()
    }
}

#[inline]
fn pow(x: f64, e: u32) -> f64 {
    match e {
        0 => 1.0,
        1 => x,
        2 => x * x,
        _ => x.powi(e as i32),
    }
}

/// `scale * exp(-1 / (1 - |x-c|^2 / r^2))` on the open ball `|x-c| < r`, zero outside.
///
/// Peak value at the center is `scale / e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Point,
    pub radius: f64,
    pub scale: f64,
}

impl Bump {
    pub fn new(center: Point, radius: f64, scale: f64) -> Result<Bump> {
        if !(radius > 0.0 && radius.is_finite()) {
            return precondition(format!("bump radius must be positive, got {radius}"));
        }
        if !scale.is_finite() || !center.is_finite() {
            return precondition("bump parameters must be finite");
        }
        Ok(Bump {
            center,
            radius,
            scale,
        })
    }

    pub fn unit(center: Point, radius: f64) -> Result<Bump> {
        Bump::new(center, radius, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn support(&self) -> Window {
        Window::cube(&self.center, self.radius).expect("bump radius is positive")
    }

    pub fn value(&self, x: &Point) -> f64 {
        let u = self.center.dist_sq(x) / (self.radius * self.radius);
        if u >= 1.0 {
            return 0.0;
        }
        self.scale * (-1.0 / (1.0 - u)).exp()
    }

    pub fn jet(&self, x: &Point) -> Jet {
        let r2 = self.radius * self.radius;
        let dx = *x - self.center;
        let u = dx.norm_sq() / r2;
        if u >= 1.0 {
            return Jet::zero(self.dim());
        }
        let q = 1.0 - u;
        let b = self.scale * (-1.0 / q).exp();
        let db = -b / (q * q);
        let d2b = b / (q * q * q * q) - 2.0 * b / (q * q * q);
        let d = self.dim() as f64;
        Jet {
            value: b,
            gradient: dx * (2.0 * db / r2),
            laplacian: d2b * 4.0 * u / r2 + db * 2.0 * d / r2,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.scale.abs() * (-1.0f64).exp()
    }
}

/// Scalar test functions with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothTestFunction {
    Bump(Bump),
    /// Polynomial times a bump.
    PolyBump {
        poly: Polynomial,
        bump: Bump,
    },
    /// A polynomial restricted to a box. Not smooth across the box faces;
    /// derivatives are those of the polynomial inside and zero outside.
    /// Covers indicators (`p = 1`) and the `x(1-x)` examples.
    WindowPolynomial {
        poly: Polynomial,
        support: Window,
    },
    Sum(Vec<SmoothTestFunction>),
}

impl SmoothTestFunction {
    pub fn bump(center: impl Into<Point>, radius: f64, scale: f64) -> Result<SmoothTestFunction> {
        Ok(SmoothTestFunction::Bump(Bump::new(center.into(), radius, scale)?))
    }

    pub fn poly_bump(poly: Polynomial, bump: Bump) -> Result<SmoothTestFunction> {
        if poly.dim() != bump.dim() {
            return precondition("polynomial and bump dimensions differ");
        }
        Ok(SmoothTestFunction::PolyBump { poly, bump })
    }

    pub fn window_polynomial(poly: Polynomial, support: Window) -> Result<SmoothTestFunction> {
        if poly.dim() != support.dim() {
            return precondition("polynomial and support dimensions differ");
        }
        Ok(SmoothTestFunction::WindowPolynomial { poly, support })
    }

    /// Indicator of a box.
    pub fn indicator(support: Window) -> SmoothTestFunction {
        SmoothTestFunction::WindowPolynomial {
            poly: Polynomial::constant(support.dim(), 1.0).expect("valid dimension"),
            support,
        }
    }

    pub fn sum(parts: Vec<SmoothTestFunction>) -> Result<SmoothTestFunction> {
        let Some(first) = parts.first() else {
            return precondition("empty sum of test functions");
        };
        let d = first.dim();
        if parts.iter().any(|p| p.dim() != d) {
            return precondition("summands have different dimensions");
        }
        Ok(SmoothTestFunction::Sum(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            SmoothTestFunction::Bump(b) => b.dim(),
            SmoothTestFunction::PolyBump { bump, .. } => bump.dim(),
            SmoothTestFunction::WindowPolynomial { support, .. } => support.dim(),
            SmoothTestFunction::Sum(parts) => parts[0].dim(),
        }
    }

    /// Closed box outside of which the function and its derivatives vanish.
    pub fn support(&self) -> Window {
        match self {
            SmoothTestFunction::Bump(b) => b.support(),
            SmoothTestFunction::PolyBump { bump, .. } => bump.support(),
            SmoothTestFunction::WindowPolynomial { support, .. } => *support,
            SmoothTestFunction::Sum(parts) => parts[1..]
                .iter()
                .fold(parts[0].support(), |acc, p| acc.hull(&p.support())),
        }
    }

    /// Radius of the smallest ball around `support().center()` containing the support.
    pub fn support_radius(&self) -> f64 {
        let s = self.support();
        (0..s.dim())
            .map(|i| 0.25 * s.side(i) * s.side(i))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, a: f64) -> SmoothTestFunction {
        match self {
            SmoothTestFunction::Bump(b) => SmoothTestFunction::Bump(Bump {
                scale: a * b.scale,
                ..*b
            }),
            SmoothTestFunction::PolyBump { poly, bump } => SmoothTestFunction::PolyBump {
                poly: poly.scaled(a),
                bump: *bump,
            },
            SmoothTestFunction::WindowPolynomial { poly, support } => SmoothTestFunction::WindowPolynomial {
                poly: poly.scaled(a),
                support: *support,
            },
            SmoothTestFunction::Sum(parts) => {
                SmoothTestFunction::Sum(parts.iter().map(|p| p.scaled(a)).collect())
            }
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        match self {
            SmoothTestFunction::Bump(b) => b.value(x),
            SmoothTestFunction::PolyBump { poly, bump } => {
                let b = bump.value(x);
                if b == 0.0 {
                    0.0
                } else {
                    poly.value(x) * b
                }
            }
            SmoothTestFunction::WindowPolynomial { poly, support } => {
                if support.contains(x) {
                    poly.value(x)
                } else {
                    0.0
                }
            }
            SmoothTestFunction::Sum(parts) => parts.iter().map(|p| p.value(x)).sum(),
        }
    }

    pub fn jet(&self, x: &Point) -> Jet {
        match self {
            SmoothTestFunction::Bump(b) => b.jet(x),
            SmoothTestFunction::PolyBump { poly, bump } => {
                let b = bump.jet(x);
                if b.value == 0.0 {
                    return Jet::zero(self.dim());
                }
                poly.jet(x).product(b)
            }
            SmoothTestFunction::WindowPolynomial { poly, support } => {
                if support.contains(x) {
                    poly.jet(x)
                } else {
                    Jet::zero(self.dim())
                }
            }
            SmoothTestFunction::Sum(parts) => parts
                .iter()
                .fold(Jet::zero(self.dim()), |acc, p| acc.add(p.jet(x))),
        }
    }

    pub fn gradient(&self, x: &Point) -> Vector {
        self.jet(x).gradient
    }

    pub fn laplacian(&self, x: &Point) -> f64 {
        self.jet(x).laplacian
    }

    /// Upper bound of `|phi|` over its support.
    pub fn sup_abs(&self) -> f64 {
        match self {
            SmoothTestFunction::Bump(b) => b.sup_abs(),
            SmoothTestFunction::PolyBump { poly, bump } => poly.sup_abs_on(&bump.support()) * bump.sup_abs(),
            SmoothTestFunction::WindowPolynomial { poly, support } => poly.sup_abs_on(support),
            SmoothTestFunction::Sum(parts) => parts.iter().map(|p| p.sup_abs()).sum(),
        }
    }

    /// Places where a quadrature panel edge helps: support faces.
    pub fn breakpoints(&self, breaks: &mut Breaks) {
        match self {
            SmoothTestFunction::Sum(parts) => parts.iter().for_each(|p| p.breakpoints(breaks)),
            _ => breaks.add_box(&self.support()),
        }
    }

    /// Whether derivatives are smooth everywhere (false for box-restricted polynomials).
    pub fn is_smooth(&self) -> bool {
        match self {
            SmoothTestFunction::WindowPolynomial { .. } => false,
            SmoothTestFunction::Sum(parts) => parts.iter().all(|p| p.is_smooth()),
            _ => true,
        }
    }
}

/// Value, gradient and Laplacian of `phi` at `x`; exactly zero off the support.
pub fn evaluate_jet(phi: &SmoothTestFunction, x: &Point) -> Jet {
    phi.jet(x)
}

/// Compactly supported vector fields on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothVectorField {
    Zero {
        dim: usize,
    },
    /// `v = (v_1, ..., v_d)`, one test function per axis.
    Components(Vec<SmoothTestFunction>),
    /// `v = (-d_2 psi, d_1 psi)` in the plane; divergence free.
    Rotational(SmoothTestFunction),
}

impl SmoothVectorField {
    pub fn components(parts: Vec<SmoothTestFunction>) -> Result<SmoothVectorField> {
        let d = parts.len();
        if !(1..=MAX_DIM).contains(&d) {
            return precondition("vector field needs 1..=3 components");
        }
        if parts.iter().any(|p| p.dim() != d) {
            return precondition("vector field components must live in R^d with d = number of components");
        }
        Ok(SmoothVectorField::Components(parts))
    }

    /// `phi * e_axis`.
    pub fn along(phi: SmoothTestFunction, axis: usize) -> Result<SmoothVectorField> {
        let d = phi.dim();
        if axis >= d {
            return precondition("axis out of range");
        }
        let parts = (0..d)
            .map(|i| if i == axis { phi.clone() } else { phi.scaled(0.0) })
            .collect();
        SmoothVectorField::components(parts)
    }

    pub fn rotational(psi: SmoothTestFunction) -> Result<SmoothVectorField> {
        if psi.dim() != 2 {
            return precondition("rotational fields are only defined in the plane");
        }
        Ok(SmoothVectorField::Rotational(psi))
    }

    pub fn dim(&self) -> usize {
        match self {
            SmoothVectorField::Zero { dim } => *dim,
            SmoothVectorField::Components(p) => p.len(),
            SmoothVectorField::Rotational(_) => 2,
        }
    }

    pub fn value(&self, x: &Point) -> Vector {
        match self {
            SmoothVectorField::Zero { dim } => Point::zero(*dim),
            SmoothVectorField::Components(p) => {
                let c: Vec<f64> = p.iter().map(|f| f.value(x)).collect();
                Point::from_slice(&c)
            }
            SmoothVectorField::Rotational(psi) => {
                let g = psi.gradient(x);
                Point::from([-g[1], g[0]])
            }
        }
    }

    pub fn divergence(&self, x: &Point) -> f64 {
        match self {
            SmoothVectorField::Zero { .. } | SmoothVectorField::Rotational(_) => 0.0,
            SmoothVectorField::Components(p) => p.iter().enumerate().map(|(i, f)| f.gradient(x)[i]).sum(),
        }
    }

    /// Value and divergence together.
    pub fn eval(&self, x: &Point) -> (Vector, f64) {
        (self.value(x), self.divergence(x))
    }

    pub fn support(&self) -> Option<Window> {
        match self {
            SmoothVectorField::Zero { .. } => None,
            SmoothVectorField::Components(p) => {
                Some(p[1..].iter().fold(p[0].support(), |a, f| a.hull(&f.support())))
            }
            SmoothVectorField::Rotational(psi) => Some(psi.support()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SmoothVectorField::Zero { .. })
    }

    pub fn breakpoints(&self, breaks: &mut Breaks) {
        match self {
            SmoothVectorField::Zero { .. } => {}
            SmoothVectorField::Components(p) => p.iter().for_each(|f| f.breakpoints(breaks)),
            SmoothVectorField::Rotational(psi) => psi.breakpoints(breaks),
        }
    }
}
