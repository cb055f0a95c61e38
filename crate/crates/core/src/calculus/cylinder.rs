use crate::config::Configuration;
use crate::error::{precondition, Result};
use crate::space::{Breaks, Point, SmoothTestFunction};

/// Largest number of inner functions of a cylinder function.
pub const MAX_ARGS: usize = 4;

/// Value, gradient and Hessian of an outer function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterJet {
    pub value: f64,
    pub grad: [f64; MAX_ARGS],
    pub hess: [[f64; MAX_ARGS]; MAX_ARGS],
}

impl OuterJet {
    fn zero() -> OuterJet {
        OuterJet {
            value: 0.0,
            grad: [0.0; MAX_ARGS],
            hess: [[0.0; MAX_ARGS]; MAX_ARGS],
        }
    }
}

/// Outer functions `g: R^N -> R` with closed-form derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum OuterFunction {
    Constant(f64),
    /// `offset + sum c_i s_i`.
    Linear {
        coeffs: Vec<f64>,
        offset: f64,
    },
    /// `prod s_i`.
    Product {
        arity: usize,
    },
    /// `sum_k c_k prod_i s_i^{e_ki}`.
    Polynomial {
        arity: usize,
        terms: Vec<(f64, Vec<u32>)>,
    },
    /// `tanh(offset + sum c_i s_i)`; bounded.
    Tanh {
        coeffs: Vec<f64>,
        offset: f64,
    },
    /// `exp(offset + sum c_i s_i)`; bounded on `s >= 0` when all `c_i <= 0`.
    ExpLinear {
        coeffs: Vec<f64>,
        offset: f64,
    },
}

impl OuterFunction {
    pub fn arity(&self) -> Option<usize> {
        match self {
            OuterFunction::Constant(_) => None,
            OuterFunction::Linear { coeffs, .. }
            | OuterFunction::Tanh { coeffs, .. }
            | OuterFunction::ExpLinear { coeffs, .. } => Some(coeffs.len()),
            OuterFunction::Product { arity } | OuterFunction::Polynomial { arity, .. } => Some(*arity),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            OuterFunction::Constant(_) => "constant",
            OuterFunction::Linear { .. } => "linear",
            OuterFunction::Product { .. } => "product",
            OuterFunction::Polynomial { .. } => "polynomial",
            OuterFunction::Tanh { .. } => "tanh",
            OuterFunction::ExpLinear { .. } => "explinear",
        }
    }

    /// Whether `g` is bounded on the arguments it can see (`s_i >= 0` for
    /// nonnegative inner functions in the `ExpLinear` case).
    pub fn is_bounded(&self) -> bool {
        match self {
            OuterFunction::Constant(_) | OuterFunction::Tanh { .. } => true,
            OuterFunction::ExpLinear { coeffs, .. } => coeffs.iter().all(|c| *c <= 0.0),
            OuterFunction::Linear { coeffs, .. } => coeffs.iter().all(|c| *c == 0.0),
            _ => false,
        }
    }

    pub fn value(&self, s: &[f64]) -> f64 {
        match self {
            OuterFunction::Constant(c) => *c,
            OuterFunction::Linear { coeffs, offset } => offset + dot(coeffs, s),
            OuterFunction::Product { .. } => s.iter().product(),
            OuterFunction::Polynomial { terms, .. } => terms
                .iter()
                .map(|(c, e)| c * e.iter().zip(s).map(|(k, x)| x.powi(*k as i32)).product::<f64>())
                .sum(),
            OuterFunction::Tanh { coeffs, offset } => (offset + dot(coeffs, s)).tanh(),
            OuterFunction::ExpLinear { coeffs, offset } => (offset + dot(coeffs, s)).exp(),
        }
    }

    pub fn jet(&self, s: &[f64]) -> OuterJet {
        let n = s.len();
        let mut j = OuterJet::zero();
        match self {
            OuterFunction::Constant(c) => j.value = *c,
            OuterFunction::Linear { coeffs, offset } => {
                j.value = offset + dot(coeffs, s);
                j.grad[..n].copy_from_slice(coeffs);
            }
            OuterFunction::Product { .. } => {
                j.value = s.iter().product();
                for i in 0..n {
                    j.grad[i] = (0..n).filter(|&k| k != i).map(|k| s[k]).product();
                    for l in 0..n {
                        if l != i {
                            j.hess[i][l] = (0..n).filter(|&k| k != i && k != l).map(|k| s[k]).product();
                        }
                    }
                }
            }
            OuterFunction::Polynomial { terms, .. } => {
                for (c, e) in terms {
                    let p = |i: usize, drop: u32| -> f64 {
                        if e[i] < drop {
                            0.0
                        } else {
                            s[i].powi((e[i] - drop) as i32)
                        }
                    };
                    j.value += c * (0..n).map(|i| p(i, 0)).product::<f64>();
                    for i in 0..n {
                        if e[i] == 0 {
                            continue;
                        }
                        let rest: f64 = (0..n).filter(|&k| k != i).map(|k| p(k, 0)).product();
                        j.grad[i] += c * e[i] as f64 * p(i, 1) * rest;
                        for l in 0..n {
                            if l == i {
                                if e[i] >= 2 {
                                    j.hess[i][i] += c * (e[i] * (e[i] - 1)) as f64 * p(i, 2) * rest;
                                }
                            } else if e[l] > 0 {
                                let rest2: f64 =
                                    (0..n).filter(|&k| k != i && k != l).map(|k| p(k, 0)).product();
                                j.hess[i][l] += c * (e[i] * e[l]) as f64 * p(i, 1) * p(l, 1) * rest2;
                            }
                        }
                    }
                }
            }
            OuterFunction::Tanh { coeffs, offset } => {
                let t = (offset + dot(coeffs, s)).tanh();
                let d1 = 1.0 - t * t;
                let d2 = -2.0 * t * d1;
                j.value = t;
                for i in 0..n {
                    j.grad[i] = d1 * coeffs[i];
                    for l in 0..n {
                        j.hess[i][l] = d2 * coeffs[i] * coeffs[l];
                    }
                }
            }
            OuterFunction::ExpLinear { coeffs, offset } => {
                let v = (offset + dot(coeffs, s)).exp();
                j.value = v;
                for i in 0..n {
                    j.grad[i] = v * coeffs[i];
                    for l in 0..n {
                        j.hess[i][l] = v * coeffs[i] * coeffs[l];
                    }
                }
            }
        }
        j
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F(gamma) = g(<gamma, phi_1>, ..., <gamma, phi_N>)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderFunction {
    inner: Vec<SmoothTestFunction>,
    outer: OuterFunction,
}

impl CylinderFunction {
    pub fn new(inner: Vec<SmoothTestFunction>, outer: OuterFunction) -> Result<CylinderFunction> {
        if inner.is_empty() || inner.len() > MAX_ARGS {
            return precondition(format!("cylinder functions take 1..={MAX_ARGS} inner functions"));
        }
        if let Some(a) = outer.arity() {
            if a != inner.len() {
                return precondition(format!(
                    "outer function `{}` takes {a} arguments, got {} inner functions",
                    outer.family(),
                    inner.len()
                ));
            }
        }
        if let OuterFunction::Polynomial { arity, terms } = &outer {
            if terms.iter().any(|(_, e)| e.len() != *arity) {
                return precondition("polynomial outer function has a monomial of the wrong arity");
            }
        }
        let d = inner[0].dim();
        if inner.iter().any(|f| f.dim() != d) {
            return precondition("inner functions live in different dimensions");
        }
        Ok(CylinderFunction { inner, outer })
    }

    /// `<gamma, phi>`.
    pub fn linear(phi: SmoothTestFunction) -> CylinderFunction {
        CylinderFunction {
            inner: vec![phi],
            outer: OuterFunction::Linear {
                coeffs: vec![1.0],
                offset: 0.0,
            },
        }
    }

    /// The constant `c`; `phi` only fixes the dimension.
    pub fn constant(c: f64, phi: SmoothTestFunction) -> CylinderFunction {
        CylinderFunction {
            inner: vec![phi],
            outer: OuterFunction::Constant(c),
        }
    }

    pub fn inner(&self) -> &[SmoothTestFunction] {
        &self.inner
    }

    pub fn outer(&self) -> &OuterFunction {
        &self.outer
    }

    pub fn arity(&self) -> usize {
        self.inner.len()
    }

    pub fn dim(&self) -> usize {
        self.inner[0].dim()
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.outer, OuterFunction::Constant(_))
    }

    /// Pairings `<gamma, phi_i>`.
    pub fn pairings(&self, gamma: &Configuration) -> [f64; MAX_ARGS] {
        let mut s = [0.0; MAX_ARGS];
        for (k, phi) in self.inner.iter().enumerate() {
            s[k] = gamma.pair(phi);
        }
        s
    }

    pub fn eval_pairings(&self, s: &[f64; MAX_ARGS]) -> f64 {
        self.outer.value(&s[..self.arity()])
    }

    pub fn jet_pairings(&self, s: &[f64; MAX_ARGS]) -> OuterJet {
        self.outer.jet(&s[..self.arity()])
    }

    pub fn eval(&self, gamma: &Configuration) -> f64 {
        self.eval_pairings(&self.pairings(gamma))
    }

    /// Pairings of `gamma + eps_x` from those of `gamma`.
    pub fn shifted(&self, s: &[f64; MAX_ARGS], x: &Point) -> [f64; MAX_ARGS] {
        let mut t = *s;
        for (k, phi) in self.inner.iter().enumerate() {
            t[k] += phi.value(x);
        }
        t
    }

    /// Hull of the inner supports; `F(gamma + eps_x) = F(gamma)` off it.
    pub fn support(&self) -> crate::space::Window {
        self.inner[1..]
            .iter()
            .fold(self.inner[0].support(), |a, f| a.hull(&f.support()))
    }

    pub fn breakpoints(&self, breaks: &mut Breaks) {
        for f in &self.inner {
            f.breakpoints(breaks);
        }
    }
}

/// A real function of configurations.
pub trait Functional: Sync {
    fn eval(&self, gamma: &Configuration) -> f64;

    /// `F(gamma + eps_x)`.
    fn eval_added(&self, gamma: &Configuration, x: &Point) -> f64 {
        let mut g = gamma.clone();
        match g.insert(*x) {
            Ok(()) => self.eval(&g),
            // x in gamma has measure zero under every law used here
            Err(_) => self.eval(gamma),
        }
    }

    /// Panel edges for integrands in `x` built from `F(gamma + eps_x)`.
    fn breakpoints(&self, _breaks: &mut Breaks) {}
}

impl Functional for CylinderFunction {
    fn eval(&self, gamma: &Configuration) -> f64 {
        CylinderFunction::eval(self, gamma)
    }

    fn eval_added(&self, gamma: &Configuration, x: &Point) -> f64 {
        self.eval_pairings(&self.shifted(&self.pairings(gamma), x))
    }

    fn breakpoints(&self, breaks: &mut Breaks) {
        CylinderFunction::breakpoints(self, breaks)
    }
}

impl<F> Functional for F
where
    F: Fn(&Configuration) -> f64 + Sync,
{
    fn eval(&self, gamma: &Configuration) -> f64 {
        self(gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_mismatch_rejected() {
        let phi = SmoothTestFunction::bump(0.5, 0.2, 1.0).unwrap();
        let bad = CylinderFunction::new(
            vec![phi.clone()],
            OuterFunction::Linear {
                coeffs: vec![1.0, 2.0],
                offset: 0.0,
            },
        );
        assert!(bad.is_err());
        assert!(CylinderFunction::new(vec![phi.clone(), phi], OuterFunction::Product { arity: 2 }).is_ok());
    }

    #[test]
    fn product_jet() {
        let g = OuterFunction::Product { arity: 3 };
        let j = g.jet(&[2.0, 3.0, 5.0]);
        assert_eq!(j.value, 30.0);
        assert_eq!(j.grad[..3], [15.0, 10.0, 6.0]);
        assert_eq!(j.hess[0][1], 5.0);
        assert_eq!(j.hess[1][1], 0.0);
    }

    #[test]
    fn polynomial_jet() {
        // s0^2 s1 + 4 s1^3
        let g = OuterFunction::Polynomial {
            arity: 2,
            terms: vec![(1.0, vec![2, 1]), (4.0, vec![0, 3])],
        };
        let j = g.jet(&[3.0, 2.0]);
        assert_eq!(j.value, 18.0 + 32.0);
        assert_eq!(j.grad[0], 12.0);
        assert_eq!(j.grad[1], 9.0 + 48.0);
        assert_eq!(j.hess[0][0], 4.0);
        assert_eq!(j.hess[0][1], 6.0);
        assert_eq!(j.hess[1][0], 6.0);
        assert_eq!(j.hess[1][1], 48.0);
    }

    #[test]
    fn eval_added_matches_insert() {
        let phi = SmoothTestFunction::bump(0.5, 0.3, 1.0).unwrap();
        let f = CylinderFunction::new(
            vec![phi],
            OuterFunction::Tanh {
                coeffs: vec![2.0],
                offset: -0.5,
            },
        )
        .unwrap();
        let g = Configuration::from_coords(&[0.4, 0.7]).unwrap();
        let x = Point::from(0.55);
        let direct = f.eval(&g.add_point(x).unwrap());
        assert!((Functional::eval_added(&f, &g, &x) - direct).abs() < 1e-15);
    }
}
