//! Add-one-point calculus and the Charlier system.

use std::collections::HashMap;

use super::cylinder::Functional;
use crate::config::Configuration;
use crate::error::{precondition, Error, Result};
use crate::space::{sigma_pairing, Breaks, Integrator, IntensityModel, Point, SmoothTestFunction, Window};

/// `F(gamma + eps_x) - F(gamma)`.
pub fn poisson_gradient<F: Functional + ?Sized>(f: &F, gamma: &Configuration, x: &Point) -> Result<f64> {
    if gamma.contains(x) {
        return precondition(format!("{x:?} is already a point of gamma"));
    }
    Ok(f.eval_added(gamma, x) - f.eval(gamma))
}

/// `int [F(gamma + eps_x) - F(gamma)] phi(x) rho(x) dx`.
pub fn poisson_directional<F: Functional + ?Sized>(
    f: &F,
    phi: &SmoothTestFunction,
    model: &IntensityModel,
    w: &Window,
    gamma: &Configuration,
) -> Result<f64> {
    let s = phi.support();
    if !w.contains_box(&s) {
        return precondition(format!("support {s:?} of phi escapes the window"));
    }
    let base = f.eval(gamma);
    let mut breaks = Breaks::new(w.dim());
    phi.breakpoints(&mut breaks);
    model.breakpoints(&mut breaks);
    f.breakpoints(&mut breaks);
    let est = Integrator::default().integrate(&s, &breaks, |x| {
        let p = phi.value(x);
        if p == 0.0 {
            return 0.0;
        }
        (f.eval_added(gamma, x) - base) * p * model.density(x)
    })?;
    Ok(est.value)
}

/// Adjoint of the add-one-point gradient applied to a field `h(gamma, x)`:
/// `sum_{x in gamma} h(gamma - eps_x, x) - int_w h(gamma, x) rho(x) dx`.
///
/// `breaks` marks where `h(gamma, .)` is not smooth.
pub fn poisson_adjoint(
    field: impl Fn(&Configuration, &Point) -> f64,
    model: &IntensityModel,
    w: &Window,
    gamma: &Configuration,
    breaks: &Breaks,
) -> Result<f64> {
    let mut sum = 0.0;
    for i in 0..gamma.len() {
        let x = gamma.points()[i];
        sum += field(&gamma.without(i), &x);
    }
    let mut b = breaks.clone();
    model.breakpoints(&mut b);
    let integral = Integrator::default().integrate(w, &b, |x| field(gamma, x) * model.density(x))?;
    Ok(sum - integral.value)
}

/// Default highest Charlier order.
pub const DEFAULT_MAX_ORDER: usize = 5;

/// Ceiling on memoized sub-configurations per evaluation.
const MEMO_BUDGET: u64 = 5_000_000;

/// The Charlier functions `Q_n(gamma; phi^{(x)n})` of one test function,
/// built by the adjoint recursion
/// `Q_{n+1}(gamma) = sum_x phi(x) Q_n(gamma - eps_x) - <sigma, phi> Q_n(gamma)`.
#[derive(Clone, Debug)]
pub struct CharlierSystem {
    phi: SmoothTestFunction,
    mass: f64,
    max_order: usize,
}

impl CharlierSystem {
    pub fn new(phi: &SmoothTestFunction, model: &IntensityModel, w: &Window) -> Result<CharlierSystem> {
        CharlierSystem::with_max_order(phi, model, w, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(
        phi: &SmoothTestFunction,
        model: &IntensityModel,
        w: &Window,
        max_order: usize,
    ) -> Result<CharlierSystem> {
        let mass = sigma_pairing(phi, model, w)?;
        Ok(CharlierSystem {
            phi: phi.clone(),
            mass,
            max_order,
        })
    }

    /// `<sigma, phi>`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn phi(&self) -> &SmoothTestFunction {
        &self.phi
    }

    pub fn eval(&self, n: usize, gamma: &Configuration) -> Result<f64> {
        Ok(self.eval_upto(n, gamma)?[n])
    }

    /// `[Q_0(gamma), ..., Q_n(gamma)]` sharing one memo table.
    pub fn eval_upto(&self, n: usize, gamma: &Configuration) -> Result<Vec<f64>> {
        if n > self.max_order {
            return Err(Error::Resource(format!(
                "Charlier order {n} exceeds the configured maximum {}",
                self.max_order
            )));
        }
        // points where phi vanishes drop out of every term of the recursion
        let vals: Vec<f64> = gamma
            .iter()
            .map(|x| self.phi.value(x))
            .filter(|v| *v != 0.0)
            .collect();
        let m = vals.len();
        if m > 63 {
            return Err(Error::Resource(format!(
                "{m} points in the support of phi; at most 63 are supported"
            )));
        }
        let states: u64 = (0..=n.min(m)).map(|j| binomial(m as u64, j as u64)).sum();
        if states.saturating_mul(n as u64 + 1) > MEMO_BUDGET {
            return Err(Error::Resource(format!(
                "Charlier order {n} on {m} points needs {states} memoized sub-configurations"
            )));
        }
        let full: u64 = if m == 0 { 0 } else { (1u64 << m) - 1 };
        let mut memo = Memo {
            vals: &vals,
            s: self.mass,
            table: HashMap::new(),
        };
        Ok((0..=n).map(|k| memo.q(k, full)).collect())
    }
}

struct Memo<'a> {
    vals: &'a [f64],
    s: f64,
    table: HashMap<(usize, u64), f64>,
}

impl Memo<'_> {
    fn q(&mut self, n: usize, mask: u64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        if let Some(v) = self.table.get(&(n, mask)) {
            return *v;
        }
        let mut sum = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            sum += self.vals[i] * self.q(n - 1, mask & !(1u64 << i));
        }
        let v = sum - self.s * self.q(n - 1, mask);
        self.table.insert((n, mask), v);
        v
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// `Q_n(gamma; phi^{(x)n})` with a freshly built system.
pub fn charlier(
    n: usize,
    phi: &SmoothTestFunction,
    model: &IntensityModel,
    w: &Window,
    gamma: &Configuration,
) -> Result<f64> {
    CharlierSystem::new(phi, model, w)?.eval(n, gamma)
}
