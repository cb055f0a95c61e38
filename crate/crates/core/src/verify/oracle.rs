//! Deterministic expectations on small windows by summing the Poisson series.
//!
//! The law of a Poisson process on `w` decomposes over the number of points:
//! `E f = e^{-sigma(w)} sum_k (1/k!) int_{w^k} f(x_1..x_k) prod rho(x_j) dx`.
//! The Gibbs law multiplies each term by `exp(-E_w)` and divides by the
//! identically computed partition function. The series is cut at `n_max`
//! and the omitted terms are bounded with `sup |f|` on `k` points.
//!
//! In one dimension the `k`-fold integral runs over ordered points
//! `x_1 < ... < x_k`, which removes the `1/k!` and lets every level split
//! its interval exactly at hard-core exclusions and soft-core kinks. In two
//! and three dimensions a plain tensor rule over `w^k` is used.

use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::gibbs::{EnergyValue, PotentialModel};
use crate::space::quadrature::composite_nodes;
use crate::space::{intensity_mass, Breaks, IntensityModel, Point, QuadratureRule, Window};

/// A functional of finitely many points with a bound of `|f|` on `k` points.
pub trait OracleFunctional: Sync {
    fn eval_points(&self, pts: &[Point]) -> f64;
    fn sup_abs(&self, k: usize) -> f64;
    /// Where `f` loses smoothness in each coordinate.
    fn breakpoints(&self, _breaks: &mut Breaks) {}
}

/// Closure-backed functional with an explicit bound.
pub struct BoundedFn<F, B> {
    pub f: F,
    pub bound: B,
    pub breaks: Option<Breaks>,
}

impl<F, B> BoundedFn<F, B>
where
    F: Fn(&[Point]) -> f64 + Sync,
    B: Fn(usize) -> f64 + Sync,
{
    pub fn new(f: F, bound: B) -> BoundedFn<F, B> {
        BoundedFn {
            f,
            bound,
            breaks: None,
        }
    }

    pub fn with_breaks(mut self, breaks: Breaks) -> BoundedFn<F, B> {
        self.breaks = Some(breaks);
        self
    }
}

impl<F, B> OracleFunctional for BoundedFn<F, B>
where
    F: Fn(&[Point]) -> f64 + Sync,
    B: Fn(usize) -> f64 + Sync,
{
    fn eval_points(&self, pts: &[Point]) -> f64 {
        (self.f)(pts)
    }

    fn sup_abs(&self, k: usize) -> f64 {
        (self.bound)(k)
    }

    fn breakpoints(&self, breaks: &mut Breaks) {
        if let Some(b) = &self.breaks {
            breaks.extend(b);
        }
    }
}

/// The number of points, `N_w`.
pub struct PointCount;

impl OracleFunctional for PointCount {
    fn eval_points(&self, pts: &[Point]) -> f64 {
        pts.len() as f64
    }

    fn sup_abs(&self, k: usize) -> f64 {
        k as f64
    }
}

/// Truncation and quadrature settings of the series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Largest number of points kept in the series.
    pub n_max: usize,
    /// Gauss–Legendre order per panel for the `k`-point term, indexed by `k - 1`;
    /// the last entry is reused for larger `k`.
    pub orders: Vec<usize>,
    /// Uniform panels per axis for `k <= low_k`; one panel (plus breakpoints) above.
    /// Soft-core kinks around earlier points are resolved only up to `low_k + 1`.
    pub panels: usize,
    pub low_k: usize,
    /// Tail bounds above this make the result inconclusive.
    pub tail_tolerance: f64,
    /// Cap on integrand evaluations per term.
    pub max_evaluations: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_max: 6,
            orders: vec![48, 32, 20, 16, 10, 6, 4, 3, 2],
            panels: 4,
            low_k: 3,
            tail_tolerance: 1e-6,
            max_evaluations: 400_000_000,
        }
    }
}

impl OracleConfig {
    pub fn with_n_max(mut self, n_max: usize) -> OracleConfig {
        self.n_max = n_max;
        self
    }

    fn order(&self, k: usize) -> usize {
        let i = (k.max(1) - 1).min(self.orders.len() - 1);
        self.orders[i]
    }

    fn panels(&self, k: usize) -> usize {
        if k <= self.low_k {
            self.panels
        } else {
            1
        }
    }

    /// Same settings with every order doubled, for refinement checks.
    pub fn refined(&self) -> OracleConfig {
        OracleConfig {
            orders: self.orders.iter().map(|q| 2 * q).collect(),
            max_evaluations: self.max_evaluations.saturating_mul(1 << 10),
            ..self.clone()
        }
    }
}

/// Value of the truncated series with its error bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub tail_bound: f64,
    pub inconclusive: bool,
    /// `e^{-sigma} (1/k!) int f prod rho` (times the Gibbs weight) for `k = 0..=n_max`.
    pub terms: Vec<f64>,
    /// Truncated partition function `e^{-sigma} sum_k Z_k` for Gibbs laws.
    pub partition: Option<f64>,
    pub n_max: usize,
}

/// `E f` under the Poisson law (`potential = None`) or the Gibbs law on `w`.
pub fn oracle_expectation<F: OracleFunctional + ?Sized>(
    f: &F,
    model: &IntensityModel,
    potential: Option<&PotentialModel>,
    w: &Window,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    if cfg.orders.is_empty() {
        return precondition("oracle needs at least one quadrature order");
    }
    let sigma = intensity_mass(model, w)?.value;
    let zero = PotentialModel::zero();
    let pot = potential.unwrap_or(&zero);
    let mut base = Breaks::new(w.dim());
    model.breakpoints(&mut base);
    f.breakpoints(&mut base);
    let mut ctx = Ctx {
        f,
        model,
        pot,
        w,
        base,
        order: 0,
        panels: 1,
        pts: Vec::new(),
        evaluations: 0,
        cap: 0,
        point_breaks: true,
    };
    let e0 = (-sigma).exp();
    let mut terms = Vec::with_capacity(cfg.n_max + 1);
    let mut zs = Vec::with_capacity(cfg.n_max + 1);
    for k in 0..=cfg.n_max {
        let (num, z) = if k == 0 {
            (f.eval_points(&[]), 1.0)
        } else {
            ctx.order = cfg.order(k);
            ctx.panels = cfg.panels(k);
            ctx.point_breaks = k <= cfg.low_k + 1;
            ctx.pts.clear();
            ctx.evaluations = 0;
            ctx.cap = cfg.max_evaluations;
            if w.dim() == 1 {
                ctx.ordered(k, w.lower()[0], 1.0, 0.0)
            } else {
                let (n, z) = ctx.tensor(k, 1.0, 0.0);
                let fact: f64 = (1..=k).map(|i| i as f64).product();
                (n / fact, z / fact)
            }
        };
        if ctx.evaluations > ctx.cap {
            return Err(Error::Resource(format!(
                "oracle term with {k} points exceeds {} integrand evaluations",
                ctx.cap
            )));
        }
        terms.push(e0 * num);
        zs.push(e0 * z);
    }
    // omitted terms: e^{-sigma} sigma^k / k! sup|f|_k e^{-min k(k-1)/2}
    let min = pot.pair.min_value();
    let limit = packing_limit(pot, w);
    let tail = |sup: &dyn Fn(usize) -> f64| -> f64 {
        let mut total = 0.0;
        let mut p = e0;
        for k in 1..=cfg.n_max {
            p *= sigma / k as f64;
        }
        for k in cfg.n_max + 1..cfg.n_max + 400 {
            if limit.is_some_and(|l| k > l) {
                break;
            }
            p *= sigma / k as f64;
            let gibbs = (-min * (k * (k - 1)) as f64 / 2.0).exp();
            let t = p * sup(k) * gibbs;
            total += t;
            if t < 1e-300 || (t < 1e-18 * total && k > cfg.n_max + 20) {
                break;
            }
        }
        total
    };
    let t_num = tail(&|k| f.sup_abs(k));
    let num: f64 = terms.iter().sum();
    let (value, tail_bound, partition) = if potential.is_some() {
        let z: f64 = zs.iter().sum();
        if !(z > 0.0) {
            return Err(Error::Resource("partition function vanished".into()));
        }
        let t_z = tail(&|_| 1.0);
        let v = num / z;
        (v, (t_num + v.abs() * t_z) / z, Some(z))
    } else {
        (num, t_num, None)
    };
    Ok(OracleResult {
        value,
        tail_bound,
        inconclusive: !(tail_bound <= cfg.tail_tolerance),
        terms,
        partition,
        n_max: cfg.n_max,
    })
}

/// Most points a hard-core configuration can place in `w`; `None` otherwise.
pub fn packing_limit(pot: &PotentialModel, w: &Window) -> Option<usize> {
    let crate::gibbs::PairPotential::HardCore { r0 } = pot.pair else {
        return None;
    };
    if w.dim() == 1 {
        return Some((w.side(0) / r0).floor() as usize + 1);
    }
    // disjoint balls of radius r0/2 inside the window grown by r0/2
    let d = w.dim() as i32;
    let grown: f64 = (0..w.dim()).map(|i| w.side(i) + r0).product();
    let unit_ball = match d {
        2 => std::f64::consts::PI,
        _ => 4.0 / 3.0 * std::f64::consts::PI,
    };
    Some((grown / (unit_ball * (r0 / 2.0).powi(d))).floor() as usize)
}

struct Ctx<'a, F: ?Sized> {
    f: &'a F,
    model: &'a IntensityModel,
    pot: &'a PotentialModel,
    w: &'a Window,
    base: Breaks,
    order: usize,
    panels: usize,
    pts: Vec<Point>,
    evaluations: u64,
    cap: u64,
    point_breaks: bool,
}

impl<F: OracleFunctional + ?Sized> Ctx<'_, F> {
    /// Energy added by `x` against the points placed so far.
    fn added_energy(&self, x: &Point) -> EnergyValue {
        self.pot.local_energy_unchecked(&self.pts, x)
    }

    /// Ordered points in one dimension: the next point lies in `(lo, upper]`.
    fn ordered(&mut self, remaining: usize, lo: f64, weight: f64, energy: f64) -> (f64, f64) {
        if remaining == 0 {
            self.evaluations += 1;
            let b = (-energy).exp();
            return (weight * b * self.f.eval_points(&self.pts), weight * b);
        }
        let mut hi = self.w.upper()[0];
        let mut start = lo;
        if let crate::gibbs::PairPotential::HardCore { r0 } = self.pot.pair {
            // the remaining points need room to the right
            hi -= (remaining - 1) as f64 * r0;
        }
        let mut breaks: Vec<f64> = self.base.axis(0).to_vec();
        if let Some(prev) = self.pts.last() {
            if let crate::gibbs::PairPotential::HardCore { r0 } = self.pot.pair {
                start = prev[0] + r0;
            }
        }
        if self.point_breaks {
            for y in &self.pts {
                for r in self.pot.pair.radial_breakpoints() {
                    breaks.push(y[0] + r);
                }
            }
        }
        if start >= hi {
            return (0.0, 0.0);
        }
        let nodes = composite_nodes(start, hi, self.order, self.panels, &breaks);
        let (mut num, mut z) = (0.0, 0.0);
        for (x, wt) in nodes {
            if self.evaluations > self.cap {
                break;
            }
            let p = Point::from(x);
            let rho = self.model.density(&p);
            if rho == 0.0 {
                continue;
            }
            let de = match self.added_energy(&p) {
                EnergyValue::Infinite => continue,
                EnergyValue::Finite(v) => v,
            };
            self.pts.push(p);
            let (a, b) = self.ordered(remaining - 1, x, weight * wt * rho, energy + de);
            self.pts.pop();
            num += a;
            z += b;
        }
        (num, z)
    }

    /// Unordered points on the full window.
    fn tensor(&mut self, remaining: usize, weight: f64, energy: f64) -> (f64, f64) {
        if remaining == 0 {
            self.evaluations += 1;
            let b = (-energy).exp();
            return (weight * b * self.f.eval_points(&self.pts), weight * b);
        }
        let nodes = QuadratureRule::new(self.order, self.panels).nodes(self.w, &self.base);
        let (mut num, mut z) = (0.0, 0.0);
        for (p, wt) in nodes {
            if self.evaluations > self.cap {
                break;
            }
            let rho = self.model.density(&p);
            if rho == 0.0 {
                continue;
            }
            let de = match self.added_energy(&p) {
                EnergyValue::Infinite => continue,
                EnergyValue::Finite(v) => v,
            };
            self.pts.push(p);
            let (a, b) = self.tensor(remaining - 1, weight * wt * rho, energy + de);
            self.pts.pop();
            num += a;
            z += b;
        }
        (num, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::PairPotential;

    #[test]
    fn poisson_mean_count() {
        let rho = IntensityModel::constant(0.4).unwrap();
        let w = Window::unit(1);
        let r = oracle_expectation(
            &PointCount,
            &rho,
            None,
            &w,
            &OracleConfig::default().with_n_max(8),
        )
        .unwrap();
        assert!((r.value - 0.4).abs() < 1e-8, "{}", r.value);
        assert!(!r.inconclusive);
    }

    #[test]
    fn gibbs_normalization() {
        let rho = IntensityModel::constant(0.4).unwrap();
        let w = Window::unit(1);
        let m = PotentialModel::new(PairPotential::hard_core(0.3).unwrap());
        let one = BoundedFn::new(|_: &[Point]| 1.0, |_| 1.0);
        let r = oracle_expectation(&one, &rho, Some(&m), &w, &OracleConfig::default()).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn two_dimensional_count() {
        let rho = IntensityModel::constant(0.3).unwrap();
        let w = Window::unit(2);
        let cfg = OracleConfig {
            n_max: 5,
            orders: vec![4, 3, 2, 2, 1],
            ..Default::default()
        };
        let r = oracle_expectation(&PointCount, &rho, None, &w, &cfg).unwrap();
        assert!((r.value - 0.3).abs() < 1e-5, "{}", r.value);
    }
}
