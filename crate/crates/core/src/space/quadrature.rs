//! Tensor Gauss–Legendre quadrature on boxes.
//!
//! Each axis of a box is cut into panels: a uniform subdivision plus any
//! caller-supplied breakpoints (support edges, kinks, jumps). Every panel
//! carries a Gauss–Legendre rule of the requested order, and the box rule
//! is the tensor product of the per-axis composite rules. Error estimates
//! compare the rule of order `k` with the rule of order `2k` on the same
//! panel layout.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::geometry::{Point, Window};
use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(order: usize) -> GaussLegendre {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared, lazily built rule of the given order.
pub fn gauss_legendre(order: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| Box::leak(Box::new(GaussLegendre::compute(order))))
}

/// Per-axis breakpoints where the integrand may lose smoothness.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Breaks {
    axes: Vec<Vec<f64>>,
}

impl Breaks {
    pub fn new(dim: usize) -> Breaks {
        Breaks {
            axes: vec![Vec::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn add(&mut self, axis: usize, at: f64) {
        if at.is_finite() {
            self.axes[axis].push(at);
        }
    }

    pub fn add_box(&mut self, b: &Window) {
        for i in 0..b.dim() {
            self.add(i, b.lower()[i]);
            self.add(i, b.upper()[i]);
        }
    }

    pub fn extend(&mut self, other: &Breaks) {
        for (a, b) in self.axes.iter_mut().zip(other.axes.iter()) {
            a.extend_from_slice(b);
        }
    }

    pub fn axis(&self, axis: usize) -> &[f64] {
        self.axes.get(axis).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Sorted panel edges of `[lo, hi]`: `panels` uniform pieces refined by `breaks`.
pub fn panel_edges(lo: f64, hi: f64, panels: usize, breaks: &[f64]) -> Vec<f64> {
    let panels = panels.max(1);
    let mut edges: Vec<f64> = (0..=panels)
        .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
        .collect();
    edges[panels] = hi;
    let scale = (hi - lo).abs().max(1.0);
    for &b in breaks {
        if b > lo && b < hi {
            edges.push(b);
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * scale);
    edges
}

/// Composite one-dimensional node list.
pub fn composite_nodes(lo: f64, hi: f64, order: usize, panels: usize, breaks: &[f64]) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(order);
    let edges = panel_edges(lo, hi, panels, breaks);
    let mut out = Vec::with_capacity(order * (edges.len() - 1));
    for e in edges.windows(2) {
        out.extend(rule.mapped(e[0], e[1]));
    }
    out
}

/// A fixed tensor rule: `order` Gauss–Legendre nodes per panel, `panels`
/// uniform panels per axis (further split at breakpoints).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    pub order: usize,
    pub panels: usize,
}

/// Value with an order-doubling error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error: f64,
    /// Order of the finer rule that produced `value`.
    pub order: usize,
}

impl QuadratureRule {
    pub fn new(order: usize, panels: usize) -> QuadratureRule {
        QuadratureRule {
            order: order.max(1),
            panels: panels.max(1),
        }
    }

    pub fn doubled(&self) -> QuadratureRule {
        QuadratureRule::new(self.order * 2, self.panels)
    }

    /// Full tensor node list on `w` as `(point, weight)` pairs.
    pub fn nodes(&self, w: &Window, breaks: &Breaks) -> Vec<(Point, f64)> {
        let d = w.dim();
        let axes: Vec<Vec<(f64, f64)>> = (0..d)
            .map(|i| {
                composite_nodes(
                    w.lower()[i],
                    w.upper()[i],
                    self.order,
                    self.panels,
                    breaks.axis(i),
                )
            })
            .collect();
        let total: usize = axes.iter().map(|a| a.len()).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        let mut coords = vec![0.0; d];
        loop {
            let mut weight = 1.0;
            for i in 0..d {
                let (x, wt) = axes[i][idx[i]];
                coords[i] = x;
                weight *= wt;
            }
            out.push((Point::from_slice(&coords), weight));
            // odometer
            let mut axis = 0;
            loop {
                if axis == d {
                    return out;
                }
                idx[axis] += 1;
                if idx[axis] < axes[axis].len() {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }

    pub fn integrate(&self, w: &Window, breaks: &Breaks, mut f: impl FnMut(&Point) -> f64) -> f64 {
        self.nodes(w, breaks).iter().map(|(x, wt)| wt * f(x)).sum()
    }

    /// Compare this rule with its doubled-order sibling.
    pub fn estimate(
        &self,
        w: &Window,
        breaks: &Breaks,
        mut f: impl FnMut(&Point) -> f64,
    ) -> QuadratureEstimate {
        let coarse = self.integrate(w, breaks, &mut f);
        let fine_rule = self.doubled();
        let fine = fine_rule.integrate(w, breaks, &mut f);
        QuadratureEstimate {
            value: fine,
            error: (fine - coarse).abs(),
            order: fine_rule.order,
        }
    }
}

/// Order-doubling driver: raise the order until the estimate is under tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub base_order: usize,
    pub max_order: usize,
    pub panels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            rel_tol: 1e-8,
            abs_tol: 1e-13,
            base_order: 8,
            max_order: 128,
            panels: 4,
        }
    }
}

impl Integrator {
    pub fn with_tolerance(rel_tol: f64) -> Integrator {
        Integrator {
            rel_tol,
            ..Integrator::default()
        }
    }

    pub fn integrate(
        &self,
        w: &Window,
        breaks: &Breaks,
        f: impl Fn(&Point) -> f64,
    ) -> Result<QuadratureEstimate> {
        let d = w.dim() as i32;
        let mut rule = QuadratureRule::new(self.base_order, self.panels);
        let mut coarse = rule.integrate(w, breaks, &f);
        let mut last_error = f64::INFINITY;
        loop {
            let fine_rule = rule.doubled();
            let nodes_per_axis = (fine_rule.order * fine_rule.panels) as f64;
            // the node budget caps the order in higher dimension
            if fine_rule.order > self.max_order || nodes_per_axis.powi(d) > MAX_TENSOR_NODES {
                return Err(Error::Quadrature {
                    estimate: last_error,
                    tolerance: (self.rel_tol * coarse.abs()).max(self.abs_tol),
                    order: rule.order,
                });
            }
            let fine = fine_rule.integrate(w, breaks, &f);
            let error = (fine - coarse).abs();
            if error <= (self.rel_tol * fine.abs()).max(self.abs_tol) {
                return Ok(QuadratureEstimate {
                    value: fine,
                    error,
                    order: fine_rule.order,
                });
            }
            last_error = error;
            rule = fine_rule;
            coarse = fine;
        }
    }
}

const MAX_TENSOR_NODES: f64 = 4.0e6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..40 {
            let s: f64 = gauss_legendre(n).weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "order {n}: {s}");
        }
    }

    #[test]
    fn exact_on_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=20usize {
            let rule = gauss_legendre(n);
            for deg in 0..(2 * n) {
                // integral of x^deg over [0, 2]
                let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
                let got = rule.integrate(0.0, 2.0, |x| x.powi(deg as i32));
                assert!(
                    ((got - exact) / exact).abs() < 1e-12,
                    "order {n} degree {deg}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn tensor_rule_exact_per_axis() {
        let w = Window::new(&[0.0, -1.0], &[1.0, 2.0]).unwrap();
        let rule = QuadratureRule::new(4, 1);
        // x^7 y^5 is degree 7 per axis; exact for order 4.
        let exact = (1.0 / 8.0) * ((64.0 - 1.0) / 6.0);
        let got = rule.integrate(&w, &Breaks::new(2), |p| p[0].powi(7) * p[1].powi(5));
        assert!(((got - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_make_kinks_exact() {
        let w = Window::interval(-1.0, 1.0).unwrap();
        let mut b = Breaks::new(1);
        b.add(0, 0.0);
        let got = QuadratureRule::new(2, 1).integrate(&w, &b, |p| p[0].abs());
        assert!((got - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integrator_reports_non_convergence() {
        let w = Window::interval(0.0, 1.0).unwrap();
        let tight = Integrator {
            rel_tol: 1e-15,
            max_order: 16,
            ..Integrator::default()
        };
        // jump at a point not declared as a breakpoint
        let cut = 0.3 * std::f64::consts::SQRT_2;
        let r = tight.integrate(&w, &Breaks::new(1), |p| if p[0] < cut { 1.0 } else { 0.0 });
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
