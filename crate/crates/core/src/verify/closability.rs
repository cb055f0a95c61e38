//! Grid heuristics for the local integrability conditions behind closability.
//!
//! A point `x` belongs to `R(rho)` when `1/rho` is integrable on some
//! neighbourhood of `x`. On a grid of `n` cells we test the neighbourhoods
//! `c ± eps` for `eps` in `{h, h/2, h/4}` (`h` the cell width) with a fine
//! midpoint rule and call a cell center regular when one of them keeps the
//! integral below the threshold. Cells where `rho` exceeds the floor but the
//! center is not regular form the violation set.

use serde::Serialize;

use crate::config::Configuration;
use crate::error::{precondition, Result};
use crate::gibbs::{EnergyValue, PotentialModel};
use crate::space::{IntensityModel, Point, Window};

/// Midpoint samples per cell width in the neighbourhood integrals.
pub const SUBSAMPLES: usize = 1024;

/// Default bound on a local integral of `1/rho`.
pub const DEFAULT_THRESHOLD: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosabilityReport {
    pub grid: String,
    pub cells: usize,
    pub cell_width: f64,
    /// Cells whose centers were found regular.
    pub regular_cells: usize,
    pub regular_measure: f64,
    pub violation_cells: usize,
    pub violation_measure: f64,
    pub verdict: Verdict,
}

impl ClosabilityReport {
    fn from_counts(
        grid: String,
        cells: usize,
        h: f64,
        regular: usize,
        violations: usize,
    ) -> ClosabilityReport {
        let verdict = if violations == 0 {
            Verdict::Holds
        } else if violations > 2 {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        };
        ClosabilityReport {
            grid,
            cells,
            cell_width: h,
            regular_cells: regular,
            regular_measure: regular as f64 * h,
            violation_cells: violations,
            violation_measure: violations as f64 * h,
            verdict,
        }
    }
}

/// Counts `(regular, violations)` on the grid. `inverse` is the integrand
/// whose local integrability is tested, `active` marks cells that count.
fn grid_rule(
    inverse: impl Fn(f64) -> f64,
    active: impl Fn(f64) -> bool,
    a: f64,
    b: f64,
    n: usize,
    threshold: f64,
) -> (usize, usize) {
    let h = (b - a) / n as f64;
    let delta = h / SUBSAMPLES as f64;
    let mut regular = 0;
    let mut violations = 0;
    for i in 0..n {
        let c = a + (i as f64 + 0.5) * h;
        let ok = [h, h / 2.0, h / 4.0].iter().any(|&eps| {
            let m = (2.0 * eps / delta).round() as usize;
            let lo = c - eps;
            let mut sum = 0.0;
            for j in 0..m {
                sum += inverse(lo + (j as f64 + 0.5) * delta) * delta;
                if !(sum < threshold) {
                    return false;
                }
            }
            true
        });
        if ok {
            regular += 1;
        } else if active(c) {
            violations += 1;
        }
    }
    (regular, violations)
}

/// Grid estimate of `R(rho)` for a one-dimensional density on `[a, b]`.
///
/// The verdict is `fails` when cells with `rho > floor` outside the regular
/// set have total length above two cells, `holds` when there are none, and
/// `inconclusive` otherwise.
pub fn closability_diagnostic(
    density: impl Fn(f64) -> f64,
    interval: (f64, f64),
    n: usize,
    floor: f64,
    threshold: f64,
) -> Result<ClosabilityReport> {
    let (a, b) = interval;
    if n < 100 {
        return precondition(format!("closability grid needs at least 100 cells, got {n}"));
    }
    if !(a < b) {
        return precondition(format!("empty interval [{a}, {b}]"));
    }
    let (regular, violations) = grid_rule(
        |x| 1.0 / density(x).max(f64::MIN_POSITIVE),
        |x| density(x) > floor,
        a,
        b,
        n,
        threshold,
    );
    let grid = format!("{n} cells on [{a}, {b}]");
    Ok(ClosabilityReport::from_counts(
        grid,
        n,
        (b - a) / n as f64,
        regular,
        violations,
    ))
}

/// Smith–Volterra–Cantor set: from `[0, 1]` remove, at step `k`, an open
/// middle interval of length `4^{-k}` from each remaining piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FatCantor {
    pub depth: u32,
}

impl FatCantor {
    pub fn new(depth: u32) -> FatCantor {
        FatCantor { depth }
    }

    pub fn contains(&self, x: f64) -> bool {
        if !(0.0..=1.0).contains(&x) {
            return false;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut gap = 1.0;
        for _ in 0..self.depth {
            gap /= 4.0;
            let mid = 0.5 * (lo + hi);
            let (gl, gr) = (mid - gap / 2.0, mid + gap / 2.0);
            if x > gl && x < gr {
                return false;
            }
            if x <= gl {
                hi = gl;
            } else {
                lo = gr;
            }
        }
        true
    }

    /// `1 - sum_k 2^{k-1} 4^{-k}`; tends to 1/2.
    pub fn measure(&self) -> f64 {
        1.0 - (1..=self.depth).map(|k| 0.5f64.powi(k as i32 + 1)).sum::<f64>()
    }

    pub fn indicator(&self, x: f64) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }
}

/// For each sampled configuration, tests local integrability of
/// `e^{E_x(gamma + eps_x)} / rho(x)` on the finite-energy region, i.e. of
/// `1 / rho_gamma` where `rho_gamma > 0`. Windows of dimension two and three
/// are probed along the first axis through the window center.
///
/// The worst per-configuration verdict wins.
pub fn pair_potential_closability_check(
    m: &PotentialModel,
    model: &IntensityModel,
    w: &Window,
    samples: &[Configuration],
    n: usize,
    floor: f64,
) -> Result<ClosabilityReport> {
    if n < 100 {
        return precondition(format!("closability grid needs at least 100 cells, got {n}"));
    }
    let (a, b) = (w.lower()[0], w.upper()[0]);
    let center = w.center();
    let at = |t: f64| center.with_coord(0, t);
    let h = (b - a) / n as f64;
    let mut worst = ClosabilityReport::from_counts(String::new(), n, h, n, 0);
    let mut total_regular = 0;
    let mut total_violations = 0;
    for gamma in samples {
        let pts = gamma.points();
        let energy = |x: &Point| m.local_energy_unchecked(pts, x);
        let (regular, violations) = grid_rule(
            |t| {
                let x = at(t);
                match energy(&x) {
                    EnergyValue::Infinite => 0.0,
                    EnergyValue::Finite(e) => e.exp() / model.density(&x).max(f64::MIN_POSITIVE),
                }
            },
            |t| {
                let x = at(t);
                !energy(&x).is_infinite() && energy(&x).boltzmann() * model.density(&x) > floor
            },
            a,
            b,
            n,
            DEFAULT_THRESHOLD,
        );
        total_regular += regular;
        total_violations += violations;
        let r = ClosabilityReport::from_counts(String::new(), n, h, regular, violations);
        if rank(r.verdict) > rank(worst.verdict) {
            worst = r;
        }
    }
    let k = samples.len().max(1);
    Ok(ClosabilityReport {
        grid: format!("{n} cells on [{a}, {b}] x {} configurations", samples.len()),
        regular_cells: total_regular / k,
        regular_measure: total_regular as f64 * h / k as f64,
        violation_cells: total_violations,
        violation_measure: total_violations as f64 * h / k as f64,
        ..worst
    })
}

fn rank(v: Verdict) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Inconclusive => 1,
        Verdict::Fails => 2,
    }
}
