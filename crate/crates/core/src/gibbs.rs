//! Pair potentials, conditional and local energies, and the perturbed densities `rho_gamma`.

use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use rand::Rng;
use serde::Serialize;

use crate::config::Configuration;
use crate::error::{precondition, Result};
use crate::space::{IntensityModel, Point, Window};

/// An energy in `R ∪ {+inf}`. Addition saturates at `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyValue {
    Finite(f64),
    Infinite,
}

impl EnergyValue {
    pub const ZERO: EnergyValue = EnergyValue::Finite(0.0);

    pub fn is_infinite(&self) -> bool {
        matches!(self, EnergyValue::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            EnergyValue::Finite(v) => Some(*v),
            EnergyValue::Infinite => None,
        }
    }

    /// `exp(-E)`, exactly zero for `+inf`.
    pub fn boltzmann(&self) -> f64 {
        match self {
            EnergyValue::Finite(v) => (-v).exp(),
            EnergyValue::Infinite => 0.0,
        }
    }

    /// Floating-point view, `f64::INFINITY` for `+inf`.
    pub fn to_f64(&self) -> f64 {
        match self {
            EnergyValue::Finite(v) => *v,
            EnergyValue::Infinite => f64::INFINITY,
        }
    }
}

impl Add for EnergyValue {
    type Output = EnergyValue;
    fn add(self, rhs: EnergyValue) -> EnergyValue {
        match (self, rhs) {
            (EnergyValue::Finite(a), EnergyValue::Finite(b)) => EnergyValue::Finite(a + b),
            _ => EnergyValue::Infinite,
        }
    }
}

impl Sum for EnergyValue {
    fn sum<I: Iterator<Item = EnergyValue>>(iter: I) -> EnergyValue {
        let mut total = 0.0;
        for e in iter {
            match e {
                EnergyValue::Finite(v) => total += v,
                EnergyValue::Infinite => return EnergyValue::Infinite,
            }
        }
        EnergyValue::Finite(total)
    }
}

impl fmt::Display for EnergyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyValue::Finite(v) => write!(f, "{v}"),
            EnergyValue::Infinite => f.write_str("+inf"),
        }
    }
}

/// Radial pair interactions `phi_pair(x) = f(|x|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairPotential {
    Zero,
    /// `+inf` for `|x| < r0`, zero otherwise.
    HardCore {
        r0: f64,
    },
    /// `a` for `|x| <= r/2`, a smooth monotone step down to `0` at `|x| = r`.
    /// Negative `a` gives an attractive well.
    SoftCore {
        height: f64,
        range: f64,
    },
}

impl PairPotential {
    pub fn hard_core(r0: f64) -> Result<PairPotential> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return precondition(format!("hard-core radius must be positive, got {r0}"));
        }
        Ok(PairPotential::HardCore { r0 })
    }

    pub fn soft_core(height: f64, range: f64) -> Result<PairPotential> {
        if !(range > 0.0 && range.is_finite() && height.is_finite()) {
            return precondition("soft-core needs finite height and positive range");
        }
        Ok(PairPotential::SoftCore { height, range })
    }

    pub fn family(&self) -> &'static str {
        match self {
            PairPotential::Zero => "zero",
            PairPotential::HardCore { .. } => "hardcore",
            PairPotential::SoftCore { .. } => "softcore",
        }
    }

    /// Distance beyond which the potential vanishes.
    pub fn range(&self) -> f64 {
        match self {
            PairPotential::Zero => 0.0,
            PairPotential::HardCore { r0 } => *r0,
            PairPotential::SoftCore { range, .. } => *range,
        }
    }

    /// Radii where the potential loses smoothness.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        match self {
            PairPotential::Zero => vec![],
            PairPotential::HardCore { r0 } => vec![*r0],
            PairPotential::SoftCore { range, .. } => vec![0.5 * range, *range],
        }
    }

    /// Infimum of the potential, used in Gibbs tail bounds.
    pub fn min_value(&self) -> f64 {
        match self {
            PairPotential::SoftCore { height, .. } => height.min(0.0),
            _ => 0.0,
        }
    }

    /// Supremum of `|phi_pair|` on `{phi_pair < inf}`.
    pub fn sup_abs_finite(&self) -> f64 {
        match self {
            PairPotential::SoftCore { height, .. } => height.abs(),
            _ => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PairPotential::Zero)
    }

    /// Potential as a function of the distance `t >= 0`.
    pub fn radial(&self, t: f64) -> EnergyValue {
        match *self {
            PairPotential::Zero => EnergyValue::ZERO,
            PairPotential::HardCore { r0 } => {
                if t < r0 {
                    EnergyValue::Infinite
                } else {
                    EnergyValue::ZERO
                }
            }
            PairPotential::SoftCore { height, range } => EnergyValue::Finite(height * smooth_step(t, range)),
        }
    }

    pub fn eval(&self, x: &Point) -> EnergyValue {
        if self.is_zero() {
            return EnergyValue::ZERO;
        }
        self.radial(x.norm())
    }

    /// `phi_pair(x - y)`, skipping the square root when out of range.
    #[inline]
    pub fn between(&self, x: &Point, y: &Point) -> EnergyValue {
        let r = self.range();
        if r == 0.0 {
            return EnergyValue::ZERO;
        }
        let d2 = x.dist_sq(y);
        if d2 >= r * r {
            return EnergyValue::ZERO;
        }
        self.radial(d2.sqrt())
    }
}

/// `1` on `[0, r/2]`, `0` on `[r, inf)`, `C^inf` in between.
fn smooth_step(t: f64, r: f64) -> f64 {
    let half = 0.5 * r;
    if t <= half {
        return 1.0;
    }
    if t >= r {
        return 0.0;
    }
    let u = (t - half) / half;
    let f = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    let a = f(1.0 - u);
    a / (a + f(u))
}

/// The potential induced by a pair interaction: `Phi({x, y}) = phi_pair(x - y)`,
/// zero on every set that is not a pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialModel {
    pub pair: PairPotential,
}

impl PotentialModel {
    pub fn new(pair: PairPotential) -> PotentialModel {
        PotentialModel { pair }
    }

    pub fn zero() -> PotentialModel {
        PotentialModel::new(PairPotential::Zero)
    }

    pub fn is_zero(&self) -> bool {
        self.pair.is_zero()
    }

    pub fn range(&self) -> f64 {
        self.pair.range()
    }

    /// `E_lam(gamma)`: pairs with at least one endpoint in `lam`.
    pub fn conditional_energy(&self, gamma: &Configuration, lam: &Window) -> EnergyValue {
        if self.is_zero() {
            return EnergyValue::ZERO;
        }
        let pts = gamma.points();
        let inside: Vec<bool> = pts.iter().map(|x| lam.contains(x)).collect();
        let mut total = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                if !(inside[i] || inside[j]) {
                    continue;
                }
                match self.pair.between(&pts[i], &pts[j]) {
                    EnergyValue::Finite(v) => total += v,
                    EnergyValue::Infinite => return EnergyValue::Infinite,
                }
            }
        }
        EnergyValue::Finite(total)
    }

    /// Sum over all pairs.
    pub fn total_energy(&self, gamma: &Configuration) -> EnergyValue {
        if self.is_zero() {
            return EnergyValue::ZERO;
        }
        let pts = gamma.points();
        let mut total = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                match self.pair.between(&pts[i], &pts[j]) {
                    EnergyValue::Finite(v) => total += v,
                    EnergyValue::Infinite => return EnergyValue::Infinite,
                }
            }
        }
        EnergyValue::Finite(total)
    }

    /// `E_{x}(gamma + eps_x) = sum over y in gamma of phi_pair(x - y)`.
    pub fn local_energy(&self, gamma: &Configuration, x: &Point) -> Result<EnergyValue> {
        if gamma.contains(x) {
            return precondition(format!(
                "local energy at {x:?}, which is already a point of gamma"
            ));
        }
        Ok(self.local_energy_unchecked(gamma.points(), x))
    }

    /// Local energy without the membership check, for quadrature nodes.
    #[inline]
    pub fn local_energy_unchecked(&self, points: &[Point], x: &Point) -> EnergyValue {
        if self.is_zero() {
            return EnergyValue::ZERO;
        }
        let mut total = 0.0;
        for y in points {
            match self.pair.between(x, y) {
                EnergyValue::Finite(v) => total += v,
                EnergyValue::Infinite => return EnergyValue::Infinite,
            }
        }
        EnergyValue::Finite(total)
    }

    /// `exp(-E_{x}(gamma + eps_x))` at a quadrature node.
    #[inline]
    pub fn weight_unchecked(&self, points: &[Point], x: &Point) -> f64 {
        if self.is_zero() {
            1.0
        } else {
            self.local_energy_unchecked(points, x).boltzmann()
        }
    }
}

/// `rho_gamma(x) = exp(-E_{x}(gamma + eps_x)) rho(x)`.
pub fn rho_gamma(
    model: &IntensityModel,
    m: &PotentialModel,
    gamma: &Configuration,
    x: &Point,
) -> Result<f64> {
    let e = m.local_energy(gamma, x)?;
    if e.is_infinite() {
        return Ok(0.0);
    }
    Ok(e.boltzmann() * model.density(x))
}

/// Outcome of [`stability_spotcheck`].
#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub bound: f64,
    pub trials: usize,
    /// `(|gamma|, E(gamma))` for every configuration with `E < -B |gamma|`.
    pub violations: Vec<(usize, f64)>,
    /// Smallest `E(gamma) / |gamma|` seen over nonempty configurations with finite energy.
    pub min_energy_per_point: f64,
    pub pass: bool,
}

/// Samples configurations in `w` and looks for `E(gamma) < -B |gamma|`.
///
/// Half the trials are uniform, half are tight clusters where every pair
/// interacts. A pass is evidence of stability, not a proof.
pub fn stability_spotcheck<R: Rng + ?Sized>(
    m: &PotentialModel,
    bound: f64,
    trials: usize,
    w: &Window,
    rng: &mut R,
) -> Result<StabilityReport> {
    if !(bound >= 0.0) {
        return precondition("stability bound B must be >= 0");
    }
    let d = w.dim();
    let mut violations = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let max_points = 24;
    for t in 0..trials {
        let n = rng.random_range(1..=max_points);
        let clustered = t % 2 == 1;
        let center: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let center = w.from_unit(&center);
        let spread = if m.range() > 0.0 {
            0.25 * m.range() / (d as f64).sqrt()
        } else {
            1e-3
        };
        let mut pts = Vec::with_capacity(n);
        while pts.len() < n {
            let p = if clustered {
                let c: Vec<f64> = (0..d)
                    .map(|i| center[i] + spread * (2.0 * rng.random::<f64>() - 1.0))
                    .collect();
                Point::new(&c)?
            } else {
                let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                w.from_unit(&u)
            };
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let gamma = Configuration::new(d, pts)?;
        if let EnergyValue::Finite(e) = m.total_energy(&gamma) {
            min_ratio = min_ratio.min(e / n as f64);
            if e < -bound * n as f64 {
                violations.push((n, e));
            }
        }
    }
    Ok(StabilityReport {
        bound,
        trials,
        pass: violations.is_empty(),
        violations,
        min_energy_per_point: min_ratio,
    })
}
