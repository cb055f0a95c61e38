use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::poisson::PoissonSampler;
use crate::config::Configuration;
use crate::error::{precondition, Error, Result};
use crate::gibbs::{EnergyValue, PotentialModel};
use crate::space::{IntensityModel, Point, Window};

/// Tuning of the birth–death–translate chain.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsChainParams {
    /// Sweeps discarded before the first sample.
    pub burn_in: u64,
    /// Sweeps between returned samples.
    pub thinning: u64,
    pub p_birth: f64,
    pub p_death: f64,
    pub p_translate: f64,
    /// Standard deviation of a translation, as a fraction of the shortest window side.
    pub step_size: f64,
    /// Consecutive rejections after which the chain reports being stuck.
    pub stuck_limit: u64,
}

impl Default for GibbsChainParams {
    fn default() -> Self {
        GibbsChainParams {
            burn_in: 10_000,
            thinning: 10,
            p_birth: 0.35,
            p_death: 0.35,
            p_translate: 0.3,
            step_size: 0.1,
            stuck_limit: 1_000_000,
        }
    }
}

impl GibbsChainParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [self.p_birth, self.p_death, self.p_translate];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return precondition("move probabilities must lie in [0, 1]");
        }
        if ((self.p_birth + self.p_death + self.p_translate) - 1.0).abs() > 1e-12 {
            return precondition("move probabilities must sum to 1");
        }
        if self.p_birth != self.p_death {
            return precondition("birth and death probabilities must be equal");
        }
        if self.p_birth == 0.0 {
            return precondition("birth probability must be positive");
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return precondition("translation step size must be positive");
        }
        if self.thinning == 0 {
            return precondition("thinning must be at least one sweep");
        }
        if self.stuck_limit == 0 {
            return precondition("stuck limit must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MoveStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveStats {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }
}

/// Acceptance statistics and mixing summary of a chain run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ChainDiagnostics {
    pub birth: MoveStats,
    pub death: MoveStats,
    pub translate: MoveStats,
    pub birth_rate: f64,
    pub death_rate: f64,
    pub translate_rate: f64,
    /// Mean of `N` over the returned samples.
    pub mean_population: f64,
    /// Integrated autocorrelation time of `N` along the returned samples,
    /// in units of samples (1 means uncorrelated).
    pub autocorr_time: f64,
    pub samples: u64,
}

/// Birth–death–translate Metropolis–Hastings chain targeting the Gibbs
/// kernel on a window, with an optional frozen boundary configuration
/// outside the window.
#[derive(Clone, Debug)]
pub struct GibbsChain {
    potential: PotentialModel,
    params: GibbsChainParams,
    births: PoissonSampler,
    boundary: Vec<Point>,
    state: Configuration,
    sweep_len: u64,
    step: f64,
    rejections: u64,
    stats: [MoveStats; 3],
    populations: Vec<f64>,
}

impl GibbsChain {
    pub fn new(
        model: &IntensityModel,
        potential: &PotentialModel,
        w: &Window,
        params: &GibbsChainParams,
    ) -> Result<GibbsChain> {
        params.validate()?;
        let births = PoissonSampler::new(model, w)?;
        let sweep_len = births.mass().ceil().max(1.0) as u64;
        let min_side = (0..w.dim()).map(|i| w.side(i)).fold(f64::INFINITY, f64::min);
        Ok(GibbsChain {
            potential: *potential,
            params: params.clone(),
            births,
            boundary: Vec::new(),
            state: Configuration::empty(w.dim()),
            sweep_len,
            step: params.step_size * min_side,
            rejections: 0,
            stats: [MoveStats::default(); 3],
            populations: Vec::new(),
        })
    }

    /// Freezes `xi` outside the window; energies then include pairs with one end in `xi`.
    pub fn with_boundary(mut self, xi: &Configuration) -> Result<GibbsChain> {
        let w = *self.births.window();
        if xi.dim() != w.dim() {
            return precondition("boundary configuration has the wrong dimension");
        }
        if xi.iter().any(|x| w.contains(x)) {
            return precondition("boundary configuration must lie outside the window");
        }
        self.boundary = xi.points().to_vec();
        Ok(self)
    }

    pub fn state(&self) -> &Configuration {
        &self.state
    }

    pub fn window(&self) -> &Window {
        self.births.window()
    }

    /// Proposals per sweep: `max(1, ceil(sigma(w)))`.
    pub fn sweep_len(&self) -> u64 {
        self.sweep_len
    }

    fn local_energy(&self, x: &Point, skip: Option<usize>) -> EnergyValue {
        if self.potential.is_zero() {
            return EnergyValue::ZERO;
        }
        let pts = self.state.points();
        let e = match skip {
            None => self.potential.local_energy_unchecked(pts, x),
            Some(i) => {
                self.potential.local_energy_unchecked(&pts[..i], x)
                    + self.potential.local_energy_unchecked(&pts[i + 1..], x)
            }
        };
        e + self.potential.local_energy_unchecked(&self.boundary, x)
    }

    /// One proposal.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let mass = self.births.mass();
        if mass <= 0.0 {
            // the law is the point mass at the empty configuration
            return Ok(());
        }
        let n = self.state.len();
        let u: f64 = rng.random();
        let accepted = if u < self.params.p_birth {
            let x = self.births.sample_point(rng);
            let ratio = match self.local_energy(&x, None) {
                EnergyValue::Infinite => 0.0,
                EnergyValue::Finite(de) => mass / (n as f64 + 1.0) * (-de).exp(),
            };
            let ok = accept(ratio, rng) && !self.state.contains(&x);
            if ok {
                self.state.insert(x)?;
            }
            self.stats[0].record(ok);
            ok
        } else if u < self.params.p_birth + self.params.p_death {
            let ok = if n == 0 {
                false
            } else {
                let i = rng.random_range(0..n);
                let x = self.state.points()[i];
                let ratio = match self.local_energy(&x, Some(i)) {
                    EnergyValue::Infinite => f64::INFINITY,
                    EnergyValue::Finite(de) => n as f64 / mass * de.exp(),
                };
                let ok = accept(ratio, rng);
                if ok {
                    self.state.remove_index(i);
                }
                ok
            };
            self.stats[1].record(ok);
            ok
        } else {
            let ok = if n == 0 {
                false
            } else {
                let i = rng.random_range(0..n);
                let x = self.state.points()[i];
                let mut y = x;
                for k in 0..x.dim() {
                    let z: f64 = StandardNormal.sample(rng);
                    y = y.with_coord(k, x[k] + self.step * z);
                }
                if !self.births.window().contains(&y) || self.state.contains(&y) {
                    false
                } else {
                    let model = self.births.model();
                    let (rx, ry) = (model.density(&x), model.density(&y));
                    let ratio = match (self.local_energy(&x, Some(i)), self.local_energy(&y, Some(i))) {
                        (_, EnergyValue::Infinite) => 0.0,
                        (EnergyValue::Infinite, _) => f64::INFINITY,
                        (EnergyValue::Finite(ex), EnergyValue::Finite(ey)) => {
                            if rx > 0.0 {
                                ry / rx * (ex - ey).exp()
                            } else if ry > 0.0 {
                                f64::INFINITY
                            } else {
                                0.0
                            }
                        }
                    };
                    let ok = accept(ratio, rng);
                    if ok {
                        self.state.remove_index(i);
                        self.state.insert(y)?;
                    }
                    ok
                }
            };
            self.stats[2].record(ok);
            ok
        };
        if accepted {
            self.rejections = 0;
        } else {
            self.rejections += 1;
            if self.rejections > self.params.stuck_limit {
                return Err(Error::ChainStuck {
                    rejections: self.rejections,
                });
            }
        }
        Ok(())
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        for _ in 0..self.sweep_len {
            self.step(rng)?;
        }
        Ok(())
    }

    pub fn burn_in<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        for _ in 0..self.params.burn_in {
            self.sweep(rng)?;
        }
        Ok(())
    }

    /// Advances by the thinning interval and returns the new state.
    pub fn next_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<&Configuration> {
        for _ in 0..self.params.thinning {
            self.sweep(rng)?;
        }
        self.populations.push(self.state.len() as f64);
        Ok(&self.state)
    }

    pub fn diagnostics(&self) -> ChainDiagnostics {
        let [birth, death, translate] = self.stats;
        let n = self.populations.len();
        let mean = if n == 0 {
            0.0
        } else {
            self.populations.iter().sum::<f64>() / n as f64
        };
        ChainDiagnostics {
            birth,
            death,
            translate,
            birth_rate: birth.rate(),
            death_rate: death.rate(),
            translate_rate: translate.rate(),
            mean_population: mean,
            autocorr_time: integrated_autocorr_time(&self.populations),
            samples: n as u64,
        }
    }
}

#[inline]
fn accept<R: Rng + ?Sized>(ratio: f64, rng: &mut R) -> bool {
    if ratio >= 1.0 {
        return true;
    }
    if ratio <= 0.0 {
        return false;
    }
    rng.random::<f64>() < ratio
}

/// Integrated autocorrelation time with Sokal's automatic window (`c = 5`).
pub fn integrated_autocorr_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 1.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c: f64 = (0..n - lag)
            .map(|i| (xs[i] - mean) * (xs[i + lag] - mean))
            .sum::<f64>()
            / (n as f64 * var);
        tau += 2.0 * c;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Runs the burn-in and returns one configuration with the chain diagnostics.
pub fn sample_gibbs<R: Rng + ?Sized>(
    model: &IntensityModel,
    m: &PotentialModel,
    w: &Window,
    params: &GibbsChainParams,
    rng: &mut R,
) -> Result<(Configuration, ChainDiagnostics)> {
    let mut chain = GibbsChain::new(model, m, w, params)?;
    chain.burn_in(rng)?;
    let gamma = chain.next_sample(rng)?.clone();
    Ok((gamma, chain.diagnostics()))
}
