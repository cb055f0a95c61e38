use serde::Serialize;

use crate::sampler::integrated_autocorr_time;

/// Streaming mean and sum of squared deviations (Welford), mergeable (Chan et al.).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with the `n - 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
    /// Integrated autocorrelation time used to inflate the variance (1 for independent samples).
    pub autocorr_time: f64,
    pub replicate_means: Vec<f64>,
}

impl MonteCarloEstimate {
    /// Combines per-replicate value series in replicate order.
    ///
    /// With `correlated` set, the variance is inflated by the mean
    /// integrated autocorrelation time of the replicate series.
    pub fn from_replicates(series: &[Vec<f64>], correlated: bool) -> MonteCarloEstimate {
        let mut total = Accumulator::default();
        let mut replicate_means = Vec::with_capacity(series.len());
        let mut taus = Vec::new();
        for s in series {
            let mut acc = Accumulator::default();
            for &x in s {
                acc.push(x);
            }
            replicate_means.push(acc.mean());
            total.merge(&acc);
            if correlated && s.len() >= 4 {
                taus.push(integrated_autocorr_time(s));
            }
        }
        let tau = if taus.is_empty() {
            1.0
        } else {
            taus.iter().sum::<f64>() / taus.len() as f64
        };
        let n = total.count();
        let se = if n < 2 {
            0.0
        } else {
            (total.variance() * tau / n as f64).sqrt()
        };
        MonteCarloEstimate {
            mean: total.mean(),
            se,
            n,
            autocorr_time: tau,
            replicate_means,
        }
    }

    pub fn summary(&self) -> MeanSe {
        MeanSe {
            mean: self.mean,
            se: self.se,
        }
    }
}

/// `{mean, se}` as written into reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}
