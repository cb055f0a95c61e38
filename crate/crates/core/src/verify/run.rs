//! Replicated sampling shared by every checker.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::Configuration;
use crate::error::{precondition, Error, Result};
use crate::gibbs::PotentialModel;
use crate::sampler::{
    ChainDiagnostics, GibbsChain, GibbsChainParams, MoveStats, PoissonSampler, RandomStream,
};
use crate::space::{Breaks, IntensityModel, Point, QuadratureRule, Window};

/// Knobs shared by all Monte Carlo checks.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Independent streams the sample budget is split across.
    pub replicates: usize,
    /// Thread cap; `None` uses the global rayon pool. Results do not depend on it.
    pub workers: Option<usize>,
    /// Gauss–Legendre order per panel of the per-sample integrals in one dimension.
    pub inner_order_1d: usize,
    /// Same in two and three dimensions.
    pub inner_order_nd: usize,
    pub inner_panels: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            replicates: 16,
            workers: None,
            inner_order_1d: 16,
            inner_order_nd: 10,
            inner_panels: 4,
        }
    }
}

/// Intensity, window and run options.
#[derive(Clone, Debug)]
pub struct Setup {
    pub model: IntensityModel,
    pub window: Window,
    pub options: RunOptions,
}

impl Setup {
    pub fn new(model: IntensityModel, window: Window) -> Result<Setup> {
        if let Some(d) = model.dim() {
            if d != window.dim() {
                return precondition(format!(
                    "intensity lives in dimension {d}, window in dimension {}",
                    window.dim()
                ));
            }
        }
        Ok(Setup {
            model,
            window,
            options: RunOptions::default(),
        })
    }

    pub fn with_options(mut self, options: RunOptions) -> Setup {
        self.options = options;
        self
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub(crate) fn inner_rule(&self) -> QuadratureRule {
        let order = if self.dim() == 1 {
            self.options.inner_order_1d
        } else {
            self.options.inner_order_nd
        };
        QuadratureRule::new(order, self.options.inner_panels)
    }
}

/// A Gibbs law on the window: potential, chain tuning and optional frozen boundary.
#[derive(Clone, Debug)]
pub struct GibbsSpec {
    pub potential: PotentialModel,
    pub chain: GibbsChainParams,
    pub boundary: Option<Configuration>,
}

impl GibbsSpec {
    pub fn new(potential: PotentialModel, chain: GibbsChainParams) -> GibbsSpec {
        GibbsSpec {
            potential,
            chain,
            boundary: None,
        }
    }

    pub fn with_boundary(mut self, xi: Configuration) -> GibbsSpec {
        self.boundary = Some(xi);
        self
    }
}

/// Law the samples are drawn from.
#[derive(Clone, Debug)]
pub enum Law {
    Poisson,
    Gibbs(GibbsSpec),
}

impl Law {
    /// A Gibbs law without interaction and without boundary is the Poisson law;
    /// it is then sampled exactly.
    pub(crate) fn is_poisson(&self) -> bool {
        match self {
            Law::Poisson => true,
            Law::Gibbs(g) => g.potential.is_zero() && g.boundary.is_none(),
        }
    }

    pub(crate) fn potential(&self) -> PotentialModel {
        match self {
            Law::Poisson => PotentialModel::zero(),
            Law::Gibbs(g) => g.potential,
        }
    }

    pub(crate) fn boundary_points(&self) -> &[Point] {
        match self {
            Law::Gibbs(GibbsSpec {
                boundary: Some(b), ..
            }) => b.points(),
            _ => &[],
        }
    }
}

/// Per-sample values of `K` functionals, grouped by replicate.
pub(crate) struct SampleRun<const K: usize> {
    pub series: Vec<Vec<[f64; K]>>,
    pub chain: Option<ChainDiagnostics>,
    pub correlated: bool,
}

impl<const K: usize> SampleRun<K> {
    /// Series of one component, or of a combination of components.
    pub fn component(&self, f: impl Fn(&[f64; K]) -> f64) -> Vec<Vec<f64>> {
        self.series.iter().map(|s| s.iter().map(&f).collect()).collect()
    }
}

type ReplicateOutput<const K: usize> = Result<(Vec<[f64; K]>, Option<ChainDiagnostics>)>;

fn split(n: usize, r: usize) -> Vec<usize> {
    (0..r).map(|i| n / r + usize::from(i < n % r)).collect()
}

/// Draws `n` samples of `law` split over the replicate streams of `seed` and
/// evaluates `f` on each. Replicates run in parallel and are reassembled in
/// index order, so the output does not depend on the worker count.
pub(crate) fn run_samples<const K: usize, F>(
    setup: &Setup,
    law: &Law,
    n: usize,
    seed: u64,
    f: F,
) -> Result<SampleRun<K>>
where
    F: Fn(&Configuration) -> Result<[f64; K]> + Sync,
{
    if n < 2 {
        return precondition("at least two samples are needed for a standard error");
    }
    let reps = setup.options.replicates.clamp(1, n);
    let counts = split(n, reps);
    let poisson = law.is_poisson();
    let sampler = PoissonSampler::new(&setup.model, &setup.window)?;

    let one = |r: usize| -> ReplicateOutput<K> {
        let mut rng = RandomStream::substream(seed, r as u64);
        let mut out = Vec::with_capacity(counts[r]);
        if poisson {
            for _ in 0..counts[r] {
                let gamma = sampler.sample(&mut rng);
                out.push(f(&gamma)?);
            }
            return Ok((out, None));
        }
        let Law::Gibbs(spec) = law else {
            unreachable!("non-Poisson law is Gibbs")
        };
        let mut chain = GibbsChain::new(&setup.model, &spec.potential, &setup.window, &spec.chain)?;
        if let Some(b) = &spec.boundary {
            chain = chain.with_boundary(b)?;
        }
        chain.burn_in(&mut rng)?;
        for _ in 0..counts[r] {
            let gamma = chain.next_sample(&mut rng)?;
            out.push(f(gamma)?);
        }
        Ok((out, Some(chain.diagnostics())))
    };

    let results: Vec<ReplicateOutput<K>> = match setup.options.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
            pool.install(|| (0..reps).into_par_iter().map(one).collect())
        }
        None => (0..reps).into_par_iter().map(one).collect(),
    };
    let mut series = Vec::with_capacity(reps);
    let mut diags = Vec::new();
    for r in results {
        let (s, d) = r?;
        series.push(s);
        diags.extend(d);
    }
    Ok(SampleRun {
        series,
        chain: merge_diagnostics(&diags),
        correlated: !poisson,
    })
}

fn merge_diagnostics(diags: &[ChainDiagnostics]) -> Option<ChainDiagnostics> {
    if diags.is_empty() {
        return None;
    }
    let sum = |get: fn(&ChainDiagnostics) -> MoveStats| {
        diags.iter().fold(MoveStats::default(), |acc, d| {
            let m = get(d);
            MoveStats {
                proposed: acc.proposed + m.proposed,
                accepted: acc.accepted + m.accepted,
            }
        })
    };
    let birth = sum(|d| d.birth);
    let death = sum(|d| d.death);
    let translate = sum(|d| d.translate);
    let samples: u64 = diags.iter().map(|d| d.samples).sum();
    let mean_population = if samples == 0 {
        0.0
    } else {
        diags
            .iter()
            .map(|d| d.mean_population * d.samples as f64)
            .sum::<f64>()
            / samples as f64
    };
    let autocorr_time = diags.iter().map(|d| d.autocorr_time).sum::<f64>() / diags.len() as f64;
    Some(ChainDiagnostics {
        birth,
        death,
        translate,
        birth_rate: birth.rate(),
        death_rate: death.rate(),
        translate_rate: translate.rate(),
        mean_population,
        autocorr_time,
        samples,
    })
}

/// Tensor nodes for an integral over `region` whose integrand may kink at
/// the fixed `base` breakpoints and at `y ± radius` around each of `pts`.
pub(crate) struct InnerNodes {
    rule: QuadratureRule,
    region: Window,
    base: Breaks,
    radii: Vec<f64>,
    fixed: Option<Vec<(Point, f64)>>,
}

impl InnerNodes {
    pub fn new(setup: &Setup, region: Window, base: Breaks, radii: Vec<f64>) -> InnerNodes {
        let rule = setup.inner_rule();
        let fixed = radii.is_empty().then(|| rule.nodes(&region, &base));
        InnerNodes {
            rule,
            region,
            base,
            radii,
            fixed,
        }
    }

    /// Nodes for one configuration; shared when no breakpoint depends on the points.
    pub fn nodes<'a>(&'a self, pts: &[&[Point]], scratch: &'a mut Vec<(Point, f64)>) -> &'a [(Point, f64)] {
        if let Some(f) = &self.fixed {
            return f;
        }
        let mut b = self.base.clone();
        for set in pts {
            for y in set.iter() {
                for r in &self.radii {
                    for i in 0..y.dim() {
                        b.add(i, y[i] - r);
                        b.add(i, y[i] + r);
                    }
                }
            }
        }
        *scratch = self.rule.nodes(&self.region, &b);
        scratch
    }
}

/// Row of the per-replicate CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub n: usize,
    pub lhs_mean: f64,
    pub rhs_mean: f64,
    pub paired_mean: f64,
}
