//! Pointwise check that the add-one-point derivative lowers the chaos order:
//! `int [Q_n(gamma + eps_x) - Q_n(gamma)] psi(x) rho(x) dx = n (phi, psi) Q_{n-1}(gamma)`.

use serde::Serialize;

use super::identities::MAX_CHAOS_ORDER;
use super::run::Setup;
use crate::calculus::CharlierSystem;
use crate::error::{precondition, Result};
use crate::sampler::{PoissonSampler, RandomStream};
use crate::space::{l2_inner, Breaks, Integrator, SmoothTestFunction};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnihilationCase {
    pub configuration: usize,
    pub order: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnihilationReport {
    pub identity: String,
    pub configurations: usize,
    pub max_order: usize,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    pub worst: Option<AnnihilationCase>,
}

/// Checks orders `1..=max_order` on `configs` Poisson samples.
///
/// The error is taken relative to `max(|rhs|, n |(phi, psi)|)`, so that
/// configurations where `Q_{n-1}` nearly vanishes are not judged on noise.
pub fn verify_annihilation(
    phi: &SmoothTestFunction,
    psi: &SmoothTestFunction,
    max_order: usize,
    setup: &Setup,
    configs: usize,
    seed: u64,
    tolerance: f64,
) -> Result<AnnihilationReport> {
    if max_order > MAX_CHAOS_ORDER {
        return precondition(format!("chaos order {max_order} above {MAX_CHAOS_ORDER}"));
    }
    let w = &setup.window;
    let model = &setup.model;
    let q = CharlierSystem::new(phi, model, w)?;
    let inner = l2_inner(phi, psi, model, w)?;
    let sampler = PoissonSampler::new(model, w)?;
    let mut rng = RandomStream::new(seed, 0, "annihilation");
    let support = psi.support();
    let mut breaks = Breaks::new(w.dim());
    phi.breakpoints(&mut breaks);
    psi.breakpoints(&mut breaks);
    model.breakpoints(&mut breaks);
    let integrator = Integrator::default();

    let mut worst: Option<AnnihilationCase> = None;
    for c in 0..configs {
        let gamma = sampler.sample(&mut rng);
        let base = q.eval_upto(max_order, &gamma)?;
        for n in 1..=max_order {
            let lhs = integrator
                .integrate(&support, &breaks, |x| {
                    let p = psi.value(x);
                    if p == 0.0 || gamma.contains(x) {
                        return 0.0;
                    }
                    let added = gamma.add_point(*x).and_then(|g| q.eval(n, &g)).unwrap_or(base[n]);
                    (added - base[n]) * p * model.density(x)
                })?
                .value;
            let rhs = n as f64 * inner * base[n - 1];
            let scale = rhs.abs().max(n as f64 * inner.abs());
            let rel_error = if scale == 0.0 {
                (lhs - rhs).abs()
            } else {
                (lhs - rhs).abs() / scale
            };
            if worst.as_ref().is_none_or(|w| rel_error > w.rel_error) {
                worst = Some(AnnihilationCase {
                    configuration: c,
                    order: n,
                    lhs,
                    rhs,
                    rel_error,
                });
            }
        }
    }
    let max_rel_error = worst.as_ref().map_or(0.0, |w| w.rel_error);
    Ok(AnnihilationReport {
        identity: "annihilation".into(),
        configurations: configs,
        max_order,
        max_rel_error,
        tolerance,
        pass: max_rel_error <= tolerance,
        seed,
        worst,
    })
}
