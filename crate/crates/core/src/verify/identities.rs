//! Paired Monte Carlo checks of the exact identities.

use std::time::Instant;

use serde::Serialize;

use super::estimate::{MeanSe, MonteCarloEstimate};
use super::run::{run_samples, GibbsSpec, InnerNodes, Law, ReplicateRow, SampleRun, Setup};
use crate::calculus::{
    carre, directional_derivative, divergence_gamma, generator_cylinder, log_derivative_b, mixed_gradient,
    CharlierSystem, CylinderFunction, Functional,
};
use crate::config::Configuration;
use crate::error::{precondition, Result};
use crate::sampler::ChainDiagnostics;
use crate::space::{l2_inner, Breaks, SmoothTestFunction, SmoothVectorField, Window};

/// Absolute slack added to the `3 SE` threshold.
pub const ABS_FLOOR: f64 = 1e-9;

/// Outcome of one paired check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub lhs: MeanSe,
    pub rhs: MeanSe,
    pub paired: MeanSe,
    pub threshold: f64,
    pub pass: bool,
    pub seed: u64,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainDiagnostics>,
    /// Wall-clock time; kept out of the serialized report so reports stay reproducible.
    #[serde(skip)]
    pub runtime_ms: u128,
    #[serde(skip)]
    pub replicates: Vec<ReplicateRow>,
}

impl IdentityReport {
    pub(crate) fn from_run(tag: &str, seed: u64, run: &SampleRun<2>, start: Instant) -> IdentityReport {
        let lhs = MonteCarloEstimate::from_replicates(&run.component(|v| v[0]), run.correlated);
        let rhs = MonteCarloEstimate::from_replicates(&run.component(|v| v[1]), run.correlated);
        let diff = MonteCarloEstimate::from_replicates(&run.component(|v| v[0] - v[1]), run.correlated);
        IdentityReport::assemble(tag, seed, lhs, rhs, diff, run.chain.clone(), &run.series, start)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble<const K: usize>(
        tag: &str,
        seed: u64,
        lhs: MonteCarloEstimate,
        rhs: MonteCarloEstimate,
        diff: MonteCarloEstimate,
        chain: Option<ChainDiagnostics>,
        series: &[Vec<[f64; K]>],
        start: Instant,
    ) -> IdentityReport {
        let threshold = 3.0 * diff.se + ABS_FLOOR;
        let replicates = series
            .iter()
            .enumerate()
            .map(|(i, s)| ReplicateRow {
                replicate: i,
                n: s.len(),
                lhs_mean: lhs.replicate_means[i],
                rhs_mean: rhs.replicate_means[i],
                paired_mean: diff.replicate_means[i],
            })
            .collect();
        IdentityReport {
            identity: tag.to_string(),
            lhs: lhs.summary(),
            rhs: rhs.summary(),
            paired: diff.summary(),
            threshold,
            pass: diff.mean.abs() <= threshold,
            seed,
            n: diff.n,
            chain,
            runtime_ms: start.elapsed().as_millis(),
            replicates,
        }
    }

    /// Per-replicate rows as CSV with a header.
    pub fn replicate_csv(&self) -> String {
        let mut s = String::from("replicate,n,lhs_mean,rhs_mean,paired_mean\n");
        for r in &self.replicates {
            s.push_str(&format!(
                "{},{},{:?},{:?},{:?}\n",
                r.replicate, r.n, r.lhs_mean, r.rhs_mean, r.paired_mean
            ));
        }
        s
    }
}

/// `h(gamma, x) = a(x) F(gamma)`, the exchange functions accepted by the Mecke and GNZ checks.
#[derive(Clone, Debug)]
pub struct ExchangeFunction {
    pub a: SmoothTestFunction,
    pub f: CylinderFunction,
}

impl ExchangeFunction {
    pub fn new(a: SmoothTestFunction, f: CylinderFunction) -> Result<ExchangeFunction> {
        if a.dim() != f.dim() {
            return precondition("a and F live in different dimensions");
        }
        Ok(ExchangeFunction { a, f })
    }

    /// `h = a`, independent of the configuration.
    pub fn spatial(a: SmoothTestFunction) -> ExchangeFunction {
        let f = CylinderFunction::constant(1.0, a.clone());
        ExchangeFunction { a, f }
    }

    pub fn eval(&self, gamma: &Configuration, x: &crate::space::Point) -> f64 {
        self.a.value(x) * self.f.eval(gamma)
    }
}

fn require_inside(w: &Window, s: &Window, what: &str) -> Result<()> {
    if !w.contains_box(s) {
        return precondition(format!("support {s:?} of {what} is not inside the window {w:?}"));
    }
    Ok(())
}

/// LHS `sum_{x in gamma} h(gamma, x)`, RHS `int h(gamma + eps_x, x) e^{-E_x} rho(x) dx`.
fn exchange_identity(
    tag: &str,
    h: &ExchangeFunction,
    setup: &Setup,
    law: &Law,
    n: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let start = Instant::now();
    let w = &setup.window;
    let region = h.a.support();
    require_inside(w, &region, "a")?;
    let potential = law.potential();
    let mut base = Breaks::new(w.dim());
    h.a.breakpoints(&mut base);
    h.f.breakpoints(&mut base);
    setup.model.breakpoints(&mut base);
    let inner = InnerNodes::new(setup, region, base, potential.pair.radial_breakpoints());
    let boundary = law.boundary_points();
    let run = run_samples(setup, law, n, seed, |gamma| {
        let s = h.f.pairings(gamma);
        let lhs = h.f.eval_pairings(&s) * gamma.pair(&h.a);
        let mut scratch = Vec::new();
        let nodes = inner.nodes(&[gamma.points(), boundary], &mut scratch);
        let mut rhs = 0.0;
        for (x, wt) in nodes {
            let a = h.a.value(x);
            if a == 0.0 {
                continue;
            }
            let weight =
                potential.weight_unchecked(gamma.points(), x) * potential.weight_unchecked(boundary, x);
            if weight == 0.0 {
                continue;
            }
            rhs += wt * a * h.f.eval_pairings(&h.f.shifted(&s, x)) * weight * setup.model.density(x);
        }
        Ok([lhs, rhs])
    })?;
    Ok(IdentityReport::from_run(tag, seed, &run, start))
}

/// Mecke identity under the Poisson law, paired on one sample stream.
pub fn verify_mecke(h: &ExchangeFunction, setup: &Setup, n: usize, seed: u64) -> Result<IdentityReport> {
    exchange_identity("mecke", h, setup, &Law::Poisson, n, seed)
}

/// GNZ identity under the Gibbs law: the RHS integrand carries `exp(-E_x(gamma + eps_x))`.
pub fn verify_gnz(
    h: &ExchangeFunction,
    setup: &Setup,
    gibbs: &GibbsSpec,
    n: usize,
    seed: u64,
) -> Result<IdentityReport> {
    exchange_identity("gnz", h, setup, &Law::Gibbs(gibbs.clone()), n, seed)
}

/// Integration by parts: `E[d_v F G] + E[F d_v G] = -E[F G B_v]`.
pub fn verify_ibp(
    f: &CylinderFunction,
    g: &CylinderFunction,
    v: &SmoothVectorField,
    setup: &Setup,
    n: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let start = Instant::now();
    let run = run_samples(setup, &Law::Poisson, n, seed, |gamma| {
        let (fv, gv) = (f.eval(gamma), g.eval(gamma));
        let lhs = directional_derivative(f, v, gamma) * gv + fv * directional_derivative(g, v, gamma);
        let rhs = -fv * gv * log_derivative_b(v, &setup.model, gamma);
        Ok([lhs, rhs])
    })?;
    Ok(IdentityReport::from_run("ibp", seed, &run, start))
}

/// Divergence duality: `E[<G v, grad F>] = -E[F div(G v)]`.
pub fn verify_div_duality(
    f: &CylinderFunction,
    g: &CylinderFunction,
    v: &SmoothVectorField,
    setup: &Setup,
    n: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let start = Instant::now();
    let run = run_samples(setup, &Law::Poisson, n, seed, |gamma| {
        let lhs = g.eval(gamma) * directional_derivative(f, v, gamma);
        let rhs = -f.eval(gamma) * divergence_gamma(g, v, &setup.model, gamma);
        Ok([lhs, rhs])
    })?;
    Ok(IdentityReport::from_run("div_duality", seed, &run, start))
}

/// Generator duality: `E[<grad F, grad G>] = E[(H F) G]`.
pub fn verify_generator(
    f: &CylinderFunction,
    g: &CylinderFunction,
    setup: &Setup,
    n: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let start = Instant::now();
    let run = run_samples(setup, &Law::Poisson, n, seed, |gamma| {
        Ok([
            carre(f, g, gamma),
            generator_cylinder(f, &setup.model, gamma) * g.eval(gamma),
        ])
    })?;
    Ok(IdentityReport::from_run("generator", seed, &run, start))
}

fn form_identity(
    tag: &str,
    f: &CylinderFunction,
    g: &CylinderFunction,
    setup: &Setup,
    law: &Law,
    n: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let start = Instant::now();
    let w = &setup.window;
    let potential = law.potential();
    let (sf, sg) = (f.support(), g.support());
    let margin = potential.range();
    let Some(inner_window) = w.shrink(margin) else {
        return precondition("window is narrower than twice the interaction range");
    };
    require_inside(
        &inner_window,
        &sf,
        "the inner functions of F (with interaction-range margin)",
    )?;
    require_inside(
        &inner_window,
        &sg,
        "the inner functions of G (with interaction-range margin)",
    )?;
    let region = sf.intersect(&sg);
    let mut base = Breaks::new(w.dim());
    f.breakpoints(&mut base);
    g.breakpoints(&mut base);
    setup.model.breakpoints(&mut base);
    let inner = region.map(|r| InnerNodes::new(setup, r, base, potential.pair.radial_breakpoints()));
    let boundary = law.boundary_points();
    let run = run_samples(setup, law, n, seed, |gamma| {
        let lhs = carre(f, g, gamma);
        let Some(inner) = &inner else {
            return Ok([lhs, 0.0]);
        };
        let (pf, pg) = (f.pairings(gamma), g.pairings(gamma));
        let mut scratch = Vec::new();
        let nodes = inner.nodes(&[gamma.points(), boundary], &mut scratch);
        let mut rhs = 0.0;
        for (x, wt) in nodes {
            let df = mixed_gradient(f, &pf, x);
            let dg = mixed_gradient(g, &pg, x);
            let prod = df.dot(&dg);
            if prod == 0.0 {
                continue;
            }
            let weight =
                potential.weight_unchecked(gamma.points(), x) * potential.weight_unchecked(boundary, x);
            rhs += wt * prod * weight * setup.model.density(x);
        }
        Ok([lhs, rhs])
    })?;
    Ok(IdentityReport::from_run(tag, seed, &run, start))
}

/// Poisson form identity: `E[<grad F, grad G>] = E[int <grad_x grad^P F, grad_x grad^P G> rho dx]`.
pub fn verify_form_poisson(
    f: &CylinderFunction,
    g: &CylinderFunction,
    setup: &Setup,
    n: usize,
    seed: u64,
) -> Result<IdentityReport> {
    form_identity("form_poisson", f, g, setup, &Law::Poisson, n, seed)
}

/// Gibbs form identity: as [`verify_form_poisson`] under the Gibbs law, with the
/// integrand weighted by `exp(-E_x(gamma + eps_x))`. Inner supports must sit one
/// interaction range inside the window.
pub fn verify_form_gibbs(
    f: &CylinderFunction,
    g: &CylinderFunction,
    setup: &Setup,
    gibbs: &GibbsSpec,
    n: usize,
    seed: u64,
) -> Result<IdentityReport> {
    form_identity("form_gibbs", f, g, setup, &Law::Gibbs(gibbs.clone()), n, seed)
}

/// Largest chaos order accepted by the orthogonality checks.
pub const MAX_CHAOS_ORDER: usize = 3;

/// `E[Q_n(phi) Q_m(psi)] = delta_nm n! (phi, psi)^n` for one pair of orders.
#[allow(clippy::too_many_arguments)]
pub fn verify_chaos_orthogonality(
    n: usize,
    m: usize,
    phi: &SmoothTestFunction,
    psi: &SmoothTestFunction,
    setup: &Setup,
    samples: usize,
    seed: u64,
) -> Result<IdentityReport> {
    if n > MAX_CHAOS_ORDER || m > MAX_CHAOS_ORDER {
        return precondition(format!("chaos orders are limited to {MAX_CHAOS_ORDER}"));
    }
    let all = chaos_orthogonality_matrix(n.max(m), phi, psi, setup, samples, seed)?;
    Ok(all
        .into_iter()
        .find(|r| r.identity == chaos_tag(n, m))
        .expect("pair computed"))
}

fn chaos_tag(n: usize, m: usize) -> String {
    format!("chaos_orthogonality[{n},{m}]")
}

/// All pairs `0 <= n, m <= max_order` from one sample stream.
pub fn chaos_orthogonality_matrix(
    max_order: usize,
    phi: &SmoothTestFunction,
    psi: &SmoothTestFunction,
    setup: &Setup,
    samples: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    if max_order > MAX_CHAOS_ORDER {
        return precondition(format!("chaos orders are limited to {MAX_CHAOS_ORDER}"));
    }
    let start = Instant::now();
    let w = &setup.window;
    let qphi = CharlierSystem::new(phi, &setup.model, w)?;
    let qpsi = CharlierSystem::new(psi, &setup.model, w)?;
    let inner = l2_inner(phi, psi, &setup.model, w)?;
    let k = max_order + 1;
    let run: SampleRun<8> = run_samples(setup, &Law::Poisson, samples, seed, |gamma| {
        let a = qphi.eval_upto(max_order, gamma)?;
        let b = qpsi.eval_upto(max_order, gamma)?;
        let mut out = [0.0; 8];
        out[..k].copy_from_slice(&a);
        out[4..4 + k].copy_from_slice(&b);
        Ok(out)
    })?;
    let mut reports = Vec::with_capacity(k * k);
    for n in 0..k {
        for m in 0..k {
            let expect = if n == m {
                (1..=n).map(|i| i as f64).product::<f64>() * inner.powi(n as i32)
            } else {
                0.0
            };
            let lhs = MonteCarloEstimate::from_replicates(&run.component(|v| v[n] * v[4 + m]), false);
            let rhs = MonteCarloEstimate::from_replicates(&run.component(|_| expect), false);
            let diff =
                MonteCarloEstimate::from_replicates(&run.component(|v| v[n] * v[4 + m] - expect), false);
            reports.push(IdentityReport::assemble(
                &chaos_tag(n, m),
                seed,
                lhs,
                rhs,
                diff,
                None,
                &run.series,
                start,
            ));
        }
    }
    Ok(reports)
}

/// Monte Carlo mean of a functional under `law`.
pub fn mc_expectation<F: Functional + ?Sized>(
    functional: &F,
    setup: &Setup,
    law: &Law,
    n: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n < 100 {
        return precondition("mc_expectation needs at least 100 samples");
    }
    let run = run_samples(setup, law, n, seed, |gamma| Ok([functional.eval(gamma)]))?;
    Ok(MonteCarloEstimate::from_replicates(
        &run.component(|v| v[0]),
        run.correlated,
    ))
}
