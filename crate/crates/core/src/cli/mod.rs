//! The `confspace` command line: run manifests, list and describe checks, sample.

mod catalog;
mod config;
mod family;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub use catalog::{describe, list_checks, lookup, Entry, CATALOG};
pub use config::{CheckSpec, Experiment, ExperimentConfig, RunSection, WindowSpec};
pub use family::{parse_cylinder, parse_field, parse_function, parse_intensity, parse_potential};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::gibbs::PotentialModel;
use crate::sampler::{GibbsChain, PoissonSampler, RandomStream};
use crate::space::{Breaks, Point, SmoothTestFunction};
use crate::verify::{
    chaos_orthogonality_matrix, closability_diagnostic, mc_expectation, oracle_expectation,
    pair_potential_closability_check, verify_annihilation, verify_div_duality, verify_form_gibbs,
    verify_form_poisson, verify_generator, verify_gnz, verify_ibp, verify_mecke, BoundedFn, ExchangeFunction,
    FatCantor, GibbsSpec, IdentityReport, Law, OracleConfig, OracleFunctional, PointCount, Verdict,
    ABS_FLOOR, DEFAULT_THRESHOLD,
};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "CONFSPACE_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "confspace",
    version,
    about = "Point processes on configuration space and checks of their exact identities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run every check of a manifest and write the reports.
    Run {
        config: PathBuf,
        /// Cap on worker threads; results do not depend on it.
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Output directory (default: the manifest's `out`, else `confspace-out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the identity catalog.
    List,
    /// Print the identity and equation behind a check tag.
    Describe { tag: String },
    /// Draw one configuration from the manifest's law and write it as CSV.
    Sample {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// One result row of a run.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub identity: String,
    pub report: Value,
    pub pass: bool,
    pub inconclusive: bool,
    pub csv: Option<String>,
    pub runtime_ms: u128,
}

/// All results of a manifest.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// The reproducible JSON summary.
    pub fn report_json(&self) -> String {
        let checks: Vec<&Value> = self.checks.iter().map(|c| &c.report).collect();
        let v = json!({
            "seed": self.seed,
            "pass": self.pass(),
            "checks": checks,
        });
        serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
    }

    /// Run metadata that is excluded from the determinism contract.
    pub fn metadata_json(&self, workers: Option<usize>, config: &Path) -> String {
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let runtimes: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"identity": c.identity, "runtime_ms": c.runtime_ms as u64}))
            .collect();
        let v = json!({
            "config": config.display().to_string(),
            "created_unix": created,
            "workers": workers,
            "version": env!("CARGO_PKG_VERSION"),
            "runtime_ms": runtimes,
        });
        serde_json::to_string_pretty(&v).expect("metadata serializes") + "\n"
    }

    /// Writes `report.json`, `metadata.json` and `replicates/*.csv` into `dir`.
    pub fn write(&self, dir: &Path, workers: Option<usize>, config: &Path) -> Result<()> {
        std::fs::create_dir_all(dir.join("replicates"))?;
        std::fs::write(dir.join("report.json"), self.report_json())?;
        std::fs::write(dir.join("metadata.json"), self.metadata_json(workers, config))?;
        for (i, c) in self.checks.iter().enumerate() {
            if let Some(csv) = &c.csv {
                let name = format!("{i:02}_{}.csv", sanitize(&c.identity));
                std::fs::write(dir.join("replicates").join(name), csv)?;
            }
        }
        Ok(())
    }
}

fn sanitize(tag: &str) -> String {
    tag.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect::<String>()
        .trim_end_matches('_')
        .to_string()
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report serializes")
}

fn identity_outcome(r: IdentityReport) -> CheckOutcome {
    CheckOutcome {
        identity: r.identity.clone(),
        report: to_value(&r),
        pass: r.pass,
        inconclusive: false,
        csv: Some(r.replicate_csv()),
        runtime_ms: r.runtime_ms,
    }
}

/// Runs every check of `exp` in order.
pub fn run_experiment(exp: &Experiment, workers: Option<usize>) -> Result<RunOutcome> {
    let mut setup = exp.setup.clone();
    setup.options.workers = workers;
    let mut checks = Vec::new();
    for i in 0..exp.config.checks.len() {
        checks.extend(run_check(exp, &setup, i)?);
    }
    Ok(RunOutcome {
        seed: exp.config.seed,
        checks,
    })
}

fn run_check(exp: &Experiment, setup: &crate::verify::Setup, i: usize) -> Result<Vec<CheckOutcome>> {
    let c = &exp.config.checks[i];
    let key = format!("check[{i}]");
    let seed = c.seed.unwrap_or(exp.config.seed);
    let n = c.samples.unwrap_or(exp.config.samples);
    let gibbs = |exp: &Experiment| -> Result<GibbsSpec> {
        Ok(GibbsSpec::new(exp.potential_for(i)?, exp.config.chain.clone()))
    };
    let start = Instant::now();
    let one = |r: IdentityReport| Ok(vec![identity_outcome(r)]);
    match c.identity.as_str() {
        "mecke" | "gnz" => {
            let a = exp.function(&key, "a", c.a.as_deref())?.clone();
            let h = match c.f.as_deref() {
                Some(f) => ExchangeFunction::new(a, exp.cylinder(&key, "f", Some(f))?.clone())?,
                None => ExchangeFunction::spatial(a),
            };
            if c.identity == "mecke" {
                one(verify_mecke(&h, setup, n, seed)?)
            } else {
                one(verify_gnz(&h, setup, &gibbs(exp)?, n, seed)?)
            }
        }
        "ibp" | "div_duality" => {
            let f = exp.cylinder(&key, "f", c.f.as_deref())?;
            let g = exp.cylinder(&key, "g", c.g.as_deref())?;
            let v = exp.field(&key, "v", c.v.as_deref())?;
            if c.identity == "ibp" {
                one(verify_ibp(f, g, v, setup, n, seed)?)
            } else {
                one(verify_div_duality(f, g, v, setup, n, seed)?)
            }
        }
        "generator" | "form_poisson" | "form_gibbs" => {
            let f = exp.cylinder(&key, "f", c.f.as_deref())?;
            let g = exp.cylinder(&key, "g", c.g.as_deref())?;
            match c.identity.as_str() {
                "generator" => one(verify_generator(f, g, setup, n, seed)?),
                "form_poisson" => one(verify_form_poisson(f, g, setup, n, seed)?),
                _ => one(verify_form_gibbs(f, g, setup, &gibbs(exp)?, n, seed)?),
            }
        }
        "chaos_orthogonality" => {
            let phi = exp.function(&key, "phi", c.phi.as_deref())?;
            let psi = exp.function(&key, "psi", c.psi.as_deref())?;
            let max = c.max_order.unwrap_or(crate::verify::MAX_CHAOS_ORDER);
            Ok(chaos_orthogonality_matrix(max, phi, psi, setup, n, seed)?
                .into_iter()
                .map(identity_outcome)
                .collect())
        }
        "annihilation" => {
            let phi = exp.function(&key, "phi", c.phi.as_deref())?;
            let psi = exp.function(&key, "psi", c.psi.as_deref())?;
            let r = verify_annihilation(
                phi,
                psi,
                c.max_order.unwrap_or(crate::verify::MAX_CHAOS_ORDER),
                setup,
                c.configs.unwrap_or(100),
                seed,
                c.tolerance.unwrap_or(1e-4),
            )?;
            Ok(vec![CheckOutcome {
                identity: r.identity.clone(),
                report: to_value(&r),
                pass: r.pass,
                inconclusive: false,
                csv: None,
                runtime_ms: start.elapsed().as_millis(),
            }])
        }
        "closability" => closability_check(exp, setup, i, seed, start),
        "oracle" => oracle_check(exp, setup, i, seed, n, start),
        other => Err(Error::Config(format!(
            "{key}.identity: unknown identity `{other}`"
        ))),
    }
}

fn closability_check(
    exp: &Experiment,
    setup: &crate::verify::Setup,
    i: usize,
    seed: u64,
    start: Instant,
) -> Result<Vec<CheckOutcome>> {
    let c = &exp.config.checks[i];
    let key = format!("check[{i}]");
    let w = &setup.window;
    let floor = c.floor.unwrap_or(1e-12);
    let threshold = c.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let (label, report) = match c.mode.as_deref().unwrap_or("density") {
        "pair" => {
            let pot = exp.potential_for(i)?;
            let configs =
                sample_configurations(setup, &pot, &exp.config.chain, c.configs.unwrap_or(20), seed)?;
            let r = pair_potential_closability_check(
                &pot,
                &setup.model,
                w,
                &configs,
                c.grid.unwrap_or(200),
                floor,
            )?;
            (format!("pair {}", pot.pair.family()), r)
        }
        _ => {
            let text = c.density.as_deref().unwrap_or("intensity");
            let first_axis = (w.lower()[0], w.upper()[0]);
            let grid = c.grid.unwrap_or(1000);
            let r = if text == "intensity" {
                let center = w.center();
                let model = &setup.model;
                let interval = c.interval.map(|[a, b]| (a, b)).unwrap_or(first_axis);
                closability_diagnostic(
                    |t| model.density(&center.with_coord(0, t)),
                    interval,
                    grid,
                    floor,
                    threshold,
                )?
            } else if let Some(rest) = text.strip_prefix("fat_cantor") {
                let depth = rest
                    .trim()
                    .strip_prefix("depth=")
                    .map(|d| d.parse::<u32>())
                    .unwrap_or(Ok(12))
                    .map_err(|_| Error::Config(format!("{key}.density: bad fat_cantor depth")))?;
                let set = FatCantor::new(depth);
                let interval = c.interval.map(|[a, b]| (a, b)).unwrap_or((0.0, 1.0));
                closability_diagnostic(|t| set.indicator(t), interval, grid, floor, threshold)?
            } else {
                let model = parse_intensity(&format!("{key}.density"), text, 1)?;
                let interval = c.interval.map(|[a, b]| (a, b)).unwrap_or(first_axis);
                closability_diagnostic(
                    |t| model.density(&Point::from(t)),
                    interval,
                    grid,
                    floor,
                    threshold,
                )?
            };
            (text.to_string(), r)
        }
    };
    let pass = match c.expect.as_deref() {
        Some(e) => to_value(&report.verdict) == json!(e),
        None => report.verdict != Verdict::Fails,
    };
    let inconclusive = report.verdict == Verdict::Inconclusive;
    let mut v = to_value(&report);
    if let Value::Object(m) = &mut v {
        m.insert("identity".into(), json!("closability"));
        m.insert("subject".into(), json!(label));
        m.insert("expect".into(), json!(c.expect));
        m.insert("pass".into(), json!(pass));
        m.insert("seed".into(), json!(seed));
    }
    Ok(vec![CheckOutcome {
        identity: "closability".into(),
        report: v,
        pass,
        inconclusive,
        csv: None,
        runtime_ms: start.elapsed().as_millis(),
    }])
}

/// `k` configurations from the Gibbs law of `pot` (Poisson when `pot` is zero).
fn sample_configurations(
    setup: &crate::verify::Setup,
    pot: &PotentialModel,
    chain: &crate::sampler::GibbsChainParams,
    k: usize,
    seed: u64,
) -> Result<Vec<Configuration>> {
    let mut rng = RandomStream::new(seed, 0, "configurations");
    if pot.is_zero() {
        let s = PoissonSampler::new(&setup.model, &setup.window)?;
        return Ok((0..k).map(|_| s.sample(&mut rng)).collect());
    }
    let mut ch = GibbsChain::new(&setup.model, pot, &setup.window, chain)?;
    ch.burn_in(&mut rng)?;
    (0..k).map(|_| ch.next_sample(&mut rng).cloned()).collect()
}

fn q1_squared(phi: &SmoothTestFunction, s: f64) -> impl OracleFunctional + '_ {
    let sup = phi.sup_abs();
    let mut b = Breaks::new(phi.dim());
    phi.breakpoints(&mut b);
    BoundedFn::new(
        move |pts: &[Point]| {
            let q = pts.iter().map(|x| phi.value(x)).sum::<f64>() - s;
            q * q
        },
        move |k| (k as f64 * sup + s.abs()).powi(2),
    )
    .with_breaks(b)
}

fn oracle_check(
    exp: &Experiment,
    setup: &crate::verify::Setup,
    i: usize,
    seed: u64,
    n: usize,
    start: Instant,
) -> Result<Vec<CheckOutcome>> {
    let c = &exp.config.checks[i];
    let key = format!("check[{i}]");
    let text = c.functional.as_deref().unwrap_or("count");
    let words: Vec<&str> = text.split_whitespace().collect();
    let law_name = c.law.as_deref().unwrap_or("poisson");
    let (law, pot) = if law_name == "gibbs" {
        let p = exp.potential_for(i)?;
        (Law::Gibbs(GibbsSpec::new(p, exp.config.chain.clone())), Some(p))
    } else {
        (Law::Poisson, None)
    };
    let mut cfg = OracleConfig::default();
    if let Some(m) = c.n_max {
        cfg.n_max = m;
    }
    let w = &setup.window;
    let (mc, oracle) = match words.as_slice() {
        ["count"] => {
            let mc = mc_expectation(&|g: &Configuration| g.len() as f64, setup, &law, n, seed)?;
            (
                mc,
                oracle_expectation(&PointCount, &setup.model, pot.as_ref(), w, &cfg)?,
            )
        }
        ["q1sq", name] => {
            let phi = exp.function(&key, "functional", Some(name))?;
            let s = crate::space::sigma_pairing(phi, &setup.model, w)?;
            let mc = mc_expectation(
                &|g: &Configuration| (g.pair(phi) - s).powi(2),
                setup,
                &law,
                n,
                seed,
            )?;
            (
                mc,
                oracle_expectation(&q1_squared(phi, s), &setup.model, pot.as_ref(), w, &cfg)?,
            )
        }
        _ => {
            return Err(Error::Config(format!(
                "{key}.functional: expected `count` or `q1sq <function>`, got `{text}`"
            )))
        }
    };
    let threshold = 3.0 * mc.se + oracle.tail_bound + ABS_FLOOR;
    let pass = (mc.mean - oracle.value).abs() <= threshold;
    let report = json!({
        "identity": "oracle",
        "functional": text,
        "law": law_name,
        "mc": mc.summary(),
        "oracle": {"value": oracle.value, "tail_bound": oracle.tail_bound, "n_max": oracle.n_max},
        "threshold": threshold,
        "pass": pass,
        "inconclusive": oracle.inconclusive,
        "seed": seed,
        "n": mc.n,
    });
    Ok(vec![CheckOutcome {
        identity: "oracle".into(),
        report,
        pass,
        inconclusive: oracle.inconclusive,
        csv: None,
        runtime_ms: start.elapsed().as_millis(),
    }])
}

/// Exit codes of `run`.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const FAIL: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const EXECUTION: u8 = 3;
}

fn load(path: &Path) -> Result<Experiment> {
    Experiment::build(ExperimentConfig::load(path)?)
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::Config(_) => exit::CONFIG,
        _ => exit::EXECUTION,
    }
}

/// Entry point of the binary.
pub fn main_with(cli: Cli) -> ExitCode {
    match cli.command {
        Command::List => {
            print!("{}", list_checks());
            ExitCode::from(exit::PASS)
        }
        Command::Describe { tag } => match describe(&tag) {
            Some(text) => {
                print!("{text}");
                ExitCode::from(exit::PASS)
            }
            None => {
                eprintln!("error: unknown identity tag `{tag}`; see `confspace list`");
                ExitCode::from(exit::CONFIG)
            }
        },
        Command::Run { config, workers, out } => {
            let exp = match load(&config) {
                Ok(e) => e,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(classify(&e));
                }
            };
            let outcome = match run_experiment(&exp, workers) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(classify(&e));
                }
            };
            let dir = out
                .or_else(|| exp.config.out.clone())
                .unwrap_or_else(|| PathBuf::from("confspace-out"));
            if let Err(e) = outcome.write(&dir, workers, &config) {
                eprintln!("error: writing reports to {}: {e}", dir.display());
                return ExitCode::from(exit::EXECUTION);
            }
            for c in &outcome.checks {
                let status = match (c.pass, c.inconclusive) {
                    (true, false) => "pass",
                    (true, true) => "pass (inconclusive)",
                    (false, _) => "FAIL",
                };
                println!("{:<28} {status}", c.identity);
                if c.inconclusive {
                    eprintln!("warning: {} is inconclusive", c.identity);
                }
            }
            println!("reports written to {}", dir.display());
            ExitCode::from(if outcome.pass() { exit::PASS } else { exit::FAIL })
        }
        Command::Sample { config, out } => {
            let exp = match load(&config) {
                Ok(e) => e,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(classify(&e));
                }
            };
            match sample_once(&exp) {
                Ok((gamma, diag)) => {
                    if let Err(e) = std::fs::write(&out, gamma.to_csv()) {
                        eprintln!("error: writing {}: {e}", out.display());
                        return ExitCode::from(exit::EXECUTION);
                    }
                    if let Some(d) = diag {
                        eprintln!("{}", serde_json::to_string(&d).expect("diagnostics serialize"));
                    }
                    println!("{} points written to {}", gamma.len(), out.display());
                    ExitCode::from(exit::PASS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(classify(&e))
                }
            }
        }
    }
}

/// One configuration from the manifest's law: Gibbs when a nonzero potential is set.
pub fn sample_once(exp: &Experiment) -> Result<(Configuration, Option<crate::sampler::ChainDiagnostics>)> {
    let mut rng = RandomStream::new(exp.config.seed, 0, "sample");
    let setup = &exp.setup;
    match exp.potential.filter(|p| !p.is_zero()) {
        None => Ok((
            PoissonSampler::new(&setup.model, &setup.window)?.sample(&mut rng),
            None,
        )),
        Some(p) => {
            let (g, d) =
                crate::sampler::sample_gibbs(&setup.model, &p, &setup.window, &exp.config.chain, &mut rng)?;
            Ok((g, Some(d)))
        }
    }
}

pub fn main() -> ExitCode {
    main_with(Cli::parse())
}
