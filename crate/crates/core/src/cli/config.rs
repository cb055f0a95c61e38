//! Experiment manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::catalog;
use super::family::{parse_cylinder, parse_field, parse_function, parse_intensity, parse_potential};
use crate::calculus::CylinderFunction;
use crate::error::{Error, Result};
use crate::gibbs::PotentialModel;
use crate::sampler::GibbsChainParams;
use crate::space::{IntensityModel, SmoothTestFunction, SmoothVectorField, Window};
use crate::verify::{RunOptions, Setup};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub replicates: Option<usize>,
    pub inner_order_1d: Option<usize>,
    pub inner_order_nd: Option<usize>,
    pub inner_panels: Option<usize>,
}

/// One `[[check]]` table.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub identity: String,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub a: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub v: Option<String>,
    pub phi: Option<String>,
    pub psi: Option<String>,
    pub potential: Option<String>,
    pub max_order: Option<usize>,
    pub configs: Option<usize>,
    pub tolerance: Option<f64>,
    pub mode: Option<String>,
    /// Expected closability verdict; without it any verdict but `fails` passes.
    pub expect: Option<String>,
    pub density: Option<String>,
    pub interval: Option<[f64; 2]>,
    pub grid: Option<usize>,
    pub floor: Option<f64>,
    pub threshold: Option<f64>,
    pub functional: Option<String>,
    pub law: Option<String>,
    pub n_max: Option<usize>,
}

/// The manifest as written on disk.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub window: WindowSpec,
    pub intensity: String,
    pub potential: Option<String>,
    #[serde(default)]
    pub chain: GibbsChainParams,
    #[serde(default)]
    pub run: RunSection,
    /// Default sample count of every check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub functions: BTreeMap<String, String>,
    #[serde(default)]
    pub fields: BTreeMap<String, String>,
    #[serde(default)]
    pub cylinders: BTreeMap<String, String>,
    #[serde(default, rename = "check")]
    pub checks: Vec<CheckSpec>,
}

fn default_samples() -> usize {
    10_000
}

/// A validated manifest with every named object built.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub setup: Setup,
    pub potential: Option<PotentialModel>,
    pub functions: BTreeMap<String, SmoothTestFunction>,
    pub fields: BTreeMap<String, SmoothVectorField>,
    pub cylinders: BTreeMap<String, CylinderFunction>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::from_toml(&text)
    }
}

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

impl Experiment {
    pub fn build(config: ExperimentConfig) -> Result<Experiment> {
        let w = &config.window;
        let window = Window::new(&w.lower, &w.upper).map_err(|e| cfg_err("window", e))?;
        let dim = window.dim();
        let model = parse_intensity("intensity", &config.intensity, dim)?;
        let defaults = RunOptions::default();
        let options = RunOptions {
            replicates: config.run.replicates.unwrap_or(defaults.replicates),
            workers: None,
            inner_order_1d: config.run.inner_order_1d.unwrap_or(defaults.inner_order_1d),
            inner_order_nd: config.run.inner_order_nd.unwrap_or(defaults.inner_order_nd),
            inner_panels: config.run.inner_panels.unwrap_or(defaults.inner_panels),
        };
        if options.replicates == 0 {
            return Err(cfg_err("run.replicates", "must be at least 1"));
        }
        let setup = Setup::new(model, window)
            .map_err(|e| cfg_err("intensity", e))?
            .with_options(options);
        config.chain.validate().map_err(|e| cfg_err("chain", e))?;
        let potential = config
            .potential
            .as_deref()
            .map(|p| parse_potential("potential", p))
            .transpose()?;

        // functions may refer to earlier ones; resolve until no progress
        let mut functions = BTreeMap::new();
        let mut pending: Vec<(&String, &String)> = config.functions.iter().collect();
        while !pending.is_empty() {
            let before = pending.len();
            let mut last_err = None;
            pending.retain(|(name, text)| {
                match parse_function(&format!("functions.{name}"), text, dim, &functions) {
                    Ok(f) => {
                        functions.insert((*name).clone(), f);
                        false
                    }
                    Err(e) => {
                        last_err = Some(e);
                        true
                    }
                }
            });
            if pending.len() == before {
                return Err(last_err.expect("a pending function failed"));
            }
        }
        let mut fields = BTreeMap::new();
        for (name, text) in &config.fields {
            fields.insert(
                name.clone(),
                parse_field(&format!("fields.{name}"), text, dim, &functions)?,
            );
        }
        let mut cylinders = BTreeMap::new();
        for (name, text) in &config.cylinders {
            cylinders.insert(
                name.clone(),
                parse_cylinder(&format!("cylinders.{name}"), text, &functions)?,
            );
        }
        let exp = Experiment {
            config,
            setup,
            potential,
            functions,
            fields,
            cylinders,
        };
        exp.validate_checks()?;
        Ok(exp)
    }

    fn validate_checks(&self) -> Result<()> {
        if self.config.checks.is_empty() {
            return Err(cfg_err("check", "the manifest lists no checks"));
        }
        for (i, c) in self.config.checks.iter().enumerate() {
            let key = format!("check[{i}]");
            if catalog::lookup(&c.identity).is_none() {
                return Err(cfg_err(
                    &format!("{key}.identity"),
                    format!("unknown identity `{}`", c.identity),
                ));
            }
            let need = |field: &str, v: &Option<String>| -> Result<()> {
                if v.is_none() {
                    return Err(cfg_err(
                        &format!("{key}.{field}"),
                        format!("required by `{}`", c.identity),
                    ));
                }
                Ok(())
            };
            match c.identity.as_str() {
                "mecke" | "gnz" => {
                    need("a", &c.a)?;
                    self.function(&key, "a", c.a.as_deref())?;
                    if let Some(f) = c.f.as_deref() {
                        self.cylinder(&key, "f", Some(f))?;
                    }
                }
                "ibp" | "div_duality" => {
                    self.cylinder(&key, "f", c.f.as_deref())?;
                    self.cylinder(&key, "g", c.g.as_deref())?;
                    self.field(&key, "v", c.v.as_deref())?;
                }
                "generator" | "form_poisson" | "form_gibbs" => {
                    self.cylinder(&key, "f", c.f.as_deref())?;
                    self.cylinder(&key, "g", c.g.as_deref())?;
                }
                "chaos_orthogonality" | "annihilation" => {
                    self.function(&key, "phi", c.phi.as_deref())?;
                    self.function(&key, "psi", c.psi.as_deref())?;
                    if c.max_order.is_some_and(|m| m > crate::verify::MAX_CHAOS_ORDER) {
                        return Err(cfg_err(
                            &format!("{key}.max_order"),
                            "chaos orders are limited to 3",
                        ));
                    }
                }
                "closability" => {
                    match c.mode.as_deref().unwrap_or("density") {
                        "density" => need("density", &c.density)?,
                        "pair" => {}
                        other => {
                            return Err(cfg_err(&format!("{key}.mode"), format!("unknown mode `{other}`")))
                        }
                    }
                    if let Some(e) = c.expect.as_deref() {
                        if !matches!(e, "holds" | "fails" | "inconclusive") {
                            return Err(cfg_err(
                                &format!("{key}.expect"),
                                format!("unknown verdict `{e}`"),
                            ));
                        }
                    }
                }
                "oracle" => {
                    need("functional", &c.functional)?;
                    match c.law.as_deref().unwrap_or("poisson") {
                        "poisson" | "gibbs" => {}
                        other => {
                            return Err(cfg_err(&format!("{key}.law"), format!("unknown law `{other}`")))
                        }
                    }
                }
                _ => unreachable!("catalog checked above"),
            }
            if matches!(c.identity.as_str(), "gnz" | "form_gibbs")
                || c.law.as_deref() == Some("gibbs")
                || c.mode.as_deref() == Some("pair")
            {
                self.potential_for(i)?;
            } else if let Some(p) = &c.potential {
                parse_potential(&format!("{key}.potential"), p)?;
            }
        }
        Ok(())
    }

    pub fn function(&self, key: &str, field: &str, name: Option<&str>) -> Result<&SmoothTestFunction> {
        let name = name.ok_or_else(|| cfg_err(&format!("{key}.{field}"), "missing function name"))?;
        self.functions
            .get(name)
            .ok_or_else(|| cfg_err(&format!("{key}.{field}"), format!("unknown function `{name}`")))
    }

    pub fn cylinder(&self, key: &str, field: &str, name: Option<&str>) -> Result<&CylinderFunction> {
        let name =
            name.ok_or_else(|| cfg_err(&format!("{key}.{field}"), "missing cylinder function name"))?;
        self.cylinders.get(name).ok_or_else(|| {
            cfg_err(
                &format!("{key}.{field}"),
                format!("unknown cylinder function `{name}`"),
            )
        })
    }

    pub fn field(&self, key: &str, field: &str, name: Option<&str>) -> Result<&SmoothVectorField> {
        let name = name.ok_or_else(|| cfg_err(&format!("{key}.{field}"), "missing vector field name"))?;
        self.fields.get(name).ok_or_else(|| {
            cfg_err(
                &format!("{key}.{field}"),
                format!("unknown vector field `{name}`"),
            )
        })
    }

    /// Potential of check `i`: its own `potential` key, else the manifest's.
    pub fn potential_for(&self, i: usize) -> Result<PotentialModel> {
        let c = &self.config.checks[i];
        match (&c.potential, &self.potential) {
            (Some(p), _) => parse_potential(&format!("check[{i}].potential"), p),
            (None, Some(p)) => Ok(*p),
            (None, None) => Err(cfg_err(
                &format!("check[{i}].potential"),
                format!("`{}` needs a potential (per check or top level)", c.identity),
            )),
        }
    }

    pub fn model(&self) -> &IntensityModel {
        &self.setup.model
    }
}
