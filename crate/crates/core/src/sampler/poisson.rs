use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::space::{intensity_mass, IntensityModel, Point, Window};

/// Exact sampler of the Poisson process with intensity `rho` restricted to a window.
#[derive(Clone, Debug)]
pub struct PoissonSampler {
    model: IntensityModel,
    window: Window,
    mass: f64,
    sup: f64,
}

impl PoissonSampler {
    pub fn new(model: &IntensityModel, w: &Window) -> Result<PoissonSampler> {
        let mass = intensity_mass(model, w)?.value;
        let sup = model.sup_bound(w)?;
        if mass > 0.0 && sup <= 0.0 {
            return Err(Error::NoSupBound(model.family().to_string()));
        }
        Ok(PoissonSampler {
            model: model.clone(),
            window: *w,
            mass,
            sup,
        })
    }

    /// `sigma(w)`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn model(&self) -> &IntensityModel {
        &self.model
    }

    /// One point with density `rho / sigma(w)`, by rejection against `sup rho`.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let d = self.window.dim();
        let mut u = [0.0; 3];
        loop {
            for c in u.iter_mut().take(d) {
                *c = rng.random::<f64>();
            }
            let x = self.window.from_unit(&u[..d]);
            if self.model.is_constant() {
                return x;
            }
            let accept: f64 = rng.random();
            if accept * self.sup < self.model.density(&x) {
                return x;
            }
        }
    }

    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.mass <= 0.0 {
            return 0;
        }
        let dist = Poisson::new(self.mass).expect("positive finite Poisson mean");
        dist.sample(rng) as usize
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let n = self.sample_count(rng);
        let mut gamma = Configuration::empty(self.window.dim());
        while gamma.len() < n {
            // a repeated point has probability zero; draw again if it happens
            let _ = gamma.insert(self.sample_point(rng));
        }
        gamma
    }
}

/// Draws one configuration of the Poisson process on `w`.
pub fn sample_poisson<R: Rng + ?Sized>(
    model: &IntensityModel,
    w: &Window,
    rng: &mut R,
) -> Result<Configuration> {
    Ok(PoissonSampler::new(model, w)?.sample(rng))
}
