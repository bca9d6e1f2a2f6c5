//! Seeded synthetic mixtures with independent coordinates and uniform
//! outliers.
//!
//! Signal points pick a component by weight, draw each coordinate from the
//! component's law, and, when the component has a truncation box, are redrawn
//! until they fall inside it. Noise points are uniform on the noise box and
//! carry label `0`; signal points carry the component number starting at `1`.
//! Rows are shuffled at the end so labels do not follow generation order.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Cauchy, Gamma, Normal, Poisson};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::abs;

/// Below this acceptance rate (after [`MIN_REJECTION_ATTEMPTS`] draws) a
/// truncation box is considered pathological.
pub const MIN_ACCEPTANCE: f64 = 1e-6;
pub const MIN_REJECTION_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinateLaw {
    Gaussian { mean: f64, sd: f64 },
    Poisson { lambda: f64 },
    Binomial { trials: u64, prob: f64 },
    Gamma { shape: f64, scale: f64 },
    Cauchy { location: f64, scale: f64 },
}

impl CoordinateLaw {
    pub fn mean(&self) -> Option<f64> {
        match *self {
            CoordinateLaw::Gaussian { mean, .. } => Some(mean),
            CoordinateLaw::Poisson { lambda } => Some(lambda),
            CoordinateLaw::Binomial { trials, prob } => Some(trials as f64 * prob),
            CoordinateLaw::Gamma { shape, scale } => Some(shape * scale),
            CoordinateLaw::Cauchy { .. } => None,
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        let bad = |what: &str| Error::InvalidConfig(alloc::format!("invalid {what} parameters: {self:?}"));
        Ok(match *self {
            CoordinateLaw::Gaussian { mean, sd } => {
                if !(mean.is_finite() && sd >= 0.0 && sd.is_finite()) {
                    return Err(bad("gaussian"));
                }
                Sampler::Normal(Normal::new(mean, sd).map_err(|_| bad("gaussian"))?)
            }
            CoordinateLaw::Poisson { lambda } => {
                Sampler::Poisson(Poisson::new(lambda).map_err(|_| bad("poisson"))?)
            }
            CoordinateLaw::Binomial { trials, prob } => {
                Sampler::Binomial(Binomial::new(trials, prob).map_err(|_| bad("binomial"))?)
            }
            CoordinateLaw::Gamma { shape, scale } => {
                if !(shape > 0.0 && scale > 0.0) {
                    return Err(bad("gamma"));
                }
                Sampler::Gamma(Gamma::new(shape, scale).map_err(|_| bad("gamma"))?)
            }
            CoordinateLaw::Cauchy { location, scale } => {
                if !(location.is_finite() && scale > 0.0) {
                    return Err(bad("cauchy"));
                }
                Sampler::Cauchy(Cauchy::new(location, scale).map_err(|_| bad("cauchy"))?)
            }
        })
    }
}

enum Sampler {
    Normal(Normal<f64>),
    Poisson(Poisson<f64>),
    Binomial(Binomial),
    Gamma(Gamma<f64>),
    Cauchy(Cauchy<f64>),
}

impl Sampler {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Poisson(d) => d.sample(rng),
            Sampler::Binomial(d) => d.sample(rng) as f64,
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Cauchy(d) => d.sample(rng),
        }
    }
}

/// Closed box `[lower, upper]` per coordinate.
pub type BoxBounds = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// One law per coordinate; coordinates are drawn independently.
    pub laws: Vec<CoordinateLaw>,
    pub weight: f64,
    pub truncation: Option<BoxBounds>,
}

impl Component {
    /// Same law on each of `dim` coordinates.
    pub fn iid(law: CoordinateLaw, dim: usize, weight: f64) -> Self {
        Component {
            laws: alloc::vec![law; dim],
            weight,
            truncation: None,
        }
    }

    pub fn truncated(mut self, bounds: BoxBounds) -> Self {
        self.truncation = Some(bounds);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub components: Vec<Component>,
    pub n_signal: usize,
    pub n_noise: usize,
    pub noise_box: BoxBounds,
    pub dim: usize,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dim == 0 {
            return invalid("dimension must be positive".into());
        }
        if self.n_signal + self.n_noise == 0 {
            return invalid("the mixture must produce at least one point".into());
        }
        if self.n_signal > 0 && self.components.is_empty() {
            return invalid("signal points need at least one component".into());
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if !self.components.is_empty() && abs(total - 1.0) > 1e-12 {
            return invalid(alloc::format!("component weights sum to {total}, not 1"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.weight >= 0.0) {
                return invalid(alloc::format!("component {} has a negative weight", i + 1));
            }
            if c.laws.len() != self.dim {
                return invalid(alloc::format!("component {} has {} laws for dimension {}", i + 1, c.laws.len(), self.dim));
            }
            for law in &c.laws {
                law.sampler()?;
            }
            if let Some(b) = &c.truncation {
                check_box(b, self.dim, "truncation")?;
            }
        }
        if self.n_noise > 0 {
            check_box(&self.noise_box, self.dim, "noise")?;
        }
        Ok(())
    }
}

fn check_box(b: &BoxBounds, dim: usize, what: &str) -> Result<()> {
    if b.len() != dim || b.iter().any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "{what} box must give a finite nonempty interval for each of {dim} coordinates"
        )));
    }
    Ok(())
}

fn inside(point: &[f64], b: &BoxBounds) -> bool {
    point.iter().zip(b).all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
}

/// Draws the dataset described by `spec`, with ground-truth labels.
pub fn sample(spec: &MixtureSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dim = spec.dim;
    let n = spec.n_signal + spec.n_noise;
    let mut points = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);

    if spec.n_signal > 0 {
        let samplers: Vec<Vec<Sampler>> = spec
            .components
            .iter()
            .map(|c| c.laws.iter().map(CoordinateLaw::sampler).collect())
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = spec.components.iter().map(|c| c.weight).collect();
        let chooser = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let mut attempts = alloc::vec![0u64; spec.components.len()];
        let mut accepted = alloc::vec![0u64; spec.components.len()];
        let mut row = alloc::vec![0.0; dim];
        for _ in 0..spec.n_signal {
            let j = chooser.sample(&mut rng);
            loop {
                for (v, s) in row.iter_mut().zip(&samplers[j]) {
                    *v = s.draw(&mut rng);
                }
                attempts[j] += 1;
                match &spec.components[j].truncation {
                    Some(b) if !inside(&row, b) => {
                        if attempts[j] >= MIN_REJECTION_ATTEMPTS
                            && (accepted[j] as f64) < MIN_ACCEPTANCE * attempts[j] as f64
                        {
                            return Err(Error::RejectionBudget { component: j + 1 });
                        }
                    }
                    _ => break,
                }
            }
            accepted[j] += 1;
            points.extend_from_slice(&row);
            labels.push(j + 1);
        }
    }

    if spec.n_noise > 0 {
        let uniforms: Vec<Uniform<f64>> = spec
            .noise_box
            .iter()
            .map(|&(lo, hi)| Uniform::new_inclusive(lo, hi))
            .collect::<core::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for _ in 0..spec.n_noise {
            for u in &uniforms {
                points.push(u.sample(&mut rng));
            }
            labels.push(0);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut shuffled = Vec::with_capacity(n * dim);
    let mut shuffled_labels = Vec::with_capacity(n);
    for &i in &order {
        shuffled.extend_from_slice(&points[i * dim..(i + 1) * dim]);
        shuffled_labels.push(labels[i]);
    }
    Dataset::new(shuffled, dim)?.with_labels(shuffled_labels)
}

/// Families of the bundled simulation protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetFamily {
    Gaussian,
    Poisson,
    Binomial,
    Gamma,
    Cauchy,
    Heterogeneous,
}

impl PresetFamily {
    pub const ALL: [PresetFamily; 6] = [
        PresetFamily::Gaussian,
        PresetFamily::Poisson,
        PresetFamily::Binomial,
        PresetFamily::Gamma,
        PresetFamily::Cauchy,
        PresetFamily::Heterogeneous,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PresetFamily::Gaussian => "gaussian",
            PresetFamily::Poisson => "poisson",
            PresetFamily::Binomial => "binomial",
            PresetFamily::Gamma => "gamma",
            PresetFamily::Cauchy => "cauchy",
            PresetFamily::Heterogeneous => "heterogeneous",
        }
    }
}

pub const PRESET_MEANS: [f64; 3] = [10.0, 20.0, 40.0];
pub const GAUSSIAN_SD: f64 = 5.0;
pub const BINOMIAL_TRIALS: u64 = 100;
pub const GAMMA_SHAPE: f64 = 40.0;
pub const CAUCHY_SCALE: f64 = 1.0;
pub const NOISE_BOX: (f64, f64) = (0.0, 60.0);
pub const TRUNCATION_UPPER: [f64; 3] = [20.0, 40.0, 80.0];

fn component_law(family: PresetFamily, slot: usize) -> CoordinateLaw {
    let mean = PRESET_MEANS[slot];
    match family {
        PresetFamily::Gaussian => CoordinateLaw::Gaussian { mean, sd: GAUSSIAN_SD },
        PresetFamily::Poisson => CoordinateLaw::Poisson { lambda: mean },
        PresetFamily::Binomial => CoordinateLaw::Binomial {
            trials: BINOMIAL_TRIALS,
            prob: mean / BINOMIAL_TRIALS as f64,
        },
        PresetFamily::Gamma => CoordinateLaw::Gamma {
            shape: GAMMA_SHAPE,
            scale: mean / GAMMA_SHAPE,
        },
        PresetFamily::Cauchy => CoordinateLaw::Cauchy {
            location: mean,
            scale: CAUCHY_SCALE,
        },
        PresetFamily::Heterogeneous => match slot {
            0 => component_law(PresetFamily::Gamma, 0),
            1 => component_law(PresetFamily::Gaussian, 1),
            _ => component_law(PresetFamily::Binomial, 2),
        },
    }
}

/// Three-component protocol in the plane: means 10, 20, 40 on both
/// coordinates, equal weights, uniform noise on `[0, 60]^2`. Gaussian and
/// Cauchy components are truncated to `[0, 20]^2`, `[0, 40]^2`, `[0, 80]^2`.
pub fn preset_spec(family: PresetFamily, n_signal: usize, n_noise: usize) -> MixtureSpec {
    let dim = 2;
    let components = (0..3)
        .map(|slot| {
            let law = component_law(family, slot);
            let c = Component::iid(law, dim, 1.0 / 3.0);
            match law {
                CoordinateLaw::Gaussian { .. } | CoordinateLaw::Cauchy { .. } => {
                    c.truncated(alloc::vec![(0.0, TRUNCATION_UPPER[slot]); dim])
                }
                _ => c,
            }
        })
        .collect();
    MixtureSpec {
        components,
        n_signal,
        n_noise,
        noise_box: alloc::vec![NOISE_BOX; dim],
        dim,
        seed: 0,
    }
}

/// `"<family>,<size>"` with size `small` (100 signal + 20 noise) or `large`
/// (10000 + 2000).
pub fn preset(name: &str) -> Result<MixtureSpec> {
    let unknown = || Error::UnknownPreset(name.to_string());
    let (family, size) = name.split_once(',').ok_or_else(unknown)?;
    let family = PresetFamily::ALL
        .into_iter()
        .find(|f| f.name() == family.trim())
        .ok_or_else(unknown)?;
    let (n_signal, n_noise) = match size.trim() {
        "small" => (100, 20),
        "large" => (10_000, 2_000),
        _ => return Err(unknown()),
    };
    Ok(preset_spec(family, n_signal, n_noise))
}

/// Every accepted preset name.
pub fn preset_names() -> Vec<String> {
    PresetFamily::ALL
        .iter()
        .flat_map(|f| ["small", "large"].map(|s| alloc::format!("{},{s}", f.name())))
        .collect()
}
