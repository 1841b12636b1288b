//! The Coulomb bilinear form
//!
//! ```text
//! I[ρa, ρb] = ∫∫ ρa(x) ρb(y) / |x − y| d³x d³y
//! ```
//!
//! shared by gravity (ρ = mass density) and electrostatics (ρ = charge
//! density). Two independent evaluation routes are provided: closed forms for
//! the shape pairs that have one, and a seeded Monte Carlo estimator that
//! draws `x ~ ρa/qa`, `y ~ ρb/qb` and averages `qa qb / |x − y|`.
//!
//! The Monte Carlo sum is split into a fixed number of partitions, each with
//! its own ChaCha stream, and the partial results are merged in partition
//! order, so estimates are bit-identical for a given seed whatever the number
//! of worker threads.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distribution::Shape;
use crate::error::{Error, Result};
use crate::special::{erf_over_x, erf_ratio_deficit};
use crate::units::{Dimension, Quantity};
use crate::vec3::Vec3;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_210_401;
pub const MIN_MC_SAMPLES: u64 = 1_000;
/// Fixed partition count; independent of the rayon pool size.
pub const MC_PARTITIONS: u64 = 64;

/// A density with a total amount (kg or C) placed at a centre.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Source {
    pub shape: Shape,
    pub amount: f64,
    pub center: Vec3,
    pub amount_dim: Dimension,
}

impl Source {
    pub fn mass(shape: Shape, mass_kg: f64, center: Vec3) -> Self {
        Self {
            shape,
            amount: mass_kg,
            center,
            amount_dim: Dimension::MASS,
        }
    }

    pub fn charge(shape: Shape, charge_c: f64, center: Vec3) -> Self {
        Self {
            shape,
            amount: charge_c,
            center,
            amount_dim: Dimension::CHARGE,
        }
    }

    fn kernel_dim(&self) -> Dimension {
        self.amount_dim.pow(2).div(Dimension::LENGTH)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelIntegral {
    pub value: Quantity,
    pub method: Method,
    pub mc_std_error: Option<Quantity>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    /// Pairs redrawn because |x − y| was exactly zero.
    pub coincidences: u64,
    /// Set when a closed form was requested but the pair has none.
    pub fallback: bool,
}

impl KernelIntegral {
    fn closed(value: f64, dim: Dimension) -> Result<Self> {
        Ok(Self {
            value: Quantity::new(value, dim)?,
            method: Method::ClosedForm,
            mc_std_error: None,
            samples: None,
            seed: None,
            coincidences: 0,
            fallback: false,
        })
    }

    pub fn std_error(&self) -> f64 {
        self.mc_std_error.map_or(0.0, |q| q.value())
    }

    fn halved(mut self) -> Result<Self> {
        self.value = self.value.scale(0.5)?;
        self.mc_std_error = self.mc_std_error.map(|e| e.scale(0.5)).transpose()?;
        Ok(self)
    }
}

fn check_pair(a: &Source, b: &Source) -> Result<()> {
    if a.amount_dim != b.amount_dim {
        return Err(Error::DimensionMismatch {
            expected: a.amount_dim,
            found: b.amount_dim,
        });
    }
    Ok(())
}

/// Closed-form ∫∫ ρ̂a ρ̂b / |x − y| for unit-normalised densities, in 1/m.
///
/// Returns `Ok(None)` for pairs without a closed form (overlapping spheres,
/// sphere–Gaussian).
pub fn unit_closed_form(a: Shape, b: Shape, separation: f64) -> Result<Option<f64>> {
    let d = separation;
    let value = match (a, b) {
        (Shape::Point, Shape::Point) => {
            if d == 0.0 {
                return Err(Error::Singularity(
                    "two point sources at zero separation".into(),
                ));
            }
            1.0 / d
        }
        (Shape::Point, other @ Shape::UniformSphere { .. })
        | (other @ Shape::UniformSphere { .. }, Shape::Point)
        | (Shape::Point, other @ Shape::Gaussian { .. })
        | (other @ Shape::Gaussian { .. }, Shape::Point) => {
            other.unit_inverse_distance(Vec3::along_x(d))?
        }
        (Shape::UniformSphere { radius: ra }, Shape::UniformSphere { radius: rb }) => {
            if d >= ra + rb {
                1.0 / d
            } else if d == 0.0 && ra == rb {
                6.0 / (5.0 * ra)
            } else {
                return Ok(None);
            }
        }
        (Shape::Gaussian { sigma: sa }, Shape::Gaussian { sigma: sb }) => {
            // the difference of two Gaussian variates is Gaussian with σ² = σa² + σb²
            let k = 1.0 / (2.0 * (sa * sa + sb * sb)).sqrt();
            k * erf_over_x(d * k)
        }
        (Shape::UniformSphere { .. }, Shape::Gaussian { .. })
        | (Shape::Gaussian { .. }, Shape::UniformSphere { .. }) => return Ok(None),
    };
    Ok(Some(value))
}

/// `I(0) − I(d)` for two unit-normalised copies of `shape` whose centres are
/// `separation` apart, evaluated without cancellation. `None` where
/// [`unit_closed_form`] has no value.
pub fn unit_separation_gap(shape: Shape, separation: f64) -> Option<f64> {
    let d = separation;
    match shape {
        Shape::Point => None,
        Shape::UniformSphere { .. } if d == 0.0 => Some(0.0),
        Shape::UniformSphere { radius: a } if d >= 2.0 * a => Some((1.2 * d - a) / (a * d)),
        Shape::UniformSphere { .. } => None,
        Shape::Gaussian { sigma } => {
            let k = 1.0 / (2.0 * sigma);
            Some(k * 2.0 / PI.sqrt() * erf_ratio_deficit(k * d))
        }
    }
}

/// Bilinear form by closed form, falling back to Monte Carlo with default
/// settings when the pair has none.
pub fn coulomb_form(a: &Source, b: &Source) -> Result<KernelIntegral> {
    coulomb_form_with(a, b, &McConfig::default())
}

/// As [`coulomb_form`], using `fallback` if Monte Carlo is needed.
pub fn coulomb_form_with(a: &Source, b: &Source, fallback: &McConfig) -> Result<KernelIntegral> {
    check_pair(a, b)?;
    let d = a.center.distance(b.center);
    match unit_closed_form(a.shape, b.shape, d)? {
        Some(unit) => KernelIntegral::closed(a.amount * b.amount * unit, a.kernel_dim()),
        None => {
            let mut mc = coulomb_form_mc(a, b, fallback)?;
            mc.fallback = true;
            Ok(mc)
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    coincidences: u64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if other.n == 0 {
            return Self {
                coincidences: self.coincidences + other.coincidences,
                ..self
            };
        }
        if self.n == 0 {
            return Self {
                coincidences: self.coincidences + other.coincidences,
                ..other
            };
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Self {
            n,
            mean,
            m2,
            coincidences: self.coincidences + other.coincidences,
        }
    }
}

fn partition_moments(a: &Source, b: &Source, n: u64, seed: u64, stream: u64) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let offset = b.center - a.center;
    let mut m = Moments::default();
    for _ in 0..n {
        loop {
            let x = a.shape.sample_offset(&mut rng);
            let y = b.shape.sample_offset(&mut rng) + offset;
            let r = x.distance(y);
            if r > 0.0 {
                m.push(1.0 / r);
                break;
            }
            m.coincidences += 1;
        }
    }
    m
}

/// Monte Carlo estimate of the bilinear form.
///
/// Point sources are treated as delta measures. Two point sources leave
/// nothing to sample and give the exact `qa qb / d` with zero error.
pub fn coulomb_form_mc(a: &Source, b: &Source, cfg: &McConfig) -> Result<KernelIntegral> {
    check_pair(a, b)?;
    if cfg.samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {}",
            cfg.samples
        )));
    }
    let dim = a.kernel_dim();
    let scale = a.amount * b.amount;

    if !a.shape.is_extended() && !b.shape.is_extended() {
        let d = a.center.distance(b.center);
        if d == 0.0 {
            return Err(Error::Singularity(
                "two point sources at zero separation".into(),
            ));
        }
        return Ok(KernelIntegral {
            value: Quantity::new(scale / d, dim)?,
            method: Method::MonteCarlo,
            mc_std_error: Some(Quantity::new(0.0, dim)?),
            samples: Some(cfg.samples),
            seed: Some(cfg.seed),
            coincidences: 0,
            fallback: false,
        });
    }

    let base = cfg.samples / MC_PARTITIONS;
    let extra = cfg.samples % MC_PARTITIONS;
    let parts: Vec<Moments> = (0..MC_PARTITIONS)
        .into_par_iter()
        .map(|p| {
            let n = base + u64::from(p < extra);
            partition_moments(a, b, n, cfg.seed, p)
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);

    let variance = total.m2 / (total.n - 1) as f64;
    let se = (variance / total.n as f64).sqrt() * scale.abs();
    Ok(KernelIntegral {
        value: Quantity::new(scale * total.mean, dim)?,
        method: Method::MonteCarlo,
        mc_std_error: Some(Quantity::new(se, dim)?),
        samples: Some(total.n),
        seed: Some(cfg.seed),
        coincidences: total.coincidences,
        fallback: false,
    })
}

/// Self-energy `½ I[ρ, ρ]` of a single extended source (coupling omitted).
///
/// For a uniform sphere this is `(3/5) q²/a`, for a Gaussian `q²/(2σ√π)`.
pub fn self_energy(src: &Source) -> Result<KernelIntegral> {
    if !src.shape.is_extended() {
        return Err(Error::Singularity(
            "self-energy of a point source diverges".into(),
        ));
    }
    coulomb_form(src, src)?.halved()
}

/// Monte Carlo counterpart of [`self_energy`].
pub fn self_energy_mc(src: &Source, cfg: &McConfig) -> Result<KernelIntegral> {
    if !src.shape.is_extended() {
        return Err(Error::Singularity(
            "self-energy of a point source diverges".into(),
        ));
    }
    coulomb_form_mc(src, src, cfg)?.halved()
}

/// Closed-form sphere self-energy coefficient, `(3/5) m²/a`.
pub fn sphere_self_energy(mass: f64, radius: f64) -> f64 {
    3.0 * mass * mass / (5.0 * radius)
}

/// Closed-form Gaussian self-energy, `m²/(2σ√π)`.
pub fn gaussian_self_energy(mass: f64, sigma: f64) -> f64 {
    mass * mass / (2.0 * sigma * PI.sqrt())
}
