//! Mass and charge density models and the superposition they are placed in.
//!
//! A [`DistributionModel`] describes one material particle: its shape, its
//! total mass and optionally its total charge. Charge density always has the
//! same geometry as mass density, scaled by `total_charge / total_mass`.
//!
//! A [`SuperpositionSpec`] places copies of that one particle at N centres,
//! each with a complex amplitude. How much mass each branch carries is chosen
//! by [`Weighting`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};

use crate::constants::GRAVITATIONAL_CONSTANT;
use crate::error::{Error, Result};
use crate::special::erf_over_x;
use crate::units::{Dimension, Quantity};
use crate::vec3::Vec3;

/// Geometry of a density, lengths in metres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Point,
    UniformSphere { radius: f64 },
    Gaussian { sigma: f64 },
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Point => "point",
            Shape::UniformSphere { .. } => "uniform_sphere",
            Shape::Gaussian { .. } => "gaussian",
        }
    }

    /// Radius or sigma; zero for a point.
    pub fn size(&self) -> f64 {
        match *self {
            Shape::Point => 0.0,
            Shape::UniformSphere { radius } => radius,
            Shape::Gaussian { sigma } => sigma,
        }
    }

    pub fn is_extended(&self) -> bool {
        !matches!(self, Shape::Point)
    }

    fn validate(&self) -> Result<()> {
        let size = self.size();
        if self.is_extended() && !(size > 0.0 && size.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "{} size must be positive and finite, got {size}",
                self.name()
            )));
        }
        Ok(())
    }

    /// Normalised density (integrates to one) at offset `r` from the centre.
    pub(crate) fn unit_density(&self, r: Vec3) -> Result<f64> {
        match *self {
            Shape::Point => Err(Error::Unsupported(
                "a point mass has no pointwise density".into(),
            )),
            Shape::UniformSphere { radius } => Ok(if r.norm() <= radius {
                3.0 / (4.0 * PI * radius.powi(3))
            } else {
                0.0
            }),
            Shape::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                Ok((2.0 * PI * s2).powf(-1.5) * (-r.norm_squared() / (2.0 * s2)).exp())
            }
        }
    }

    /// ∫ ρ̂(y)/|r − y| d³y for the normalised density, in 1/m.
    pub(crate) fn unit_inverse_distance(&self, r: Vec3) -> Result<f64> {
        let dist = r.norm();
        match *self {
            Shape::Point => {
                if dist == 0.0 {
                    Err(Error::Singularity(
                        "potential of a point mass at its own position".into(),
                    ))
                } else {
                    Ok(1.0 / dist)
                }
            }
            Shape::UniformSphere { radius } => Ok(if dist >= radius {
                1.0 / dist
            } else {
                (3.0 * radius * radius - dist * dist) / (2.0 * radius.powi(3))
            }),
            Shape::Gaussian { sigma } => {
                let k = 1.0 / (sigma * std::f64::consts::SQRT_2);
                Ok(k * erf_over_x(dist * k))
            }
        }
    }

    /// One draw from the normalised density, as an offset from the centre.
    pub(crate) fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        match *self {
            Shape::Point => Vec3::ZERO,
            Shape::UniformSphere { radius } => {
                let dir: [f64; 3] = UnitSphere.sample(rng);
                let u: f64 = rng.random();
                Vec3::from(dir) * (radius * u.cbrt())
            }
            Shape::Gaussian { sigma } => {
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                let z: f64 = rng.sample(StandardNormal);
                Vec3::new(x, y, z) * sigma
            }
        }
    }
}

/// One material particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionModel {
    shape: Shape,
    total_mass: Quantity,
    total_charge: Option<Quantity>,
}

impl DistributionModel {
    pub fn new(shape: Shape, total_mass: Quantity, total_charge: Option<Quantity>) -> Result<Self> {
        shape.validate()?;
        let m = total_mass.value_in(Dimension::MASS)?;
        if m <= 0.0 {
            return Err(Error::InvalidModel(format!(
                "total mass must be positive, got {m} kg"
            )));
        }
        if let Some(q) = total_charge {
            q.expect_dim(Dimension::CHARGE)?;
        }
        Ok(Self {
            shape,
            total_mass,
            total_charge,
        })
    }

    /// Convenience constructor from SI values (kg, m, C).
    pub fn from_si(shape: Shape, mass_kg: f64, charge_c: Option<f64>) -> Result<Self> {
        let mass = Quantity::new(mass_kg, Dimension::MASS)?;
        let charge = charge_c
            .map(|q| Quantity::new(q, Dimension::CHARGE))
            .transpose()?;
        Self::new(shape, mass, charge)
    }

    pub fn point(mass_kg: f64) -> Result<Self> {
        Self::from_si(Shape::Point, mass_kg, None)
    }

    pub fn uniform_sphere(radius_m: f64, mass_kg: f64) -> Result<Self> {
        Self::from_si(Shape::UniformSphere { radius: radius_m }, mass_kg, None)
    }

    pub fn gaussian(sigma_m: f64, mass_kg: f64) -> Result<Self> {
        Self::from_si(Shape::Gaussian { sigma: sigma_m }, mass_kg, None)
    }

    pub fn with_charge(self, charge_c: f64) -> Result<Self> {
        Self::from_si(self.shape, self.mass_kg(), Some(charge_c))
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn total_mass(&self) -> Quantity {
        self.total_mass
    }

    pub fn total_charge(&self) -> Option<Quantity> {
        self.total_charge
    }

    pub fn mass_kg(&self) -> f64 {
        self.total_mass.value()
    }

    pub fn charge_c(&self) -> Option<f64> {
        self.total_charge.map(|q| q.value())
    }

    /// The same geometry with every length multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        let shape = match self.shape {
            Shape::Point => Shape::Point,
            Shape::UniformSphere { radius } => Shape::UniformSphere {
                radius: radius * factor,
            },
            Shape::Gaussian { sigma } => Shape::Gaussian {
                sigma: sigma * factor,
            },
        };
        Self::new(shape, self.total_mass, self.total_charge)
    }
}

/// Mass density at offset `r` from the particle centre.
pub fn density_at(model: &DistributionModel, r: Vec3) -> Result<Quantity> {
    let rho = model.shape.unit_density(r)? * model.mass_kg();
    Quantity::new(rho, Dimension::DENSITY)
}

/// Newtonian gravitational potential at offset `r` from the particle centre.
pub fn potential_at(model: &DistributionModel, r: Vec3) -> Result<Quantity> {
    let phi = -GRAVITATIONAL_CONSTANT * model.mass_kg() * model.shape.unit_inverse_distance(r)?;
    Quantity::new(phi, Dimension::SPECIFIC_ENERGY)
}

/// `n` i.i.d. draws from the normalised density, centred on the origin.
pub fn sample_points(model: &DistributionModel, n: usize, seed: u64) -> Result<Vec<Vec3>> {
    if !model.shape.is_extended() {
        return Err(Error::Unsupported("cannot sample a point mass".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| model.shape.sample_offset(&mut rng))
        .collect())
}

/// How much of the particle each branch of a superposition carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Weighting {
    /// Every branch carries the full mass and charge.
    #[default]
    Full,
    /// Branch i carries |weightᵢ|² of the mass and charge.
    Born,
}

impl Weighting {
    pub fn name(self) -> &'static str {
        match self {
            Weighting::Full => "full",
            Weighting::Born => "born",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentPlacement {
    pub center: Vec3,
    pub weight: Complex64,
}

impl ComponentPlacement {
    pub fn new(center: Vec3, weight: Complex64) -> Self {
        Self { center, weight }
    }
}

const NORMALISATION_TOLERANCE: f64 = 1e-12;

/// N ≥ 2 weighted copies of one particle.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpositionSpec {
    base: DistributionModel,
    components: Vec<ComponentPlacement>,
}

impl SuperpositionSpec {
    pub fn new(base: DistributionModel, components: Vec<ComponentPlacement>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "a superposition needs at least 2 components, got {}",
                components.len()
            )));
        }
        let mut norm = 0.0;
        for (i, c) in components.iter().enumerate() {
            if !c.center.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "component {i} has a non-finite centre"
                )));
            }
            let w = c.weight.norm();
            if !(w > 0.0 && w <= 1.0 + NORMALISATION_TOLERANCE) {
                return Err(Error::InvalidModel(format!(
                    "component {i} weight modulus {w} is outside (0, 1]"
                )));
            }
            norm += c.weight.norm_sqr();
        }
        if (norm - 1.0).abs() > NORMALISATION_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "squared weights sum to {norm}, expected 1"
            )));
        }
        Ok(Self { base, components })
    }

    /// Equal-amplitude two-branch state with centres `x1` and `x2`.
    pub fn two_branch(base: DistributionModel, x1: Vec3, x2: Vec3) -> Result<Self> {
        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(
            base,
            vec![
                ComponentPlacement::new(x1, w),
                ComponentPlacement::new(x2, w),
            ],
        )
    }

    /// Two equal branches on the x axis, `separation` apart, centred on the origin.
    pub fn symmetric_pair(base: DistributionModel, separation: f64) -> Result<Self> {
        let h = separation / 2.0;
        Self::two_branch(base, Vec3::along_x(-h), Vec3::along_x(h))
    }

    /// N equal-amplitude branches with centres supplied by the caller.
    pub fn equal_weights(base: DistributionModel, centers: &[Vec3]) -> Result<Self> {
        let w = Complex64::new(1.0 / (centers.len() as f64).sqrt(), 0.0);
        Self::new(
            base,
            centers
                .iter()
                .map(|&c| ComponentPlacement::new(c, w))
                .collect(),
        )
    }

    pub fn base(&self) -> &DistributionModel {
        &self.base
    }

    pub fn components(&self) -> &[ComponentPlacement] {
        &self.components
    }

    /// Fraction of the particle carried by component `i`.
    pub fn share(&self, i: usize, weighting: Weighting) -> f64 {
        match weighting {
            Weighting::Full => 1.0,
            Weighting::Born => self.components[i].weight.norm_sqr(),
        }
    }

    /// Every length (centres and particle size) multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| ComponentPlacement::new(c.center * factor, c.weight))
            .collect();
        Self::new(self.base.dilated(factor)?, components)
    }

    pub fn with_base(&self, base: DistributionModel) -> Result<Self> {
        Self::new(base, self.components.clone())
    }
}
