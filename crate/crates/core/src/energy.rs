//! Instability energy of a two-branch superposition and its electromagnetic
//! counterpart.
//!
//! For branch densities ρ₁, ρ₂ the energy is the Coulomb-norm self-energy of
//! their difference,
//!
//! ```text
//! ΔE = f · k · ½ I[ρ₁ − ρ₂, ρ₁ − ρ₂] = f · k · (S₁ + S₂ − I[ρ₁, ρ₂])
//! ```
//!
//! with `Sᵢ = ½ I[ρᵢ, ρᵢ]` the self-energy of branch i, `k` the coupling
//! (G or 1/4πε₀) and `f` the convention factor (1 by default, 4π for the
//! literal prefactor of the density-form integral).

use std::f64::consts::PI;

use crate::constants::{coulomb_constant, GRAVITATIONAL_CONSTANT};
use crate::distribution::{DistributionModel, SuperpositionSpec, Weighting};
use crate::error::{Error, Result};
use crate::kernel::{
    coulomb_form_mc, coulomb_form_with, unit_closed_form, unit_separation_gap, KernelIntegral,
    McConfig, Method, Source,
};
use crate::units::{Dimension, Quantity};
use crate::vec3::Vec3;

/// Convention factor reproducing the literal `4πG` prefactor.
pub const LITERAL_PREFACTOR: f64 = 4.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interaction {
    Gravity,
    Electromagnetic,
}

impl Interaction {
    pub fn name(self) -> &'static str {
        match self {
            Interaction::Gravity => "gravity",
            Interaction::Electromagnetic => "electromagnetic",
        }
    }

    /// G in m³/(kg·s²) or 1/(4πε₀) in N·m²/C².
    pub fn coupling(self) -> f64 {
        match self {
            Interaction::Gravity => GRAVITATIONAL_CONSTANT,
            Interaction::Electromagnetic => coulomb_constant(),
        }
    }

    fn amount_dim(self) -> Dimension {
        match self {
            Interaction::Gravity => Dimension::MASS,
            Interaction::Electromagnetic => Dimension::CHARGE,
        }
    }

    fn amount(self, model: &DistributionModel) -> Result<f64> {
        match self {
            Interaction::Gravity => Ok(model.mass_kg()),
            Interaction::Electromagnetic => model.charge_c().ok_or(Error::MissingCharge),
        }
    }

    /// Coupling with dimension energy·length / amount².
    fn coupling_quantity(self) -> Result<Quantity> {
        let dim = Dimension::ENERGY
            .mul(Dimension::LENGTH)
            .div(self.amount_dim().pow(2));
        Quantity::new(self.coupling(), dim)
    }
}

/// Knobs shared by every energy evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub weighting: Weighting,
    pub convention_factor: f64,
    pub mc: McConfig,
    /// Evaluate every bilinear term by Monte Carlo, even with a closed form.
    pub force_mc: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            weighting: Weighting::Full,
            convention_factor: 1.0,
            mc: McConfig::default(),
            force_mc: false,
        }
    }
}

impl EvalOptions {
    fn integral(&self, a: &Source, b: &Source) -> Result<KernelIntegral> {
        if self.force_mc {
            coulomb_form_mc(a, b, &self.mc)
        } else {
            coulomb_form_with(a, b, &self.mc)
        }
    }
}

/// Terms of ΔE before coupling and convention factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakdown {
    /// ½ I[ρ₁, ρ₁]
    pub self_1: KernelIntegral,
    /// ½ I[ρ₂, ρ₂]
    pub self_2: KernelIntegral,
    /// I[ρ₁, ρ₂]
    pub cross: KernelIntegral,
}

impl Breakdown {
    pub fn method(&self) -> Method {
        let any_mc = [self.self_1, self.self_2, self.cross]
            .iter()
            .any(|k| k.method == Method::MonteCarlo);
        if any_mc {
            Method::MonteCarlo
        } else {
            Method::ClosedForm
        }
    }

    pub fn fallback(&self) -> bool {
        self.self_1.fallback || self.self_2.fallback || self.cross.fallback
    }

    /// Combined standard error of `S₁ + S₂ − I₁₂`, treating terms as independent.
    pub fn std_error(&self) -> f64 {
        let e = [self.self_1, self.self_2, self.cross].map(|k| k.std_error());
        (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaE {
    pub value: Quantity,
    pub convention_factor: f64,
    pub interaction: Interaction,
    pub weighting: Weighting,
    pub breakdown: Breakdown,
}

impl DeltaE {
    pub fn joules(&self) -> f64 {
        self.value.value()
    }

    pub fn method(&self) -> Method {
        self.breakdown.method()
    }

    /// Standard error of the energy in joules (zero on the closed-form path).
    pub fn std_error(&self) -> f64 {
        self.convention_factor * self.interaction.coupling() * self.breakdown.std_error()
    }
}

fn branch_sources(
    spec: &SuperpositionSpec,
    interaction: Interaction,
    weighting: Weighting,
) -> Result<Vec<Source>> {
    let base = spec.base();
    let amount = interaction.amount(base)?;
    Ok(spec
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| Source {
            shape: base.shape(),
            amount: amount * spec.share(i, weighting),
            center: c.center,
            amount_dim: interaction.amount_dim(),
        })
        .collect())
}

fn require_two(spec: &SuperpositionSpec) -> Result<()> {
    if spec.components().len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "instability energy is defined for two components, got {}",
            spec.components().len()
        )));
    }
    Ok(())
}

/// ΔE of a two-branch superposition.
pub fn delta_e(
    spec: &SuperpositionSpec,
    interaction: Interaction,
    opts: &EvalOptions,
) -> Result<DeltaE> {
    require_two(spec)?;
    if !spec.base().shape().is_extended() {
        return Err(Error::Singularity(
            "self-energy of a point source diverges; use cross_energy for point branches".into(),
        ));
    }
    let src = branch_sources(spec, interaction, opts.weighting)?;
    let half = |k: KernelIntegral| -> Result<KernelIntegral> {
        Ok(KernelIntegral {
            value: k.value.scale(0.5)?,
            mc_std_error: k.mc_std_error.map(|e| e.scale(0.5)).transpose()?,
            ..k
        })
    };
    let breakdown = Breakdown {
        self_1: half(opts.integral(&src[0], &src[0])?)?,
        self_2: half(opts.integral(&src[1], &src[1])?)?,
        cross: opts.integral(&src[0], &src[1])?,
    };

    let coincident = src[0] == src[1];
    let shape = spec.base().shape();
    let closed_gap = match breakdown.method() {
        Method::ClosedForm => unit_separation_gap(shape, src[0].center.distance(src[1].center)),
        Method::MonteCarlo => None,
    };
    let norm = if coincident {
        0.0
    } else if let (Some(gap), Some(i0)) = (closed_gap, unit_closed_form(shape, shape, 0.0)?) {
        // ½(q₁−q₂)² I(0) + q₁q₂ (I(0) − I(d)), free of cancellation
        let (q1, q2) = (src[0].amount, src[1].amount);
        0.5 * (q1 - q2).powi(2) * i0 + q1 * q2 * gap
    } else {
        breakdown.self_1.value.value() + breakdown.self_2.value.value()
            - breakdown.cross.value.value()
    };

    let scale = breakdown.self_1.value.value() + breakdown.self_2.value.value();
    let tolerance = match breakdown.method() {
        Method::ClosedForm => 1e-12 * scale.abs(),
        Method::MonteCarlo => 3.0 * breakdown.std_error(),
    };
    if norm < -tolerance {
        return Err(Error::Inconsistent(format!(
            "negative Coulomb norm {norm:e} (tolerance {tolerance:e})"
        )));
    }
    // the Coulomb norm is nonnegative; round-off and sampling noise are clipped
    let norm = norm.max(0.0);

    let value = interaction
        .coupling_quantity()?
        .mul(Quantity::new(norm, breakdown.cross.value.dim())?)?
        .scale(opts.convention_factor)?;
    debug_assert_eq!(value.dim(), Dimension::ENERGY);
    Ok(DeltaE {
        value,
        convention_factor: opts.convention_factor,
        interaction,
        weighting: opts.weighting,
        breakdown,
    })
}

/// Mutual interaction energy `f · k · I[ρ₁, ρ₂]` of the two branches.
///
/// Finite for point branches, where [`delta_e`] diverges.
pub fn cross_energy(
    spec: &SuperpositionSpec,
    interaction: Interaction,
    opts: &EvalOptions,
) -> Result<Quantity> {
    require_two(spec)?;
    let src = branch_sources(spec, interaction, opts.weighting)?;
    let cross = opts.integral(&src[0], &src[1])?;
    interaction
        .coupling_quantity()?
        .mul(cross.value)?
        .scale(opts.convention_factor)
}

/// `q² / (4πε₀ G m²)`, the geometry-free ratio of electromagnetic to
/// gravitational energies for identical charge and mass geometry.
pub fn coupling_ratio(charge_c: f64, mass_kg: f64) -> Result<f64> {
    if mass_kg == 0.0 {
        return Err(Error::InvalidArgument("mass must be nonzero".into()));
    }
    let r = coulomb_constant() * charge_c * charge_c / (GRAVITATIONAL_CONSTANT * mass_kg * mass_kg);
    if !r.is_finite() {
        return Err(Error::NonFinite {
            context: "electromagnetic/gravity ratio".into(),
        });
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioCheck {
    /// `q²/(4πε₀Gm²)`
    pub closed_form: f64,
    /// Quotient of the two independently evaluated energies, when both are
    /// nonzero.
    pub quotient: Option<f64>,
    pub grav_energy: Quantity,
    pub em_energy: Quantity,
}

const RATIO_TOLERANCE: f64 = 1e-10;

/// Evaluates gravitational and electrostatic energies for the same spec and
/// checks that their quotient matches [`coupling_ratio`].
///
/// Extended particles compare ΔE; point particles, whose ΔE diverges,
/// compare the mutual interaction energies.
pub fn em_gravity_ratio(spec: &SuperpositionSpec, opts: &EvalOptions) -> Result<RatioCheck> {
    let base = spec.base();
    let charge = base.charge_c().ok_or(Error::MissingCharge)?;
    let closed_form = coupling_ratio(charge, base.mass_kg())?;

    let (grav, em) = if base.shape().is_extended() {
        (
            delta_e(spec, Interaction::Gravity, opts)?.value,
            delta_e(spec, Interaction::Electromagnetic, opts)?.value,
        )
    } else {
        (
            cross_energy(spec, Interaction::Gravity, opts)?,
            cross_energy(spec, Interaction::Electromagnetic, opts)?,
        )
    };

    let quotient = check_ratio(closed_form, grav.value(), em.value())?;
    Ok(RatioCheck {
        closed_form,
        quotient,
        grav_energy: grav,
        em_energy: em,
    })
}

/// Quotient `em / grav` checked against `closed_form`; `None` when the
/// gravitational energy is zero.
pub fn check_ratio(closed_form: f64, grav: f64, em: f64) -> Result<Option<f64>> {
    if grav == 0.0 {
        return Ok(None);
    }
    let q = em / grav;
    let rel = if closed_form == 0.0 {
        q.abs()
    } else {
        (q / closed_form - 1.0).abs()
    };
    if rel > RATIO_TOLERANCE {
        return Err(Error::Inconsistent(format!(
            "energy quotient {q:e} differs from q²/(4πε₀Gm²) = {closed_form:e} by {rel:e}"
        )));
    }
    Ok(Some(q))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceEstimate {
    pub force: Quantity,
    /// False when the two copies overlap (d < 2 × radius or sigma), where
    /// the point-source law is only approximate.
    pub point_approximation_valid: bool,
}

/// Magnitude of the force between two copies of `model` a distance `d` apart.
pub fn mutual_force(
    model: &DistributionModel,
    separation_m: f64,
    interaction: Interaction,
) -> Result<ForceEstimate> {
    if separation_m == 0.0 {
        return Err(Error::Singularity("force at zero separation".into()));
    }
    if separation_m.is_nan() || separation_m <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "separation must be positive, got {separation_m}"
        )));
    }
    let q = interaction.amount(model)?;
    let f = interaction.coupling() * q * q / (separation_m * separation_m);
    Ok(ForceEstimate {
        force: Quantity::new(f, Dimension::FORCE)?,
        point_approximation_valid: separation_m >= 2.0 * model.shape().size(),
    })
}

/// Acceleration a force imparts on the particle.
pub fn acceleration(force: Quantity, model: &DistributionModel) -> Result<Quantity> {
    force.div(model.total_mass())
}

/// Two branches on the x axis, used by presets and sweeps.
pub fn pair_at(base: DistributionModel, separation_m: f64) -> Result<SuperpositionSpec> {
    SuperpositionSpec::two_branch(base, Vec3::ZERO, Vec3::along_x(separation_m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ELEMENTARY_CHARGE_C;

    const G: f64 = GRAVITATIONAL_CONSTANT;

    #[test]
    fn distant_spheres() {
        let (m, a, d) = (2.0, 0.5, 10.0);
        let spec = pair_at(DistributionModel::uniform_sphere(a, m).unwrap(), d).unwrap();
        let de = delta_e(&spec, Interaction::Gravity, &EvalOptions::default()).unwrap();
        let expected = G * m * m * (6.0 / (5.0 * a) - 1.0 / d);
        assert!((de.joules() / expected - 1.0).abs() < 1e-14);
        assert_eq!(de.method(), Method::ClosedForm);
        assert_eq!(de.value.dim(), Dimension::ENERGY);

        let far = pair_at(DistributionModel::uniform_sphere(a, m).unwrap(), 1e12).unwrap();
        let de = delta_e(&far, Interaction::Gravity, &EvalOptions::default()).unwrap();
        assert!((de.joules() / (1.2 * G * m * m / a) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn coincident_branches_are_stable() {
        for base in [
            DistributionModel::uniform_sphere(1.0, 1.0).unwrap(),
            DistributionModel::gaussian(1.0, 1.0).unwrap(),
        ] {
            let spec = pair_at(base, 0.0).unwrap();
            for force_mc in [false, true] {
                let opts = EvalOptions {
                    force_mc,
                    mc: McConfig {
                        samples: 10_000,
                        seed: 1,
                    },
                    ..Default::default()
                };
                let de = delta_e(&spec, Interaction::Gravity, &opts).unwrap();
                assert_eq!(de.joules(), 0.0);
            }
        }
    }

    #[test]
    fn point_branches() {
        let m = 1e-23;
        let spec = pair_at(DistributionModel::point(m).unwrap(), 1e-7).unwrap();
        let opts = EvalOptions::default();
        assert!(matches!(
            delta_e(&spec, Interaction::Gravity, &opts),
            Err(Error::Singularity(_))
        ));
        let cross = cross_energy(&spec, Interaction::Gravity, &opts).unwrap();
        assert!((cross.value() / (G * 1e-46 / 1e-7) - 1.0).abs() < 1e-15);
        assert!((cross.value() / 6.7e-50 - 1.0).abs() < 0.01);
    }

    #[test]
    fn em_needs_charge() {
        let spec = pair_at(DistributionModel::uniform_sphere(1.0, 1.0).unwrap(), 3.0).unwrap();
        assert!(matches!(
            delta_e(&spec, Interaction::Electromagnetic, &EvalOptions::default()),
            Err(Error::MissingCharge)
        ));
        assert!(matches!(
            em_gravity_ratio(&spec, &EvalOptions::default()),
            Err(Error::MissingCharge)
        ));
    }

    #[test]
    fn ion_ratio() {
        let r = coupling_ratio(ELEMENTARY_CHARGE_C, 1e-23).unwrap();
        // 2.307e-28 / 6.674e-57
        assert!((r / 3.457e28 - 1.0).abs() < 1e-3, "{r:e}");
        assert_eq!(coupling_ratio(0.0, 1e-23).unwrap(), 0.0);
        assert!(coupling_ratio(1.0, 0.0).is_err());
    }

    #[test]
    fn ratio_ignores_geometry() {
        let base = DistributionModel::uniform_sphere(1e-6, 1e-23)
            .unwrap()
            .with_charge(ELEMENTARY_CHARGE_C)
            .unwrap();
        let opts = EvalOptions::default();
        let near = em_gravity_ratio(&pair_at(base, 3e-6).unwrap(), &opts).unwrap();
        let far = em_gravity_ratio(&pair_at(base, 6e-6).unwrap(), &opts).unwrap();
        assert_eq!(near.closed_form, far.closed_form);
        assert!((near.quotient.unwrap() / far.quotient.unwrap() - 1.0).abs() < 1e-12);
        let neutral = base.with_charge(0.0).unwrap();
        let zero = em_gravity_ratio(&pair_at(neutral, 3e-6).unwrap(), &opts).unwrap();
        assert_eq!(zero.closed_form, 0.0);
        assert_eq!(zero.quotient, Some(0.0));
    }

    #[test]
    fn ion_forces() {
        let ion = DistributionModel::point(1e-23)
            .unwrap()
            .with_charge(ELEMENTARY_CHARGE_C)
            .unwrap();
        let fg = mutual_force(&ion, 1e-7, Interaction::Gravity).unwrap();
        assert!((fg.force.value() / 6.6743e-43 - 1.0).abs() < 1e-12);
        let fe = mutual_force(&ion, 1e-7, Interaction::Electromagnetic).unwrap();
        assert!(
            (fe.force.value() / 2.307_077e-14 - 1.0).abs() < 1e-6,
            "{:e}",
            fe.force.value()
        );
        let acc = acceleration(fe.force, &ion).unwrap();
        assert_eq!(acc.dim(), Dimension::ACCELERATION);
        assert!((acc.value() / 2.307_077e9 - 1.0).abs() < 1e-6);
        assert!(fg.point_approximation_valid);
        assert!(matches!(
            mutual_force(&ion, 0.0, Interaction::Gravity),
            Err(Error::Singularity(_))
        ));
        let big = DistributionModel::uniform_sphere(1e-6, 1.0).unwrap();
        assert!(
            !mutual_force(&big, 1e-6, Interaction::Gravity)
                .unwrap()
                .point_approximation_valid
        );
    }

    #[test]
    fn literal_prefactor_scales_energy() {
        let spec = pair_at(DistributionModel::gaussian(1.0, 1.0).unwrap(), 2.0).unwrap();
        let bare = delta_e(&spec, Interaction::Gravity, &EvalOptions::default()).unwrap();
        let literal = delta_e(
            &spec,
            Interaction::Gravity,
            &EvalOptions {
                convention_factor: LITERAL_PREFACTOR,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((literal.joules() / bare.joules() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn born_weighting_quarters_energy_of_equal_pair() {
        let spec = pair_at(DistributionModel::gaussian(1.0, 1.0).unwrap(), 2.0).unwrap();
        let full = delta_e(&spec, Interaction::Gravity, &EvalOptions::default()).unwrap();
        let born = delta_e(
            &spec,
            Interaction::Gravity,
            &EvalOptions {
                weighting: Weighting::Born,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((born.joules() / full.joules() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn three_components_rejected() {
        let base = DistributionModel::gaussian(1.0, 1.0).unwrap();
        let spec = SuperpositionSpec::equal_weights(
            base,
            &[Vec3::ZERO, Vec3::along_x(1.0), Vec3::along_x(2.0)],
        )
        .unwrap();
        assert!(delta_e(&spec, Interaction::Gravity, &EvalOptions::default()).is_err());
    }
}
