//! Collapse timescales and the N-branch energy bound.

use std::f64::consts::PI;

use crate::constants::{GRAVITATIONAL_CONSTANT, PLANCK_H};
use crate::energy::DeltaE;
use crate::error::{Error, Result};
use crate::units::{Dimension, Quantity};

/// Mean lifetime of a superposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CollapseTime {
    Finite(Quantity),
    /// ΔE = 0: the branches coincide and nothing drives a collapse.
    Stable,
}

impl CollapseTime {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            CollapseTime::Finite(t) => Some(t.value()),
            CollapseTime::Stable => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapseEstimate {
    pub delta_e: DeltaE,
    pub tau: CollapseTime,
}

/// τ = h/ΔE for a raw energy.
pub fn collapse_time_for(energy: Quantity) -> Result<CollapseTime> {
    let e = energy.value_in(Dimension::ENERGY)?;
    if e < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "instability energy must be nonnegative, got {e:e} J"
        )));
    }
    if e == 0.0 {
        return Ok(CollapseTime::Stable);
    }
    let h = Quantity::new(PLANCK_H, Dimension::ACTION)?;
    Ok(CollapseTime::Finite(h.div(energy)?))
}

pub fn collapse_time(delta_e: DeltaE) -> Result<CollapseEstimate> {
    Ok(CollapseEstimate {
        delta_e,
        tau: collapse_time_for(delta_e.value)?,
    })
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

/// τ(λa₀)/τ(a₀) for a particle of fixed density whose energy follows
/// ΔE = Gm²/a with m = (4/3)πa³ρ.
pub fn size_scaling_tau(factor: f64, density: Quantity, base_radius_m: f64) -> Result<f64> {
    require_positive("size factor", factor)?;
    require_positive("radius", base_radius_m)?;
    let rho = density.value_in(Dimension::DENSITY)?;
    require_positive("density", rho)?;
    let tau = |a: f64| {
        let m = 4.0 / 3.0 * PI * a.powi(3) * rho;
        PLANCK_H / (GRAVITATIONAL_CONSTANT * m * m / a)
    };
    Ok(tau(factor * base_radius_m) / tau(base_radius_m))
}

/// How much mass each of the N branches carries in the bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MassConvention {
    /// m is the mass of every branch.
    FullMassPerComponent,
    /// Each branch carries m/N, following the 1/√N amplitudes.
    BornWeighted,
}

impl MassConvention {
    pub fn name(self) -> &'static str {
        match self {
            MassConvention::FullMassPerComponent => "full_mass_per_component",
            MassConvention::BornWeighted => "born_weighted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NComponentReport {
    pub n: u32,
    pub r: Quantity,
    pub a: Quantity,
    pub mass_convention: MassConvention,
    pub bound: Quantity,
    pub coincident_self_energy: Quantity,
    pub violation_ratio: f64,
}

/// Lower bound on the instability energy of N branches on a shell of radius
/// `r`, each a uniform sphere of radius `a`:
///
/// ```text
/// ΔE > G N(N−1) m²/(2r) + (3N/5) G m²/a
/// ```
///
/// compared with the single-particle self-energy (3/5)Gm²/a. Under
/// [`MassConvention::BornWeighted`] every m in the bound becomes m/N.
pub fn n_component_bound(
    n: u32,
    mass_kg: f64,
    r_m: f64,
    a_m: f64,
    convention: MassConvention,
) -> Result<NComponentReport> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "component count must be at least 1".into(),
        ));
    }
    require_positive("mass", mass_kg)?;
    require_positive("shell radius", r_m)?;
    require_positive("particle radius", a_m)?;

    let nf = f64::from(n);
    let per_branch = match convention {
        MassConvention::FullMassPerComponent => mass_kg,
        MassConvention::BornWeighted => mass_kg / nf,
    };
    let g = GRAVITATIONAL_CONSTANT;
    let pairs = g * nf * (nf - 1.0) * per_branch * per_branch / (2.0 * r_m);
    let selves = 3.0 * nf / 5.0 * g * per_branch * per_branch / a_m;
    let bound = pairs + selves;
    let coincident = 3.0 / 5.0 * g * mass_kg * mass_kg / a_m;

    Ok(NComponentReport {
        n,
        r: Quantity::new(r_m, Dimension::LENGTH)?,
        a: Quantity::new(a_m, Dimension::LENGTH)?,
        mass_convention: convention,
        bound: Quantity::new(bound, Dimension::ENERGY)?,
        coincident_self_energy: Quantity::new(coincident, Dimension::ENERGY)?,
        violation_ratio: bound / coincident,
    })
}

/// `(n, violation_ratio)` for n = 1..=n_max.
pub fn conservation_violation_curve(
    n_max: u32,
    mass_kg: f64,
    r_m: f64,
    a_m: f64,
    convention: MassConvention,
) -> Result<Vec<(u32, f64)>> {
    (1..=n_max.max(1))
        .map(|n| {
            n_component_bound(n, mass_kg, r_m, a_m, convention).map(|rep| (n, rep.violation_ratio))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::convert_to_ev;

    #[test]
    fn tau_for_1e_minus_19_ev() {
        let e = Quantity::new(1e-19 * 1.602176634e-19, Dimension::ENERGY).unwrap();
        let tau = collapse_time_for(e).unwrap().seconds().unwrap();
        // h / 1e-19 eV = 4.135667696e4 s
        assert!((tau / 4.135_667_696e4 - 1.0).abs() < 1e-9, "{tau}");
        assert!(tau > 1e4 && tau < 1e5);

        let bigger = collapse_time_for(e.scale(1e5).unwrap())
            .unwrap()
            .seconds()
            .unwrap();
        assert!((bigger / tau - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn zero_energy_is_stable() {
        let zero = Quantity::new(0.0, Dimension::ENERGY).unwrap();
        assert_eq!(collapse_time_for(zero).unwrap(), CollapseTime::Stable);
        let neg = Quantity::new(-1.0, Dimension::ENERGY).unwrap();
        assert!(collapse_time_for(neg).is_err());
        let wrong = Quantity::new(1.0, Dimension::FORCE).unwrap();
        assert!(collapse_time_for(wrong).is_err());
    }

    #[test]
    fn size_scaling() {
        let rho = Quantity::new(2000.0, Dimension::DENSITY).unwrap();
        assert!((size_scaling_tau(10.0, rho, 1e-6).unwrap() / 1e-5 - 1.0).abs() < 1e-12);
        assert!((size_scaling_tau(1.0, rho, 1e-6).unwrap() - 1.0).abs() < 1e-15);
        assert!((size_scaling_tau(2.0, rho, 1e-6).unwrap() * 32.0 - 1.0).abs() < 1e-14);
        assert!(size_scaling_tau(0.0, rho, 1e-6).is_err());
        assert!(size_scaling_tau(-2.0, rho, 1e-6).is_err());
    }

    #[test]
    fn single_component_has_no_excess() {
        let rep =
            n_component_bound(1, 1.0, 1.0, 1.0, MassConvention::FullMassPerComponent).unwrap();
        assert_eq!(rep.bound, rep.coincident_self_energy);
        assert_eq!(rep.violation_ratio, 1.0);
        let born = n_component_bound(1, 1.0, 1.0, 1.0, MassConvention::BornWeighted).unwrap();
        assert_eq!(born.violation_ratio, 1.0);
    }

    #[test]
    fn two_components_at_shell_radius_a() {
        let (m, a) = (1.5e-17, 1e-6);
        let rep = n_component_bound(2, m, a, a, MassConvention::FullMassPerComponent).unwrap();
        let unit = GRAVITATIONAL_CONSTANT * m * m / a;
        assert!((rep.bound.value() / (2.2 * unit) - 1.0).abs() < 1e-12);
        assert!((rep.violation_ratio / (11.0 / 3.0) - 1.0).abs() < 1e-12);
        assert!(convert_to_ev(rep.bound).unwrap() > 0.0);
        let born = n_component_bound(2, m, a, a, MassConvention::BornWeighted).unwrap();
        assert!((born.violation_ratio / (11.0 / 12.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn curves() {
        let full =
            conservation_violation_curve(2, 1.0, 1.0, 1.0, MassConvention::FullMassPerComponent)
                .unwrap();
        assert_eq!(full[0], (1, 1.0));
        assert!((full[1].1 - 11.0 / 3.0).abs() < 1e-14);
        let single =
            conservation_violation_curve(1, 1.0, 1.0, 1.0, MassConvention::FullMassPerComponent)
                .unwrap();
        assert_eq!(single, vec![(1, 1.0)]);
        // (5/6)(n−1)/n + 1/n → 5/6
        let born =
            conservation_violation_curve(10_000, 1.0, 1.0, 1.0, MassConvention::BornWeighted)
                .unwrap();
        assert!((born.last().unwrap().1 - 5.0 / 6.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = MassConvention::FullMassPerComponent;
        assert!(n_component_bound(0, 1.0, 1.0, 1.0, c).is_err());
        assert!(n_component_bound(2, 1.0, 0.0, 1.0, c).is_err());
        assert!(n_component_bound(2, 1.0, 1.0, -1.0, c).is_err());
    }
}
