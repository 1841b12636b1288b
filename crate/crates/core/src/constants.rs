//! CODATA 2018 values in SI.

use std::f64::consts::PI;

use crate::units::{Dimension, Quantity};

pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_30e-11;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;
pub const PLANCK_H: f64 = 6.626_070_15e-34;
pub const ELECTRONVOLT_J: f64 = ELEMENTARY_CHARGE_C;

/// Label written into report metadata.
pub const CONSTANTS_VERSION: &str = "CODATA 2018";

/// 1/(4πε₀) in N·m²/C².
pub fn coulomb_constant() -> f64 {
    1.0 / (4.0 * PI * VACUUM_PERMITTIVITY)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub g: Quantity,
    pub epsilon0: Quantity,
    pub elementary_charge: Quantity,
    pub planck_h: Quantity,
    pub electronvolt: Quantity,
}

impl Constants {
    pub fn codata2018() -> Self {
        // all literals are finite
        let q = |v, d| Quantity::new(v, d).expect("finite constant");
        Self {
            g: q(GRAVITATIONAL_CONSTANT, Dimension::GRAVITATIONAL),
            epsilon0: q(VACUUM_PERMITTIVITY, Dimension::PERMITTIVITY),
            elementary_charge: q(ELEMENTARY_CHARGE_C, Dimension::CHARGE),
            planck_h: q(PLANCK_H, Dimension::ACTION),
            electronvolt: q(ELECTRONVOLT_J, Dimension::ENERGY),
        }
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::codata2018()
    }
}
