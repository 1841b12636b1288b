//! Runtime dimension-checked physical quantities.
//!
//! Every value is held in SI. A [`Dimension`] is the exponent vector over the
//! base units (kg, m, s, A); display units such as eV are only applied when
//! formatting.

use std::fmt;

use crate::error::{Error, Result};

/// Integer exponents over (kg, m, s, A).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Dimension {
    pub mass: i8,
    pub length: i8,
    pub time: i8,
    pub current: i8,
}

#[allow(clippy::should_implement_trait)]
impl Dimension {
    pub const fn new(mass: i8, length: i8, time: i8, current: i8) -> Self {
        Self {
            mass,
            length,
            time,
            current,
        }
    }

    pub const DIMENSIONLESS: Self = Self::new(0, 0, 0, 0);
    pub const MASS: Self = Self::new(1, 0, 0, 0);
    pub const LENGTH: Self = Self::new(0, 1, 0, 0);
    pub const TIME: Self = Self::new(0, 0, 1, 0);
    pub const CURRENT: Self = Self::new(0, 0, 0, 1);
    pub const CHARGE: Self = Self::new(0, 0, 1, 1);
    pub const VOLUME: Self = Self::new(0, 3, 0, 0);
    pub const DENSITY: Self = Self::new(1, -3, 0, 0);
    pub const ACCELERATION: Self = Self::new(0, 1, -2, 0);
    pub const FORCE: Self = Self::new(1, 1, -2, 0);
    pub const ENERGY: Self = Self::new(1, 2, -2, 0);
    pub const ACTION: Self = Self::new(1, 2, -1, 0);
    /// Energy per unit mass, the unit of a gravitational potential.
    pub const SPECIFIC_ENERGY: Self = Self::new(0, 2, -2, 0);
    pub const GRAVITATIONAL: Self = Self::new(-1, 3, -2, 0);
    /// Unit of the vacuum permittivity, F/m = A² s⁴ kg⁻¹ m⁻³.
    pub const PERMITTIVITY: Self = Self::new(-1, -3, 4, 2);

    pub fn is_dimensionless(self) -> bool {
        self == Self::DIMENSIONLESS
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(
            self.mass + other.mass,
            self.length + other.length,
            self.time + other.time,
            self.current + other.current,
        )
    }

    pub fn div(self, other: Self) -> Self {
        Self::new(
            self.mass - other.mass,
            self.length - other.length,
            self.time - other.time,
            self.current - other.current,
        )
    }

    pub fn pow(self, n: i8) -> Self {
        Self::new(
            self.mass * n,
            self.length * n,
            self.time * n,
            self.current * n,
        )
    }

    fn exponents(self) -> [(&'static str, i8); 4] {
        [
            ("kg", self.mass),
            ("m", self.length),
            ("s", self.time),
            ("A", self.current),
        ]
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return f.write_str("1");
        }
        let mut first = true;
        for (sym, e) in self.exponents() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("·")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A finite SI value paired with its dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    value: f64,
    dim: Dimension,
}

#[allow(clippy::should_implement_trait)]
impl Quantity {
    pub fn new(value: f64, dim: Dimension) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: format!("quantity in {dim}"),
            });
        }
        Ok(Self { value, dim })
    }

    pub fn dimensionless(value: f64) -> Result<Self> {
        Self::new(value, Dimension::DIMENSIONLESS)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    /// Returns the SI value if the dimension matches `expected`.
    pub fn value_in(&self, expected: Dimension) -> Result<f64> {
        self.expect_dim(expected)?;
        Ok(self.value)
    }

    pub fn expect_dim(&self, expected: Dimension) -> Result<()> {
        if self.dim != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim,
            });
        }
        Ok(())
    }

    pub fn add(self, other: Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Self::new(self.value + other.value, self.dim)
    }

    pub fn sub(self, other: Self) -> Result<Self> {
        self.add(other.neg())
    }

    pub fn neg(self) -> Self {
        Self {
            value: -self.value,
            dim: self.dim,
        }
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        Self::new(self.value * other.value, self.dim.mul(other.dim))
    }

    pub fn div(self, other: Self) -> Result<Self> {
        if other.value == 0.0 {
            return Err(Error::NonFinite {
                context: format!("division of {} by zero", self.dim),
            });
        }
        Self::new(self.value / other.value, self.dim.div(other.dim))
    }

    pub fn powi(self, n: i8) -> Result<Self> {
        Self::new(self.value.powi(n as i32), self.dim.pow(n))
    }

    pub fn scale(self, factor: f64) -> Result<Self> {
        Self::new(self.value * factor, self.dim)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {}", self.value, self.dim)
    }
}

/// Energy in electronvolts.
pub fn convert_to_ev(energy: Quantity) -> Result<f64> {
    let joules = energy.value_in(Dimension::ENERGY)?;
    Ok(joules / crate::constants::ELECTRONVOLT_J)
}

/// A unit symbol accepted in scenario files, with its SI scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unit {
    pub symbol: &'static str,
    pub dim: Dimension,
    pub to_si: f64,
}

pub const UNITS: &[Unit] = &[
    Unit {
        symbol: "kg",
        dim: Dimension::MASS,
        to_si: 1.0,
    },
    Unit {
        symbol: "m",
        dim: Dimension::LENGTH,
        to_si: 1.0,
    },
    Unit {
        symbol: "cm",
        dim: Dimension::LENGTH,
        to_si: 1e-2,
    },
    Unit {
        symbol: "mm",
        dim: Dimension::LENGTH,
        to_si: 1e-3,
    },
    Unit {
        symbol: "um",
        dim: Dimension::LENGTH,
        to_si: 1e-6,
    },
    Unit {
        symbol: "μm",
        dim: Dimension::LENGTH,
        to_si: 1e-6,
    },
    Unit {
        symbol: "nm",
        dim: Dimension::LENGTH,
        to_si: 1e-9,
    },
    Unit {
        symbol: "s",
        dim: Dimension::TIME,
        to_si: 1.0,
    },
    Unit {
        symbol: "C",
        dim: Dimension::CHARGE,
        to_si: 1.0,
    },
    Unit {
        symbol: "e",
        dim: Dimension::CHARGE,
        to_si: crate::constants::ELEMENTARY_CHARGE_C,
    },
    Unit {
        symbol: "J",
        dim: Dimension::ENERGY,
        to_si: 1.0,
    },
    Unit {
        symbol: "eV",
        dim: Dimension::ENERGY,
        to_si: crate::constants::ELECTRONVOLT_J,
    },
    Unit {
        symbol: "N",
        dim: Dimension::FORCE,
        to_si: 1.0,
    },
];

pub fn lookup_unit(symbol: &str) -> Option<&'static Unit> {
    UNITS.iter().find(|u| u.symbol == symbol)
}

/// Parses `"<number> <unit>"`, e.g. `"1e-23 kg"` or `"0.1e-6 m"`.
pub fn parse_quantity(text: &str) -> std::result::Result<Quantity, String> {
    let mut parts = text.split_whitespace();
    let number = parts.next().ok_or_else(|| "empty value".to_string())?;
    let value: f64 = number
        .parse()
        .map_err(|_| format!("`{number}` is not a number"))?;
    let symbol = parts
        .next()
        .ok_or_else(|| format!("missing unit in `{text}`"))?;
    if let Some(extra) = parts.next() {
        return Err(format!("unexpected trailing `{extra}` in `{text}`"));
    }
    let unit = lookup_unit(symbol).ok_or_else(|| {
        let known: Vec<_> = UNITS.iter().map(|u| u.symbol).collect();
        format!("unknown unit `{symbol}` (known: {})", known.join(", "))
    })?;
    Quantity::new(value * unit.to_si, unit.dim).map_err(|e| e.to_string())
}
