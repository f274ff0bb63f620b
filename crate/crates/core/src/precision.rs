//! Working-precision configuration and small helpers around [`rug::Float`].

use rug::float::{Constant, Special};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Configurable-precision real used throughout the crate.
pub type BigReal = Float;

pub const DEFAULT_MANTISSA_BITS: u32 = 256;
pub const MIN_MANTISSA_BITS: u32 = 64;

/// Precision and tolerance settings shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrecisionConfig {
    pub mantissa_bits: u32,
    /// Relative tolerance for certified truncation of tail series.
    pub tail_rel_tol: f64,
    /// Relative residual tolerance for linear solves.
    pub solve_rel_tol: f64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            mantissa_bits: DEFAULT_MANTISSA_BITS,
            tail_rel_tol: 1e-30,
            solve_rel_tol: 1e-25,
        }
    }
}

impl PrecisionConfig {
    pub fn with_bits(mantissa_bits: u32) -> Result<Self> {
        let cfg = PrecisionConfig {
            mantissa_bits,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mantissa_bits < MIN_MANTISSA_BITS {
            return Err(Error::InvalidConfig(format!(
                "mantissa_bits must be at least {MIN_MANTISSA_BITS}, got {}",
                self.mantissa_bits
            )));
        }
        for (name, tol) in [
            ("tail_rel_tol", self.tail_rel_tol),
            ("solve_rel_tol", self.solve_rel_tol),
        ] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie strictly between 0 and 1, got {tol}"
                )));
            }
        }
        Ok(())
    }

    pub fn prec(&self) -> u32 {
        self.mantissa_bits
    }

    /// Unit roundoff 2^-mantissa_bits.
    pub fn epsilon(&self) -> Float {
        Float::with_val(self.mantissa_bits, 1) >> self.mantissa_bits
    }

    pub fn real<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.mantissa_bits, value)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.mantissa_bits)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.mantissa_bits, Constant::Pi)
    }
}

pub(crate) fn neg_infinity(prec: u32) -> Float {
    Float::with_val(prec, Special::NegInfinity)
}

/// Number of base-10 digits carried by `bits` binary digits.
pub fn decimal_digits(bits: u32) -> usize {
    (bits as f64 * std::f64::consts::LOG10_2).floor() as usize
}

/// Decimal string with `digits` significant digits, in scientific notation
/// (`"2.5e-1"` style). Zero prints as `"0"`.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = PrecisionConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.mantissa_bits, 256);
        assert_eq!(decimal_digits(256), 77);
    }

    #[test]
    fn decimal_strings() {
        let third = Float::with_val(256, 1) / 3u32;
        assert_eq!(to_decimal(&third, 25), "3.333333333333333333333333e-1");
        assert_eq!(to_decimal(&Float::with_val(256, -0.0), 25), "0");
        assert_eq!(to_decimal(&Float::with_val(64, 1.5), 3), "1.50");
    }

    #[test]
    fn rejects_small_mantissa_and_bad_tolerances() {
        assert!(PrecisionConfig::with_bits(53).is_err());
        let mut cfg = PrecisionConfig::default();
        cfg.tail_rel_tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg.tail_rel_tol = 1.0;
        assert!(cfg.validate().is_err());
        cfg.tail_rel_tol = 1e-10;
        cfg.solve_rel_tol = -1e-3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn epsilon_matches_mantissa() {
        let cfg = PrecisionConfig::with_bits(64).unwrap();
        let one = cfg.real(1);
        let bumped = Float::with_val(64, &one + cfg.epsilon() * 2u32);
        assert!(bumped > one);
    }
}
