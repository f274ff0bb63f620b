//! JSON problem files: a spectrum, a coefficient sequence and precision
//! settings.
//!
//! ```json
//! {
//!   "spectrum": {"kind": "integer-line"},
//!   "coefficients": {"kind": "geometric", "ratio": 0.5, "phase": {"seeded": 7}},
//!   "precision": {"mantissa_bits": 256}
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSequence, PhaseRule};
use crate::derivative::{self, PeriodicFunctionSpec, PeriodicKind};
use crate::error::{Error, Result};
use crate::precision::PrecisionConfig;
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumSpec {
    IntegerLine {},
    Affine { a: f64, b: f64 },
    /// `values[m] = λ_{m-J}`
    Table { values: Vec<f64> },
}

/// A table entry: a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexEntry {
    fn parts(self) -> (f64, f64) {
        match self {
            ComplexEntry::Real(re) => (re, 0.0),
            ComplexEntry::Pair([re, im]) => (re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseSpec {
    #[default]
    Zero,
    Alternating,
    Constant(f64),
    Seeded(u64),
}

impl From<PhaseSpec> for PhaseRule {
    fn from(p: PhaseSpec) -> PhaseRule {
        match p {
            PhaseSpec::Zero => PhaseRule::Zero,
            PhaseSpec::Alternating => PhaseRule::Alternating,
            PhaseSpec::Constant(t) => PhaseRule::Constant(t),
            PhaseSpec::Seeded(s) => PhaseRule::Seeded(s),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// `amplitude · ratio^{|j|} · e^{iθ_j}`
    Geometric {
        #[serde(default = "one")]
        amplitude: f64,
        ratio: f64,
        #[serde(default)]
        phase: PhaseSpec,
    },
    ExpCos { a: f64 },
    /// `values[m] = c_{m-J}`; zero beyond the table.
    Table { values: Vec<ComplexEntry> },
    /// Samples of a periodic function on `x_m = -π + 2πm/N`.
    Quadrature {
        grid: Vec<f64>,
        #[serde(default)]
        kmax: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub spectrum: SpectrumSpec,
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub precision: PrecisionConfig,
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self> {
        let problem: Problem =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("problem file: {e}")))?;
        problem.precision.validate()?;
        problem.build_spectrum()?;
        if let CoefficientSpec::Table { values } = &problem.coefficients {
            if values.len() % 2 == 0 {
                return Err(Error::InvalidConfig(format!(
                    "coefficient table needs an odd length 2J+1, got {}",
                    values.len()
                )));
            }
        }
        Ok(problem)
    }

    pub fn build_spectrum(&self) -> Result<Spectrum> {
        match &self.spectrum {
            SpectrumSpec::IntegerLine {} => Ok(Spectrum::integer_line()),
            SpectrumSpec::Affine { a, b } => Spectrum::affine(*a, *b),
            SpectrumSpec::Table { values } => Spectrum::table(values.clone()),
        }
    }

    pub fn build_coefficients(&self) -> Result<CoefficientSequence> {
        self.build_coefficients_with(&self.precision)
    }

    pub fn build_coefficients_with(&self, cfg: &PrecisionConfig) -> Result<CoefficientSequence> {
        match &self.coefficients {
            CoefficientSpec::Geometric {
                amplitude,
                ratio,
                phase,
            } => {
                if !(amplitude.is_finite() && ratio.is_finite() && *ratio >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "geometric coefficients need finite amplitude and ratio ≥ 0, got {amplitude}, {ratio}"
                    )));
                }
                Ok(CoefficientSequence::geometric(*amplitude, *ratio, (*phase).into()))
            }
            CoefficientSpec::ExpCos { a } => derivative::expcos_coefficients(*a),
            CoefficientSpec::Table { values } => {
                let pairs: Vec<(f64, f64)> = values.iter().map(|v| v.parts()).collect();
                if pairs.iter().any(|(re, im)| !re.is_finite() || !im.is_finite()) {
                    return Err(Error::InvalidConfig("coefficient table has a non-finite entry".into()));
                }
                Ok(CoefficientSequence::table_f64(&pairs))
            }
            CoefficientSpec::Quadrature { grid, kmax } => {
                let spec = PeriodicFunctionSpec::new(PeriodicKind::SampledGrid { values: grid.clone() });
                let points = if grid.len().is_power_of_two() { grid.len() } else { grid.len().saturating_sub(1) };
                derivative::quadrature_coefficients(&spec, kmax.unwrap_or(points / 4), cfg)
            }
        }
    }
}
