//! Simple discrete spectra indexed by signed integers, and eigenvalue windows.

use std::sync::Arc;

use rug::Float;

use crate::error::{Error, Result};
use crate::precision::BigReal;

/// How the eigenvalues `λ_j` are generated.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    /// `λ_j = j`
    IntegerLine,
    /// `λ_j = a·j + b` with `a > 0`.
    AffineInteger { a: f64, b: f64 },
    /// Finite table of eigenvalues for indices `-J..=J`.
    ExplicitTable { values: Arc<[f64]> },
}

/// Linear growth bound `slope·|j| - offset ≤ |λ_j| ≤ slope·|j| + offset`, valid
/// for every index; the gap between two eigenvalues is at least `slope` per
/// index step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthHint {
    pub slope: f64,
    pub offset: f64,
}

/// A strictly increasing, doubly-indexed eigenvalue sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
}

impl Spectrum {
    pub fn integer_line() -> Self {
        Spectrum {
            kind: SpectrumKind::IntegerLine,
        }
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "affine spectrum needs finite a > 0 and finite b, got a = {a}, b = {b}"
            )));
        }
        Ok(Spectrum {
            kind: SpectrumKind::AffineInteger { a, b },
        })
    }

    /// `values[m]` is `λ_{m-J}`; the length must be odd (`2J+1`) and the
    /// values strictly increasing.
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "eigenvalue table needs an odd length 2J+1, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "eigenvalue table entry {bad} is not finite"
            )));
        }
        if let Some(pos) = values.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "eigenvalue table is not strictly increasing at position {pos}"
            )));
        }
        Ok(Spectrum {
            kind: SpectrumKind::ExplicitTable {
                values: values.into(),
            },
        })
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    /// `J` for tables, `None` for unbounded spectra.
    pub fn table_radius(&self) -> Option<i64> {
        match &self.kind {
            SpectrumKind::ExplicitTable { values } => Some((values.len() / 2) as i64),
            _ => None,
        }
    }

    pub fn contains(&self, j: i64) -> bool {
        self.table_radius().map_or(true, |r| j.abs() <= r)
    }

    pub fn check_range(&self, radius: i64) -> Result<()> {
        match self.table_radius() {
            Some(bound) if radius > bound => Err(Error::IndexOutOfTable {
                index: radius,
                bound,
            }),
            _ => Ok(()),
        }
    }

    pub fn growth_hint(&self) -> Option<GrowthHint> {
        match &self.kind {
            SpectrumKind::IntegerLine => Some(GrowthHint {
                slope: 1.0,
                offset: 0.0,
            }),
            SpectrumKind::AffineInteger { a, b } => Some(GrowthHint {
                slope: *a,
                offset: b.abs(),
            }),
            SpectrumKind::ExplicitTable { .. } => None,
        }
    }

    /// `λ_j` at precision `prec`.
    pub fn eval(&self, j: i64, prec: u32) -> Result<BigReal> {
        match &self.kind {
            SpectrumKind::IntegerLine => Ok(Float::with_val(prec, j)),
            SpectrumKind::AffineInteger { a, b } => {
                let mut v = Float::with_val(prec, *a) * j;
                v += *b;
                Ok(v)
            }
            SpectrumKind::ExplicitTable { values } => {
                let bound = (values.len() / 2) as i64;
                if j.abs() > bound {
                    return Err(Error::IndexOutOfTable { index: j, bound });
                }
                Ok(Float::with_val(prec, values[(j + bound) as usize]))
            }
        }
    }

    /// Whether the spectrum is an integer lattice `a·j + b` for which the
    /// node derivative has the closed factorial form.
    pub fn lattice_step(&self) -> Option<f64> {
        match &self.kind {
            SpectrumKind::IntegerLine => Some(1.0),
            SpectrumKind::AffineInteger { a, .. } => Some(*a),
            SpectrumKind::ExplicitTable { .. } => None,
        }
    }
}

/// The `2n+1` indices `-n..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    n: usize,
}

impl Window {
    pub fn new(n: usize) -> Self {
        Window { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        2 * self.n + 1
    }

    pub fn radius(&self) -> i64 {
        self.n as i64
    }

    pub fn contains(&self, i: i64) -> bool {
        i.unsigned_abs() as usize <= self.n
    }

    /// Position of index `i` in `0..2n+1`.
    pub fn position(&self, i: i64) -> Result<usize> {
        if !self.contains(i) {
            return Err(Error::IndexOutOfWindow { index: i, n: self.n });
        }
        Ok((i + self.n as i64) as usize)
    }

    pub fn index_at(&self, position: usize) -> i64 {
        position as i64 - self.n as i64
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + Clone {
        let n = self.n as i64;
        -n..=n
    }
}
