//! Fourier coefficient sequences `c_j = (f, e_j)` with certified decay envelopes.

use std::fmt;
use std::sync::Arc;

use rug::ops::Pow;
use rug::Float;

use crate::complex::BigComplex;
use crate::precision::BigReal;

/// Phase assignment `θ_j` for synthetic coefficient families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseRule {
    Zero,
    Constant(f64),
    /// `θ_j = π·j`, i.e. alternating signs
    Alternating,
    /// Pseudo-random phases in `[0, 2π)` drawn deterministically from `(seed, j)`.
    Seeded(u64),
}

impl PhaseRule {
    /// Phase as a fraction of a full turn, or `None` for a zero phase.
    fn turns(&self, j: i64) -> Option<f64> {
        match *self {
            PhaseRule::Zero => None,
            PhaseRule::Constant(theta) => Some(theta / std::f64::consts::TAU),
            PhaseRule::Alternating => Some(if j.rem_euclid(2) == 0 { 0.0 } else { 0.5 }),
            PhaseRule::Seeded(seed) => {
                let h = splitmix64(seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                Some((h >> 11) as f64 / (1u64 << 53) as f64)
            }
        }
    }

    fn apply(&self, j: i64, modulus: BigReal) -> BigComplex {
        let prec = modulus.prec();
        match self.turns(j) {
            None => BigComplex::from_real(modulus),
            Some(t) if t == 0.0 => BigComplex::from_real(modulus),
            Some(t) if t == 0.5 => BigComplex::from_real(-modulus),
            Some(t) => {
                let theta = Float::with_val(prec, rug::float::Constant::Pi) * 2u32 * t;
                BigComplex::from_polar(&modulus, &theta)
            }
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Shape of a decay majorant `c_env(j) ≥ |c_j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeShape {
    /// `c_j = 0` for `|j| > radius`.
    FiniteSupport { radius: i64 },
    /// `amplitude · ratio^{|j|}`, `0 ≤ ratio`.
    Geometric { amplitude: f64, ratio: f64 },
    /// `scale · base^{|j|} / |j|!`
    Factorial { scale: f64, base: f64 },
    /// `amplitude · |j|^{-exponent}`
    PowerLaw { amplitude: f64, exponent: f64 },
}

/// A decay majorant together with the index from which it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub shape: EnvelopeShape,
    /// The bound holds for `|j| ≥ valid_from`.
    pub valid_from: u64,
}

impl DecayEnvelope {
    pub fn new(shape: EnvelopeShape) -> Self {
        DecayEnvelope {
            shape,
            valid_from: 0,
        }
    }

    pub fn valid_from(mut self, j0: u64) -> Self {
        self.valid_from = j0;
        self
    }

    /// `c_env(j)` at precision `prec`.
    pub fn bound(&self, j: i64, prec: u32) -> BigReal {
        let m = j.unsigned_abs();
        match self.shape {
            EnvelopeShape::FiniteSupport { radius } => {
                if j.abs() > radius {
                    Float::new(prec)
                } else {
                    Float::with_val(prec, rug::float::Special::Infinity)
                }
            }
            EnvelopeShape::Geometric { amplitude, ratio } => {
                Float::with_val(prec, ratio).pow(m) * amplitude
            }
            EnvelopeShape::Factorial { scale, base } => {
                let mut v = Float::with_val(prec, base).pow(m) * scale;
                v /= Float::with_val(prec, Float::factorial(m as u32));
                v
            }
            EnvelopeShape::PowerLaw {
                amplitude,
                exponent,
            } => {
                if m == 0 {
                    return Float::with_val(prec, rug::float::Special::Infinity);
                }
                Float::with_val(prec, m).pow(-exponent) * amplitude
            }
        }
    }

    /// Upper bound on `c_env(j+1) / c_env(j)` over all `j ≥ from`; `None`
    /// when no ratio below one exists (power laws).
    pub fn ratio_sup(&self, from: u64) -> Option<f64> {
        match self.shape {
            EnvelopeShape::FiniteSupport { .. } => Some(0.0),
            EnvelopeShape::Geometric { ratio, .. } => Some(ratio),
            EnvelopeShape::Factorial { base, .. } => Some(base.abs() / (from as f64 + 1.0)),
            EnvelopeShape::PowerLaw { .. } => None,
        }
    }

    /// Largest index carrying a possibly nonzero coefficient.
    pub fn support_radius(&self) -> Option<i64> {
        match self.shape {
            EnvelopeShape::FiniteSupport { radius } => Some(radius),
            _ => None,
        }
    }
}

type CoefficientFn = dyn Fn(i64, u32) -> BigComplex + Send + Sync;

/// How the coefficients are produced.
#[derive(Clone)]
pub enum CoefficientKind {
    /// Stored values for indices `-J..=J`; zero beyond.
    Table { values: Arc<[BigComplex]> },
    /// `amplitude · ratio^{|j|} · e^{iθ_j}`
    Geometric {
        amplitude: f64,
        ratio: f64,
        phase: PhaseRule,
    },
    /// Orthonormal-basis coefficients of `e^{a cos x}` on `L₂(-π, π)`.
    ExpCos { a: f64 },
    /// Coefficients obtained from samples on a uniform periodic grid; zero
    /// beyond the resolved band.
    Quadrature {
        values: Arc<[BigComplex]>,
        points: usize,
        aliasing_estimate: f64,
    },
    /// A constant multiple `α·c_j` of another sequence.
    Scaled {
        inner: Arc<CoefficientSequence>,
        factor: (f64, f64),
    },
    /// Caller-supplied evaluation with a caller-certified envelope.
    Custom { label: String, eval: Arc<CoefficientFn> },
}

impl fmt::Debug for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientKind::Table { values } => write!(f, "Table(J = {})", values.len() / 2),
            CoefficientKind::Geometric {
                amplitude,
                ratio,
                phase,
            } => write!(f, "Geometric({amplitude}, {ratio}, {phase:?})"),
            CoefficientKind::ExpCos { a } => write!(f, "ExpCos({a})"),
            CoefficientKind::Quadrature { values, points, .. } => {
                write!(f, "Quadrature(N = {points}, kmax = {})", values.len() / 2)
            }
            CoefficientKind::Scaled { inner, factor } => write!(f, "Scaled({factor:?}, {inner:?})"),
            CoefficientKind::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// A doubly-infinite coefficient sequence with its decay certificate.
#[derive(Debug, Clone)]
pub struct CoefficientSequence {
    kind: CoefficientKind,
    envelope: DecayEnvelope,
}

impl CoefficientSequence {
    /// Table over `-J..=J` from `2J+1` complex values.
    pub fn table(values: Vec<BigComplex>) -> Self {
        assert!(values.len() % 2 == 1, "coefficient table needs odd length");
        let radius = (values.len() / 2) as i64;
        CoefficientSequence {
            kind: CoefficientKind::Table {
                values: values.into(),
            },
            envelope: DecayEnvelope::new(EnvelopeShape::FiniteSupport { radius }),
        }
    }

    /// Table from `(re, im)` pairs.
    pub fn table_f64(values: &[(f64, f64)]) -> Self {
        CoefficientSequence::table(
            values
                .iter()
                .map(|&(re, im)| BigComplex::new(Float::with_val(53, re), Float::with_val(53, im)))
                .collect(),
        )
    }

    /// Table of real values.
    pub fn table_real(values: &[f64]) -> Self {
        let pairs: Vec<(f64, f64)> = values.iter().map(|&v| (v, 0.0)).collect();
        CoefficientSequence::table_f64(&pairs)
    }

    pub fn geometric(amplitude: f64, ratio: f64, phase: PhaseRule) -> Self {
        CoefficientSequence {
            kind: CoefficientKind::Geometric {
                amplitude,
                ratio,
                phase,
            },
            envelope: DecayEnvelope::new(EnvelopeShape::Geometric {
                amplitude: amplitude.abs(),
                ratio,
            }),
        }
    }

    /// `e^{a cos x}`; the envelope is `√(2π)|a/2|^k e^{a²/4}/k!`.
    pub fn exp_cos(a: f64) -> Self {
        let scale = (std::f64::consts::TAU).sqrt() * (a * a / 4.0).exp() * (1.0 + 1e-14);
        CoefficientSequence {
            kind: CoefficientKind::ExpCos { a },
            envelope: DecayEnvelope::new(EnvelopeShape::Factorial {
                scale,
                base: (a / 2.0).abs(),
            }),
        }
    }

    pub(crate) fn quadrature(values: Vec<BigComplex>, points: usize, aliasing_estimate: f64) -> Self {
        let radius = (values.len() / 2) as i64;
        CoefficientSequence {
            kind: CoefficientKind::Quadrature {
                values: values.into(),
                points,
                aliasing_estimate,
            },
            envelope: DecayEnvelope::new(EnvelopeShape::FiniteSupport { radius }),
        }
    }

    pub fn custom<F>(label: impl Into<String>, envelope: DecayEnvelope, eval: F) -> Self
    where
        F: Fn(i64, u32) -> BigComplex + Send + Sync + 'static,
    {
        CoefficientSequence {
            kind: CoefficientKind::Custom {
                label: label.into(),
                eval: Arc::new(eval),
            },
            envelope,
        }
    }

    /// `α · c_j` for the complex constant `α = re + i·im`.
    pub fn scaled(&self, re: f64, im: f64) -> Self {
        let modulus = re.hypot(im);
        let shape = match self.envelope.shape {
            EnvelopeShape::FiniteSupport { radius } => EnvelopeShape::FiniteSupport { radius },
            EnvelopeShape::Geometric { amplitude, ratio } => EnvelopeShape::Geometric {
                amplitude: amplitude * modulus * (1.0 + 1e-15),
                ratio,
            },
            EnvelopeShape::Factorial { scale, base } => EnvelopeShape::Factorial {
                scale: scale * modulus * (1.0 + 1e-15),
                base,
            },
            EnvelopeShape::PowerLaw {
                amplitude,
                exponent,
            } => EnvelopeShape::PowerLaw {
                amplitude: amplitude * modulus * (1.0 + 1e-15),
                exponent,
            },
        };
        CoefficientSequence {
            kind: CoefficientKind::Scaled {
                inner: Arc::new(self.clone()),
                factor: (re, im),
            },
            envelope: DecayEnvelope {
                shape,
                valid_from: self.envelope.valid_from,
            },
        }
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn envelope(&self) -> &DecayEnvelope {
        &self.envelope
    }

    /// Whether the sequence is a finite table standing in for a possibly
    /// infinite one (the tail beyond it is taken to be zero).
    pub fn tail_assumed_zero(&self) -> bool {
        match &self.kind {
            CoefficientKind::Table { .. } | CoefficientKind::Quadrature { .. } => true,
            CoefficientKind::Scaled { inner, .. } => inner.tail_assumed_zero(),
            _ => false,
        }
    }

    pub fn support_radius(&self) -> Option<i64> {
        self.envelope.support_radius()
    }

    /// `c_j` at precision `prec`. Deterministic: equal inputs give
    /// bit-identical outputs.
    pub fn eval(&self, j: i64, prec: u32) -> BigComplex {
        match &self.kind {
            CoefficientKind::Table { values } | CoefficientKind::Quadrature { values, .. } => {
                let radius = (values.len() / 2) as i64;
                if j.abs() > radius {
                    return BigComplex::zero(prec);
                }
                let v = &values[(j + radius) as usize];
                BigComplex::new(Float::with_val(prec, &v.re), Float::with_val(prec, &v.im))
            }
            CoefficientKind::Geometric {
                amplitude,
                ratio,
                phase,
            } => {
                let modulus = Float::with_val(prec, *ratio).pow(j.unsigned_abs()) * *amplitude;
                phase.apply(j, modulus)
            }
            CoefficientKind::ExpCos { a } => BigComplex::from_real(exp_cos_coefficient(*a, j, prec)),
            CoefficientKind::Scaled { inner, factor } => {
                let alpha = BigComplex::new(Float::with_val(prec, factor.0), Float::with_val(prec, factor.1));
                &inner.eval(j, prec) * &alpha
            }
            CoefficientKind::Custom { eval, .. } => eval(j, prec),
        }
    }

    /// `|c_j|²` at precision `prec`.
    pub fn norm_sqr(&self, j: i64, prec: u32) -> BigReal {
        self.eval(j, prec).norm_sqr()
    }

    /// Checks `|c_j| ≤ c_env(j)` for every sampled index `valid_from ≤ |j| ≤ radius`;
    /// returns the first violating index.
    pub fn check_envelope(&self, radius: i64, prec: u32) -> Option<i64> {
        let from = self.envelope.valid_from as i64;
        (-radius..=radius)
            .filter(|j| j.abs() >= from)
            .find(|&j| self.eval(j, prec).abs() > self.envelope.bound(j, prec))
    }
}

/// `√(2π) (a/2)^{|k|} Σ_m |a/2|^{2m} / (m!(m+|k|)!)`, summed until the terms
/// drop below the working precision.
pub(crate) fn exp_cos_coefficient(a: f64, k: i64, prec: u32) -> BigReal {
    let wide = prec + 32;
    let m_k = k.unsigned_abs();
    let half = Float::with_val(wide, a) / 2u32;
    let x = Float::with_val(wide, half.square_ref());
    // m = 0 term: 1/|k|!
    let mut term = Float::with_val(wide, 1) / Float::with_val(wide, Float::factorial(m_k as u32));
    let mut sum = term.clone();
    let mut m: u64 = 0;
    loop {
        m += 1;
        term *= &x;
        term /= m * (m + m_k);
        sum += &term;
        if term.is_zero() || Float::with_val(wide, &term / &sum) < Float::with_val(wide, 1) >> (prec + 8) {
            break;
        }
    }
    let sqrt_two_pi = (Float::with_val(wide, rug::float::Constant::Pi) * 2u32).sqrt();
    let out = half.pow(m_k) * sum * sqrt_two_pi;
    Float::with_val(prec, out)
}
