//! Minimal complex numbers over [`BigReal`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::Float;

use crate::precision::BigReal;

#[derive(Clone, PartialEq)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> Self {
        BigComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        BigComplex::new(Float::new(prec), Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        BigComplex::from_real(Float::with_val(prec, 1))
    }

    pub fn from_real(re: BigReal) -> Self {
        let prec = re.prec();
        BigComplex::new(re, Float::new(prec))
    }

    /// `modulus · e^{i·phase}`
    pub fn from_polar(modulus: &BigReal, phase: &BigReal) -> Self {
        let prec = modulus.prec();
        let (sin, cos) = Float::with_val(prec, phase).sin_cos(Float::new(prec));
        BigComplex::new(cos * modulus, sin * modulus)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), -self.im.clone())
    }

    /// |z|²
    pub fn norm_sqr(&self) -> BigReal {
        let prec = self.prec();
        let mut out = Float::with_val(prec, self.re.square_ref());
        out += Float::with_val(prec, self.im.square_ref());
        out
    }

    pub fn abs(&self) -> BigReal {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn scale(&self, factor: &BigReal) -> Self {
        let prec = self.prec();
        BigComplex::new(
            Float::with_val(prec, &self.re * factor),
            Float::with_val(prec, &self.im * factor),
        )
    }

    pub fn div_real(&self, divisor: &BigReal) -> Self {
        let prec = self.prec();
        BigComplex::new(
            Float::with_val(prec, &self.re / divisor),
            Float::with_val(prec, &self.im / divisor),
        )
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        self.conj().div_real(&n)
    }

    pub fn div(&self, other: &BigComplex) -> Self {
        let n = other.norm_sqr();
        (self * &other.conj()).div_real(&n)
    }

    /// `self += a · b`
    pub fn add_mul(&mut self, a: &BigComplex, b: &BigComplex) {
        let prod = a * b;
        self.re += &prod.re;
        self.im += &prod.im;
    }

    /// `self -= a · b`
    pub fn sub_mul(&mut self, a: &BigComplex, b: &BigComplex) {
        let prod = a * b;
        self.re -= &prod.re;
        self.im -= &prod.im;
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl Add<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        let prec = self.prec();
        BigComplex::new(
            Float::with_val(prec, &self.re + &rhs.re),
            Float::with_val(prec, &self.im + &rhs.im),
        )
    }
}

impl Sub<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        let prec = self.prec();
        BigComplex::new(
            Float::with_val(prec, &self.re - &rhs.re),
            Float::with_val(prec, &self.im - &rhs.im),
        )
    }
}

impl Mul<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        let prec = self.prec();
        // purely real operands stay exact in the imaginary part
        if self.im.is_zero() && rhs.im.is_zero() {
            return BigComplex::from_real(Float::with_val(prec, &self.re * &rhs.re));
        }
        let mut re = Float::with_val(prec, &self.re * &rhs.re);
        re -= Float::with_val(prec, &self.im * &rhs.im);
        let mut im = Float::with_val(prec, &self.re * &rhs.im);
        im += Float::with_val(prec, &self.im * &rhs.re);
        BigComplex::new(re, im)
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-self.re, -self.im)
    }
}
