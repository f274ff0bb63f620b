//! Signed log-domain numbers.
//!
//! Products such as `P_{2n+1}(λ_s)` or `(n+k)!(n-k)!` leave the range of
//! 64-bit floats quickly. A [`LogSigned`] keeps the sign separately and the
//! natural log of the magnitude as a [`BigReal`] carrying [`GUARD_BITS`] extra
//! bits, so converting back to the working precision loses nothing visible.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use rug::Float;

use crate::precision::{neg_infinity, BigReal};

/// Extra mantissa bits carried by the log-magnitude.
pub const GUARD_BITS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn from_i32(s: i32) -> Sign {
        match s.cmp(&0) {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn flip(self) -> Sign {
        Sign::from_i32(-self.as_i32())
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_i32(self.as_i32() * rhs.as_i32())
    }
}

/// `sign · e^{logmag}`, with `sign = Zero` iff `logmag = -∞`.
#[derive(Clone, PartialEq)]
pub struct LogSigned {
    sign: Sign,
    logmag: BigReal,
}

impl fmt::Debug for LogSigned {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogSigned({:?}, {})", self.sign, self.logmag.to_f64())
    }
}

impl LogSigned {
    /// Zero at working precision `prec`.
    pub fn zero(prec: u32) -> Self {
        LogSigned {
            sign: Sign::Zero,
            logmag: neg_infinity(prec + GUARD_BITS),
        }
    }

    pub fn one(prec: u32) -> Self {
        LogSigned {
            sign: Sign::Positive,
            logmag: Float::new(prec + GUARD_BITS),
        }
    }

    /// Builds a value from its parts. A zero sign or a `-∞` log-magnitude
    /// both yield the canonical zero.
    pub fn from_parts(sign: Sign, logmag: BigReal) -> Self {
        let prec = logmag.prec().max(GUARD_BITS + 1);
        if sign == Sign::Zero || (logmag.is_infinite() && logmag.is_sign_negative()) {
            return LogSigned::zero(prec.saturating_sub(GUARD_BITS).max(1));
        }
        LogSigned { sign, logmag }
    }

    /// Converts a real; `prec` is the working precision of the value.
    pub fn from_real(x: &BigReal) -> Self {
        let prec = x.prec();
        if x.is_zero() {
            return LogSigned::zero(prec);
        }
        let sign = if x.is_sign_negative() {
            Sign::Negative
        } else {
            Sign::Positive
        };
        let logmag = Float::with_val(prec + GUARD_BITS, x.abs_ref()).ln();
        LogSigned { sign, logmag }
    }

    pub fn from_i64(x: i64, prec: u32) -> Self {
        LogSigned::from_real(&Float::with_val(prec, x))
    }

    /// Back to a plain real at precision `prec`.
    pub fn to_real(&self, prec: u32) -> BigReal {
        match self.sign {
            Sign::Zero => Float::new(prec),
            s => {
                let mag = Float::with_val(prec + GUARD_BITS, self.logmag.exp_ref());
                let v = Float::with_val(prec, mag);
                if s == Sign::Negative {
                    -v
                } else {
                    v
                }
            }
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn logmag(&self) -> &BigReal {
        &self.logmag
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Working precision (log-magnitude precision minus the guard bits).
    pub fn prec(&self) -> u32 {
        self.logmag.prec().saturating_sub(GUARD_BITS).max(1)
    }

    pub fn abs(&self) -> Self {
        let sign = if self.sign == Sign::Zero {
            Sign::Zero
        } else {
            Sign::Positive
        };
        LogSigned {
            sign,
            logmag: self.logmag.clone(),
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero LogSigned");
        LogSigned {
            sign: self.sign,
            logmag: -self.logmag.clone(),
        }
    }

    pub fn powi(&self, exp: u32) -> Self {
        if exp == 0 {
            return LogSigned::one(self.prec());
        }
        if self.is_zero() {
            return self.clone();
        }
        let sign = if self.sign == Sign::Negative && exp % 2 == 1 {
            Sign::Negative
        } else {
            Sign::Positive
        };
        LogSigned {
            sign,
            logmag: self.logmag.clone() * exp,
        }
    }

    /// Signed log-sum-exp.
    ///
    /// The terms are scaled by the largest magnitude before exponentiation.
    /// A sum whose magnitude falls below `len · ε` of the absolute sum (ε the
    /// working precision) is reported as an exact zero.
    pub fn sum<'a, I>(terms: I) -> LogSigned
    where
        I: IntoIterator<Item = &'a LogSigned>,
    {
        let terms: Vec<&LogSigned> = terms.into_iter().collect();
        let prec = terms.iter().map(|t| t.prec()).max().unwrap_or(64);
        let nonzero: Vec<&LogSigned> = terms.iter().copied().filter(|t| !t.is_zero()).collect();
        if nonzero.is_empty() {
            return LogSigned::zero(prec);
        }
        let wide = prec + GUARD_BITS;
        let mut max = nonzero[0].logmag.clone();
        for t in &nonzero[1..] {
            if t.logmag > max {
                max = t.logmag.clone();
            }
        }
        let mut acc = Float::new(wide);
        let mut abs_acc = Float::new(wide);
        for t in &nonzero {
            let scaled = Float::with_val(wide, &t.logmag - &max).exp();
            abs_acc += &scaled;
            if t.sign == Sign::Negative {
                acc -= &scaled;
            } else {
                acc += &scaled;
            }
        }
        let threshold = (abs_acc >> prec) * (nonzero.len() as u32);
        if acc.is_zero() || Float::with_val(wide, acc.abs_ref()) <= threshold {
            return LogSigned::zero(prec);
        }
        let sign = if acc.is_sign_negative() {
            Sign::Negative
        } else {
            Sign::Positive
        };
        let logmag = acc.abs().ln() + max;
        LogSigned { sign, logmag }
    }
}

impl Mul<&LogSigned> for &LogSigned {
    type Output = LogSigned;
    fn mul(self, rhs: &LogSigned) -> LogSigned {
        let sign = self.sign * rhs.sign;
        if sign == Sign::Zero {
            return LogSigned::zero(self.prec().max(rhs.prec()));
        }
        let prec = self.logmag.prec().max(rhs.logmag.prec());
        LogSigned {
            sign,
            logmag: Float::with_val(prec, &self.logmag + &rhs.logmag),
        }
    }
}

impl Div<&LogSigned> for &LogSigned {
    type Output = LogSigned;
    fn div(self, rhs: &LogSigned) -> LogSigned {
        self * &rhs.recip()
    }
}

impl Neg for LogSigned {
    type Output = LogSigned;
    fn neg(self) -> LogSigned {
        LogSigned {
            sign: self.sign.flip(),
            logmag: self.logmag,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u32 = 256;

    fn ls(sign: i32, logmag: f64) -> LogSigned {
        LogSigned::from_parts(Sign::from_i32(sign), Float::with_val(P + GUARD_BITS, logmag))
    }

    fn ln(x: f64) -> BigReal {
        Float::with_val(P + GUARD_BITS, x).ln()
    }

    fn close(a: &BigReal, b: &BigReal, tol: f64) -> bool {
        Float::with_val(P + GUARD_BITS, a - b).abs() <= tol
    }

    #[test]
    fn mul_examples() {
        let two = LogSigned::from_parts(Sign::Positive, ln(2.0));
        let neg_three = LogSigned::from_parts(Sign::Negative, ln(3.0));
        let p = &two * &neg_three;
        assert_eq!(p.sign(), Sign::Negative);
        assert!(close(p.logmag(), &ln(6.0), 1e-80));

        let z = &LogSigned::zero(P) * &ls(1, 100.0);
        assert!(z.is_zero());
        assert!(z.logmag().is_infinite() && z.logmag().is_sign_negative());

        let big = &ls(1, 700.0) * &ls(1, 700.0);
        assert_eq!(big.sign(), Sign::Positive);
        assert_eq!(*big.logmag(), 1400.0);
        // e^1400 is far outside f64 but fine here
        assert!(big.to_real(P).to_f64().is_infinite());
        assert!(!big.to_real(P).is_infinite());
    }

    #[test]
    fn sum_examples() {
        let s = LogSigned::sum(&[ls(1, 0.0), ls(1, 0.0)]);
        assert_eq!(s.sign(), Sign::Positive);
        assert!(close(s.logmag(), &ln(2.0), 1e-80));

        let s = LogSigned::sum(&[ls(1, 0.0), ls(-1, 0.0)]);
        assert!(s.is_zero());

        let five = LogSigned::from_parts(Sign::Positive, ln(5.0));
        let neg_two = LogSigned::from_parts(Sign::Negative, ln(2.0));
        let s = LogSigned::sum(&[five, neg_two]);
        assert_eq!(s.sign(), Sign::Positive);
        assert!(close(s.logmag(), &ln(3.0), 1e-80));
    }

    #[test]
    fn cancellation_through_different_routes_is_zero() {
        let five = LogSigned::from_parts(Sign::Positive, ln(5.0));
        let also_five = LogSigned::from_parts(Sign::Negative, ln(2.0) + ln(2.5));
        assert!(LogSigned::sum(&[five, also_five]).is_zero());
    }

    #[test]
    fn zero_invariant() {
        let z = LogSigned::from_parts(Sign::Positive, neg_infinity(P + GUARD_BITS));
        assert!(z.is_zero());
        let z = LogSigned::from_parts(Sign::Zero, Float::with_val(P, 3));
        assert!(z.logmag().is_infinite());
        assert!(LogSigned::from_real(&Float::new(P)).is_zero());
        assert!(LogSigned::sum(std::iter::empty()).is_zero());
    }

    #[test]
    fn powi_and_recip() {
        let m = LogSigned::from_i64(-3, P);
        assert_eq!(m.powi(3).to_real(P), -27);
        assert_eq!(m.powi(2).to_real(P), 9);
        let r = m.recip().to_real(P);
        let exact = Float::with_val(P, -1) / 3u32;
        assert!(Float::with_val(P, &r - &exact).abs() < Float::with_val(P, 1e-75));
    }

    proptest! {
        #[test]
        fn roundtrip_keeps_sign_and_value(x in -1e30f64..1e30f64) {
            let v = Float::with_val(P, x);
            let back = LogSigned::from_real(&v).to_real(P);
            prop_assert_eq!(back.is_sign_negative(), v.is_sign_negative());
            prop_assert_eq!(back.is_zero(), v.is_zero());
            // reconversion is exact up to rounding of the last bit
            let diff = Float::with_val(P, &back - &v).abs();
            let ulp = Float::with_val(P, v.abs_ref()) >> (P - 1);
            prop_assert!(diff <= ulp);
        }

        #[test]
        fn product_matches_real_product(x in -1e12f64..1e12f64, y in -1e12f64..1e12f64) {
            let fx = Float::with_val(P, x);
            let fy = Float::with_val(P, y);
            let exact = Float::with_val(P, &fx * &fy);
            let via = (&LogSigned::from_real(&fx) * &LogSigned::from_real(&fy)).to_real(P);
            if exact.is_zero() {
                prop_assert!(via.is_zero());
            } else {
                let rel = Float::with_val(P, &via - &exact).abs() / exact.abs();
                prop_assert!(rel <= Float::with_val(P, 4) >> P);
            }
        }

        #[test]
        fn sum_is_permutation_invariant(
            mags in proptest::collection::vec(-50.0f64..50.0, 1..12),
            signs in proptest::collection::vec(prop_oneof![Just(-1i32), Just(1)], 12),
            seed in any::<u64>(),
        ) {
            let terms: Vec<LogSigned> = mags.iter().zip(&signs).map(|(m, s)| ls(*s, *m)).collect();
            let mut shuffled = terms.clone();
            // deterministic Fisher-Yates from the seed
            let mut state = seed | 1;
            for i in (1..shuffled.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let a = LogSigned::sum(&terms);
            let b = LogSigned::sum(&shuffled);
            prop_assert_eq!(a.sign(), b.sign());
            if !a.is_zero() {
                let va = a.to_real(P);
                let vb = b.to_real(P);
                let ulp = Float::with_val(P, va.abs_ref()) >> (P - 1);
                prop_assert!(Float::with_val(P, &va - &vb).abs() <= ulp * 2u32);
            }
        }
    }
}
