//! Distance to the Krylov span through the moment (Gram) matrix
//! `A_ab = (A^a f, A^b f) = Σ_s λ_s^{a+b} |c_s|²`.
//!
//! This route shares no code with the K-matrix beyond the scalar series, so
//! it serves as the cross-check for [`crate::cyclicity`].

use rug::ops::Pow;
use rug::Float;

use crate::coefficients::CoefficientSequence;
use crate::complex::BigComplex;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::precision::{BigReal, PrecisionConfig};
use crate::spectrum::Spectrum;
use crate::tail::{self, TailSumResult};

pub use crate::nodal::vandermonde_det;

/// Moment matrix of `f, Af, …, A^{2n} f`.
#[derive(Debug, Clone)]
pub struct GramSystem {
    pub n: usize,
    pub a: Matrix,
    /// Certified moments `m_0 … m_{4n}`; `A_ab = m_{a+b}`.
    pub moments: Vec<TailSumResult>,
    spectrum: Spectrum,
    coeffs: CoefficientSequence,
}

impl GramSystem {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// `b_a = λ_k^a (f, e_k)`, `a = 0 … 2n`.
    pub fn b_vector(&self, k: i64, prec: u32) -> Result<Vec<BigComplex>> {
        let c = self.coeffs.eval(k, prec);
        if c.is_zero() {
            return Ok(vec![BigComplex::zero(prec); self.dim()]);
        }
        let lambda = self.spectrum.eval(k, prec)?;
        let mut power = Float::with_val(prec, 1);
        let mut out = Vec::with_capacity(self.dim());
        for _ in 0..self.dim() {
            out.push(c.scale(&power));
            power *= &lambda;
        }
        Ok(out)
    }

    /// Number of nonzero coefficients when the support is finite.
    fn support_count(&self, prec: u32) -> Option<usize> {
        let radius = match (self.coeffs.support_radius(), self.spectrum.table_radius()) {
            (Some(a), Some(b)) => a.min(b),
            (a, b) => a.or(b)?,
        };
        Some(
            (-radius..=radius)
                .filter(|&j| !self.coeffs.eval(j, prec).is_zero())
                .count(),
        )
    }
}

pub fn build_gram(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    n: usize,
    cfg: &PrecisionConfig,
) -> Result<GramSystem> {
    let moments = tail::gram_moments(spectrum, coeffs, 4 * n as u32, cfg)?;
    let dim = 2 * n + 1;
    let a = Matrix::from_fn(dim, |i, j| BigComplex::from_real(moments[i + j].value.clone()));
    Ok(GramSystem {
        n,
        a,
        moments,
        spectrum: spectrum.clone(),
        coeffs: coeffs.clone(),
    })
}

/// `ρ²` from the Gram route, clipped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramDistance {
    pub rho2: BigReal,
    /// Amount removed by clipping (zero when the raw value was in range).
    pub clipped_by: BigReal,
    pub solve_residual: BigReal,
}

fn clip_unit(raw: BigReal) -> (BigReal, BigReal) {
    let prec = raw.prec();
    if raw < 0 {
        let by = Float::with_val(prec, -&raw);
        (Float::new(prec), by)
    } else if raw > 1 {
        let by = Float::with_val(prec, &raw - 1u32);
        (Float::with_val(prec, 1), by)
    } else {
        (raw, Float::new(prec))
    }
}

fn singular(gs: &GramSystem) -> Error {
    Error::SingularGram {
        condition_estimate: linalg::condition_estimate(&gs.a),
    }
}

fn check_rank(gs: &GramSystem, prec: u32) -> Result<()> {
    match gs.support_count(prec) {
        Some(count) if count < gs.dim() => Err(Error::SingularGram {
            condition_estimate: f64::INFINITY,
        }),
        _ => Ok(()),
    }
}

/// `ρ² = 1 - ⟨A⁻¹ b, b⟩`.
pub fn rho2_via_gram(gs: &GramSystem, k: i64, cfg: &PrecisionConfig) -> Result<GramDistance> {
    let prec = cfg.prec();
    check_rank(gs, prec)?;
    let b = gs.b_vector(k, prec)?;
    let sol = match linalg::solve_hpd(&gs.a, &b, cfg.solve_rel_tol) {
        Ok(sol) => sol,
        Err(Error::NotPsd { .. }) | Err(Error::SolveFailed { .. }) => return Err(singular(gs)),
        Err(e) => return Err(e),
    };
    let proj = linalg::inner(&sol.x, &b).re;
    let (rho2, clipped_by) = clip_unit(Float::with_val(prec, 1u32 - &proj));
    Ok(GramDistance {
        rho2,
        clipped_by,
        solve_residual: sol.relative_residual,
    })
}

/// `ρ² = Γ(f, …, A^{2n}f, e_k) / Γ(f, …, A^{2n}f)` from the pivots of both
/// Gram matrices.
///
/// `e_k` is placed last in the bordered matrix so that the leading pivots are
/// shared and only the final one can vanish.
pub fn rho2_via_gram_determinant(gs: &GramSystem, k: i64, cfg: &PrecisionConfig) -> Result<BigReal> {
    let prec = cfg.prec();
    check_rank(gs, prec)?;
    let dim = gs.dim();
    let b = gs.b_vector(k, prec)?;
    let pivots_a = linalg::ldl_pivots(&gs.a).map_err(|_| singular(gs))?;
    let bordered = Matrix::from_fn(dim + 1, |i, j| match (i == dim, j == dim) {
        (true, true) => BigComplex::one(prec),
        (true, false) => b[j].clone(),
        (false, true) => b[i].conj(),
        (false, false) => gs.a[(i, j)].clone(),
    });
    let (leading, last) = linalg::ldl_pivots_last_free(&bordered).map_err(|_| singular(gs))?;
    let mut ratio = last;
    for (g, a) in leading.iter().zip(&pivots_a) {
        ratio *= Float::with_val(prec, g / a);
    }
    Ok(clip_unit(ratio).0)
}

/// Maximum entrywise deviation between `Σ_{|j|≤jmax} B_j B_j*` and the Gram
/// matrix of the sequence truncated to `|s| ≤ (2n+1)·jmax + n`, where
/// `(B_j)_{a,m} = λ_{(2n+1)j-n+m}^a c_{(2n+1)j-n+m}`.
pub fn verify_b_factorization(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    n: usize,
    jmax: usize,
    cfg: &PrecisionConfig,
) -> Result<BigReal> {
    let prec = cfg.prec();
    let size = 2 * n + 1;
    let radius = (size * jmax + n) as i64;
    spectrum.check_range(radius)?;
    let truncated = CoefficientSequence::table((-radius..=radius).map(|s| coeffs.eval(s, prec)).collect());
    let gram = build_gram(spectrum, &truncated, n, cfg)?;

    let mut sum = Matrix::zeros(size, prec);
    for j in -(jmax as i64)..=jmax as i64 {
        let block = Matrix::from_fn(size, |a, m| {
            let s = size as i64 * j - n as i64 + m as i64;
            let lambda = spectrum.eval(s, prec).expect("range checked");
            truncated.eval(s, prec).scale(&lambda.pow(a as u32))
        });
        sum = sum.add(&block.mul(&block.adjoint()));
    }
    let mut worst = Float::new(prec);
    for a in 0..size {
        for b in 0..size {
            let d = (&sum[(a, b)] - &gram.a[(a, b)]).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::PhaseRule;
    use crate::cyclicity;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    fn line() -> Spectrum {
        Spectrum::integer_line()
    }

    #[test]
    fn rank_one_examples() {
        let at0 = CoefficientSequence::table_real(&[0.0, 1.0, 0.0]);
        let gs = build_gram(&line(), &at0, 1, &cfg()).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a + b == 0 { 1 } else { 0 };
                assert_eq!(gs.a[(a, b)].re, want);
            }
        }
        let at1 = CoefficientSequence::table_real(&[0.0, 0.0, 0.0, 1.0, 0.0]);
        let gs = build_gram(&line(), &at1, 1, &cfg()).unwrap();
        assert!((0..9).all(|p| gs.a[(p / 3, p % 3)].re == 1));
        assert!(matches!(rho2_via_gram(&gs, 0, &cfg()), Err(Error::SingularGram { .. })));
    }

    #[test]
    fn first_entry_is_five_thirds() {
        let c = CoefficientSequence::geometric(1.0, 0.5, PhaseRule::Zero);
        let gs = build_gram(&line(), &c, 1, &cfg()).unwrap();
        let d = Float::with_val(256, &gs.a[(0, 0)].re - Float::with_val(256, 5) / 3u32);
        assert!(d.abs() < 1e-29);
    }

    #[test]
    fn projection_onto_single_vector() {
        let c = CoefficientSequence::table_real(&[0.0, 0.0, 1.0, 1.0, 0.0]);
        let gs = build_gram(&line(), &c, 0, &cfg()).unwrap();
        let r = rho2_via_gram(&gs, 0, &cfg()).unwrap();
        assert!(Float::with_val(256, &r.rho2 - 0.5f64).abs() < 1e-70);
        let d = rho2_via_gram_determinant(&gs, 0, &cfg()).unwrap();
        assert!(Float::with_val(256, &d - 0.5f64).abs() < 1e-70);
        // f = e_0
        let single = CoefficientSequence::table_real(&[1.0]);
        let gs = build_gram(&line(), &single, 0, &cfg()).unwrap();
        assert!(rho2_via_gram_determinant(&gs, 0, &cfg()).unwrap().is_zero());
        assert_eq!(rho2_via_gram_determinant(&gs, 2, &cfg()).unwrap(), 1);
    }

    #[test]
    fn exact_representability() {
        let c = CoefficientSequence::table_real(&[0.5, 1.5, -2.0, 1.0, 0.25]);
        let gs = build_gram(&line(), &c, 2, &cfg()).unwrap();
        for k in -2..=2 {
            let r = rho2_via_gram(&gs, k, &cfg()).unwrap();
            assert!(r.rho2 < 1e-25, "k = {k}: {}", r.rho2.to_f64());
        }
    }

    #[test]
    fn routes_agree_on_geometric_line() {
        let c = CoefficientSequence::geometric(1.0, 0.5, PhaseRule::Zero);
        let gs = build_gram(&line(), &c, 2, &cfg()).unwrap();
        let g = rho2_via_gram(&gs, 0, &cfg()).unwrap().rho2;
        let d = rho2_via_gram_determinant(&gs, 0, &cfg()).unwrap();
        let k = cyclicity::rho2_via_k(&line(), &c, 2, 0, &cfg()).unwrap().rho2;
        let scale = g.to_f64().max(1e-6);
        assert!(Float::with_val(256, &g - &d).abs().to_f64() <= 1e-12 * scale);
        assert!(Float::with_val(256, &g - &k).abs().to_f64() <= 1e-12 * scale);
    }

    #[test]
    fn phase_invariance() {
        let plain = CoefficientSequence::geometric(1.0, 0.4, PhaseRule::Zero);
        let phased = CoefficientSequence::geometric(1.0, 0.4, PhaseRule::Seeded(11));
        let a = rho2_via_gram(&build_gram(&line(), &plain, 2, &cfg()).unwrap(), 1, &cfg()).unwrap();
        let b = rho2_via_gram(&build_gram(&line(), &phased, 2, &cfg()).unwrap(), 1, &cfg()).unwrap();
        let ulp = Float::with_val(256, 1) >> 250u32;
        assert!(Float::with_val(256, &a.rho2 - &b.rho2).abs() <= ulp);
    }

    #[test]
    fn b_factorization() {
        let c = CoefficientSequence::geometric(1.0, 0.5, PhaseRule::Alternating);
        for n in 0..=2 {
            for jmax in 0..=2 {
                let dev = verify_b_factorization(&line(), &c, n, jmax, &cfg()).unwrap();
                assert!(dev < 1e-25, "n={n} jmax={jmax}");
            }
        }
        let holes = CoefficientSequence::table_real(&[1.0, 0.0, 2.0, 0.5, 0.0, 3.0, 1.0]);
        assert!(verify_b_factorization(&line(), &holes, 1, 1, &cfg()).unwrap() < 1e-70);
    }

    #[test]
    fn vandermonde_examples() {
        let nodes = |v: &[f64]| v.iter().map(|&x| Float::with_val(128, x)).collect::<Vec<_>>();
        assert_eq!(vandermonde_det(&nodes(&[0.0, 1.0])).to_real(128), 1);
        assert_eq!(vandermonde_det(&nodes(&[-1.0, 0.0, 1.0])).to_real(128), 2);
        let w = vandermonde_det(&nodes(&[1.0, 2.0, 4.0, 8.0])).to_real(128);
        assert!(Float::with_val(128, w - 1008u32).abs() < 1e-30);
    }
}
