//! Certified evaluation of the spectral series that feed both distance routes.
//!
//! Two families are summed here:
//!
//! * the out-of-window sums
//!   `S_ij = Σ_{|s|>n} P²(λ_s) |c_s|² / ((λ_s - λ_i)(λ_s - λ_j))`, and
//! * the moment series `m_p = Σ_s λ_s^p |c_s|²` that fill the Gram matrix.
//!
//! Summation walks outward in `±s` pairs. Once the envelope of the
//! coefficients certifies it, a closed-form bound on everything not yet
//! added is computed, and the sweep stops when that bound falls below the
//! relative tolerance. The bound reported with a result never grows as more
//! terms are added.

use rug::ops::Pow;
use rug::Float;

use crate::coefficients::{CoefficientSequence, DecayEnvelope, EnvelopeShape};
use crate::error::{Error, Result};
use crate::logsigned::LogSigned;
use crate::nodal::NodalContext;
use crate::precision::{BigReal, PrecisionConfig};
use crate::spectrum::{GrowthHint, Spectrum};

/// Hard cap on outward summation levels.
pub const MAX_LEVELS: usize = 200_000;

/// A certified partial sum.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSumResult {
    pub value: BigReal,
    /// Bound on `|true sum - value|` from the terms not added.
    pub truncation_bound: BigReal,
    /// Number of indices `s` whose terms were added.
    pub terms_used: usize,
    /// The coefficient or spectrum table ended and the series was taken to
    /// be zero beyond it.
    pub tail_assumed_zero: bool,
}

impl TailSumResult {
    pub fn value_logsigned(&self) -> LogSigned {
        LogSigned::from_real(&self.value)
    }
}

/// Majorant `U(s) = (slope·s + shift)^power · c_env(s)² / (slope·(s - n))^dist_power`
/// for one side of the series, with closed-form sums of its tail.
#[derive(Debug, Clone)]
struct RemainderModel {
    growth: GrowthHint,
    shift: f64,
    power: u32,
    dist_power: u32,
    n: i64,
    envelope: DecayEnvelope,
}

impl RemainderModel {
    fn check_convergent(&self) -> Result<()> {
        match self.envelope.shape {
            EnvelopeShape::FiniteSupport { .. } | EnvelopeShape::Factorial { .. } => Ok(()),
            EnvelopeShape::Geometric { ratio, .. } => {
                if ratio.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(Error::DivergentTail {
                        reason: format!("geometric envelope ratio {ratio} is not below 1"),
                    })
                }
            }
            EnvelopeShape::PowerLaw { exponent, .. } => {
                let gamma = self.power as f64 - self.dist_power as f64 - 2.0 * exponent;
                if gamma < -1.0 {
                    Ok(())
                } else {
                    Err(Error::DivergentTail {
                        reason: format!(
                            "envelope |j|^-{exponent} does not beat polynomial weight of degree {}",
                            self.power as i64 - self.dist_power as i64
                        ),
                    })
                }
            }
        }
    }

    fn majorant(&self, s: i64, prec: u32) -> BigReal {
        let slope = Float::with_val(prec, self.growth.slope);
        let mut num = Float::with_val(prec, &slope * s) + self.shift;
        num = num.pow(self.power);
        let env = self.envelope.bound(s, prec);
        let mut u = num * env.square();
        if self.dist_power > 0 {
            let dist = Float::with_val(prec, &slope * (s - self.n));
            u /= dist.pow(self.dist_power);
        }
        u
    }

    /// Bound on the sum over both sides of `U(s)` for `|s| > level`, or `None`
    /// while the envelope cannot yet certify it.
    fn bound_beyond(&self, level: i64, prec: u32) -> Option<BigReal> {
        let first = level + 1;
        if first < self.envelope.valid_from as i64 || first <= self.n {
            return None;
        }
        let slope = self.growth.slope;
        let mut bound = match self.envelope.shape {
            EnvelopeShape::FiniteSupport { radius } => {
                if level >= radius {
                    Float::new(prec)
                } else {
                    return None;
                }
            }
            EnvelopeShape::Geometric { .. } | EnvelopeShape::Factorial { .. } => {
                let env_ratio = self.envelope.ratio_sup(first as u64)?;
                let growth = 1.0 + slope / (slope * first as f64 + self.shift);
                let q = Float::with_val(prec, growth).pow(self.power) * (env_ratio * env_ratio);
                if q >= 1 {
                    return None;
                }
                let one_minus_q = Float::with_val(prec, 1) - q;
                self.majorant(first, prec) / one_minus_q * 2u32
            }
            EnvelopeShape::PowerLaw {
                amplitude,
                exponent,
            } => {
                let gamma = self.power as f64 - self.dist_power as f64 - 2.0 * exponent;
                if gamma >= -1.0 {
                    return None;
                }
                let s1 = first as f64;
                let mut k = Float::with_val(prec, slope + self.shift / s1).pow(self.power);
                k *= amplitude * amplitude;
                if self.dist_power > 0 {
                    let d = Float::with_val(prec, slope * (1.0 - self.n as f64 / s1));
                    k /= d.pow(self.dist_power);
                }
                let s1f = Float::with_val(prec, first);
                let head = Float::with_val(prec, (&s1f).pow(gamma));
                let tail = Float::with_val(prec, (&s1f).pow(gamma + 1.0)) / (-gamma - 1.0);
                k * (head + tail) * 2u32
            }
        };
        // rounding slack on the closed forms
        bound *= 1.0 + 1e-12;
        Some(bound)
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    value: BigReal,
    abs_sum: BigReal,
    bound: Option<BigReal>,
}

impl Accumulator {
    fn new(prec: u32) -> Self {
        Accumulator {
            value: Float::new(prec),
            abs_sum: Float::new(prec),
            bound: None,
        }
    }

    fn add(&mut self, term: &BigReal) {
        self.value += term;
        self.abs_sum += Float::with_val(self.abs_sum.prec(), term.abs_ref());
    }

    fn tighten(&mut self, candidate: BigReal) {
        match &self.bound {
            Some(b) if *b <= candidate => {}
            _ => self.bound = Some(candidate),
        }
    }

    fn certified(&self, tol: f64) -> bool {
        let Some(bound) = &self.bound else {
            return false;
        };
        if self.abs_sum.is_zero() {
            *bound <= tol
        } else {
            *bound <= Float::with_val(self.abs_sum.prec(), &self.abs_sum * tol)
        }
    }
}

/// Summation range shared by a family of series.
#[derive(Debug, Clone)]
struct SweepPlan {
    /// First level `|s|` added.
    start: i64,
    /// Last level that can carry a nonzero term, when finite.
    last: Option<i64>,
    tail_assumed_zero: bool,
}

fn plan(spectrum: &Spectrum, coeffs: &CoefficientSequence, start: i64) -> SweepPlan {
    let table = spectrum.table_radius();
    let support = coeffs.support_radius();
    let last = match (table, support) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    // a finite spectrum table ends the space; an explicit coefficient table
    // stands in for an unknown tail
    let spectrum_cuts = matches!((table, support), (Some(t), s) if s.map_or(true, |s| t < s));
    SweepPlan {
        start,
        last,
        tail_assumed_zero: coeffs.tail_assumed_zero() || spectrum_cuts,
    }
}

/// Runs an outward sweep; `add_level(s)` adds every term with `|s| = level`.
/// With `level_cap` set, stops after that many levels without error.
fn run_sweep<A, B>(
    plan: &SweepPlan,
    accs: &mut [Accumulator],
    tol: f64,
    level_cap: Option<usize>,
    mut add_level: A,
    bound_beyond: B,
) -> Result<usize>
where
    A: FnMut(i64, &mut [Accumulator]) -> Result<usize>,
    B: Fn(usize, i64) -> Option<BigReal>,
{
    let prec = accs.first().map_or(64, |a| a.value.prec());
    let mut terms = 0usize;
    let mut level = plan.start - 1;
    let mut levels = 0usize;
    loop {
        if let Some(last) = plan.last {
            if level >= last {
                for acc in accs.iter_mut() {
                    acc.bound = Some(Float::new(prec));
                }
                return Ok(terms);
            }
        }
        if level >= plan.start - 1 {
            for (q, acc) in accs.iter_mut().enumerate() {
                if let Some(b) = bound_beyond(q, level) {
                    acc.tighten(b);
                }
            }
            if accs.iter().all(|a| a.certified(tol)) {
                return Ok(terms);
            }
        }
        if level_cap.is_some_and(|cap| levels >= cap) {
            return Ok(terms);
        }
        if levels >= MAX_LEVELS {
            let worst = accs
                .iter()
                .filter_map(|a| a.bound.as_ref().map(|b| b.to_f64()))
                .fold(f64::INFINITY, f64::min);
            return Err(Error::ToleranceUnreachable { terms, bound: worst });
        }
        level += 1;
        levels += 1;
        terms += add_level(level, accs)?;
    }
}

fn finish(accs: Vec<Accumulator>, terms: usize, plan: &SweepPlan) -> Vec<TailSumResult> {
    accs.into_iter()
        .map(|a| {
            let prec = a.value.prec();
            TailSumResult {
                value: a.value,
                truncation_bound: a
                    .bound
                    .unwrap_or_else(|| Float::with_val(prec, rug::float::Special::Infinity)),
                terms_used: terms,
                tail_assumed_zero: plan.tail_assumed_zero,
            }
        })
        .collect()
}

fn infinite_range_model(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    shift_extra: f64,
    power: u32,
    dist_power: u32,
    n: i64,
) -> Result<Option<RemainderModel>> {
    let Some(growth) = spectrum.growth_hint() else {
        return Ok(None);
    };
    let model = RemainderModel {
        growth,
        shift: growth.offset + shift_extra,
        power,
        dist_power,
        n,
        envelope: *coeffs.envelope(),
    };
    model.check_convergent()?;
    Ok(Some(model))
}

/// Out-of-window sums `S_ij` for every requested node pair, computed in one
/// shared outward sweep.
pub fn tail_sums(
    ctx: &NodalContext,
    coeffs: &CoefficientSequence,
    pairs: &[(i64, i64)],
    cfg: &PrecisionConfig,
) -> Result<Vec<TailSumResult>> {
    tail_sums_capped(ctx, coeffs, pairs, cfg, None)
}

/// As [`tail_sums`], stopping after `levels` outward levels whether or not
/// the tolerance is met. The reported bound may be infinite when the
/// envelope cannot certify the remainder yet.
pub fn tail_sums_partial(
    ctx: &NodalContext,
    coeffs: &CoefficientSequence,
    pairs: &[(i64, i64)],
    levels: usize,
    cfg: &PrecisionConfig,
) -> Result<Vec<TailSumResult>> {
    tail_sums_capped(ctx, coeffs, pairs, cfg, Some(levels))
}

fn tail_sums_capped(
    ctx: &NodalContext,
    coeffs: &CoefficientSequence,
    pairs: &[(i64, i64)],
    cfg: &PrecisionConfig,
    level_cap: Option<usize>,
) -> Result<Vec<TailSumResult>> {
    let window = ctx.window();
    let positions = pairs
        .iter()
        .map(|&(i, j)| Ok((window.position(i)?, window.position(j)?)))
        .collect::<Result<Vec<_>>>()?;
    let prec = cfg.prec();
    let n = ctx.n() as i64;
    let sweep = plan(ctx.spectrum(), coeffs, n + 1);
    let model = if sweep.last.is_some() {
        None
    } else {
        let lambda_max = ctx
            .nodes()
            .iter()
            .map(|x| x.to_f64().abs())
            .fold(0.0f64, f64::max);
        infinite_range_model(
            ctx.spectrum(),
            coeffs,
            lambda_max * (1.0 + 1e-12) + 1e-300,
            (4 * n + 2) as u32,
            2,
            n,
        )?
    };
    if sweep.last.is_none() && model.is_none() {
        return Err(Error::DivergentTail {
            reason: "spectrum has no growth bound and coefficients have no finite support".into(),
        });
    }
    let mut accs = vec![Accumulator::new(prec); pairs.len()];
    let spectrum = ctx.spectrum();
    let terms = run_sweep(
        &sweep,
        &mut accs,
        cfg.tail_rel_tol,
        level_cap,
        |level, accs| {
            let mut added = 0;
            for s in [level, -level] {
                if !spectrum.contains(s) {
                    continue;
                }
                added += 1;
                let c2 = coeffs.norm_sqr(s, prec);
                if c2.is_zero() {
                    continue;
                }
                let lambda = spectrum.eval(s, prec)?;
                let inv_gaps: Vec<BigReal> = ctx
                    .nodes()
                    .iter()
                    .map(|node| Float::with_val(prec, &lambda - node).recip())
                    .collect();
                let p = ctx.eval_p_real(&lambda);
                let w = p.square() * c2;
                for (acc, &(pi, pj)) in accs.iter_mut().zip(&positions) {
                    let mut term = Float::with_val(prec, &inv_gaps[pi] * &inv_gaps[pj]);
                    term *= &w;
                    acc.add(&term);
                }
            }
            Ok(added)
        },
        |_, level| model.as_ref().and_then(|m| m.bound_beyond(level, prec)),
    )?;
    Ok(finish(accs, terms, &sweep))
}

/// `S_ij = Σ_{|s|>n} P²(λ_s) |c_s|² / ((λ_s - λ_i)(λ_s - λ_j))`.
pub fn tail_sum_kij(
    ctx: &NodalContext,
    coeffs: &CoefficientSequence,
    i: i64,
    j: i64,
    cfg: &PrecisionConfig,
) -> Result<TailSumResult> {
    Ok(tail_sums(ctx, coeffs, &[(i, j)], cfg)?.remove(0))
}

/// Moments `m_p = Σ_{s∈ℤ} λ_s^p |c_s|²` for `p = 0..=max_power`, in one sweep.
pub fn gram_moments(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    max_power: u32,
    cfg: &PrecisionConfig,
) -> Result<Vec<TailSumResult>> {
    let prec = cfg.prec();
    let sweep = plan(spectrum, coeffs, 0);
    let models = if sweep.last.is_some() {
        None
    } else {
        let mut models = Vec::with_capacity(max_power as usize + 1);
        for p in 0..=max_power {
            match infinite_range_model(spectrum, coeffs, 0.0, p, 0, 0)? {
                Some(m) => models.push(m),
                None => {
                    return Err(Error::DivergentTail {
                        reason: "spectrum has no growth bound and coefficients have no finite support"
                            .into(),
                    })
                }
            }
        }
        Some(models)
    };
    let mut accs = vec![Accumulator::new(prec); max_power as usize + 1];
    let terms = run_sweep(
        &sweep,
        &mut accs,
        cfg.tail_rel_tol,
        None,
        |level, accs| {
            let mut added = 0;
            let sides: &[i64] = if level == 0 { &[0] } else { &[level, -level] };
            for &s in sides {
                if !spectrum.contains(s) {
                    continue;
                }
                added += 1;
                let c2 = coeffs.norm_sqr(s, prec);
                if c2.is_zero() {
                    continue;
                }
                let lambda = spectrum.eval(s, prec)?;
                let mut power = c2;
                for acc in accs.iter_mut() {
                    acc.add(&power);
                    power *= &lambda;
                }
            }
            Ok(added)
        },
        |p, level| models.as_ref().and_then(|m| m[p].bound_beyond(level, prec)),
    )?;
    Ok(finish(accs, terms, &sweep))
}

/// Single moment `Σ_s λ_s^p |c_s|²`, i.e. the Gram entry `(A^a f, A^b f)` with `p = a + b`.
pub fn gram_entry_series(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    p: u32,
    cfg: &PrecisionConfig,
) -> Result<TailSumResult> {
    Ok(gram_moments(spectrum, coeffs, p, cfg)?.pop().expect("at least one moment"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::PhaseRule;
    use crate::spectrum::Window;
    use rug::Rational;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    fn half_geometric() -> CoefficientSequence {
        CoefficientSequence::geometric(1.0, 0.5, PhaseRule::Zero)
    }

    /// Σ_{n<|s|≤cut} P²(s) 4^{-|s|} / ((s-i)(s-j)) over the integers, exactly.
    fn rational_tail(n: i64, i: i64, j: i64, cut: i64) -> Rational {
        let mut total = Rational::new();
        for m in n + 1..=cut {
            for s in [m, -m] {
                let p: rug::Integer = (-n..=n).map(|q| rug::Integer::from(s - q)).product();
                let w = Rational::from((p.clone() * p, rug::Integer::from(1) << (2 * m as u32)));
                total += w / Rational::from((s - i) * (s - j));
            }
        }
        total
    }

    fn rel_err(got: &BigReal, exact: &Rational) -> f64 {
        let e = Float::with_val(512, exact);
        (Float::with_val(512, got - &e).abs() / e.abs()).to_f64()
    }

    #[test]
    fn frozen_n1_values() {
        let ctx = NodalContext::new(&Spectrum::integer_line(), Window::new(1), &cfg()).unwrap();
        let c = half_geometric();
        // exact values 574/81 and 640/81 from the rational oracle below
        let s00 = tail_sum_kij(&ctx, &c, 0, 0, &cfg()).unwrap();
        assert!(rel_err(&s00.value, &Rational::from((574, 81))) < 1e-29);
        assert!(s00.truncation_bound <= Float::with_val(256, &s00.value * 1e-30));
        let s01 = tail_sum_kij(&ctx, &c, 0, 1, &cfg()).unwrap();
        assert!(rel_err(&s01.value, &Rational::from((640, 81))) < 1e-29);
        assert!(!s01.tail_assumed_zero);
        assert!(rational_tail(1, 0, 0, 300) < Rational::from((574, 81)));
        assert!(rel_err(&s00.value, &rational_tail(1, 0, 0, 300)) < 1e-29);
    }

    #[test]
    fn agrees_with_rational_oracle_up_to_n4() {
        for n in 1..=4i64 {
            let ctx = NodalContext::new(&Spectrum::integer_line(), Window::new(n as usize), &cfg()).unwrap();
            let pairs: Vec<(i64, i64)> = (-n..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect();
            let got = tail_sums(&ctx, &half_geometric(), &pairs, &cfg()).unwrap();
            for (&(i, j), r) in pairs.iter().zip(&got) {
                let exact = rational_tail(n, i, j, 400);
                assert!(rel_err(&r.value, &exact) < 1e-25, "n={n} ({i},{j})");
            }
        }
    }

    #[test]
    fn empty_tail_for_finite_support() {
        let ctx = NodalContext::new(&Spectrum::integer_line(), Window::new(2), &cfg()).unwrap();
        let c = CoefficientSequence::table_real(&[0.5, 1.0, 2.0, 1.0, 0.5]);
        let r = tail_sum_kij(&ctx, &c, 0, 0, &cfg()).unwrap();
        assert!(r.value.is_zero());
        assert!(r.truncation_bound.is_zero());
        assert_eq!(r.terms_used, 0);
        assert!(r.value_logsigned().is_zero());
    }

    #[test]
    fn hermitian_symmetry_and_positivity() {
        let ctx = NodalContext::new(&Spectrum::affine(0.7, -0.2).unwrap(), Window::new(3), &cfg()).unwrap();
        let c = CoefficientSequence::geometric(1.0, 0.4, PhaseRule::Seeded(3));
        for i in -3..=3 {
            for j in -3..=3 {
                let a = tail_sum_kij(&ctx, &c, i, j, &cfg()).unwrap();
                let b = tail_sum_kij(&ctx, &c, j, i, &cfg()).unwrap();
                assert_eq!(a.value, b.value);
                if i == j {
                    assert!(a.value >= 0);
                }
            }
        }
    }

    #[test]
    fn bound_is_monotone_in_terms() {
        let ctx = NodalContext::new(&Spectrum::integer_line(), Window::new(2), &cfg()).unwrap();
        let c = CoefficientSequence::geometric(1.0, 0.7, PhaseRule::Zero);
        let mut previous: Option<BigReal> = None;
        for levels in [1, 5, 10, 20, 40, 80, 160, 320] {
            let r = tail_sums_partial(&ctx, &c, &[(0, 1)], levels, &cfg()).unwrap().remove(0);
            if let Some(prev) = &previous {
                assert!(r.truncation_bound <= *prev, "levels = {levels}");
            }
            previous = Some(r.truncation_bound);
        }
        assert!(previous.unwrap().is_finite());
    }

    #[test]
    fn divergent_envelopes_are_rejected() {
        let ctx = NodalContext::new(&Spectrum::integer_line(), Window::new(1), &cfg()).unwrap();
        let flat = CoefficientSequence::geometric(1.0, 1.0, PhaseRule::Zero);
        assert!(matches!(
            tail_sum_kij(&ctx, &flat, 0, 0, &cfg()),
            Err(Error::DivergentTail { .. })
        ));
        let slow = CoefficientSequence::custom(
            "power law",
            DecayEnvelope::new(EnvelopeShape::PowerLaw { amplitude: 1.0, exponent: 2.0 }).valid_from(1),
            |j, prec| {
                let m = Float::with_val(prec, j.unsigned_abs().max(1));
                crate::complex::BigComplex::from_real(m.pow(-2i32))
            },
        );
        // n = 1: terms behave like s^6 · s^-4 / s^2
        assert!(matches!(
            tail_sum_kij(&ctx, &slow, 0, 0, &cfg()),
            Err(Error::DivergentTail { .. })
        ));
    }

    #[test]
    fn power_law_tail_certifies_when_fast_enough() {
        let ctx = NodalContext::new(&Spectrum::integer_line(), Window::new(0), &cfg()).unwrap();
        let c = CoefficientSequence::custom(
            "power law",
            DecayEnvelope::new(EnvelopeShape::PowerLaw { amplitude: 1.0, exponent: 4.0 }).valid_from(1),
            |j, prec| {
                let m = Float::with_val(prec, j.unsigned_abs().max(1));
                crate::complex::BigComplex::from_real(m.pow(-4i32))
            },
        );
        let mut loose = cfg();
        loose.tail_rel_tol = 1e-3;
        // n = 0: terms are s² · s^-8 / s² = s^-8, sum 2·ζ(8)
        let r = tail_sum_kij(&ctx, &c, 0, 0, &loose).unwrap();
        let zeta8 = std::f64::consts::PI.powi(8) / 9450.0;
        assert!((r.value.to_f64() - 2.0 * zeta8).abs() < 2e-3 * 2.0 * zeta8);
        assert!(r.truncation_bound.to_f64() <= 1e-3 * r.value.to_f64());
    }

    #[test]
    fn gram_series_examples() {
        let delta = CoefficientSequence::table_real(&[0.0, 1.0, 0.0]);
        let r = gram_entry_series(&Spectrum::integer_line(), &delta, 0, &cfg()).unwrap();
        assert_eq!(r.value, 1);

        let sym = half_geometric();
        let r = gram_entry_series(&Spectrum::integer_line(), &sym, 1, &cfg()).unwrap();
        assert!(r.value.is_zero());

        // 2 Σ s² 4^{-s} = 2·(20/27)
        let r = gram_entry_series(&Spectrum::integer_line(), &sym, 2, &cfg()).unwrap();
        assert!(rel_err(&r.value, &Rational::from((40, 27))) < 1e-29);
        let r = gram_entry_series(&Spectrum::integer_line(), &sym, 0, &cfg()).unwrap();
        assert!(rel_err(&r.value, &Rational::from((5, 3))) < 1e-29);
    }

    #[test]
    fn table_spectrum_cuts_the_sum() {
        let spectrum = Spectrum::table(vec![-3.0, -1.0, 0.0, 2.0, 5.0]).unwrap();
        let ctx = NodalContext::new(&spectrum, Window::new(1), &cfg()).unwrap();
        let r = tail_sum_kij(&ctx, &half_geometric(), 0, 0, &cfg()).unwrap();
        assert!(r.tail_assumed_zero);
        assert_eq!(r.terms_used, 2);
        // s = ±2: P(5) = 6·5·3 = 90, P(-3) = -2·(-3)·(-5) = -30
        let exact = Rational::from((90 * 90, 16 * 25)) + Rational::from((30 * 30, 16 * 9));
        assert!(rel_err(&r.value, &exact) < 1e-70);
    }
}
