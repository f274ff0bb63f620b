//! The operator `i d/dx` on `L²(-π, π)`: eigenvalues `λ_k = k`, eigenvectors
//! `e_k = e^{-ikx}/√(2π)`.
//!
//! Coefficients are always stored as orthonormal inner products
//! `c_k = (f, e_k) = (2π)^{-1/2} ∫ f(x) e^{-ikx} dx`; the raw integrals used by
//! the decay hypothesis are `√(2π)·c_k`.

use rug::float::Constant;
use rug::Float;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSequence;
use crate::complex::BigComplex;
use crate::cyclicity;
use crate::error::{Error, Result};
use crate::gram;
use crate::nodal::NodalContext;
use crate::precision::{BigReal, PrecisionConfig};
use crate::spectrum::{Spectrum, Window};
use crate::tail;

/// `c₀`, the positive root of `c² = e^{1/c²}`, and `σ = (6c₀² + 2)/(3c₀³)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdConstants {
    pub c0: BigReal,
    pub sigma: BigReal,
    /// `|c₀² - e^{1/c₀²}| / c₀²`
    pub residual: BigReal,
}

impl ThresholdConstants {
    pub fn delta_threshold(&self) -> &BigReal {
        &self.sigma
    }
}

/// Newton iteration on `g(c) = 2 ln c - 1/c²`, which is increasing on `[1, 2]`
/// with `g(1) < 0 < g(2)`.
pub fn solve_c0(cfg: &PrecisionConfig) -> ThresholdConstants {
    let prec = cfg.prec() + 32;
    let tol = Float::with_val(prec, 1e-35).min(&(Float::with_val(prec, 1) >> (cfg.prec() - 8)));
    let g = |c: &Float| {
        let ln = Float::with_val(prec, c.ln_ref()) * 2u32;
        ln - Float::with_val(prec, c.square_ref()).recip()
    };
    let mut c = Float::with_val(prec, 1.5);
    for _ in 0..200 {
        let gc = g(&c);
        if Float::with_val(prec, gc.abs_ref()) <= tol {
            break;
        }
        // g'(c) = 2/c + 2/c³
        let c3 = Float::with_val(prec, c.square_ref()) * &c;
        let dg = Float::with_val(prec, 2u32 / &c) + Float::with_val(prec, 2u32 / c3);
        c -= gc / dg;
    }
    let c2 = Float::with_val(prec, c.square_ref());
    let rhs = Float::with_val(prec, c2.recip_ref()).exp();
    let residual = Float::with_val(prec, &c2 - rhs).abs() / &c2;
    let c3 = Float::with_val(prec, &c2 * &c);
    let sigma = (Float::with_val(prec, &c2 * 6u32) + 2u32) / (c3 * 3u32);
    let out = cfg.prec();
    ThresholdConstants {
        c0: Float::with_val(out, c),
        sigma: Float::with_val(out, sigma),
        residual: Float::with_val(out, residual),
    }
}

/// Coefficients of `e^{a cos x}`; `a` must be real, finite and nonzero.
pub fn expcos_coefficients(a: f64) -> Result<CoefficientSequence> {
    if !a.is_finite() || a == 0.0 {
        return Err(Error::InvalidConfig(format!("exp-cos needs a finite nonzero a, got {a}")));
    }
    Ok(CoefficientSequence::exp_cos(a))
}

/// A smooth bump `φ(x) = exp(-1/(1 - (x/r)²))` for `|x| < r`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpShape {
    pub radius: f64,
}

impl Default for BumpShape {
    fn default() -> Self {
        BumpShape {
            radius: 0.9 * std::f64::consts::PI,
        }
    }
}

impl BumpShape {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < std::f64::consts::PI) {
            return Err(Error::InvalidConfig(format!(
                "bump radius must lie in (0, π), got {radius}"
            )));
        }
        Ok(BumpShape { radius })
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let u = x / self.radius;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp()
        }
    }

    pub fn eval(&self, x: &BigReal) -> BigReal {
        let prec = x.prec();
        let u = Float::with_val(prec, x / self.radius);
        let one_minus = Float::with_val(prec, 1u32 - u.square());
        if one_minus <= 0 {
            return Float::new(prec);
        }
        (-one_minus.recip()).exp()
    }
}

/// Where a periodic function's samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PeriodicKind {
    ExpCos { a: f64 },
    Bump(BumpShape),
    /// Values on `x_m = -π + 2πm/N`, `m = 0 … N-1`, optionally followed by
    /// the endpoint value `f(π)`.
    SampledGrid { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunctionSpec {
    pub kind: PeriodicKind,
    /// Free-form smoothness label carried into reports.
    pub smoothness: Option<String>,
}

impl PeriodicFunctionSpec {
    pub fn new(kind: PeriodicKind) -> Self {
        PeriodicFunctionSpec {
            kind,
            smoothness: None,
        }
    }

    /// Periodic samples on `N` points.
    fn samples(&self, points: usize) -> Result<Vec<f64>> {
        let x = |m: usize| -std::f64::consts::PI + std::f64::consts::TAU * m as f64 / points as f64;
        match &self.kind {
            PeriodicKind::ExpCos { a } => Ok((0..points).map(|m| (a * x(m).cos()).exp()).collect()),
            PeriodicKind::Bump(shape) => Ok((0..points).map(|m| shape.eval_f64(x(m))).collect()),
            PeriodicKind::SampledGrid { values } => grid_samples(values),
        }
    }
}

fn grid_samples(values: &[f64]) -> Result<Vec<f64>> {
    let len = values.len();
    let (body, endpoint) = if len.is_power_of_two() {
        (values, None)
    } else if len > 1 && (len - 1).is_power_of_two() {
        (&values[..len - 1], values.last())
    } else {
        return Err(Error::InvalidConfig(format!(
            "sampled grid needs 2^m points (optionally plus the endpoint), got {len}"
        )));
    };
    if body.len() < 64 {
        return Err(Error::InvalidConfig(format!(
            "sampled grid needs at least 64 points, got {}",
            body.len()
        )));
    }
    if let Some(bad) = body.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(format!("grid value {bad} is not finite")));
    }
    if let Some(&end) = endpoint {
        let scale = body.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if (end - body[0]).abs() > 1e-10 * scale {
            return Err(Error::InvalidConfig(format!(
                "grid endpoints differ: f(-π) = {}, f(π) = {end}",
                body[0]
            )));
        }
    }
    Ok(body.to_vec())
}

/// Trapezoidal Fourier coefficients `c_k`, `|k| ≤ kmax`, from an `N`-point
/// periodic grid (`N` chosen as the next power of two ≥ `max(64, 4·kmax)` for
/// analytic kinds).
///
/// The aliasing estimate is the largest `|c_k|` over the top quarter of the
/// frequencies the grid resolves.
pub fn quadrature_coefficients(
    spec: &PeriodicFunctionSpec,
    kmax: usize,
    cfg: &PrecisionConfig,
) -> Result<CoefficientSequence> {
    let points = match &spec.kind {
        PeriodicKind::SampledGrid { values } => grid_samples(values)?.len(),
        _ => (4 * kmax).max(64).next_power_of_two(),
    };
    if kmax > points / 4 {
        return Err(Error::GridTooCoarse {
            requested: kmax,
            limit: points / 4,
            points,
        });
    }
    let samples = spec.samples(points)?;
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);
    let scale = std::f64::consts::TAU.sqrt() / points as f64;
    // x_m = -π + 2πm/N contributes e^{ikπ} = (-1)^k
    let coefficient = |k: i64| {
        let z = buf[k.rem_euclid(points as i64) as usize] * scale;
        if k.rem_euclid(2) == 1 {
            -z
        } else {
            z
        }
    };
    let prec = cfg.prec();
    let values = (-(kmax as i64)..=kmax as i64)
        .map(|k| {
            let z = coefficient(k);
            BigComplex::new(Float::with_val(prec, z.re), Float::with_val(prec, z.im))
        })
        .collect();
    let half = points as i64 / 2;
    let aliasing = (half / 2 + 1..=half)
        .flat_map(|k| [k, -k])
        .map(|k| coefficient(k).norm())
        .fold(0.0f64, f64::max);
    Ok(CoefficientSequence::quadrature(values, points, aliasing))
}

/// Outcome of checking `0 < |∫f e^{-ikx}dx| ≤ C e^{-δ|k|}` on `|k| ≤ kmax`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem3Report {
    pub kmax: usize,
    /// Smallest `C` with the fitted `δ`, for raw integrals.
    pub c_fit: f64,
    pub delta: f64,
    pub sigma: f64,
    pub all_nonzero: bool,
    pub satisfied: bool,
    pub verdict: String,
}

/// Fits the envelope rate `δ` from the last edge of the upper hull of
/// `(|k|, ln max(|c_k|, |c_{-k}|))` over `kmax/2 ≤ |k| ≤ kmax`, then the
/// minimal `C` over the whole sampled range.
///
/// The verdict only concerns the sampled range; it is not a proof of
/// cyclicity.
pub fn theorem3_check(coeffs: &CoefficientSequence, kmax: usize, cfg: &PrecisionConfig) -> Result<Theorem3Report> {
    if kmax < 2 {
        return Err(Error::InvalidConfig(format!("kmax must be at least 2, got {kmax}")));
    }
    let prec = cfg.prec();
    let sqrt_two_pi = (Float::with_val(prec, Constant::Pi) * 2u32).sqrt();
    let mut log_mag = Vec::with_capacity(kmax + 1);
    for m in 0..=kmax as i64 {
        let mut best: Option<BigReal> = None;
        for k in if m == 0 { vec![0] } else { vec![m, -m] } {
            let a = coeffs.eval(k, prec).abs();
            if a.is_zero() {
                return Err(Error::ZeroCoefficient { index: k });
            }
            if best.as_ref().map_or(true, |b| a > *b) {
                best = Some(a);
            }
        }
        let raw = best.expect("at least one index") * &sqrt_two_pi;
        log_mag.push(raw.ln().to_f64());
    }

    let from = kmax.div_ceil(2);
    let mut hull: Vec<usize> = Vec::new();
    for k in from..=kmax {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord a-k
            let cross = (b - a) as f64 * (log_mag[k] - log_mag[a]) - (k - a) as f64 * (log_mag[b] - log_mag[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
    let delta = -(log_mag[b] - log_mag[a]) / (b - a) as f64;
    let ln_c = log_mag
        .iter()
        .enumerate()
        .map(|(k, l)| l + delta * k as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let sigma = solve_c0(cfg).sigma.to_f64();
    let satisfied = delta > sigma;
    let verdict = if satisfied {
        "hypothesis satisfied on sampled range".to_string()
    } else {
        format!("hypothesis not satisfied (δ ≈ {delta:.3} ≤ σ)")
    };
    Ok(Theorem3Report {
        kmax,
        c_fit: ln_c.exp(),
        delta,
        sigma,
        all_nonzero: true,
        satisfied,
        verdict,
    })
}

/// `Ṗ(k)^{-2} Σ_{|s|>n} P²(s) |c_s|² / (s - k)²` on the integer line, which
/// equals `k_kk |c_k|²`.
pub fn theorem3_tail_quantity(k: i64, n: usize, coeffs: &CoefficientSequence, cfg: &PrecisionConfig) -> Result<BigReal> {
    if k.unsigned_abs() as usize >= n {
        return Err(Error::TargetOutsideWindow { k, n });
    }
    let ctx = NodalContext::new(&Spectrum::integer_line(), Window::new(n), cfg)?;
    let sum = tail::tail_sum_kij(&ctx, coeffs, k, k, cfg)?;
    let pdot = ctx.pdot_factorial(k)?.expect("integer line is a lattice");
    let denom = (&pdot * &pdot).to_real(cfg.prec());
    Ok(sum.value / denom)
}

/// `(ln P_{2n+1}(s), (2n+1) ln s - n³/(3s²))` on the integer line, `s > n`.
/// The first is strictly smaller.
pub fn nodal_growth_pair(n: u32, s: u32, prec: u32) -> (BigReal, BigReal) {
    assert!(s > n, "needs s > n");
    let mut ln_p = Float::new(prec);
    for i in -(n as i64)..=n as i64 {
        ln_p += Float::with_val(prec, s as i64 - i).ln();
    }
    let ln_s = Float::with_val(prec, s).ln();
    let n3 = Float::with_val(prec, n).square() * n;
    let bound = ln_s * (2 * n + 1) - n3 / (Float::with_val(prec, s).square() * 3u32);
    (ln_p, bound)
}

/// `4n ln s - 2n³/(3s²) - 2σ s`, the log of the bound maximized in the decay
/// argument.
pub fn maximizer_objective(n: f64, sigma: f64, s: f64) -> f64 {
    4.0 * n * s.ln() - 2.0 * n.powi(3) / (3.0 * s * s) - 2.0 * sigma * s
}

/// Maximizer of [`maximizer_objective`] over `s ∈ (0, 10n]`, by a grid scan
/// followed by golden-section refinement.
pub fn maximizer_scan(n: f64, sigma: f64) -> f64 {
    let f = |s: f64| maximizer_objective(n, sigma, s);
    let steps = 10_000;
    let hi = 10.0 * n;
    let h = hi / steps as f64;
    let best = (1..=steps)
        .map(|i| i as f64 * h)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("nonempty scan");
    let (mut a, mut b) = ((best - h).max(h * 1e-3), (best + h).min(hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (a + b) / 2.0
}

/// High-precision trapezoidal quadrature of a bump on the periodic grid
/// `x_m = 2πm/N`. Because the bump and all its derivatives vanish at the
/// grid ends, the rule converges faster than any power of `1/N` for every
/// frequency, integer or not.
#[derive(Debug, Clone)]
pub struct BumpQuadrature {
    shape: BumpShape,
    points: usize,
    /// `(x_m, φ(x_m))` for `x_m ≥ 0` inside the support.
    samples: Vec<(BigReal, BigReal)>,
    prec: u32,
}

impl BumpQuadrature {
    pub const DEFAULT_POINTS: usize = 1 << 14;

    pub fn new(shape: BumpShape, points: usize, prec: u32) -> Self {
        assert!(points.is_power_of_two() && points >= 64);
        let step = Float::with_val(prec, Constant::Pi) * 2u32 / points as u32;
        let samples = (0..points / 2)
            .map(|m| Float::with_val(prec, &step * m as u32))
            .map(|x| {
                let phi = shape.eval(&x);
                (x, phi)
            })
            .take_while(|(_, phi)| !phi.is_zero())
            .collect();
        BumpQuadrature {
            shape,
            points,
            samples,
            prec,
        }
    }

    pub fn shape(&self) -> BumpShape {
        self.shape
    }

    pub fn points(&self) -> usize {
        self.points
    }

    fn weight(&self) -> BigReal {
        Float::with_val(self.prec, Constant::Pi) * 2u32 / self.points as u32
    }

    /// `Φ(λ) = ∫ φ(x) cos(λx) dx` and `Φ'(λ)`.
    pub fn transform_with_derivative(&self, lambda: &BigReal) -> (BigReal, BigReal) {
        let prec = self.prec;
        let mut value = Float::new(prec);
        let mut deriv = Float::new(prec);
        for (m, (x, phi)) in self.samples.iter().enumerate() {
            let arg = Float::with_val(prec, lambda * x);
            let (sin, cos) = arg.sin_cos(Float::new(prec));
            let w = if m == 0 { 1u32 } else { 2u32 };
            value += Float::with_val(prec, phi * &cos) * w;
            deriv -= Float::with_val(prec, phi * x) * sin * w;
        }
        let h = self.weight();
        (value * &h, deriv * h)
    }

    pub fn transform(&self, lambda: &BigReal) -> BigReal {
        self.transform_with_derivative(lambda).0
    }

    /// `Φ(λ)` in double precision, for scanning.
    pub fn transform_f64(&self, lambda: f64) -> f64 {
        let h = std::f64::consts::TAU / self.points as f64;
        let mut sum = 0.0;
        for m in 0..self.points / 2 {
            let x = m as f64 * h;
            let w = if m == 0 { 1.0 } else { 2.0 };
            sum += w * self.shape.eval_f64(x) * (lambda * x).cos();
        }
        sum * h
    }

    /// Coefficients `c_k = Φ(k)/√(2π)` for `|k| ≤ kmax` as a finite table.
    pub fn coefficients(&self, kmax: usize) -> Result<CoefficientSequence> {
        if kmax > self.points / 4 {
            return Err(Error::GridTooCoarse {
                requested: kmax,
                limit: self.points / 4,
                points: self.points,
            });
        }
        let prec = self.prec;
        let n = self.points;
        let step = Float::with_val(prec, Constant::Pi) * 2u32 / n as u32;
        let cos_table: Vec<BigReal> = (0..n)
            .map(|j| Float::with_val(prec, &step * j as u32).cos())
            .collect();
        let sqrt_two_pi = (Float::with_val(prec, Constant::Pi) * 2u32).sqrt();
        let scale = Float::with_val(prec, &sqrt_two_pi / n as u32);
        let mut half = Vec::with_capacity(kmax + 1);
        for k in 0..=kmax {
            let mut sum = Float::new(prec);
            for (m, (_, phi)) in self.samples.iter().enumerate() {
                let term = Float::with_val(prec, phi * &cos_table[(k * m) % n]);
                if m == 0 {
                    sum += term;
                } else {
                    sum += term * 2u32;
                }
            }
            half.push(sum * &scale);
        }
        let values = (-(kmax as i64)..=kmax as i64)
            .map(|k| BigComplex::from_real(half[k.unsigned_abs() as usize].clone()))
            .collect();
        Ok(CoefficientSequence::table(values))
    }

    /// First sign change of `Φ` on `(0, upper]`, refined by Newton steps at
    /// working precision.
    pub fn find_zero(&self, upper: f64) -> Result<BigReal> {
        let step = 0.05;
        let mut a = step;
        let mut fa = self.transform_f64(a);
        let mut bracket = None;
        while a < upper {
            let b = (a + step).min(upper);
            let fb = self.transform_f64(b);
            if fa == 0.0 || fa.signum() != fb.signum() {
                bracket = Some((a, b));
                break;
            }
            a = b;
            fa = fb;
        }
        let (mut lo, mut hi) = bracket.ok_or(Error::NoZeroFound { upper })?;
        let flo = self.transform_f64(lo);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.transform_f64(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let prec = self.prec;
        let mut lambda = Float::with_val(prec, 0.5 * (lo + hi));
        let tiny = Float::with_val(prec, 1) >> (prec - 16);
        for _ in 0..40 {
            let (v, d) = self.transform_with_derivative(&lambda);
            if d.is_zero() {
                break;
            }
            let delta = v / d;
            lambda -= &delta;
            if Float::with_val(prec, delta.abs_ref()) <= tiny {
                break;
            }
        }
        Ok(lambda)
    }
}

/// Which route computes `ρ²` in the bump demonstration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoRoute {
    KMatrix,
    Gram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpReport {
    pub shape: BumpShape,
    pub kmax: usize,
    /// Real zero `λ₀` of the transform.
    pub zero: BigReal,
    pub transform_at_zero: BigReal,
    /// `sinc²(λ₀) = (sin πλ₀ / πλ₀)²`: the squared distance from `e_0` to
    /// the orthogonal complement of `e^{-iλ₀x}`, a lower bound for every
    /// `ρ²(e_0, L_{2n+1}(φ))` of the untruncated bump.
    pub witness_floor: BigReal,
    /// `(n, ρ²(e_0, L_{2n+1}(φ)))`
    pub rho2: Vec<(usize, BigReal)>,
}

impl BumpReport {
    pub fn min_rho2(&self) -> Option<&BigReal> {
        self.rho2.iter().map(|(_, r)| r).min_by(|a, b| a.total_cmp(b))
    }
}

/// Default truncation of the bump coefficient table; the dropped moments are
/// below `1e-30` relative for windows up to `n = 8`.
pub const BUMP_DEFAULT_KMAX: usize = 3000;

/// Locates a real zero of the bump's Fourier transform and tabulates
/// `ρ²(e_0, L_{2n+1}(φ))` for `n = 2 … nmax` from the truncated coefficient
/// table.
pub fn bump_noncyclicity_demo(
    shape: BumpShape,
    kmax: usize,
    nmax: usize,
    route: DemoRoute,
    cfg: &PrecisionConfig,
) -> Result<BumpReport> {
    let prec = cfg.prec();
    let quad = BumpQuadrature::new(shape, BumpQuadrature::DEFAULT_POINTS, prec);
    let zero = quad.find_zero(50.0)?;
    let transform_at_zero = quad.transform(&zero);
    let pi_l = Float::with_val(prec, Constant::Pi) * &zero;
    let witness_floor = (Float::with_val(prec, pi_l.sin_ref()) / &pi_l).square();

    let coeffs = quad.coefficients(kmax)?;
    let spectrum = Spectrum::integer_line();
    let mut rho2 = Vec::new();
    for n in 2..=nmax {
        let value = match route {
            DemoRoute::KMatrix => cyclicity::rho2_via_k(&spectrum, &coeffs, n, 0, cfg)?.rho2,
            DemoRoute::Gram => {
                let gs = gram::build_gram(&spectrum, &coeffs, n, cfg)?;
                gram::rho2_via_gram(&gs, 0, cfg)?.rho2
            }
        };
        rho2.push((n, value));
    }
    Ok(BumpReport {
        shape,
        kmax,
        zero,
        transform_at_zero,
        witness_floor,
        rho2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::PhaseRule;
    use crate::cyclicity::build_k;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    #[test]
    fn constants() {
        let t = solve_c0(&cfg());
        assert!((t.c0.to_f64() - 1.328).abs() < 5e-4);
        assert!((t.sigma.to_f64() - 1.79).abs() < 5e-3);
        assert!(t.residual < 1e-30);
        assert!(t.c0 > 1.3 && t.c0 < 1.4);
        assert!(*t.delta_threshold() > 1.7 && *t.delta_threshold() < 1.9);
    }

    #[test]
    fn expcos_examples() {
        assert!(expcos_coefficients(0.0).is_err());
        let c = expcos_coefficients(1.0).unwrap();
        // raw k = 0 integral: 2π Σ 4^-m / (m!)²
        let mut series = Float::with_val(256, 0);
        let mut term = Float::with_val(256, 1);
        for m in 1..60u32 {
            series += &term;
            term /= 4 * m * m;
        }
        let raw = Float::with_val(256, Constant::Pi) * 2u32 * series;
        let got = c.eval(0, 256).re * (Float::with_val(256, Constant::Pi) * 2u32).sqrt();
        assert!(Float::with_val(256, &got - &raw).abs() < 1e-60);
        // envelope at k = 5: 2π 2^-5 e^{1/4} / 5!
        let bound = std::f64::consts::TAU * 0.5f64.powi(5) * 0.25f64.exp() / 120.0;
        let raw5 = c.eval(5, 256).re.to_f64() * std::f64::consts::TAU.sqrt();
        assert!(raw5 > 0.0 && raw5 <= bound);
        for k in 1..30 {
            assert_eq!(c.eval(k, 256), c.eval(-k, 256));
            assert!(c.eval(k, 256).re > 0);
        }
    }

    #[test]
    fn quadrature_examples() {
        let constant = PeriodicFunctionSpec::new(PeriodicKind::SampledGrid { values: vec![1.0; 64] });
        let c = quadrature_coefficients(&constant, 16, &cfg()).unwrap();
        assert!((c.eval(0, 64).re.to_f64() - std::f64::consts::TAU.sqrt()).abs() < 1e-14);
        assert!(c.eval(3, 64).abs() < 1e-14);

        let cos: Vec<f64> = (0..128)
            .map(|m| (-std::f64::consts::PI + std::f64::consts::TAU * m as f64 / 128.0).cos())
            .collect();
        let c = quadrature_coefficients(&PeriodicFunctionSpec::new(PeriodicKind::SampledGrid { values: cos }), 32, &cfg()).unwrap();
        let half = std::f64::consts::TAU.sqrt() / 2.0;
        assert!((c.eval(1, 64).re.to_f64() - half).abs() < 1e-14);
        assert!((c.eval(-1, 64).re.to_f64() - half).abs() < 1e-14);
        assert!(c.eval(2, 64).abs() < 1e-14);

        let grid = PeriodicFunctionSpec::new(PeriodicKind::SampledGrid { values: vec![0.0; 64] });
        assert_eq!(
            quadrature_coefficients(&grid, 17, &cfg()).unwrap_err(),
            Error::GridTooCoarse { requested: 17, limit: 16, points: 64 }
        );
    }

    #[test]
    fn quadrature_matches_expcos_series() {
        let values: Vec<f64> = (0..1024)
            .map(|m| (-std::f64::consts::PI + std::f64::consts::TAU * m as f64 / 1024.0).cos().exp())
            .collect();
        let grid = quadrature_coefficients(&PeriodicFunctionSpec::new(PeriodicKind::SampledGrid { values }), 20, &cfg()).unwrap();
        let exact = expcos_coefficients(1.0).unwrap();
        for k in -20..=20 {
            let d = (&grid.eval(k, 256) - &exact.eval(k, 256)).abs();
            assert!(d < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn decay_fit_examples() {
        let expcos = expcos_coefficients(1.0).unwrap();
        let r = theorem3_check(&expcos, 20, &cfg()).unwrap();
        assert!(r.satisfied && r.delta > r.sigma, "{r:?}");

        let exp_decay: Vec<f64> = (-30i32..=30).map(|k| (-(k.abs() as f64)).exp()).collect();
        let r = theorem3_check(&CoefficientSequence::table_real(&exp_decay), 30, &cfg()).unwrap();
        assert!((r.delta - 1.0).abs() < 1e-9);
        assert!(!r.satisfied);
        assert!(r.verdict.starts_with("hypothesis not satisfied"));

        let mut holed = exp_decay.clone();
        holed[33] = 0.0;
        assert_eq!(
            theorem3_check(&CoefficientSequence::table_real(&holed), 30, &cfg()).unwrap_err(),
            Error::ZeroCoefficient { index: 3 }
        );
    }

    #[test]
    fn decay_fit_ignores_scale() {
        let c = expcos_coefficients(1.0).unwrap();
        let a = theorem3_check(&c, 16, &cfg()).unwrap();
        let b = theorem3_check(&c.scaled(0.0, 5.0), 16, &cfg()).unwrap();
        assert!((a.delta - b.delta).abs() < 1e-9);
        assert!((b.c_fit / a.c_fit - 5.0).abs() < 1e-9);
        assert_eq!(a.satisfied, b.satisfied);
    }

    #[test]
    fn tail_quantity_matches_k_diagonal() {
        let c = expcos_coefficients(1.0).unwrap();
        let ctx = NodalContext::new(&Spectrum::integer_line(), Window::new(4), &cfg()).unwrap();
        let k = build_k(&ctx, &c, &cfg()).unwrap();
        for target in -3..=3 {
            let q = theorem3_tail_quantity(target, 4, &c, &cfg()).unwrap();
            let via_k = k.diagonal(target).unwrap() * c.norm_sqr(target, 256);
            let rel = Float::with_val(256, &q - &via_k).abs() / &q;
            assert!(rel < 1e-20);
        }
        let finite = CoefficientSequence::table_real(&[1.0, 2.0, 1.0]);
        assert!(theorem3_tail_quantity(0, 2, &finite, &cfg()).unwrap().is_zero());
    }

    #[test]
    fn nodal_growth_inequality() {
        for n in [1u32, 5, 12] {
            for s in n + 1..=5 * n {
                let (lhs, rhs) = nodal_growth_pair(n, s, 128);
                assert!(lhs < rhs, "n={n} s={s}");
            }
        }
    }

    #[test]
    fn maximizer_near_c0_n() {
        let t = solve_c0(&cfg());
        let sigma = t.sigma.to_f64();
        for n in [10.0, 30.0] {
            let s = maximizer_scan(n, sigma);
            assert!((s / (t.c0.to_f64() * n) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn bump_transform_zero() {
        let quad = BumpQuadrature::new(BumpShape::default(), 1 << 12, 256);
        let zero = quad.find_zero(50.0).unwrap();
        assert!(zero > 0 && zero < 50);
        assert!(quad.transform(&zero).abs() < 1e-20);
        // Φ(0) is the bump's integral, positive
        assert!(quad.transform(&Float::with_val(256, 0)) > 0);
        let again = BumpQuadrature::new(BumpShape::default(), 1 << 13, 256).find_zero(50.0).unwrap();
        assert!(Float::with_val(256, &zero - &again).abs() < 1e-30);
    }

    #[test]
    fn geometric_phase_does_not_change_tail_quantity() {
        let a = CoefficientSequence::geometric(1.0, 0.3, PhaseRule::Zero);
        let b = CoefficientSequence::geometric(1.0, 0.3, PhaseRule::Seeded(5));
        let qa = theorem3_tail_quantity(1, 3, &a, &cfg()).unwrap();
        let qb = theorem3_tail_quantity(1, 3, &b, &cfg()).unwrap();
        assert!(Float::with_val(256, &qa - &qb).abs() / &qa < 1e-60);
    }
}
