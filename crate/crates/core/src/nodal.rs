//! The nodal polynomial `P_{2n+1}(λ) = Π_{i=-n}^{n} (λ - λ_i)` of a window and
//! its derivative at the nodes.

use rug::Float;

use crate::error::{Error, Result};
use crate::logsigned::{LogSigned, Sign, GUARD_BITS};
use crate::precision::{BigReal, PrecisionConfig};
use crate::spectrum::{Spectrum, Window};

/// Above this window parameter node derivatives on lattices go through
/// `ln Γ` instead of exact integer factorials.
const EXACT_FACTORIAL_MAX_N: usize = 20;

/// Nodes `λ_{-n} < … < λ_n` of a window, cached at working precision.
#[derive(Debug, Clone)]
pub struct NodalContext {
    spectrum: Spectrum,
    window: Window,
    nodes: Vec<BigReal>,
    prec: u32,
}

impl NodalContext {
    pub fn new(spectrum: &Spectrum, window: Window, cfg: &PrecisionConfig) -> Result<Self> {
        spectrum.check_range(window.radius())?;
        let prec = cfg.prec();
        let nodes = window
            .indices()
            .map(|i| spectrum.eval(i, prec))
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        Ok(NodalContext {
            spectrum: spectrum.clone(),
            window,
            nodes,
            prec,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn n(&self) -> usize {
        self.window.n()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn nodes(&self) -> &[BigReal] {
        &self.nodes
    }

    pub fn node(&self, i: i64) -> Result<&BigReal> {
        Ok(&self.nodes[self.window.position(i)?])
    }

    /// `P_{2n+1}(λ)` in log-signed form; logs accumulate in index order.
    pub fn eval_p(&self, lambda: &BigReal) -> LogSigned {
        let wide = self.prec + GUARD_BITS;
        let mut sign = Sign::Positive;
        let mut logmag = Float::new(wide);
        for node in &self.nodes {
            let diff = Float::with_val(wide, lambda - node);
            if diff.is_zero() {
                return LogSigned::zero(self.prec);
            }
            if diff.is_sign_negative() {
                sign = sign.flip();
            }
            logmag += diff.abs().ln();
        }
        LogSigned::from_parts(sign, logmag)
    }

    /// `P_{2n+1}(λ)` as a plain product at working precision.
    pub fn eval_p_real(&self, lambda: &BigReal) -> BigReal {
        let mut acc = Float::with_val(self.prec, 1);
        for node in &self.nodes {
            acc *= Float::with_val(self.prec, lambda - node);
        }
        acc
    }

    /// `Ṗ_{2n+1}(λ_i) = Π_{j≠i} (λ_i - λ_j)`, via the factorial closed form on
    /// integer lattices and the direct product otherwise.
    pub fn eval_pdot_at_node(&self, i: i64) -> Result<LogSigned> {
        match self.pdot_factorial(i)? {
            Some(v) => Ok(v),
            None => self.pdot_product(i),
        }
    }

    /// Direct product path for `Ṗ_{2n+1}(λ_i)`.
    pub fn pdot_product(&self, i: i64) -> Result<LogSigned> {
        let pos = self.window.position(i)?;
        let wide = self.prec + GUARD_BITS;
        let center = &self.nodes[pos];
        let mut sign = Sign::Positive;
        let mut logmag = Float::new(wide);
        for (q, node) in self.nodes.iter().enumerate() {
            if q == pos {
                continue;
            }
            let diff = Float::with_val(wide, center - node);
            if diff.is_sign_negative() {
                sign = sign.flip();
            }
            logmag += diff.abs().ln();
        }
        Ok(LogSigned::from_parts(sign, logmag))
    }

    /// Closed form `(-1)^{n-i} a^{2n} (n+i)! (n-i)!` for lattices `λ_j = a·j + b`;
    /// `None` for other spectra.
    pub fn pdot_factorial(&self, i: i64) -> Result<Option<LogSigned>> {
        self.window.position(i)?;
        let Some(step) = self.spectrum.lattice_step() else {
            return Ok(None);
        };
        let n = self.n() as i64;
        let wide = self.prec + GUARD_BITS;
        let mut logmag = ln_factorial((n + i) as u64, wide);
        logmag += ln_factorial((n - i) as u64, wide);
        if step != 1.0 {
            logmag += Float::with_val(wide, step).ln() * (2 * n) as u32;
        }
        let sign = if (n - i) % 2 == 0 {
            Sign::Positive
        } else {
            Sign::Negative
        };
        Ok(Some(LogSigned::from_parts(sign, logmag)))
    }

    /// Lagrange basis coefficient `P(μ) / (Ṗ(λ_i)(μ - λ_i))`, i.e. the value at
    /// `μ` of the interpolation polynomial that is 1 at `λ_i` and 0 at the
    /// other nodes.
    pub fn lagrange_weight(&self, i: i64, mu: &BigReal) -> Result<LogSigned> {
        let pos = self.window.position(i)?;
        if let Some(hit) = self.colliding_node(mu) {
            return Err(Error::NodeCollision { index: hit });
        }
        let p = self.eval_p(mu);
        let pdot = self.eval_pdot_at_node(i)?;
        let gap = LogSigned::from_real(&Float::with_val(self.prec, mu - &self.nodes[pos]));
        Ok(&p / &(&pdot * &gap))
    }

    /// Index of a node within `2^{-bits/2}·max(1, |λ_i|)` of `mu`.
    pub fn colliding_node(&self, mu: &BigReal) -> Option<i64> {
        let half = self.prec / 2;
        self.nodes.iter().enumerate().find_map(|(q, node)| {
            let scale = Float::with_val(self.prec, node.abs_ref()).max(&Float::with_val(self.prec, 1));
            let threshold = scale >> half;
            let diff = Float::with_val(self.prec, mu - node).abs();
            (diff <= threshold).then(|| self.window.index_at(q))
        })
    }
}

/// `ln(m!)`: exact integer factorial for small `m`, `ln Γ(m+1)` above.
pub fn ln_factorial(m: u64, prec: u32) -> BigReal {
    if m as usize <= 2 * EXACT_FACTORIAL_MAX_N {
        Float::with_val(prec, Float::factorial(m as u32)).ln()
    } else {
        Float::with_val(prec, m + 1).ln_gamma()
    }
}

/// Vandermonde product `Π_{i<j} (λ_j - λ_i)` in log-signed form.
pub fn vandermonde_det(nodes: &[BigReal]) -> LogSigned {
    let prec = nodes.iter().map(|x| x.prec()).max().unwrap_or(64);
    let wide = prec + GUARD_BITS;
    let mut sign = Sign::Positive;
    let mut logmag = Float::new(wide);
    for (a, lo) in nodes.iter().enumerate() {
        for hi in &nodes[a + 1..] {
            let diff = Float::with_val(wide, hi - lo);
            if diff.is_zero() {
                return LogSigned::zero(prec);
            }
            if diff.is_sign_negative() {
                sign = sign.flip();
            }
            logmag += diff.abs().ln();
        }
    }
    LogSigned::from_parts(sign, logmag)
}
