//! The K-matrix of a window, the distance `ρ²(e_k, L_{2n+1}(f))` it yields,
//! and the upper bounds read off its diagonal and first off-diagonal moments.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSequence;
use crate::complex::BigComplex;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::nodal::NodalContext;
use crate::precision::{BigReal, PrecisionConfig};
use crate::spectrum::{Spectrum, Window};
use crate::tail;

/// Order-preserving reindexing onto the nonzero coefficients.
#[derive(Debug, Clone)]
pub struct Relabeling {
    pub spectrum: Spectrum,
    pub coeffs: CoefficientSequence,
    /// `map[s + J]` is the original index carried by new index `s`.
    pub map: Vec<i64>,
    pub identity: bool,
}

impl Relabeling {
    /// New index of original index `m`, if `c_m` survived.
    pub fn new_index(&self, m: i64) -> Option<i64> {
        let radius = (self.map.len() / 2) as i64;
        self.map.iter().position(|&x| x == m).map(|p| p as i64 - radius)
    }
}

/// Drops the vanishing coefficients among `|j| ≤ radius`.
///
/// When none vanish the spectrum and sequence are returned unchanged.
/// Otherwise both become finite tables centred on the middle survivor, so
/// an odd number of survivors is kept whole. With an even number one end is
/// dropped: the one farther from index 0.
pub fn relabel_support(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    radius: i64,
    prec: u32,
) -> Result<Relabeling> {
    let radius = spectrum.table_radius().map_or(radius, |r| r.min(radius));
    let nonzero: Vec<i64> = (-radius..=radius)
        .filter(|&j| !coeffs.eval(j, prec).is_zero())
        .collect();
    if nonzero.is_empty() {
        return Err(Error::EmptySupport);
    }
    if nonzero.len() as i64 == 2 * radius + 1 {
        return Ok(Relabeling {
            spectrum: spectrum.clone(),
            coeffs: coeffs.clone(),
            map: nonzero,
            identity: true,
        });
    }
    let mid = nonzero.len() / 2;
    let centre = if nonzero.len() % 2 == 1 || nonzero[mid - 1].abs() > nonzero[mid].abs() {
        mid
    } else {
        mid - 1
    };
    let half = centre.min(nonzero.len() - 1 - centre);
    let map = nonzero[centre - half..=centre + half].to_vec();
    let lambdas = map
        .iter()
        .map(|&m| spectrum.eval(m, 53).map(|v| v.to_f64()))
        .collect::<Result<Vec<_>>>()?;
    let values = map.iter().map(|&m| coeffs.eval(m, prec)).collect();
    Ok(Relabeling {
        spectrum: Spectrum::table(lambdas)?,
        coeffs: CoefficientSequence::table(values),
        map,
        identity: false,
    })
}

/// The Hermitian positive semidefinite matrix `K_{2n+1}`.
#[derive(Debug, Clone)]
pub struct KMatrix {
    pub n: usize,
    pub entries: Matrix,
    /// Largest relative truncation bound over the tail sums used.
    pub tail_rel_bound_max: f64,
    pub tail_terms: usize,
    pub tail_assumed_zero: bool,
}

impl KMatrix {
    pub fn window(&self) -> Window {
        Window::new(self.n)
    }

    /// `k_ij` with signed window indices.
    pub fn get(&self, i: i64, j: i64) -> Result<&BigComplex> {
        let w = self.window();
        Ok(&self.entries[(w.position(i)?, w.position(j)?)])
    }

    pub fn diagonal(&self, k: i64) -> Result<BigReal> {
        Ok(self.get(k, k)?.re.clone())
    }

    pub fn is_psd(&self) -> bool {
        linalg::is_psd(&self.entries, 1e-20)
    }
}

/// `k_ij = S_ij / (c_i conj(c_j) Ṗ(λ_i) Ṗ(λ_j))` over the window of `ctx`.
pub fn build_k(ctx: &NodalContext, coeffs: &CoefficientSequence, cfg: &PrecisionConfig) -> Result<KMatrix> {
    let prec = cfg.prec();
    let window = ctx.window();
    let dim = window.size();
    let c: Vec<BigComplex> = window.indices().map(|i| coeffs.eval(i, prec)).collect();
    if let Some(p) = c.iter().position(|z| z.is_zero()) {
        return Err(Error::ZeroCoefficientInWindow {
            index: window.index_at(p),
        });
    }
    let c2: Vec<BigReal> = c.iter().map(|z| z.norm_sqr()).collect();
    let pdot = window
        .indices()
        .map(|i| ctx.eval_pdot_at_node(i))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(i64, i64)> = window
        .indices()
        .flat_map(|i| window.indices().filter(move |&j| j >= i).map(move |j| (i, j)))
        .collect();
    let sums = tail::tail_sums(ctx, coeffs, &pairs, cfg)?;

    let mut entries = Matrix::zeros(dim, prec);
    let mut rel_max = 0.0f64;
    let mut terms = 0;
    let mut assumed_zero = false;
    for (&(i, j), s) in pairs.iter().zip(&sums) {
        let (pi, pj) = (window.position(i)?, window.position(j)?);
        terms = terms.max(s.terms_used);
        assumed_zero |= s.tail_assumed_zero;
        let rel = if s.value.is_zero() {
            s.truncation_bound.to_f64()
        } else {
            (Float::with_val(prec, &s.truncation_bound / &s.value)).to_f64().abs()
        };
        rel_max = rel_max.max(rel);
        let denom = (&pdot[pi] * &pdot[pj]).to_real(prec);
        if pi == pj {
            let mut v = Float::with_val(prec, &s.value / &denom);
            v /= &c2[pi];
            entries[(pi, pi)] = BigComplex::from_real(v);
        } else {
            // 1/(c_i conj(c_j)) = conj(c_i) c_j / (|c_i|² |c_j|²)
            let mut scale = Float::with_val(prec, &s.value / &denom);
            scale /= Float::with_val(prec, &c2[pi] * &c2[pj]);
            let v = (&c[pi].conj() * &c[pj]).scale(&scale);
            entries[(pj, pi)] = v.conj();
            entries[(pi, pj)] = v;
        }
    }
    Ok(KMatrix {
        n: window.n(),
        entries,
        tail_rel_bound_max: rel_max,
        tail_terms: terms,
        tail_assumed_zero: assumed_zero,
    })
}

/// Index set used for the off-diagonal sums of the refined bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemarkRange {
    /// `i ∈ {-n, …, n} \ {k}`
    #[default]
    Symmetric,
    /// `i ∈ {1, …, n} \ {k}`
    Literal,
}

/// Refined bound together with a note when its denominator degenerated.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedBound {
    pub value: BigReal,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub k: i64,
    pub n: usize,
    /// `⟨(E+K)⁻¹ e_k, e_k⟩`
    pub q: BigReal,
    pub rho2: BigReal,
    pub bound_t2: BigReal,
    pub bound_refined: BigReal,
    pub refined_degenerate: bool,
    pub k_kk: BigReal,
    pub condition1_ok: bool,
    pub solve_residual: BigReal,
    pub tail_rel_bound: f64,
}

fn check_target(k: i64, n: usize) -> Result<()> {
    if k.unsigned_abs() as usize >= n {
        return Err(Error::TargetOutsideWindow { k, n });
    }
    Ok(())
}

/// `k_kk / (1 + k_kk)`.
pub fn theorem2_bound(kmat: &KMatrix, k: i64) -> Result<BigReal> {
    check_target(k, kmat.n)?;
    let kkk = kmat.diagonal(k)?;
    Ok(diagonal_bound(&kkk))
}

fn diagonal_bound(kkk: &BigReal) -> BigReal {
    let prec = kkk.prec();
    Float::with_val(prec, kkk / Float::with_val(prec, kkk + 1u32))
}

/// `k_kk/(1+k_kk) - g/(1+k_kk)²` with
/// `g = (Σ|k_ik|²)² / (Σ|k_ik|² + Σ_ij k_kj k_ji k_ik)`, clipped to
/// `[0, k_kk/(1+k_kk)]`.
pub fn refined_bound(kmat: &KMatrix, k: i64, range: RemarkRange) -> Result<RefinedBound> {
    check_target(k, kmat.n)?;
    let prec = kmat.entries.prec();
    let n = kmat.n as i64;
    let lower = match range {
        RemarkRange::Symmetric => -n,
        RemarkRange::Literal => 1,
    };
    let others: Vec<i64> = (lower..=n).filter(|&i| i != k).collect();
    let kkk = kmat.diagonal(k)?;
    let t2 = diagonal_bound(&kkk);

    let mut w = Float::new(prec);
    for &i in &others {
        w += kmat.get(i, k)?.norm_sqr();
    }
    let mut triple = BigComplex::zero(prec);
    for &i in &others {
        for &j in &others {
            let kj_ji = kmat.get(k, j)? * kmat.get(j, i)?;
            triple.add_mul(&kj_ji, kmat.get(i, k)?);
        }
    }
    let denom = Float::with_val(prec, &w + &triple.re);
    let num = Float::with_val(prec, w.square_ref());
    if denom.is_zero() || num.is_zero() {
        return Ok(RefinedBound {
            value: t2,
            degenerate: denom.is_zero() && !num.is_zero(),
        });
    }
    let one_plus = Float::with_val(prec, &kkk + 1u32);
    let g = num / denom;
    let mut value = Float::with_val(prec, &t2 - g / one_plus.square());
    if value < 0 {
        value = Float::new(prec);
    }
    if value > t2 {
        value = t2;
    }
    Ok(RefinedBound {
        value,
        degenerate: false,
    })
}

/// Solves `(E+K) x = e_k` and reports `ρ² = 1 - x_k` with both bounds.
pub fn criterion_value(kmat: &KMatrix, k: i64, cfg: &PrecisionConfig) -> Result<CriterionReport> {
    check_target(k, kmat.n)?;
    let prec = cfg.prec();
    let dim = kmat.entries.dim();
    let pos = kmat.window().position(k)?;
    let system = kmat.entries.add(&Matrix::identity(dim, prec));
    let e = linalg::unit_vector(dim, pos, prec);
    let sol = linalg::solve_hpd(&system, &e, cfg.solve_rel_tol)?;
    let q = sol.x[pos].re.clone();
    let rho2 = Float::with_val(prec, 1u32 - &q);
    let refined = refined_bound(kmat, k, RemarkRange::Symmetric)?;
    Ok(CriterionReport {
        k,
        n: kmat.n,
        q,
        rho2,
        bound_t2: theorem2_bound(kmat, k)?,
        bound_refined: refined.value,
        refined_degenerate: refined.degenerate,
        k_kk: kmat.diagonal(k)?,
        condition1_ok: true,
        solve_residual: sol.relative_residual,
        tail_rel_bound: kmat.tail_rel_bound_max,
    })
}

/// Builds the window context and K-matrix, then evaluates the criterion.
pub fn rho2_via_k(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    n: usize,
    k: i64,
    cfg: &PrecisionConfig,
) -> Result<CriterionReport> {
    check_target(k, n)?;
    let ctx = NodalContext::new(spectrum, Window::new(n), cfg)?;
    let kmat = build_k(&ctx, coeffs, cfg)?;
    criterion_value(&kmat, k, cfg)
}

/// `⟨M⁻¹e, e⟩ · ⟨Me, e⟩`, at least 1 for Hermitian positive definite `M`
/// and unit `e`.
pub fn kantorovich_check(m: &Matrix, e: &[BigComplex]) -> Result<BigReal> {
    let chol = linalg::Cholesky::new(m)?;
    let inv_e = chol.solve(e);
    let a = linalg::inner(&inv_e, e).re;
    Ok(a * m.quad_form(e))
}
