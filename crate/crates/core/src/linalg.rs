//! Dense Hermitian linear algebra over [`BigComplex`].

use std::ops::{Index, IndexMut};

use rug::Float;

use crate::complex::BigComplex;
use crate::error::{Error, Result};
use crate::precision::BigReal;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<BigComplex>,
}

impl Index<(usize, usize)> for Matrix {
    type Output = BigComplex;
    fn index(&self, (i, j): (usize, usize)) -> &BigComplex {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigComplex {
        &mut self.data[i * self.dim + j]
    }
}

impl Matrix {
    pub fn zeros(dim: usize, prec: u32) -> Self {
        Matrix {
            dim,
            data: vec![BigComplex::zero(prec); dim * dim],
        }
    }

    pub fn identity(dim: usize, prec: u32) -> Self {
        let mut m = Matrix::zeros(dim, prec);
        for i in 0..dim {
            m[(i, i)] = BigComplex::one(prec);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> BigComplex) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Matrix { dim, data }
    }

    pub fn from_real_diagonal(values: &[BigReal]) -> Self {
        let prec = values.first().map_or(64, |v| v.prec());
        let mut m = Matrix::zeros(values.len(), prec);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = BigComplex::from_real(v.clone());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prec(&self) -> u32 {
        self.data.first().map_or(64, |z| z.prec())
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> BigReal {
        let mut best = Float::new(self.prec());
        for z in &self.data {
            let a = z.abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[BigComplex]) -> Vec<BigComplex> {
        (0..self.dim)
            .map(|i| {
                let mut acc = BigComplex::zero(self.prec());
                for (j, xj) in x.iter().enumerate() {
                    acc.add_mul(&self[(i, j)], xj);
                }
                acc
            })
            .collect()
    }

    /// `⟨Mx, x⟩ = x* M x`, real for Hermitian `M`.
    pub fn quad_form(&self, x: &[BigComplex]) -> BigReal {
        inner(&self.mul_vec(x), x).re
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let dim = self.dim;
        Matrix::from_fn(dim, |i, j| {
            let mut acc = BigComplex::zero(self.prec());
            for m in 0..dim {
                acc.add_mul(&self[(i, m)], &other[(m, j)]);
            }
            acc
        })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }
}

/// `⟨x, y⟩ = Σ x_i conj(y_i)`.
pub fn inner(x: &[BigComplex], y: &[BigComplex]) -> BigComplex {
    let prec = x.first().map_or(64, |z| z.prec());
    let mut acc = BigComplex::zero(prec);
    for (a, b) in x.iter().zip(y) {
        acc.add_mul(a, &b.conj());
    }
    acc
}

pub fn norm_inf(x: &[BigComplex]) -> BigReal {
    let prec = x.first().map_or(64, |z| z.prec());
    let mut best = Float::new(prec);
    for z in x {
        let a = z.abs();
        if a > best {
            best = a;
        }
    }
    best
}

pub fn unit_vector(dim: usize, position: usize, prec: u32) -> Vec<BigComplex> {
    let mut e = vec![BigComplex::zero(prec); dim];
    e[position] = BigComplex::one(prec);
    e
}

/// `A = L L*` with `L` lower triangular and a positive real diagonal.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Self> {
        let dim = a.dim();
        let prec = a.prec();
        let mut l = Matrix::zeros(dim, prec);
        for j in 0..dim {
            let mut d = a[(j, j)].re.clone();
            for m in 0..j {
                d -= l[(j, m)].norm_sqr();
            }
            if d <= 0 || d.is_nan() {
                return Err(Error::NotPsd {
                    pivot: j,
                    value: d.to_f64(),
                });
            }
            let root = d.sqrt();
            for i in j + 1..dim {
                let mut v = a[(i, j)].clone();
                for m in 0..j {
                    v.sub_mul(&l[(i, m)], &l[(j, m)].conj());
                }
                l[(i, j)] = v.div_real(&root);
            }
            l[(j, j)] = BigComplex::from_real(root);
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn solve(&self, b: &[BigComplex]) -> Vec<BigComplex> {
        let dim = self.l.dim();
        let mut y: Vec<BigComplex> = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut v = b[i].clone();
            for (m, ym) in y.iter().enumerate() {
                v.sub_mul(&self.l[(i, m)], ym);
            }
            y.push(v.div_real(&self.l[(i, i)].re));
        }
        let mut x = y;
        for i in (0..dim).rev() {
            let mut v = x[i].clone();
            for m in i + 1..dim {
                v.sub_mul(&self.l[(m, i)].conj(), &x[m]);
            }
            x[i] = v.div_real(&self.l[(i, i)].re);
        }
        x
    }

    /// `ln det A = 2 Σ ln L_ii`.
    pub fn ln_det(&self) -> BigReal {
        let prec = self.l.prec();
        let mut acc = Float::new(prec);
        for i in 0..self.l.dim() {
            acc += Float::with_val(prec, self.l[(i, i)].re.ln_ref());
        }
        acc * 2u32
    }
}

/// Pivots `d` of `A = L D L*` with unit lower `L`; all must be positive.
pub fn ldl_pivots(a: &Matrix) -> Result<Vec<BigReal>> {
    ldl_impl(a, a.dim())
}

/// As [`ldl_pivots`] but the final pivot may be zero or (by rounding)
/// negative; returns the leading pivots and the final one.
pub fn ldl_pivots_last_free(a: &Matrix) -> Result<(Vec<BigReal>, BigReal)> {
    let mut d = ldl_impl(a, a.dim().saturating_sub(1))?;
    let last = d.pop().expect("nonempty matrix");
    Ok((d, last))
}

fn ldl_impl(a: &Matrix, checked: usize) -> Result<Vec<BigReal>> {
    let dim = a.dim();
    let prec = a.prec();
    let mut l = Matrix::identity(dim, prec);
    let mut d: Vec<BigReal> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut dj = a[(j, j)].re.clone();
        for m in 0..j {
            dj -= l[(j, m)].norm_sqr() * &d[m];
        }
        if j < checked && (dj <= 0 || dj.is_nan()) {
            return Err(Error::NotPsd {
                pivot: j,
                value: dj.to_f64(),
            });
        }
        for i in j + 1..dim {
            let mut v = a[(i, j)].clone();
            for m in 0..j {
                let lm = l[(j, m)].conj().scale(&d[m]);
                v.sub_mul(&l[(i, m)], &lm);
            }
            l[(i, j)] = v.div_real(&dj);
        }
        d.push(dj);
    }
    Ok(d)
}

/// Solution of a Hermitian positive definite system with its certificate.
#[derive(Debug, Clone)]
pub struct SpdSolution {
    pub x: Vec<BigComplex>,
    /// `‖b - A x‖∞ / ‖b‖∞` after refinement.
    pub relative_residual: BigReal,
}

/// Cholesky solve plus one step of iterative refinement; fails when the
/// relative residual exceeds `tol`.
pub fn solve_hpd(a: &Matrix, b: &[BigComplex], tol: f64) -> Result<SpdSolution> {
    let chol = Cholesky::new(a)?;
    let mut x = chol.solve(b);
    let r = residual(a, &x, b);
    let dx = chol.solve(&r);
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi = &*xi + di;
    }
    let r = residual(a, &x, b);
    let bnorm = norm_inf(b);
    let rel = if bnorm.is_zero() {
        norm_inf(&r)
    } else {
        norm_inf(&r) / bnorm
    };
    if rel > tol {
        return Err(Error::SolveFailed {
            residual: rel.to_f64(),
            tolerance: tol,
        });
    }
    Ok(SpdSolution {
        x,
        relative_residual: rel,
    })
}

fn residual(a: &Matrix, x: &[BigComplex], b: &[BigComplex]) -> Vec<BigComplex> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// `λ_max / λ_min` estimated by ten steps of power iteration on `A` and on
/// `A⁻¹`; infinite when `A` is not numerically positive definite.
pub fn condition_estimate(a: &Matrix) -> f64 {
    const STEPS: usize = 10;
    let dim = a.dim();
    if dim == 0 {
        return 1.0;
    }
    let prec = a.prec();
    let Ok(chol) = Cholesky::new(a) else {
        return f64::INFINITY;
    };
    let start: Vec<BigComplex> = (0..dim)
        .map(|i| BigComplex::from_real(Float::with_val(prec, 1 + i % 3)))
        .collect();
    let rayleigh = |apply: &dyn Fn(&[BigComplex]) -> Vec<BigComplex>| {
        let mut v = start.clone();
        let mut est = Float::new(prec);
        for _ in 0..STEPS {
            let w = apply(&v);
            let norm = norm_inf(&w);
            if norm.is_zero() {
                return Float::new(prec);
            }
            est = inner(&w, &v).re / inner(&v, &v).re;
            v = w.iter().map(|z| z.div_real(&norm)).collect();
        }
        est
    };
    let top = rayleigh(&|v| a.mul_vec(v));
    let inv_top = rayleigh(&|v| chol.solve(v));
    (top * inv_top).to_f64().abs()
}

/// Positive semidefiniteness up to a relative shift `rel_shift·‖M‖`.
pub fn is_psd(m: &Matrix, rel_shift: f64) -> bool {
    let shift = m.max_abs() * rel_shift * m.dim().max(1) as f64;
    let mut shifted = m.clone();
    let tiny = Float::with_val(m.prec(), 1) >> (m.prec() * 2);
    for i in 0..m.dim() {
        shifted[(i, i)].re += &shift;
        shifted[(i, i)].re += &tiny;
    }
    Cholesky::new(&shifted).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PREC: u32 = 256;

    fn real(x: f64) -> BigComplex {
        BigComplex::from_real(Float::with_val(PREC, x))
    }

    fn cplx(re: f64, im: f64) -> BigComplex {
        BigComplex::new(Float::with_val(PREC, re), Float::with_val(PREC, im))
    }

    fn hpd(dim: usize, seed: &[(f64, f64)]) -> Matrix {
        // B B* + I from a pseudo-random B
        let b = Matrix::from_fn(dim, |i, j| {
            let (re, im) = seed[(i * dim + j) % seed.len()];
            cplx(re + (i as f64 - j as f64) * 0.1, im)
        });
        b.mul(&b.adjoint()).add(&Matrix::identity(dim, PREC))
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = hpd(5, &[(0.3, -0.2), (1.1, 0.4), (-0.7, 0.0), (0.2, 0.9)]);
        assert!(a.is_hermitian());
        let l = Cholesky::new(&a).unwrap();
        let back = l.factor().mul(&l.factor().adjoint());
        for i in 0..5 {
            for j in 0..5 {
                let d = (&back[(i, j)] - &a[(i, j)]).abs();
                assert!(d < 1e-70);
            }
        }
    }

    #[test]
    fn solve_and_refine() {
        let a = hpd(6, &[(0.5, 0.5), (-1.0, 0.25), (0.125, -0.75)]);
        let b: Vec<_> = (0..6).map(|i| cplx(i as f64, 1.0 - i as f64)).collect();
        let sol = solve_hpd(&a, &b, 1e-60).unwrap();
        assert!(sol.relative_residual < 1e-70);
    }

    #[test]
    fn ldl_matches_cholesky_determinant() {
        let a = hpd(4, &[(0.9, 0.1), (0.2, -0.3), (1.5, 0.0)]);
        let d = ldl_pivots(&a).unwrap();
        let ln_prod: Float = d.iter().fold(Float::new(PREC), |acc, p| acc + p.clone().ln());
        let diff = Float::with_val(PREC, &ln_prod - Cholesky::new(&a).unwrap().ln_det());
        assert!(diff.abs() < 1e-70);
    }

    #[test]
    fn detects_indefinite() {
        let m = Matrix::from_real_diagonal(&[Float::with_val(PREC, 1), Float::with_val(PREC, -1)]);
        assert_eq!(
            Cholesky::new(&m).unwrap_err(),
            Error::NotPsd { pivot: 1, value: -1.0 }
        );
        assert!(!is_psd(&m, 1e-20));
        let z = Matrix::zeros(3, PREC);
        assert!(is_psd(&z, 1e-20));
    }

    #[test]
    fn condition_of_diagonal() {
        let m = Matrix::from_real_diagonal(&[
            Float::with_val(PREC, 100),
            Float::with_val(PREC, 1),
            Float::with_val(PREC, 0.5),
        ]);
        let c = condition_estimate(&m);
        assert!((c - 200.0).abs() < 10.0, "{c}");
    }

    #[test]
    fn inner_is_conjugate_linear_in_second_slot() {
        let x = vec![cplx(1.0, 2.0)];
        let y = vec![cplx(0.0, 1.0)];
        assert_eq!(inner(&x, &y), cplx(2.0, -1.0));
        assert_eq!(unit_vector(3, 1, PREC)[1], real(1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn solve_residual_small(entries in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 9..40), dim in 1usize..7) {
            let a = hpd(dim, &entries);
            let b: Vec<_> = entries.iter().take(dim).map(|&(r, i)| cplx(r, i)).chain(std::iter::repeat(real(1.0))).take(dim).collect();
            let sol = solve_hpd(&a, &b, 1e-60).unwrap();
            prop_assert!(sol.relative_residual < 1e-60);
        }
    }
}
