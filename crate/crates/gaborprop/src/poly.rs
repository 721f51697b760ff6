//! Sparse multivariate real polynomials with graded-lex term ordering.

use crate::error::{GaborError, Result};
use crate::real::Real;
use num_complex::Complex;
use std::collections::BTreeMap;

/// Exponent multi-index ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Polynomial in `d` variables as a sparse exponent map.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T: Real> {
    dim: usize,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        let mut p = Polynomial::zero(dim);
        p.add_term(&vec![0; dim], c);
        p
    }

    pub fn from_terms(dim: usize, terms: &[(Vec<u32>, T)]) -> Result<Self> {
        let mut p = Polynomial::zero(dim);
        for (exp, c) in terms {
            if exp.len() != dim {
                return Err(GaborError::InvalidParameter(format!(
                    "term exponent has {} entries, expected {dim}",
                    exp.len()
                )));
            }
            p.add_term(exp, *c);
        }
        Ok(p)
    }

    /// Add `c * x^exp`, dropping the term if the coefficient cancels.
    pub fn add_term(&mut self, exp: &[u32], c: T) {
        debug_assert_eq!(exp.len(), self.dim);
        let key = Monomial(exp.to_vec());
        let entry = self.terms.entry(key).or_insert_with(T::zero);
        *entry += c;
        if *entry == T::zero() {
            self.terms.remove(&Monomial(exp.to_vec()));
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms.values().fold(T::zero(), |a, &c| a.max(c.abs()))
    }

    /// `|xi|^(2k)` expanded by the multinomial theorem.
    pub fn norm_sq_power(dim: usize, k: u32) -> Self {
        let mut p = Polynomial::constant(dim, T::one());
        let mut norm_sq = Polynomial::zero(dim);
        for a in 0..dim {
            let mut e = vec![0u32; dim];
            e[a] = 2;
            norm_sq.add_term(&e, T::one());
        }
        for _ in 0..k {
            p = p.mul(&norm_sq);
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = Polynomial::zero(self.dim);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let exp: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(&x, &y)| x + y).collect();
                out.add_term(&exp, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = Polynomial::zero(self.dim);
        for (m, &v) in &self.terms {
            out.add_term(&m.0, v * c);
        }
        out
    }

    /// Evaluate at a complex point by Horner factoring along the last variable.
    pub fn eval_complex(&self, z: &[Complex<T>]) -> Complex<T> {
        debug_assert_eq!(z.len(), self.dim);
        let terms = self.collect_terms();
        eval_group(&terms, z, 0)
    }

    /// Evaluate at a real point.
    pub fn eval_real(&self, x: &[T]) -> T {
        let z: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.eval_complex(&z).re
    }

    fn collect_terms(&self) -> Vec<(&[u32], T)> {
        self.terms.iter().map(|(m, &c)| (m.0.as_slice(), c)).collect()
    }
}

/// Group terms by the exponent of variable `axis`, recurse into the rest,
/// then combine with Horner steps in that variable.
fn eval_group<T: Real>(terms: &[(&[u32], T)], z: &[Complex<T>], axis: usize) -> Complex<T> {
    if terms.is_empty() {
        return Complex::new(T::zero(), T::zero());
    }
    if axis + 1 == z.len() {
        let mut by_exp: BTreeMap<u32, T> = BTreeMap::new();
        for (exp, c) in terms {
            *by_exp.entry(exp[axis]).or_insert_with(T::zero) += *c;
        }
        let lifted: BTreeMap<u32, Complex<T>> = by_exp
            .into_iter()
            .map(|(e, c)| (e, Complex::new(c, T::zero())))
            .collect();
        return horner(&lifted, z[axis]);
    }
    let mut by_exp: BTreeMap<u32, Vec<(&[u32], T)>> = BTreeMap::new();
    for &(exp, c) in terms {
        by_exp.entry(exp[axis]).or_default().push((exp, c));
    }
    let evaluated: BTreeMap<u32, Complex<T>> = by_exp
        .into_iter()
        .map(|(e, group)| (e, eval_group(&group, z, axis + 1)))
        .collect();
    horner(&evaluated, z[axis])
}

fn horner<T: Real>(by_exp: &BTreeMap<u32, Complex<T>>, z: Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut prev_exp: Option<u32> = None;
    for (&e, &v) in by_exp.iter().rev() {
        if let Some(pe) = prev_exp {
            for _ in 0..(pe - e) {
                acc = acc * z;
            }
        }
        acc += v;
        prev_exp = Some(e);
    }
    if let Some(e) = prev_exp {
        for _ in 0..e {
            acc = acc * z;
        }
    }
    acc
}
