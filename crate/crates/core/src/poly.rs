//! Univariate polynomials over a scalar backend, stored densely or sparsely.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::Result;
use crate::scalar::{Backend, LogReal, Scalar};

/// Sparse storage is used when at least 90% of the coefficients vanish.
fn prefer_sparse(nnz: usize, len: usize) -> bool {
    nnz * 10 <= len
}

#[derive(Clone, Debug)]
enum Terms {
    /// `c[k]` is the coefficient of `z^k`; no trailing exact zeros.
    Dense(Vec<Scalar>),
    /// Sorted by exponent, no exact zeros.
    Sparse(Vec<(usize, Scalar)>),
}

#[derive(Clone, Debug)]
pub struct Poly {
    backend: Backend,
    terms: Terms,
}

pub enum TermIter<'a> {
    Dense(std::iter::Enumerate<std::slice::Iter<'a, Scalar>>),
    Sparse(std::slice::Iter<'a, (usize, Scalar)>),
}

impl<'a> Iterator for TermIter<'a> {
    type Item = (usize, &'a Scalar);
    fn next(&mut self) -> Option<Self::Item> {
        match self {
            TermIter::Dense(it) => it.find(|(_, c)| !c.is_zero()),
            TermIter::Sparse(it) => it.next().map(|(k, c)| (*k, c)),
        }
    }
}

impl Poly {
    pub fn zero(backend: Backend) -> Poly {
        Poly { backend, terms: Terms::Dense(Vec::new()) }
    }

    pub fn constant(c: Scalar) -> Poly {
        Poly::from_terms(c.backend(), vec![(0, c)])
    }

    pub fn monomial(c: Scalar, k: usize) -> Poly {
        Poly::from_terms(c.backend(), vec![(k, c)])
    }

    /// The polynomial `z`.
    pub fn z(backend: Backend) -> Poly {
        Poly::monomial(backend.one(), 1)
    }

    /// Builds from a coefficient list `c[k]` of `z^k`.
    pub fn from_coeffs(backend: Backend, coeffs: Vec<Scalar>) -> Poly {
        let mut c = coeffs;
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        let nnz = c.iter().filter(|x| !x.is_zero()).count();
        if !c.is_empty() && prefer_sparse(nnz, c.len()) {
            let t = c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
            Poly { backend, terms: Terms::Sparse(t) }
        } else {
            Poly { backend, terms: Terms::Dense(c) }
        }
    }

    /// Builds from `(exponent, coefficient)` pairs; repeated exponents are summed.
    pub fn from_terms(backend: Backend, terms: Vec<(usize, Scalar)>) -> Poly {
        let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (k, c) in terms {
            match acc.get_mut(&k) {
                Some(x) => *x = &*x + &c,
                None => {
                    acc.insert(k, c);
                }
            }
        }
        Poly::from_sorted(backend, acc.into_iter().collect())
    }

    fn from_sorted(backend: Backend, terms: Vec<(usize, Scalar)>) -> Poly {
        let terms: Vec<(usize, Scalar)> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let len = terms.last().map_or(0, |(k, _)| k + 1);
        if len > 0 && prefer_sparse(terms.len(), len) {
            Poly { backend, terms: Terms::Sparse(terms) }
        } else {
            let mut c = vec![backend.zero(); len];
            for (k, x) in terms {
                c[k] = x;
            }
            Poly { backend, terms: Terms::Dense(c) }
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.terms, Terms::Sparse(_))
    }

    /// Number of stored nonzero coefficients.
    pub fn nnz(&self) -> usize {
        match &self.terms {
            Terms::Dense(c) => c.iter().filter(|x| !x.is_zero()).count(),
            Terms::Sparse(t) => t.len(),
        }
    }

    /// Degree of the highest non-(exactly-)zero coefficient; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        match &self.terms {
            Terms::Dense(c) => c.len().checked_sub(1),
            Terms::Sparse(t) => t.last().map(|(k, _)| *k),
        }
    }

    /// Index of the lowest nonzero coefficient.
    pub fn low_degree(&self) -> Option<usize> {
        self.terms().next().map(|(k, _)| k)
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        match &self.terms {
            Terms::Dense(c) => c.get(k).cloned().unwrap_or_else(|| self.backend.zero()),
            Terms::Sparse(t) => match t.binary_search_by_key(&k, |(e, _)| *e) {
                Ok(i) => t[i].1.clone(),
                Err(_) => self.backend.zero(),
            },
        }
    }

    pub fn terms(&self) -> TermIter<'_> {
        match &self.terms {
            Terms::Dense(c) => TermIter::Dense(c.iter().enumerate()),
            Terms::Sparse(t) => TermIter::Sparse(t.iter()),
        }
    }

    /// Dense coefficient vector of length `degree + 1`.
    pub fn to_dense(&self) -> Vec<Scalar> {
        match &self.terms {
            Terms::Dense(c) => c.clone(),
            Terms::Sparse(t) => {
                let mut c = vec![self.backend.zero(); self.degree().map_or(0, |d| d + 1)];
                for (k, x) in t {
                    c[*k] = x.clone();
                }
                c
            }
        }
    }

    pub fn complex_coeffs(&self) -> Option<Vec<Complex64>> {
        self.to_dense().iter().map(|c| c.as_complex()).collect()
    }

    fn collect(&self) -> Vec<(usize, Scalar)> {
        self.terms().map(|(k, c)| (k, c.clone())).collect()
    }

    pub fn neg(&self) -> Poly {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        self.map_coeffs(|c| c * s)
    }

    fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Poly {
        let t = self.terms().map(|(k, c)| (k, f(c))).collect();
        Poly::from_sorted(self.backend, t)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        match (&self.terms, &other.terms) {
            (Terms::Dense(a), Terms::Dense(b)) => {
                let n = a.len().max(b.len());
                let z = self.backend.zero();
                let c = (0..n).map(|k| a.get(k).unwrap_or(&z) + b.get(k).unwrap_or(&z)).collect();
                Poly::from_coeffs(self.backend, c)
            }
            _ => {
                let mut t = self.collect();
                t.extend(other.collect());
                Poly::from_terms(self.backend, t)
            }
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: usize) -> Poly {
        let t = self.terms().map(|(e, c)| (e + k, c.clone())).collect();
        Poly::from_sorted(self.backend, t)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.backend);
        }
        let (na, nb) = (self.nnz(), other.nnz());
        let len = self.degree().unwrap() + other.degree().unwrap() + 1;
        if self.is_sparse() || other.is_sparse() || prefer_sparse(na * nb, len) {
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (i, a) in self.terms() {
                for (j, b) in other.terms() {
                    let prod = a * b;
                    match acc.get_mut(&(i + j)) {
                        Some(x) => *x = &*x + &prod,
                        None => {
                            acc.insert(i + j, prod);
                        }
                    }
                }
            }
            return Poly::from_sorted(self.backend, acc.into_iter().collect());
        }
        if let (Some(a), Some(b)) = (self.complex_coeffs(), other.complex_coeffs()) {
            let mut c = vec![Complex64::new(0.0, 0.0); len];
            for (i, x) in a.iter().enumerate() {
                if x.re == 0.0 && x.im == 0.0 {
                    continue;
                }
                for (j, y) in b.iter().enumerate() {
                    c[i + j] += x * y;
                }
            }
            return Poly::from_coeffs(self.backend, c.into_iter().map(Scalar::Complex).collect());
        }
        let (a, b) = (self.to_dense(), other.to_dense());
        let mut c = vec![self.backend.zero(); len];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    c[i + j] = &c[i + j] + &(x * y);
                }
            }
        }
        Poly::from_coeffs(self.backend, c)
    }

    pub fn pow(&self, mut k: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::constant(self.backend.one());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        match &self.terms {
            Terms::Dense(c) => {
                if let (Scalar::Complex(z), true) = (x, matches!(c.first(), Some(Scalar::Complex(_)))) {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in c.iter().rev() {
                        acc = acc * z + k.as_complex().unwrap();
                    }
                    return Scalar::Complex(acc);
                }
                let mut acc = self.backend.zero();
                for k in c.iter().rev() {
                    acc = &(&acc * x) + k;
                }
                acc
            }
            Terms::Sparse(t) => {
                let mut acc = self.backend.zero();
                let mut xp = self.backend.one();
                let mut e = 0usize;
                for (k, c) in t {
                    xp = &xp * &x.pow((k - e) as u64);
                    e = *k;
                    acc = &acc + &(c * &xp);
                }
                acc
            }
        }
    }

    /// `sum c_k w^(d-k)`, i.e. the form evaluated at `(w, 1)` for formal degree `d`.
    pub fn eval_reversed(&self, w: &Scalar, d: usize) -> Scalar {
        debug_assert!(self.degree().is_none_or(|k| k <= d));
        let t: Vec<(usize, Scalar)> = self.terms().map(|(k, c)| (d - k, c.clone())).collect();
        let mut t = t;
        t.reverse();
        Poly::from_sorted(self.backend, t).eval(w)
    }

    pub fn derivative(&self) -> Poly {
        let t = self
            .terms()
            .filter(|(k, _)| *k > 0)
            .map(|(k, c)| (k - 1, c * &self.backend.from_i64(k as i64)))
            .collect();
        Poly::from_sorted(self.backend, t)
    }

    /// Coefficients of `P(z + a)` (exact recentering by repeated synthetic division).
    pub fn taylor_shift(&self, a: &Scalar) -> Poly {
        if a.is_zero() {
            return self.clone();
        }
        let mut c = self.to_dense();
        let n = c.len();
        if let (Some(az), Some(mut cz)) = (a.as_complex(), self.complex_coeffs()) {
            for i in 0..n {
                for j in (i..n - 1).rev() {
                    let t = cz[j + 1] * az;
                    cz[j] += t;
                }
            }
            return Poly::from_coeffs(self.backend, cz.into_iter().map(Scalar::Complex).collect());
        }
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                if !c[j + 1].is_zero() {
                    c[j] = &c[j] + &(&c[j + 1] * a);
                }
            }
        }
        Poly::from_coeffs(self.backend, c)
    }

    /// `max_k log|c_k|` (upper bounds for indeterminate coefficients).
    pub fn max_log_abs(&self) -> LogReal {
        self.terms().fold(LogReal::NegInf, |m, (_, c)| m.max(c.log_abs_upper()))
    }

    /// Coefficient of largest absolute value (exactly determined ones only).
    pub fn max_abs_coeff(&self) -> Result<Option<Scalar>> {
        let mut best: Option<(LogReal, Scalar)> = None;
        for (_, c) in self.terms() {
            if c.is_indeterminate() {
                continue;
            }
            let l = c.log_abs()?;
            if best.as_ref().is_none_or(|(b, _)| l > *b) {
                best = Some((l, c.clone()));
            }
        }
        Ok(best.map(|(_, c)| c))
    }
}
