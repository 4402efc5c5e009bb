//! Sparse complex polynomials in `n` commuting variables.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::ZERO;

/// Exponent vector of a monomial.
pub type Monomial = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable `x_k`.
    pub fn var(nvars: usize, k: usize) -> Self {
        Self::monomial(nvars, &[k], Complex64::from(1.0))
    }

    /// `c * prod_{k in vars} x_k`, repeated indices raising the power.
    pub fn monomial(nvars: usize, vars: &[usize], c: Complex64) -> Self {
        let mut e = vec![0u8; nvars];
        for &k in vars {
            assert!(k < nvars, "variable index {k} out of range");
            e[k] += 1;
        }
        let mut p = Self::zero(nvars);
        p.add_term(e, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u8]) -> Complex64 {
        self.terms.get(e).copied().unwrap_or(ZERO)
    }

    pub fn add_term(&mut self, e: Monomial, c: Complex64) {
        assert_eq!(e.len(), self.nvars);
        if c == ZERO {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == ZERO {
                    slot.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&d| d as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(e.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::from(-1.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, va) in &self.terms {
            for (eb, vb) in &other.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, va * vb);
            }
        }
        out
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            if e[k] > 0 {
                let mut d = e.clone();
                d[k] -= 1;
                out.add_term(d, v * e[k] as f64);
            }
        }
        out
    }

    /// Same monomials with conjugated coefficients.
    pub fn conj_coeffs(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.conj())).collect(),
        }
    }

    /// Drops terms with modulus at most `tol` times the largest coefficient.
    pub fn pruned(&self, tol: f64) -> Self {
        let cut = tol * self.max_coeff();
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, v)| v.norm() > cut)
                .map(|(e, v)| (e.clone(), *v))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, v)| {
                let mut m = *v;
                for (xi, &d) in x.iter().zip(e) {
                    if d > 0 {
                        m *= xi.powu(d as u32);
                    }
                }
                m
            })
            .sum()
    }

    /// `max |a_e - b_e|` over all monomials.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_coeff()
    }
}
