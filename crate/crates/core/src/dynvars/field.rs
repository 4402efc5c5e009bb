//! Polynomial vector fields `X^i d/dpi^i + Y^i d/dpi^{i*}` on a chart of
//! CP(N-1).
//!
//! `hol[i]` is a polynomial in `pi` and `conj[i]` a polynomial in `pi*`
//! (stored over the same exponent layout and evaluated at `conj(pi)`).
//! Fields generated from Hermitian matrices have `conj[i]` equal to `hol[i]`
//! with conjugated coefficients; transcribed fields need not.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::error::{Error, Result};
use crate::geometry::{LocalPoint, TangentVector};

/// Largest total degree produced by generator fields.
pub const MAX_DEGREE: usize = 2;

/// Relative size below which bracket coefficients are treated as cancelled.
const PRUNE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentField {
    pub hol: Vec<Poly>,
    pub conj: Vec<Poly>,
}

impl TangentField {
    pub fn zero(n: usize) -> Self {
        Self {
            hol: vec![Poly::zero(n); n],
            conj: vec![Poly::zero(n); n],
        }
    }

    /// Field whose antiholomorphic part is the conjugate of `hol`.
    pub fn real(hol: Vec<Poly>) -> Self {
        let conj = hol.iter().map(Poly::conj_coeffs).collect();
        Self { hol, conj }
    }

    /// Number of local coordinates.
    pub fn len(&self) -> usize {
        self.hol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hol.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.hol.iter().chain(&self.conj).map(Poly::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.hol.iter().chain(&self.conj).all(Poly::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            hol: self.hol.iter().zip(&other.hol).map(|(a, b)| a.add(b)).collect(),
            conj: self.conj.iter().zip(&other.conj).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::from(-1.0)))
    }

    /// Multiplies the whole operator by `c`.
    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            hol: self.hol.iter().map(|p| p.scale(c)).collect(),
            conj: self.conj.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Largest coefficient difference over both parts.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.hol
            .iter()
            .zip(&other.hol)
            .chain(self.conj.iter().zip(&other.conj))
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.hol.iter().chain(&self.conj).map(Poly::max_coeff).fold(0.0, f64::max)
    }

    /// Holomorphic components at `pi`.
    pub fn eval_hol(&self, pi: &[Complex64]) -> Vec<Complex64> {
        self.hol.iter().map(|p| p.eval(pi)).collect()
    }

    /// Antiholomorphic components at `pi`.
    pub fn eval_conj(&self, pi: &[Complex64]) -> Vec<Complex64> {
        let pc: Vec<Complex64> = pi.iter().map(|z| z.conj()).collect();
        self.conj.iter().map(|p| p.eval(&pc)).collect()
    }

    pub fn eval(&self, p: &LocalPoint) -> Result<TangentVector> {
        if p.coords().len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: p.coords().len(),
            });
        }
        TangentVector::new(p.clone(), self.eval_hol(p.coords()))
    }
}

fn bracket_part(x: &[Poly], y: &[Poly]) -> Vec<Poly> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut acc = Poly::zero(n);
            for k in 0..n {
                acc = acc.add(&x[k].mul(&y[i].derivative(k))).sub(&y[k].mul(&x[i].derivative(k)));
            }
            acc.pruned(PRUNE_TOL)
        })
        .collect()
}

/// `[X, Y]^i = X^k d_k Y^i - Y^k d_k X^i`, separately on the holomorphic
/// and antiholomorphic parts.
pub fn lie_bracket(x: &TangentField, y: &TangentField) -> Result<TangentField> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let out = TangentField {
        hol: bracket_part(&x.hol, &y.hol),
        conj: bracket_part(&x.conj, &y.conj),
    };
    let degree = out.degree();
    if degree > MAX_DEGREE {
        return Err(Error::DegreeExceeded {
            degree,
            max: MAX_DEGREE,
        });
    }
    Ok(out)
}
