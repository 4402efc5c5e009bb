//! Independent reference computations used to cross-check the main routines.

use num_complex::Complex64;

use crate::geometry::{fubini_study_metric, GeometryConfig, LocalPoint};
use crate::linalg::{CMatrix, ZERO};

/// Fubini-Study metric of the unit sphere,
/// `2 hbar ((1 + |pi|^2) delta_ik - conj(pi^i) pi^k) / (1 + |pi|^2)^2`.
pub fn unit_metric(pi: &[Complex64], hbar: f64) -> CMatrix {
    let n = pi.len();
    let s: f64 = 1.0 + pi.iter().map(|z| z.re * z.re + z.im * z.im).sum::<f64>();
    CMatrix::from_fn(n, n, |i, k| {
        let mut v = -pi[i].conj() * pi[k];
        if i == k {
            v += s;
        }
        v * (2.0 * hbar) / (s * s)
    })
}

/// Christoffel symbols `Gamma^i_{km} = g^{i l*} d_k g_{m l*}` of the
/// radius-`R` metric, flattened `[i][k][m]`, with the holomorphic derivative
/// `d_k = (d/dx_k - i d/dy_k)/2` taken by central differences of step `h`.
pub fn fd_christoffel(p: &LocalPoint, cfg: &GeometryConfig, h: f64) -> Vec<Complex64> {
    let n = p.coords().len();
    let metric_at = |coords: Vec<Complex64>| {
        let q = LocalPoint::new(p.chart(), coords).expect("shifted point has the same dimension");
        fubini_study_metric(&q, cfg).g
    };
    let g = metric_at(p.coords().to_vec());
    let inv = g.try_inverse().expect("metric is positive definite");
    let mut out = vec![ZERO; n * n * n];
    for k in 0..n {
        let mut dk = CMatrix::zeros(n, n);
        for (dir, weight) in [(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)), (Complex64::new(0.0, 1.0), Complex64::new(0.0, -0.5))] {
            let mut plus = p.coords().to_vec();
            let mut minus = p.coords().to_vec();
            plus[k] += dir * h;
            minus[k] -= dir * h;
            dk += (metric_at(plus) - metric_at(minus)) * (weight / (2.0 * h));
        }
        for i in 0..n {
            for m in 0..n {
                out[(i * n + k) * n + m] = (0..n).map(|l| inv[(l, i)] * dk[(m, l)]).sum();
            }
        }
    }
    out
}

/// `exp(a)` by scaling and squaring around a truncated Taylor series, with
/// a bound on the truncation error of the scaled series.
///
/// With `b = a / 2^s`, `|b| <= 1/2` and `K` terms, the remainder is at most
/// `|b|^{K+1} / (K+1)! / (1 - |b|/(K+2))`.
pub fn expm_taylor(a: &CMatrix) -> (CMatrix, f64) {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>().max(0.0);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let b = a / Complex64::from(2f64.powi(s));
    let bn = norm / 2f64.powi(s);
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    let mut k = 0usize;
    let mut fact_bound = 1.0;
    loop {
        k += 1;
        term = &term * &b / Complex64::from(k as f64);
        sum += &term;
        fact_bound *= bn / k as f64;
        let remainder = fact_bound * bn / (k + 1) as f64 / (1.0 - bn / (k + 2) as f64);
        if remainder < 1e-18 || k > 60 {
            for _ in 0..s {
                sum = &sum * &sum;
            }
            return (sum, remainder);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{connection, ConnectionVariant};
    use crate::linalg;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_metric_at_origin() {
        let g = unit_metric(&[ZERO, ZERO], 0.5);
        assert_eq!(g, CMatrix::identity(2, 2));
    }

    #[test]
    fn fd_christoffel_matches_levi_civita() {
        let cfg = GeometryConfig::new(3, 1.7, 1.0).unwrap();
        let p = LocalPoint::new(0, vec![z(0.4, -0.3), z(0.1, 0.8)]).unwrap();
        let fd = fd_christoffel(&p, &cfg, 1e-5);
        let lc = connection(&p, &cfg, ConnectionVariant::LeviCivita);
        for i in 0..2 {
            for k in 0..2 {
                for m in 0..2 {
                    assert!((fd[(i * 2 + k) * 2 + m] - lc.get(i, k, m)).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn taylor_expm_agrees_with_pade() {
        let a = CMatrix::from_fn(4, 4, |i, k| z((i as f64 - k as f64) * 0.7, 0.3 * (i * k) as f64));
        let (t, bound) = expm_taylor(&a);
        assert!(bound < 1e-17);
        let p = linalg::expm(&a);
        let scale = linalg::max_abs(&p);
        assert!(linalg::max_abs(&(t - p)) < 1e-12 * scale);
    }
}
