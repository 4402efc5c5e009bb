//! Coset generators, the closed-form geodesic flow `T(tau, g)`, vacuum gauge
//! transforms and the polarization operator.
//!
//! The closed-form flow matrix equals `exp(tau K)` for the skew-Hermitian
//! generator `K` with `K_{i0} = f^i`, `K_{0i} = -conj(f^i)`. The Hermitian
//! "creation-annihilation" matrix `B` built from the same `f` is exposed as
//! well; `exp(i tau B)` differs from `T` by factors of `i` on the `sin` blocks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeometryConfig, StateVector, POLE_FLOOR};
use crate::linalg::{self, CMatrix, ONE, ZERO};

/// `|phi^0| >= (1 - VACUUM_TOL) R` counts as the vacuum.
pub const VACUUM_TOL: f64 = 1e-12;

/// Default rotation rate when none is supplied.
pub const DEFAULT_RATE: f64 = 1.0;

/// Coset direction `f`, rate `g = |f|`, flow parameter `tau` and angle
/// `theta = g tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub f: Vec<Complex64>,
    pub g: f64,
    pub tau: f64,
    pub theta: f64,
}

impl FlowSpec {
    pub fn new(f: Vec<Complex64>, tau: f64) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidInput("coset direction needs N - 1 >= 1 entries".into()));
        }
        let g = linalg::norm(&f);
        Ok(Self { f, g, tau, theta: g * tau })
    }

    /// Hilbert-space dimension `N`.
    pub fn dim(&self) -> usize {
        self.f.len() + 1
    }

    /// Same direction, new flow parameter.
    pub fn at(&self, tau: f64) -> Self {
        Self {
            f: self.f.clone(),
            g: self.g,
            tau,
            theta: self.g * tau,
        }
    }

    /// `2 pi / g`, or infinity for the trivial flow.
    pub fn period(&self) -> f64 {
        if self.g > 0.0 {
            2.0 * std::f64::consts::PI / self.g
        } else {
            f64::INFINITY
        }
    }
}

/// `B_{0i} = conj(f^i)`, `B_{i0} = f^i`, zero elsewhere.
pub fn build_generator(f: &[Complex64]) -> CMatrix {
    let n = f.len() + 1;
    let mut b = CMatrix::zeros(n, n);
    for (i, fi) in f.iter().enumerate() {
        b[(0, i + 1)] = fi.conj();
        b[(i + 1, 0)] = *fi;
    }
    b
}

/// `K_{i0} = f^i`, `K_{0i} = -conj(f^i)`, zero elsewhere.
pub fn generator_k(f: &[Complex64]) -> CMatrix {
    let n = f.len() + 1;
    let mut k = CMatrix::zeros(n, n);
    for (i, fi) in f.iter().enumerate() {
        k[(0, i + 1)] = -fi.conj();
        k[(i + 1, 0)] = *fi;
    }
    k
}

/// Closed-form flow matrix; the identity when `g = 0`.
pub fn flow_matrix(spec: &FlowSpec) -> CMatrix {
    let n = spec.dim();
    if spec.g == 0.0 {
        return CMatrix::identity(n, n);
    }
    let (s, c) = spec.theta.sin_cos();
    let g = spec.g;
    let mut t = CMatrix::identity(n, n);
    t[(0, 0)] = Complex64::from(c);
    for (j, fj) in spec.f.iter().enumerate() {
        t[(0, j + 1)] = -fj.conj() / g * s;
        t[(j + 1, 0)] = fj / g * s;
    }
    for (i, fi) in spec.f.iter().enumerate() {
        for (j, fj) in spec.f.iter().enumerate() {
            let delta = if i == j { ONE } else { ZERO };
            t[(i + 1, j + 1)] = delta + fi * fj.conj() / (g * g) * (c - 1.0);
        }
    }
    t
}

/// Unitary `G` with `G phi = (e^{i omega} |phi|, 0, ..., 0)`,
/// `omega = arg phi^0` (0 when `phi^0 = 0`).
///
/// `G` is a rotation in the plane spanned by `e_0` and the part of `phi`
/// orthogonal to it, and the identity on the complement of that plane.
pub fn vacuum_gauge(phi: &StateVector) -> CMatrix {
    let a = phi.amplitudes();
    let n = a.len();
    let len = linalg::norm(a);
    let u: Vec<Complex64> = a.iter().map(|z| z / len).collect();
    let omega = if u[0].norm() > 0.0 { u[0].arg() } else { 0.0 };
    let c = u[0].norm().min(1.0);
    let tail = linalg::norm(&u[1..]);
    if tail == 0.0 {
        return CMatrix::identity(n, n);
    }
    let s = tail;
    let mut w = vec![ZERO; n];
    for k in 1..n {
        w[k] = u[k] / tail;
    }
    let e = Complex64::from_polar(1.0, omega);

    // G = I - e0 e0^T - w w^dagger + [[c, s e], [-s conj(e), c]] in the (e0, w) basis.
    let mut g = CMatrix::identity(n, n);
    for r in 0..n {
        for col in 0..n {
            g[(r, col)] -= w[r] * w[col].conj();
        }
    }
    g[(0, 0)] = Complex64::from(c);
    for k in 1..n {
        // column w: G w = s e e0 + c w ; row part from G e0 = c e0 - s conj(e) w
        g[(0, k)] += s * e * w[k].conj();
        g[(k, 0)] += -s * e.conj() * w[k];
        for col in 1..n {
            g[(k, col)] += c * w[k] * w[col].conj();
        }
    }
    g
}

/// Coset parameters of the geodesic joining the vacuum to `phi` at rate `g`:
/// `cos theta = |phi^0| / R`, `|f^i| = g |phi^i| / sqrt(R^2 - |phi^0|^2)` and
/// `arg f^i = arg phi^i - arg phi^0`, so that
/// `R e^{i arg phi^0} T e_0 = phi`.
pub fn extract_coset(phi: &StateVector, g: f64) -> Result<FlowSpec> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidInput(format!("rate g = {g} must be positive")));
    }
    let a = phi.amplitudes();
    let r = phi.radius();
    let lead = a[0].norm();
    if lead >= r * (1.0 - VACUUM_TOL) {
        return Err(Error::AtVacuum { ratio: lead / r });
    }
    let omega = if lead > 0.0 { a[0].arg() } else { 0.0 };
    let rot = Complex64::from_polar(1.0, -omega);
    let tail = linalg::norm(&a[1..]);
    let f: Vec<Complex64> = a[1..].iter().map(|z| z * rot * (g / tail)).collect();
    // acos(|phi^0|/R) loses accuracy near the vacuum; atan2 does not.
    let theta = tail.atan2(lead);
    Ok(FlowSpec {
        f,
        g,
        tau: theta / g,
        theta,
    })
}

/// `sum_m phi^m [G T G^{-1}]^n_m` for a coefficient vector.
pub fn geodesic_deform(coeffs: &[Complex64], spec: &FlowSpec, gauge: &CMatrix) -> Result<Vec<Complex64>> {
    let n = spec.dim();
    if gauge.nrows() != n || gauge.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gauge.nrows(),
        });
    }
    if coeffs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: coeffs.len(),
        });
    }
    let conj = gauge * flow_matrix(spec) * gauge.adjoint();
    Ok(linalg::mat_vec(&conj, coeffs))
}

/// `P = G^{-1} B(f) G` with `f` from [`extract_coset`] at rate `g`.
pub fn polarization_operator(phi: &StateVector, g: f64) -> Result<CMatrix> {
    let spec = extract_coset(phi, g)?;
    let gauge = vacuum_gauge(phi);
    Ok(gauge.adjoint() * build_generator(&spec.f) * gauge)
}

/// `pi^i = R (f^i / g) tan theta`.
pub fn coset_coordinates(spec: &FlowSpec, cfg: &GeometryConfig) -> Result<Vec<Complex64>> {
    let n = spec.f.len();
    if spec.g == 0.0 || spec.theta == 0.0 {
        return Ok(vec![ZERO; n]);
    }
    let cos = spec.theta.cos();
    if cos.abs() < POLE_FLOOR {
        return Err(Error::NearPole {
            cos,
            floor: POLE_FLOOR,
        });
    }
    let scale = cfg.radius * spec.theta.tan() / spec.g;
    Ok(spec.f.iter().map(|fi| fi * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::to_local;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_f() -> Vec<Complex64> {
        vec![c(0.3, -0.4), c(1.2, 0.1), c(0.0, 0.7)]
    }

    #[test]
    fn generator_patterns() {
        assert!(linalg::max_abs(&build_generator(&[ZERO, ZERO])) == 0.0);
        let b = build_generator(&[ONE, ZERO]);
        assert_eq!(b[(0, 1)], ONE);
        assert_eq!(b[(1, 0)], ONE);
        assert_eq!(b.iter().filter(|z| z.norm() > 0.0).count(), 2);
        let k = generator_k(&[ONE]);
        assert_eq!(k, CMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]));

        let f = sample_f();
        assert!(linalg::hermiticity_defect(&build_generator(&f)) == 0.0);
        let k = generator_k(&f);
        assert!(linalg::max_abs(&(k.adjoint() + &k)) == 0.0);
    }

    #[test]
    fn flow_identity_and_quarter_turn() {
        let spec = FlowSpec::new(sample_f(), 0.0).unwrap();
        assert!(linalg::max_abs(&(flow_matrix(&spec) - CMatrix::identity(4, 4))) < 1e-16);

        let spec = FlowSpec::new(vec![ONE], FRAC_PI_2).unwrap();
        let t = flow_matrix(&spec);
        let expected = CMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]);
        assert!(linalg::max_abs(&(t - expected)) < 1e-15);
    }

    #[test]
    fn zero_direction_gives_identity() {
        let spec = FlowSpec::new(vec![ZERO, ZERO], 3.0).unwrap();
        assert_eq!(flow_matrix(&spec), CMatrix::identity(3, 3));
    }

    #[test]
    fn flow_is_periodic_and_matches_generator() {
        let spec = FlowSpec::new(sample_f(), 0.37).unwrap();
        let t = flow_matrix(&spec);
        let shifted = flow_matrix(&spec.at(0.37 + spec.period()));
        assert!(linalg::max_abs(&(&t - shifted)) < 1e-13);
        assert!(linalg::unitarity_defect(&t) < 1e-14);
        let k = generator_k(&spec.f) * Complex64::from(spec.tau);
        assert!(linalg::max_abs(&(t - linalg::expm(&k))) < 1e-13);
    }

    #[test]
    fn vacuum_gauge_examples() {
        let vac = StateVector::with_radius(vec![c(0.0, 2.0), ZERO, ZERO], 2.0).unwrap();
        assert_eq!(vacuum_gauge(&vac), CMatrix::identity(3, 3));

        let r = 1.5;
        let phi = StateVector::with_radius(vec![ZERO, ONE], r).unwrap();
        let g = vacuum_gauge(&phi);
        let expected = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        assert!(linalg::max_abs(&(&g - expected)) < 1e-15);
        let out = linalg::mat_vec(&g, phi.amplitudes());
        assert!(linalg::max_abs_diff(&out, &[c(r, 0.0), ZERO]) < 1e-15);
    }

    #[test]
    fn vacuum_gauge_maps_to_vacuum_form() {
        let phi = StateVector::new(vec![c(0.4, -0.3), c(1.0, 0.2), c(-0.5, 0.9), c(0.0, 0.1)]).unwrap();
        let g = vacuum_gauge(&phi);
        assert!(linalg::unitarity_defect(&g) < 1e-14);
        let out = linalg::mat_vec(&g, phi.amplitudes());
        let omega = phi.amplitudes()[0].arg();
        assert!((out[0] - Complex64::from_polar(phi.radius(), omega)).norm() < 1e-14);
        assert!(out[1..].iter().all(|z| z.norm() < 1e-14));
        // identity on the complement of span{phi, e0}
        let a = phi.amplitudes();
        let perp = [ZERO, a[2].conj(), -a[1].conj(), ZERO];
        let image = linalg::mat_vec(&g, &perp);
        assert!(linalg::max_abs_diff(&image, &perp) < 1e-14);
    }

    #[test]
    fn extract_coset_examples() {
        let r = 3.0;
        let phi = StateVector::with_radius(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], r).unwrap();
        let spec = extract_coset(&phi, 1.0).unwrap();
        assert!((spec.theta - FRAC_PI_4).abs() < 1e-15);
        assert!((spec.f[0] - ONE).norm() < 1e-15);
        assert!((spec.tau - FRAC_PI_4).abs() < 1e-15);

        let phi = StateVector::with_radius(vec![ZERO, c(0.0, 1.0)], r).unwrap();
        let spec = extract_coset(&phi, 2.5).unwrap();
        assert!((spec.theta - FRAC_PI_2).abs() < 1e-15);
        assert!((spec.f[0].norm() - 2.5).abs() < 1e-15);

        let vac = StateVector::vacuum(3, r).unwrap();
        assert!(matches!(extract_coset(&vac, 1.0), Err(Error::AtVacuum { .. })));
    }

    #[test]
    fn extract_then_flow_reconstructs_state() {
        let phi = StateVector::with_radius(vec![c(0.2, 0.5), c(-1.0, 0.3), c(0.4, 0.4)], 7.0).unwrap();
        let spec = extract_coset(&phi, 0.6).unwrap();
        let t = flow_matrix(&spec);
        let mut vac = vec![ZERO; 3];
        vac[0] = c(phi.radius(), 0.0);
        let out = linalg::mat_vec(&t, &vac);
        assert!(linalg::phase_aligned_distance(&out, phi.amplitudes()) < 1e-13);
    }

    #[test]
    fn deform_preserves_and_repeats() {
        let coeffs = vec![c(1.0, 0.5), c(-0.2, 0.1), c(0.3, -0.9), c(0.0, 0.4)];
        let phi = StateVector::new(vec![c(0.9, 0.1), c(0.2, 0.0), c(0.0, -0.3), c(0.1, 0.1)]).unwrap();
        let gauge = vacuum_gauge(&phi);
        let spec = FlowSpec::new(sample_f(), 0.0).unwrap();
        let same = geodesic_deform(&coeffs, &spec, &gauge).unwrap();
        assert!(linalg::max_abs_diff(&same, &coeffs) < 1e-14);
        let full = geodesic_deform(&coeffs, &spec.at(spec.period()), &gauge).unwrap();
        assert!(linalg::max_abs_diff(&full, &coeffs) < 1e-13);
        let norm0 = linalg::norm(&coeffs);
        for k in 0..25 {
            let out = geodesic_deform(&coeffs, &spec.at(0.1 * k as f64), &gauge).unwrap();
            assert!((linalg::norm(&out) - norm0).abs() < 1e-12);
        }
        assert!(matches!(
            geodesic_deform(&coeffs[..3], &spec, &gauge),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn polarization_operator_properties() {
        let phi = StateVector::with_radius(vec![c(0.8, 0.0), c(0.6, 0.0)], 1.0).unwrap();
        // N = 2: G rotates phi onto the vacuum, so P is a rotated copy of B.
        let p = polarization_operator(&phi, 1.0).unwrap();
        assert!(linalg::hermiticity_defect(&p) < 1e-15);

        let phi = StateVector::new(vec![c(0.3, 0.1), c(0.5, -0.2), c(-0.4, 0.6)]).unwrap();
        let p = polarization_operator(&phi, 1.3).unwrap();
        assert!(linalg::hermiticity_defect(&p) < 1e-12);
        let ev = linalg::hermitian_eigenvalues(&p);
        assert!((ev[0] + 1.3).abs() < 1e-12 && ev[1].abs() < 1e-12 && (ev[2] - 1.3).abs() < 1e-12);
    }

    #[test]
    fn polarization_at_trivial_gauge_is_b() {
        // N = 2 with phi = R e1: f = (g), and G = [[0,1],[-1,0]] maps B(f) to itself up to sign of f.
        let phi = StateVector::with_radius(vec![ZERO, ONE], 2.0).unwrap();
        let spec = extract_coset(&phi, 1.0).unwrap();
        let p = polarization_operator(&phi, 1.0).unwrap();
        let b = build_generator(&spec.f);
        assert!(linalg::max_abs(&(p + b)) < 1e-15);
    }

    #[test]
    fn coset_coordinates_examples() {
        let cfg = GeometryConfig::new(2, 1.0, 1.0).unwrap();
        let spec = FlowSpec::new(vec![ONE], 0.0).unwrap();
        assert_eq!(coset_coordinates(&spec, &cfg).unwrap(), vec![ZERO]);
        let spec = FlowSpec::new(vec![ONE], FRAC_PI_4).unwrap();
        assert!((coset_coordinates(&spec, &cfg).unwrap()[0] - ONE).norm() < 1e-15);
        let spec = FlowSpec::new(vec![ONE], FRAC_PI_2).unwrap();
        assert!(matches!(coset_coordinates(&spec, &cfg), Err(Error::NearPole { .. })));
    }

    #[test]
    fn coset_coordinates_match_flowed_vacuum() {
        let cfg = GeometryConfig::new(4, 2.0, 1.0).unwrap();
        let spec = FlowSpec::new(sample_f(), 0.5).unwrap();
        let pi = coset_coordinates(&spec, &cfg).unwrap();
        let t = flow_matrix(&spec);
        let flowed = StateVector::new((0..4).map(|r| t[(r, 0)]).collect()).unwrap();
        let local = to_local(&flowed, 0).unwrap();
        let scaled: Vec<Complex64> = local.coords().iter().map(|z| z * cfg.radius).collect();
        assert!(linalg::max_abs_diff(&pi, &scaled) < 1e-13);
    }
}
