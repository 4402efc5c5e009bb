//! Charts, the generalized Fubini-Study metric and its connection on CP(N-1),
//! covariant derivatives, CP(1) geodesics and the rotation-rate equation.
//!
//! Local coordinates in chart `b` are the amplitude ratios
//! `pi^i = psi^{sigma(i)} / psi^b`, where `sigma` enumerates the indices other
//! than `b` in ascending order. The metric carries the density-sphere radius
//! `R`:
//!
//! ```text
//! G_{ik*} = 2 hbar R^2 [(R^2 + |pi|^2) delta_ik - conj(pi^i) pi^k] / (R^2 + |pi|^2)^2
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::Richardson;
use crate::linalg::{self, CMatrix, ZERO};

/// Fine structure constant (CODATA 2018).
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;

/// `|psi^b| < CHART_FLOOR * R` is treated as outside chart `b`.
pub const CHART_FLOOR: f64 = 1e-12;

/// Minimum `|cos|` accepted before a tangent-map coordinate is declared at its pole.
pub const POLE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub hbar: f64,
    pub radius: f64,
    pub dim: usize,
}

impl GeometryConfig {
    pub fn new(dim: usize, radius: f64, hbar: f64) -> Result<Self> {
        let cfg = Self { hbar, radius, dim };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `R = alpha^{-1/2}`, `hbar = 1`: curvature `1/R^2` identified with the
    /// fine structure constant.
    pub fn with_dim(dim: usize) -> Self {
        Self {
            hbar: 1.0,
            radius: FINE_STRUCTURE.powf(-0.5),
            dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidInput(format!("dimension N = {} must be >= 2", self.dim)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius R = {} must be positive", self.radius)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidInput(format!("hbar = {} must be positive", self.hbar)));
        }
        Ok(())
    }

    /// Holomorphic sectional curvature scale `1/R^2`.
    pub fn curvature(&self) -> f64 {
        1.0 / (self.radius * self.radius)
    }
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self::with_dim(2)
    }
}

/// Amplitudes on the density sphere `sum |psi^a|^2 = R^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    radius: f64,
}

impl StateVector {
    /// Takes the radius from the norm of `amplitudes`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidInput("state vector needs N >= 2 amplitudes".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("state vector amplitudes must be finite".into()));
        }
        let radius = linalg::norm(&amplitudes);
        if radius == 0.0 {
            return Err(Error::InvalidInput("state vector has zero norm".into()));
        }
        Ok(Self { amplitudes, radius })
    }

    /// Rescales `amplitudes` onto the sphere of the given radius.
    pub fn with_radius(amplitudes: Vec<Complex64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius {radius} must be positive")));
        }
        let s = Self::new(amplitudes)?;
        let scale = radius / s.radius;
        Ok(Self {
            amplitudes: s.amplitudes.into_iter().map(|z| z * scale).collect(),
            radius,
        })
    }

    /// `(R, 0, ..., 0)`.
    pub fn vacuum(dim: usize, radius: f64) -> Result<Self> {
        let mut a = vec![ZERO; dim];
        if dim > 0 {
            a[0] = Complex64::from(1.0);
        }
        Self::with_radius(a, radius)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalPoint {
    chart: usize,
    coords: Vec<Complex64>,
}

impl LocalPoint {
    pub fn new(chart: usize, coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("local point needs at least one coordinate".into()));
        }
        if chart > coords.len() {
            return Err(Error::InvalidInput(format!(
                "chart {chart} out of range for N = {}",
                coords.len() + 1
            )));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("local coordinates must be finite".into()));
        }
        Ok(Self { chart, coords })
    }

    /// Origin of chart 0.
    pub fn origin(dim: usize) -> Self {
        Self {
            chart: 0,
            coords: vec![ZERO; dim.max(2) - 1],
        }
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Hilbert-space dimension `N`.
    pub fn dim(&self) -> usize {
        self.coords.len() + 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `G_{ik*}` stored with row `i` and column `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub g: CMatrix,
}

impl MetricAtPoint {
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.g)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.g)[0]
    }
}

/// Which coefficient multiplies the Fubini-Study connection.
///
/// `LeviCivita` (factor -1) is the connection compatible with the metric and
/// makes `R e^{i alpha} tan l` a geodesic. `Printed` keeps the factor -2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionVariant {
    #[default]
    LeviCivita,
    Printed,
}

impl ConnectionVariant {
    pub fn factor(self) -> f64 {
        match self {
            ConnectionVariant::LeviCivita => -1.0,
            ConnectionVariant::Printed => -2.0,
        }
    }
}

impl fmt::Display for ConnectionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConnectionVariant::LeviCivita => "levi_civita",
            ConnectionVariant::Printed => "printed",
        })
    }
}

impl FromStr for ConnectionVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "levi_civita" | "levi-civita" => Ok(ConnectionVariant::LeviCivita),
            "printed" => Ok(ConnectionVariant::Printed),
            other => Err(Error::ConfigInvalid(format!("unknown connection variant '{other}'"))),
        }
    }
}

/// Christoffel symbols `Gamma^i_{km}` at one point, flattened `[i][k][m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionAtPoint {
    pub variant: ConnectionVariant,
    n: usize,
    gamma: Vec<Complex64>,
}

impl ConnectionAtPoint {
    /// Number of local coordinates `N - 1`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, k: usize, m: usize) -> Complex64 {
        self.gamma[(i * self.n + k) * self.n + m]
    }

    /// `sum_{k,m} Gamma^i_{km} a^k b^m`.
    pub fn contract(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let mut acc = ZERO;
                for (k, ak) in a.iter().enumerate() {
                    for (m, bm) in b.iter().enumerate() {
                        acc += self.get(i, k, m) * ak * bm;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for k in 0..self.n {
                for m in 0..self.n {
                    worst = worst.max((self.get(i, k, m) - self.get(i, m, k)).norm());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: LocalPoint,
    pub xi: Vec<Complex64>,
}

impl TangentVector {
    pub fn new(base: LocalPoint, xi: Vec<Complex64>) -> Result<Self> {
        if xi.len() != base.coords().len() {
            return Err(Error::DimensionMismatch {
                expected: base.coords().len(),
                got: xi.len(),
            });
        }
        Ok(Self { base, xi })
    }
}

/// Indices other than `chart` in ascending order.
fn chart_complement(dim: usize, chart: usize) -> impl Iterator<Item = usize> {
    (0..dim).filter(move |&a| a != chart)
}

pub fn to_local(psi: &StateVector, chart: usize) -> Result<LocalPoint> {
    let n = psi.dim();
    if chart >= n {
        return Err(Error::InvalidInput(format!("chart {chart} out of range for N = {n}")));
    }
    let denom = psi.amplitudes[chart];
    let floor = CHART_FLOOR * psi.radius;
    if denom.norm() < floor {
        return Err(Error::ChartUndefined {
            chart,
            modulus: denom.norm(),
            floor,
        });
    }
    let coords = chart_complement(n, chart).map(|a| psi.amplitudes[a] / denom).collect();
    Ok(LocalPoint { chart, coords })
}

/// Inverse of [`to_local`] with the norm fixed to `radius` and the chart
/// component carrying phase `phase`.
pub fn from_local(p: &LocalPoint, radius: f64, phase: f64) -> StateVector {
    let n = p.dim();
    let lead = Complex64::from_polar(radius / (1.0 + p.norm_sqr()).sqrt(), phase);
    let mut amplitudes = vec![ZERO; n];
    amplitudes[p.chart] = lead;
    for (a, pi) in chart_complement(n, p.chart).zip(&p.coords) {
        amplitudes[a] = lead * pi;
    }
    StateVector { amplitudes, radius }
}

pub fn fubini_study_metric(p: &LocalPoint, cfg: &GeometryConfig) -> MetricAtPoint {
    let n = p.coords.len();
    let r2 = cfg.radius * cfg.radius;
    let d = r2 + p.norm_sqr();
    let scale = 2.0 * cfg.hbar * r2 / (d * d);
    let g = CMatrix::from_fn(n, n, |i, k| {
        let diag = if i == k { d } else { 0.0 };
        (Complex64::from(diag) - p.coords[i].conj() * p.coords[k]) * scale
    });
    MetricAtPoint { g }
}

pub fn connection(p: &LocalPoint, cfg: &GeometryConfig, variant: ConnectionVariant) -> ConnectionAtPoint {
    let n = p.coords.len();
    let d = cfg.radius * cfg.radius + p.norm_sqr();
    let c = variant.factor() / d;
    let mut gamma = vec![ZERO; n * n * n];
    for i in 0..n {
        for k in 0..n {
            for m in 0..n {
                let mut v = ZERO;
                if i == k {
                    v += p.coords[m].conj();
                }
                if i == m {
                    v += p.coords[k].conj();
                }
                gamma[(i * n + k) * n + m] = v * c;
            }
        }
    }
    ConnectionAtPoint { variant, n, gamma }
}

/// `sum_{k,m} Gamma^i_{km} a^k b^m` without materializing the tensor.
pub fn connection_contract(
    p: &LocalPoint,
    cfg: &GeometryConfig,
    variant: ConnectionVariant,
    a: &[Complex64],
    b: &[Complex64],
) -> Vec<Complex64> {
    let d = cfg.radius * cfg.radius + p.norm_sqr();
    let c = variant.factor() / d;
    let pa: Complex64 = p.coords.iter().zip(a).map(|(pi, x)| pi.conj() * x).sum();
    let pb: Complex64 = p.coords.iter().zip(b).map(|(pi, x)| pi.conj() * x).sum();
    a.iter().zip(b).map(|(ai, bi)| (ai * pb + bi * pa) * c).collect()
}

/// `Delta xi^i / dl = d xi^i / dl + Gamma^i_{km} xi^k d pi^m / dl`.
pub fn covariant_derivative(
    xi: &TangentVector,
    dxi_dl: &[Complex64],
    dpi_dl: &[Complex64],
    cfg: &GeometryConfig,
    variant: ConnectionVariant,
) -> Result<Vec<Complex64>> {
    let n = xi.xi.len();
    for len in [dxi_dl.len(), dpi_dl.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let corr = connection_contract(&xi.base, cfg, variant, &xi.xi, dpi_dl);
    Ok(dxi_dl.iter().zip(corr).map(|(a, b)| a + b).collect())
}

/// `Pi(l) = R e^{i alpha} tan l`, the CP(1) geodesic through the origin.
pub fn geodesic_cp1(l: f64, alpha: f64, cfg: &GeometryConfig) -> Result<Complex64> {
    let cos = l.cos();
    if cos.abs() < POLE_FLOOR {
        return Err(Error::NearPole {
            cos,
            floor: POLE_FLOOR,
        });
    }
    Ok(Complex64::from_polar(cfg.radius, alpha) * l.tan())
}

/// Residual `Pi'' + Gamma^1_{11}(Pi) Pi'^2` of the CP(1) geodesic equation
/// along `R e^{i alpha} tan l`, with both derivatives taken by
/// Richardson-extrapolated central differences.
pub fn geodesic_residual_cp1(
    l: f64,
    alpha: f64,
    cfg: &GeometryConfig,
    variant: ConnectionVariant,
    fd: Richardson,
) -> Result<Complex64> {
    let pi = geodesic_cp1(l, alpha, cfg)?;
    let path = |s: f64| Complex64::from_polar(cfg.radius, alpha) * s.tan();
    let d1 = fd.first(path, l);
    let d2 = fd.second(path, l);
    let gamma = variant.factor() * 2.0 * pi.conj() / (cfg.radius * cfg.radius + pi.norm_sqr());
    Ok(d2 + gamma * d1 * d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub l: f64,
    pub theta: f64,
    pub rate: f64,
}

/// Integrates `Theta'' + 2 (1 + 2/R) Theta'^2 tan Theta = 0` with classical
/// RK4 on `steps` uniform steps of `[0, l_max]`.
pub fn integrate_theta_ode(
    cfg: &GeometryConfig,
    theta0: f64,
    dtheta0: f64,
    l_max: f64,
    steps: usize,
) -> Result<Vec<ThetaSample>> {
    use std::f64::consts::FRAC_PI_2;
    if steps < 2 {
        return Err(Error::InvalidInput(format!("steps = {steps} must be >= 2")));
    }
    if !(0.0..FRAC_PI_2).contains(&theta0) {
        return Err(Error::InvalidInput(format!("theta0 = {theta0} must lie in [0, pi/2)")));
    }
    if !(l_max > 0.0 && l_max.is_finite()) {
        return Err(Error::InvalidInput(format!("l_max = {l_max} must be positive")));
    }
    let k = 2.0 * (1.0 + 2.0 / cfg.radius);
    let rhs = |theta: f64, rate: f64| -> (f64, f64) { (rate, -k * rate * rate * theta.tan()) };

    let h = l_max / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut th, mut w) = (theta0, dtheta0);
    out.push(ThetaSample { l: 0.0, theta: th, rate: w });
    for s in 1..=steps {
        let (k1a, k1b) = rhs(th, w);
        let (k2a, k2b) = rhs(th + 0.5 * h * k1a, w + 0.5 * h * k1b);
        let (k3a, k3b) = rhs(th + 0.5 * h * k2a, w + 0.5 * h * k2b);
        let (k4a, k4b) = rhs(th + h * k3a, w + h * k3b);
        th += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        w += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        let l = s as f64 * h;
        if !th.is_finite() || !w.is_finite() || th.abs() >= FRAC_PI_2 {
            return Err(Error::StepFailure {
                at: l,
                reason: format!("theta = {th}, rate = {w}; reduce the step size"),
            });
        }
        out.push(ThetaSample { l, theta: th, rate: w });
    }
    Ok(out)
}

/// Fubini-Study angle between `phi` and the vacuum `(R, 0, ..., 0)`.
pub fn fs_geodesic_angle(phi: &StateVector) -> f64 {
    let c = (phi.amplitudes[0].norm() / phi.radius).clamp(0.0, 1.0);
    c.acos().clamp(0.0, std::f64::consts::FRAC_PI_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_cfg(dim: usize) -> GeometryConfig {
        GeometryConfig::new(dim, 1.0, 1.0).unwrap()
    }

    #[test]
    fn to_local_examples() {
        let psi = StateVector::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(to_local(&psi, 0).unwrap().coords(), &[c(0.0, 0.0), c(0.0, 0.0)]);

        let psi = StateVector::new(vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(to_local(&psi, 0).unwrap().coords(), &[c(0.0, 2.0), c(-1.0, 0.0)]);

        let psi = StateVector::new(vec![c(2.0, 0.0), c(0.0, 4.0)]).unwrap();
        let p = to_local(&psi, 1).unwrap();
        assert!((p.coords()[0] - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn chart_floor_rejects_vanishing_component() {
        let psi = StateVector::new(vec![c(1e-14, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(to_local(&psi, 0), Err(Error::ChartUndefined { chart: 0, .. })));
        assert!(to_local(&psi, 1).is_ok());
    }

    #[test]
    fn from_local_examples() {
        let psi = from_local(&LocalPoint::origin(3), 1.0, 0.0);
        assert_eq!(psi.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let p = LocalPoint::new(0, vec![c(1.0, 0.0)]).unwrap();
        let psi = from_local(&p, SQRT_2, 0.0);
        assert!(linalg::max_abs_diff(psi.amplitudes(), &[c(1.0, 0.0), c(1.0, 0.0)]) < 1e-15);
    }

    #[test]
    fn from_local_places_phase_on_chart_component() {
        let p = LocalPoint::new(2, vec![c(0.3, -0.1), c(2.0, 0.5)]).unwrap();
        let psi = from_local(&p, 3.0, 0.9);
        assert!((psi.amplitudes()[2].arg() - 0.9).abs() < 1e-14);
        assert!((linalg::norm(psi.amplitudes()) - 3.0).abs() < 1e-14);
        let back = to_local(&psi, 2).unwrap();
        assert!(linalg::max_abs_diff(back.coords(), p.coords()) < 1e-14);
    }

    #[test]
    fn metric_at_origin_is_scaled_identity() {
        for n in [2, 3, 7] {
            let cfg = GeometryConfig::new(n, 4.0, 0.7).unwrap();
            let g = fubini_study_metric(&LocalPoint::origin(n), &cfg).g;
            let expected = CMatrix::identity(n - 1, n - 1) * c(2.0 * 0.7, 0.0);
            assert!(linalg::max_abs(&(g - expected)) < 1e-15);
        }
    }

    #[test]
    fn metric_cp1_at_unit_point() {
        // 2 [(1 + 1) - 1] / (1 + 1)^2 = 1/2
        let p = LocalPoint::new(0, vec![c(1.0, 0.0)]).unwrap();
        let g = fubini_study_metric(&p, &unit_cfg(2)).g;
        assert!((g[(0, 0)] - c(0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn connection_examples() {
        let cfg = unit_cfg(2);
        let origin = LocalPoint::origin(2);
        for v in [ConnectionVariant::LeviCivita, ConnectionVariant::Printed] {
            assert_eq!(connection(&origin, &cfg, v).get(0, 0, 0), c(0.0, 0.0));
        }
        let p = LocalPoint::new(0, vec![c(1.0, 0.0)]).unwrap();
        assert!((connection(&p, &cfg, ConnectionVariant::LeviCivita).get(0, 0, 0) - c(-1.0, 0.0)).norm() < 1e-16);
        assert!((connection(&p, &cfg, ConnectionVariant::Printed).get(0, 0, 0) - c(-2.0, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn contraction_matches_tensor() {
        let cfg = GeometryConfig::new(4, 2.5, 1.0).unwrap();
        let p = LocalPoint::new(0, vec![c(0.3, 0.2), c(-1.0, 0.4), c(0.0, -0.7)]).unwrap();
        let a = [c(1.0, -2.0), c(0.5, 0.5), c(-0.1, 0.0)];
        let b = [c(0.2, 0.1), c(-1.0, 0.3), c(0.7, 0.7)];
        let gamma = connection(&p, &cfg, ConnectionVariant::LeviCivita);
        let direct = gamma.contract(&a, &b);
        let fast = connection_contract(&p, &cfg, ConnectionVariant::LeviCivita, &a, &b);
        assert!(linalg::max_abs_diff(&direct, &fast) < 1e-15);
        assert!(gamma.max_asymmetry() == 0.0);
    }

    #[test]
    fn covariant_derivative_examples() {
        let cfg = unit_cfg(3);
        let v = vec![c(0.3, 1.0), c(-2.0, 0.0)];
        let dpi = vec![c(1.0, 1.0), c(0.5, -0.5)];
        let xi = TangentVector::new(LocalPoint::origin(3), vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let out = covariant_derivative(&xi, &v, &dpi, &cfg, ConnectionVariant::LeviCivita).unwrap();
        assert!(linalg::max_abs_diff(&out, &v) < 1e-16);

        let p = LocalPoint::new(0, vec![c(0.4, -0.2), c(1.5, 0.1)]).unwrap();
        let zero = TangentVector::new(p, vec![c(0.0, 0.0); 2]).unwrap();
        let out = covariant_derivative(&zero, &v, &dpi, &cfg, ConnectionVariant::Printed).unwrap();
        assert!(linalg::max_abs_diff(&out, &v) < 1e-16);

        let bad = covariant_derivative(&zero, &v[..1], &dpi, &cfg, ConnectionVariant::Printed);
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn covariant_derivative_cp1_scalar_recomputation() {
        let cfg = GeometryConfig::new(2, 1.7, 1.0).unwrap();
        let pi = c(0.6, -0.35);
        let (xi, dxi, dpi) = (c(-0.2, 0.9), c(1.1, 0.05), c(0.3, -0.8));
        let xi_vec = TangentVector::new(LocalPoint::new(0, vec![pi]).unwrap(), vec![xi]).unwrap();
        let out = covariant_derivative(&xi_vec, &[dxi], &[dpi], &cfg, ConnectionVariant::LeviCivita).unwrap();
        let gamma = -2.0 * pi.conj() / (1.7 * 1.7 + pi.norm_sqr());
        let expected = dxi + gamma * xi * dpi;
        assert!((out[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn geodesic_examples() {
        let cfg = unit_cfg(2);
        assert_eq!(geodesic_cp1(0.0, 0.3, &cfg).unwrap(), c(0.0, 0.0));
        assert!((geodesic_cp1(FRAC_PI_4, 0.0, &cfg).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(geodesic_cp1(FRAC_PI_2, 0.0, &cfg), Err(Error::NearPole { .. })));
    }

    #[test]
    fn geodesic_residual_vanishes_for_levi_civita_only() {
        let cfg = GeometryConfig::new(2, 3.0, 1.0).unwrap();
        let fd = Richardson::default();
        let lc = geodesic_residual_cp1(0.7, 0.4, &cfg, ConnectionVariant::LeviCivita, fd).unwrap();
        let pr = geodesic_residual_cp1(0.7, 0.4, &cfg, ConnectionVariant::Printed, fd).unwrap();
        assert!(lc.norm() < 1e-9, "{lc}");
        assert!(pr.norm() > 1.0, "{pr}");
    }

    #[test]
    fn theta_ode_constant_solution() {
        let cfg = GeometryConfig::new(2, 5.0, 1.0).unwrap();
        let samples = integrate_theta_ode(&cfg, 0.4, 0.0, 10.0, 100).unwrap();
        assert!(samples.iter().all(|s| s.theta == 0.4 && s.rate == 0.0));
    }

    #[test]
    fn theta_ode_first_integral() {
        // rate * cos(theta)^{-k} is conserved along solutions.
        let cfg = GeometryConfig::new(2, 10.0, 1.0).unwrap();
        let k = 2.0 * (1.0 + 2.0 / 10.0);
        let samples = integrate_theta_ode(&cfg, 0.1, 0.8, 20.0, 20_000).unwrap();
        let inv0 = samples[0].rate / samples[0].theta.cos().powf(k);
        for s in samples.iter().step_by(997) {
            let inv = s.rate / s.theta.cos().powf(k);
            assert!((inv - inv0).abs() < 1e-9 * inv0, "{inv} vs {inv0}");
        }
    }

    #[test]
    fn theta_ode_rejects_bad_input() {
        let cfg = GeometryConfig::default();
        assert!(integrate_theta_ode(&cfg, 0.0, 1.0, 1.0, 1).is_err());
        assert!(integrate_theta_ode(&cfg, 2.0, 1.0, 1.0, 10).is_err());
        assert!(matches!(
            integrate_theta_ode(&cfg, 0.0, 1e6, 10.0, 4),
            Err(Error::StepFailure { .. })
        ));
    }

    #[test]
    fn geodesic_angle_examples() {
        let r = 2.5;
        let vac = StateVector::with_radius(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], r).unwrap();
        assert_eq!(fs_geodesic_angle(&vac), 0.0);
        let orth = StateVector::with_radius(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], r).unwrap();
        assert!((fs_geodesic_angle(&orth) - FRAC_PI_2).abs() < 1e-15);
        let half = StateVector::with_radius(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], r).unwrap();
        assert!((fs_geodesic_angle(&half) - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(GeometryConfig::new(1, 1.0, 1.0).is_err());
        assert!(GeometryConfig::new(3, 0.0, 1.0).is_err());
        assert!(GeometryConfig::new(3, 1.0, -1.0).is_err());
        let d = GeometryConfig::default();
        assert!((d.curvature() - FINE_STRUCTURE).abs() < 1e-15);
    }
}
