//! Lorentz-radial Klein-Gordon fields and their Hermite-spectral expansion.
//!
//! The radial equation `Phi'' + (3/rho) Phi' + alpha^2 Phi = 0` has the
//! regular solution `rho^{-1} J_{-1}(alpha rho) = -J_1(alpha rho) / rho`; in the
//! timelike sector `alpha^2 -> -alpha^2` and the solution is
//! `I_1(alpha rho') / rho'`. Fields are expanded in normalized Hermite
//! functions of `y = (rho / r0)^2`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::Richardson;
use crate::geometry::FINE_STRUCTURE;
use crate::linalg::ZERO;
use crate::quadrature::{GaussHermite, GaussLegendre};
use crate::special::{self, bessel_i1, bessel_j1};

pub use crate::special::{hermite_derivative, hermite_function, hermite_functions};

/// Below this `|y|` the `y^{-1/2}` factor is replaced by its series.
const SERIES_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    #[default]
    Spacelike,
    Timelike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub alpha: f64,
    pub r0: f64,
    pub sector: Sector,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            alpha: FINE_STRUCTURE,
            r0: 1.0,
            sector: Sector::Spacelike,
        }
    }
}

impl FieldParams {
    pub fn new(alpha: f64, r0: f64) -> Result<Self> {
        let p = Self {
            alpha,
            r0,
            sector: Sector::Spacelike,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha = {} must be positive", self.alpha)));
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::InvalidInput(format!("r0 = {} must be positive", self.r0)));
        }
        Ok(())
    }
}

/// How the spacelike field `f(y)`, `y >= 0`, is continued to `y < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// `-|y|^{-1/2} I_1(alpha |y|^{1/2})`: the same power series in `y`, so
    /// `f` is entire.
    #[default]
    Analytic,
    /// `+|y|^{-1/2} I_1(alpha |y|^{1/2})`, the timelike solution itself;
    /// jumps at `y = 0`.
    TimelikeBranch,
    /// `f(|y|)`.
    Even,
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Extension::Analytic => "analytic",
            Extension::TimelikeBranch => "timelike",
            Extension::Even => "even",
        })
    }
}

impl FromStr for Extension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Extension::Analytic),
            "timelike" => Ok(Extension::TimelikeBranch),
            "even" => Ok(Extension::Even),
            other => Err(Error::ConfigInvalid(format!("unknown extension '{other}'"))),
        }
    }
}

/// `rho^{-1} J_{-1}(alpha rho)`, with the limit `-alpha/2` at the origin.
pub fn lommel_solution(params: &FieldParams, rho: f64) -> Complex64 {
    let z = params.alpha * rho;
    if z.abs() < SERIES_FLOOR {
        return Complex64::from(-0.5 * params.alpha * (1.0 - z * z / 8.0));
    }
    Complex64::from(-bessel_j1(z) / rho)
}

/// `rho'^{-1} I_{-1}(alpha rho')`, with the limit `alpha/2` at the origin.
pub fn timelike_solution(params: &FieldParams, rho_prime: f64) -> Complex64 {
    let z = params.alpha * rho_prime;
    if z.abs() < SERIES_FLOOR {
        return Complex64::from(0.5 * params.alpha * (1.0 + z * z / 8.0));
    }
    Complex64::from(bessel_i1(z) / rho_prime)
}

/// The Lommel field as a function of `y = (rho/r0)^2` on the whole line.
pub fn lommel_field(params: &FieldParams, y: f64, ext: Extension) -> Complex64 {
    if y >= 0.0 {
        return lommel_solution(params, params.r0 * y.sqrt());
    }
    let r = params.r0 * (-y).sqrt();
    match ext {
        Extension::Analytic => -timelike_solution(params, r),
        Extension::TimelikeBranch => timelike_solution(params, r),
        Extension::Even => lommel_solution(params, r),
    }
}

/// `Phi'' + (3/rho) Phi' + alpha^2 Phi` of the Lommel solution by
/// Richardson-extrapolated differences.
pub fn lommel_residual(params: &FieldParams, rho: f64, fd: Richardson) -> Complex64 {
    let f = |r: f64| lommel_solution(params, r);
    fd.second(f, rho) + 3.0 / rho * fd.first(f, rho) + params.alpha * params.alpha * f(rho)
}

/// `chi'' + (3/rho') chi' - alpha^2 chi` of the timelike solution.
pub fn timelike_residual(params: &FieldParams, rho_prime: f64, fd: Richardson) -> Complex64 {
    let f = |r: f64| timelike_solution(params, r);
    fd.second(f, rho_prime) + 3.0 / rho_prime * fd.first(f, rho_prime)
        - params.alpha * params.alpha * f(rho_prime)
}

/// Coefficients `Phi^m` of `f = sum_m Phi^m phi_m(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeExpansion {
    pub coeffs: Vec<Complex64>,
    pub params: FieldParams,
    /// Quadrature nodes (or panels times nodes) used for the final pass.
    pub nodes: usize,
}

impl ModeExpansion {
    pub fn new(coeffs: Vec<Complex64>, params: FieldParams) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("expansion needs at least one mode".into()));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("expansion coefficients must be finite".into()));
        }
        Ok(Self { coeffs, params, nodes: 0 })
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }
}

/// Gauss-Hermite node doubling schedule for [`expand`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub start: usize,
    pub max_nodes: usize,
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            start: 64,
            max_nodes: 2048,
            tol: 1e-10,
        }
    }
}

fn project(f: &(dyn Fn(f64) -> Complex64 + Sync), m: usize, n: usize) -> Vec<Complex64> {
    let gh = GaussHermite::new(n);
    let contributions: Vec<Vec<Complex64>> = gh
        .nodes
        .par_iter()
        .zip(&gh.weights)
        .map(|(&x, &w)| {
            let fx = f(x) * w;
            special::hermite_functions(m - 1, x).into_iter().map(|p| fx * p).collect()
        })
        .collect();
    let mut coeffs = vec![ZERO; m];
    for c in contributions {
        for (acc, v) in coeffs.iter_mut().zip(c) {
            *acc += v;
        }
    }
    coeffs
}

fn max_change(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `Phi^m = int phi_m(y) f(y) dy` for `m < modes`, by Gauss-Hermite
/// quadrature with the node count doubled until the coefficients settle.
pub fn expand(
    f: &(dyn Fn(f64) -> Complex64 + Sync),
    modes: usize,
    params: FieldParams,
    quad: QuadratureSpec,
) -> Result<ModeExpansion> {
    if modes == 0 {
        return Err(Error::InvalidInput("modes must be >= 1".into()));
    }
    let mut n = quad.start.max(modes + 1);
    let mut prev = project(f, modes, n);
    loop {
        if n * 2 > quad.max_nodes {
            let change = max_change(&prev, &project(f, modes, quad.max_nodes.max(n)));
            return Err(Error::QuadratureUnconverged { change, nodes: n });
        }
        n *= 2;
        let next = project(f, modes, n);
        let change = max_change(&prev, &next);
        if change < quad.tol {
            return Ok(ModeExpansion {
                coeffs: next,
                params,
                nodes: n,
            });
        }
        prev = next;
    }
}

/// [`expand`] by composite Gauss-Legendre on `[-L, 0]` and `[0, L]`, for
/// integrands with a jump or kink at `y = 0`. `L` covers the support of
/// `phi_{modes-1}` with margin; panels double until the coefficients settle.
pub fn expand_split(
    f: &(dyn Fn(f64) -> Complex64 + Sync),
    modes: usize,
    params: FieldParams,
    tol: f64,
) -> Result<ModeExpansion> {
    if modes == 0 {
        return Err(Error::InvalidInput("modes must be >= 1".into()));
    }
    let gl = GaussLegendre::new(20);
    let half = (2.0 * modes as f64 + 1.0).sqrt() + 12.0;
    let run = |panels: usize| -> Vec<Complex64> {
        let side = |a: f64, b: f64| -> Vec<Complex64> {
            let h = (b - a) / panels as f64;
            let parts: Vec<Vec<Complex64>> = (0..panels)
                .into_par_iter()
                .map(|p| {
                    let mid = a + (p as f64 + 0.5) * h;
                    let mut acc = vec![ZERO; modes];
                    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                        let y = mid + 0.5 * h * x;
                        let fy = f(y) * (0.5 * h * w);
                        for (c, ph) in acc.iter_mut().zip(special::hermite_functions(modes - 1, y)) {
                            *c += fy * ph;
                        }
                    }
                    acc
                })
                .collect();
            let mut out = vec![ZERO; modes];
            for p in parts {
                for (o, v) in out.iter_mut().zip(p) {
                    *o += v;
                }
            }
            out
        };
        side(-half, 0.0).into_iter().zip(side(0.0, half)).map(|(a, b)| a + b).collect()
    };
    let mut panels = 16;
    let mut prev = run(panels);
    for _ in 0..8 {
        panels *= 2;
        let next = run(panels);
        if max_change(&prev, &next) < tol {
            return Ok(ModeExpansion {
                coeffs: next,
                params,
                nodes: 2 * panels * gl.nodes.len(),
            });
        }
        prev = next;
    }
    let change = max_change(&prev, &run(panels * 2));
    Err(Error::QuadratureUnconverged {
        change,
        nodes: 2 * panels * gl.nodes.len(),
    })
}

/// Expansion of the Lommel field, by Gauss-Hermite for the analytic
/// continuation and by split Gauss-Legendre otherwise.
pub fn lommel_expansion(params: &FieldParams, modes: usize, ext: Extension) -> Result<ModeExpansion> {
    params.validate()?;
    let p = *params;
    let f = move |y: f64| lommel_field(&p, y, ext);
    match ext {
        Extension::Analytic => expand(&f, modes, p, QuadratureSpec::default()),
        _ => expand_split(&f, modes, p, 1e-10),
    }
}

/// `sum_{k < M} Phi^k phi_k(y)`.
pub fn reconstruct(exp: &ModeExpansion, y: f64) -> Complex64 {
    let phi = special::hermite_functions(exp.modes() - 1, y);
    exp.coeffs.iter().zip(phi).map(|(c, p)| c * p).sum()
}

/// `sqrt(int_a^b |f - reconstruct|^2 dy)` on a dense Gauss-Legendre grid.
pub fn l2_truncation_error(exp: &ModeExpansion, f: &dyn Fn(f64) -> Complex64, window: (f64, f64)) -> f64 {
    let gl = GaussLegendre::new(16);
    let panels = (8.0 * (window.1 - window.0)).ceil().max(1.0) as usize * 4;
    let v: f64 = gl.integrate(window.0, window.1, panels, |y| (f(y) - reconstruct(exp, y)).norm_sqr());
    v.sqrt()
}

/// Field samples over a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarFieldProfile {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub params: FieldParams,
}

impl ScalarFieldProfile {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>, params: FieldParams) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("profile grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values, params })
    }

    /// Samples of an expansion at `y = (rho / r0)^2` over a `rho` grid.
    pub fn from_expansion(exp: &ModeExpansion, rho: Vec<f64>) -> Result<Self> {
        let r0 = exp.params.r0;
        let values = rho.iter().map(|r| reconstruct(exp, (r / r0).powi(2))).collect();
        Self::new(rho, values, exp.params)
    }
}

/// Spacetime gradient and time derivative of `phi_n(y)` at `(t, x)`, with
/// `y = (t^2 - |x|^2) / r0^2` (`c = 1`).
pub fn basis_derivatives(n: usize, x: [f64; 3], t: f64, params: &FieldParams) -> ([f64; 3], f64) {
    let r2 = params.r0 * params.r0;
    let y = (t * t - x.iter().map(|v| v * v).sum::<f64>()) / r2;
    let d = special::hermite_derivative(n, y);
    (x.map(|xi| -2.0 * xi / r2 * d), 2.0 * t / r2 * d)
}

/// The same derivatives as printed in closed form with raw Hermite
/// polynomials, `e^{-y^2/2} (y H_n - 2n H_{n-1}) / (sqrt(2^n n!) sqrt(pi))`
/// with prefactors `-2x/r0^2` and `+2t/r0^2`. Rewritten through
/// `e^{-y^2/2} H_n / sqrt(2^n n!) = pi^{1/4} phi_n`.
pub fn basis_derivatives_printed(n: usize, x: [f64; 3], t: f64, params: &FieldParams) -> ([f64; 3], f64) {
    let r2 = params.r0 * params.r0;
    let y = (t * t - x.iter().map(|v| v * v).sum::<f64>()) / r2;
    let phi = special::hermite_functions(n, y);
    let lower = if n > 0 { (2.0 * n as f64).sqrt() * phi[n - 1] } else { 0.0 };
    let bracket = std::f64::consts::PI.powf(0.25) * (y * phi[n] - lower) / std::f64::consts::PI.sqrt();
    (x.map(|xi| -2.0 * xi / r2 * bracket), 2.0 * t / r2 * bracket)
}
