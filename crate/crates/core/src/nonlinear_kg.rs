//! Geodesic perturbation `Delta Psi` of the mode coefficients, the perturbed
//! Lagrangian density, and the resulting nonlinear radial Klein-Gordon
//! problem with a damped fixed-point droplet solver.
//!
//! The field equation is reduced to the Lorentz-radial variable: every
//! spacetime derivative acts through `y = (rho / r0)^2`, so the d'Alembertian
//! becomes `L u = u'' + (3/rho) u'` (and `4 u''` at the origin). The
//! variational quotients of the perturbation are read as the Wirtinger
//! Jacobian `J_{nm} = d Delta Psi^n / d Psi^m` of the coefficient map, which
//! turns the mixed terms into the field
//! `W(rho) = sum_m (J^T conj(Psi))_m phi_m(y)`. The residual sampled on a
//! radial grid is
//!
//! ```text
//! L[(Psi + Delta)^*] + s alpha^2 [(Psi + Delta)^* + W] + L[W]
//! ```
//!
//! with `s = +1` in the spacelike and `s = -1` in the timelike sector.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coset::{self, DEFAULT_RATE};
use crate::dynvars::{hilbert_index, local_components_closed};
use crate::error::{Error, Result};
use crate::fd::stencil_weights;
use crate::geometry::{self, ConnectionVariant, GeometryConfig, StateVector, TangentVector};
use crate::linalg::{self, CMatrix, ZERO};
use crate::quadrature::GaussLegendre;
use crate::scalar_field::{
    basis_derivatives, lommel_solution, timelike_solution, FieldParams, ModeExpansion, ScalarFieldProfile, Sector,
};
use crate::special::hermite_functions;

/// Fewest grid points for which every radial stencil is fourth order.
pub const MIN_POINTS: usize = 6;

/// Which expression for `Delta Psi` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaForm {
    /// `-Psi^0 Gamma^i_{km} xi^k dpi^m tau`.
    #[default]
    General,
    /// `-g Psi^0 tau^2 (1 + |Psi^0|^2/R^2)^{-1/2} Gamma^i_{km} xi^k Psi^m`.
    SmallTau,
}

impl fmt::Display for DeltaForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeltaForm::General => "general",
            DeltaForm::SmallTau => "small_tau",
        })
    }
}

impl FromStr for DeltaForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(DeltaForm::General),
            "small_tau" | "small-tau" => Ok(DeltaForm::SmallTau),
            other => Err(Error::ConfigInvalid(format!("unknown delta form '{other}'"))),
        }
    }
}

/// `Delta Psi^i` for the coefficient vector `psi`, with `Gamma` taken at the
/// base point of `xi`. The chart component is left unperturbed.
#[allow(clippy::too_many_arguments)]
pub fn delta_psi(
    psi: &[Complex64],
    xi: &TangentVector,
    dpi: &[Complex64],
    tau: f64,
    g: f64,
    cfg: &GeometryConfig,
    variant: ConnectionVariant,
    form: DeltaForm,
) -> Result<Vec<Complex64>> {
    let n = xi.xi.len();
    if psi.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: psi.len(),
        });
    }
    if dpi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dpi.len() });
    }
    let b = xi.base.chart();
    let psi0 = psi[b];
    let (second, scale): (Vec<Complex64>, Complex64) = match form {
        DeltaForm::General => (dpi.to_vec(), -psi0 * tau),
        DeltaForm::SmallTau => {
            let tail = (0..n).map(|i| psi[hilbert_index(b, i)]).collect();
            let damp = (1.0 + psi0.norm_sqr() / (cfg.radius * cfg.radius)).sqrt();
            (tail, -psi0 * (g * tau * tau / damp))
        }
    };
    let inc = geometry::connection_contract(&xi.base, cfg, variant, &xi.xi, &second);
    let mut out = vec![ZERO; n + 1];
    for (i, v) in inc.into_iter().enumerate() {
        out[hilbert_index(b, i)] = v * scale;
    }
    Ok(out)
}

/// Parameters of the geodesic perturbation loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub tau: f64,
    pub g: f64,
    pub form: DeltaForm,
    pub variant: ConnectionVariant,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            tau: 0.1,
            g: DEFAULT_RATE,
            form: DeltaForm::General,
            variant: ConnectionVariant::LeviCivita,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub delta_coeffs: Vec<Complex64>,
    pub tau: f64,
    pub g: f64,
    pub cfg: GeometryConfig,
}

/// `Delta Psi` of a coefficient vector through its own geodesic data:
/// the state `R Psi / |Psi|` gives the coset flow from the vacuum, whose
/// polarization operator yields `xi` at `pi = Psi^i / Psi^0`, and `xi` is
/// also the transported displacement `dpi`. The vacuum itself has no
/// geodesic direction and gets `Delta Psi = 0`.
pub fn geodesic_delta(coeffs: &[Complex64], spec: &PerturbationSpec, cfg: &GeometryConfig) -> Result<Perturbation> {
    if coeffs.len() != cfg.dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            got: coeffs.len(),
        });
    }
    let done = |delta_coeffs| Perturbation {
        delta_coeffs,
        tau: spec.tau,
        g: spec.g,
        cfg: *cfg,
    };
    let phi = StateVector::with_radius(coeffs.to_vec(), cfg.radius)?;
    let pol = match coset::polarization_operator(&phi, spec.g) {
        Ok(p) => p,
        Err(Error::AtVacuum { .. }) => return Ok(done(vec![ZERO; coeffs.len()])),
        Err(e) => return Err(e),
    };
    let p = geometry::to_local(&phi, 0)?;
    let xi = local_components_closed(&p, &pol, cfg)?;
    let dpi = xi.xi.clone();
    let delta = delta_psi(coeffs, &xi, &dpi, spec.tau, spec.g, cfg, spec.variant, spec.form)?;
    Ok(done(delta))
}

/// `J_{nm} = d map^n / d c^m = (d/dx_m - i d/dy_m) map^n / 2` by central
/// differences with a step relative to `|c|`.
pub fn wirtinger_jacobian<F>(map: &F, c: &[Complex64]) -> Result<CMatrix>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>> + ?Sized,
{
    let m = c.len();
    let h = 1e-5 * linalg::norm(c).max(f64::MIN_POSITIVE);
    let mut jac = CMatrix::zeros(m, m);
    let mut probe = c.to_vec();
    for k in 0..m {
        let mut column = vec![ZERO; m];
        for (dir, weight) in [(Complex64::from(1.0), Complex64::from(0.5)), (Complex64::new(0.0, 1.0), Complex64::new(0.0, -0.5))] {
            probe[k] = c[k] + dir * h;
            let plus = map(&probe)?;
            probe[k] = c[k] - dir * h;
            let minus = map(&probe)?;
            probe[k] = c[k];
            for (col, (p, q)) in column.iter_mut().zip(plus.iter().zip(&minus)) {
                *col += weight * (p - q) / (2.0 * h);
            }
        }
        for (n, v) in column.into_iter().enumerate() {
            jac[(n, k)] = v;
        }
    }
    Ok(jac)
}

/// `(J^T conj(c))_m`, the coefficients of the mixed-term field `W`.
pub fn mixed_coefficients(jac: &CMatrix, c: &[Complex64]) -> Vec<Complex64> {
    (0..jac.ncols())
        .map(|m| c.iter().enumerate().map(|(n, cn)| cn.conj() * jac[(n, m)]).sum())
        .collect()
}

/// Event in Minkowski space, `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: [f64; 3],
}

fn check_pair(psi: &[Complex64], delta: &[Complex64]) -> Result<()> {
    if psi.len() != delta.len() {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            got: delta.len(),
        });
    }
    if psi.is_empty() {
        return Err(Error::InvalidInput("empty coefficient vector".into()));
    }
    Ok(())
}

/// `(A, dA/dt, grad A)` of `A = sum_m a^m phi_m(y)` at `point`.
fn field_jet(a: &[Complex64], point: &SpacetimePoint, params: &FieldParams) -> (Complex64, Complex64, [Complex64; 3]) {
    let y = (point.t * point.t - point.x.iter().map(|v| v * v).sum::<f64>()) / (params.r0 * params.r0);
    let phi = hermite_functions(a.len() - 1, y);
    let mut value = ZERO;
    let mut dt = ZERO;
    let mut grad = [ZERO; 3];
    for (m, am) in a.iter().enumerate() {
        let (g, t) = basis_derivatives(m, point.x, point.t, params);
        value += am * phi[m];
        dt += am * t;
        for k in 0..3 {
            grad[k] += am * g[k];
        }
    }
    (value, dt, grad)
}

/// `L' = (|A_t|^2 - |grad A|^2)/2 - alpha^2 |A|^2 / 2` for the perturbed
/// field `A = sum_m (Psi + Delta Psi)^m phi_m(y)`; each term is the
/// factorized form of a Hermitian bilinear block in the coefficients.
pub fn perturbed_lagrangian(
    psi: &[Complex64],
    delta: &[Complex64],
    point: &SpacetimePoint,
    params: &FieldParams,
) -> Result<f64> {
    check_pair(psi, delta)?;
    let a: Vec<Complex64> = psi.iter().zip(delta).map(|(p, d)| p + d).collect();
    let (value, dt, grad) = field_jet(&a, point, params);
    let grad2: f64 = grad.iter().map(Complex64::norm_sqr).sum();
    Ok(0.5 * (dt.norm_sqr() - grad2) - 0.5 * params.alpha * params.alpha * value.norm_sqr())
}

/// `d/d eps L'(psi, delta + eps dir)` at `eps = 0`.
pub fn lagrangian_variation(
    psi: &[Complex64],
    delta: &[Complex64],
    dir: &[Complex64],
    point: &SpacetimePoint,
    params: &FieldParams,
) -> Result<f64> {
    check_pair(psi, delta)?;
    check_pair(psi, dir)?;
    let a: Vec<Complex64> = psi.iter().zip(delta).map(|(p, d)| p + d).collect();
    let (va, ta, ga) = field_jet(&a, point, params);
    let (vd, td, gd) = field_jet(dir, point, params);
    let grad: f64 = ga.iter().zip(&gd).map(|(x, y)| (x.conj() * y).re).sum();
    Ok((ta.conj() * td).re - grad - params.alpha * params.alpha * (va.conj() * vd).re)
}

/// `|dPhi/drho|^2 / 2 - alpha^2 |Phi|^2 / 2`.
pub fn radial_lagrangian(phi: Complex64, dphi_drho: Complex64, params: &FieldParams) -> f64 {
    0.5 * dphi_drho.norm_sqr() - 0.5 * params.alpha * params.alpha * phi.norm_sqr()
}

/// Uniform grid `rho_j = j h` on `[0, rho_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub rho_max: f64,
    pub points: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self {
            rho_max: 4.0,
            points: 161,
        }
    }
}

impl RadialGrid {
    pub fn new(rho_max: f64, points: usize) -> Result<Self> {
        let g = Self { rho_max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < MIN_POINTS {
            return Err(Error::GridTooCoarse {
                points: self.points,
                required: MIN_POINTS,
            });
        }
        if !(self.rho_max > 0.0 && self.rho_max.is_finite()) {
            return Err(Error::InvalidInput(format!("rho_max = {} must be positive", self.rho_max)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.rho_max / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|j| j as f64 * h).collect()
    }

    /// Same interval with twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            rho_max: self.rho_max,
            points: 2 * self.points - 1,
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    idx: Vec<usize>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

/// Fourth-order difference operators on a [`RadialGrid`] for fields even in
/// `rho`: centred five-point stencils reflected through the origin, and
/// one-sided six-point stencils at the outer edge.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    rho: Vec<f64>,
    rows: Vec<Row>,
}

impl RadialOperator {
    pub fn new(grid: &RadialGrid) -> Result<Self> {
        grid.validate()?;
        let n = grid.points;
        let h = grid.spacing();
        let rows = (0..n)
            .map(|j| {
                let offsets: Vec<i64> = if j + 2 < n {
                    (-2..=2).collect()
                } else {
                    (0..6).map(|k| (n - 6 + k) as i64 - j as i64).collect()
                };
                let x: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
                let w = stencil_weights(&x, 2);
                Row {
                    idx: offsets.iter().map(|&o| (j as i64 + o).unsigned_abs() as usize).collect(),
                    d1: w[1].iter().map(|v| v / h).collect(),
                    d2: w[2].iter().map(|v| v / (h * h)).collect(),
                }
            })
            .collect();
        Ok(Self { rho: grid.nodes(), rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Coefficients of `L` in row `j`.
    fn laplacian_row(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let row = &self.rows[j];
        let rho = self.rho[j];
        row.idx.iter().zip(row.d1.iter().zip(&row.d2)).map(move |(&k, (&a, &b))| {
            if j == 0 {
                (k, 4.0 * b)
            } else {
                (k, b + 3.0 / rho * a)
            }
        })
    }

    fn check(&self, u: &[Complex64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: u.len(),
            });
        }
        Ok(())
    }

    pub fn derivative(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(u)?;
        Ok(self.rows.iter().map(|r| r.idx.iter().zip(&r.d1).map(|(&k, w)| u[k] * w).sum()).collect())
    }

    /// `u'' + 3u'/rho`, with `4u''` at the origin.
    pub fn laplacian(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(u)?;
        Ok((0..self.len()).map(|j| self.laplacian_row(j).map(|(k, w)| u[k] * w).sum()).collect())
    }
}

fn sector_sign(params: &FieldParams) -> f64 {
    match params.sector {
        Sector::Spacelike => 1.0,
        Sector::Timelike => -1.0,
    }
}

/// `K u = L u + s alpha^2 u` on the grid.
pub fn linear_kg_residual(values: &[Complex64], grid: &RadialGrid, params: &FieldParams) -> Result<Vec<Complex64>> {
    let op = RadialOperator::new(grid)?;
    apply_kg(&op, values, params)
}

fn apply_kg(op: &RadialOperator, values: &[Complex64], params: &FieldParams) -> Result<Vec<Complex64>> {
    let m2 = sector_sign(params) * params.alpha * params.alpha;
    Ok(op.laplacian(values)?.into_iter().zip(values).map(|(l, v)| l + v * m2).collect())
}

/// `sum_m c^m phi_m((rho_j / r0)^2)` at every grid node.
pub fn sample_expansion(coeffs: &[Complex64], params: &FieldParams, grid: &RadialGrid) -> Vec<Complex64> {
    if coeffs.is_empty() {
        return vec![ZERO; grid.points];
    }
    grid.nodes()
        .iter()
        .map(|r| {
            let phi = hermite_functions(coeffs.len() - 1, (r / params.r0).powi(2));
            coeffs.iter().zip(phi).map(|(c, p)| c * p).sum()
        })
        .collect()
}

/// The linear radial solution of the field's sector on the grid.
pub fn linear_profile(params: &FieldParams, grid: &RadialGrid) -> Vec<Complex64> {
    grid.nodes()
        .iter()
        .map(|&r| match params.sector {
            Sector::Spacelike => lommel_solution(params, r),
            Sector::Timelike => timelike_solution(params, r),
        })
        .collect()
}

/// `Delta(rho)` and the mixed-term field `W(rho)` of a perturbation map at
/// `coeffs`.
fn perturbation_fields<F>(
    coeffs: &[Complex64],
    delta_map: &F,
    params: &FieldParams,
    grid: &RadialGrid,
) -> Result<(Vec<Complex64>, Vec<Complex64>)>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>> + ?Sized,
{
    let delta = delta_map(coeffs)?;
    if delta.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: coeffs.len(),
            got: delta.len(),
        });
    }
    let jac = wirtinger_jacobian(delta_map, coeffs)?;
    let w = mixed_coefficients(&jac, coeffs);
    Ok((sample_expansion(&delta, params, grid), sample_expansion(&w, params, grid)))
}

/// Residual of the perturbed radial equation for a field sampled on the
/// grid, with the perturbation evaluated at the coefficients `coeffs`.
pub fn kg_residual_profile<F>(
    values: &[Complex64],
    coeffs: &[Complex64],
    delta_map: &F,
    params: &FieldParams,
    grid: &RadialGrid,
) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>> + ?Sized,
{
    let op = RadialOperator::new(grid)?;
    op.check(values)?;
    let (delta, w) = perturbation_fields(coeffs, delta_map, params, grid)?;
    let field: Vec<Complex64> = values.iter().zip(delta.iter().zip(&w)).map(|(v, (d, w))| (v + d).conj() + w).collect();
    apply_kg(&op, &field, params)
}

/// [`kg_residual_profile`] for the field `sum_m c^m phi_m(y)` itself.
pub fn kg_residual<F>(coeffs: &[Complex64], delta_map: &F, params: &FieldParams, grid: &RadialGrid) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>> + ?Sized,
{
    kg_residual_profile(&sample_expansion(coeffs, params, grid), coeffs, delta_map, params, grid)
}

/// The perturbation map that is identically zero.
pub fn zero_delta(c: &[Complex64]) -> Result<Vec<Complex64>> {
    Ok(vec![ZERO; c.len()])
}

/// Coefficients of the even extension `f(y) = f(-y)` of a radial profile,
/// `Phi^m = (1 + (-1)^m) int_0^{y_max} f phi_m dy`, with `f` the cubic
/// Hermite interpolant of the samples and their stencil derivatives.
pub fn project_profile(values: &[Complex64], grid: &RadialGrid, params: &FieldParams, modes: usize) -> Result<Vec<Complex64>> {
    let op = RadialOperator::new(grid)?;
    let slopes = op.derivative(values)?;
    if modes == 0 {
        return Err(Error::InvalidInput("modes must be >= 1".into()));
    }
    let h = grid.spacing();
    let gl = GaussLegendre::new(8);
    let r2 = params.r0 * params.r0;
    let parts: Vec<Vec<Complex64>> = (0..grid.points - 1)
        .into_par_iter()
        .map(|j| {
            let mut acc = vec![ZERO; modes];
            let a = j as f64 * h;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let s = 0.5 * (1.0 + x);
                let rho = a + s * h;
                let (h00, h10) = (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s);
                let (h01, h11) = (-2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
                let f = values[j] * h00 + slopes[j] * (h10 * h) + values[j + 1] * h01 + slopes[j + 1] * (h11 * h);
                let jacobian = 0.5 * h * w * 2.0 * rho / r2;
                for (c, p) in acc.iter_mut().zip(hermite_functions(modes - 1, rho * rho / r2)) {
                    *c += f * (p * jacobian);
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
    for (m, o) in out.iter_mut().enumerate() {
        *o *= if m % 2 == 0 { 2.0 } else { 0.0 };
    }
    Ok(out)
}

/// Composite Simpson rule over the grid (trapezoid on a trailing odd panel).
fn radial_integral(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    let even = if (n - 1).is_multiple_of(2) { n } else { n - 1 };
    let mut s = 0.0;
    for k in (0..even - 1).step_by(2) {
        s += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
    }
    if even < n {
        s += 0.5 * h * (f[n - 2] + f[n - 1]);
    }
    s
}

/// `|a - b|_{L^2(rho^3 drho)} / |b|_{L^2(rho^3 drho)}`.
pub fn relative_l2(a: &[Complex64], b: &[Complex64], grid: &RadialGrid) -> f64 {
    let rho = grid.nodes();
    let diff: Vec<f64> = a.iter().zip(b).zip(&rho).map(|((x, y), r)| (x - y).norm_sqr() * r.powi(3)).collect();
    let base: Vec<f64> = b.iter().zip(&rho).map(|(y, r)| y.norm_sqr() * r.powi(3)).collect();
    let h = grid.spacing();
    (radial_integral(&diff, h) / radial_integral(&base, h)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropletScheme {
    pub damping: f64,
    pub max_iter: usize,
    /// Bound on the relative residual `rms(res) / (alpha^2 rms(u))`.
    pub tol: f64,
    pub grid: RadialGrid,
    pub perturbation: PerturbationSpec,
}

impl Default for DropletScheme {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 200,
            tol: 1e-6,
            grid: RadialGrid::default(),
            perturbation: PerturbationSpec::default(),
        }
    }
}

/// Consecutive residual increases after which the iteration is abandoned.
pub const DIVERGENCE_RUN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropletDiagnostics {
    pub residual: f64,
    pub iterations: usize,
    /// `sqrt(2 pi^2 int |u|^2 rho^3 drho)`.
    pub l2_norm: f64,
    /// `sqrt(int |u|^2 rho^5 / int |u|^2 rho^3)`.
    pub width: f64,
    /// `2 pi^2 int (|u'|^2/2 - s alpha^2 |u|^2/2) rho^3 drho`.
    pub action: f64,
    pub converged: bool,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropletSolution {
    pub coeffs: Vec<Complex64>,
    pub profile: ScalarFieldProfile,
    pub diagnostics: DropletDiagnostics,
}

struct Iterate<'a> {
    op: &'a RadialOperator,
    params: FieldParams,
    grid: RadialGrid,
    spec: PerturbationSpec,
    cfg: GeometryConfig,
}

impl Iterate<'_> {
    fn delta_map(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(geodesic_delta(c, &self.spec, &self.cfg)?.delta_coeffs)
    }

    /// `Delta + conj(W)` on the grid, the shift in the conjugated equation.
    fn shift(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        let (delta, w) = perturbation_fields(c, &|x: &[Complex64]| self.delta_map(x), &self.params, &self.grid)?;
        Ok(delta.iter().zip(w).map(|(d, w)| d + w.conj()).collect())
    }

    /// Relative residual of the profile `u` over every node but the outer
    /// boundary, where the value is imposed.
    fn residual(&self, u: &[Complex64], shift: &[Complex64]) -> Result<f64> {
        let total: Vec<Complex64> = u.iter().zip(shift).map(|(a, b)| a + b).collect();
        let res = apply_kg(self.op, &total, &self.params)?;
        let n = u.len() - 1;
        let rms = |v: &[Complex64]| (v[..n].iter().map(Complex64::norm_sqr).sum::<f64>() / n as f64).sqrt();
        let scale = self.params.alpha * self.params.alpha * rms(u);
        let r = rms(&res);
        Ok(if scale > 0.0 { r / scale } else { r })
    }
}

fn diagnostics(u: &[Complex64], op: &RadialOperator, grid: &RadialGrid, params: &FieldParams) -> Result<(f64, f64, f64)> {
    let rho = grid.nodes();
    let du = op.derivative(u)?;
    let h = grid.spacing();
    let m3: Vec<f64> = u.iter().zip(&rho).map(|(v, r)| v.norm_sqr() * r.powi(3)).collect();
    let m5: Vec<f64> = u.iter().zip(&rho).map(|(v, r)| v.norm_sqr() * r.powi(5)).collect();
    let s = sector_sign(params) * params.alpha * params.alpha;
    let lag: Vec<f64> = u
        .iter()
        .zip(&du)
        .zip(&rho)
        .map(|((v, d), r)| (0.5 * d.norm_sqr() - 0.5 * s * v.norm_sqr()) * r.powi(3))
        .collect();
    let i3 = radial_integral(&m3, h);
    let width = if i3 > 0.0 { (radial_integral(&m5, h) / i3).sqrt() } else { 0.0 };
    Ok(((2.0 * PI * PI * i3).sqrt(), width, 2.0 * PI * PI * radial_integral(&lag, h)))
}

/// Damped fixed-point iteration for the perturbed radial equation.
///
/// Each step computes `Delta Psi` and the mixed-term field from the current
/// coefficients through their geodesic data, then solves the linear radial
/// boundary value problem `K u = -K[Delta + conj(W)]` with `u'(0) = 0` and
/// `u(rho_max)` equal to the linear solution there. The new profile is mixed
/// in with weight `damping` and projected back onto the modes. A run stops
/// when the relative residual drops below `tol`, after `max_iter` steps, or
/// after [`DIVERGENCE_RUN`] consecutive residual increases; non-convergence
/// is reported in the diagnostics, not as an error.
pub fn solve_droplet(
    params: &FieldParams,
    cfg: &GeometryConfig,
    init: &ModeExpansion,
    scheme: &DropletScheme,
) -> Result<DropletSolution> {
    params.validate()?;
    cfg.validate()?;
    if cfg.dim != init.modes() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            got: init.modes(),
        });
    }
    if !(scheme.damping > 0.0 && scheme.damping <= 1.0) {
        return Err(Error::InvalidInput(format!("damping {} must lie in (0, 1]", scheme.damping)));
    }
    let grid = scheme.grid;
    let op = RadialOperator::new(&grid)?;
    let it = Iterate {
        op: &op,
        params: *params,
        grid,
        spec: scheme.perturbation,
        cfg: *cfg,
    };
    let n = grid.points;
    let boundary = *linear_profile(params, &grid).last().expect("grid has points");

    let mut a = DMatrix::<f64>::zeros(n, n);
    let m2 = sector_sign(params) * params.alpha * params.alpha;
    for j in 0..n - 1 {
        for (k, w) in op.laplacian_row(j) {
            a[(j, k)] += w;
        }
        a[(j, j)] += m2;
    }
    a[(n - 1, n - 1)] = 1.0;
    let lu = a.lu();

    let mut coeffs = init.coeffs.clone();
    let mut u = sample_expansion(&coeffs, params, &grid);
    let mut shift = it.shift(&coeffs)?;
    let mut residual = it.residual(&u, &shift)?;
    let mut iterations = 0;
    let mut increases = 0;
    let mut diverged = false;
    while residual >= scheme.tol && iterations < scheme.max_iter {
        let src = apply_kg(&op, &shift, params)?;
        let mut re = nalgebra::DVector::<f64>::zeros(n);
        let mut im = nalgebra::DVector::<f64>::zeros(n);
        for j in 0..n - 1 {
            re[j] = -src[j].re;
            im[j] = -src[j].im;
        }
        re[n - 1] = boundary.re;
        im[n - 1] = boundary.im;
        let (Some(re), Some(im)) = (lu.solve(&re), lu.solve(&im)) else {
            return Err(Error::InvalidInput("radial boundary value problem is singular".into()));
        };
        for (j, v) in u.iter_mut().enumerate() {
            *v = *v * (1.0 - scheme.damping) + Complex64::new(re[j], im[j]) * scheme.damping;
        }
        coeffs = project_profile(&u, &grid, params, init.modes())?;
        shift = it.shift(&coeffs)?;
        let next = it.residual(&u, &shift)?;
        iterations += 1;
        increases = if next > residual { increases + 1 } else { 0 };
        residual = next;
        if increases >= DIVERGENCE_RUN || !residual.is_finite() {
            diverged = true;
            break;
        }
    }
    let (l2_norm, width, action) = diagnostics(&u, &op, &grid, params)?;
    Ok(DropletSolution {
        coeffs,
        profile: ScalarFieldProfile::new(grid.nodes(), u, *params)?,
        diagnostics: DropletDiagnostics {
            residual,
            iterations,
            l2_norm,
            width,
            action,
            converged: residual < scheme.tol,
            diverged,
        },
    })
}

/// `steps + 1` equally spaced values covering one geodesic period `2 pi / g`.
pub fn period_taus(g: f64, steps: usize) -> Vec<f64> {
    let period = 2.0 * PI / g;
    (0..=steps).map(|k| period * k as f64 / steps.max(1) as f64).collect()
}

/// Independent droplet solves, one per `tau`, run in parallel.
pub fn tau_sweep(
    params: &FieldParams,
    cfg: &GeometryConfig,
    init: &ModeExpansion,
    scheme: &DropletScheme,
    taus: &[f64],
) -> Vec<Result<DropletSolution>> {
    taus.par_iter()
        .map(|&tau| {
            let mut s = *scheme;
            s.perturbation.tau = tau;
            solve_droplet(params, cfg, init, &s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LocalPoint, FINE_STRUCTURE};
    use crate::scalar_field::{lommel_expansion, Extension};

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_tangent(dim: usize) -> TangentVector {
        let coords: Vec<Complex64> = (0..dim - 1).map(|k| z(0.2 + 0.1 * k as f64, -0.15 * k as f64)).collect();
        let xi: Vec<Complex64> = (0..dim - 1).map(|k| z(0.5 - 0.1 * k as f64, 0.3)).collect();
        TangentVector::new(LocalPoint::new(0, coords).unwrap(), xi).unwrap()
    }

    #[test]
    fn delta_vanishes_at_zero_tau_and_zero_xi() {
        let cfg = GeometryConfig::new(4, 2.0, 1.0).unwrap();
        let xi = sample_tangent(4);
        let psi = vec![z(1.0, 0.2), z(0.3, 0.0), z(-0.2, 0.1), z(0.05, 0.4)];
        for form in [DeltaForm::General, DeltaForm::SmallTau] {
            let d = delta_psi(&psi, &xi, &xi.xi, 0.0, 1.0, &cfg, ConnectionVariant::LeviCivita, form).unwrap();
            assert!(d.iter().all(|v| *v == ZERO));
            let zero = TangentVector::new(xi.base.clone(), vec![ZERO; 3]).unwrap();
            let d = delta_psi(&psi, &zero, &xi.xi, 0.7, 1.0, &cfg, ConnectionVariant::LeviCivita, form).unwrap();
            assert!(d.iter().all(|v| *v == ZERO));
            let d = delta_psi(&psi, &xi, &xi.xi, 0.7, 1.0, &cfg, ConnectionVariant::LeviCivita, form).unwrap();
            assert_eq!(d[0], ZERO);
            assert!(d[1..].iter().any(|v| v.norm() > 0.0));
        }
    }

    #[test]
    fn delta_scales_as_inverse_square_radius() {
        let xi = sample_tangent(3);
        let psi = vec![z(0.8, 0.0), z(0.3, 0.1), z(-0.2, 0.2)];
        let radii: Vec<f64> = (0..13).map(|k| 10f64.powf(1.0 + 0.25 * k as f64)).collect();
        for form in [DeltaForm::General, DeltaForm::SmallTau] {
            let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
            for &r in &radii {
                let cfg = GeometryConfig::new(3, r, 1.0).unwrap();
                let d = delta_psi(&psi, &xi, &xi.xi, 0.3, 1.0, &cfg, ConnectionVariant::LeviCivita, form).unwrap();
                let (x, y) = (r.ln(), linalg::norm(&d).ln());
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            let k = radii.len() as f64;
            let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
            assert!((slope + 2.0).abs() < 0.05, "{form}: {slope}");
        }
    }

    #[test]
    fn delta_in_other_chart_leaves_chart_component() {
        let cfg = GeometryConfig::new(3, 1.0, 1.0).unwrap();
        let base = LocalPoint::new(2, vec![z(0.3, 0.1), z(-0.2, 0.4)]).unwrap();
        let xi = TangentVector::new(base, vec![z(0.1, 0.2), z(0.3, -0.1)]).unwrap();
        let psi = vec![z(0.3, 0.0), z(0.1, 0.1), z(0.9, 0.0)];
        let d = delta_psi(&psi, &xi, &xi.xi, 0.2, 1.0, &cfg, ConnectionVariant::LeviCivita, DeltaForm::General).unwrap();
        assert_eq!(d[2], ZERO);
        assert!(d[0].norm() > 0.0 && d[1].norm() > 0.0);
    }

    #[test]
    fn geodesic_delta_at_vacuum_is_zero() {
        let cfg = GeometryConfig::new(3, 1.0, 1.0).unwrap();
        let p = geodesic_delta(&[z(2.0, 0.0), ZERO, ZERO], &PerturbationSpec::default(), &cfg).unwrap();
        assert!(p.delta_coeffs.iter().all(|v| *v == ZERO));
        let p = geodesic_delta(&[z(0.9, 0.1), z(0.2, 0.0), z(0.0, 0.3)], &PerturbationSpec::default(), &cfg).unwrap();
        assert_eq!(p.delta_coeffs[0], ZERO);
        assert!(linalg::norm(&p.delta_coeffs) > 0.0);
    }

    #[test]
    fn geodesic_delta_is_homogeneous() {
        let cfg = GeometryConfig::new(3, 1.5, 1.0).unwrap();
        let c = [z(0.9, 0.1), z(0.2, 0.0), z(0.0, 0.3)];
        let spec = PerturbationSpec::default();
        let base = geodesic_delta(&c, &spec, &cfg).unwrap().delta_coeffs;
        let lam = z(0.0, 2.5);
        let scaled: Vec<Complex64> = c.iter().map(|v| v * lam).collect();
        let d = geodesic_delta(&scaled, &spec, &cfg).unwrap().delta_coeffs;
        for (a, b) in d.iter().zip(&base) {
            assert!((a - b * lam).norm() < 1e-14);
        }
    }

    #[test]
    fn wirtinger_jacobian_of_simple_maps() {
        // f(c) = (c0^2, conj(c1))
        let f = |c: &[Complex64]| Ok(vec![c[0] * c[0], c[1].conj()]);
        let c = [z(0.3, 0.4), z(-0.2, 0.1)];
        let j = wirtinger_jacobian(&f, &c).unwrap();
        assert!((j[(0, 0)] - c[0] * 2.0).norm() < 1e-9);
        assert!(j[(1, 1)].norm() < 1e-9);
        assert!(j[(0, 1)].norm() < 1e-12 && j[(1, 0)].norm() < 1e-12);
    }

    fn grid() -> RadialGrid {
        RadialGrid::new(3.0, 121).unwrap()
    }

    #[test]
    fn coarse_grid_is_rejected() {
        assert!(matches!(RadialGrid::new(1.0, 5), Err(Error::GridTooCoarse { points: 5, required: 6 })));
        let g = RadialGrid { rho_max: 1.0, points: 3 };
        assert!(kg_residual(&[ZERO; 2], &zero_delta, &FieldParams::default(), &g).is_err());
    }

    #[test]
    fn laplacian_of_radial_polynomials() {
        let g = RadialGrid::new(2.0, 41).unwrap();
        let op = RadialOperator::new(&g).unwrap();
        let rho = g.nodes();
        // L(rho^2) = 8, L(rho^4) = 24 rho^2
        let u: Vec<Complex64> = rho.iter().map(|r| z(r * r, r.powi(4))).collect();
        let l = op.laplacian(&u).unwrap();
        for (r, v) in rho.iter().zip(l) {
            assert!((v - z(8.0, 24.0 * r * r)).norm() < 1e-9, "rho {r}: {v}");
        }
    }

    #[test]
    fn zero_map_equals_linear_residual() {
        let p = FieldParams::default();
        let e = lommel_expansion(&p, 24, Extension::Analytic).unwrap();
        let g = grid();
        let a = kg_residual(&e.coeffs, &zero_delta, &p, &g).unwrap();
        let samples: Vec<Complex64> = sample_expansion(&e.coeffs, &p, &g).iter().map(|v| v.conj()).collect();
        let b = linear_kg_residual(&samples, &g, &p).unwrap();
        assert!(linalg::max_abs_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let p = FieldParams::default();
        let r = kg_residual(&[ZERO; 6], &zero_delta, &p, &grid()).unwrap();
        assert!(r.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn residual_is_antilinear_at_zero_delta() {
        let p = FieldParams::default();
        let e = lommel_expansion(&p, 16, Extension::Analytic).unwrap();
        let c = z(0.6, -1.3);
        let scaled: Vec<Complex64> = e.coeffs.iter().map(|v| v * c).collect();
        let a = kg_residual(&e.coeffs, &zero_delta, &p, &grid()).unwrap();
        let b = kg_residual(&scaled, &zero_delta, &p, &grid()).unwrap();
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            assert!((x * c.conj() - y).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn bessel_profile_has_small_residual() {
        let p = FieldParams::default();
        let g = RadialGrid::new(20.0, 401).unwrap();
        let lin = linear_profile(&p, &g);
        let coeffs = project_profile(&lin, &g, &p, 16).unwrap();
        let r = kg_residual_profile(&lin, &coeffs, &zero_delta, &p, &g).unwrap();
        let worst = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst:e}");
    }

    #[test]
    fn truncated_lommel_expansion_converges_slowly() {
        // A nearly constant field is far from the span of a few Hermite
        // functions; pointwise error at the origin falls only slowly with M.
        let p = FieldParams::default();
        let g = RadialGrid::new(1.0, 11).unwrap();
        let errs: Vec<f64> = [16, 64]
            .iter()
            .map(|&m| {
                let e = lommel_expansion(&p, m, Extension::Analytic).unwrap();
                (sample_expansion(&e.coeffs, &p, &g)[0] - lommel_solution(&p, 0.0)).norm()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[1] > 1e-6, "{errs:?}");
    }

    #[test]
    fn residual_converges_at_fourth_order() {
        let p = FieldParams::new(1.0, 1.0).unwrap();
        let coarse = RadialGrid::new(8.0, 41).unwrap();
        let fine = coarse.refined();
        let worst = |g: &RadialGrid| {
            let r = linear_kg_residual(&linear_profile(&p, g), g, &p).unwrap();
            r.iter().map(|v| v.norm()).fold(0.0, f64::max)
        };
        let order = (worst(&coarse) / worst(&fine)).log2();
        assert!(order >= 2.0, "observed order {order}");
    }

    #[test]
    fn projection_recovers_even_modes() {
        let p = FieldParams::default();
        let mut c = vec![ZERO; 8];
        c[0] = z(0.4, 0.1);
        c[2] = z(-0.2, 0.0);
        c[6] = z(0.0, 0.05);
        let g = RadialGrid::new(4.0, 401).unwrap();
        let back = project_profile(&sample_expansion(&c, &p, &g), &g, &p, 8).unwrap();
        assert!(linalg::max_abs_diff(&back, &c) < 1e-8, "{back:?}");
    }

    #[test]
    fn lagrangian_at_zero_delta_matches_radial_density() {
        let p = FieldParams::new(0.3, 1.2).unwrap();
        let e = lommel_expansion(&p, 12, Extension::Analytic).unwrap();
        let zero = vec![ZERO; 12];
        let pt = SpacetimePoint { t: 1.1, x: [0.3, -0.2, 0.4] };
        let got = perturbed_lagrangian(&e.coeffs, &zero, &pt, &p).unwrap();
        let rho = (pt.t * pt.t - pt.x.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let y = (rho / p.r0).powi(2);
        let phi = hermite_functions(11, y);
        let value: Complex64 = e.coeffs.iter().zip(&phi).map(|(c, v)| c * v).sum();
        let dphi: Complex64 = e
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * crate::special::hermite_derivative(m, y) * (2.0 * rho / (p.r0 * p.r0)))
            .sum();
        assert!((got - radial_lagrangian(value, dphi, &p)).abs() < 1e-10);
    }

    #[test]
    fn lagrangian_variation_matches_differences() {
        let p = FieldParams::new(0.5, 1.0).unwrap();
        let psi: Vec<Complex64> = (0..6).map(|k| z(0.3 / (k + 1) as f64, 0.1 * k as f64)).collect();
        let delta: Vec<Complex64> = (0..6).map(|k| z(0.01 * k as f64, -0.02)).collect();
        let dir: Vec<Complex64> = (0..6).map(|k| z(0.2, 0.1 - 0.05 * k as f64)).collect();
        let pt = SpacetimePoint { t: 0.4, x: [0.5, 0.1, -0.3] };
        let at = |eps: f64| {
            let d: Vec<Complex64> = delta.iter().zip(&dir).map(|(a, b)| a + b * eps).collect();
            perturbed_lagrangian(&psi, &d, &pt, &p).unwrap()
        };
        let h = 1e-5;
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let exact = lagrangian_variation(&psi, &delta, &dir, &pt, &p).unwrap();
        assert!((fd - exact).abs() < 1e-6);
    }

    #[test]
    fn max_iter_zero_returns_init() {
        let p = FieldParams::default();
        let init = lommel_expansion(&p, 8, Extension::Analytic).unwrap();
        let cfg = GeometryConfig::new(8, 11.7, 1.0).unwrap();
        let scheme = DropletScheme {
            damping: 1.0,
            max_iter: 0,
            ..DropletScheme::default()
        };
        let s = solve_droplet(&p, &cfg, &init, &scheme).unwrap();
        assert_eq!(s.coeffs, init.coeffs);
        assert_eq!(s.diagnostics.iterations, 0);
        assert!(s.diagnostics.residual.is_finite());
    }

    #[test]
    fn large_radius_droplet_is_linear() {
        let p = FieldParams::default();
        let init = lommel_expansion(&p, 16, Extension::Analytic).unwrap();
        let cfg = GeometryConfig::new(16, 1e6, 1.0).unwrap();
        let s = solve_droplet(&p, &cfg, &init, &DropletScheme::default()).unwrap();
        assert!(s.diagnostics.converged, "{:?}", s.diagnostics);
        let lin = linear_profile(&p, &DropletScheme::default().grid);
        assert!(relative_l2(&s.profile.values, &lin, &DropletScheme::default().grid) < 1e-4);
    }

    #[test]
    fn physical_radius_terminates() {
        let p = FieldParams::default();
        let init = lommel_expansion(&p, 16, Extension::Analytic).unwrap();
        let cfg = GeometryConfig::new(16, FINE_STRUCTURE.powf(-0.5), 1.0).unwrap();
        let scheme = DropletScheme {
            max_iter: 40,
            ..DropletScheme::default()
        };
        let s = solve_droplet(&p, &cfg, &init, &scheme).unwrap();
        assert!(s.diagnostics.iterations <= 40);
        assert!(s.diagnostics.width.is_finite() && s.diagnostics.residual.is_finite());
    }
}
