//! Printed-versus-implemented comparisons recorded in every run report.
//!
//! Each entry evaluates both forms at a fixed sample and stores a number
//! measuring how far apart they are.

use num_complex::Complex64;

use crate::coset::{self, FlowSpec};
use crate::dynvars::{self, FlowSign};
use crate::error::Result;
use crate::fd::Richardson;
use crate::geometry::{self, ConnectionVariant, GeometryConfig, LocalPoint, StateVector};
use crate::linalg::{self, CMatrix, I};
use crate::nonlinear_kg::{perturbed_lagrangian, radial_lagrangian, SpacetimePoint};
use crate::report::Discrepancy;
use crate::scalar_field::{self, lommel_expansion, Extension, FieldParams};

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn entry(key: &str, printed: &str, implemented: &str, measure: f64) -> Discrepancy {
    Discrepancy {
        key: key.into(),
        printed: printed.into(),
        implemented: implemented.into(),
        measure,
    }
}

/// Fixed Hermitian generator on `C^3`.
fn sample_generator() -> CMatrix {
    CMatrix::from_row_slice(
        3,
        3,
        &[z(0.7, 0.0), z(0.2, -0.4), z(-0.3, 0.1), z(0.2, 0.4), z(-0.5, 0.0), z(0.6, 0.25), z(-0.3, -0.1), z(0.6, -0.25), z(0.1, 0.0)],
    )
}

/// `max |residual|` of the printed connection along the CP(1) geodesic.
fn connection_factor(cfg: &GeometryConfig) -> Result<Discrepancy> {
    let c1 = GeometryConfig::new(2, cfg.radius, cfg.hbar)?;
    let mut worst = 0.0f64;
    for k in 0..=8 {
        let l = -1.2 + 0.3 * k as f64;
        let r = geometry::geodesic_residual_cp1(l, 0.4, &c1, ConnectionVariant::Printed, Richardson::default())?;
        worst = worst.max(r.norm());
    }
    Ok(entry("connection_factor", "-2", "-1 (levi_civita)", worst))
}

/// `max |exp(i tau B) - T|` for a sample direction.
fn flow_generator() -> Discrepancy {
    let spec = FlowSpec::new(vec![z(0.3, -0.4), z(0.5, 0.2)], 0.9).expect("nonempty direction");
    let b = coset::build_generator(&spec.f);
    let e = linalg::expm(&(b * (I * spec.tau)));
    let d = linalg::max_abs(&(e - coset::flow_matrix(&spec)));
    entry("flow_generator", "exp(i tau B)", "exp(tau K)", d)
}

/// Stated `-i hbar` versus fitted constants of the transcribed spin fields.
fn spin_brackets(cfg: &GeometryConfig) -> Result<Vec<Discrepancy>> {
    Ok(dynvars::compare_printed_su2(cfg)?
        .into_iter()
        .map(|c| {
            let k = c.fitted_constant;
            entry(
                &format!("bracket_{}_{}", c.a, c.b),
                &format!("-i hbar {} (residual {:e})", c.target, c.stated_residual),
                &format!("({:?}, {:?}) {} (residual {:e})", k.re, k.im, c.target, c.fitted_residual),
                c.stated_residual,
            )
        })
        .collect())
}

/// Printed descent formula (without `-P^0_0 pi^i`) against the
/// extrapolated difference quotient.
fn descent_term(cfg: &GeometryConfig) -> Result<Discrepancy> {
    let c3 = GeometryConfig::new(3, cfg.radius, cfg.hbar)?;
    let gen = sample_generator();
    let p = LocalPoint::new(0, vec![z(0.3, -0.2), z(-0.1, 0.4)])?;
    let closed = dynvars::local_components_closed(&p, &gen, &c3)?.xi;
    let fd = dynvars::local_components_richardson(&p, &gen, &c3, FlowSign::Minus)?;
    let missing = I / c3.hbar * gen[(0, 0)];
    let printed: Vec<Complex64> = closed.iter().zip(p.coords()).map(|(x, pi)| x - missing * pi).collect();
    Ok(entry(
        "descent_term",
        &format!("omits -P00 pi (fd distance {:e})", linalg::max_abs_diff(&printed, &fd)),
        &format!("includes -P00 pi (fd distance {:e})", linalg::max_abs_diff(&closed, &fd)),
        linalg::max_abs_diff(&printed, &fd),
    ))
}

fn fd_sign(cfg: &GeometryConfig) -> Result<Discrepancy> {
    let c3 = GeometryConfig::new(3, cfg.radius, cfg.hbar)?;
    let p = LocalPoint::new(0, vec![z(0.3, -0.2), z(-0.1, 0.4)])?;
    let r = dynvars::fd_sign_report(&p, &sample_generator(), &c3)?;
    Ok(entry(
        "fd_sign",
        &format!("exp(+i eps P) (error {:e})", r.plus_error),
        &format!("exp(-i eps P) (error {:e})", r.minus_error),
        r.plus_error,
    ))
}

/// Printed phase rule `arg f^i = arg Phi^i` as a ray distance from `Phi`.
fn coset_phase() -> Result<Discrepancy> {
    let phi = StateVector::with_radius(vec![z(0.5, 0.4), z(-0.2, 0.6), z(0.3, -0.1)], 1.0)?;
    let a = phi.amplitudes();
    let spec = coset::extract_coset(&phi, 1.0)?;
    let scale: Vec<Complex64> = a[1..].iter().zip(&spec.f).map(|(p, f)| f.norm() * p / p.norm()).collect();
    let printed = FlowSpec::new(scale, spec.tau)?;
    let flowed = |s: &FlowSpec| -> Vec<Complex64> { coset::flow_matrix(s).column(0).iter().copied().collect() };
    let implemented = linalg::phase_aligned_distance(&flowed(&spec), a);
    let d = linalg::phase_aligned_distance(&flowed(&printed), a);
    Ok(entry(
        "coset_phase",
        "arg f = arg Phi^i",
        &format!("arg f = arg Phi^i - arg Phi^0 (ray distance {implemented:e})"),
        d,
    ))
}

/// Ratio of the printed closed-form basis derivative to the chain rule.
fn basis_derivative(params: &FieldParams) -> Discrepancy {
    let x = [0.3, -0.2, 0.5];
    let (g, _) = scalar_field::basis_derivatives(3, x, 0.9, params);
    let (gp, _) = scalar_field::basis_derivatives_printed(3, x, 0.9, params);
    let ratio = gp[0] / g[0];
    entry("basis_derivative", "closed form with raw Hermite polynomials", "chain rule of phi_n(y)", ratio)
}

/// Printed perturbed density at `Delta Psi = 0` over the unperturbed one.
fn lagrangian_factor(params: &FieldParams) -> Result<Discrepancy> {
    let psi = [z(1.0, 0.0)];
    let point = SpacetimePoint { t: 0.5, x: [0.3, 0.0, 0.0] };
    let implemented = perturbed_lagrangian(&psi, &[z(0.0, 0.0)], &point, params)?;
    let printed = 2.0 * implemented;
    let rho = 0.4;
    let y = (rho / params.r0).powi(2);
    let phi = scalar_field::hermite_function(0, y);
    let dphi = scalar_field::hermite_derivative(0, y) * (2.0 * rho / (params.r0 * params.r0));
    let reference = radial_lagrangian(z(phi, 0.0), z(dphi, 0.0), params);
    Ok(entry("lagrangian_factor", "no 1/2", "1/2 on every term", printed / reference))
}

/// `max |Phi_analytic - Phi_timelike|` over the first modes.
fn lommel_extension(params: &FieldParams) -> Result<Discrepancy> {
    let a = lommel_expansion(params, 8, Extension::Analytic)?;
    let t = lommel_expansion(params, 8, Extension::TimelikeBranch)?;
    Ok(entry(
        "lommel_extension",
        "timelike branch for y < 0",
        "analytic continuation for y < 0",
        linalg::max_abs_diff(&a.coeffs, &t.coeffs),
    ))
}

/// All comparisons for one run, in a fixed order.
pub fn discrepancy_log(cfg: &GeometryConfig, params: &FieldParams) -> Result<Vec<Discrepancy>> {
    let mut out = vec![connection_factor(cfg)?, flow_generator()];
    out.extend(spin_brackets(cfg)?);
    out.push(descent_term(cfg)?);
    out.push(fd_sign(cfg)?);
    out.push(coset_phase()?);
    out.push(basis_derivative(params));
    out.push(lagrangian_factor(params)?);
    out.push(lommel_extension(params)?);
    Ok(out)
}
