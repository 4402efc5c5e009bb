//! One report builder per subcommand.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RunConfig;
use crate::check;
use crate::coset::{self, FlowSpec};
use crate::discrepancy::discrepancy_log;
use crate::dynvars::{self, AlgebraBasis, FlowSign};
use crate::error::{Error, Result};
use crate::fd::Richardson;
use crate::geometry::{self, ConnectionVariant, GeometryConfig, LocalPoint};
use crate::linalg::{self, CMatrix, ZERO};
use crate::nonlinear_kg::{self as kg, DropletSolution};
use crate::oracle;
use crate::report::{Column, RunReport, Table};
use crate::scalar_field::{self, ScalarFieldProfile};

/// Name of the generator recorded in every report.
const RNG_NAME: &str = "ChaCha8";

/// Builds the report for `cfg`; the flag is `false` when the run completed
/// but found failures.
pub fn run(cfg: &RunConfig, raw: BTreeMap<String, String>) -> Result<(RunReport, bool)> {
    let geo = cfg.geometry()?;
    cfg.field().validate().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    let mut report = RunReport::new(raw);
    report.diag("rng", RNG_NAME);
    report.diag("seed", cfg.seed as usize);
    let ok = match cfg.command.as_str() {
        "metric" => metric(cfg, &geo, &mut report)?,
        "geodesic" => geodesic(cfg, &geo, &mut report)?,
        "flow" => flow(cfg, &geo, &mut report)?,
        "fields" => fields(cfg, &geo, &mut report)?,
        "expand" => expand(cfg, &mut report)?,
        "droplet" => droplet(cfg, &geo, &mut report)?,
        "check" => check(cfg, &mut report)?,
        other => return Err(Error::ConfigInvalid(format!("unknown command '{other}'"))),
    };
    report.discrepancies = discrepancy_log(&geo, &cfg.field())?;
    Ok((report, ok))
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn index(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64).collect()
}

/// `row, col, re, im` rows in row-major order.
fn matrix_table(name: &str, m: &CMatrix) -> Result<Table> {
    let (r, c) = m.shape();
    let rows = (0..r * c).map(|k| (k / c) as f64).collect();
    let cols = (0..r * c).map(|k| (k % c) as f64).collect();
    let values = (0..r * c).map(|k| m[(k / c, k % c)]).collect();
    Table::new(name, vec![Column::real("row", rows), Column::real("col", cols), Column::complex("value", values)])
}

fn vector_table(name: &str, v: &[Complex64]) -> Result<Table> {
    Table::new(name, vec![Column::real("index", index(v.len())), Column::complex("value", v.to_vec())])
}

fn profile_table(name: &str, p: &ScalarFieldProfile) -> Result<Table> {
    Table::new(name, vec![Column::real("rho", p.grid.clone()), Column::complex("value", p.values.clone())])
}

fn metric(cfg: &RunConfig, geo: &GeometryConfig, report: &mut RunReport) -> Result<bool> {
    let p = LocalPoint::new(0, cfg.point.clone().unwrap_or_else(|| vec![ZERO; cfg.dim - 1]))?;
    let m = geometry::fubini_study_metric(&p, geo);
    let gamma = geometry::connection(&p, geo, cfg.variant);
    let n = cfg.dim - 1;
    let (mut is, mut ks, mut ms, mut vs) = (vec![], vec![], vec![], vec![]);
    for i in 0..n {
        for k in 0..n {
            for q in 0..n {
                is.push(i as f64);
                ks.push(k as f64);
                ms.push(q as f64);
                vs.push(gamma.get(i, k, q));
            }
        }
    }
    report.push_table(vector_table("point", p.coords())?);
    report.push_table(matrix_table("metric", &m.g)?);
    report.push_table(Table::new(
        "connection",
        vec![Column::real("i", is), Column::real("k", ks), Column::real("m", ms), Column::complex("value", vs)],
    )?);
    report.diag("min_eigenvalue", m.min_eigenvalue());
    report.diag("hermiticity_defect", m.hermiticity_defect());
    report.diag("curvature", geo.curvature());
    report.diag("variant", cfg.variant.to_string());
    Ok(true)
}

fn geodesic(cfg: &RunConfig, geo: &GeometryConfig, report: &mut RunReport) -> Result<bool> {
    let c1 = GeometryConfig::new(2, geo.radius, geo.hbar)?;
    let phase = rng(cfg).random_range(0.0..std::f64::consts::TAU);
    let ls: Vec<f64> = (0..=48).map(|k| -1.2 + 0.05 * k as f64).collect();
    let fd = Richardson::default();
    let rows: Vec<(Complex64, Complex64, Complex64)> = ls
        .iter()
        .map(|&l| {
            Ok((
                geometry::geodesic_cp1(l, phase, &c1)?,
                geometry::geodesic_residual_cp1(l, phase, &c1, ConnectionVariant::LeviCivita, fd)?,
                geometry::geodesic_residual_cp1(l, phase, &c1, ConnectionVariant::Printed, fd)?,
            ))
        })
        .collect::<Result<_>>()?;
    let worst = |f: fn(&(Complex64, Complex64, Complex64)) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    report.diag("phase", phase);
    report.diag("max_residual_levi_civita", worst(|r| r.1.norm()));
    report.diag("max_residual_printed", worst(|r| r.2.norm()));
    report.push_table(Table::new(
        "geodesic",
        vec![
            Column::real("l", ls),
            Column::complex("pi", rows.iter().map(|r| r.0).collect()),
            Column::complex("residual_levi_civita", rows.iter().map(|r| r.1).collect()),
            Column::complex("residual_printed", rows.iter().map(|r| r.2).collect()),
        ],
    )?);
    let steps = 20_000;
    let theta = geometry::integrate_theta_ode(geo, 0.0, 1.0, 200.0, steps)?;
    let kept: Vec<_> = theta.iter().step_by(steps / 200).collect();
    report.diag("theta_final", theta.last().map_or(0.0, |s| s.theta));
    report.push_table(Table::new(
        "theta",
        vec![
            Column::real("l", kept.iter().map(|s| s.l).collect()),
            Column::real("theta", kept.iter().map(|s| s.theta).collect()),
            Column::real("rate", kept.iter().map(|s| s.rate).collect()),
        ],
    )?);
    Ok(true)
}

fn flow(cfg: &RunConfig, geo: &GeometryConfig, report: &mut RunReport) -> Result<bool> {
    let mut r = rng(cfg);
    let f: Vec<Complex64> = random_vec(&mut r, cfg.dim - 1);
    let norm = linalg::norm(&f);
    let f: Vec<Complex64> = f.iter().map(|v| v * (cfg.rate / norm)).collect();
    let spec = FlowSpec::new(f, cfg.tau)?;
    let t = coset::flow_matrix(&spec);
    let (e, _) = oracle::expm_taylor(&(coset::generator_k(&spec.f) * Complex64::from(spec.tau)));
    let vacuum: Vec<Complex64> = t.column(0).iter().map(|v| v * geo.radius).collect();
    report.push_table(vector_table("direction", &spec.f)?);
    report.push_table(matrix_table("flow_matrix", &t)?);
    report.push_table(vector_table("flowed_vacuum", &vacuum)?);
    report.diag("g", spec.g);
    report.diag("theta", spec.theta);
    report.diag("period", spec.period());
    report.diag("unitarity_defect", linalg::unitarity_defect(&t));
    report.diag("exponential_difference", linalg::max_abs(&(&t - e)));
    if let Some(taus) = &cfg.taus {
        let rows: Vec<(f64, f64, f64)> = taus
            .par_iter()
            .map(|&tau| {
                let m = coset::flow_matrix(&spec.at(tau));
                (spec.g * tau, m[(0, 0)].re, linalg::unitarity_defect(&m))
            })
            .collect();
        report.push_table(Table::new(
            "sweep",
            vec![
                Column::real("tau", taus.clone()),
                Column::real("theta", rows.iter().map(|r| r.0).collect()),
                Column::real("vacuum_overlap", rows.iter().map(|r| r.1).collect()),
                Column::real("unitarity_defect", rows.iter().map(|r| r.2).collect()),
            ],
        )?);
    }
    Ok(true)
}

fn fields(cfg: &RunConfig, geo: &GeometryConfig, report: &mut RunReport) -> Result<bool> {
    let unit2 = GeometryConfig::new(2, geo.radius, geo.hbar)?;
    let unit3 = GeometryConfig::new(3, geo.radius, geo.hbar)?;
    let mut labels = Vec::new();
    let mut constants = Vec::new();
    let mut residuals = Vec::new();
    let mut bases = vec![("su(2)".to_string(), AlgebraBasis::pauli(), unit2), ("su(3)".to_string(), AlgebraBasis::gell_mann(), unit3)];
    if cfg.dim > 3 {
        bases.push((format!("su({})", cfg.dim), AlgebraBasis::generalized(cfg.dim)?, *geo));
    }
    for (label, basis, g) in &bases {
        let rep = dynvars::closure_check(basis, g)?;
        labels.push(label.clone());
        constants.push(rep.constant);
        residuals.push(rep.residual);
    }
    report.push_table(Table::new(
        "closure",
        vec![Column::text("algebra", labels), Column::complex("constant", constants), Column::real("residual", residuals)],
    )?);

    let cmp = dynvars::compare_printed_su2(&unit2)?;
    report.push_table(Table::new(
        "spin_brackets",
        vec![
            Column::text("bracket", cmp.iter().map(|c| format!("[{},{}]", c.a, c.b)).collect()),
            Column::text("target", cmp.iter().map(|c| c.target.clone()).collect()),
            Column::complex("stated", cmp.iter().map(|c| c.stated_constant).collect()),
            Column::complex("fitted", cmp.iter().map(|c| c.fitted_constant).collect()),
            Column::real("stated_residual", cmp.iter().map(|c| c.stated_residual).collect()),
            Column::real("fitted_residual", cmp.iter().map(|c| c.fitted_residual).collect()),
        ],
    )?);

    let mut r = rng(cfg);
    let a = CMatrix::from_fn(cfg.dim, cfg.dim, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    let gen = (&a + a.adjoint()) * Complex64::from(0.5);
    let coords = match &cfg.point {
        Some(p) => p.clone(),
        None => random_vec(&mut r, cfg.dim - 1).iter().map(|v| v * 0.5).collect(),
    };
    let p = LocalPoint::new(0, coords)?;
    let closed = dynvars::local_components_closed(&p, &gen, geo)?.xi;
    let minus = dynvars::local_components_richardson(&p, &gen, geo, FlowSign::Minus)?;
    let plus = dynvars::local_components_richardson(&p, &gen, geo, FlowSign::Plus)?;
    report.push_table(matrix_table("generator", &gen)?);
    report.push_table(Table::new(
        "xi",
        vec![
            Column::real("index", index(closed.len())),
            Column::complex("closed", closed.clone()),
            Column::complex("fd_minus", minus.clone()),
            Column::complex("fd_plus", plus.clone()),
        ],
    )?);
    report.diag("fd_minus_error", linalg::max_abs_diff(&closed, &minus));
    report.diag("fd_plus_error", linalg::max_abs_diff(&closed, &plus));
    let identity = dynvars::field_from_generator(&CMatrix::identity(cfg.dim, cfg.dim), geo)?;
    report.diag("identity_field_max", identity.max_coeff());
    Ok(true)
}

fn expand(cfg: &RunConfig, report: &mut RunReport) -> Result<bool> {
    let params = cfg.field();
    let exp = scalar_field::lommel_expansion(&params, cfg.modes, cfg.extension)?;
    let grid = cfg.radial_grid()?;
    let profile = ScalarFieldProfile::from_expansion(&exp, grid.nodes())?;
    let exact = ScalarFieldProfile::new(grid.nodes(), kg::linear_profile(&params, &grid), params)?;
    let f = move |y: f64| scalar_field::lommel_field(&params, y, cfg.extension);
    report.push_table(vector_table("coefficients", &exp.coeffs)?);
    report.push_table(profile_table("profile", &profile)?);
    report.push_table(profile_table("exact", &exact)?);
    report.diag("quadrature_nodes", exp.nodes);
    report.diag("extension", cfg.extension.to_string());
    report.diag("l2_truncation_error", scalar_field::l2_truncation_error(&exp, &f, (-4.0, 4.0)));
    report.diag("profile_relative_l2", kg::relative_l2(&profile.values, &exact.values, &grid));
    Ok(true)
}

fn droplet_diagnostics(report: &mut RunReport, s: &DropletSolution) {
    let d = s.diagnostics;
    report.diag("residual", d.residual);
    report.diag("iterations", d.iterations);
    report.diag("l2_norm", d.l2_norm);
    report.diag("width", d.width);
    report.diag("action", d.action);
    report.diag("converged", d.converged);
    report.diag("diverged", d.diverged);
}

fn droplet(cfg: &RunConfig, geo: &GeometryConfig, report: &mut RunReport) -> Result<bool> {
    let params = cfg.field();
    let init = scalar_field::lommel_expansion(&params, cfg.modes, cfg.extension)?;
    let scheme = cfg.droplet_scheme()?;
    let grid = scheme.grid;
    let lin = kg::linear_profile(&params, &grid);
    report.diag("form", cfg.form.to_string());
    match &cfg.taus {
        None => {
            let s = kg::solve_droplet(&params, geo, &init, &scheme)?;
            droplet_diagnostics(report, &s);
            report.diag("relative_l2_to_linear", kg::relative_l2(&s.profile.values, &lin, &grid));
            report.push_table(vector_table("coefficients", &s.coeffs)?);
            report.push_table(profile_table("profile", &s.profile)?);
            report.push_table(profile_table("linear", &ScalarFieldProfile::new(grid.nodes(), lin, params)?)?);
        }
        Some(taus) => {
            let sols = kg::tau_sweep(&params, geo, &init, &scheme, taus);
            let mut cols: [Vec<f64>; 7] = Default::default();
            let mut status = Vec::new();
            for s in &sols {
                match s {
                    Ok(s) => {
                        let d = s.diagnostics;
                        for (c, v) in cols.iter_mut().zip([
                            d.residual,
                            d.iterations as f64,
                            d.l2_norm,
                            d.width,
                            d.action,
                            kg::relative_l2(&s.profile.values, &lin, &grid),
                            if d.converged { 1.0 } else { 0.0 },
                        ]) {
                            c.push(v);
                        }
                        status.push(if d.converged { "converged" } else if d.diverged { "diverged" } else { "max_iter" }.to_string());
                    }
                    Err(e) => {
                        for c in cols.iter_mut() {
                            c.push(f64::NAN);
                        }
                        status.push(format!("error: {e}"));
                    }
                }
            }
            let names = ["residual", "iterations", "l2_norm", "width", "action", "relative_l2_to_linear", "converged"];
            let mut columns = vec![Column::real("tau", taus.clone())];
            for (name, c) in names.iter().zip(cols) {
                if *name != "converged" {
                    columns.push(Column::real(name, c));
                }
            }
            columns.push(Column::text("status", status));
            report.push_table(Table::new("sweep", columns)?);
            report.diag("converged_runs", sols.iter().filter(|s| matches!(s, Ok(s) if s.diagnostics.converged)).count());
        }
    }
    Ok(true)
}

fn check(cfg: &RunConfig, report: &mut RunReport) -> Result<bool> {
    let results = check::run_all(&cfg.check_options());
    let passed = results.iter().filter(|r| r.passed).count();
    report.diag("passed", passed);
    report.diag("failed", results.len() - passed);
    report.push_table(Table::new(
        "criteria",
        vec![
            Column::real("id", results.iter().map(|r| r.id as f64).collect()),
            Column::text("name", results.iter().map(|r| r.name.clone()).collect()),
            Column::text("status", results.iter().map(|r| if r.passed { "pass" } else { "fail" }.to_string()).collect()),
            Column::text("detail", results.iter().map(|r| r.detail.clone()).collect()),
        ],
    )?);
    Ok(passed == results.len())
}
