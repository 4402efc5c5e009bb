//! Geodesic perturbation of a coefficient vector and its fall-off with the
//! sphere radius.

use cpn::geometry::GeometryConfig;
use cpn::linalg;
use cpn::nonlinear_kg::{geodesic_delta, DeltaForm, PerturbationSpec};
use num_complex::Complex64;

fn main() -> cpn::Result<()> {
    let coeffs = vec![Complex64::new(0.9, 0.1), Complex64::new(0.2, 0.0), Complex64::new(0.0, 0.3)];
    for form in [DeltaForm::General, DeltaForm::SmallTau] {
        let spec = PerturbationSpec { form, tau: 0.3, ..PerturbationSpec::default() };
        println!("{form}:");
        let mut prev: Option<(f64, f64)> = None;
        for radius in [10.0, 100.0, 1000.0, 10000.0] {
            let cfg = GeometryConfig::new(3, radius, 1.0)?;
            let d = linalg::norm(&geodesic_delta(&coeffs, &spec, &cfg)?.delta_coeffs);
            let slope = prev.map(|(r, v)| (d / v).ln() / (radius / r).ln());
            println!("  R = {radius:>7}: |Delta Psi| = {d:.4e}  local slope {}", slope.map_or("-".into(), |s| format!("{s:.4}")));
            prev = Some((radius, d));
        }
    }
    Ok(())
}
