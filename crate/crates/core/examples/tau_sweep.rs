//! Droplet diagnostics over one geodesic period, solved in parallel.

use cpn::geometry::{GeometryConfig, FINE_STRUCTURE};
use cpn::nonlinear_kg::{period_taus, tau_sweep, DeltaForm, DropletScheme};
use cpn::scalar_field::{lommel_expansion, Extension, FieldParams};

fn main() -> cpn::Result<()> {
    let params = FieldParams::default();
    let init = lommel_expansion(&params, 12, Extension::Analytic)?;
    let cfg = GeometryConfig::new(12, FINE_STRUCTURE.powf(-0.5), 1.0)?;
    let mut scheme = DropletScheme::default();
    scheme.perturbation.form = DeltaForm::SmallTau;
    let taus = period_taus(scheme.perturbation.g, 8);
    for (tau, s) in taus.iter().zip(tau_sweep(&params, &cfg, &init, &scheme, &taus)) {
        match s {
            Ok(s) => println!(
                "tau {tau:>8.4}: converged {:<5} residual {:.3e} width {:.5} action {:+.4e}",
                s.diagnostics.converged, s.diagnostics.residual, s.diagnostics.width, s.diagnostics.action
            ),
            Err(e) => println!("tau {tau:>8.4}: {e}"),
        }
    }
    Ok(())
}
