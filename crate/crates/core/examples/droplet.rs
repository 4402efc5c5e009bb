//! Droplet solves: the nearly flat sphere reproduces the linear solution,
//! and the outcome at R = alpha^{-1/2} is reported.

use cpn::geometry::{GeometryConfig, FINE_STRUCTURE};
use cpn::nonlinear_kg::{linear_profile, relative_l2, solve_droplet, DeltaForm, DropletScheme};
use cpn::scalar_field::{lommel_expansion, Extension, FieldParams};

fn main() -> cpn::Result<()> {
    let params = FieldParams::default();
    let init = lommel_expansion(&params, 16, Extension::Analytic)?;
    let lin = linear_profile(&params, &DropletScheme::default().grid);
    for (radius, form) in [(1e6, DeltaForm::General), (FINE_STRUCTURE.powf(-0.5), DeltaForm::General), (FINE_STRUCTURE.powf(-0.5), DeltaForm::SmallTau)] {
        let mut scheme = DropletScheme::default();
        scheme.perturbation.form = form;
        let cfg = GeometryConfig::new(16, radius, 1.0)?;
        let s = solve_droplet(&params, &cfg, &init, &scheme)?;
        let d = s.diagnostics;
        println!(
            "R = {radius:<10.4} {form:<9} converged {:<5} diverged {:<5} iterations {:>3} residual {:.3e} width {:.4} vs linear {:.3e}",
            d.converged,
            d.diverged,
            d.iterations,
            d.residual,
            d.width,
            relative_l2(&s.profile.values, &lin, &scheme.grid)
        );
    }
    Ok(())
}
