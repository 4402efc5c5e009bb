//! Radial solutions of the Klein-Gordon equation in both sectors and their
//! residuals.

use cpn::fd::Richardson;
use cpn::scalar_field::{lommel_residual, lommel_solution, timelike_residual, timelike_solution, FieldParams};

fn main() -> cpn::Result<()> {
    let params = FieldParams::new(0.5, 1.0)?;
    println!("{:>6} {:>14} {:>12} {:>14} {:>12}", "rho", "J solution", "residual", "I solution", "residual");
    for k in 0..=10 {
        let rho = 0.1 + 2.0 * k as f64;
        let fd = Richardson::default();
        println!(
            "{rho:>6.1} {:>14.6e} {:>12.2e} {:>14.6e} {:>12.2e}",
            lommel_solution(&params, rho).re,
            lommel_residual(&params, rho, fd).norm(),
            timelike_solution(&params, rho).re,
            timelike_residual(&params, rho, fd).norm() / timelike_solution(&params, rho).norm().max(1.0),
        );
    }
    Ok(())
}
