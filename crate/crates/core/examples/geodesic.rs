//! The CP(1) geodesic `R e^{ia} tan l` under both connection factors, and
//! the Theta equation approaching pi/2.

use cpn::fd::Richardson;
use cpn::geometry::{geodesic_residual_cp1, integrate_theta_ode, ConnectionVariant, GeometryConfig};

fn main() -> cpn::Result<()> {
    let cfg = GeometryConfig::new(2, 1.5, 1.0)?;
    println!("{:>6} {:>14} {:>14}", "l", "levi_civita", "printed");
    for k in 0..=8 {
        let l = -1.2 + 0.3 * k as f64;
        let lc = geodesic_residual_cp1(l, 0.7, &cfg, ConnectionVariant::LeviCivita, Richardson::default())?;
        let pr = geodesic_residual_cp1(l, 0.7, &cfg, ConnectionVariant::Printed, Richardson::default())?;
        println!("{l:>6.2} {:>14.3e} {:>14.3e}", lc.norm(), pr.norm());
    }

    for radius in [100.0, 1000.0] {
        let cfg = GeometryConfig::new(2, radius, 1.0)?;
        let theta = integrate_theta_ode(&cfg, 0.0, 1.0, 200.0, 20_000)?;
        let last = theta.last().expect("samples");
        println!("R = {radius}: Theta(200) = {:.6}, pi/2 - Theta = {:.3e}", last.theta, std::f64::consts::FRAC_PI_2 - last.theta);
    }
    Ok(())
}
