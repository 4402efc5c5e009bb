//! Fubini-Study metric and connection at a point of CP(2), checked against
//! finite differences of the metric.

use cpn::geometry::{connection, fubini_study_metric, ConnectionVariant, GeometryConfig, LocalPoint};
use cpn::oracle::fd_christoffel;
use num_complex::Complex64;

fn main() -> cpn::Result<()> {
    let cfg = GeometryConfig::new(3, 2.0, 1.0)?;
    let p = LocalPoint::new(0, vec![Complex64::new(0.4, -0.3), Complex64::new(0.1, 0.8)])?;
    let m = fubini_study_metric(&p, &cfg);
    println!("metric at {:?}:\n{}", p.coords(), m.g);
    println!("min eigenvalue {:.6e}, Hermiticity defect {:e}", m.min_eigenvalue(), m.hermiticity_defect());

    let lc = connection(&p, &cfg, ConnectionVariant::LeviCivita);
    let fd = fd_christoffel(&p, &cfg, 1e-5);
    let mut worst = 0.0f64;
    for i in 0..2 {
        for k in 0..2 {
            for q in 0..2 {
                worst = worst.max((lc.get(i, k, q) - fd[(i * 2 + k) * 2 + q]).norm());
            }
        }
    }
    println!("max |Gamma - Gamma_fd| = {worst:e}");
    println!("Gamma^0_00 = {:.6}", lc.get(0, 0, 0));
    Ok(())
}
