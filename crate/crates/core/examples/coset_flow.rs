//! Geodesic flow out of the vacuum: closed-form matrix, its exponential
//! form, and recovering the flow from a target state.

use cpn::coset::{build_generator, extract_coset, flow_matrix, generator_k, polarization_operator, FlowSpec};
use cpn::geometry::StateVector;
use cpn::linalg::{self, I};
use num_complex::Complex64;

fn main() -> cpn::Result<()> {
    let spec = FlowSpec::new(vec![Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.5)], 1.1)?;
    let t = flow_matrix(&spec);
    println!("g = {:.6}, theta = {:.6}, period = {:.6}", spec.g, spec.theta, spec.period());
    println!("unitarity defect {:e}", linalg::unitarity_defect(&t));
    let k = linalg::expm(&(generator_k(&spec.f) * Complex64::from(spec.tau)));
    let b = linalg::expm(&(build_generator(&spec.f) * (I * spec.tau)));
    println!("|T - exp(tau K)| = {:e}", linalg::max_abs(&(&t - k)));
    println!("|T - exp(i tau B)| = {:.3e}", linalg::max_abs(&(&t - b)));

    let phi = StateVector::with_radius(vec![Complex64::new(0.5, 0.4), Complex64::new(-0.2, 0.6), Complex64::new(0.3, -0.1)], 2.0)?;
    let back = extract_coset(&phi, 1.0)?;
    let lead = Complex64::from_polar(phi.radius(), phi.amplitudes()[0].arg());
    let flowed: Vec<Complex64> = flow_matrix(&back).column(0).iter().map(|z| z * lead).collect();
    println!("recovered tau = {:.6}, round-trip error {:e}", back.tau, linalg::max_abs_diff(&flowed, phi.amplitudes()));
    let p = polarization_operator(&phi, 1.0)?;
    println!("polarization operator eigenvalues {:?}", linalg::hermitian_eigenvalues(&p));
    Ok(())
}
