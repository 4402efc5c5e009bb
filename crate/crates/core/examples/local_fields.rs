//! Tangent fields generated by Hermitian matrices: closure under the
//! polynomial bracket, the transcribed spin fields, and the orientation of
//! the difference quotient.

use cpn::dynvars::{closure_check, compare_printed_su2, fd_sign_report, field_from_generator, AlgebraBasis};
use cpn::geometry::{GeometryConfig, LocalPoint};
use cpn::linalg::CMatrix;
use num_complex::Complex64;

fn main() -> cpn::Result<()> {
    let cfg2 = GeometryConfig::new(2, 1.0, 1.0)?;
    let cfg3 = GeometryConfig::new(3, 1.0, 1.0)?;
    for (name, basis, cfg) in [("su(2)", AlgebraBasis::pauli(), cfg2), ("su(3)", AlgebraBasis::gell_mann(), cfg3)] {
        let r = closure_check(&basis, &cfg)?;
        println!("{name}: [X_a, X_b] = k f_abc X_c with k = {:.3}, residual {:e}", r.constant, r.residual);
    }
    let id = field_from_generator(&CMatrix::identity(3, 3), &cfg3)?;
    println!("field of the identity is zero: {}", id.is_zero());

    for c in compare_printed_su2(&cfg2)? {
        println!(
            "[{}, {}]: stated {:.2} residual {:.3e}, fitted {:.2} residual {:.3e}",
            c.a, c.b, c.stated_constant, c.stated_residual, c.fitted_constant, c.fitted_residual
        );
    }

    let gen = &AlgebraBasis::gell_mann().generators[3];
    let p = LocalPoint::new(0, vec![Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4)])?;
    let s = fd_sign_report(&p, gen, &cfg3)?;
    println!("difference quotient: minus error {:.3e}, plus error {:.3e}, matched {:?}", s.minus_error, s.plus_error, s.matched);
    Ok(())
}
