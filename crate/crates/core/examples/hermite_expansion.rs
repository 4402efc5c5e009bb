//! Hermite-function expansion of the Lommel field and its truncation error
//! for each continuation to negative y.

use cpn::scalar_field::{l2_truncation_error, lommel_expansion, lommel_field, reconstruct, Extension, FieldParams};

fn main() -> cpn::Result<()> {
    let params = FieldParams::new(0.8, 1.0)?;
    for ext in [Extension::Analytic, Extension::TimelikeBranch, Extension::Even] {
        let f = |y: f64| lommel_field(&params, y, ext);
        print!("{ext:>9}:");
        for m in [8, 16, 32, 64] {
            let e = lommel_expansion(&params, m, ext)?;
            print!("  M={m} L2 {:.3e}", l2_truncation_error(&e, &f, (-4.0, 4.0)));
        }
        println!();
    }
    let e = lommel_expansion(&params, 32, Extension::Analytic)?;
    println!("leading coefficients {:.4?}", &e.coeffs[..4]);
    for y in [0.0, 0.5, 2.0] {
        println!("y = {y}: field {:.6}, series {:.6}", lommel_field(&params, y, Extension::Analytic).re, reconstruct(&e, y).re);
    }
    Ok(())
}
