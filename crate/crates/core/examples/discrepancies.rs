//! The printed-versus-implemented log attached to every report.

use cpn::discrepancy::discrepancy_log;
use cpn::geometry::GeometryConfig;
use cpn::scalar_field::FieldParams;

fn main() -> cpn::Result<()> {
    for d in discrepancy_log(&GeometryConfig::new(3, 1.0, 1.0)?, &FieldParams::default())? {
        println!("{:<18} {:>12.4e}  printed: {}  |  implemented: {}", d.key, d.measure, d.printed, d.implemented);
    }
    Ok(())
}
