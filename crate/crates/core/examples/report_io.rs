//! Building a run report by hand and round-tripping it through both
//! encodings.

use std::collections::BTreeMap;

use cpn::report::{Column, Format, RunReport, Table};
use cpn::scalar_field::{lommel_solution, FieldParams};

fn main() -> cpn::Result<()> {
    let params = FieldParams::default();
    let rho: Vec<f64> = (0..=8).map(|k| k as f64 * 0.5).collect();
    let values = rho.iter().map(|&r| lommel_solution(&params, r)).collect();
    let mut config = BTreeMap::new();
    config.insert("alpha".to_string(), format!("{}", params.alpha));
    let mut report = RunReport::new(config);
    report.push_table(Table::new("profile", vec![Column::real("rho", rho), Column::complex("value", values)])?);
    report.diag("points", 9usize);

    let csv = report.serialize(Format::Csv)?;
    print!("{csv}");
    for f in [Format::Json, Format::Csv] {
        let text = report.serialize(f)?;
        println!("{f}: {} bytes, lossless {}", text.len(), RunReport::parse(&text, f)? == report);
    }
    Ok(())
}
