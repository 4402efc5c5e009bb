//! Run reports and their JSON and CSV encodings.
//!
//! Floats are written in shortest round-trip form, so `parse(serialize(r))`
//! reproduces `r` bit for bit. Nothing time-dependent is recorded.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum ColumnData {
    Real(#[serde(with = "reals")] Vec<f64>),
    Complex(Vec<Complex64>),
    Text(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Real(v) => v.len(),
            ColumnData::Complex(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(flatten)]
    pub data: ColumnData,
}

impl Column {
    pub fn real(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Real(values),
        }
    }

    pub fn complex(name: &str, values: Vec<Complex64>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Complex(values),
        }
    }

    pub fn text(name: &str, values: Vec<String>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Text(values),
        }
    }
}

/// JSON has no literal for non-finite floats; they are written as the
/// strings `"inf"`, `"-inf"` and `"NaN"`.
mod reals {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<Repr> = v
            .iter()
            .map(|&x| if x.is_finite() { Repr::Num(x) } else { Repr::Text(format!("{x:?}")) })
            .collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Repr::Num(x) => Ok(x),
                Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
            })
            .collect()
    }
}

/// Named array quantity; all columns have the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<Column>) -> Result<Self> {
        if let Some(first) = columns.first() {
            if let Some(bad) = columns.iter().find(|c| c.data.len() != first.data.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.data.len(),
                    got: bad.data.len(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            columns,
        })
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData> {
        self.columns.iter().find(|c| c.name == name).map(|c| &c.data)
    }
}

/// Scalar diagnostic. Non-finite reals are stored as text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Complex(Complex64),
    Text(String),
}

impl Value {
    pub fn real(x: f64) -> Self {
        if x.is_finite() {
            Value::Real(x)
        } else {
            Value::Text(format!("{x}"))
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Real(_) => "real",
            Value::Complex(_) => "complex",
            Value::Text(_) => "text",
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as i64)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::real(x)
    }
}

impl From<Complex64> for Value {
    fn from(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Value::Complex(z)
        } else {
            Value::Text(format!("{z}"))
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.into())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

/// One printed-versus-implemented comparison, with a number quantifying it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub key: String,
    pub printed: String,
    pub implemented: String,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub config: BTreeMap<String, String>,
    pub version: String,
    pub results: Vec<Table>,
    pub diagnostics: BTreeMap<String, Value>,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::ConfigInvalid(format!("unknown format '{other}' (expected json or csv)"))),
        }
    }
}

impl RunReport {
    pub fn new(config: BTreeMap<String, String>) -> Self {
        Self {
            config,
            version: VERSION.into(),
            ..Self::default()
        }
    }

    pub fn push_table(&mut self, table: Table) {
        self.results.push(table);
    }

    pub fn diag(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.into(), value.into());
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.results.iter().find(|t| t.name == name)
    }

    pub fn serialize(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => to_csv(self),
        }
    }

    pub fn parse(text: &str, format: Format) -> Result<Self> {
        match format {
            Format::Json => serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string())),
            Format::Csv => from_csv(text),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn parse_num(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("'{s}' is not a number")))
}

const SECTION: &str = "#";

fn to_csv(r: &RunReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([SECTION, "version"]).map_err(io)?;
    w.write_record([r.version.as_str()]).map_err(io)?;
    w.write_record([SECTION, "config"]).map_err(io)?;
    w.write_record(["key", "value"]).map_err(io)?;
    for (k, v) in &r.config {
        w.write_record([k, v]).map_err(io)?;
    }
    for t in &r.results {
        w.write_record([SECTION, "table", t.name.as_str()]).map_err(io)?;
        let mut header = Vec::new();
        let mut kinds = Vec::new();
        for c in &t.columns {
            match &c.data {
                ColumnData::Complex(_) if c.name == "value" => header.extend(["re".to_string(), "im".to_string()]),
                ColumnData::Complex(_) => header.extend([format!("{}_re", c.name), format!("{}_im", c.name)]),
                ColumnData::Real(_) => header.push(c.name.clone()),
                ColumnData::Text(_) => header.push(c.name.clone()),
            }
            kinds.push(c.data_kind());
        }
        w.write_record([SECTION, "kinds"].iter().map(|s| s.to_string()).chain(kinds.iter().map(|k| k.to_string())))
            .map_err(io)?;
        w.write_record(&header).map_err(io)?;
        for row in 0..t.rows() {
            let mut rec = Vec::with_capacity(header.len());
            for c in &t.columns {
                match &c.data {
                    ColumnData::Real(v) => rec.push(num(v[row])),
                    ColumnData::Complex(v) => {
                        rec.push(num(v[row].re));
                        rec.push(num(v[row].im));
                    }
                    ColumnData::Text(v) => rec.push(v[row].clone()),
                }
            }
            w.write_record(&rec).map_err(io)?;
        }
    }
    w.write_record([SECTION, "diagnostics"]).map_err(io)?;
    w.write_record(["key", "kind", "value", "im"]).map_err(io)?;
    for (k, v) in &r.diagnostics {
        let (a, b) = match v {
            Value::Bool(b) => (b.to_string(), String::new()),
            Value::Int(i) => (i.to_string(), String::new()),
            Value::Real(x) => (num(*x), String::new()),
            Value::Complex(z) => (num(z.re), num(z.im)),
            Value::Text(s) => (s.clone(), String::new()),
        };
        w.write_record([k.as_str(), v.kind(), a.as_str(), b.as_str()]).map_err(io)?;
    }
    w.write_record([SECTION, "discrepancies"]).map_err(io)?;
    w.write_record(["key", "printed", "implemented", "measure"]).map_err(io)?;
    for d in &r.discrepancies {
        w.write_record([d.key.as_str(), d.printed.as_str(), d.implemented.as_str(), num(d.measure).as_str()])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

impl Column {
    fn data_kind(&self) -> &'static str {
        match self.data {
            ColumnData::Real(_) => "real",
            ColumnData::Complex(_) => "complex",
            ColumnData::Text(_) => "text",
        }
    }
}

fn from_csv(text: &str) -> Result<RunReport> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let records: Vec<csv::StringRecord> = rd
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(e.to_string()))?;
    let mut report = RunReport::default();
    let mut i = 0;
    let is_section = |r: &csv::StringRecord| r.get(0) == Some(SECTION);
    let field = |r: &csv::StringRecord, k: usize| -> Result<String> {
        r.get(k)
            .map(str::to_string)
            .ok_or_else(|| Error::Parse(format!("record {r:?} lacks field {k}")))
    };
    while i < records.len() {
        let head = &records[i];
        if !is_section(head) {
            return Err(Error::Parse(format!("expected a section marker, found {head:?}")));
        }
        let section = field(head, 1)?;
        i += 1;
        let start = i;
        while i < records.len() && !is_section(&records[i]) {
            i += 1;
        }
        // `# kinds` belongs to the table it follows.
        if section == "table" && i < records.len() && records[i].get(1) == Some("kinds") {
            let kinds: Vec<String> = records[i].iter().skip(2).map(str::to_string).collect();
            let body = &records[i + 1..];
            let end = body.iter().position(is_section).unwrap_or(body.len());
            report.results.push(parse_table(&field(head, 2)?, &kinds, &body[..end])?);
            i += 1 + end;
            continue;
        }
        let body = &records[start..i];
        match section.as_str() {
            "version" => report.version = body.first().map(|r| field(r, 0)).transpose()?.unwrap_or_default(),
            "config" => {
                for r in body.iter().skip(1) {
                    report.config.insert(field(r, 0)?, field(r, 1)?);
                }
            }
            "diagnostics" => {
                for r in body.iter().skip(1) {
                    let (a, b) = (field(r, 2)?, r.get(3).unwrap_or(""));
                    let v = match field(r, 1)?.as_str() {
                        "bool" => Value::Bool(a == "true"),
                        "int" => Value::Int(a.parse().map_err(|_| Error::Parse(format!("bad int '{a}'")))?),
                        "real" => Value::Real(parse_num(&a)?),
                        "complex" => Value::Complex(Complex64::new(parse_num(&a)?, parse_num(b)?)),
                        "text" => Value::Text(a),
                        other => return Err(Error::Parse(format!("unknown diagnostic kind '{other}'"))),
                    };
                    report.diagnostics.insert(field(r, 0)?, v);
                }
            }
            "discrepancies" => {
                for r in body.iter().skip(1) {
                    report.discrepancies.push(Discrepancy {
                        key: field(r, 0)?,
                        printed: field(r, 1)?,
                        implemented: field(r, 2)?,
                        measure: parse_num(&field(r, 3)?)?,
                    });
                }
            }
            other => return Err(Error::Parse(format!("unknown section '{other}'"))),
        }
    }
    Ok(report)
}

fn parse_table(name: &str, kinds: &[String], body: &[csv::StringRecord]) -> Result<Table> {
    let header = body.first().ok_or_else(|| Error::Parse(format!("table '{name}' has no header")))?;
    let mut columns = Vec::with_capacity(kinds.len());
    let mut pos = 0;
    for kind in kinds {
        let h = header.get(pos).ok_or_else(|| Error::Parse(format!("table '{name}' header too short")))?;
        let rows = body.iter().skip(1);
        let cell = |r: &csv::StringRecord, k: usize| -> Result<String> {
            r.get(k)
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("table '{name}' row too short")))
        };
        match kind.as_str() {
            "real" => {
                let v = rows.map(|r| parse_num(&cell(r, pos)?)).collect::<Result<_>>()?;
                columns.push(Column::real(h, v));
                pos += 1;
            }
            "text" => {
                let v = rows.map(|r| cell(r, pos)).collect::<Result<_>>()?;
                columns.push(Column::text(h, v));
                pos += 1;
            }
            "complex" => {
                let col_name = if h == "re" { "value" } else { h.strip_suffix("_re").unwrap_or(h) };
                let v = rows
                    .map(|r| Ok(Complex64::new(parse_num(&cell(r, pos)?)?, parse_num(&cell(r, pos + 1)?)?)))
                    .collect::<Result<_>>()?;
                columns.push(Column::complex(col_name, v));
                pos += 2;
            }
            other => return Err(Error::Parse(format!("unknown column kind '{other}'"))),
        }
    }
    Table::new(name, columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut cfg = BTreeMap::new();
        cfg.insert("dim".to_string(), "3".to_string());
        cfg.insert("note".to_string(), "a, \"quoted\" value".to_string());
        let mut r = RunReport::new(cfg);
        r.push_table(
            Table::new(
                "profile",
                vec![
                    Column::real("rho", vec![0.0, 0.1, 1e-300]),
                    Column::complex("value", vec![Complex64::new(0.1, -2.5e-17), Complex64::new(1.0 / 3.0, 0.0), Complex64::new(-0.0, 7e22)]),
                ],
            )
            .unwrap(),
        );
        r.push_table(
            Table::new(
                "mixed",
                vec![
                    Column::text("label", vec!["x,y".into()]),
                    Column::complex("xi", vec![Complex64::new(std::f64::consts::PI, 1.0)]),
                ],
            )
            .unwrap(),
        );
        r.push_table(Table::new("empty", vec![Column::real("x", vec![])]).unwrap());
        r.push_table(Table::new("edges", vec![Column::real("x", vec![f64::INFINITY, f64::NEG_INFINITY, f64::MIN_POSITIVE])]).unwrap());
        r.diag("iterations", 12usize);
        r.diag("converged", true);
        r.diag("residual", 1.234_567_890_123_456_7e-9);
        r.diag("ratio", Complex64::new(-0.75, 0.125));
        r.diag("period", f64::INFINITY);
        r.diag("label", "levi_civita");
        r.discrepancies.push(Discrepancy {
            key: "connection_factor".into(),
            printed: "-2".into(),
            implemented: "-1".into(),
            measure: 0.4,
        });
        r
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let text = r.serialize(Format::Json).unwrap();
        assert_eq!(RunReport::parse(&text, Format::Json).unwrap(), r);
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let text = r.serialize(Format::Csv).unwrap();
        assert!(text.contains("\nrho,re,im\n"), "{text}");
        assert!(text.contains("label,xi_re,xi_im"));
        assert_eq!(RunReport::parse(&text, Format::Csv).unwrap(), r);
    }

    #[test]
    fn empty_report_is_valid() {
        let r = RunReport::new(BTreeMap::new());
        for f in [Format::Json, Format::Csv] {
            let text = r.serialize(f).unwrap();
            assert_eq!(RunReport::parse(&text, f).unwrap(), r);
        }
        let json: serde_json::Value = serde_json::from_str(&r.serialize(Format::Json).unwrap()).unwrap();
        assert_eq!(json["results"], serde_json::json!([]));
    }

    #[test]
    fn complex_values_are_pairs_in_json() {
        let r = sample();
        let json: serde_json::Value = serde_json::from_str(&r.serialize(Format::Json).unwrap()).unwrap();
        assert_eq!(json["diagnostics"]["ratio"], serde_json::json!([-0.75, 0.125]));
        assert_eq!(json["results"][0]["columns"][1]["values"][0], serde_json::json!([0.1, -2.5e-17]));
    }

    #[test]
    fn nan_survives_both_formats() {
        let mut r = RunReport::new(BTreeMap::new());
        r.push_table(Table::new("t", vec![Column::real("x", vec![f64::NAN, 1.0])]).unwrap());
        for f in [Format::Json, Format::Csv] {
            let back = RunReport::parse(&r.serialize(f).unwrap(), f).unwrap();
            match back.results[0].column("x").unwrap() {
                ColumnData::Real(v) => assert!(v[0].is_nan() && v[1] == 1.0),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn ragged_tables_are_rejected() {
        assert!(Table::new("t", vec![Column::real("a", vec![1.0]), Column::real("b", vec![])]).is_err());
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(matches!(RunReport::parse("{", Format::Json), Err(Error::Parse(_))));
        assert!(matches!(RunReport::parse("x,y\n", Format::Csv), Err(Error::Parse(_))));
    }
}
