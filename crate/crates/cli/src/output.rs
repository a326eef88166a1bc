//! Report rendering.

use serde_json::{Map, Value};

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, r: Vec<String>) {
        self.rows.push(r);
    }

    fn to_bytes(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

pub struct Report {
    body: Value,
    text: String,
    table: Table,
    default_format: Format,
}

impl Report {
    pub fn new(body: Value, text: String, table: Table, default_format: Format) -> Self {
        Self { body, text, table, default_format }
    }

    pub fn render(self, command: &str, format: Option<Format>) -> Result<Vec<u8>, csv::Error> {
        match format.unwrap_or(self.default_format) {
            Format::Json => {
                let mut top = Map::new();
                top.insert("schema_version".into(), SCHEMA_VERSION.into());
                top.insert("command".into(), command.into());
                if let Value::Object(fields) = self.body {
                    top.extend(fields);
                }
                let mut out = serde_json::to_vec_pretty(&Value::Object(top)).expect("JSON values serialize");
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => self.table.to_bytes(),
            Format::Text => Ok(self.text.into_bytes()),
        }
    }
}

/// Six significant digits, trailing zeros trimmed; scientific notation for
/// very small or large magnitudes.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let s = format!("{:.*}", (5 - mag).max(0) as usize, x);
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(num(0.75), "0.75");
        assert_eq!(num(1.0 / 9.0), "0.111111");
        assert_eq!(num(2.0 / 3.0), "0.666667");
        assert_eq!(num(0.88), "0.88");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(123456.7), "123457");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(2.5e-16), "2.50000e-16");
        assert_eq!(num(0.8799999999999), "0.88");
    }

    #[test]
    fn csv_table() {
        let mut t = Table::new(&["a", "b"]);
        t.row(vec!["1".into(), "x,y".into()]);
        assert_eq!(String::from_utf8(t.to_bytes().unwrap()).unwrap(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn json_envelope() {
        let r = Report::new(serde_json::json!({"payoff": 0.75}), String::new(), Table::new(&[]), Format::Text);
        let v: Value = serde_json::from_slice(&r.render("payoff", Some(Format::Json)).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["payoff"], 0.75);
    }
}
