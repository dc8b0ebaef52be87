//! Tabular reports rendered as JSON, CSV or aligned text.

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::value::RawValue;

/// A real printed with 17 significant digits, so it parses back to the same
/// bits. Non-finite values become the strings `inf`, `-inf` and `nan`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Real {
    pub fn exact(&self) -> String {
        let x = self.0;
        if x.is_nan() {
            "nan".to_string()
        } else if x.is_infinite() {
            if x > 0.0 { "inf" } else { "-inf" }.to_string()
        } else {
            format!("{x:.16e}")
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(self.exact()).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_str(&self.exact())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Real(x) => Real(*x).serialize(s),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(t: &str) -> Self {
        Cell::Text(t.to_string())
    }
}

impl From<String> for Cell {
    fn from(t: String) -> Self {
        Cell::Text(t)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return Real(x).exact();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').unwrap();
        format!("{}e{e}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Real(x) => format_sig(*x, 10),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Real(x) => Real(*x).exact(),
            other => other.text(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub max_abs_error: f64,
    pub bound_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub parameters: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

struct Pairs<'a>(&'a [String], &'a [Cell]);

impl Serialize for Pairs<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (names, values): (Vec<String>, Vec<Cell>) = self.parameters.iter().cloned().unzip();
        let rows: Vec<Pairs<'_>> = self.rows.iter().map(|r| Pairs(&self.columns, r)).collect();
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("command", &self.command)?;
        map.serialize_entry("parameters", &Pairs(&names, &values))?;
        map.serialize_entry("rows", &rows)?;
        map.serialize_entry(
            "summary",
            &Pairs(
                &["max_abs_error".to_string(), "bound_satisfied".to_string()],
                &[
                    Cell::Real(self.summary.max_abs_error),
                    Cell::Bool(self.summary.bound_satisfied),
                ],
            ),
        )?;
        map.serialize_entry("warnings", &self.warnings)?;
        map.end()
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn to_text(&self) -> String {
        let params = self
            .parameters
            .iter()
            .map(|(k, v)| format!("{k}={}", v.text()))
            .collect::<Vec<_>>()
            .join(" ");
        let mut out = format!("{} {params}\n\n", self.command);

        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::text).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| cells.iter().map(|r| r[i].len()).fold(c.len(), usize::max))
            .collect();
        let line = |items: Vec<&str>| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        out += &line(self.columns.iter().map(String::as_str).collect());
        out.push('\n');
        for r in &cells {
            out += &line(r.iter().map(String::as_str).collect());
            out.push('\n');
        }
        out += &format!(
            "\nmax_abs_error={} bound_satisfied={}\n",
            format_sig(self.summary.max_abs_error, 10),
            self.summary.bound_satisfied
        );
        for w in &self.warnings {
            out += &format!("warning: {w}\n");
        }
        out
    }
}
