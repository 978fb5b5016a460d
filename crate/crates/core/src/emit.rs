//! JSON, CSV and aligned-table output.
//!
//! A [`Record`] is an ordered list of named values; names carry their SI
//! unit as a suffix (`rms_m`, `gain_rad_s`). Columns keep insertion order.
//! Non-finite numbers are refused: a quantity that is unbounded must be
//! emitted as [`Value::Diverges`].

use std::fmt::Write as _;

use serde_json::{Map, Number, Value as Json};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Integer(i64),
    Flag(bool),
    Text(String),
    /// Marker for a quantity that has no finite value.
    Diverges,
}

pub const DIVERGES: &str = "diverges";

impl Value {
    fn text(&self) -> String {
        match self {
            Value::Number(x) => format!("{x:e}"),
            Value::Integer(i) => i.to_string(),
            Value::Flag(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Diverges => DIVERGES.to_string(),
        }
    }

    fn json(&self, name: &str) -> Result<Json> {
        Ok(match self {
            Value::Number(x) => Json::Number(
                Number::from_f64(*x).ok_or_else(|| Error::Serialization(format!("`{name}` is {x}")))?,
            ),
            Value::Integer(i) => Json::from(*i),
            Value::Flag(b) => Json::Bool(*b),
            Value::Text(s) => Json::String(s.clone()),
            Value::Diverges => Json::String(DIVERGES.into()),
        })
    }

    /// A number, or [`Value::Diverges`] when `x` is infinite.
    pub fn bounded(x: f64) -> Value {
        if x.is_infinite() {
            Value::Diverges
        } else {
            Value::Number(x)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    pub fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn num(mut self, name: &str, x: f64) -> Self {
        self.fields.push((name.into(), Value::Number(x)));
        self
    }

    pub fn int(mut self, name: &str, i: i64) -> Self {
        self.fields.push((name.into(), Value::Integer(i)));
        self
    }

    pub fn flag(mut self, name: &str, b: bool) -> Self {
        self.fields.push((name.into(), Value::Flag(b)));
        self
    }

    pub fn text(mut self, name: &str, s: impl Into<String>) -> Self {
        self.fields.push((name.into(), Value::Text(s.into())));
        self
    }

    pub fn value(mut self, name: &str, v: Value) -> Self {
        self.fields.push((name.into(), v));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    fn check(&self) -> Result<()> {
        for (name, v) in &self.fields {
            if let Value::Number(x) = v {
                if !x.is_finite() {
                    return Err(Error::Serialization(format!("`{name}` is {x}; flag it instead")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<Json> {
        let mut map = Map::new();
        for (name, v) in &self.fields {
            map.insert(name.clone(), v.json(name)?);
        }
        Ok(Json::Object(map))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            _ => Err(Error::invalid("format", "expected json, csv or table")),
        }
    }
}

/// Renders `records`. JSON gives an object for a single record and an
/// array otherwise; CSV and tables need every record to have the same
/// columns.
pub fn emit(records: &[Record], format: Format) -> Result<String> {
    for r in records {
        r.check()?;
    }
    match format {
        Format::Json => {
            let doc = if records.len() == 1 {
                records[0].to_json()?
            } else {
                Json::Array(records.iter().map(Record::to_json).collect::<Result<_>>()?)
            };
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialization(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let header = columns(records)?;
            let mut out = header.join(",");
            out.push('\n');
            for r in records {
                let row: Vec<String> = r.fields.iter().map(|(_, v)| csv_cell(&v.text())).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        Format::Table if records.len() == 1 => {
            let r = &records[0];
            let width = r.fields.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
            let mut out = String::new();
            for (name, v) in &r.fields {
                let _ = writeln!(out, "{name:<width$}  {}", v.text());
            }
            Ok(out)
        }
        Format::Table => {
            let header = columns(records)?;
            let cells: Vec<Vec<String>> = records
                .iter()
                .map(|r| r.fields.iter().map(|(_, v)| v.text()).collect())
                .collect();
            let widths: Vec<usize> = (0..header.len())
                .map(|j| cells.iter().map(|row| row[j].len()).chain([header[j].len()]).max().unwrap_or(0))
                .collect();
            let line = |row: &[String]| {
                let padded: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            let mut out = line(&header);
            for row in &cells {
                out.push_str(&line(row));
            }
            Ok(out)
        }
    }
}

fn columns(records: &[Record]) -> Result<Vec<String>> {
    let first: Vec<String> = records
        .first()
        .map(|r| r.fields.iter().map(|(n, _)| n.clone()).collect())
        .unwrap_or_default();
    for r in records {
        if r.fields.len() != first.len() || r.fields.iter().zip(&first).any(|((n, _), f)| n != f) {
            return Err(Error::Serialization("records have different columns".into()));
        }
    }
    Ok(first)
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header and rows of a CSV document written by [`emit`]. Quoted cells
/// are supported; embedded newlines are not.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let header = split_csv(lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?)?;
    let rows = lines.map(split_csv).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
        return Err(Error::Parse(format!("row {} has {} cells", bad + 1, rows[bad].len())));
    }
    Ok((header, rows))
}

fn split_csv(line: &str) -> Result<Vec<String>> {
    let mut cells = Vec::new();
    let mut cell = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cell.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => cells.push(std::mem::take(&mut cell)),
            _ => cell.push(c),
        }
    }
    if quoted {
        return Err(Error::Parse(format!("unterminated quote in `{line}`")));
    }
    cells.push(cell);
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Record> {
        (0..3)
            .map(|i| {
                Record::new()
                    .num("pressure_mbar", 10f64.powi(-i))
                    .num("rms_m", 1.0 / 3.0 * (i + 1) as f64)
                    .flag("escaped", i == 2)
                    .value("phonons", if i == 2 { Value::Diverges } else { Value::Number(2.5) })
            })
            .collect()
    }

    #[test]
    fn csv_round_trip() {
        let text = emit(&sample(), Format::Csv).unwrap();
        let (header, rows) = parse_csv(&text).unwrap();
        assert_eq!(header, ["pressure_mbar", "rms_m", "escaped", "phonons"]);
        assert_eq!(rows.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row[1].parse::<f64>().unwrap(), 1.0 / 3.0 * (i + 1) as f64);
        }
        assert_eq!(rows[2][3], DIVERGES);
    }

    #[test]
    fn non_finite_numbers_are_refused() {
        let r = Record::new().num("n", f64::INFINITY);
        assert!(matches!(emit(std::slice::from_ref(&r), Format::Json), Err(Error::Serialization(_))));
        assert!(matches!(emit(&[r], Format::Csv), Err(Error::Serialization(_))));
        assert_eq!(Value::bounded(f64::INFINITY), Value::Diverges);
    }

    #[test]
    fn json_single_and_many() {
        let one = emit(&sample()[..1], Format::Json).unwrap();
        let v: Json = serde_json::from_str(&one).unwrap();
        assert!(v.is_object());
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["pressure_mbar", "rms_m", "escaped", "phonons"]);
        let many: Json = serde_json::from_str(&emit(&sample(), Format::Json).unwrap()).unwrap();
        assert_eq!(many.as_array().unwrap().len(), 3);
        assert_eq!(many[2]["phonons"], DIVERGES);
    }

    #[test]
    fn table_is_aligned() {
        let t = emit(&sample(), Format::Table).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].contains("pressure_mbar"));
    }

    #[test]
    fn mismatched_columns_rejected() {
        let r = vec![Record::new().num("a", 1.0), Record::new().num("b", 1.0)];
        assert!(emit(&r, Format::Csv).is_err());
    }

    #[test]
    fn quoted_cells() {
        let r = Record::new().text("name", "a, \"b\"");
        let text = emit(&[r], Format::Csv).unwrap();
        assert_eq!(parse_csv(&text).unwrap().1[0][0], "a, \"b\"");
    }
}
