//! Schema-stable tables rendered as CSV or JSON.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    /// Reals carry 17 significant digits so every `f64` round-trips.
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n', '\r']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push_str("\r\n");
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push_str("\r\n");
        }
        out
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        m.insert((*c).to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// Result of one subcommand: a table for CSV output and the fields of the
/// JSON document.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub table: Table,
    /// Structured JSON body. When `None`, the table rows are emitted under
    /// `"rows"`.
    pub body: Option<Map<String, Value>>,
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn table(command: &'static str, table: Table) -> Self {
        Self {
            command,
            table,
            body: None,
            extra: Map::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("schema_version".into(), json!("1"));
        doc.insert("command".into(), json!(self.command));
        match &self.body {
            Some(body) => doc.extend(body.clone()),
            None => {
                doc.insert("rows".into(), self.table.to_json_rows());
            }
        }
        doc.extend(self.extra.clone());
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells() {
        assert_eq!(Cell::Float(0.1).csv(), "1.0000000000000001e-1");
        assert_eq!(Cell::Float(1.5f64.ln()).csv().parse::<f64>().unwrap(), 1.5f64.ln());
        assert_eq!(Cell::Float(f64::NAN).csv(), "NaN");
        assert_eq!(Cell::Text("a,b".into()).csv(), "\"a,b\"");
        assert_eq!(Cell::Text("say \"x\"".into()).csv(), "\"say \"\"x\"\"\"");
        assert_eq!(Cell::Empty.csv(), "");
    }

    #[test]
    fn table_renders_in_column_order() {
        let mut t = Table::new(&["z", "a"]);
        t.push(vec![1u32.into(), true.into()]);
        assert_eq!(t.to_csv(), "z,a\r\n1,true\r\n");
        let rows = t.to_json_rows();
        let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["z", "a"]);
        let r = Report::table("demo", t);
        assert!(r.to_json().starts_with("{\n  \"schema_version\": \"1\",\n  \"command\": \"demo\""));
    }
}
