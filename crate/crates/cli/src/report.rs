//! Rendering command results as text, JSON, CSV or SVG.

use serde_json::Value;

use crate::config::{Format, PlotKind};
use crate::plot::{plot, Table};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => Value::from(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone)]
pub enum Report {
    Scalar(f64),
    Json(Value),
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Cell>>,
        plot: Option<PlotKind>,
    },
    Text(String),
}

impl Report {
    fn default_format(&self) -> Format {
        match self {
            Report::Scalar(_) | Report::Text(_) => Format::Text,
            Report::Json(_) => Format::Json,
            Report::Table { .. } => Format::Csv,
        }
    }

    pub fn render(&self, format: Option<Format>) -> Result<String, CliError> {
        let format = format.unwrap_or_else(|| self.default_format());
        let unsupported =
            || CliError::Usage(format!("format {format:?} is not available for this command").to_lowercase());
        match (self, format) {
            (Report::Scalar(x), Format::Text) => Ok(format!("{x}\n")),
            (Report::Scalar(x), Format::Json) => json_text(&serde_json::json!({ "value": x })),
            (Report::Scalar(x), Format::Csv) => csv_text(&["value".to_string()], &[vec![Cell::Num(*x)]]),
            (Report::Json(v), Format::Json) => json_text(v),
            (Report::Text(t), Format::Text) => Ok(t.clone()),
            (Report::Table { columns, rows, .. }, Format::Csv) => csv_text(columns, rows),
            (Report::Table { columns, rows, .. }, Format::Json) => {
                let objects: Vec<Value> = rows
                    .iter()
                    .map(|r| Value::Object(columns.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
                    .collect();
                json_text(&Value::Array(objects))
            }
            (
                Report::Table {
                    columns,
                    rows,
                    plot: Some(kind),
                },
                Format::Svg,
            ) => {
                let table = Table {
                    columns: columns.clone(),
                    rows: rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect(),
                };
                plot(&table, *kind)
            }
            _ => Err(unsupported()),
        }
    }
}

fn json_text(v: &Value) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(columns: &[String], rows: &[Vec<Cell>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Numerical(e.to_string());
    w.write_record(columns).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(Cell::render)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(format_number(4.0 / 3.0), "1.3333333333333333e0");
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_uses_lf_and_quotes_only_when_needed() {
        let r = Report::Table {
            columns: vec!["point".into(), "x".into()],
            rows: vec![vec![Cell::Text("(0.5, 0)".into()), Cell::Num(0.5)]],
            plot: None,
        };
        let out = r.render(None).unwrap();
        assert_eq!(out, "point,x\n\"(0.5, 0)\",5.0000000000000000e-1\n");
        assert!(matches!(r.render(Some(Format::Svg)), Err(CliError::Usage(_))));
    }

    #[test]
    fn scalar_formats() {
        let r = Report::Scalar(1.5);
        assert_eq!(r.render(None).unwrap(), "1.5\n");
        assert_eq!(r.render(Some(Format::Json)).unwrap(), "{\n  \"value\": 1.5\n}\n");
    }
}
