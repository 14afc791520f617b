//! Deterministic output primitives.
//!
//! Numbers carry 17 significant digits in scientific notation, enough for
//! an exact f64 round trip, so identical invocations produce byte-identical
//! streams and any consumer can re-evaluate a row losslessly. CSV uses LF
//! endings, always emits a header, and prefixes metadata with `#`.

use gaplab_core::ModelParams;
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One cell of a tabular row.
pub enum Field {
    Num(f64),
    Text(&'static str),
    Bool(bool),
    Missing,
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(v) => fmt_f64(*v),
            Field::Text(s) => (*s).to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Missing => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Field::Num(v) => fmt_f64(*v),
            Field::Text(s) => format!("\"{s}\""),
            Field::Bool(b) => b.to_string(),
            Field::Missing => "null".to_string(),
        }
    }
}

/// Echo the command and resolved parameters as `#` comments (CSV only;
/// JSON line streams carry records exclusively).
pub fn param_comments(
    w: &mut impl Write,
    format: OutputFormat,
    command: &str,
    p: &ModelParams,
    extra: &[(&str, String)],
) -> io::Result<()> {
    if format != OutputFormat::Csv {
        return Ok(());
    }
    writeln!(w, "# command = {command}")?;
    writeln!(w, "# temp_nr_kelvin = {}", fmt_f64(p.temp_nr()))?;
    writeln!(w, "# t_nr_years = {}", fmt_f64(p.t_nr()))?;
    writeln!(w, "# t_0_years = {}", fmt_f64(p.t_0()))?;
    writeln!(w, "# temp_0_kelvin = {}", fmt_f64(p.temp_0()))?;
    for (key, value) in extra {
        writeln!(w, "# {key} = {value}")?;
    }
    Ok(())
}

pub fn header(w: &mut impl Write, format: OutputFormat, columns: &[&str]) -> io::Result<()> {
    if format == OutputFormat::Csv {
        writeln!(w, "{}", columns.join(","))?;
    }
    Ok(())
}

pub fn row(
    w: &mut impl Write,
    format: OutputFormat,
    columns: &[&str],
    fields: &[Field],
) -> io::Result<()> {
    debug_assert_eq!(columns.len(), fields.len());
    match format {
        OutputFormat::Csv => {
            let cells: Vec<String> = fields.iter().map(Field::csv).collect();
            writeln!(w, "{}", cells.join(","))
        }
        OutputFormat::Jsonl => {
            let cells: Vec<String> = columns
                .iter()
                .zip(fields)
                .map(|(name, field)| format!("\"{name}\":{}", field.json()))
                .collect();
            writeln!(w, "{{{}}}", cells.join(","))
        }
    }
}
