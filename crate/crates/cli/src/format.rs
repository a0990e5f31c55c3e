//! Output tables. Every float is written as `{:.16e}` (17 significant
//! digits, round-trip exact) so identical inputs give identical bytes.

use std::io::Write;

use clap::ValueEnum;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Self::Num(x) => fmt_f64(*x),
            Self::Int(i) => i.to_string(),
            Self::Bool(b) => b.to_string(),
            Self::Text(s) => s.clone(),
            Self::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Self::Num(x) if x.is_finite() => fmt_f64(*x),
            Self::Num(_) | Self::Empty => "null".into(),
            Self::Int(i) => i.to_string(),
            Self::Bool(b) => b.to_string(),
            Self::Text(s) => serde_json::Value::from(s.as_str()).to_string(),
        }
    }
}

/// One output row under construction. Failed values leave an empty cell
/// and contribute their reason to the row's error column.
#[derive(Debug, Default)]
pub struct Row {
    cells: Vec<Cell>,
    errors: Vec<String>,
}

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, cell: Cell) -> &mut Self {
        self.cells.push(cell);
        self
    }

    pub fn num(&mut self, x: f64) -> &mut Self {
        self.push(Cell::Num(x))
    }

    pub fn opt(&mut self, x: Option<f64>) -> &mut Self {
        self.push(x.map_or(Cell::Empty, Cell::Num))
    }

    /// A computed value, or an empty cell plus an error note.
    pub fn value(&mut self, x: &std::result::Result<f64, String>) -> &mut Self {
        match x {
            Ok(v) => self.num(*v),
            Err(e) => self.fail(e),
        }
    }

    pub fn fail(&mut self, reason: &str) -> &mut Self {
        if !self.errors.iter().any(|e| e == reason) {
            self.errors.push(reason.to_string());
        }
        self.push(Cell::Empty)
    }

    /// Records a failure that spans several cells: `width` empties, one note.
    pub fn fail_span(&mut self, reason: &str, width: usize) -> &mut Self {
        for _ in 0..width {
            self.fail(reason);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    error_column: bool,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>, error_column: bool) -> Self {
        let mut columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        if error_column {
            columns.push("error".into());
        }
        Self {
            columns,
            rows: Vec::new(),
            error_column,
        }
    }

    pub fn push(&mut self, row: Row) {
        let mut cells = row.cells;
        if self.error_column {
            cells.push(if row.errors.is_empty() {
                Cell::Empty
            } else {
                Cell::Text(row.errors.join("; "))
            });
        }
        assert_eq!(cells.len(), self.columns.len(), "row width must match the header");
        self.rows.push(cells);
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    /// `{"columns": [...], "rows": [[...], ...]}` with the same float text as the CSV.
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let cols: Vec<String> = self
            .columns
            .iter()
            .map(|c| serde_json::Value::from(c.as_str()).to_string())
            .collect();
        writeln!(out, "{{\"columns\": [{}], \"rows\": [", cols.join(", "))?;
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(Cell::json).collect();
            let sep = if i + 1 < self.rows.len() { "," } else { "" };
            writeln!(out, "  [{}]{sep}", cells.join(", "))?;
        }
        writeln!(out, "]}}")?;
        Ok(())
    }
}
