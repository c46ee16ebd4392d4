//! CSV tables with a leading `# config:` line.

use std::io::Write;

/// Significant digits written for floating-point cells.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Rounds to [`SIG_DIGITS`] significant digits and prints without exponent.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        "0".to_string()
    } else {
        format!("{rounded}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_num(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Renders the comment line, the header and every row.
pub fn render_csv(config_line: &str, table: &Table) -> Vec<u8> {
    let mut out = Vec::new();
    write!(out, "# config: {config_line}\r\n").expect("writing to a Vec cannot fail");
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(&mut out);
        w.write_record(&table.header).expect("writing to a Vec cannot fail");
        for row in &table.rows {
            w.write_record(row.iter().map(Cell::render))
                .expect("writing to a Vec cannot fail");
        }
        w.flush().expect("writing to a Vec cannot fail");
    }
    out
}

/// Config line, header and raw rows of a table read back from CSV.
pub type ParsedCsv = (String, Vec<String>, Vec<Vec<String>>);

/// Reads back a table written by [`render_csv`].
pub fn parse_csv(bytes: &[u8]) -> Result<ParsedCsv, String> {
    let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
    let (first, rest) = text.split_once('\n').ok_or("missing config line")?;
    let config = first
        .trim_end_matches('\r')
        .strip_prefix("# config: ")
        .ok_or("missing `# config:` prefix")?
        .to_string();
    let mut r = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
    let header = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.map(|rec| rec.iter().map(String::from).collect())
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    Ok((config, header, rows))
}
