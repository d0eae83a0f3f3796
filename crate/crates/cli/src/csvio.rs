use std::fmt::Write as _;
use std::path::Path;

use crate::error::{io_error, CliError};

/// Numeric columns with an optional leading date column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Header and values of the date column.
    pub dates: Option<(String, Vec<String>)>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|k| self.columns[k].as_slice())
    }

    /// The named columns, in the order given.
    pub fn select(&self, names: &[String], path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
        names
            .iter()
            .map(|n| {
                self.column(n).map(<[f64]>::to_vec).ok_or_else(|| {
                    CliError::Config(format!("column `{n}` not found in {} (has: {})", path.display(), self.names.join(", ")))
                })
            })
            .collect()
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a comma-separated table; `#` lines are comments. The first column
/// is a date column if its header is `date` or none of its cells is a
/// number. Empty or non-numeric cells elsewhere are reported together.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                CliError::Data(format!("file not found: {}", path.display()))
            }
            _ => io_error(path, e),
        })?;
    let header: Vec<String> = reader.headers().map_err(|e| io_error(path, e))?.iter().map(str::to_string).collect();
    let mut cells: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| io_error(path, e))?;
        cells.push(rec.iter().map(str::to_string).collect());
    }
    if header.is_empty() || cells.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    let has_date = header[0].eq_ignore_ascii_case("date") || cells.iter().all(|r| parse_number(&r[0]).is_none());
    let first = usize::from(has_date);
    if header.len() <= first {
        return Err(CliError::Data(format!("{}: no numeric columns", path.display())));
    }
    let names = header[first..].to_vec();
    let mut columns = vec![Vec::with_capacity(cells.len()); names.len()];
    let mut bad = Vec::new();
    for (r, row) in cells.iter().enumerate() {
        for (k, col) in columns.iter_mut().enumerate() {
            match parse_number(&row[first + k]) {
                Some(v) => col.push(v),
                None => {
                    bad.push(format!("row {} column `{}` ({:?})", r + 1, names[k], row[first + k]));
                    col.push(f64::NAN);
                }
            }
        }
    }
    if !bad.is_empty() {
        let shown = bad.len().min(20);
        let more = if bad.len() > shown { format!(" and {} more", bad.len() - shown) } else { String::new() };
        return Err(CliError::Data(format!(
            "{}: missing or non-numeric values at {}{more}",
            path.display(),
            bad[..shown].join("; ")
        )));
    }
    let dates = has_date.then(|| (header[0].clone(), cells.iter().map(|r| r[0].clone()).collect()));
    Ok(Table { dates, names, columns })
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a table preceded by `# ` comment lines.
pub fn write_table(path: &Path, header: &str, table: &Table) -> Result<(), CliError> {
    let mut s = String::from(header);
    let mut head: Vec<&str> = Vec::new();
    if let Some((h, _)) = &table.dates {
        head.push(h);
    }
    head.extend(table.names.iter().map(String::as_str));
    s.push_str(&head.join(","));
    s.push('\n');
    for r in 0..table.rows() {
        let mut row: Vec<String> = Vec::with_capacity(head.len());
        if let Some((_, d)) = &table.dates {
            row.push(d[r].clone());
        }
        row.extend(table.columns.iter().map(|c| fmt_f64(c[r])));
        let _ = writeln!(s, "{}", row.join(","));
    }
    write_text(path, &s)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Writes a matrix with named rows and columns.
pub fn write_matrix(
    path: &Path,
    header: &str,
    row_names: &[String],
    col_names: &[String],
    m: &nalgebra::DMatrix<f64>,
) -> Result<(), CliError> {
    let mut s = String::from(header);
    let _ = writeln!(s, "name,{}", col_names.join(","));
    for (i, rn) in row_names.iter().enumerate() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
        let _ = writeln!(s, "{rn},{}", row.join(","));
    }
    write_text(path, &s)
}

/// Row names, column names and values of a labelled matrix.
pub type NamedMatrix = (Vec<String>, Vec<String>, nalgebra::DMatrix<f64>);

/// Reads a matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<NamedMatrix, CliError> {
    let t = read_table(path)?;
    let (_, rows) = t
        .dates
        .clone()
        .ok_or_else(|| CliError::Data(format!("{}: first column must hold row names", path.display())))?;
    let m = nalgebra::DMatrix::from_fn(t.rows(), t.names.len(), |i, j| t.columns[j][i]);
    Ok((rows, t.names, m))
}

pub fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Data(format!("{what} not found: expected file {}", path.display())))
    }
}
