//! CSV inputs and outputs. Every output starts with `#` comment lines holding
//! the resolved configuration; readers skip them.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use cfmm_forge::PriceGrid;

use crate::config::Header;
use crate::error::{CliError, CliResult};

/// Relative tolerance when checking that a `p` column is log-spaced.
const GRID_TOL: f64 = 1e-9;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}

/// Reads the named numeric columns, which must be the file's header exactly.
pub fn read_columns<const N: usize>(path: &Path, names: &[&str; N]) -> CliResult<[Vec<f64>; N]> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(|e| io_err(path, e))?.clone();
    if header.len() != N || header.iter().zip(names).any(|(h, n)| h != *n) {
        return Err(io_err(
            path,
            format!(
                "expected columns `{}`, found `{}`",
                names.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut cols: [Vec<f64>; N] = std::array::from_fn(|_| Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io_err(path, e))?;
        for (i, col) in cols.iter_mut().enumerate() {
            let field = &record[i];
            let v: f64 = field.parse().map_err(|_| {
                io_err(
                    path,
                    format!(
                        "row {}: column `{}` has non-numeric `{field}`",
                        row + 1,
                        names[i]
                    ),
                )
            })?;
            if !v.is_finite() {
                return Err(io_err(
                    path,
                    format!("row {}: column `{}` is not finite", row + 1, names[i]),
                ));
            }
            col.push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(io_err(path, "no data rows"));
    }
    Ok(cols)
}

/// An allocation CSV `p,L,Y,X`.
pub struct AllocationFile {
    pub grid: PriceGrid,
    pub liquidity: Vec<f64>,
    /// Reserves along the curve, one per grid point.
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

pub fn read_allocation(path: &Path) -> CliResult<AllocationFile> {
    let [p, liquidity, y, x] = read_columns::<4>(path, &["p", "L", "Y", "X"])?;
    let n = p.len();
    let grid = PriceGrid::log_spaced(p[0], p[n - 1], n).map_err(|e| io_err(path, e))?;
    if grid
        .points()
        .iter()
        .zip(&p)
        .any(|(a, b)| (a - b).abs() > GRID_TOL * a)
    {
        return Err(io_err(path, "the p column is not a log-spaced grid"));
    }
    if liquidity.iter().any(|l| *l < 0.0) {
        return Err(io_err(path, "negative liquidity"));
    }
    Ok(AllocationFile {
        grid,
        liquidity,
        y,
        x,
    })
}

/// Writes the header comments, the column names and the rows. `None` means
/// standard output.
pub fn write_csv<'a>(
    out: Option<&Path>,
    header: &Header,
    names: &[&str],
    rows: impl Iterator<Item = &'a [f64]>,
) -> CliResult<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).map_err(|e| io_err(path, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let label = out.map_or_else(|| Path::new("<stdout>").to_path_buf(), Path::to_path_buf);
    let mut sink = BufWriter::new(sink);
    for line in header.lines() {
        writeln!(sink, "# {line}").map_err(|e| io_err(&label, e))?;
    }
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(names)?;
    for row in rows {
        writer.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    writer.flush().map_err(|e| io_err(&label, e))?;
    Ok(())
}

/// `key = value` lines.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key} = {value}"));
    }

    /// Shortest round-trip form, in scientific notation away from unity.
    pub fn num(&mut self, key: &str, value: f64) {
        let a = value.abs();
        if a == 0.0 || (1e-3..1e6).contains(&a) || !value.is_finite() {
            self.push(key, value)
        } else {
            self.push(key, format!("{value:e}"))
        }
    }

    pub fn print(&self) {
        for line in &self.lines {
            println!("{line}");
        }
    }

    /// Printed to standard error when standard output carries the CSV.
    pub fn eprint(&self) {
        for line in &self.lines {
            eprintln!("{line}");
        }
    }

    /// To stdout, unless the CSV went there.
    pub fn emit(&self, csv_on_stdout: bool) {
        if csv_on_stdout {
            self.eprint()
        } else {
            self.print()
        }
    }
}
