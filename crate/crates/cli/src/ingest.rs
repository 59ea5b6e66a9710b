//! Strict CSV ingestion for curve data.
//!
//! Two layouts: `rows=time` (first row holds the grid values, every later
//! row is one curve in time order) and `cols=time` (first column holds the
//! grid, every later column is one curve). Cells must parse as finite
//! numbers; ragged shapes, non-numeric cells, and non-monotone grids are
//! rejected with the offending line number. A leading timestamp column
//! (labelled `time`, `timestamp`, `t`, or `date`) is dropped and flagged.

use std::path::Path;

use stoptime_core::fda::{FunctionalTimeSeries, Grid};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Layout {
    /// First row: grid values; each later row: one curve.
    #[value(name = "rows=time")]
    RowsTime,
    /// First column: grid values; each later column: one curve.
    #[value(name = "cols=time")]
    ColsTime,
}

impl Layout {
    pub fn as_str(&self) -> &'static str {
        match self {
            Layout::RowsTime => "rows=time",
            Layout::ColsTime => "cols=time",
        }
    }
}

#[derive(Debug)]
pub struct Ingested {
    pub fts: FunctionalTimeSeries,
    /// An acquisition-time column was present and ignored.
    pub timestamp_column_ignored: bool,
}

struct RawTable {
    /// (1-based file line number, cells) for every non-blank line.
    rows: Vec<(usize, Vec<String>)>,
}

fn timestamp_label(cell: &str) -> bool {
    matches!(
        cell.trim().to_ascii_lowercase().as_str(),
        "time" | "timestamp" | "t" | "date"
    )
}

fn read_table(path: &Path) -> CliResult<RawTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        rows.push((i + 1, cells));
    }
    if rows.len() < 2 {
        return Err(CliError::input(format!(
            "{}: need a grid row and at least one curve row",
            path.display()
        )));
    }
    let width = rows[0].1.len();
    if width < 2 {
        return Err(CliError::input(format!(
            "line {}: need at least two columns",
            rows[0].0
        )));
    }
    for (line_no, cells) in &rows {
        if cells.len() != width {
            return Err(CliError::input(format!(
                "line {line_no}: expected {width} cells, found {}",
                cells.len()
            )));
        }
    }
    Ok(RawTable { rows })
}

fn parse_cell(raw: &str, line_no: usize, col: usize) -> CliResult<f64> {
    let v: f64 = raw.parse().map_err(|_| {
        CliError::input(format!(
            "line {line_no}: non-numeric cell '{raw}' in column {col}"
        ))
    })?;
    if !v.is_finite() {
        return Err(CliError::input(format!(
            "line {line_no}: non-finite value '{raw}' in column {col}"
        )));
    }
    Ok(v)
}

fn check_monotone(grid: &[f64], place: &str) -> CliResult<()> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::input(format!(
            "{place}: grid values must be strictly increasing"
        )));
    }
    Ok(())
}

pub fn ingest_csv(path: &Path, layout: Layout) -> CliResult<Ingested> {
    let mut table = read_table(path)?;
    let timestamp_column_ignored = match layout {
        // A timestamp column labels each curve row; the grid row carries
        // the label itself in column 1.
        Layout::RowsTime => timestamp_label(&table.rows[0].1[0]),
        // Transposed: a timestamp row labels each curve column.
        Layout::ColsTime => timestamp_label(&table.rows[0].1[0]),
    };
    if timestamp_column_ignored {
        match layout {
            Layout::RowsTime => {
                for (_, cells) in &mut table.rows {
                    cells.remove(0);
                }
            }
            Layout::ColsTime => {
                table.rows.remove(0);
            }
        }
        if table.rows.len() < 2 || table.rows[0].1.len() < 2 {
            return Err(CliError::input(
                "too little data once the acquisition-time labels are dropped".to_string(),
            ));
        }
    }

    let (grid_values, curves) = match layout {
        Layout::RowsTime => {
            let (grid_line, grid_cells) = &table.rows[0];
            let grid: Vec<f64> = grid_cells
                .iter()
                .enumerate()
                .map(|(j, c)| parse_cell(c, *grid_line, j + 1))
                .collect::<CliResult<_>>()?;
            check_monotone(&grid, &format!("line {grid_line}"))?;
            let mut curves = Vec::with_capacity(table.rows.len() - 1);
            for (line_no, cells) in &table.rows[1..] {
                let row: Vec<f64> = cells
                    .iter()
                    .enumerate()
                    .map(|(j, c)| parse_cell(c, *line_no, j + 1))
                    .collect::<CliResult<_>>()?;
                curves.push(row);
            }
            (grid, curves)
        }
        Layout::ColsTime => {
            let p = table.rows.len();
            let n = table.rows[0].1.len() - 1;
            let mut grid = Vec::with_capacity(p);
            let mut curves = vec![Vec::with_capacity(p); n];
            for (line_no, cells) in &table.rows {
                grid.push(parse_cell(&cells[0], *line_no, 1)?);
                for (t, c) in cells[1..].iter().enumerate() {
                    curves[t].push(parse_cell(c, *line_no, t + 2)?);
                }
            }
            check_monotone(&grid, "column 1")?;
            (grid, curves)
        }
    };

    let grid = Grid::new(grid_values).map_err(CliError::from)?;
    let fts = FunctionalTimeSeries::from_rows(grid, &curves).map_err(CliError::from)?;
    Ok(Ingested {
        fts,
        timestamp_column_ignored,
    })
}
