//! CSV import of radial profiles and meridian curves, CSV export of
//! solutions and traces. Floats are written with 17 significant digits so
//! that a written file reloads bit-identically.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::models::{ModelError, ProfileCurve, SampledProfile};
use crate::oscillation::{
    CauchySolution, CoefficientProfile, OscillationError, PotentialProfile, RadialMap, SampledMap,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}, column {column}: cannot parse {value:?} as a number")]
    Parse { line: u64, column: usize, value: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    Width { line: u64, expected: usize, found: usize },
    #[error("line {line}: abscissa {t} does not increase strictly")]
    NonMonotone { line: u64, t: f64 },
    #[error("line {line}: {column} = {value} is negative")]
    Negative { line: u64, column: String, value: f64 },
    #[error("no data rows")]
    Empty,
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error(transparent)]
    Oscillation(#[from] OscillationError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
}

/// Float formatting used by every writer: 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Numeric rows read from a CSV, with their source line numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
    pub lines: Vec<u64>,
}

impl Table {
    /// Index of a named column; without a header, `fallback` is used.
    pub fn column(&self, names: &[&str], fallback: Option<usize>) -> Result<Option<usize>, IoError> {
        match &self.header {
            Some(h) => Ok(h.iter().position(|c| names.iter().any(|n| c.eq_ignore_ascii_case(n)))),
            None => Ok(fallback),
        }
    }

    fn values(&self, col: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[col]).collect()
    }
}

/// Parses CSV text. A first record that is not entirely numeric is taken
/// as the header; `#` starts a comment line.
pub fn parse_table<R: Read>(reader: R) -> Result<Table, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let mut header = None;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut width = None;
    for rec in rdr.records() {
        let rec = rec
            .map_err(|e| IoError::Csv { line: e.position().map(|p| p.line()).unwrap_or(0), message: e.to_string() })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) || rec.get(0).is_some_and(|f| f.starts_with('#')) {
            continue;
        }
        let parsed: Vec<Result<f64, _>> = rec.iter().map(|f| f.parse::<f64>()).collect();
        if header.is_none() && rows.is_empty() && parsed.iter().any(|p| p.is_err()) {
            header = Some(rec.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(rec.len());
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(IoError::Width { line, expected, found: rec.len() });
        }
        let mut row = Vec::with_capacity(rec.len());
        for (column, (p, raw)) in parsed.into_iter().zip(rec.iter()).enumerate() {
            row.push(p.map_err(|_| IoError::Parse { line, column: column + 1, value: raw.to_string() })?);
        }
        rows.push(row);
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(IoError::Empty);
    }
    Ok(Table { header, rows, lines })
}

pub fn read_table(path: &Path) -> Result<Table, IoError> {
    let f = File::open(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    parse_table(f)
}

/// Abscissae from column 0 and values from `column`, strictly increasing.
pub fn series(table: &Table, column: usize) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let width = table.rows[0].len();
    if column >= width || width < 2 {
        return Err(IoError::Width { line: table.lines[0], expected: column.max(1) + 1, found: width });
    }
    let t = table.values(0);
    for i in 1..t.len() {
        if !(t[i] > t[i - 1]) {
            return Err(IoError::NonMonotone { line: table.lines[i], t: t[i] });
        }
    }
    Ok((t, table.values(column)))
}

fn require_nonnegative(table: &Table, name: &str, values: &[f64]) -> Result<(), IoError> {
    for (i, &v) in values.iter().enumerate() {
        if v < 0.0 {
            return Err(IoError::Negative { line: table.lines[i], column: name.to_string(), value: v });
        }
    }
    Ok(())
}

/// Sampled map through the points of column `column`; values at the
/// abscissae are reproduced exactly.
pub fn load_series(path: &Path, column: usize) -> Result<SampledMap, IoError> {
    let (t, y) = series(&read_table(path)?, column)?;
    Ok(SampledMap::new(t, y)?)
}

fn radial_table(table: &Table) -> Result<(Vec<f64>, Vec<f64>, String), IoError> {
    let (t, y) = series(table, 1)?;
    let name = table.header.as_ref().and_then(|h| h.get(1).cloned()).unwrap_or_else(|| "value".into());
    Ok((t, y, name))
}

/// Weight `v` from a two-column `(t, v)` table; `t_max` defaults to the
/// last abscissa.
pub fn coefficient_from_table(table: &Table, t_max: Option<f64>) -> Result<CoefficientProfile, IoError> {
    let (t, v, name) = radial_table(table)?;
    require_nonnegative(table, &name, &v)?;
    let t_max = t_max.unwrap_or(t[t.len() - 1]);
    Ok(CoefficientProfile::new(RadialMap::sampled(SampledMap::new(t, v)?), t_max)?)
}

/// Potential `A` from a two-column `(t, A)` table. An identically zero
/// potential is accepted here; the criteria reject it later.
pub fn potential_from_table(table: &Table, t_max: Option<f64>) -> Result<PotentialProfile, IoError> {
    let (t, a, name) = radial_table(table)?;
    require_nonnegative(table, &name, &a)?;
    let t_max = t_max.unwrap_or(t[t.len() - 1]);
    Ok(PotentialProfile::new(RadialMap::sampled(SampledMap::new(t, a)?), t_max)?)
}

pub fn load_coefficient(path: &Path, t_max: Option<f64>) -> Result<CoefficientProfile, IoError> {
    coefficient_from_table(&read_table(path)?, t_max)
}

pub fn load_potential(path: &Path, t_max: Option<f64>) -> Result<PotentialProfile, IoError> {
    potential_from_table(&read_table(path)?, t_max)
}

/// Meridian curve from columns `s, rho, h` and optionally `rho', h'`.
/// Without a header the columns are taken in that order.
pub fn profile_from_table(table: &Table) -> Result<ProfileCurve, IoError> {
    let width = table.rows[0].len();
    let col = |names: &[&str], pos: usize, required: bool| -> Result<Option<usize>, IoError> {
        let fallback = (pos < width).then_some(pos);
        match table.column(names, fallback)? {
            Some(c) => Ok(Some(c)),
            None if required => Err(IoError::MissingColumn(names[0].to_string())),
            None => Ok(None),
        }
    };
    let s = col(&["s"], 0, true)?.expect("required");
    let rho = col(&["rho", "ρ"], 1, true)?.expect("required");
    let h = col(&["h"], 2, true)?.expect("required");
    let drho = col(&["rho'", "drho", "rho_prime"], 3, false)?;
    let dh = col(&["h'", "dh", "h_prime"], 4, false)?;
    let (s_vals, rho_vals) = series(
        &Table {
            header: None,
            rows: table.rows.iter().map(|r| vec![r[s], r[rho]]).collect(),
            lines: table.lines.clone(),
        },
        1,
    )?;
    require_nonnegative(table, "rho", &rho_vals)?;
    let slopes = match (drho, dh) {
        (Some(a), Some(b)) => Some((table.values(a), table.values(b))),
        (None, None) => None,
        (Some(_), None) => return Err(IoError::MissingColumn("h'".into())),
        (None, Some(_)) => return Err(IoError::MissingColumn("rho'".into())),
    };
    let sampled = SampledProfile::new(s_vals, rho_vals, table.values(h), slopes)?;
    let curve = ProfileCurve::sampled(sampled);
    curve.check_arclength()?;
    Ok(curve)
}

pub fn load_profile_curve(path: &Path) -> Result<ProfileCurve, IoError> {
    profile_from_table(&read_table(path)?)
}

/// Writes a header and rows of floats.
pub fn write_rows<W: Write>(
    mut out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<(), IoError> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format_f64(*x)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Solution nodes as columns `t, z, w` with `w = v z'`.
pub fn write_solution<W: Write>(out: W, sol: &CauchySolution) -> Result<(), IoError> {
    write_rows(out, &["t", "z", "w"], sol.rows().map(|(t, z, w)| vec![t, z, w]))
}

pub fn save_solution(path: &Path, sol: &CauchySolution) -> Result<(), IoError> {
    let f = File::create(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    write_solution(std::io::BufWriter::new(f), sol)
}
