//! Dataset ingestion and CSV report emission.
//!
//! Numbers are written with 12 significant digits; missing or infeasible
//! values are written as `NA`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{DistributionEstimate, Method};
use crate::sample::RegressionSample;
use crate::sim::PointReport;

pub const SEED_ENV: &str = "MONOLLR_SEED";

/// A column given by header name or by 0-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::invalid("empty column reference"));
        }
        Ok(s.parse()
            .map(ColumnRef::Index)
            .unwrap_or_else(|_| ColumnRef::Name(s.to_string())))
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "{i}"),
            ColumnRef::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub path: PathBuf,
    pub x_column: ColumnRef,
    pub y_column: ColumnRef,
    pub has_header: bool,
    /// Sort observations by `x` (stable) after loading.
    pub sort: bool,
}

impl DatasetFile {
    pub fn load(&self) -> Result<RegressionSample> {
        let file = std::fs::File::open(&self.path)
            .map_err(|e| Error::invalid(format!("cannot open {}: {e}", self.path.display())))?;
        self.read(file)
    }

    pub fn read<R: Read>(&self, source: R) -> Result<RegressionSample> {
        if self.x_column == self.y_column {
            return Err(Error::invalid("regressor and response columns must differ"));
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(self.has_header)
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers: Vec<String> = if self.has_header {
            reader
                .headers()
                .map_err(csv_error)?
                .iter()
                .map(str::to_string)
                .collect()
        } else {
            Vec::new()
        };
        let xi = resolve_column(&self.x_column, &headers, self.has_header)?;
        let yi = resolve_column(&self.y_column, &headers, self.has_header)?;
        if xi == yi {
            return Err(Error::invalid("regressor and response columns must differ"));
        }

        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line());
            let cell = |col: usize| -> Result<f64> {
                let raw = record.get(col).ok_or_else(|| {
                    Error::invalid(format!(
                        "line {line}: missing column {col} ({} fields)",
                        record.len()
                    ))
                })?;
                let v: f64 = raw.parse().map_err(|_| {
                    Error::invalid(format!(
                        "line {line}, column {col}: cannot parse `{raw}` as a number"
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::invalid(format!(
                        "line {line}, column {col}: non-finite value `{raw}`"
                    )));
                }
                Ok(v)
            };
            rows.push((cell(xi)?, cell(yi)?));
        }
        if rows.is_empty() {
            return Err(Error::invalid(format!(
                "{} contains no data rows",
                self.path.display()
            )));
        }
        if self.sort {
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        let (xs, ys) = rows.into_iter().unzip();
        RegressionSample::new(xs, ys)
    }
}

fn resolve_column(col: &ColumnRef, headers: &[String], has_header: bool) -> Result<usize> {
    match col {
        ColumnRef::Index(i) => Ok(*i),
        ColumnRef::Name(name) if has_header => {
            headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::invalid(format!(
                    "no column named `{name}` (have {})",
                    headers.join(", ")
                ))
            })
        }
        ColumnRef::Name(name) => Err(Error::invalid(format!(
            "column `{name}` named but the file has no header"
        ))),
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::invalid(format!("malformed CSV: {e}"))
}

fn io_error(e: std::io::Error) -> Error {
    Error::invalid(format!("write failed: {e}"))
}

/// 12 significant digits, shortest form; `NA` for NaN.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "NA".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if rounded != 0.0 && !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn format_opt(v: Option<f64>) -> String {
    format_number(v.unwrap_or(f64::NAN))
}

fn write_row<W: Write + ?Sized>(out: &mut W, cells: &[String]) -> Result<()> {
    writeln!(out, "{}", cells.join(",")).map_err(io_error)
}

/// `y,cdf[,density]`.
pub fn write_estimate<W: Write + ?Sized>(out: &mut W, est: &DistributionEstimate) -> Result<()> {
    let header = if est.density.is_some() {
        "y,cdf,density"
    } else {
        "y,cdf"
    };
    writeln!(out, "{header}").map_err(io_error)?;
    for (k, (&y, &c)) in est.grid.iter().zip(&est.cdf).enumerate() {
        let mut row = vec![format_number(y), format_number(c)];
        if let Some(d) = &est.density {
            row.push(format_number(d[k]));
        }
        write_row(out, &row)?;
    }
    Ok(())
}

/// `b,ks_lc,ks_llh,ks_llm`.
pub fn write_ks_table<W: Write + ?Sized>(
    out: &mut W,
    point: &PointReport,
    bandwidths: &[f64],
) -> Result<()> {
    writeln!(out, "b,ks_lc,ks_llh,ks_llm").map_err(io_error)?;
    for &b in bandwidths {
        let mut row = vec![format_number(b)];
        for m in Method::DISTRIBUTIONS {
            row.push(format_opt(point.cell(b, m).and_then(|c| c.ks)));
        }
        write_row(out, &row)?;
    }
    Ok(())
}

/// `b,bias_lc,mse_lc,bias_llh,mse_llh,bias_llm,mse_llm,bias_ll,mse_ll`.
pub fn write_prediction_table<W: Write + ?Sized>(
    out: &mut W,
    point: &PointReport,
    bandwidths: &[f64],
) -> Result<()> {
    writeln!(
        out,
        "b,bias_lc,mse_lc,bias_llh,mse_llh,bias_llm,mse_llm,bias_ll,mse_ll"
    )
    .map_err(io_error)?;
    for &b in bandwidths {
        let mut row = vec![format_number(b)];
        for m in Method::ALL {
            let cell = point.cell(b, m);
            row.push(format_opt(cell.and_then(|c| c.bias)));
            row.push(format_opt(cell.and_then(|c| c.mse)));
        }
        write_row(out, &row)?;
    }
    Ok(())
}

/// Long format `b,method,alpha,realization,estimate,true_quantile`, with
/// methods coded 0 = lc, 1 = llh, 2 = llm.
pub fn write_quantile_table<W: Write + ?Sized>(
    out: &mut W,
    point: &PointReport,
    levels: &[f64],
) -> Result<()> {
    writeln!(out, "b,method,alpha,realization,estimate,true_quantile").map_err(io_error)?;
    for cell in &point.cells {
        let code = match Method::DISTRIBUTIONS.iter().position(|&m| m == cell.method) {
            Some(code) => code,
            None => continue,
        };
        for (j, (&alpha, row)) in levels.iter().zip(&cell.quantiles).enumerate() {
            for (r, &q) in row.iter().enumerate() {
                write_row(
                    out,
                    &[
                        format_number(cell.b),
                        code.to_string(),
                        format_number(alpha),
                        (r + 1).to_string(),
                        format_number(q),
                        format_number(point.true_quantiles[j]),
                    ],
                )?;
            }
        }
    }
    Ok(())
}

/// A numeric CSV table; `NA` cells read back as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_table<R: Read>(source: R) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .enumerate()
            .map(|(col, raw)| match raw {
                "NA" => Ok(f64::NAN),
                "Inf" => Ok(f64::INFINITY),
                "-Inf" => Ok(f64::NEG_INFINITY),
                _ => raw.parse().map_err(|_| {
                    Error::invalid(format!("line {line}, column {col}: cannot parse `{raw}`"))
                }),
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

/// The `--seed` flag if given, else `MONOLLR_SEED`, else `fallback`.
pub fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            Error::invalid(format!(
                "{SEED_ENV}=`{raw}` is not an unsigned 64-bit integer"
            ))
        }),
        Err(_) => Ok(fallback),
    }
}
