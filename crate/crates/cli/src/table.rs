//! CSV time series. Every value is written with 17 significant digits so a
//! re-read reproduces the in-memory `f64` exactly.
//!
//! Column layouts, for `n` strategies:
//!
//! * vector: `t,x_1,...,x_n`
//! * Lax matrix: `t,x_1_1,x_1_2,...,x_n_n` (row-major)
//! * density operator: `t,re_1_1,im_1_1,...,re_n_n,im_n_n` (row-major)

use std::io;
use std::path::Path;

use evoquant_core::{Complex64, MatrixTrajectory, OperatorTrajectory, Trajectory};
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Vector,
    Matrix,
    Operator,
}

impl TableKind {
    pub fn header(self, n: usize) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        match self {
            TableKind::Vector => h.extend((1..=n).map(|i| format!("x_{i}"))),
            TableKind::Matrix => {
                for i in 1..=n {
                    h.extend((1..=n).map(|j| format!("x_{i}_{j}")));
                }
            }
            TableKind::Operator => {
                for i in 1..=n {
                    for j in 1..=n {
                        h.push(format!("re_{i}_{j}"));
                        h.push(format!("im_{i}_{j}"));
                    }
                }
            }
        }
        h
    }

    fn columns(self, n: usize) -> usize {
        match self {
            TableKind::Vector => n,
            TableKind::Matrix => n * n,
            TableKind::Operator => 2 * n * n,
        }
    }

    /// Recognizes one of the layouts above from a header row.
    pub fn detect(header: &[String]) -> Option<(Self, usize)> {
        let first = header.get(1)?;
        let kind = if first.starts_with("re_") {
            TableKind::Operator
        } else if first.matches('_').count() == 2 {
            TableKind::Matrix
        } else {
            TableKind::Vector
        };
        let data = header.len() - 1;
        let n = match kind {
            TableKind::Vector => data,
            TableKind::Matrix => isqrt_exact(data)?,
            TableKind::Operator => isqrt_exact(data / 2).filter(|_| data.is_multiple_of(2))?,
        };
        (n > 0 && kind.header(n) == header).then_some((kind, n))
    }
}

fn isqrt_exact(m: usize) -> Option<usize> {
    (0..=m).take_while(|k| k * k <= m).find(|k| k * k == m)
}

/// A parsed time series: `rows[k]` holds the data columns recorded at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: TableKind,
    pub n: usize,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_vector(traj: &Trajectory) -> Self {
        Table {
            kind: TableKind::Vector,
            n: traj.states.first().map_or(0, |s| s.len()),
            times: traj.times.clone(),
            rows: traj.states.iter().map(|s| s.weights().to_vec()).collect(),
        }
    }

    pub fn from_matrix(traj: &MatrixTrajectory) -> Self {
        Table {
            kind: TableKind::Matrix,
            n: traj.states.first().map_or(0, |m| m.nrows()),
            times: traj.times.clone(),
            rows: traj.states.iter().map(|m| m.transpose().iter().copied().collect()).collect(),
        }
    }

    pub fn from_operator(traj: &OperatorTrajectory) -> Self {
        Table {
            kind: TableKind::Operator,
            n: traj.states.first().map_or(0, |m| m.nrows()),
            times: traj.times.clone(),
            rows: traj.states.iter().map(|m| m.transpose().iter().flat_map(|c| [c.re, c.im]).collect()).collect(),
        }
    }

    pub fn header(&self) -> Vec<String> {
        self.kind.header(self.n)
    }

    /// Diagonal populations of row `k`.
    pub fn populations(&self, k: usize) -> Vec<f64> {
        let row = &self.rows[k];
        match self.kind {
            TableKind::Vector => row.clone(),
            TableKind::Matrix => (0..self.n).map(|i| row[i * self.n + i]).collect(),
            TableKind::Operator => (0..self.n).map(|i| row[2 * (i * self.n + i)]).collect(),
        }
    }

    /// Row `k` as a complex matrix; `None` unless this is an operator table.
    pub fn operator(&self, k: usize) -> Option<DMatrix<Complex64>> {
        let row = &self.rows[k];
        (self.kind == TableKind::Operator).then(|| {
            DMatrix::from_fn(self.n, self.n, |i, j| {
                let at = 2 * (i * self.n + j);
                Complex64::new(row[at], row[at + 1])
            })
        })
    }

    pub fn write<W: io::Write>(&self, out: W) -> io::Result<()> {
        write_rows(out, &self.header(), self.times.iter().zip(&self.rows).map(|(&t, r)| (t, r.clone())))
    }
}

/// Writes `header` then one line per `(t, values)`.
pub fn write_rows<W: io::Write>(
    out: W,
    header: &[String],
    rows: impl IntoIterator<Item = (f64, Vec<f64>)>,
) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io::Error::other)?;
    for (t, values) in rows {
        let record = std::iter::once(t).chain(values).map(format_value);
        w.write_record(record).map_err(io::Error::other)?;
    }
    w.flush()
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    parse_table(&bytes).map_err(|reason| CliError::Csv { path: path.into(), reason })
}

pub fn parse_table(bytes: &[u8]) -> Result<Table, String> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let (kind, n) = TableKind::detect(&header).ok_or_else(|| format!("unrecognized header {:?}", header.join(",")))?;
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() != kind.columns(n) + 1 {
            return Err(format!("data row {} has {} fields, expected {}", line + 1, record.len(), kind.columns(n) + 1));
        }
        let values = record
            .iter()
            .map(|field| field.parse::<f64>().map_err(|e| format!("data row {}: {field:?}: {e}", line + 1)))
            .collect::<Result<Vec<f64>, String>>()?;
        times.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(Table { kind, n, times, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_round_trip_through_detection() {
        for kind in [TableKind::Vector, TableKind::Matrix, TableKind::Operator] {
            for n in 1..6 {
                assert_eq!(TableKind::detect(&kind.header(n)), Some((kind, n)));
            }
        }
        assert_eq!(TableKind::Matrix.header(2).join(","), "t,x_1_1,x_1_2,x_2_1,x_2_2");
        assert_eq!(TableKind::detect(&["t".into(), "y".into()]), None);
        assert_eq!(TableKind::detect(&["t".into()]), None);
    }

    #[test]
    fn values_survive_formatting() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 5e-324, f64::MAX, 0.0, 1.0 - f64::EPSILON] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(parse_table(b"t,x_1,x_2\n0,0.5\n").is_err());
        assert!(parse_table(b"t,x_1,x_2\n0,0.5,abc\n").is_err());
        assert!(parse_table(b"t,x_1,x_2\n").is_err());
        assert!(parse_table(b"time,a\n0,1\n").is_err());
    }
}
