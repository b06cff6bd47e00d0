//! Per-sample trajectory records and the CSV format.
//!
//! Every value is written with `{:.16e}` (17 significant digits), which
//! round-trips `f64` exactly. Quantities undefined at a sample (the gnomonic
//! image below the equator, the integrals at `𝐪 = 0`) are written as `NaN`.

use std::io::{BufRead, Write};
use std::path::Path;

use kepler_sphere::conserved::conserved_set;
use kepler_sphere::dynamics::TrajectorySample;
use kepler_sphere::geometry::constraint_residual;
use kepler_sphere::gnomonic::psi;
use kepler_sphere::KeplerParams;

use crate::error::{CliError, Result};

/// Column order of the trajectory CSV.
pub const TRAJECTORY_COLUMNS: [&str; 28] = [
    "t", "tau", "s", "q0", "q1", "q2", "q3", "v0", "v1", "v2", "v3", "Q1", "Q2", "Q3", "V1", "V2", "V3", "H", "E",
    "mu1", "mu2", "mu3", "A1", "A2", "A3", "eps", "c1_residual", "c2_residual",
];

/// One row of the trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub tau: f64,
    pub s: f64,
    pub q: [f64; 4],
    pub v: [f64; 4],
    /// Gnomonic image `(Q, V)`.
    pub big_q: [f64; 3],
    pub big_v: [f64; 3],
    pub h: f64,
    pub energy: f64,
    pub mu: [f64; 3],
    pub a: [f64; 3],
    pub eps: f64,
    pub c1_residual: f64,
    pub c2_residual: f64,
}

impl TrajectoryRecord {
    pub fn from_sample(sample: &TrajectorySample<f64>, params: &KeplerParams) -> Self {
        let p = &sample.point;
        let nan3 = [f64::NAN; 3];
        let (big_q, big_v) = psi(p).map(|e| (e.q.0, e.v.0)).unwrap_or((nan3, nan3));
        let (h, energy, mu, a, eps) = match conserved_set(p, params) {
            Ok(cs) => (cs.h, cs.energy, cs.mu.0, cs.a.0, cs.eps),
            Err(_) => (f64::NAN, f64::NAN, nan3, nan3, f64::NAN),
        };
        let (c1_residual, c2_residual) = constraint_residual(p);
        Self {
            t: sample.t,
            tau: sample.tau,
            s: sample.s,
            q: p.q.0,
            v: p.v.0,
            big_q,
            big_v,
            h,
            energy,
            mu,
            a,
            eps,
            c1_residual,
            c2_residual,
        }
    }

    pub fn to_row(&self) -> Vec<f64> {
        let mut row = vec![self.t, self.tau, self.s];
        for part in [&self.q[..], &self.v, &self.big_q, &self.big_v] {
            row.extend_from_slice(part);
        }
        row.extend([self.h, self.energy]);
        row.extend_from_slice(&self.mu);
        row.extend_from_slice(&self.a);
        row.extend([self.eps, self.c1_residual, self.c2_residual]);
        row
    }

    pub fn from_row(row: &[f64]) -> Option<Self> {
        if row.len() != TRAJECTORY_COLUMNS.len() {
            return None;
        }
        let take = |k: usize| -> [f64; 3] { [row[k], row[k + 1], row[k + 2]] };
        Some(Self {
            t: row[0],
            tau: row[1],
            s: row[2],
            q: [row[3], row[4], row[5], row[6]],
            v: [row[7], row[8], row[9], row[10]],
            big_q: take(11),
            big_v: take(14),
            h: row[17],
            energy: row[18],
            mu: take(19),
            a: take(22),
            eps: row[25],
            c1_residual: row[26],
            c2_residual: row[27],
        })
    }

    /// Bitwise equality, so that NaN fields compare equal to themselves.
    pub fn bits_eq(&self, other: &Self) -> bool {
        let (a, b) = (self.to_row(), other.to_row());
        a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits())
    }
}

/// A header plus rows of floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            for (k, x) in row.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{x:.16e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let bad = |line: usize, message: String| CliError::Record { path: path.to_path_buf(), line, message };
        let mut lines = std::io::BufReader::new(file).lines();
        let header = match lines.next() {
            Some(h) => h.map_err(|e| CliError::io(path, e))?,
            None => return Err(bad(1, "missing header".into())),
        };
        let mut table = Table::new(&header.split(',').collect::<Vec<_>>());
        for (k, line) in lines.enumerate() {
            let line = line.map_err(|e| CliError::io(path, e))?;
            let row = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| bad(k + 2, format!("{f:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != table.columns.len() {
                return Err(bad(k + 2, format!("expected {} fields, found {}", table.columns.len(), row.len())));
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

/// The trajectory table for a list of records.
pub fn trajectory_table(records: &[TrajectoryRecord]) -> Table {
    let mut table = Table::new(&TRAJECTORY_COLUMNS);
    for r in records {
        table.push(r.to_row());
    }
    table
}

/// Parses a trajectory CSV back into records.
pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let table = Table::read(path)?;
    if table.columns != TRAJECTORY_COLUMNS {
        return Err(CliError::Record { path: path.to_path_buf(), line: 1, message: "unexpected header".into() });
    }
    Ok(table.rows.iter().map(|r| TrajectoryRecord::from_row(r).expect("width checked on read")).collect())
}
