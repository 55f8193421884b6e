//! Error tables, observed convergence orders, conserved-quantity series,
//! and profile snapshots, plus the plain-text writers the drivers use.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{OvdgError, Result};
use crate::field::{DGField, Side};

/// Observed orders from an error sequence on successively refined meshes:
/// order_i = log(e_{i-1}/e_i) / log(N_i/N_{i-1}), one entry per refinement.
/// Resolutions must double unless `any_ratio` permits general increases.
pub fn convergence_orders_with(errors: &[(usize, f64)], any_ratio: bool) -> Result<Vec<f64>> {
    let mut orders = Vec::new();
    for pair in errors.windows(2) {
        let (n0, e0) = pair[0];
        let (n1, e1) = pair[1];
        if n1 <= n0 {
            return Err(OvdgError::InvalidConfig(format!(
                "resolutions must increase, got {n0} then {n1}"
            )));
        }
        if !any_ratio && n1 != 2 * n0 {
            return Err(OvdgError::InvalidConfig(format!(
                "resolutions must double between rows, got {n0} then {n1}"
            )));
        }
        orders.push((e0 / e1).ln() / (n1 as f64 / n0 as f64).ln());
    }
    Ok(orders)
}

pub fn convergence_orders(errors: &[(usize, f64)]) -> Result<Vec<f64>> {
    convergence_orders_with(errors, false)
}

/// One refinement level of an error table; orders are absent on the
/// coarsest row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvRow {
    pub n: usize,
    pub l2: f64,
    pub order_l2: Option<f64>,
    pub linf: f64,
    pub order_linf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub variable: String,
    pub rows: Vec<ConvRow>,
}

impl ConvergenceTable {
    /// Builds the table from (N, L2, Linf) triples on doubling meshes.
    pub fn build(variable: &str, data: &[(usize, f64, f64)]) -> Result<Self> {
        let l2: Vec<(usize, f64)> = data.iter().map(|&(n, a, _)| (n, a)).collect();
        let linf: Vec<(usize, f64)> = data.iter().map(|&(n, _, b)| (n, b)).collect();
        let o2 = convergence_orders(&l2)?;
        let oi = convergence_orders(&linf)?;
        let rows = data
            .iter()
            .enumerate()
            .map(|(i, &(n, a, b))| ConvRow {
                n,
                l2: a,
                order_l2: (i > 0).then(|| o2[i - 1]),
                linf: b,
                order_linf: (i > 0).then(|| oi[i - 1]),
            })
            .collect();
        Ok(ConvergenceTable {
            variable: variable.to_string(),
            rows,
        })
    }

    /// Orders of the finest refinement, (L2, Linf).
    pub fn final_orders(&self) -> Option<(f64, f64)> {
        let last = self.rows.last()?;
        Some((last.order_l2?, last.order_linf?))
    }
}

/// Conserved-quantity time series with a sampling stride over the steps.
#[derive(Debug, Clone)]
pub struct ConservedSeries {
    stride: usize,
    seen: usize,
    pub rows: Vec<(f64, f64, f64)>,
}

impl ConservedSeries {
    pub fn new(stride: usize) -> Self {
        assert!(stride >= 1);
        ConservedSeries {
            stride,
            seen: 0,
            rows: Vec::new(),
        }
    }

    /// Appends unconditionally; used for the initial and final states.
    pub fn push(&mut self, t: f64, e: f64, h: f64) {
        self.rows.push((t, e, h));
    }

    /// Appends every `stride`-th call, starting with the first.
    pub fn observe(&mut self, t: f64, e: f64, h: f64) {
        if self.seen % self.stride == 0 {
            self.push(t, e, h);
        }
        self.seen += 1;
    }

    /// Largest increase of E between consecutive rows; <= 0 means the
    /// recorded energy never grew.
    pub fn energy_max_rise(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|p| p[1].1 - p[0].1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest |H(t) - H(0)| over the recorded rows.
    pub fn hamiltonian_max_drift(&self) -> f64 {
        let h0 = match self.rows.first() {
            Some(&(_, _, h)) => h,
            None => return 0.0,
        };
        self.rows
            .iter()
            .map(|&(_, _, h)| (h - h0).abs())
            .fold(0.0, f64::max)
    }
}

/// A captured profile: named columns, one row per sample point.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Samples the fields on their shared mesh: `samples_per_cell` equispaced
/// points per cell plus the final right edge. The first output column is
/// the coordinate, then one column per field.
pub fn sample_profile(fields: &[&DGField], samples_per_cell: usize) -> Vec<Vec<f64>> {
    assert!(!fields.is_empty() && samples_per_cell >= 1);
    let mesh = fields[0].mesh().clone();
    for f in fields {
        assert_eq!(f.mesh().n_cells(), mesh.n_cells());
    }
    let n = mesh.n_cells();
    let mut out = Vec::with_capacity(n * samples_per_cell + 1);
    for j in 0..n {
        for i in 0..samples_per_cell {
            let xi = -1.0 + 2.0 * i as f64 / samples_per_cell as f64;
            let mut row = Vec::with_capacity(fields.len() + 1);
            row.push(mesh.to_physical(j, xi));
            for f in fields {
                row.push(f.eval_ref(j, xi));
            }
            out.push(row);
        }
    }
    let mut last = Vec::with_capacity(fields.len() + 1);
    last.push(mesh.node(n));
    for f in fields {
        last.push(f.trace(n - 1, Side::Right));
    }
    out.push(last);
    out
}

/// Everything a single experiment or refinement sweep reports.
#[derive(Debug, Default)]
pub struct RunReport {
    pub tables: Vec<ConvergenceTable>,
    pub series: Vec<(f64, f64, f64)>,
    pub snapshots: Vec<Snapshot>,
    /// Final-time errors as (variable, L2, Linf).
    pub final_errors: Vec<(String, f64, f64)>,
    pub energy_max_rise: Option<f64>,
    pub hamiltonian_max_drift: Option<f64>,
    pub steps: usize,
}

impl RunReport {
    pub fn final_error(&self, variable: &str) -> Option<(f64, f64)> {
        self.final_errors
            .iter()
            .find(|(v, _, _)| v == variable)
            .map(|&(_, l2, linf)| (l2, linf))
    }

    /// Human-readable closing summary: step count, final errors, and the
    /// conservation extremes when they were tracked.
    pub fn summary(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "steps = {}", self.steps);
        for (var, l2, linf) in &self.final_errors {
            let _ = writeln!(s, "{var}: l2 = {}  linf = {}", fmt_sci(*l2), fmt_sci(*linf));
        }
        if let Some(rise) = self.energy_max_rise {
            let _ = writeln!(s, "energy_max_rise = {}", fmt_sci(rise));
        }
        if let Some(drift) = self.hamiltonian_max_drift {
            let _ = writeln!(s, "hamiltonian_max_drift = {}", fmt_sci(drift));
        }
        let _ = writeln!(s, "snapshots = {}", self.snapshots.len());
        s
    }
}

/// Scientific notation with six significant digits, the precision every
/// writer uses so that parsing a file reproduces its values exactly.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:.5e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| OvdgError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| OvdgError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn convergence_csv(tables: &[ConvergenceTable]) -> String {
    let mut s = String::from("variable,n,l2,order_l2,linf,order_linf\n");
    for t in tables {
        for r in &t.rows {
            let o2 = r.order_l2.map(fmt_sci).unwrap_or_default();
            let oi = r.order_linf.map(fmt_sci).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{o2},{},{oi}",
                t.variable,
                r.n,
                fmt_sci(r.l2),
                fmt_sci(r.linf)
            );
        }
    }
    s
}

pub fn write_convergence_csv(path: &Path, tables: &[ConvergenceTable]) -> Result<()> {
    write_text(path, &convergence_csv(tables))
}

/// Human-oriented aligned rendering of the same tables.
pub fn convergence_text(tables: &[ConvergenceTable]) -> String {
    let mut s = String::new();
    for t in tables {
        let _ = writeln!(s, "variable {}", t.variable);
        let _ = writeln!(
            s,
            "{:>8} {:>13} {:>7} {:>13} {:>7}",
            "N", "L2", "order", "Linf", "order"
        );
        for r in &t.rows {
            let o2 = r.order_l2.map_or("--".to_string(), |o| format!("{o:.2}"));
            let oi = r.order_linf.map_or("--".to_string(), |o| format!("{o:.2}"));
            let _ = writeln!(
                s,
                "{:>8} {:>13} {:>7} {:>13} {:>7}",
                r.n,
                fmt_sci(r.l2),
                o2,
                fmt_sci(r.linf),
                oi
            );
        }
        let _ = writeln!(s);
    }
    s
}

fn bad_csv(path: &Path, what: &str) -> OvdgError {
    OvdgError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, what.to_string()),
    }
}

pub fn parse_convergence_csv(path: &Path) -> Result<Vec<ConvergenceTable>> {
    let text = read_text(path)?;
    let mut tables: Vec<ConvergenceTable> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(bad_csv(path, &format!("line {}: expected 6 fields", i + 1)));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| bad_csv(path, &format!("line {}: bad number {s:?}", i + 1)))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        let row = ConvRow {
            n: parts[1]
                .parse()
                .map_err(|_| bad_csv(path, &format!("line {}: bad resolution", i + 1)))?,
            l2: num(parts[2])?,
            order_l2: opt(parts[3])?,
            linf: num(parts[4])?,
            order_linf: opt(parts[5])?,
        };
        match tables.last_mut() {
            Some(t) if t.variable == parts[0] => t.rows.push(row),
            _ => tables.push(ConvergenceTable {
                variable: parts[0].to_string(),
                rows: vec![row],
            }),
        }
    }
    Ok(tables)
}

pub fn series_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("t,energy,hamiltonian\n");
    for &(t, e, h) in rows {
        let _ = writeln!(s, "{},{},{}", fmt_sci(t), fmt_sci(e), fmt_sci(h));
    }
    s
}

pub fn write_series_csv(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    write_text(path, &series_csv(rows))
}

/// Column layout: a `#` header naming the time and the variables, then
/// whitespace-separated values, one sample per line.
pub fn snapshot_text(snap: &Snapshot) -> String {
    let mut s = format!("# t = {}  {}\n", fmt_sci(snap.t), snap.columns.join(" "));
    for row in &snap.rows {
        let vals: Vec<String> = row.iter().map(|&v| fmt_sci(v)).collect();
        let _ = writeln!(s, "{}", vals.join(" "));
    }
    s
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<()> {
    write_text(path, &snapshot_text(snap))
}
