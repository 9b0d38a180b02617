//! Artifact formats.
//!
//! CSV numbers use the shortest decimal representation that parses back to
//! the same `f64`, so identical runs give byte-identical files. JSON sidecars
//! carry `schema_version`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::elliptic::Eval;
use crate::error::{Error, Result};
use crate::petviashvili::{IterationRecord, SolitaryProfile};
use crate::solver::EvolutionRecord;
use crate::spectral::{Field, Grid};
use crate::validation::ConvergenceTable;

pub const SCHEMA_VERSION: &str = "1";

/// Shortest round-trip decimal form of `v`, in scientific notation outside
/// `[1e−5, 1e16)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn finish(mut w: csv::Writer<BufWriter<File>>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Long-format `(t, x, u)` rows for every snapshot.
pub fn write_snapshots_csv(path: &Path, record: &EvolutionRecord) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "x", "u"]).map_err(csv_error)?;
    for (t, u) in record.times.iter().zip(&record.snapshots) {
        let t = fmt_f64(*t);
        for (x, v) in u.grid().nodes().iter().zip(u.values()) {
            w.write_record([t.as_str(), &fmt_f64(*x), &fmt_f64(*v)]).map_err(csv_error)?;
        }
    }
    finish(w)
}

/// `(t, energy)` for every snapshot.
pub fn write_energy_csv(path: &Path, record: &EvolutionRecord) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "energy"]).map_err(csv_error)?;
    for (t, e) in record.times.iter().zip(&record.energy_series) {
        w.write_record([fmt_f64(*t), fmt_f64(*e)]).map_err(csv_error)?;
    }
    finish(w)
}

/// Two columns `(x, Q)`.
pub fn write_profile_csv(path: &Path, q: &Field) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "Q"]).map_err(csv_error)?;
    for (x, v) in q.grid().nodes().iter().zip(q.values()) {
        w.write_record([fmt_f64(*x), fmt_f64(*v)]).map_err(csv_error)?;
    }
    finish(w)
}

pub fn write_history_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["iteration", "error", "error_l2", "factor_error", "residual"])
        .map_err(csv_error)?;
    for r in history {
        w.write_record([
            r.iteration.to_string(),
            fmt_f64(r.error),
            fmt_f64(r.error_l2),
            fmt_f64(r.factor_error),
            fmt_f64(r.residual),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}

/// `(resolution, Linf_error, observed_order)`; the order is empty where
/// undefined.
pub fn write_convergence_csv(path: &Path, table: &ConvergenceTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["resolution", "Linf_error", "observed_order"]).map_err(csv_error)?;
    for r in &table.rows {
        w.write_record([
            r.resolution.to_string(),
            fmt_f64(r.error),
            r.observed_order.map(fmt_f64).unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}

/// `(x, u, pole)` where `u` is empty and `pole` is 1 at a tagged pole.
pub fn write_curve_csv(path: &Path, xs: &[f64], values: &[Eval]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "u", "pole"]).map_err(csv_error)?;
    for (x, v) in xs.iter().zip(values) {
        let (u, pole) = match v {
            Eval::Finite(u) => (fmt_f64(*u), "0"),
            Eval::Pole => (String::new(), "1"),
        };
        w.write_record([fmt_f64(*x), u, pole.to_string()]).map_err(csv_error)?;
    }
    finish(w)
}

/// Writes any serializable table of flat records with a header row.
pub fn write_records_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    finish(w)
}

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    schema_version: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with `schema_version` as the first field.
pub fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &Sidecar { schema_version: SCHEMA_VERSION, body })?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Metadata written next to a profile CSV.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSidecar {
    pub c: f64,
    pub p: f64,
    pub nu: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub iterations: usize,
    pub final_error: f64,
    pub final_residual: f64,
    pub final_factor_error: f64,
    pub peak_amplitude: f64,
}

impl ProfileSidecar {
    pub fn new(profile: &SolitaryProfile) -> Self {
        let g = profile.grid();
        let last = profile.final_record();
        ProfileSidecar {
            c: profile.c,
            p: profile.p,
            nu: profile.nu,
            n: g.len(),
            a: g.a(),
            b: g.b(),
            iterations: profile.iterations,
            final_error: last.error,
            final_residual: last.residual,
            final_factor_error: last.factor_error,
            peak_amplitude: profile.peak_amplitude(),
        }
    }
}

/// Reads an `(x, Q)` profile CSV. The grid is inferred from the nodes, which
/// must be uniformly spaced.
pub fn read_profile_csv(path: &Path) -> Result<Field> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.len() != 2 || &headers[0] != "x" {
        return Err(Error::Config(format!(
            "{}: expected a two-column (x, Q) profile CSV, got header {:?}",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut xs = Vec::new();
    let mut qs = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row.map_err(csv_error)?;
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| {
                Error::Config(format!("{}: row {}: cannot parse `{s}`: {e}", path.display(), line + 2))
            })
        };
        xs.push(parse(&row[0])?);
        qs.push(parse(&row[1])?);
    }
    if xs.len() < 4 {
        return Err(Error::Config(format!("{}: too few rows for a profile", path.display())));
    }
    let n = xs.len();
    let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if xs.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.abs().max(1.0)) {
        return Err(Error::Config(format!("{}: x column is not uniformly spaced", path.display())));
    }
    let grid: Arc<Grid> = Grid::new(xs[0], xs[0] + n as f64 * dx, n)?;
    Field::new(grid, qs)
}
