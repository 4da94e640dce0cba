//! File formats: pattern collections as JSON, measures and warp maps as
//! two-column CSV.
//!
//! Pattern collections serialize as
//! `{"domain":[lo,hi],"processes":[[x,...],...]}`. Measures serialize with
//! header `x,F`, warp maps with header `x,T(x)`. Floats are written with
//! Rust's shortest round-trip formatting, so a write/read cycle is
//! bit-exact.

use crate::error::{Error, Result};
use crate::measure::{DiffuseMeasure, Interval, PointPattern};
use crate::transport::WarpMap;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct PatternsDto {
    domain: [f64; 2],
    processes: Vec<Vec<f64>>,
}

/// Writes a pattern collection (common domain) as JSON.
pub fn write_patterns(path: &Path, patterns: &[PointPattern]) -> Result<()> {
    let first = patterns.first().ok_or(Error::EmptyCollection("no patterns to write"))?;
    let domain = first.domain();
    for p in patterns {
        if !p.domain().approx_eq(&domain) {
            return Err(Error::DomainMismatch { expected: domain, found: p.domain() });
        }
    }
    let dto = PatternsDto {
        domain: [domain.lo, domain.hi],
        processes: patterns.iter().map(|p| p.points().to_vec()).collect(),
    };
    let file = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(file, &dto).map_err(json_error)?;
    Ok(())
}

/// Reads a pattern collection from JSON, validating the domain and points.
pub fn read_patterns(path: &Path) -> Result<Vec<PointPattern>> {
    let file = BufReader::new(std::fs::File::open(path)?);
    let dto: PatternsDto = serde_json::from_reader(file).map_err(json_error)?;
    let domain = Interval::new(dto.domain[0], dto.domain[1])?;
    dto.processes
        .into_iter()
        .map(|points| PointPattern::new(domain, points))
        .collect()
}

fn json_error(err: serde_json::Error) -> Error {
    if err.is_io() {
        Error::Io(std::io::Error::other(err.to_string()))
    } else {
        Error::Parse { line: err.line(), msg: err.to_string() }
    }
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let mut file = BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{header}")?;
    for (x, y) in rows {
        writeln!(file, "{x},{y}")?;
    }
    Ok(())
}

fn read_csv(path: &Path, header: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = BufReader::new(std::fs::File::open(path)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, line) in file.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if idx == 0 {
            if line.trim() != header {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header '{header}', found '{line}'"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse = |field: Option<&str>, lineno: usize| -> Result<f64> {
            field
                .ok_or(Error::Parse { line: lineno, msg: "missing column".into() })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })
        };
        xs.push(parse(fields.next(), lineno)?);
        ys.push(parse(fields.next(), lineno)?);
    }
    Ok((xs, ys))
}

/// Writes a measure CDF as CSV with header `x,F`.
pub fn write_measure_csv(path: &Path, measure: &DiffuseMeasure) -> Result<()> {
    write_csv(
        path,
        "x,F",
        measure.grid().iter().copied().zip(measure.cdf_values().iter().copied()),
    )
}

/// Reads a measure CDF from CSV.
pub fn read_measure_csv(path: &Path) -> Result<DiffuseMeasure> {
    let (xs, ys) = read_csv(path, "x,F")?;
    if xs.len() < 2 {
        return Err(Error::Parse { line: 1, msg: "measure CSV needs at least two rows".into() });
    }
    let domain = Interval::new(xs[0], xs[xs.len() - 1])?;
    DiffuseMeasure::from_cdf(domain, xs, ys)
}

/// Writes a warp map as CSV with header `x,T(x)`.
pub fn write_warp_csv(path: &Path, warp: &WarpMap) -> Result<()> {
    write_csv(
        path,
        "x,T(x)",
        warp.grid().iter().copied().zip(warp.values().iter().copied()),
    )
}

/// Reads a warp map from CSV.
pub fn read_warp_csv(path: &Path) -> Result<WarpMap> {
    let (xs, ys) = read_csv(path, "x,T(x)")?;
    if xs.len() < 2 {
        return Err(Error::Parse { line: 1, msg: "warp CSV needs at least two rows".into() });
    }
    let domain = Interval::new(xs[0], xs[xs.len() - 1])?;
    WarpMap::from_samples(domain, xs, ys)
}

/// Writes several warp maps sharing a grid into one wide CSV with header
/// `x,T1,...,Tn`.
pub fn write_warps_wide_csv(path: &Path, warps: &[WarpMap]) -> Result<()> {
    let first = warps.first().ok_or(Error::EmptyCollection("no warps to write"))?;
    let mut file = BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> =
        std::iter::once("x".to_string())
            .chain((1..=warps.len()).map(|i| format!("T{i}")))
            .collect();
    writeln!(file, "{}", header.join(","))?;
    for (j, &x) in first.grid().iter().enumerate() {
        let mut row = vec![x.to_string()];
        for w in warps {
            let v = if w.grid().len() == first.grid().len() { w.values()[j] } else { w.apply(x) };
            row.push(v.to_string());
        }
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(())
}
