//! CSV and JSON-sidecar serialization of measures.
//!
//! 1D: CSV `x,density` for the continuous part, sidecar
//! `{"atoms":[{"x":0.0,"w":1.0}]}` for the atoms. 2D: CSV with three
//! columns (names chosen by the caller, `x,y,density` by default).
//! Floats are written with 17 significant digits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Atom, GridSpec1D, Measure1D, Measure2D};
use crate::error::{Error, Result};

/// Lossless float formatting used by every CSV writer in the crate.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AtomSidecar {
    pub atoms: Vec<Atom>,
}

pub fn measure_to_csv(m: &Measure1D) -> String {
    let mut out = String::from("x,density\n");
    if let Some(g) = m.grid() {
        for (x, v) in g.points().zip(m.density()) {
            let _ = writeln!(out, "{},{}", format_float(x), format_float(*v));
        }
    }
    out
}

pub fn atoms_to_json(m: &Measure1D) -> String {
    serde_json::to_string(&AtomSidecar {
        atoms: m.atoms().to_vec(),
    })
    .expect("atoms serialize")
}

/// Rebuilds a measure from [`measure_to_csv`] output and an optional sidecar.
pub fn measure_from_csv(csv: &str, sidecar: Option<&str>) -> Result<Measure1D> {
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in csv.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::InvalidGrid(format!("malformed CSV row {}", lineno + 1)))
        };
        xs.push(parse(cols.next())?);
        values.push(parse(cols.next())?);
    }
    let atoms = match sidecar {
        Some(s) => {
            serde_json::from_str::<AtomSidecar>(s)
                .map_err(|e| Error::InvalidState(format!("atom sidecar: {e}")))?
                .atoms
        }
        None => Vec::new(),
    };
    let samples = match xs.len() {
        0 => None,
        1 => return Err(Error::InvalidGrid("a grid needs at least two rows".into())),
        n => {
            let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
            Some((values, GridSpec1D::new(xs[0], dx, n)?))
        }
    };
    Measure1D::from_parts(samples, atoms)
}

/// Dense part of a 2D measure as `x,y,density` rows (x-major).
pub fn measure2d_to_csv(m: &Measure2D, columns: [&str; 3]) -> String {
    let mut out = format!("{},{},{}\n", columns[0], columns[1], columns[2]);
    if let Some(d) = m.dense() {
        let ys: Vec<String> = d.y_grid().points().map(format_float).collect();
        for (ix, x) in d.x_grid().points().enumerate() {
            let xs = format_float(x);
            for (iy, y) in ys.iter().enumerate() {
                let _ = writeln!(out, "{xs},{y},{}", format_float(d.value(ix, iy)));
            }
        }
    }
    out
}
