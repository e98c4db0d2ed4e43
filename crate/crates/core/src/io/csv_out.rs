//! CSV files consumed by the plotting tools.
//!
//! Numbers are written with 17 significant digits so that parsing them back
//! recovers the `f64` values bit for bit.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::EnergyRecord;
use crate::error::{Error, Result};
use crate::fem::{FieldKind, MixedSpace};
use crate::model::State;

pub const ENERGY_HEADER: [&str; 4] = ["t", "hamiltonian", "dissipation", "skew_term"];
pub const PROFILE_HEADER: [&str; 3] = ["x", "h", "v"];
pub const FIELD_HEADER: [&str; 5] = ["x", "y", "h", "vx", "vy"];

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_num(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy_csv(records: &[EnergyRecord], path: &Path) -> Result<()> {
    write_rows(
        File::create(path)?,
        &ENERGY_HEADER,
        records.iter().map(|r| vec![r.t, r.hamiltonian, r.dissipation, r.skew_term]),
    )
}

/// 1D profile sampled at `samples_per_cell` equispaced points per cell plus
/// the right end. Interface points take the velocity of the cell to their
/// right (the last one of the cell to its left).
pub fn profile_samples(space: &MixedSpace, state: &State, samples_per_cell: usize) -> Result<Vec<[f64; 3]>> {
    if space.dim() != 1 {
        return Err(Error::InvalidArgument("profiles are one-dimensional".into()));
    }
    let n = space.mesh().n_cells();
    let m = samples_per_cell.max(1);
    let mut rows = Vec::with_capacity(n * m + 1);
    for c in 0..n {
        let geo = space.geometry(c);
        for j in 0..m {
            let xi = [j as f64 / m as f64];
            let x = geo.map(&xi)[0];
            let h = space.evaluate_in_cell(&state.h, c, &xi, FieldKind::Scalar)?[0];
            let v = space.evaluate_in_cell(&state.v, c, &xi, FieldKind::Velocity)?[0];
            rows.push([x, h, v]);
        }
    }
    let last = n - 1;
    let x = space.geometry(last).map(&[1.0])[0];
    let h = space.evaluate_in_cell(&state.h, last, &[1.0], FieldKind::Scalar)?[0];
    let v = space.evaluate_in_cell(&state.v, last, &[1.0], FieldKind::Velocity)?[0];
    rows.push([x, h, v]);
    Ok(rows)
}

pub fn write_profile_csv(rows: &[[f64; 3]], path: &Path) -> Result<()> {
    write_rows(File::create(path)?, &PROFILE_HEADER, rows.iter().map(|r| r.to_vec()))
}

/// 2D field on a `lattice x lattice` grid of `[0, L]^2`, row by row in `y`.
/// The discontinuous velocity is taken from the cell `Mesh::locate` assigns.
pub fn field_samples(space: &MixedSpace, state: &State, lattice: usize) -> Result<Vec<[f64; 5]>> {
    if space.dim() != 2 || lattice < 2 {
        return Err(Error::InvalidArgument("fields are two-dimensional with lattice >= 2".into()));
    }
    let len = space.mesh().length();
    let mut rows = Vec::with_capacity(lattice * lattice);
    for j in 0..lattice {
        for i in 0..lattice {
            // the last lattice line is exactly L, not a rounded multiple
            let coord = |k: usize| if k + 1 == lattice { len } else { len * k as f64 / (lattice - 1) as f64 };
            let p = [coord(i), coord(j)];
            let (cell, xi) = space.mesh().locate(&p)?;
            let h = space.evaluate_in_cell(&state.h, cell, &xi, FieldKind::Scalar)?[0];
            let v = space.evaluate_in_cell(&state.v, cell, &xi, FieldKind::Velocity)?;
            rows.push([p[0], p[1], h, v[0], v[1]]);
        }
    }
    Ok(rows)
}

pub fn write_field_csv(rows: &[[f64; 5]], path: &Path) -> Result<()> {
    write_rows(File::create(path)?, &FIELD_HEADER, rows.iter().map(|r| r.to_vec()))
}

/// Reads a numeric CSV with the given header.
pub fn read_numeric_csv(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::InvalidArgument(format!(
            "{}: header {found:?}, expected {header:?}",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::InvalidArgument(format!("{}: data row {}: '{s}': {e}", path.display(), line + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_energy_csv(path: &Path) -> Result<Vec<EnergyRecord>> {
    Ok(read_numeric_csv(path, &ENERGY_HEADER)?
        .into_iter()
        .map(|r| EnergyRecord { t: r[0], hamiltonian: r[1], dissipation: r[2], skew_term: r[3] })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::Mesh;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6e-9, -2.5e300, 5e-324, 0.0, 123456789.123456789] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn empty_energy_file_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("energy.csv");
        write_energy_csv(&[], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "t,hamiltonian,dissipation,skew_term\n");
        assert!(read_energy_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn profile_covers_domain() {
        let space = MixedSpace::new(Arc::new(Mesh::interval(0.4, 4).unwrap()), 1).unwrap();
        let s = State::interpolate(&space, |x| x[0] * (0.4 - x[0]), |x, v| v[0] = x[0], 0.0);
        let rows = profile_samples(&space, &s, 2).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[0][0], 0.0);
        assert!((rows[8][0] - 0.4).abs() < 1e-15);
        for r in &rows {
            assert!((r[1] - r[0] * (0.4 - r[0])).abs() < 1e-15);
            assert!((r[2] - r[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn field_lattice_shape() {
        let space = MixedSpace::new(Arc::new(Mesh::square(0.4, 3).unwrap()), 1).unwrap();
        let s = State::interpolate(&space, |x| x[0] * x[1], |x, v| v.copy_from_slice(x), 0.0);
        let rows = field_samples(&space, &s, 5).unwrap();
        assert_eq!(rows.len(), 25);
        assert_eq!((rows[24][0], rows[24][1]), (0.4, 0.4));
        for r in &rows {
            assert!((r[3] - r[0]).abs() < 1e-14 && (r[4] - r[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(read_energy_csv(&p).is_err());
    }
}
