//! Snapshot and time-series files.
//!
//! A snapshot file starts with one line of JSON
//! `{"schema":"cascade-scope/1","N":..,"L":..,"nu":..,"time":..,"fields":["ux","uy","uz","p"],"dtype":"f64-le","order":"x-fastest"}`
//! followed by the raw little-endian samples of each field in order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{SeriesRow, Snapshot, SnapshotSink};
use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::spectral::{Fft3, PhysicalScalar, PhysicalVector, ScalarField, VectorField};

pub const SCHEMA: &str = "cascade-scope/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub schema: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub nu: f64,
    pub time: f64,
    pub fields: Vec<String>,
    pub dtype: String,
    pub order: String,
}

impl SnapshotHeader {
    pub fn new(grid: &Grid, nu: f64, time: f64, fields: &[&str]) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            n: grid.n(),
            l: grid.l(),
            nu,
            time,
            fields: fields.iter().map(|s| s.to_string()).collect(),
            dtype: "f64-le".to_string(),
            order: "x-fastest".to_string(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.l)
    }
}

/// Writes a header line and raw field arrays.
pub fn write_fields(path: &Path, header: &SnapshotHeader, arrays: &[&[f64]]) -> Result<()> {
    if header.fields.len() != arrays.len() {
        return Err(CoreError::arg("field names and arrays differ in count"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for a in arrays {
        let mut buf = Vec::with_capacity(a.len() * 8);
        for v in a.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_fields`].
pub fn read_fields(path: &Path) -> Result<(SnapshotHeader, Vec<Vec<f64>>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    let header: SnapshotHeader = serde_json::from_slice(&line)
        .map_err(|e| CoreError::Format(format!("{}: bad header: {e}", path.display())))?;
    if header.schema != SCHEMA || header.dtype != "f64-le" || header.order != "x-fastest" {
        return Err(CoreError::Format(format!(
            "{}: unsupported schema/dtype/order",
            path.display()
        )));
    }
    let len = header.grid()?.physical_len();
    let mut out = Vec::with_capacity(header.fields.len());
    let mut bytes = vec![0u8; len * 8];
    for name in &header.fields {
        r.read_exact(&mut bytes).map_err(|e| {
            CoreError::Format(format!("{}: field {name} truncated: {e}", path.display()))
        })?;
        out.push(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect(),
        );
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(CoreError::Format(format!(
            "{}: {} trailing bytes",
            path.display(),
            rest.len()
        )));
    }
    Ok((header, out))
}

/// A snapshot loaded from disk.
#[derive(Debug, Clone)]
pub struct LoadedSnapshot {
    pub header: SnapshotHeader,
    pub u: PhysicalVector,
    pub p: PhysicalScalar,
}

impl LoadedSnapshot {
    pub fn spectral(&self, fft: &Fft3) -> Result<(VectorField, ScalarField)> {
        Ok((
            VectorField::from_physical(&self.u, fft)?,
            ScalarField::from_physical(&self.p, fft)?,
        ))
    }
}

pub fn write_snapshot(
    path: &Path,
    nu: f64,
    time: f64,
    u: &PhysicalVector,
    p: &PhysicalScalar,
) -> Result<()> {
    let h = SnapshotHeader::new(u.grid(), nu, time, &["ux", "uy", "uz", "p"]);
    write_fields(path, &h, &[u.comp(0), u.comp(1), u.comp(2), p.values()])
}

pub fn read_snapshot(path: &Path) -> Result<LoadedSnapshot> {
    let (header, mut arrays) = read_fields(path)?;
    if header.fields != ["ux", "uy", "uz", "p"] {
        return Err(CoreError::Format(format!(
            "{}: expected fields ux,uy,uz,p",
            path.display()
        )));
    }
    let g = header.grid()?;
    let p = arrays.pop().expect("four arrays");
    let uz = arrays.pop().expect("four arrays");
    let uy = arrays.pop().expect("four arrays");
    let ux = arrays.pop().expect("four arrays");
    Ok(LoadedSnapshot {
        u: PhysicalVector::from_components(g, [ux, uy, uz])?,
        p: PhysicalScalar::from_values(g, p)?,
        header,
    })
}

/// Static force file: same layout with fields `fx,fy,fz`.
pub fn write_force(path: &Path, nu: f64, f: &PhysicalVector) -> Result<()> {
    let h = SnapshotHeader::new(f.grid(), nu, 0.0, &["fx", "fy", "fz"]);
    write_fields(path, &h, &[f.comp(0), f.comp(1), f.comp(2)])
}

pub fn read_force(path: &Path) -> Result<PhysicalVector> {
    let (header, arrays) = read_fields(path)?;
    if header.fields != ["fx", "fy", "fz"] {
        return Err(CoreError::Format(format!(
            "{}: expected fields fx,fy,fz",
            path.display()
        )));
    }
    let g = header.grid()?;
    let [a, b, c]: [Vec<f64>; 3] = arrays
        .try_into()
        .map_err(|_| CoreError::Format("force file needs three arrays".into()))?;
    PhysicalVector::from_components(g, [a, b, c])
}

/// File name of snapshot `index`.
pub fn snapshot_name(index: usize) -> String {
    format!("snap_{index:05}.bin")
}

/// Sink writing every snapshot into a directory.
pub struct SnapshotWriter {
    dir: PathBuf,
    nu: f64,
    pub written: Vec<PathBuf>,
}

impl SnapshotWriter {
    pub fn new(dir: impl Into<PathBuf>, nu: f64) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            nu,
            written: Vec::new(),
        })
    }
}

impl SnapshotSink for SnapshotWriter {
    fn accept(&mut self, snap: &Snapshot<'_>, fft: &Fft3) -> Result<()> {
        let path = self.dir.join(snapshot_name(snap.index));
        let u = snap.u.to_physical(fft)?;
        let p = snap.p.to_physical(fft)?;
        write_snapshot(&path, self.nu, snap.time, &u, &p)?;
        self.written.push(path);
        Ok(())
    }
}

/// Sink keeping only the scalar series.
#[derive(Debug, Default, Clone)]
pub struct SeriesRecorder {
    pub rows: Vec<SeriesRow>,
}

impl SnapshotSink for SeriesRecorder {
    fn accept(&mut self, snap: &Snapshot<'_>, _: &Fft3) -> Result<()> {
        self.rows.push(snap.series);
        Ok(())
    }
}

/// CSV `t,energy,enstrophy,force_work` with `energy = ||u||^2/2`,
/// `enstrophy = ||grad u||^2` and `force_work = (f, u)`.
pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut s = String::from("t,energy,enstrophy,force_work\n");
    for r in rows {
        s.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e}\n",
            r.t,
            r.energy(),
            r.grad_sq,
            r.force_work
        ));
    }
    s
}

/// Full scalar series including the quantities the diagnostics need.
pub fn write_series_json(path: &Path, rows: &[SeriesRow]) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(w, rows)?;
    Ok(())
}

pub fn read_series_json(path: &Path) -> Result<Vec<SeriesRow>> {
    let r = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(8, 3.0).unwrap();
        let u = PhysicalVector::from_fn(g, |x| [x[0], -x[1], x[2] * 0.5]);
        let p = PhysicalScalar::from_fn(g, |x| x[0] * x[1]);
        let path = dir.path().join("s.bin");
        write_snapshot(&path, 0.1, 2.5, &u, &p).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.u, u);
        assert_eq!(back.p, p);
        assert_eq!(back.header.time, 2.5);
        let text = std::fs::read(&path).unwrap();
        let nl = text.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(text.len() - nl - 1, 4 * 8 * g.physical_len());
    }

    #[test]
    fn truncated_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(8, 3.0).unwrap();
        let u = PhysicalVector::zeros(g);
        let p = PhysicalScalar::zeros(g);
        let path = dir.path().join("s.bin");
        write_snapshot(&path, 0.1, 0.0, &u, &p).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(read_snapshot(&path), Err(CoreError::Format(_))));
    }
}
