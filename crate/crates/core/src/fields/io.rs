//! Raw little-endian snapshot files with a JSON sidecar.
//!
//! `<name>.bin` holds the components one after another, each in node order
//! (x fastest), as 64-bit IEEE floats. `<name>.json` records the grid, the
//! component count, the time and the field name.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Grid, VectorField};
use crate::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub name: String,
    pub n: usize,
    pub box_length: f64,
    pub components: usize,
    pub t: f64,
}

pub fn snapshot_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{name}.bin")), dir.join(format!("{name}.json")))
}

/// Writes components (each of length `n³`) and the sidecar.
pub fn write_snapshot<T: Real>(
    dir: &Path,
    name: &str,
    grid: &Grid<T>,
    t: T,
    components: &[&[T]],
) -> Result<SnapshotMeta> {
    let mut bytes = Vec::with_capacity(8 * grid.len() * components.len());
    for c in components {
        if c.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        for v in c.iter() {
            bytes.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
        }
    }
    let meta = SnapshotMeta {
        name: name.to_string(),
        n: grid.n(),
        box_length: grid.box_length().to_f64_lossy(),
        components: components.len(),
        t: t.to_f64_lossy(),
    };
    let (bin, json) = snapshot_paths(dir, name);
    fs::write(bin, bytes)?;
    fs::write(json, serde_json::to_string_pretty(&meta)?)?;
    Ok(meta)
}

/// Reads a snapshot back as `f64` components.
pub fn read_snapshot(dir: &Path, name: &str) -> Result<(SnapshotMeta, Vec<Vec<f64>>)> {
    let (bin, json) = snapshot_paths(dir, name);
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(json)?)?;
    let bytes = fs::read(bin)?;
    let len = meta.n * meta.n * meta.n;
    if bytes.len() != 8 * len * meta.components {
        return Err(Error::InvalidConfig(format!(
            "snapshot {name}: expected {} bytes, found {}",
            8 * len * meta.components,
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    Ok((meta, values.chunks(len).map(|c| c.to_vec()).collect()))
}

pub fn write_vector_snapshot<T: Real>(dir: &Path, name: &str, v: &VectorField<T>, t: T) -> Result<SnapshotMeta> {
    write_snapshot(dir, name, &v.grid, t, &[&v.comps[0], &v.comps[1], &v.comps[2]])
}

pub fn read_vector_snapshot(dir: &Path, name: &str) -> Result<(SnapshotMeta, VectorField<f64>)> {
    let (meta, comps) = read_snapshot(dir, name)?;
    if meta.components != 3 {
        return Err(Error::InvalidConfig(format!("snapshot {name} has {} components", meta.components)));
    }
    let grid = Grid::new(meta.n, meta.box_length)?;
    let mut it = comps.into_iter();
    let field = VectorField::from_components(grid, std::array::from_fn(|_| it.next().unwrap()))?;
    Ok((meta, field))
}
