//! Trilinearly interpolated tensor grids and their on-disk format.
//!
//! The data file holds little-endian `f64` values in row-major order with shape
//! `(nx, ny, nz, 3, 3)`. A JSON sidecar carries `origin`, `spacing` and `shape`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CoefficientError;
use crate::{Mat3, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSidecar {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub shape: [usize; 3],
}

#[derive(Clone, Debug)]
pub struct GridTensor {
    pub meta: GridSidecar,
    data: Vec<f64>,
    /// Value returned outside the grid's bounding box.
    pub outside: Mat3,
}

impl GridTensor {
    pub fn new(meta: GridSidecar, data: Vec<f64>, outside: Mat3) -> Result<Self, CoefficientError> {
        let [nx, ny, nz] = meta.shape;
        if nx < 2 || ny < 2 || nz < 2 {
            return Err(CoefficientError::InvalidInput(format!("grid shape {:?} needs at least 2 nodes per axis", meta.shape)));
        }
        if meta.spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(CoefficientError::InvalidInput(format!("grid spacing {:?} must be positive", meta.spacing)));
        }
        let expected = nx * ny * nz * 9;
        if data.len() != expected {
            return Err(CoefficientError::InvalidInput(format!(
                "grid data holds {} values, shape {:?} needs {expected}",
                data.len(),
                meta.shape
            )));
        }
        Ok(GridTensor { meta, data, outside })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(meta: GridSidecar, outside: Mat3, f: impl Fn(&Point) -> Mat3) -> Result<Self, CoefficientError> {
        let [nx, ny, nz] = meta.shape;
        let mut data = Vec::with_capacity(nx * ny * nz * 9);
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let p = Point::new(
                        meta.origin[0] + i as f64 * meta.spacing[0],
                        meta.origin[1] + j as f64 * meta.spacing[1],
                        meta.origin[2] + k as f64 * meta.spacing[2],
                    );
                    let m = f(&p);
                    for r in 0..3 {
                        for c in 0..3 {
                            data.push(m[(r, c)]);
                        }
                    }
                }
            }
        }
        Self::new(meta, data, outside)
    }

    fn node(&self, i: usize, j: usize, k: usize) -> Mat3 {
        let [_, ny, nz] = self.meta.shape;
        let base = ((i * ny + j) * nz + k) * 9;
        Mat3::from_row_slice(&self.data[base..base + 9])
    }

    pub fn eval(&self, x: &Point) -> Mat3 {
        let mut idx = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let n = self.meta.shape[a];
            let t = (x[a] - self.meta.origin[a]) / self.meta.spacing[a];
            if !(t >= 0.0 && t <= (n - 1) as f64) {
                return self.outside;
            }
            let i = (t.floor() as usize).min(n - 2);
            idx[a] = i;
            frac[a] = t - i as f64;
        }
        let mut out = Mat3::zeros();
        for corner in 0..8 {
            let (di, dj, dk) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
            let w = (if di == 1 { frac[0] } else { 1.0 - frac[0] })
                * (if dj == 1 { frac[1] } else { 1.0 - frac[1] })
                * (if dk == 1 { frac[2] } else { 1.0 - frac[2] });
            if w != 0.0 {
                out += self.node(idx[0] + di, idx[1] + dj, idx[2] + dk) * w;
            }
        }
        out
    }

    pub fn read(data_path: &Path, sidecar_path: &Path, outside: Mat3) -> Result<Self, CoefficientError> {
        let meta: GridSidecar = serde_json::from_slice(&fs::read(sidecar_path).map_err(|e| io_err(sidecar_path, e))?)
            .map_err(|e| CoefficientError::InvalidInput(format!("{}: {e}", sidecar_path.display())))?;
        let bytes = fs::read(data_path).map_err(|e| io_err(data_path, e))?;
        if bytes.len() % 8 != 0 {
            return Err(CoefficientError::InvalidInput(format!("{}: length is not a multiple of 8", data_path.display())));
        }
        let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::new(meta, data, outside)
    }

    pub fn write(&self, data_path: &Path, sidecar_path: &Path) -> Result<(), CoefficientError> {
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(data_path, bytes).map_err(|e| io_err(data_path, e))?;
        let json = serde_json::to_vec_pretty(&self.meta).expect("sidecar serializes");
        fs::write(sidecar_path, json).map_err(|e| io_err(sidecar_path, e))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CoefficientError {
    CoefficientError::InvalidInput(format!("{}: {e}", path.display()))
}
