//! Regular seismic grids and attribute volumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of predictor attributes carried per voxel.
pub const N_ATTRIBUTES: usize = 3;

/// Attribute names in storage order.
pub const ATTRIBUTE_NAMES: [&str; N_ATTRIBUTES] = ["impedance", "inst_amp", "inst_freq"];

/// Geometry of a regular (inline, xline, time) grid.
///
/// Voxels are stored inline-major, then xline, then time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeGeometry {
    pub inlines: Vec<i64>,
    pub xlines: Vec<i64>,
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
}

impl VolumeGeometry {
    pub fn new(inlines: Vec<i64>, xlines: Vec<i64>, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        let sorted_unique = |v: &[i64]| v.windows(2).all(|w| w[0] < w[1]);
        if inlines.is_empty() || xlines.is_empty() || nt == 0 {
            return Err(Error::Geometry("empty grid".into()));
        }
        if !sorted_unique(&inlines) || !sorted_unique(&xlines) {
            return Err(Error::Geometry(
                "inline and xline indices must be sorted and unique".into(),
            ));
        }
        if !(dt > 0.0) || !t0.is_finite() {
            return Err(Error::Geometry(format!("invalid time axis t0={t0}, dt={dt}")));
        }
        Ok(Self {
            inlines,
            xlines,
            t0,
            dt,
            nt,
        })
    }

    pub fn n_traces(&self) -> usize {
        self.inlines.len() * self.xlines.len()
    }

    pub fn n_voxels(&self) -> usize {
        self.n_traces() * self.nt
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_last(&self) -> f64 {
        self.time(self.nt - 1)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|k| self.time(k)).collect()
    }

    pub fn inline_pos(&self, inline: i64) -> Option<usize> {
        self.inlines.binary_search(&inline).ok()
    }

    pub fn xline_pos(&self, xline: i64) -> Option<usize> {
        self.xlines.binary_search(&xline).ok()
    }

    /// Flat trace index of grid position `(ii, xi)`.
    pub fn trace_index(&self, ii: usize, xi: usize) -> usize {
        ii * self.xlines.len() + xi
    }

    /// Flat trace index of grid labels `(inline, xline)`.
    pub fn locate(&self, inline: i64, xline: i64) -> Result<usize> {
        match (self.inline_pos(inline), self.xline_pos(xline)) {
            (Some(ii), Some(xi)) => Ok(self.trace_index(ii, xi)),
            _ => Err(Error::MissingTrace { inline, xline }),
        }
    }

    /// `(inline, xline)` labels of a flat trace index.
    pub fn labels(&self, trace: usize) -> (i64, i64) {
        let nx = self.xlines.len();
        (self.inlines[trace / nx], self.xlines[trace % nx])
    }
}

/// Three seismic attributes on a complete regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeVolume {
    pub geometry: VolumeGeometry,
    /// One `[impedance, inst_amp, inst_freq]` triple per voxel.
    pub data: Vec<[f64; N_ATTRIBUTES]>,
}

impl AttributeVolume {
    pub fn new(geometry: VolumeGeometry, data: Vec<[f64; N_ATTRIBUTES]>) -> Result<Self> {
        if data.len() != geometry.n_voxels() {
            return Err(Error::Geometry(format!(
                "expected {} voxels, got {}",
                geometry.n_voxels(),
                data.len()
            )));
        }
        Ok(Self { geometry, data })
    }

    /// All time samples of one trace.
    pub fn trace(&self, trace: usize) -> &[[f64; N_ATTRIBUTES]] {
        let nt = self.geometry.nt;
        &self.data[trace * nt..(trace + 1) * nt]
    }
}
