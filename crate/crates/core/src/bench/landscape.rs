//! Two-parameter MSE landscape slices around a trained model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlib::ModelHandle;
use crate::refsolve::EvalGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSlice {
    pub i: usize,
    pub j: usize,
    pub center: (f64, f64),
    pub axis_i: Vec<f64>,
    pub axis_j: Vec<f64>,
    /// `mse[a][b]` at `(axis_i[a], axis_j[b])`.
    pub mse: Vec<Vec<f64>>,
    pub center_mse: f64,
}

/// `resolution` points spanning `center ± half_width`; a zero half-width gives
/// the single centre point. The centre is hit exactly for odd resolutions.
pub fn axis(center: f64, half_width: f64, resolution: usize) -> Vec<f64> {
    if half_width == 0.0 || resolution == 1 {
        return vec![center];
    }
    let k = (resolution - 1) as f64;
    (0..resolution)
        .map(|a| center + half_width * (2.0 * a as f64 / k - 1.0))
        .collect()
}

/// MSE over a grid in `(θ_i, θ_j)` with every other parameter frozen.
pub fn landscape_slice(
    model: &ModelHandle,
    grid: &EvalGrid,
    i: usize,
    j: usize,
    half_width: f64,
    resolution: usize,
) -> Result<LandscapeSlice> {
    let n = model.n_params();
    if i >= n || j >= n || i == j {
        return Err(Error::Config(format!(
            "landscape indices ({i}, {j}) must be distinct and below {n}"
        )));
    }
    if !(half_width >= 0.0 && half_width.is_finite()) || resolution == 0 {
        return Err(Error::Config(format!(
            "landscape needs a finite half-width ≥ 0 and resolution ≥ 1, got {half_width}, {resolution}"
        )));
    }
    let p = model.params.values();
    let center = (p[i], p[j]);
    let axis_i = axis(center.0, half_width, resolution);
    let axis_j = axis(center.1, half_width, resolution);
    let mut probe = model.clone();
    let mut mse = Vec::with_capacity(axis_i.len());
    for &a in &axis_i {
        let mut row = Vec::with_capacity(axis_j.len());
        for &b in &axis_j {
            let v = probe.params.values_mut();
            v[i] = a;
            v[j] = b;
            row.push(grid.mse(&probe));
        }
        mse.push(row);
    }
    Ok(LandscapeSlice {
        i,
        j,
        center,
        axis_i,
        axis_j,
        mse,
        center_mse: grid.mse(model),
    })
}

impl LandscapeSlice {
    /// Long-format CSV: `theta_i,theta_j,mse`.
    pub fn to_csv(&self) -> String {
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record(["theta_i", "theta_j", "mse"]).expect("in-memory write");
        for (a, row) in self.axis_i.iter().zip(&self.mse) {
            for (b, m) in self.axis_j.iter().zip(row) {
                wr.serialize((a, b, m)).expect("in-memory write");
            }
        }
        String::from_utf8(wr.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}
