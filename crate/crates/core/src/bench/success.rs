//! Success ratios: the share of runs whose final MSE ends at or below a threshold.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::matrix::RunRecord;
use crate::netlib::ModelKind;

pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessGroup {
    pub family: String,
    pub n_points: usize,
    pub kind: ModelKind,
    pub successes: usize,
    pub total: usize,
    pub ratio: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessReport {
    pub threshold: f64,
    /// Sorted by family, point count, kind.
    pub groups: Vec<SuccessGroup>,
}

/// A run succeeds when it has a finite final MSE `≤ threshold`.
pub fn is_success(record: &RunRecord, threshold: f64) -> bool {
    record.final_mse.is_some_and(|m| m.is_finite() && m <= threshold)
}

/// Groups `records` by (family, point count, kind).
pub fn success_ratio<'a>(records: impl IntoIterator<Item = &'a RunRecord>, threshold: f64) -> SuccessReport {
    let mut tally: BTreeMap<(String, usize, ModelKind), (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = tally.entry((r.family.clone(), r.n_points, r.kind)).or_default();
        e.1 += 1;
        if is_success(r, threshold) {
            e.0 += 1;
        }
    }
    let groups = tally
        .into_iter()
        .map(|((family, n_points, kind), (successes, total))| SuccessGroup {
            family,
            n_points,
            kind,
            successes,
            total,
            ratio: successes as f64 / total as f64,
            threshold,
        })
        .collect();
    SuccessReport { threshold, groups }
}
