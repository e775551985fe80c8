//! Median MSE curves, epochs-to-threshold and the q/c ratio analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trainer::MetricsLog;

/// `(epoch, mse)` samples at evaluation epochs, in increasing epoch order.
pub type Curve = Vec<(u64, f64)>;

/// Threshold ladder density (values per decade).
pub const LADDER_PER_DECADE: u32 = 8;

/// Per evaluation epoch, the median MSE across logs (lower median for even
/// counts). All logs must share their evaluation epochs.
pub fn median_curve(logs: &[MetricsLog]) -> Result<Curve> {
    let curves: Vec<Curve> = logs.iter().map(MetricsLog::mse_curve).collect();
    median_of_curves(&curves)
}

pub fn median_of_curves(curves: &[Curve]) -> Result<Curve> {
    let first = curves
        .first()
        .ok_or_else(|| Error::Structural("median of zero curves".into()))?;
    for (k, c) in curves.iter().enumerate().skip(1) {
        if c.len() != first.len() || c.iter().zip(first).any(|(a, b)| a.0 != b.0) {
            return Err(Error::Structural(format!(
                "curve {k} does not share the evaluation epochs of curve 0"
            )));
        }
    }
    let mut out = Vec::with_capacity(first.len());
    let mut column = Vec::with_capacity(curves.len());
    for (i, &(epoch, _)) in first.iter().enumerate() {
        column.clear();
        column.extend(curves.iter().map(|c| c[i].1));
        column.sort_by(f64::total_cmp);
        out.push((epoch, column[(column.len() - 1) / 2]));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reach {
    Reached(u64),
    NotReached,
}

impl Reach {
    pub fn epoch(self) -> Option<u64> {
        match self {
            Reach::Reached(e) => Some(e),
            Reach::NotReached => None,
        }
    }
}

/// First evaluation epoch whose MSE is at or below `threshold`.
pub fn epochs_to_reach(curve: &[(u64, f64)], threshold: f64) -> Reach {
    curve
        .iter()
        .find(|&&(_, m)| m <= threshold)
        .map_or(Reach::NotReached, |&(e, _)| Reach::Reached(e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRatio {
    pub threshold: f64,
    pub epochs_q: Reach,
    pub epochs_c: Reach,
    /// `epochs_q / epochs_c`; absent when either side misses the threshold,
    /// or when exactly one side is already there at epoch 0.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurves {
    /// `(epoch, mse_q / mse_c)` at shared evaluation epochs.
    pub mse_ratio: Vec<(u64, f64)>,
    /// Sorted by descending threshold.
    pub epoch_ratio: Vec<EpochRatio>,
    /// True when the threshold range `[min final, max initial]` is empty.
    pub disjoint_range: bool,
    /// Final qPINN MSE.
    pub accuracy_limit: f64,
}

impl RatioCurves {
    /// Smallest defined epoch ratio.
    pub fn min_epoch_ratio(&self) -> Option<f64> {
        self.epoch_ratio.iter().filter_map(|e| e.ratio).min_by(f64::total_cmp)
    }
}

/// Log-spaced thresholds `10^(k/8)` inside `[lo, hi]`, descending.
pub fn threshold_ladder(lo: f64, hi: f64) -> Vec<f64> {
    if !(lo > 0.0 && hi.is_finite() && lo <= hi) {
        return Vec::new();
    }
    let per = LADDER_PER_DECADE as f64;
    let k_hi = (hi.log10() * per).floor() as i64;
    let k_lo = (lo.log10() * per).ceil() as i64;
    (k_lo..=k_hi)
        .rev()
        .map(|k| 10f64.powf(k as f64 / per))
        .filter(|&v| v >= lo && v <= hi)
        .collect()
}

pub fn epoch_ratio_at(q: &[(u64, f64)], c: &[(u64, f64)], threshold: f64) -> EpochRatio {
    let eq = epochs_to_reach(q, threshold);
    let ec = epochs_to_reach(c, threshold);
    let ratio = match (eq, ec) {
        (Reach::Reached(0), Reach::Reached(0)) => Some(1.0),
        (Reach::Reached(a), Reach::Reached(b)) if a > 0 && b > 0 => Some(a as f64 / b as f64),
        _ => None,
    };
    EpochRatio {
        threshold,
        epochs_q: eq,
        epochs_c: ec,
        ratio,
    }
}

/// Ratio analysis of a qPINN curve against a cPINN curve.
pub fn ratio_curves(q: &[(u64, f64)], c: &[(u64, f64)]) -> Result<RatioCurves> {
    let (Some(q0), Some(qn), Some(c0), Some(cn)) = (q.first(), q.last(), c.first(), c.last()) else {
        return Err(Error::Structural("ratio analysis needs two non-empty curves".into()));
    };
    let mut mse_ratio = Vec::new();
    let mut j = 0;
    for &(e, mq) in q {
        while j < c.len() && c[j].0 < e {
            j += 1;
        }
        if j < c.len() && c[j].0 == e {
            mse_ratio.push((e, mq / c[j].1));
        }
    }
    let hi = q0.1.max(c0.1);
    let lo = qn.1.min(cn.1);
    let ladder = threshold_ladder(lo, hi);
    Ok(RatioCurves {
        mse_ratio,
        disjoint_range: ladder.is_empty(),
        epoch_ratio: ladder.into_iter().map(|t| epoch_ratio_at(q, c, t)).collect(),
        accuracy_limit: qn.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reach_examples() {
        let c = vec![(100, 1e-2), (200, 1e-4)];
        assert_eq!(epochs_to_reach(&c, 1e-3), Reach::Reached(200));
        assert_eq!(epochs_to_reach(&c, 1.0), Reach::Reached(100));
        assert_eq!(epochs_to_reach(&c, 1e-5), Reach::NotReached);
    }

    #[test]
    fn ladder_is_descending_and_bounded() {
        let l = threshold_ladder(1e-4, 1e-1);
        assert_eq!(l.len(), 25);
        assert!(l.windows(2).all(|w| w[0] > w[1]));
        assert!((l[0] - 1e-1).abs() < 1e-15 && (l[24] - 1e-4).abs() < 1e-18);
        assert!(threshold_ladder(1.0, 0.5).is_empty());
    }

    #[test]
    fn division_example() {
        let q = vec![(0, 1.0), (1000, 1e-3)];
        let c = vec![(0, 1.0), (1000, 1e-2), (10_000, 1e-3)];
        assert_eq!(epoch_ratio_at(&q, &c, 1e-3).ratio, Some(0.1));
    }
}
