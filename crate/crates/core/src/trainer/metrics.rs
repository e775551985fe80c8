//! Per-epoch metrics log (CSV) and the JSON run summary.
//!
//! CSV columns, one row per epoch (epoch 0 is the pre-training evaluation):
//!
//! `epoch,loss_train,loss_weighted,loss_pde_train,loss_t_train,loss_x_train,loss_val,w_bounds,w_pde,lr,mse,resampled`
//!
//! `loss_train` and `loss_val` are the unweighted sums `L_bounds + L_pde`;
//! `mse` is empty except at evaluation epochs.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 12] = [
    "epoch",
    "loss_train",
    "loss_weighted",
    "loss_pde_train",
    "loss_t_train",
    "loss_x_train",
    "loss_val",
    "w_bounds",
    "w_pde",
    "lr",
    "mse",
    "resampled",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsRow {
    pub epoch: u64,
    pub loss_train: f64,
    pub loss_weighted: f64,
    pub loss_pde_train: f64,
    pub loss_t_train: f64,
    pub loss_x_train: f64,
    pub loss_val: f64,
    pub w_bounds: f64,
    pub w_pde: f64,
    pub lr: f64,
    pub mse: Option<f64>,
    pub resampled: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsLog {
    pub rows: Vec<MetricsRow>,
}

impl MetricsLog {
    pub fn push(&mut self, row: MetricsRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.epoch <= last.epoch {
                return Err(Error::Structural(format!(
                    "metrics row for epoch {} follows epoch {}",
                    row.epoch, last.epoch
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn last(&self) -> Option<&MetricsRow> {
        self.rows.last()
    }

    /// `(epoch, mse)` at every evaluation epoch.
    pub fn mse_curve(&self) -> Vec<(u64, f64)> {
        self.rows.iter().filter_map(|r| r.mse.map(|m| (r.epoch, m))).collect()
    }

    pub fn final_mse(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.mse)
    }

    pub fn resample_count(&self) -> usize {
        self.rows.iter().filter(|r| r.resampled).count()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        let parse = |e: csv::Error| Error::Parse(format!("metrics CSV: {e}"));
        wr.write_record(CSV_HEADER).map_err(parse)?;
        for r in &self.rows {
            wr.serialize(r).map_err(parse)?;
        }
        wr.flush().map_err(|e| Error::Parse(format!("metrics CSV: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    /// Parses a log, requiring the exact header and strictly increasing epochs.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = rd
            .headers()
            .map_err(|e| Error::Parse(format!("metrics CSV header: {e}")))?
            .clone();
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(Error::Parse(format!(
                "metrics CSV header mismatch: expected {}, got {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut log = MetricsLog::default();
        for (i, rec) in rd.deserialize::<MetricsRow>().enumerate() {
            let row = rec.map_err(|e| Error::Parse(format!("metrics CSV row {}: {e}", i + 1)))?;
            log.push(row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok(log)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        MetricsLog::read_csv(text.as_bytes())
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        MetricsLog::read_csv(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state")]
pub enum RunStatus {
    Completed,
    Diverged { epoch: u64, detail: String },
}

/// JSON companion of a metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub model: String,
    pub kind: String,
    pub n_params: usize,
    pub problem: crate::pdeset::PdeProblem,
    pub config: super::TrainConfig,
    pub lr_schedule: String,
    pub status: RunStatus,
    pub epochs_completed: u64,
    pub final_mse: Option<f64>,
    pub final_loss_train: Option<f64>,
    pub resample_count: usize,
    pub wall_time_s: f64,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("run summary: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(epoch: u64, mse: Option<f64>) -> MetricsRow {
        MetricsRow {
            epoch,
            loss_train: 0.5,
            loss_weighted: 0.25,
            loss_pde_train: 0.2,
            loss_t_train: 0.1,
            loss_x_train: 0.2,
            loss_val: 0.6,
            w_bounds: 1.0,
            w_pde: 1.0,
            lr: 0.01,
            mse,
            resampled: epoch == 2,
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut log = MetricsLog::default();
        log.push(row(0, Some(0.3))).unwrap();
        log.push(row(1, None)).unwrap();
        log.push(row(2, Some(1.0 / 3.0))).unwrap();
        let text = log.to_csv_string();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        assert_eq!(MetricsLog::parse_csv(&text).unwrap(), log);
        assert_eq!(log.mse_curve(), vec![(0, 0.3), (2, 1.0 / 3.0)]);
        assert_eq!(log.resample_count(), 1);
    }

    #[test]
    fn rejects_out_of_order_and_bad_header() {
        let mut log = MetricsLog::default();
        log.push(row(3, None)).unwrap();
        assert!(log.push(row(3, None)).is_err());
        let mut text = MetricsLog {
            rows: vec![row(1, None), row(2, None)],
        }
        .to_csv_string();
        assert!(MetricsLog::parse_csv(&text.replace("\n2,", "\n0,")).is_err());
        text = text.replacen("epoch", "epoc", 1);
        assert!(matches!(MetricsLog::parse_csv(&text), Err(Error::Parse(_))));
    }
}
