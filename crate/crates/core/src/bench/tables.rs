//! Merged CSV tables for downstream plotting.
//!
//! Files written into an experiment directory:
//!
//! - `candidates.csv`, `representatives.csv`: [`RunRecord`] rows.
//! - `curves.csv`: `group_id,kind,family,L,N,target_params,n_points,epoch,median_mse`.
//! - `mse_ratio.csv`: `family,L,N,target_params,n_points,epoch,mse_q,mse_c,ratio`.
//! - `epoch_ratio.csv`: `family,L,N,target_params,n_points,threshold,epochs_q,epochs_c,ratio,status`
//!   with `status` one of `ok`, `not_reached`, `undefined`, `disjoint`. Missing
//!   values are empty cells, never numbers.
//! - `success.csv`: `family,n_points,kind,successes,total,ratio,threshold`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::curves::{median_curve, ratio_curves, Curve, Reach};
use super::matrix::{CellResult, RunRecord};
use super::success::success_ratio;
use crate::error::{Error, Result};
use crate::netlib::ModelKind;
use crate::trainer::MetricsLog;

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Parse(format!("{}: {e}", path.display()))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: Option<&[&str]>) -> Result<()> {
    let mut wr = csv::WriterBuilder::new()
        .has_headers(header.is_none())
        .from_path(path)
        .map_err(csv_err(path))?;
    if let Some(h) = header {
        wr.write_record(h).map_err(csv_err(path))?;
    }
    for r in rows {
        wr.serialize(r).map_err(csv_err(path))?;
    }
    wr.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records<'a>(path: &Path, records: impl IntoIterator<Item = &'a RunRecord>) -> Result<()> {
    write_rows(path, records, None)
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    rd.deserialize().map(|r| r.map_err(csv_err(path))).collect()
}

/// Writes `candidates.csv` and `representatives.csv`.
pub fn write_matrix_tables(dir: &Path, results: &[CellResult]) -> Result<()> {
    write_records(
        &dir.join("candidates.csv"),
        results.iter().flat_map(|r| r.runs.iter().map(|(rec, _)| rec)),
    )?;
    write_records(
        &dir.join("representatives.csv"),
        results.iter().map(|r| &r.representative().0),
    )
}

/// Median curve for one configuration across its seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCurve {
    pub group_id: String,
    pub kind: ModelKind,
    pub family: String,
    pub l: f64,
    pub n: f64,
    pub target_params: usize,
    pub n_points: usize,
    pub curve: Curve,
}

/// Groups representative runs by configuration and takes median curves.
pub fn group_curves(runs: &[(RunRecord, MetricsLog)]) -> Result<Vec<GroupCurve>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (k, (rec, _)) in runs.iter().enumerate() {
        groups.entry(rec.group_id.as_str()).or_default().push(k);
    }
    groups
        .into_values()
        .map(|idx| {
            let logs: Vec<MetricsLog> = idx.iter().map(|&k| runs[k].1.clone()).collect();
            let r = &runs[idx[0]].0;
            Ok(GroupCurve {
                group_id: r.group_id.clone(),
                kind: r.kind,
                family: r.family.clone(),
                l: r.l,
                n: r.n,
                target_params: r.target_params,
                n_points: r.n_points,
                curve: median_curve(&logs)?,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct CurveRow<'a> {
    group_id: &'a str,
    kind: ModelKind,
    family: &'a str,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    n: f64,
    target_params: usize,
    n_points: usize,
    epoch: u64,
    median_mse: f64,
}

#[derive(Serialize)]
struct MseRatioRow<'a> {
    family: &'a str,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    n: f64,
    target_params: usize,
    n_points: usize,
    epoch: u64,
    mse_q: f64,
    mse_c: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct EpochRatioRow<'a> {
    family: &'a str,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    n: f64,
    target_params: usize,
    n_points: usize,
    threshold: Option<f64>,
    epochs_q: Option<u64>,
    epochs_c: Option<u64>,
    ratio: Option<f64>,
    status: &'static str,
}

/// Writes `curves.csv`, `mse_ratio.csv`, `epoch_ratio.csv` from representative runs.
pub fn write_ratio_tables(dir: &Path, runs: &[(RunRecord, MetricsLog)]) -> Result<Vec<GroupCurve>> {
    let groups = group_curves(runs)?;
    write_rows(
        &dir.join("curves.csv"),
        groups.iter().flat_map(|g| {
            g.curve.iter().map(move |&(epoch, m)| CurveRow {
                group_id: &g.group_id,
                kind: g.kind,
                family: &g.family,
                l: g.l,
                n: g.n,
                target_params: g.target_params,
                n_points: g.n_points,
                epoch,
                median_mse: m,
            })
        }),
        Some(&[
            "group_id",
            "kind",
            "family",
            "L",
            "N",
            "target_params",
            "n_points",
            "epoch",
            "median_mse",
        ]),
    )?;
    let mut mse_rows = Vec::new();
    let mut epoch_rows = Vec::new();
    for q in groups.iter().filter(|g| g.kind == ModelKind::Qpinn) {
        let Some(c) = groups.iter().find(|c| {
            c.kind == ModelKind::Cpinn
                && c.family == q.family
                && c.l == q.l
                && c.n == q.n
                && c.target_params == q.target_params
                && c.n_points == q.n_points
        }) else {
            continue;
        };
        let rc = ratio_curves(&q.curve, &c.curve)?;
        let cmse: BTreeMap<u64, f64> = c.curve.iter().copied().collect();
        for &(epoch, ratio) in &rc.mse_ratio {
            let mse_q = q
                .curve
                .iter()
                .find(|p| p.0 == epoch)
                .map(|p| p.1)
                .expect("shared epoch");
            mse_rows.push(MseRatioRow {
                family: &q.family,
                l: q.l,
                n: q.n,
                target_params: q.target_params,
                n_points: q.n_points,
                epoch,
                mse_q,
                mse_c: cmse[&epoch],
                ratio,
            });
        }
        let base = |threshold, epochs_q, epochs_c, ratio, status| EpochRatioRow {
            family: &q.family,
            l: q.l,
            n: q.n,
            target_params: q.target_params,
            n_points: q.n_points,
            threshold,
            epochs_q,
            epochs_c,
            ratio,
            status,
        };
        if rc.disjoint_range {
            epoch_rows.push(base(None, None, None, None, "disjoint"));
        }
        for e in &rc.epoch_ratio {
            let status = match (e.epochs_q, e.epochs_c, e.ratio) {
                (_, _, Some(_)) => "ok",
                (Reach::NotReached, _, _) | (_, Reach::NotReached, _) => "not_reached",
                _ => "undefined",
            };
            epoch_rows.push(base(
                Some(e.threshold),
                e.epochs_q.epoch(),
                e.epochs_c.epoch(),
                e.ratio,
                status,
            ));
        }
    }
    write_rows(
        &dir.join("mse_ratio.csv"),
        mse_rows,
        Some(&[
            "family",
            "L",
            "N",
            "target_params",
            "n_points",
            "epoch",
            "mse_q",
            "mse_c",
            "ratio",
        ]),
    )?;
    write_rows(
        &dir.join("epoch_ratio.csv"),
        epoch_rows,
        Some(&[
            "family",
            "L",
            "N",
            "target_params",
            "n_points",
            "threshold",
            "epochs_q",
            "epochs_c",
            "ratio",
            "status",
        ]),
    )?;
    Ok(groups)
}

/// Writes `success.csv` from representative records.
pub fn write_success_table(dir: &Path, records: &[RunRecord], threshold: f64) -> Result<()> {
    let report = success_ratio(records, threshold);
    write_rows(&dir.join("success.csv"), report.groups, None)
}

/// Loads representative records with their metrics logs from an experiment directory.
pub fn load_representatives(dir: &Path) -> Result<Vec<(RunRecord, MetricsLog)>> {
    read_records(&dir.join("representatives.csv"))?
        .into_iter()
        .map(|r| {
            let log = MetricsLog::load_csv(&dir.join("runs").join(format!("{}.csv", r.run_id)))?;
            Ok((r, log))
        })
        .collect()
}
