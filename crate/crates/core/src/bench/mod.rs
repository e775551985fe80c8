//! Experiment harness: the configuration matrix, median curves, epoch and MSE
//! ratios, success ratios, landscape slices and intermediate-output probes.

mod curves;
mod landscape;
mod matrix;
mod probe;
mod success;
mod tables;

pub use curves::{
    epoch_ratio_at, epochs_to_reach, median_curve, median_of_curves, ratio_curves, threshold_ladder, Curve, EpochRatio,
    RatioCurves, Reach, LADDER_PER_DECADE,
};
pub use landscape::{axis, landscape_slice, LandscapeSlice};
pub use matrix::{
    arch_tag, pick_representative, run_matrix, Cell, CellResult, ExperimentMatrix, RunOptions, RunRecord,
};
pub use probe::{probe_intermediates, Probe};
pub use success::{is_success, success_ratio, SuccessGroup, SuccessReport, DEFAULT_SUCCESS_THRESHOLD};
pub use tables::{
    group_curves, load_representatives, read_records, write_matrix_tables, write_ratio_tables, write_records,
    write_success_table, GroupCurve,
};
