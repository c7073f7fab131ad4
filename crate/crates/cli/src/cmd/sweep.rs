use std::path::PathBuf;

use clap::{ArgAction, Args};
use serde::Serialize;
use slipkit::metrics::{self, SweepCell};
use slipkit::{io, EstimatorConfig, EstimatorKind};

use super::angle::EstimatorArgs;
use super::{emit, ensure_dir};
use crate::failure::{CmdResult, Failure};

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Dataset directory: one sub-directory per lift with masks and `gt.csv`.
    #[arg(long, value_name = "DIR")]
    dataset: PathBuf,
    /// Estimators to score, comma separated.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "skeleton,pca,ellipse")]
    estimators: Vec<EstimatorKind>,
    /// Window lengths to score, comma separated.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "2,4,6,8,10")]
    windows: Vec<usize>,
    /// Output directory for `sweep.csv`, `sweep_matrix.csv` and `sweep.json`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: EstimatorArgs,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    lifts: usize,
    config: EstimatorConfig,
    windows: &'a [usize],
    cells: &'a [SweepCell],
}

pub fn run(a: SweepArgs) -> CmdResult {
    let cfg = a.tuning.config()?;
    if a.windows.contains(&0) {
        return Err(Failure::Usage("window sizes must be at least 1".into()));
    }
    let lifts = io::read_dataset(&a.dataset)?;
    let mut cells = Vec::with_capacity(a.estimators.len() * a.windows.len());
    for &kind in &a.estimators {
        cells.extend(metrics::window_sweep(&lifts, kind, &a.windows, &cfg)?);
    }
    for c in cells.iter().filter(|c| c.unstarted > 0) {
        log::warn!(
            "{} window {}: {} lifts had an unreliable first frame and were scored as no rotation",
            c.estimator,
            c.window,
            c.unstarted
        );
    }
    let matrix = metrics::sweep_matrix_csv(&cells);
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        emit(Some(&dir.join("sweep.csv")), &metrics::sweep_csv(&cells))?;
        emit(Some(&dir.join("sweep_matrix.csv")), &matrix)?;
        let report = SweepReport {
            lifts: lifts.len(),
            config: cfg,
            windows: &a.windows,
            cells: &cells,
        };
        emit(Some(&dir.join("sweep.json")), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    print!("{matrix}");
    Ok(())
}
