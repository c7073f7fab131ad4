//! Print the estimator × window MARE table for the standard synthetic suite.
//!
//! Usage: `cargo run --release -p slipkit --example suite_report [seed]`

use slipkit::estimators::{EstimatorConfig, EstimatorKind};
use slipkit::metrics::{sweep_matrix_csv, window_sweep, LiftData, DEFAULT_SWEEP_SIZES};
use slipkit::synth::{standard_suite, DEFAULT_SEED};

fn main() -> slipkit::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);
    let suite = standard_suite(seed);
    let lifts: Vec<LiftData> = suite
        .generate(false)?
        .into_iter()
        .zip(&suite.lifts)
        .map(|(frames, cfg)| {
            let (masks, gt) = frames.into_iter().map(|f| (f.mask, f.ground_truth)).unzip();
            LiftData::new(cfg.id.clone(), masks, gt)
        })
        .collect::<slipkit::Result<_>>()?;
    let cfg = EstimatorConfig::default();
    let mut cells = Vec::new();
    for kind in EstimatorKind::ALL {
        cells.extend(window_sweep(&lifts, kind, &DEFAULT_SWEEP_SIZES, &cfg)?);
    }
    print!("{}", sweep_matrix_csv(&cells));
    Ok(())
}
