use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use slipkit::contour::DEFAULT_MIN_AREA;
use slipkit::estimators::{self, SkeletonSource, DEFAULT_ELONGATION_MIN, DEFAULT_WINDOW};
use slipkit::metrics::rotational_error;
use slipkit::{io, EstimatorConfig, EstimatorKind, SlipError};

use super::emit;
use crate::failure::{CmdResult, Failure};

/// Estimator tuning shared by `angle` and `sweep`.
#[derive(Args, Debug, Clone)]
pub struct EstimatorArgs {
    /// Minimum major/minor axis ratio for a frame to count as reliable.
    #[arg(long, default_value_t = DEFAULT_ELONGATION_MIN)]
    elongation_min: f64,
    /// Minimum area in pixels of the predominant contact region.
    #[arg(long, default_value_t = DEFAULT_MIN_AREA)]
    min_area: usize,
    /// Mask thinned by the skeleton estimator: `denoised` or `raw`.
    #[arg(long, default_value = "denoised")]
    skeleton_source: SkeletonSource,
}

impl EstimatorArgs {
    pub fn config(&self) -> Result<EstimatorConfig, Failure> {
        if !(self.elongation_min >= 1.0) || !self.elongation_min.is_finite() {
            return Err(Failure::Usage(format!(
                "--elongation-min must be a finite value >= 1, got {}",
                self.elongation_min
            )));
        }
        if self.min_area == 0 {
            return Err(Failure::Usage("--min-area must be at least 1".into()));
        }
        Ok(EstimatorConfig {
            elongation_min: self.elongation_min,
            min_area: self.min_area,
            skeleton_source: self.skeleton_source,
        })
    }
}

#[derive(Args, Debug)]
pub struct AngleArgs {
    /// Directory holding the frame masks, read in file-name order.
    #[arg(long, value_name = "DIR")]
    masks: PathBuf,
    /// Angle estimator: `skeleton`, `pca` or `ellipse`.
    #[arg(long, default_value = "skeleton")]
    estimator: EstimatorKind,
    /// Moving-average window length in frames.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Ground-truth CSV (`gt` column, or `dx,dy` marker columns).
    #[arg(long, value_name = "CSV")]
    gt: Option<PathBuf>,
    /// Output CSV; stdout when omitted.
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: EstimatorArgs,
}

pub fn run(a: AngleArgs) -> CmdResult {
    let cfg = a.tuning.config()?;
    if a.window == 0 {
        return Err(Failure::Usage("--window must be at least 1".into()));
    }
    let masks: Vec<_> = io::read_mask_dir(&a.masks)?.into_iter().map(|(_, m)| m).collect();
    if masks.is_empty() {
        return Err(Failure::Data(format!("no mask images in {}", a.masks.display())));
    }
    let gt = match &a.gt {
        None => None,
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            let gt = io::parse_ground_truth_csv(&text).map_err(|e| Failure::from(e).at(p))?;
            if gt.len() != masks.len() {
                return Err(Failure::Data(format!(
                    "{} ground-truth rows for {} frames",
                    gt.len(),
                    masks.len()
                )));
            }
            Some(gt)
        }
    };
    let samples = match estimators::track_lift(&masks, a.estimator, a.window, &cfg) {
        Err(SlipError::InitialContactUnreliable) => {
            return Err(Failure::Degenerate(format!(
                "first frame has no reliable {} axis: the contact is missing, smaller than {} px, \
                 or too round (elongation below {}); rotation cannot be anchored",
                a.estimator, cfg.min_area, cfg.elongation_min
            )))
        }
        other => other?,
    };

    let mut csv = String::from("frame,raw_angle,filtered_angle,reliable");
    csv.push_str(if gt.is_some() { ",gt,re\n" } else { "\n" });
    for s in &samples {
        write!(csv, "{},{:.6},{:.6},{}", s.frame_index, s.raw_angle, s.filtered_angle, s.reliable).unwrap();
        if let Some(gt) = &gt {
            let g = gt[s.frame_index];
            write!(csv, ",{:.6},{:.6}", g, rotational_error(s.filtered_angle, g)).unwrap();
        }
        csv.push('\n');
    }
    emit(a.out.as_deref(), &csv)?;

    let unreliable = samples.iter().filter(|s| !s.reliable).count();
    if unreliable > 0 {
        log::warn!("{unreliable} of {} frames had no reliable axis and hold the previous angle", samples.len());
    }
    if let (Some(gt), Some(_)) = (&gt, &a.out) {
        let re: Vec<f64> = samples
            .iter()
            .map(|s| rotational_error(s.filtered_angle, gt[s.frame_index]))
            .collect();
        let (mean, std) = slipkit::metrics::mean_std(&re);
        println!("frames {}, unreliable {unreliable}, mean RE {mean:.3} ± {std:.3} deg", samples.len());
    }
    Ok(())
}
