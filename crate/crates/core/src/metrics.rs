//! Segmentation overlap scores, marker-based ground truth and rotational
//! error aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SlipError};
use crate::estimators::{assemble_trace, estimate_frames, EstimatorConfig, EstimatorKind};
use crate::types::{AngleSample, BinaryMask, LiftTrace, MarkerVector};

/// Default window sizes of the sweep.
pub const DEFAULT_SWEEP_SIZES: [usize; 5] = [2, 4, 6, 8, 10];

fn overlap_counts(pred: &BinaryMask, y: &BinaryMask) -> Result<(usize, usize, usize)> {
    pred.same_dims(y)?;
    let (mut inter, mut np, mut ny) = (0, 0, 0);
    for (&a, &b) in pred.data().iter().zip(y.data()) {
        np += a as usize;
        ny += b as usize;
        inter += (a & b) as usize;
    }
    Ok((inter, np, ny))
}

/// `2|P∩Y| / (|P| + |Y|)`; two empty masks score 1.
pub fn dice(pred: &BinaryMask, y: &BinaryMask) -> Result<f64> {
    let (inter, np, ny) = overlap_counts(pred, y)?;
    if np + ny == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (np + ny) as f64)
}

/// `|P∩Y| / |P∪Y|`; two empty masks score 1.
pub fn iou(pred: &BinaryMask, y: &BinaryMask) -> Result<f64> {
    let (inter, np, ny) = overlap_counts(pred, y)?;
    let union = np + ny - inter;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegScore {
    pub dice: f64,
    pub iou: f64,
}

pub fn seg_score(pred: &BinaryMask, y: &BinaryMask) -> Result<SegScore> {
    Ok(SegScore {
        dice: dice(pred, y)?,
        iou: iou(pred, y)?,
    })
}

/// Angle in degrees between the current and initial marker vectors.
pub fn ground_truth_angle(p: &MarkerVector, q: &MarkerVector) -> Result<f64> {
    let (np, nq) = (p.norm(), q.norm());
    if !(np > 0.0 && nq > 0.0) || !np.is_finite() || !nq.is_finite() {
        return Err(SlipError::Degenerate("marker vector has zero length".into()));
    }
    // same angle as acos of the normalized dot product, without its loss of
    // precision near 0 and 180 degrees
    let dot = p.dx * q.dx + p.dy * q.dy;
    let cross = p.dx * q.dy - p.dy * q.dx;
    Ok(cross.abs().atan2(dot).to_degrees())
}

pub fn rotational_error(predicted: f64, ground_truth: f64) -> f64 {
    (predicted - ground_truth).abs()
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean absolute rotational error over a set of lifts.
///
/// Standard deviations are population deviations; `mare_std` is the mean of
/// the per-lift deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MareReport {
    pub per_lift_mean_re: Vec<f64>,
    pub per_lift_std: Vec<f64>,
    pub mare: f64,
    pub mare_std: f64,
}

pub fn mare(lifts: &[Vec<f64>]) -> Result<MareReport> {
    if lifts.is_empty() {
        return Err(SlipError::Empty("no lifts to aggregate".into()));
    }
    let mut per_lift_mean_re = Vec::with_capacity(lifts.len());
    let mut per_lift_std = Vec::with_capacity(lifts.len());
    for (i, series) in lifts.iter().enumerate() {
        if series.is_empty() {
            return Err(SlipError::Empty(format!("lift {i} has no frames")));
        }
        let (m, s) = mean_std(series);
        per_lift_mean_re.push(m);
        per_lift_std.push(s);
    }
    let n = lifts.len() as f64;
    Ok(MareReport {
        mare: per_lift_mean_re.iter().sum::<f64>() / n,
        mare_std: per_lift_std.iter().sum::<f64>() / n,
        per_lift_mean_re,
        per_lift_std,
    })
}

/// Masks and ground-truth angles of one lift.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftData {
    pub id: String,
    pub masks: Vec<BinaryMask>,
    pub ground_truth: Vec<f64>,
}

impl LiftData {
    pub fn new(id: impl Into<String>, masks: Vec<BinaryMask>, ground_truth: Vec<f64>) -> Result<Self> {
        if masks.len() != ground_truth.len() {
            return Err(SlipError::Config(format!(
                "{} masks but {} ground-truth angles",
                masks.len(),
                ground_truth.len()
            )));
        }
        Ok(Self {
            id: id.into(),
            masks,
            ground_truth,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub estimator: EstimatorKind,
    pub window: usize,
    pub report: MareReport,
    /// Lifts whose first frame gave no reliable axis; scored as zero rotation.
    pub unstarted: usize,
}

/// Trace of a lift the estimator could not initialize: it never reports a
/// rotation, so every frame holds zero and is flagged unreliable.
fn unstarted_trace(frames: usize) -> Vec<AngleSample> {
    (0..frames)
        .map(|frame_index| AngleSample {
            frame_index,
            raw_angle: 0.0,
            filtered_angle: 0.0,
            reliable: false,
        })
        .collect()
}

/// Traces of every lift for every window size, estimating each frame once.
///
/// A lift whose first frame is unreliable is not an error here: it is scored
/// as an estimator that never detects rotation (see [`SweepCell::unstarted`]).
pub fn sweep_traces(
    lifts: &[LiftData],
    kind: EstimatorKind,
    sizes: &[usize],
    cfg: &EstimatorConfig,
) -> Result<Vec<Vec<LiftTrace>>> {
    if sizes.is_empty() {
        return Err(SlipError::Config("no window sizes given".into()));
    }
    if sizes.contains(&0) {
        return Err(SlipError::Config("window size must be at least 1".into()));
    }
    if lifts.is_empty() {
        return Err(SlipError::Empty("no lifts given".into()));
    }
    let estimates: Vec<_> = lifts
        .par_iter()
        .map(|l| estimate_frames(&l.masks, kind, cfg))
        .collect();
    sizes
        .iter()
        .map(|&n| {
            lifts
                .iter()
                .zip(&estimates)
                .map(|(lift, est)| {
                    let samples = match assemble_trace(est, n) {
                        Err(SlipError::InitialContactUnreliable) => unstarted_trace(est.len()),
                        other => other?,
                    };
                    LiftTrace::new(lift.id.clone(), samples, lift.ground_truth.clone())
                })
                .collect()
        })
        .collect()
}

/// MARE of one estimator for each window size.
pub fn window_sweep(
    lifts: &[LiftData],
    kind: EstimatorKind,
    sizes: &[usize],
    cfg: &EstimatorConfig,
) -> Result<Vec<SweepCell>> {
    let traces = sweep_traces(lifts, kind, sizes, cfg)?;
    sizes
        .iter()
        .zip(traces)
        .map(|(&window, traces)| {
            let errors: Vec<Vec<f64>> = traces.iter().map(LiftTrace::errors).collect();
            let unstarted = traces
                .iter()
                .filter(|t| t.samples.first().is_some_and(|s| !s.reliable))
                .count();
            Ok(SweepCell {
                estimator: kind,
                window,
                report: mare(&errors)?,
                unstarted,
            })
        })
        .collect()
}

/// Long-form CSV: one row per estimator/window combination.
pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("estimator,window,mare,mare_std,lifts,unstarted\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{},{}\n",
            c.estimator,
            c.window,
            c.report.mare,
            c.report.mare_std,
            c.report.per_lift_mean_re.len(),
            c.unstarted
        ));
    }
    out
}

/// Matrix CSV: estimators as rows, window sizes as columns, `mean±std` cells.
pub fn sweep_matrix_csv(cells: &[SweepCell]) -> String {
    let mut windows: Vec<usize> = cells.iter().map(|c| c.window).collect();
    windows.sort_unstable();
    windows.dedup();
    let mut kinds: Vec<EstimatorKind> = Vec::new();
    for c in cells {
        if !kinds.contains(&c.estimator) {
            kinds.push(c.estimator);
        }
    }
    let mut out = String::from("estimator");
    for w in &windows {
        out.push_str(&format!(",w{w}"));
    }
    out.push('\n');
    for k in kinds {
        out.push_str(k.name());
        for w in &windows {
            match cells.iter().find(|c| c.estimator == k && c.window == *w) {
                Some(c) => out.push_str(&format!(",{:.2}±{:.2}", c.report.mare, c.report.mare_std)),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}
