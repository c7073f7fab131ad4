//! Contact-axis estimators, axis-ambiguity resolution and the window filter.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{
    connected_components, ellipse_denoise_with, fit_ellipse, predominant_contour_with,
    DEFAULT_MIN_AREA,
};
use crate::error::{Result, SlipError};
use crate::maskgen::keep_largest_component;
use crate::types::{axis_angle, AngleSample, BinaryMask};

/// Axis ratio below which a region counts as too round to orient.
pub const DEFAULT_ELONGATION_MIN: f64 = 1.2;

/// Window size of the best reported configuration.
pub const DEFAULT_WINDOW: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Skeleton,
    Pca,
    Ellipse,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [Self::Skeleton, Self::Pca, Self::Ellipse];

    pub fn name(self) -> &'static str {
        match self {
            Self::Skeleton => "skeleton",
            Self::Pca => "pca",
            Self::Ellipse => "ellipse",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = SlipError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "skeleton" => Ok(Self::Skeleton),
            "pca" => Ok(Self::Pca),
            "ellipse" => Ok(Self::Ellipse),
            other => Err(SlipError::Config(format!(
                "unknown estimator '{other}' (expected skeleton, pca or ellipse)"
            ))),
        }
    }
}

/// Which mask the skeleton estimator thins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkeletonSource {
    /// The filled ellipse fitted to the predominant contour.
    #[default]
    Denoised,
    /// The predominant region itself (ablation).
    Raw,
}

impl FromStr for SkeletonSource {
    type Err = SlipError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "denoised" => Ok(Self::Denoised),
            "raw" => Ok(Self::Raw),
            other => Err(SlipError::Config(format!(
                "unknown skeleton source '{other}' (expected denoised or raw)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub elongation_min: f64,
    pub min_area: usize,
    pub skeleton_source: SkeletonSource,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            elongation_min: DEFAULT_ELONGATION_MIN,
            min_area: DEFAULT_MIN_AREA,
            skeleton_source: SkeletonSource::Denoised,
        }
    }
}

/// An orientation in `[0, 180)` with its elongation and reliability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisEstimate {
    pub angle: f64,
    /// Major/minor axis ratio of the supporting point set (infinite for a line).
    pub elongation: f64,
    pub reliable: bool,
}

/// Principal axis of a point set: `(angle, major variance, minor variance)`.
pub(crate) fn principal_axis<I>(points: I) -> Option<(f64, f64, f64)>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let pts: Vec<(f64, f64)> = points.into_iter().collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let (sxx, syy, sxy) = (sxx / n, syy / n, sxy / n);
    let mean = 0.5 * (sxx + syy);
    let r = (0.5 * (sxx - syy)).hypot(sxy);
    if mean + r <= 0.0 {
        return None;
    }
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Some((axis_angle(phi.cos(), phi.sin()), mean + r, (mean - r).max(0.0)))
}

fn elongation(major: f64, minor: f64) -> f64 {
    if minor <= 0.0 {
        f64::INFINITY
    } else {
        (major / minor).sqrt()
    }
}

/// Zhang-Suen thinning, iterated to a fixpoint. Pixels outside the image
/// count as background.
pub fn skeletonize(mask: &BinaryMask) -> Result<BinaryMask> {
    let Some((x0, y0, x1, y1)) = mask.bounding_box() else {
        return Err(SlipError::NoContact { min_area: 1 });
    };
    // padded crop so every pixel has eight in-bounds neighbors
    let w = x1 - x0 + 3;
    let h = y1 - y0 + 3;
    let mut grid = vec![0u8; w * h];
    for y in y0..=y1 {
        for x in x0..=x1 {
            grid[(y - y0 + 1) * w + (x - x0 + 1)] = mask.get(x, y) as u8;
        }
    }
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for first in [true, false] {
            doomed.clear();
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let i = y * w + x;
                    if grid[i] == 0 {
                        continue;
                    }
                    // P2..P9: N, NE, E, SE, S, SW, W, NW
                    let p = [
                        grid[i - w],
                        grid[i - w + 1],
                        grid[i + 1],
                        grid[i + w + 1],
                        grid[i + w],
                        grid[i + w - 1],
                        grid[i - 1],
                        grid[i - w - 1],
                    ];
                    let b: u8 = p.iter().sum();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&k| p[k] == 0 && p[(k + 1) % 8] == 1).count();
                    if a != 1 {
                        continue;
                    }
                    let (n, e, s, wst) = (p[0], p[2], p[4], p[6]);
                    let ok = if first {
                        n * e * s == 0 && e * s * wst == 0
                    } else {
                        n * e * wst == 0 && n * s * wst == 0
                    };
                    if ok {
                        doomed.push(i);
                    }
                }
            }
            for &i in &doomed {
                grid[i] = 0;
            }
            changed |= !doomed.is_empty();
        }
        if !changed {
            break;
        }
    }
    let mut out = BinaryMask::empty(mask.width(), mask.height())?;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if grid[y * w + x] != 0 {
                out.set(x + x0 - 1, y + y0 - 1, true);
            }
        }
    }
    Ok(out)
}

/// Orthogonal least-squares line through skeleton pixel centers.
///
/// Minimizing perpendicular distances makes the fitted direction the major
/// eigenvector of the pixel scatter, so vertical axes need no special case.
pub fn axis_angle_from_skeleton(skeleton: &BinaryMask, elongation_min: f64) -> Result<AxisEstimate> {
    let pixels = skeleton.count();
    let axis = principal_axis(skeleton.set_pixels().map(|(x, y)| (x as f64, y as f64)))
        .ok_or(SlipError::DegenerateSkeleton { pixels })?;
    let (angle, major, minor) = axis;
    let elong = elongation(major, minor);
    Ok(AxisEstimate {
        angle,
        elongation: elong,
        reliable: elong >= elongation_min,
    })
}

/// Major principal axis of all set pixels.
pub fn pca_angle(mask: &BinaryMask, elongation_min: f64) -> Result<AxisEstimate> {
    let (angle, major, minor) = principal_axis(mask.set_pixels().map(|(x, y)| (x as f64, y as f64)))
        .ok_or_else(|| {
            SlipError::Degenerate(format!("PCA needs two distinct pixels, got {}", mask.count()))
        })?;
    let elong = elongation(major, minor);
    Ok(AxisEstimate {
        angle,
        elongation: elong,
        reliable: elong >= elongation_min,
    })
}

/// Major-axis orientation of the ellipse fitted to the predominant contour.
pub fn ellipse_angle(mask: &BinaryMask, cfg: &EstimatorConfig) -> Result<AxisEstimate> {
    let contour = predominant_contour_with(mask, cfg.min_area)?;
    let e = fit_ellipse(&contour.as_f64())?;
    Ok(AxisEstimate {
        angle: e.theta,
        elongation: e.aspect(),
        reliable: e.aspect() >= cfg.elongation_min,
    })
}

/// Full skeleton route: denoise (or isolate the region), thin, fit a line.
pub fn skeleton_angle(mask: &BinaryMask, cfg: &EstimatorConfig) -> Result<AxisEstimate> {
    let (region, region_elongation) = match cfg.skeleton_source {
        SkeletonSource::Denoised => {
            let d = ellipse_denoise_with(mask, cfg.min_area)?;
            (d.mask, d.ellipse.aspect())
        }
        SkeletonSource::Raw => {
            let region = keep_largest_component(mask);
            if region.count() < cfg.min_area {
                return Err(SlipError::NoContact {
                    min_area: cfg.min_area,
                });
            }
            let elong = pca_angle(&region, cfg.elongation_min)?.elongation;
            (region, elong)
        }
    };
    let skeleton = skeletonize(&region)?;
    let mut est = axis_angle_from_skeleton(&skeleton, cfg.elongation_min)?;
    est.reliable &= region_elongation >= cfg.elongation_min;
    Ok(est)
}

/// Estimate the contact axis of one mask with the chosen method.
pub fn estimate_axis(mask: &BinaryMask, kind: EstimatorKind, cfg: &EstimatorConfig) -> Result<AxisEstimate> {
    if connected_components(mask).first().is_none_or(|c| c.area < cfg.min_area) {
        return Err(SlipError::NoContact {
            min_area: cfg.min_area,
        });
    }
    match kind {
        EstimatorKind::Skeleton => skeleton_angle(mask, cfg),
        // components beyond the predominant contact are ignored by every route
        EstimatorKind::Pca => pca_angle(&keep_largest_component(mask), cfg.elongation_min),
        EstimatorKind::Ellipse => ellipse_angle(mask, cfg),
    }
}

/// Signed rotation from `initial_axis` to `current_axis`, choosing the
/// representative of the 180°-periodic difference with the smallest magnitude.
pub fn relative_angle(current_axis: f64, initial_axis: f64) -> f64 {
    (current_axis - initial_axis + 90.0).rem_euclid(180.0) - 90.0
}

/// Running mean over the last `n` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFilter {
    n: usize,
    buffer: VecDeque<f64>,
}

impl WindowFilter {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SlipError::Config("window size must be at least 1".into()));
        }
        Ok(Self {
            n,
            buffer: VecDeque::with_capacity(n),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Add a sample and return the mean of the samples currently held.
    pub fn push(&mut self, raw: f64) -> f64 {
        if self.buffer.len() == self.n {
            self.buffer.pop_front();
        }
        self.buffer.push_back(raw);
        // mean taken relative to the newest sample, exact for a constant input
        let spread: f64 = self.buffer.iter().map(|x| x - raw).sum();
        raw + spread / self.buffer.len() as f64
    }
}

/// Per-frame axis estimates for a sequence, computed in parallel.
pub fn estimate_frames(
    masks: &[BinaryMask],
    kind: EstimatorKind,
    cfg: &EstimatorConfig,
) -> Vec<Result<AxisEstimate>> {
    masks.par_iter().map(|m| estimate_axis(m, kind, cfg)).collect()
}

/// Turn per-frame axis estimates into a filtered relative-angle trace.
///
/// Frames that fail or are unreliable keep the previous filtered value and do
/// not enter the window.
pub fn assemble_trace(estimates: &[Result<AxisEstimate>], window: usize) -> Result<Vec<AngleSample>> {
    let first = match estimates.first() {
        None => return Err(SlipError::Empty("mask sequence is empty".into())),
        Some(Ok(e)) if e.reliable => e.angle,
        Some(_) => return Err(SlipError::InitialContactUnreliable),
    };
    let mut filter = WindowFilter::new(window)?;
    let mut last_raw = 0.0;
    let mut last_filtered = 0.0;
    let mut samples = Vec::with_capacity(estimates.len());
    for (frame_index, est) in estimates.iter().enumerate() {
        let sample = match est {
            Ok(e) if e.reliable => {
                last_raw = relative_angle(e.angle, first);
                last_filtered = filter.push(last_raw);
                AngleSample {
                    frame_index,
                    raw_angle: last_raw,
                    filtered_angle: last_filtered,
                    reliable: true,
                }
            }
            Ok(e) => AngleSample {
                frame_index,
                raw_angle: relative_angle(e.angle, first),
                filtered_angle: last_filtered,
                reliable: false,
            },
            Err(_) => AngleSample {
                frame_index,
                raw_angle: last_raw,
                filtered_angle: last_filtered,
                reliable: false,
            },
        };
        samples.push(sample);
    }
    Ok(samples)
}

/// Estimate, resolve against the first frame, and window-filter a lift.
pub fn track_lift(
    masks: &[BinaryMask],
    kind: EstimatorKind,
    window: usize,
    cfg: &EstimatorConfig,
) -> Result<Vec<AngleSample>> {
    if masks.is_empty() {
        return Err(SlipError::Empty("mask sequence is empty".into()));
    }
    WindowFilter::new(window)?;
    assemble_trace(&estimate_frames(masks, kind, cfg), window)
}
