//! Browser front-end: render a synthetic contact, run the three estimators on
//! it, and trace a simulated lift. The analysis functions are plain Rust so
//! they can be tested natively; the `#[wasm_bindgen]` wrappers only move JSON
//! and pixels across the boundary.

use serde::{Deserialize, Serialize};
use slipkit::contour::{connected_components, ellipse_denoise_with};
use slipkit::estimators::{estimate_axis, skeletonize, track_lift};
use slipkit::metrics::{mean_std, rotational_error};
use slipkit::synth::{gen_lift, gen_mask, NoiseSpec, ShapeKind, ShapeSpec};
use slipkit::{BinaryMask, EstimatorConfig, EstimatorKind, Result, SlipError};
use wasm_bindgen::prelude::*;

pub const WIDTH: usize = 160;
pub const HEIGHT: usize = 120;

#[derive(Debug, Clone, Deserialize)]
pub struct ShapeParams {
    pub kind: ShapeKind,
    pub major: f64,
    pub minor: f64,
    pub angle: f64,
    #[serde(default)]
    pub jitter: f64,
    #[serde(default)]
    pub speckle: f64,
    #[serde(default)]
    pub drift: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ShapeParams {
    fn spec(&self) -> ShapeSpec {
        ShapeSpec {
            kind: self.kind,
            major: self.major,
            minor: self.minor,
            center: (WIDTH as f64 / 2.0, HEIGHT as f64 / 2.0),
            angle: self.angle,
        }
    }

    fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            boundary_jitter_px: self.jitter,
            speckle_rate: self.speckle,
            size_drift: self.drift,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimatorResult {
    pub estimator: EstimatorKind,
    pub angle: Option<f64>,
    pub elongation: Option<f64>,
    pub reliable: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub true_angle: f64,
    /// Centroid of the predominant region, where the axes are drawn.
    pub centroid: Option<(f64, f64)>,
    pub contact_pixels: usize,
    pub skeleton_pixels: usize,
    pub estimates: Vec<EstimatorResult>,
}

/// Mask, denoised outline and skeleton of one frame, with the estimates.
pub struct ShapeAnalysis {
    pub mask: BinaryMask,
    pub outline: Option<BinaryMask>,
    pub skeleton: Option<BinaryMask>,
    pub analysis: Analysis,
}

fn outline_of(region: &BinaryMask) -> BinaryMask {
    BinaryMask::from_fn(region.width(), region.height(), |x, y| {
        let (x, y) = (x as i64, y as i64);
        region.get_signed(x, y)
            && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| !region.get_signed(x + dx, y + dy))
    })
    .expect("same dimensions")
}

pub fn analyze(params: &ShapeParams) -> Result<ShapeAnalysis> {
    let frame = gen_mask(&params.spec(), (WIDTH, HEIGHT), &params.noise())?;
    let cfg = EstimatorConfig::default();
    let denoised = ellipse_denoise_with(&frame.mask, cfg.min_area).ok();
    let skeleton = denoised.as_ref().and_then(|d| skeletonize(&d.mask).ok());
    let centroid = connected_components(&frame.mask).first().map(|c| {
        let n = c.pixels.len() as f64;
        let (sx, sy) = c
            .pixels
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
        (sx / n, sy / n)
    });
    let estimates = EstimatorKind::ALL
        .iter()
        .map(|&kind| match estimate_axis(&frame.mask, kind, &cfg) {
            Ok(e) => EstimatorResult {
                estimator: kind,
                angle: Some(e.angle),
                elongation: Some(e.elongation),
                reliable: e.reliable,
                error: None,
            },
            Err(err) => EstimatorResult {
                estimator: kind,
                angle: None,
                elongation: None,
                reliable: false,
                error: Some(err.to_string()),
            },
        })
        .collect();
    Ok(ShapeAnalysis {
        analysis: Analysis {
            true_angle: frame.true_angle,
            centroid,
            contact_pixels: frame.mask.count(),
            skeleton_pixels: skeleton.as_ref().map_or(0, BinaryMask::count),
            estimates,
        },
        outline: denoised.map(|d| outline_of(&d.mask)),
        skeleton,
        mask: frame.mask,
    })
}

impl ShapeAnalysis {
    /// RGBA pixels: contact gray, denoised ellipse outline cyan, skeleton red.
    pub fn rgba(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(WIDTH * HEIGHT * 4);
        for y in 0..HEIGHT {
            for x in 0..WIDTH {
                let on = |m: &Option<BinaryMask>| m.as_ref().is_some_and(|m| m.get(x, y));
                let px = if on(&self.skeleton) {
                    [230, 60, 50, 255]
                } else if on(&self.outline) {
                    [40, 200, 220, 255]
                } else if self.mask.get(x, y) {
                    [150, 150, 150, 255]
                } else {
                    [20, 20, 24, 255]
                };
                out.extend_from_slice(&px);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct TraceParams {
    #[serde(flatten)]
    pub shape: ShapeParams,
    pub ramp_to: f64,
    pub frames: usize,
    pub window: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimatorTrace {
    pub estimator: EstimatorKind,
    pub filtered: Vec<f64>,
    pub reliable: Vec<bool>,
    pub mean_re: Option<f64>,
    pub std_re: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub ground_truth: Vec<f64>,
    pub traces: Vec<EstimatorTrace>,
}

/// A linear ramp from 0 to `ramp_to`, traced by every estimator.
pub fn lift_trace(params: &TraceParams) -> Result<Trace> {
    if params.frames < 2 {
        return Err(SlipError::Config("a lift needs at least 2 frames".into()));
    }
    let n = params.frames;
    let traj: Vec<f64> = (0..n).map(|i| params.ramp_to * i as f64 / (n - 1) as f64).collect();
    let frames = gen_lift(&params.shape.spec(), &traj, (WIDTH, HEIGHT), &params.shape.noise(), false)?;
    let (masks, gt): (Vec<_>, Vec<_>) = frames.into_iter().map(|f| (f.mask, f.ground_truth)).unzip();
    let cfg = EstimatorConfig::default();
    let traces = EstimatorKind::ALL
        .iter()
        .map(|&kind| match track_lift(&masks, kind, params.window, &cfg) {
            Ok(samples) => {
                let re: Vec<f64> = samples
                    .iter()
                    .zip(&gt)
                    .map(|(s, &g)| rotational_error(s.filtered_angle, g))
                    .collect();
                let (mean, std) = mean_std(&re);
                EstimatorTrace {
                    estimator: kind,
                    filtered: samples.iter().map(|s| s.filtered_angle).collect(),
                    reliable: samples.iter().map(|s| s.reliable).collect(),
                    mean_re: Some(mean),
                    std_re: Some(std),
                    error: None,
                }
            }
            Err(e) => EstimatorTrace {
                estimator: kind,
                filtered: Vec::new(),
                reliable: Vec::new(),
                mean_re: None,
                std_re: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(Trace {
        ground_truth: gt,
        traces,
    })
}

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// One analyzed frame handed to JavaScript.
#[wasm_bindgen]
pub struct ShapeView {
    rgba: Vec<u8>,
    report: String,
}

#[wasm_bindgen]
impl ShapeView {
    pub fn width(&self) -> usize {
        WIDTH
    }

    pub fn height(&self) -> usize {
        HEIGHT
    }

    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// Estimates and overlay geometry as JSON.
    pub fn report(&self) -> String {
        self.report.clone()
    }
}

#[wasm_bindgen]
pub fn analyze_shape(params_json: &str) -> std::result::Result<ShapeView, JsError> {
    let params: ShapeParams = serde_json::from_str(params_json).map_err(js_err)?;
    let a = analyze(&params).map_err(js_err)?;
    Ok(ShapeView {
        rgba: a.rgba(),
        report: serde_json::to_string(&a.analysis).map_err(js_err)?,
    })
}

#[wasm_bindgen]
pub fn simulate_lift(params_json: &str) -> std::result::Result<String, JsError> {
    let params: TraceParams = serde_json::from_str(params_json).map_err(js_err)?;
    let trace = lift_trace(&params).map_err(js_err)?;
    serde_json::to_string(&trace).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(angle: f64) -> ShapeParams {
        ShapeParams {
            kind: ShapeKind::Bar,
            major: 70.0,
            minor: 14.0,
            angle,
            jitter: 0.0,
            speckle: 0.0,
            drift: 0.0,
            seed: 1,
        }
    }

    #[test]
    fn analysis_finds_bar_axis() {
        let a = analyze(&bar(30.0)).unwrap();
        assert_eq!(a.analysis.estimates.len(), 3);
        for e in &a.analysis.estimates {
            assert!(e.reliable, "{:?}", e.estimator);
            let d = (e.angle.unwrap() - 30.0).abs();
            assert!(d < 3.0, "{:?} off by {d}", e.estimator);
        }
        let (cx, cy) = a.analysis.centroid.unwrap();
        assert!((cx - 80.0).abs() < 0.5 && (cy - 60.0).abs() < 0.5);
        assert_eq!(a.rgba().len(), WIDTH * HEIGHT * 4);
        assert!(a.analysis.skeleton_pixels > 10);
    }

    #[test]
    fn circle_is_flagged() {
        let p = ShapeParams {
            kind: ShapeKind::Ellipse,
            major: 20.0,
            minor: 20.0,
            ..bar(0.0)
        };
        let a = analyze(&p).unwrap();
        assert!(a.analysis.estimates.iter().all(|e| !e.reliable));
    }

    #[test]
    fn params_parse_from_page_json() {
        let p: TraceParams = serde_json::from_str(
            r#"{"kind":"superellipse","major":30,"minor":9,"angle":10,"jitter":0.6,"speckle":0.001,
                "drift":0.04,"seed":3,"ramp_to":25,"frames":26,"window":2}"#,
        )
        .unwrap();
        let t = lift_trace(&p).unwrap();
        assert_eq!(t.ground_truth.len(), 26);
        assert_eq!(t.ground_truth[25], 25.0);
        for tr in &t.traces {
            assert_eq!(tr.filtered.len(), 26, "{:?}", tr.error);
            assert!(tr.mean_re.unwrap() < 3.0);
        }
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"estimator\":\"skeleton\""));
    }

    #[test]
    fn round_lift_reports_error_per_estimator() {
        let p = TraceParams {
            shape: ShapeParams {
                kind: ShapeKind::Ellipse,
                major: 18.0,
                minor: 17.0,
                ..bar(0.0)
            },
            ramp_to: 20.0,
            frames: 5,
            window: 2,
        };
        let t = lift_trace(&p).unwrap();
        assert!(t.traces.iter().all(|tr| tr.error.is_some() && tr.filtered.is_empty()));
        assert!(lift_trace(&TraceParams { frames: 1, ..p }).is_err());
    }
}
