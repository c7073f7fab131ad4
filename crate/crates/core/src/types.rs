//! Shared image, mask and angle types.
//!
//! Conventions used across the crate: `x` grows rightward and `y` grows
//! downward (row-major pixel indexing), pixel `(x, y)` has its center at the
//! integer coordinate `(x, y)`, and orientations are measured in degrees
//! counterclockwise from the `+x` axis as seen on screen. Because `y` points
//! down, a direction `(dx, dy)` has on-screen angle `atan2(-dy, dx)`.
//! Unoriented axes are canonicalized to `[0, 180)`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SlipError};

/// Reduce an axis orientation to `[0, 180)`.
pub fn canonical_axis(deg: f64) -> f64 {
    let r = deg.rem_euclid(180.0);
    // rem_euclid can round up to exactly 180 for tiny negative inputs
    if r >= 180.0 {
        0.0
    } else {
        r
    }
}

/// On-screen axis angle of an image-space direction, in `[0, 180)`.
pub fn axis_angle(dx: f64, dy: f64) -> f64 {
    canonical_axis((-dy).atan2(dx).to_degrees())
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
        return Err(SlipError::InvalidDimensions { width, height, len });
    }
    Ok(())
}

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[u8; 3]] {
        &self.data
    }
}

/// Single-channel 8-bit image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }
}

/// Convert RGB to luminance with Rec.601 weights.
pub fn luminance(image: &RgbImage) -> GrayImage {
    let data = image
        .data
        .iter()
        .map(|&[r, g, b]| {
            let l = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
            l.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage {
        width: image.width,
        height: image.height,
        data,
    }
}

/// Real-valued grid: raw logits before the sigmoid, probabilities after it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Binary contact mask: 1 = contact, 0 = background.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    /// Build from raw values; anything other than 0/1 is rejected.
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(index) = data.iter().position(|&v| v > 1) {
            return Err(SlipError::Parse(format!(
                "mask value {} at index {index} is not 0 or 1",
                data[index]
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![1; width * height])
    }

    /// Build by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        check_dims(width, height, width.saturating_mul(height))?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y) as u8);
            }
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    /// Bounds-checked lookup in signed coordinates; outside reads as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.data[y * self.width + x] = on as u8;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(SlipError::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }

    /// Set pixels in raster order.
    pub fn set_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of set pixels.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for (x, y) in self.set_pixels() {
            bb = Some(match bb {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        bb
    }

    /// Copy shifted by `(dx, dy)`; pixels leaving the frame are dropped.
    pub fn translated(&self, dx: i64, dy: i64) -> BinaryMask {
        let mut out = BinaryMask {
            width: self.width,
            height: self.height,
            data: vec![0; self.data.len()],
        };
        for (x, y) in self.set_pixels() {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                out.set(nx as usize, ny as usize, true);
            }
        }
        out
    }

    /// Nearest-neighbor upscale by an integer factor.
    pub fn upscaled(&self, factor: usize) -> BinaryMask {
        let factor = factor.max(1);
        let (w, h) = (self.width * factor, self.height * factor);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                data.push(self.data[(y / factor) * self.width + x / factor]);
            }
        }
        BinaryMask {
            width: w,
            height: h,
            data,
        }
    }
}

/// Closed boundary trace of one region, as pixel coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    points: Vec<(i64, i64)>,
}

impl Contour {
    pub fn new(points: Vec<(i64, i64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(SlipError::Degenerate(format!(
                "contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn as_f64(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|&(x, y)| (x as f64, y as f64))
            .collect()
    }
}

/// Geometric ellipse: center, semi-axes and major-axis orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub cx: f64,
    pub cy: f64,
    /// Semi-major length.
    pub a: f64,
    /// Semi-minor length.
    pub b: f64,
    /// Major-axis orientation, degrees in `[0, 180)`.
    pub theta: f64,
}

impl EllipseParams {
    /// Normalizing constructor: swaps axes (and turns `theta` by 90°) when
    /// `a < b`, then canonicalizes `theta`.
    pub fn new(cx: f64, cy: f64, a: f64, b: f64, theta: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(SlipError::DegenerateFit(format!(
                "semi-axes must be positive, got {a} and {b}"
            )));
        }
        let (a, b, theta) = if a < b {
            (b, a, theta + 90.0)
        } else {
            (a, b, theta)
        };
        Ok(Self {
            cx,
            cy,
            a,
            b,
            theta: canonical_axis(theta),
        })
    }

    pub fn aspect(&self) -> f64 {
        self.a / self.b
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.a * self.b
    }

    /// Whether image point `(x, y)` lies inside or on the ellipse.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.theta.to_radians().sin_cos();
        let dx = x - self.cx;
        let dy = -(y - self.cy);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
    }

    /// Image-space point at parametric angle `t` (radians).
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        let (s, c) = self.theta.to_radians().sin_cos();
        let u = self.a * t.cos();
        let v = self.b * t.sin();
        (self.cx + u * c - v * s, self.cy - (u * s + v * c))
    }
}

/// One frame of an angle trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSample {
    pub frame_index: usize,
    /// Relative angle to the first frame before filtering, degrees.
    pub raw_angle: f64,
    /// Window-filtered relative angle, degrees.
    pub filtered_angle: f64,
    pub reliable: bool,
}

/// A lifting sequence with predicted samples and ground-truth angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftTrace {
    pub object_id: String,
    pub samples: Vec<AngleSample>,
    pub ground_truth: Vec<f64>,
}

impl LiftTrace {
    pub fn new(object_id: impl Into<String>, samples: Vec<AngleSample>, ground_truth: Vec<f64>) -> Result<Self> {
        if samples.len() != ground_truth.len() {
            return Err(SlipError::Config(format!(
                "{} samples but {} ground-truth angles",
                samples.len(),
                ground_truth.len()
            )));
        }
        Ok(Self {
            object_id: object_id.into(),
            samples,
            ground_truth,
        })
    }

    /// Per-frame rotational error of the filtered angle.
    pub fn errors(&self) -> Vec<f64> {
        self.samples
            .iter()
            .zip(&self.ground_truth)
            .map(|(s, &g)| (s.filtered_angle - g).abs())
            .collect()
    }
}

/// Vector joining two marker centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerVector {
    pub dx: f64,
    pub dy: f64,
}

impl MarkerVector {
    pub fn new(dx: f64, dy: f64) -> Result<Self> {
        let v = Self { dx, dy };
        if !(v.norm() > 0.0) || !v.norm().is_finite() {
            return Err(SlipError::Degenerate(format!(
                "marker vector ({dx}, {dy}) has zero or non-finite length"
            )));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        self.dx.hypot(self.dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(px: [u8; 3]) -> u8 {
        luminance(&RgbImage::new(1, 1, vec![px]).unwrap()).get(0, 0)
    }

    #[test]
    fn luminance_extremes_and_red() {
        assert_eq!(rgb([255, 255, 255]), 255);
        assert_eq!(rgb([0, 0, 0]), 0);
        // 0.299 * 255 = 76.245
        assert_eq!(rgb([255, 0, 0]), 76);
    }

    #[test]
    fn axis_angle_uses_screen_orientation() {
        assert_eq!(axis_angle(1.0, 0.0), 0.0);
        assert!((axis_angle(1.0, 1.0) - 135.0).abs() < 1e-12);
        assert!((axis_angle(1.0, -1.0) - 45.0).abs() < 1e-12);
        assert!((axis_angle(0.0, 1.0) - 90.0).abs() < 1e-12);
        assert_eq!(canonical_axis(-1e-18), 0.0);
        assert_eq!(canonical_axis(180.0), 0.0);
    }

    #[test]
    fn ellipse_params_swap_axes() {
        let e = EllipseParams::new(0.0, 0.0, 5.0, 10.0, 30.0).unwrap();
        assert_eq!((e.a, e.b), (10.0, 5.0));
        assert!((e.theta - 120.0).abs() < 1e-12);
        let e = EllipseParams::new(0.0, 0.0, 5.0, 10.0, 100.0).unwrap();
        assert!((e.theta - 10.0).abs() < 1e-12);
        assert!(EllipseParams::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ellipse_point_at_lies_on_boundary() {
        let e = EllipseParams::new(3.0, 4.0, 7.0, 2.0, 33.0).unwrap();
        for k in 0..16 {
            let (x, y) = e.point_at(k as f64 * 0.4);
            let (s, c) = e.theta.to_radians().sin_cos();
            let (dx, dy) = (x - e.cx, -(y - e.cy));
            let u = dx * c + dy * s;
            let v = -dx * s + dy * c;
            assert!(((u / e.a).powi(2) + (v / e.b).powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mask_rejects_non_binary() {
        assert!(BinaryMask::new(2, 1, vec![0, 2]).is_err());
        assert!(BinaryMask::new(2, 2, vec![0, 1]).is_err());
        assert!(BinaryMask::new(0, 0, vec![]).is_err());
    }

    #[test]
    fn marker_vector_rejects_zero() {
        assert!(MarkerVector::new(0.0, 0.0).is_err());
        assert!(MarkerVector::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn lift_trace_lengths_must_match() {
        assert!(LiftTrace::new("x", vec![], vec![1.0]).is_err());
    }
}
