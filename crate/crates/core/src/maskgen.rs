//! Mask production: logits through sigmoid and threshold, the difference-image
//! baseline segmenter, and polygon annotation rasterization.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::contour::connected_components;
use crate::error::{Result, SlipError};
use crate::types::{BinaryMask, GrayImage, ProbabilityMap};

/// Default probability threshold separating contact from background.
pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[inline]
fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Apply the logistic function to every logit.
pub fn sigmoid_map(logits: &ProbabilityMap) -> Result<ProbabilityMap> {
    if let Some(index) = logits.data().iter().position(|v| !v.is_finite()) {
        return Err(SlipError::NonFinite { index });
    }
    let data = logits.data().iter().map(|&v| sigmoid(v)).collect();
    ProbabilityMap::new(logits.width(), logits.height(), data)
}

/// Threshold a probability map: `p >= threshold` is contact.
pub fn binarize(map: &ProbabilityMap, threshold: f64) -> Result<BinaryMask> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(SlipError::Config(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let data = map.data().iter().map(|&p| (p >= threshold) as u8).collect();
    BinaryMask::new(map.width(), map.height(), data)
}

/// Map a binary mask back to an 8-bit image (0 -> 0, 1 -> 255).
pub fn to_eight_bit(mask: &BinaryMask) -> GrayImage {
    let data = mask.data().iter().map(|&v| v * 255).collect();
    GrayImage::new(mask.width(), mask.height(), data).expect("mask dims are valid")
}

/// Interpret an 8-bit image as a mask (any non-zero pixel is contact).
pub fn from_eight_bit(image: &GrayImage) -> BinaryMask {
    let data = image.data().iter().map(|&v| (v >= 128) as u8).collect();
    BinaryMask::new(image.width(), image.height(), data).expect("image dims are valid")
}

/// Keep only the largest 8-connected component of a mask.
pub fn keep_largest_component(mask: &BinaryMask) -> BinaryMask {
    let mut out = BinaryMask::empty(mask.width(), mask.height()).expect("mask dims are valid");
    if let Some(c) = connected_components(mask).first() {
        for &(x, y) in &c.pixels {
            out.set(x, y, true);
        }
    }
    out
}

/// Baseline segmentation by subtracting a no-contact reference frame.
///
/// A pixel is contact when `|contact - reference| >= delta`; only the largest
/// connected region is kept.
pub fn diff_segment(contact: &GrayImage, reference: &GrayImage, delta: u8) -> Result<BinaryMask> {
    if contact.width() != reference.width() || contact.height() != reference.height() {
        return Err(SlipError::DimensionMismatch {
            left_w: contact.width(),
            left_h: contact.height(),
            right_w: reference.width(),
            right_h: reference.height(),
        });
    }
    if delta == 0 {
        warn!("diff_segment called with delta = 0; every pixel is classified as contact");
    }
    let data = contact
        .data()
        .iter()
        .zip(reference.data())
        .map(|(&c, &r)| (c.abs_diff(r) >= delta) as u8)
        .collect();
    let raw = BinaryMask::new(contact.width(), contact.height(), data)?;
    Ok(keep_largest_component(&raw))
}

/// A labelled polygon, as drawn in LabelMe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonAnnotation {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn polygon_area(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (x0, y0) = points[i];
            let (x1, y1) = points[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    twice / 2.0
}

fn on_segment(px: f64, py: f64, (x0, y0): (f64, f64), (x1, y1): (f64, f64)) -> bool {
    let cross = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0);
    let scale = (x1 - x0).abs().max((y1 - y0).abs()).max(1.0);
    cross.abs() <= 1e-9 * scale
        && px >= x0.min(x1) - 1e-9
        && px <= x0.max(x1) + 1e-9
        && py >= y0.min(y1) - 1e-9
        && py <= y0.max(y1) + 1e-9
}

/// Rasterize a polygon with the even-odd rule, sampling pixel centers.
/// Centers lying exactly on an edge count as inside.
pub fn rasterize_polygon(ann: &PolygonAnnotation, width: usize, height: usize) -> Result<BinaryMask> {
    let mut mask = BinaryMask::empty(width, height)?;
    fill_polygon(&mut mask, &ann.points)?;
    Ok(mask)
}

fn fill_polygon(mask: &mut BinaryMask, pts: &[(f64, f64)]) -> Result<()> {
    if pts.len() < 3 {
        return Err(SlipError::Degenerate(format!(
            "polygon needs at least 3 vertices, got {}",
            pts.len()
        )));
    }
    if pts.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(SlipError::Degenerate("polygon has non-finite vertex".into()));
    }
    if polygon_area(pts).abs() < 1e-12 {
        return Err(SlipError::Degenerate("polygon has zero area".into()));
    }
    let (width, height) = (mask.width(), mask.height());
    let n = pts.len();
    let mut xs = Vec::new();
    for y in 0..height {
        let yc = y as f64;
        xs.clear();
        // half-open crossing rule on the scanline through pixel centers
        for i in 0..n {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % n];
            if (y0 <= yc) != (y1 <= yc) {
                xs.push(x0 + (yc - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        for pair in xs.chunks_exact(2) {
            let lo = pair[0].ceil().max(0.0);
            let hi = pair[1].floor().min(width as f64 - 1.0);
            if lo > hi {
                continue;
            }
            for x in lo as usize..=hi as usize {
                mask.set(x, y, true);
            }
        }
    }
    // edge pixels missed by the half-open rule
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let x_lo = a.0.min(b.0).ceil().max(0.0);
        let x_hi = a.0.max(b.0).floor().min(width as f64 - 1.0);
        let y_lo = a.1.min(b.1).ceil().max(0.0);
        let y_hi = a.1.max(b.1).floor().min(height as f64 - 1.0);
        if x_lo > x_hi || y_lo > y_hi {
            continue;
        }
        for y in y_lo as usize..=y_hi as usize {
            for x in x_lo as usize..=x_hi as usize {
                if on_segment(x as f64, y as f64, a, b) {
                    mask.set(x, y, true);
                }
            }
        }
    }
    Ok(())
}

/// LabelMe annotation file; only the fields needed for rasterization.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct LabelMeFile {
    #[serde(rename = "imageWidth")]
    pub image_width: usize,
    #[serde(rename = "imageHeight")]
    pub image_height: usize,
    pub shapes: Vec<LabelMeShape>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct LabelMeShape {
    #[serde(default)]
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

impl LabelMeFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn annotations(&self) -> Vec<PolygonAnnotation> {
        self.shapes
            .iter()
            .map(|s| PolygonAnnotation {
                label: s.label.clone(),
                points: s.points.iter().map(|p| (p[0], p[1])).collect(),
            })
            .collect()
    }

    /// Union of all annotated polygons.
    pub fn to_mask(&self) -> Result<BinaryMask> {
        let mut mask = BinaryMask::empty(self.image_width, self.image_height)?;
        for ann in self.annotations() {
            fill_polygon(&mut mask, &ann.points)?;
        }
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(data: Vec<f64>) -> ProbabilityMap {
        let n = data.len();
        ProbabilityMap::new(n, 1, data).unwrap()
    }

    #[test]
    fn sigmoid_values() {
        let out = sigmoid_map(&map(vec![0.0, 20.0, -20.0, 0.8473])).unwrap();
        assert_eq!(out.data()[0], 0.5);
        assert!((out.data()[1] - 1.0).abs() < 1e-8);
        assert!(out.data()[2] > 0.0 && out.data()[2] < 1e-8);
        assert!((out.data()[3] - 0.7).abs() < 1e-4);
    }

    #[test]
    fn sigmoid_logit_of_threshold_by_bisection() {
        // independent oracle: solve sigmoid(v) = 0.7 with bisection on exp
        let (mut lo, mut hi) = (0.0f64, 5.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 / (1.0 + (-mid).exp()) < 0.7 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 0.8473).abs() < 1e-4);
    }

    #[test]
    fn sigmoid_rejects_non_finite() {
        let err = sigmoid_map(&map(vec![0.0, 1.0, f64::NAN])).unwrap_err();
        assert_eq!(err, SlipError::NonFinite { index: 2 });
    }

    #[test]
    fn binarize_threshold_rule() {
        let m = binarize(&map(vec![0.71, 0.69, 0.7]), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(m.data(), &[1, 0, 1]);
        let z = binarize(&map(vec![0.0; 4]), 0.7).unwrap();
        assert!(z.is_empty());
        assert!(binarize(&map(vec![0.5]), 1.5).is_err());
        assert!(binarize(&map(vec![0.5]), 0.0).is_err());
        assert!(binarize(&map(vec![0.5]), 1.0).is_err());
    }

    #[test]
    fn eight_bit_conversion() {
        let m = BinaryMask::from_fn(4, 4, |x, y| (x + y) % 2 == 0).unwrap();
        let g = to_eight_bit(&m);
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(g.get(x, y), if (x + y) % 2 == 0 { 255 } else { 0 });
            }
        }
        assert_eq!(from_eight_bit(&g), m);
    }

    #[test]
    fn diff_segment_cases() {
        let reference = GrayImage::filled(32, 24, 100).unwrap();
        let same = diff_segment(&reference, &reference, 10).unwrap();
        assert!(same.is_empty());

        let mut contact = reference.clone();
        for y in 5..15 {
            for x in 8..18 {
                contact.set(x, y, 120);
            }
        }
        let m = diff_segment(&contact, &reference, 10).unwrap();
        assert_eq!(m.count(), 100);
        for (x, y) in m.set_pixels() {
            assert!((8..18).contains(&x) && (5..15).contains(&y));
        }
        // darkening is detected the same way
        let mut darker = reference.clone();
        for y in 5..15 {
            for x in 8..18 {
                darker.set(x, y, 80);
            }
        }
        assert_eq!(diff_segment(&darker, &reference, 10).unwrap(), m);

        let all = diff_segment(&reference, &reference, 0).unwrap();
        assert_eq!(all.count(), 32 * 24);

        let small = GrayImage::filled(4, 4, 0).unwrap();
        assert!(matches!(
            diff_segment(&small, &reference, 10),
            Err(SlipError::DimensionMismatch { .. })
        ));
    }

    fn ann(points: Vec<(f64, f64)>) -> PolygonAnnotation {
        PolygonAnnotation {
            label: "contact".into(),
            points,
        }
    }

    #[test]
    fn rectangle_rasterization_counts_pixel_centers() {
        let r = ann(vec![(2.0, 2.0), (7.0, 2.0), (7.0, 5.0), (2.0, 5.0)]);
        let m = rasterize_polygon(&r, 10, 10).unwrap();
        assert_eq!(m.count(), 24);
        let full = ann(vec![(0.0, 0.0), (9.0, 0.0), (9.0, 7.0), (0.0, 7.0)]);
        assert_eq!(rasterize_polygon(&full, 10, 8).unwrap().count(), 80);
    }

    #[test]
    fn degenerate_polygons_fail() {
        let flat = ann(vec![(0.0, 0.0), (5.0, 5.0), (10.0, 10.0)]);
        assert!(rasterize_polygon(&flat, 16, 16).is_err());
        let two = ann(vec![(0.0, 0.0), (5.0, 5.0)]);
        assert!(rasterize_polygon(&two, 16, 16).is_err());
    }

    #[test]
    fn labelme_union() {
        let text = r#"{
            "version": "5.0.1",
            "flags": {},
            "imagePath": "frame.png",
            "imageData": null,
            "imageHeight": 10,
            "imageWidth": 12,
            "shapes": [
                {"label": "contact", "points": [[1,1],[3,1],[3,3],[1,3]], "shape_type": "polygon"},
                {"label": "contact", "points": [[6,6],[8,6],[8,8]], "shape_type": "polygon"}
            ]
        }"#;
        let file = LabelMeFile::from_json(text).unwrap();
        let m = file.to_mask().unwrap();
        assert_eq!((m.width(), m.height()), (12, 10));
        // 3x3 square + right triangle with legs of 3 lattice points (6 points)
        assert_eq!(m.count(), 9 + 6);
    }
}
