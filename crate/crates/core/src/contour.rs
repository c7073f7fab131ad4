//! Region extraction and ellipse-based denoising.
//!
//! Regions are 8-connected, boundaries are traced with Moore-neighbor tracing
//! (clockwise on screen), and ellipses are fitted with the constrained direct
//! least-squares method in its numerically stable block form.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Result, SlipError};
use crate::types::{axis_angle, BinaryMask, Contour, EllipseParams};

/// Smallest region accepted as contact, in pixels.
pub const DEFAULT_MIN_AREA: usize = 25;

/// Moore neighborhood in clockwise screen order starting from west.
const MOORE: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// One 8-connected region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Pixels in discovery order; `pixels[0]` is the seed.
    pub pixels: Vec<(usize, usize)>,
    pub area: usize,
    /// First pixel in raster order, i.e. smallest `(y, x)`.
    pub seed: (usize, usize),
}

/// Label 8-connected regions, largest first; ties go to the smaller `(y, x)` seed.
pub fn connected_components(mask: &BinaryMask) -> Vec<Component> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for (sx, sy) in mask.set_pixels() {
        if seen[sy * w + sx] {
            continue;
        }
        seen[sy * w + sx] = true;
        stack.push((sx, sy));
        let mut pixels = Vec::new();
        while let Some((x, y)) = stack.pop() {
            pixels.push((x, y));
            for &(dx, dy) in &MOORE {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if mask.get_signed(nx, ny) {
                    let i = ny as usize * w + nx as usize;
                    if !seen[i] {
                        seen[i] = true;
                        stack.push((nx as usize, ny as usize));
                    }
                }
            }
        }
        out.push(Component {
            area: pixels.len(),
            seed: (sx, sy),
            pixels,
        });
    }
    // stable sort keeps raster order of seeds among equal areas
    out.sort_by_key(|c| std::cmp::Reverse(c.area));
    out
}

/// Moore-neighbor trace of the region containing `start`, where `start` is
/// that region's first pixel in raster order.
fn trace_from(mask: &BinaryMask, start: (usize, usize)) -> Vec<(i64, i64)> {
    let s = (start.0 as i64, start.1 as i64);
    let step = |p: (i64, i64), b: (i64, i64)| -> Option<((i64, i64), (i64, i64))> {
        let rel = (b.0 - p.0, b.1 - p.1);
        let i0 = MOORE.iter().position(|&d| d == rel).expect("backtrack is a neighbor");
        (1..=8).find_map(|j| {
            let k = (i0 + j) % 8;
            let c = (p.0 + MOORE[k].0, p.1 + MOORE[k].1);
            mask.get_signed(c.0, c.1).then(|| {
                let prev = MOORE[(k + 7) % 8];
                (c, (p.0 + prev.0, p.1 + prev.1))
            })
        })
    };

    let mut points = vec![s];
    // west of the raster-first pixel is always background
    let Some((first, mut b)) = step(s, (s.0 - 1, s.1)) else {
        return points;
    };
    let mut p = first;
    // bounded by the number of pixel-direction states
    let limit = 8 * mask.width() * mask.height() + 8;
    for _ in 0..limit {
        if p == s {
            match step(p, b) {
                Some((next, _)) if next == first => break,
                _ => {}
            }
        }
        points.push(p);
        match step(p, b) {
            Some((next, nb)) => {
                p = next;
                b = nb;
            }
            None => break,
        }
    }
    points
}

/// Boundary traces of every region, including single-pixel specks.
pub fn all_boundaries(mask: &BinaryMask) -> Vec<Vec<(i64, i64)>> {
    connected_components(mask)
        .iter()
        .map(|c| trace_from(mask, c.seed))
        .collect()
}

/// Boundary of the largest region, rejecting regions below `min_area`.
pub fn predominant_contour_with(mask: &BinaryMask, min_area: usize) -> Result<Contour> {
    let comps = connected_components(mask);
    let Some(largest) = comps.first().filter(|c| c.area >= min_area) else {
        return Err(SlipError::NoContact { min_area });
    };
    if comps.iter().skip(1).any(|c| c.area >= min_area) {
        log::warn!(
            "{} contact regions above {min_area} px; using the largest only",
            comps.iter().filter(|c| c.area >= min_area).count()
        );
    }
    Contour::new(trace_from(mask, largest.seed))
}

/// Boundary of the largest region with the default minimum area.
pub fn predominant_contour(mask: &BinaryMask) -> Result<Contour> {
    predominant_contour_with(mask, DEFAULT_MIN_AREA)
}

/// Direct least-squares ellipse fit.
///
/// Minimizes the algebraic distance of the conic `Ax² + Bxy + Cy² + Dx + Ey + F`
/// subject to `4AC − B² = 1`. Points are centered and scaled before fitting.
pub fn fit_ellipse(points: &[(f64, f64)]) -> Result<EllipseParams> {
    if points.len() < 5 {
        return Err(SlipError::DegenerateFit(format!(
            "need at least 5 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(SlipError::DegenerateFit("non-finite point".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    let spread = (sxx + syy) / n;
    if spread <= 0.0 {
        return Err(SlipError::DegenerateFit("all points coincide".into()));
    }
    // minor principal variance relative to total flags collinear input
    let half_tr = 0.5 * (sxx + syy);
    let minor = half_tr - (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    if minor <= 1e-12 * half_tr {
        return Err(SlipError::DegenerateFit("points are collinear".into()));
    }
    let scale = (spread / 2.0).sqrt();

    let mut s1 = Matrix3::<f64>::zeros();
    let mut s2 = Matrix3::<f64>::zeros();
    let mut s3 = Matrix3::<f64>::zeros();
    for &(x, y) in points {
        let u = (x - mx) / scale;
        let v = (y - my) / scale;
        let q = Vector3::new(u * u, u * v, v * v);
        let l = Vector3::new(u, v, 1.0);
        s1 += q * q.transpose();
        s2 += q * l.transpose();
        s3 += l * l.transpose();
    }
    let s3_inv = s3
        .try_inverse()
        .ok_or_else(|| SlipError::DegenerateFit("singular linear scatter".into()))?;
    let t = -(s3_inv * s2.transpose());
    let reduced = s1 + s2 * t;
    let c1_inv = Matrix3::new(0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0);
    let m = c1_inv * reduced;

    let norm = m.abs().max().max(f64::MIN_POSITIVE);
    let mut best: Option<(f64, Vector3<f64>)> = None;
    for ev in m.complex_eigenvalues().iter() {
        if ev.im.abs() > 1e-8 * norm {
            continue;
        }
        let lambda = ev.re;
        let shifted = m - Matrix3::identity() * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("three singular values");
        let a1: Vector3<f64> = v_t.row(imin).transpose();
        let constraint = 4.0 * a1[0] * a1[2] - a1[1] * a1[1];
        if constraint <= 1e-12 * a1.norm_squared() {
            continue;
        }
        if best.as_ref().is_none_or(|(l, _)| lambda.abs() < l.abs()) {
            best = Some((lambda, a1));
        }
    }
    let (_, a1) = best.ok_or_else(|| SlipError::DegenerateFit("no elliptical solution".into()))?;
    let a2 = t * a1;
    let normalized = conic_to_params([a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]])?;
    EllipseParams::new(
        mx + normalized.cx * scale,
        my + normalized.cy * scale,
        normalized.a * scale,
        normalized.b * scale,
        normalized.theta,
    )
}

/// Geometric parameters of the conic `Ax² + Bxy + Cy² + Dx + Ey + F = 0`
/// in image coordinates.
pub fn conic_to_params(conic: [f64; 6]) -> Result<EllipseParams> {
    let [a, b, c, d, e, f] = conic;
    let det = 4.0 * a * c - b * b;
    if !(det > 0.0) {
        return Err(SlipError::DegenerateFit("conic is not an ellipse".into()));
    }
    let cx = (b * e - 2.0 * c * d) / det;
    let cy = (b * d - 2.0 * a * e) / det;
    let f0 = f + 0.5 * (d * cx + e * cy);
    let mean = 0.5 * (a + c);
    let r = (0.5 * (a - c)).hypot(0.5 * b);
    let (l_big, l_small) = (mean + r, mean - r);
    let s_big = -f0 / l_big;
    let s_small = -f0 / l_small;
    if !(s_big > 0.0 && s_small > 0.0) || !s_big.is_finite() || !s_small.is_finite() {
        return Err(SlipError::DegenerateFit("imaginary or degenerate ellipse".into()));
    }
    // eigenvector of l_big in image coordinates
    let phi = 0.5 * b.atan2(a - c);
    let theta = axis_angle(phi.cos(), phi.sin());
    EllipseParams::new(cx, cy, s_big.sqrt(), s_small.sqrt(), theta)
}

/// Filled rasterization of an ellipse, sampling pixel centers.
pub fn rasterize_ellipse(e: &EllipseParams, width: usize, height: usize) -> Result<BinaryMask> {
    let mut mask = BinaryMask::empty(width, height)?;
    let r = e.a.ceil() as i64 + 1;
    let x0 = (e.cx.floor() as i64 - r).max(0);
    let x1 = (e.cx.ceil() as i64 + r).min(width as i64 - 1);
    let y0 = (e.cy.floor() as i64 - r).max(0);
    let y1 = (e.cy.ceil() as i64 + r).min(height as i64 - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            if e.contains(x as f64, y as f64) {
                mask.set(x as usize, y as usize, true);
            }
        }
    }
    Ok(mask)
}

/// Result of ellipse denoising.
#[derive(Debug, Clone, PartialEq)]
pub struct Denoised {
    pub mask: BinaryMask,
    /// Fitted ellipse, grown by half a pixel to the region's outer edge.
    pub ellipse: EllipseParams,
}

/// Replace the predominant region by its fitted, filled ellipse.
pub fn ellipse_denoise_with(mask: &BinaryMask, min_area: usize) -> Result<Denoised> {
    let contour = predominant_contour_with(mask, min_area)?;
    let fitted = fit_ellipse(&contour.as_f64())?;
    // contour points are pixel centers, half a pixel inside the region edge
    let ellipse = EllipseParams::new(fitted.cx, fitted.cy, fitted.a + 0.5, fitted.b + 0.5, fitted.theta)?;
    let mask = rasterize_ellipse(&ellipse, mask.width(), mask.height())?;
    Ok(Denoised { mask, ellipse })
}

/// Replace the predominant region by its fitted, filled ellipse.
pub fn ellipse_denoise(mask: &BinaryMask) -> Result<BinaryMask> {
    ellipse_denoise_with(mask, DEFAULT_MIN_AREA).map(|d| d.mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(mask: &mut BinaryMask, x0: usize, y0: usize, w: usize, h: usize) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                mask.set(x, y, true);
            }
        }
    }

    /// Independent flood fill with 4-way recursion over the 8-neighborhood.
    fn flood_area(mask: &BinaryMask, start: (usize, usize), seen: &mut [bool]) -> usize {
        let w = mask.width();
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start.1 * w + start.0] = true;
        let mut area = 0;
        while let Some((x, y)) = queue.pop_front() {
            area += 1;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if mask.get_signed(nx, ny) && !seen[ny as usize * w + nx as usize] {
                        seen[ny as usize * w + nx as usize] = true;
                        queue.push_back((nx as usize, ny as usize));
                    }
                }
            }
        }
        area
    }

    #[test]
    fn components_sorted_by_area() {
        let mut m = BinaryMask::empty(20, 20).unwrap();
        block(&mut m, 1, 1, 3, 4); // 12
        block(&mut m, 10, 10, 6, 5); // 30
        let comps = connected_components(&m);
        let mut seen = vec![false; 400];
        let mut oracle: Vec<usize> = m
            .set_pixels()
            .collect::<Vec<_>>()
            .into_iter()
            .filter_map(|p| (!seen[p.1 * 20 + p.0]).then(|| flood_area(&m, p, &mut seen)))
            .collect();
        oracle.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(comps.iter().map(|c| c.area).collect::<Vec<_>>(), oracle);
        assert_eq!(comps[0].area, 30);
        assert_eq!(comps[0].seed, (10, 10));

        assert!(connected_components(&BinaryMask::empty(5, 5).unwrap()).is_empty());
        let full = connected_components(&BinaryMask::full(5, 5).unwrap());
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].area, 25);
    }

    #[test]
    fn ties_break_on_raster_seed() {
        let mut m = BinaryMask::empty(10, 10).unwrap();
        block(&mut m, 6, 1, 2, 2);
        block(&mut m, 1, 5, 2, 2);
        block(&mut m, 1, 1, 2, 2);
        let comps = connected_components(&m);
        let seeds: Vec<_> = comps.iter().map(|c| c.seed).collect();
        assert_eq!(seeds, vec![(1, 1), (6, 1), (1, 5)]);
    }

    #[test]
    fn diagonal_pixels_are_connected() {
        let m = BinaryMask::from_fn(4, 4, |x, y| x == y).unwrap();
        assert_eq!(connected_components(&m).len(), 1);
    }

    #[test]
    fn square_contour_is_boundary_ring() {
        let m = BinaryMask::from_fn(4, 4, |_, _| true).unwrap();
        let c = predominant_contour_with(&m, 1).unwrap();
        // oracle: pixels with at least one 4-neighbor outside the square
        let ring: std::collections::BTreeSet<(i64, i64)> = (0..4)
            .flat_map(|y| (0..4).map(move |x| (x, y)))
            .filter(|&(x, y)| x == 0 || y == 0 || x == 3 || y == 3)
            .collect();
        assert_eq!(c.len(), 12);
        let got: std::collections::BTreeSet<_> = c.points().iter().copied().collect();
        assert_eq!(got, ring);
        // clockwise on screen: starts heading east along the top row
        assert_eq!(&c.points()[..3], &[(0, 0), (1, 0), (2, 0)]);
    }

    #[test]
    fn contour_picks_blob_over_speck() {
        let mut m = BinaryMask::empty(30, 30).unwrap();
        block(&mut m, 5, 5, 10, 8);
        block(&mut m, 25, 25, 3, 1);
        let c = predominant_contour(&m).unwrap();
        assert!(c.points().iter().all(|&(x, y)| (5..15).contains(&x) && (5..13).contains(&y)));
        assert!(matches!(
            predominant_contour(&BinaryMask::empty(8, 8).unwrap()),
            Err(SlipError::NoContact { .. })
        ));
    }

    #[test]
    fn single_pixel_and_line_traces() {
        let mut m = BinaryMask::empty(5, 5).unwrap();
        m.set(2, 2, true);
        assert_eq!(trace_from(&m, (2, 2)), vec![(2, 2)]);
        let line = BinaryMask::from_fn(6, 3, |_, y| y == 1).unwrap();
        let t = trace_from(&line, (0, 1));
        assert_eq!(t.len(), 10);
        assert_eq!(t[5], (5, 1));
    }

    #[test]
    fn exact_ellipse_recovery() {
        let truth = EllipseParams::new(50.0, 40.0, 20.0, 10.0, 25.0).unwrap();
        let pts: Vec<_> = (0..40)
            .map(|k| truth.point_at(k as f64 * std::f64::consts::TAU / 40.0))
            .collect();
        let fit = fit_ellipse(&pts).unwrap();
        for (got, want) in [
            (fit.cx, truth.cx),
            (fit.cy, truth.cy),
            (fit.a, truth.a),
            (fit.b, truth.b),
            (fit.theta, truth.theta),
        ] {
            assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn circle_fit() {
        let pts: Vec<_> = (0..30)
            .map(|k| {
                let t = k as f64 * 0.3;
                (5.0 + 10.0 * t.cos(), -3.0 + 10.0 * t.sin())
            })
            .collect();
        let fit = fit_ellipse(&pts).unwrap();
        assert!((fit.a - 10.0).abs() < 1e-6 && (fit.b - 10.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_fits() {
        let line: Vec<_> = (0..5).map(|i| (i as f64, 2.0 * i as f64)).collect();
        assert!(matches!(fit_ellipse(&line), Err(SlipError::DegenerateFit(_))));
        assert!(fit_ellipse(&line[..4]).is_err());
        assert!(fit_ellipse(&[(1.0, 1.0); 6]).is_err());
    }

    #[test]
    fn denoise_preserves_area() {
        let truth = EllipseParams::new(40.0, 32.0, 20.0, 10.0, 30.0).unwrap();
        let clean = BinaryMask::from_fn(80, 64, |x, y| truth.contains(x as f64, y as f64)).unwrap();
        let d = ellipse_denoise(&clean).unwrap();
        let ratio = d.count() as f64 / truth.area();
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
        for y in 0..d.height() {
            let xs: Vec<_> = (0..d.width()).filter(|&x| d.get(x, y)).collect();
            if let (Some(f), Some(l)) = (xs.first(), xs.last()) {
                assert_eq!(l - f + 1, xs.len());
            }
        }
        assert!(matches!(
            ellipse_denoise(&BinaryMask::empty(10, 10).unwrap()),
            Err(SlipError::NoContact { .. })
        ));
    }

    #[test]
    fn conic_rejects_hyperbola() {
        // x² - y² - 1 = 0
        assert!(conic_to_params([1.0, 0.0, -1.0, 0.0, 0.0, -1.0]).is_err());
        // x² + y² + 1 = 0 has no real points
        assert!(conic_to_params([1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).is_err());
    }
}
