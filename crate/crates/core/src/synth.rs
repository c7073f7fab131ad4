//! Synthetic contact masks with exactly known orientation.
//!
//! Shapes are star-shaped regions described by their boundary radius as a
//! function of direction, rasterized at pixel centers for every frame (no
//! resampling of earlier frames). Noise is applied in a fixed order: size
//! drift, then boundary jitter, then speckle.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded per
//! frame with `splitmix64(seed ^ splitmix64(frame))`, so a dataset is fully
//! determined by its seed on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SlipError};
use crate::types::{canonical_axis, BinaryMask};

/// Largest rotation accepted without `allow_wide`, in degrees.
pub const MAX_TRAJECTORY_DEG: f64 = 30.0;

/// Default base seed of the standard suite.
pub const DEFAULT_SEED: u64 = 20_230_517;

const SUPERELLIPSE_EXPONENT: f64 = 4.0;
const JITTER_MODES: std::ops::RangeInclusive<u32> = 2..=8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    /// Rectangle; `major`/`minor` are full length and width.
    Bar,
    /// Ellipse; `major`/`minor` are semi-axes.
    Ellipse,
    /// Superellipse of exponent 4; `major`/`minor` are semi-axes.
    Superellipse,
}

impl std::str::FromStr for ShapeKind {
    type Err = SlipError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bar" => Ok(Self::Bar),
            "ellipse" => Ok(Self::Ellipse),
            "superellipse" => Ok(Self::Superellipse),
            other => Err(SlipError::Config(format!("unknown shape '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub major: f64,
    pub minor: f64,
    pub center: (f64, f64),
    /// Orientation of the major axis, degrees.
    pub angle: f64,
}

impl ShapeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.minor > 0.0) || !self.major.is_finite() || !self.angle.is_finite() {
            return Err(SlipError::Config(format!(
                "shape extents must be positive and finite: {} x {}",
                self.major, self.minor
            )));
        }
        if self.major < self.minor {
            return Err(SlipError::Config(format!(
                "major extent {} is smaller than minor extent {}",
                self.major, self.minor
            )));
        }
        Ok(())
    }

    pub fn aspect(&self) -> f64 {
        self.major / self.minor
    }

    /// Orientation is undefined for rotationally symmetric-looking shapes.
    pub fn orientation_defined(&self) -> bool {
        self.major > self.minor
    }

    /// Boundary distance from the center along local direction `phi`
    /// (radians, measured from the major axis).
    pub fn boundary_radius(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        match self.kind {
            ShapeKind::Bar => {
                let (hl, hw) = (self.major / 2.0, self.minor / 2.0);
                let along = if c.abs() > 0.0 { hl / c.abs() } else { f64::INFINITY };
                let across = if s.abs() > 0.0 { hw / s.abs() } else { f64::INFINITY };
                along.min(across)
            }
            ShapeKind::Ellipse => 1.0 / ((c / self.major).powi(2) + (s / self.minor).powi(2)).sqrt(),
            ShapeKind::Superellipse => {
                let p = SUPERELLIPSE_EXPONENT;
                ((c / self.major).abs().powf(p) + (s / self.minor).abs().powf(p)).powf(-1.0 / p)
            }
        }
    }

    /// Gauge function: 1 on the boundary, `r / boundary_radius` elsewhere.
    pub fn gauge(&self, u: f64, v: f64) -> f64 {
        match self.kind {
            ShapeKind::Bar => (u.abs() / (self.major / 2.0)).max(v.abs() / (self.minor / 2.0)),
            ShapeKind::Ellipse => (u / self.major).hypot(v / self.minor),
            ShapeKind::Superellipse => {
                let p = SUPERELLIPSE_EXPONENT;
                ((u / self.major).abs().powf(p) + (v / self.minor).abs().powf(p)).powf(1.0 / p)
            }
        }
    }

    /// Largest boundary radius over all directions.
    pub fn outer_radius(&self) -> f64 {
        match self.kind {
            ShapeKind::Bar => (self.major / 2.0).hypot(self.minor / 2.0),
            ShapeKind::Ellipse => self.major,
            ShapeKind::Superellipse => (0..=720)
                .map(|k| self.boundary_radius(k as f64 * std::f64::consts::PI / 1440.0))
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// RMS outward/inward displacement of the boundary, pixels.
    pub boundary_jitter_px: f64,
    /// Probability of flipping any single pixel.
    pub speckle_rate: f64,
    /// Maximum fractional scale change per frame.
    pub size_drift: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            boundary_jitter_px: 0.0,
            speckle_rate: 0.0,
            size_drift: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.boundary_jitter_px >= 0.0) || !self.boundary_jitter_px.is_finite() {
            return Err(SlipError::Config("boundary jitter must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.speckle_rate) {
            return Err(SlipError::Config("speckle rate must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.size_drift) {
            return Err(SlipError::Config("size drift must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One generated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFrame {
    pub mask: BinaryMask,
    /// Shape orientation in `[0, 180)`.
    pub true_angle: f64,
    /// False when the shape has no preferred axis (e.g. a circle).
    pub angle_defined: bool,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for item `index` of a stream seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

fn check_fits(spec: &ShapeSpec, dims: (usize, usize), noise: &NoiseSpec) -> Result<()> {
    spec.validate()?;
    noise.validate()?;
    let (w, h) = dims;
    if w == 0 || h == 0 {
        return Err(SlipError::Config("image dimensions must be positive".into()));
    }
    // rotation-invariant bound: the disc swept by the shape plus noise margin
    let r = spec.outer_radius() * (1.0 + noise.size_drift) + 3.0 * noise.boundary_jitter_px;
    let (cx, cy) = spec.center;
    if cx - r < 0.0 || cy - r < 0.0 || cx + r > (w - 1) as f64 || cy + r > (h - 1) as f64 {
        return Err(SlipError::Config(format!(
            "shape of radius {r:.1} at ({cx}, {cy}) does not fit in {w}x{h}"
        )));
    }
    Ok(())
}

fn render(spec: &ShapeSpec, dims: (usize, usize), noise: &NoiseSpec, rng: &mut ChaCha8Rng) -> BinaryMask {
    let scale = if noise.size_drift > 0.0 {
        1.0 + rng.random_range(-noise.size_drift..=noise.size_drift)
    } else {
        1.0
    };
    let modes: Vec<(f64, f64, f64)> = if noise.boundary_jitter_px > 0.0 {
        let n = JITTER_MODES.clone().count() as f64;
        let amp = noise.boundary_jitter_px * (3.0 / n).sqrt();
        JITTER_MODES
            .map(|k| {
                (
                    k as f64,
                    amp * rng.random_range(-1.0..=1.0),
                    amp * rng.random_range(-1.0..=1.0),
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    let (s, c) = spec.angle.to_radians().sin_cos();
    let (cx, cy) = spec.center;
    let mut mask = BinaryMask::from_fn(dims.0, dims.1, |x, y| {
        let dx = x as f64 - cx;
        let dy = -(y as f64 - cy);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        let g = spec.gauge(u, v);
        if modes.is_empty() || g == 0.0 {
            return g <= scale;
        }
        // boundary moved along the ray by offset(phi) pixels
        let phi = v.atan2(u);
        let offset: f64 = modes
            .iter()
            .map(|&(k, a, b)| a * (k * phi).cos() + b * (k * phi).sin())
            .sum();
        g <= scale + offset / spec.boundary_radius(phi)
    })
    .expect("dimensions checked");
    if noise.speckle_rate > 0.0 {
        for y in 0..dims.1 {
            for x in 0..dims.0 {
                if rng.random_bool(noise.speckle_rate) {
                    let on = mask.get(x, y);
                    mask.set(x, y, !on);
                }
            }
        }
    }
    mask
}

/// Rasterize one shape, then apply noise seeded by `noise.seed`.
pub fn gen_mask(spec: &ShapeSpec, dims: (usize, usize), noise: &NoiseSpec) -> Result<SynthFrame> {
    check_fits(spec, dims, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    Ok(SynthFrame {
        mask: render(spec, dims, noise, &mut rng),
        true_angle: canonical_axis(spec.angle),
        angle_defined: spec.orientation_defined(),
    })
}

/// One frame of a synthetic lift with its ground-truth relative rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftFrame {
    pub mask: BinaryMask,
    pub ground_truth: f64,
}

/// Rotate `spec` about its center along `trajectory` (degrees added to
/// `spec.angle`); ground truth is relative to the first frame.
pub fn gen_lift(
    spec: &ShapeSpec,
    trajectory: &[f64],
    dims: (usize, usize),
    noise: &NoiseSpec,
    allow_wide: bool,
) -> Result<Vec<LiftFrame>> {
    if trajectory.is_empty() {
        return Err(SlipError::Config("trajectory has no frames".into()));
    }
    if let Some(bad) = trajectory.iter().find(|a| !a.is_finite()) {
        return Err(SlipError::Config(format!("trajectory angle {bad} is not finite")));
    }
    if !allow_wide {
        if let Some(bad) = trajectory.iter().find(|&&a| !(0.0..=MAX_TRAJECTORY_DEG).contains(&a)) {
            return Err(SlipError::Config(format!(
                "trajectory angle {bad} outside [0, {MAX_TRAJECTORY_DEG}]"
            )));
        }
    }
    check_fits(spec, dims, noise)?;
    let start = trajectory[0];
    Ok(trajectory
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let frame_spec = ShapeSpec {
                angle: spec.angle + a,
                ..*spec
            };
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(noise.seed, i as u64));
            LiftFrame {
                mask: render(&frame_spec, dims, noise, &mut rng),
                ground_truth: a - start,
            }
        })
        .collect())
}

/// One lift of a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftConfig {
    pub id: String,
    pub shape: ShapeSpec,
    pub trajectory: Vec<f64>,
    pub noise: NoiseSpec,
}

/// Full dataset description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub lifts: Vec<LiftConfig>,
}

impl SuiteConfig {
    pub fn generate(&self, allow_wide: bool) -> Result<Vec<Vec<LiftFrame>>> {
        use rayon::prelude::*;
        self.lifts
            .par_iter()
            .map(|l| gen_lift(&l.shape, &l.trajectory, (self.width, self.height), &l.noise, allow_wide))
            .collect()
    }
}

/// Noise level of the standard suite.
pub fn standard_noise(seed: u64) -> NoiseSpec {
    NoiseSpec {
        boundary_jitter_px: 0.6,
        speckle_rate: 0.001,
        size_drift: 0.04,
        seed,
    }
}

/// The nine contact shapes of the standard suite.
pub fn standard_shapes() -> Vec<ShapeSpec> {
    use ShapeKind::*;
    let s = |kind, major, minor, cx, cy, angle| ShapeSpec {
        kind,
        major,
        minor,
        center: (cx, cy),
        angle,
    };
    vec![
        s(Bar, 80.0, 12.0, 80.0, 60.0, 0.0),
        s(Bar, 60.0, 18.0, 76.0, 58.0, 35.0),
        s(Bar, 90.0, 10.0, 82.0, 62.0, 160.0),
        s(Ellipse, 36.0, 8.0, 80.0, 60.0, 90.0),
        s(Ellipse, 30.0, 10.0, 78.0, 63.0, 120.0),
        s(Ellipse, 40.0, 7.0, 83.0, 57.0, 15.0),
        s(Superellipse, 34.0, 9.0, 80.0, 60.0, 60.0),
        s(Superellipse, 28.0, 8.0, 77.0, 61.0, 140.0),
        s(Bar, 50.0, 20.0, 81.0, 59.0, 170.0),
    ]
}

/// The five rotation profiles of the standard suite, in degrees per frame.
pub fn standard_trajectories() -> Vec<Vec<f64>> {
    let mut t = Vec::new();
    // hold, ramp to 30 at 1°/frame, hold
    t.push(
        std::iter::repeat_n(0.0, 5)
            .chain((1..=30).map(|k| k as f64))
            .chain(std::iter::repeat_n(30.0, 5))
            .collect(),
    );
    // slow ramp to 20 then hold
    t.push((0..=25).map(|k| 0.8 * k as f64).chain(std::iter::repeat_n(20.0, 10)).collect());
    // smooth s-curve to 30
    t.push(
        (0..=40)
            .map(|k| 15.0 * (1.0 - (std::f64::consts::PI * k as f64 / 40.0).cos()))
            .collect(),
    );
    // fast ramp to 25 then hold
    t.push((0..=20).map(|k| 1.25 * k as f64).chain(std::iter::repeat_n(25.0, 12)).collect());
    // four 6° slips separated by holds
    let mut steps = vec![0.0; 4];
    let mut level = 0.0;
    for _ in 0..4 {
        for k in 1..=4 {
            steps.push(level + 1.5 * k as f64);
        }
        level += 6.0;
        steps.extend(std::iter::repeat_n(level, 4));
    }
    t.push(steps);
    t
}

/// 45-lift benchmark: every standard shape under every standard trajectory.
pub fn standard_suite(seed: u64) -> SuiteConfig {
    let mut lifts = Vec::new();
    for (si, shape) in standard_shapes().into_iter().enumerate() {
        for (ti, trajectory) in standard_trajectories().into_iter().enumerate() {
            let index = (si * 5 + ti) as u64;
            lifts.push(LiftConfig {
                id: format!("lift_{:02}_shape{}_traj{}", index, si + 1, ti + 1),
                shape,
                trajectory,
                noise: standard_noise(derive_seed(seed, index)),
            });
        }
    }
    SuiteConfig {
        width: 160,
        height: 120,
        seed,
        lifts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(angle: f64) -> ShapeSpec {
        ShapeSpec {
            kind: ShapeKind::Bar,
            major: 40.0,
            minor: 10.0,
            center: (50.0, 40.0),
            angle,
        }
    }

    #[test]
    fn axis_aligned_bar() {
        let f = gen_mask(&bar(0.0), (100, 80), &NoiseSpec::none()).unwrap();
        let expected = BinaryMask::from_fn(100, 80, |x, y| (30..=70).contains(&x) && (35..=45).contains(&y)).unwrap();
        assert_eq!(f.mask, expected);
        assert_eq!(f.true_angle, 0.0);
        assert!(f.angle_defined);
    }

    #[test]
    fn rotated_bar_pca_crosscheck() {
        let f = gen_mask(&bar(30.0), (100, 80), &NoiseSpec::none()).unwrap();
        let est = crate::estimators::pca_angle(&f.mask, 1.2).unwrap();
        assert!((est.angle - 30.0).abs() < 1.0, "{}", est.angle);
    }

    #[test]
    fn circle_has_undefined_angle() {
        let c = ShapeSpec {
            kind: ShapeKind::Ellipse,
            major: 25.0,
            minor: 25.0,
            center: (40.0, 40.0),
            angle: 12.0,
        };
        assert!(!gen_mask(&c, (80, 80), &NoiseSpec::none()).unwrap().angle_defined);
    }

    #[test]
    fn out_of_bounds_and_bad_specs() {
        let big = ShapeSpec { major: 200.0, ..bar(0.0) };
        assert!(gen_mask(&big, (100, 80), &NoiseSpec::none()).is_err());
        let inverted = ShapeSpec { major: 5.0, ..bar(0.0) };
        assert!(gen_mask(&inverted, (100, 80), &NoiseSpec::none()).is_err());
        let noise = NoiseSpec { speckle_rate: 1.5, ..NoiseSpec::none() };
        assert!(gen_mask(&bar(0.0), (100, 80), &noise).is_err());
    }

    #[test]
    fn lift_ground_truth_and_range() {
        let ramp: Vec<f64> = (0..=30).map(|k| k as f64).collect();
        let lift = gen_lift(&bar(10.0), &ramp, (100, 80), &NoiseSpec::none(), false).unwrap();
        assert_eq!(lift.len(), 31);
        for (k, f) in lift.iter().enumerate() {
            assert_eq!(f.ground_truth, k as f64);
        }
        let still = gen_lift(&bar(10.0), &[0.0, 0.0, 0.0], (100, 80), &NoiseSpec::none(), false).unwrap();
        assert!(still.windows(2).all(|w| w[0].mask == w[1].mask));
        assert!(gen_lift(&bar(10.0), &[0.0, 45.0], (100, 80), &NoiseSpec::none(), false).is_err());
        assert!(gen_lift(&bar(10.0), &[0.0, 45.0], (100, 80), &NoiseSpec::none(), true).is_ok());
        assert!(gen_lift(&bar(10.0), &[], (100, 80), &NoiseSpec::none(), false).is_err());
    }

    #[test]
    fn noisy_lift_is_reproducible() {
        let noise = NoiseSpec {
            boundary_jitter_px: 1.0,
            speckle_rate: 0.002,
            size_drift: 0.05,
            seed: 99,
        };
        let ramp: Vec<f64> = (0..10).map(|k| 2.0 * k as f64).collect();
        let a = gen_lift(&bar(5.0), &ramp, (100, 80), &noise, false).unwrap();
        let b = gen_lift(&bar(5.0), &ramp, (100, 80), &noise, false).unwrap();
        assert_eq!(a, b);
        let other = gen_lift(&bar(5.0), &ramp, (100, 80), &NoiseSpec { seed: 100, ..noise }, false).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn standard_suite_shape() {
        let suite = standard_suite(DEFAULT_SEED);
        assert_eq!(suite.lifts.len(), 45);
        for l in &suite.lifts {
            assert!(l.shape.aspect() >= 2.0);
            assert!(l.trajectory.iter().all(|a| (0.0..=30.0).contains(a)));
            assert_eq!(l.trajectory[0], 0.0);
        }
    }
}
