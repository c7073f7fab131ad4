//! Rotational slip estimation from tactile contact masks.
//!
//! The pipeline turns a network's logit map (or a difference image) into a
//! binary contact mask, isolates the predominant contact region, smooths it
//! with a fitted ellipse, thins it to its main axis and fits a line. Angles
//! are reported relative to the first frame of a lift and smoothed with a
//! short running mean. PCA and ellipse-orientation estimators are provided
//! for comparison, together with the overlap and rotational-error metrics
//! used to score them and a synthetic mask generator with known rotations.

pub mod contour;
pub mod error;
pub mod estimators;
pub mod io;
pub mod maskgen;
pub mod metrics;
pub mod synth;
pub mod types;

pub use error::{Result, SlipError};
pub use estimators::{EstimatorConfig, EstimatorKind};
pub use types::{
    AngleSample, BinaryMask, Contour, EllipseParams, GrayImage, LiftTrace, MarkerVector,
    ProbabilityMap, RgbImage,
};
