use std::path::{Path, PathBuf};

use clap::{ArgAction, Args};
use serde::Serialize;
use sha2::{Digest, Sha256};
use slipkit::synth::{
    self, derive_seed, LiftConfig, NoiseSpec, ShapeKind, ShapeSpec, SuiteConfig, DEFAULT_SEED,
};
use slipkit::io;

use super::ensure_dir;
use crate::failure::{CmdResult, Failure};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output dataset directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Noise seed; falls back to SLIPKIT_SEED, then to the built-in default.
    #[arg(long, env = "SLIPKIT_SEED")]
    seed: Option<u64>,
    /// Generate custom lifts of this shape instead of the standard 45-lift suite.
    #[arg(long)]
    shape: Option<ShapeKind>,
    /// Length (bar) or semi-major axis (ellipse, superellipse), pixels.
    #[arg(long, default_value_t = 60.0)]
    major: f64,
    /// Width (bar) or semi-minor axis, pixels.
    #[arg(long, default_value_t = 12.0)]
    minor: f64,
    /// Initial on-screen orientation of the major axis, degrees.
    #[arg(long, default_value_t = 0.0)]
    angle: f64,
    /// Shape center, horizontal pixel coordinate; defaults to the image center.
    #[arg(long)]
    center_x: Option<f64>,
    /// Shape center, vertical pixel coordinate; defaults to the image center.
    #[arg(long)]
    center_y: Option<f64>,
    /// Rotation of every frame in degrees, comma separated.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, conflicts_with_all = ["ramp_to", "frames"])]
    trajectory: Option<Vec<f64>>,
    /// Final angle of a linear ramp starting at 0.
    #[arg(long, default_value_t = 30.0)]
    ramp_to: f64,
    /// Number of frames of the ramp.
    #[arg(long, default_value_t = 31)]
    frames: usize,
    /// Number of custom lifts, each with its own noise stream.
    #[arg(long, default_value_t = 1)]
    lifts: usize,
    /// Image width of custom lifts [default: 160].
    #[arg(long)]
    width: Option<usize>,
    /// Image height of custom lifts [default: 120].
    #[arg(long)]
    height: Option<usize>,
    /// RMS boundary displacement, pixels.
    #[arg(long)]
    jitter: Option<f64>,
    /// Per-pixel flip probability.
    #[arg(long)]
    speckle: Option<f64>,
    /// Maximum fractional size change per frame.
    #[arg(long)]
    drift: Option<f64>,
    /// Accept trajectory angles outside [0, 30].
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    allow_wide: bool,
}

#[derive(Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    generator: &'static str,
    version: &'static str,
    seed: u64,
    allow_wide: bool,
    suite: &'a SuiteConfig,
    files: Vec<FileEntry>,
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn trajectory(a: &SynthArgs) -> Vec<f64> {
    if let Some(t) = &a.trajectory {
        return t.clone();
    }
    match a.frames {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| a.ramp_to * i as f64 / (n - 1) as f64).collect(),
    }
}

fn build_suite(a: &SynthArgs, seed: u64) -> Result<SuiteConfig, Failure> {
    let mut suite = match a.shape {
        None => synth::standard_suite(seed),
        Some(kind) => {
            if a.lifts == 0 {
                return Err(Failure::Usage("--lifts must be at least 1".into()));
            }
            let width = a.width.unwrap_or(160);
            let height = a.height.unwrap_or(120);
            let shape = ShapeSpec {
                kind,
                major: a.major,
                minor: a.minor,
                center: (
                    a.center_x.unwrap_or(width as f64 / 2.0),
                    a.center_y.unwrap_or(height as f64 / 2.0),
                ),
                angle: a.angle,
            };
            let traj = trajectory(a);
            let lifts = (0..a.lifts)
                .map(|i| LiftConfig {
                    id: format!("lift_{i:02}"),
                    shape,
                    trajectory: traj.clone(),
                    noise: NoiseSpec {
                        seed: derive_seed(seed, i as u64),
                        ..synth::standard_noise(seed)
                    },
                })
                .collect();
            SuiteConfig {
                width,
                height,
                seed,
                lifts,
            }
        }
    };
    if let Some(w) = a.width {
        suite.width = w;
    }
    if let Some(h) = a.height {
        suite.height = h;
    }
    for l in &mut suite.lifts {
        if let Some(j) = a.jitter {
            l.noise.boundary_jitter_px = j;
        }
        if let Some(s) = a.speckle {
            l.noise.speckle_rate = s;
        }
        if let Some(d) = a.drift {
            l.noise.size_drift = d;
        }
        if l.trajectory.is_empty() {
            return Err(Failure::Usage(format!("{}: trajectory has no frames", l.id)));
        }
        l.shape.validate()?;
        l.noise.validate()?;
    }
    Ok(suite)
}

fn relative(root: &Path, p: &Path) -> String {
    p.strip_prefix(root)
        .unwrap_or(p)
        .components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn run(a: SynthArgs) -> CmdResult {
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let suite = build_suite(&a, seed)?;
    let lifts = suite.generate(a.allow_wide)?;
    ensure_dir(&a.out)?;
    let mut files = Vec::new();
    for (cfg, frames) in suite.lifts.iter().zip(&lifts) {
        for p in io::write_lift_dir(&a.out.join(&cfg.id), frames)? {
            let bytes = std::fs::read(&p)?;
            files.push(FileEntry {
                path: relative(&a.out, &p),
                sha256: hex_sha256(&bytes),
            });
        }
    }
    let manifest = Manifest {
        generator: "slipkit synth",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        allow_wide: a.allow_wide,
        suite: &suite,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    io::write_atomic(&a.out.join("manifest.json"), json.as_bytes())?;
    let frames: usize = lifts.iter().map(Vec::len).sum();
    println!(
        "{} lifts, {frames} frames, seed {seed}, manifest sha256 {}",
        lifts.len(),
        hex_sha256(json.as_bytes())
    );
    Ok(())
}
