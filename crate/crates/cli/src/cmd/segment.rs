use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use slipkit::io;
use slipkit::maskgen::{self, DEFAULT_THRESHOLD};
use slipkit::BinaryMask;

use super::{ensure_dir, stem};
use crate::failure::{CmdResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskFormat {
    Pgm,
    Png,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// Directory of logit maps (.bin or .csv).
    #[arg(long, value_name = "DIR")]
    logits: Option<PathBuf>,
    /// Directory of contact images for difference segmentation.
    #[arg(long, value_name = "DIR")]
    contact: Option<PathBuf>,
    /// No-contact reference image for difference segmentation.
    #[arg(long, value_name = "IMG")]
    reference: Option<PathBuf>,
    /// Probability threshold applied after the sigmoid.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Minimum absolute gray-level difference counted as contact.
    #[arg(long, default_value_t = 25)]
    delta: u8,
    /// Output directory for the masks.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Image format of the written masks.
    #[arg(long, value_enum, default_value = "pgm")]
    format: MaskFormat,
}

enum Mode<'a> {
    Logits(&'a Path),
    Baseline(&'a Path, &'a Path),
}

fn mode(a: &SegmentArgs) -> Result<Mode<'_>, Failure> {
    match (&a.logits, &a.contact, &a.reference) {
        (Some(l), None, None) => Ok(Mode::Logits(l)),
        (None, Some(c), Some(r)) => Ok(Mode::Baseline(c, r)),
        (None, None, None) => Err(Failure::Usage(
            "give either --logits <dir> or --contact <dir> --reference <img>".into(),
        )),
        (Some(_), _, _) => Err(Failure::Usage(
            "--logits cannot be combined with --contact/--reference".into(),
        )),
        _ => Err(Failure::Usage("--contact and --reference must be given together".into())),
    }
}

fn write_mask(out: &Path, name: &str, mask: &BinaryMask, format: MaskFormat) -> CmdResult {
    let gray = maskgen::to_eight_bit(mask);
    match format {
        MaskFormat::Pgm => io::write_atomic(&out.join(format!("{name}.pgm")), &io::encode_pgm(&gray))?,
        MaskFormat::Png => io::write_png(&out.join(format!("{name}.png")), &gray)?,
    }
    Ok(())
}

fn is_logit_file(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("bin" | "csv")
    )
}

pub fn run(a: SegmentArgs) -> CmdResult {
    let mode = mode(&a)?;
    if !(a.threshold > 0.0 && a.threshold < 1.0) {
        return Err(Failure::Usage(format!(
            "--threshold must lie strictly between 0 and 1, got {}",
            a.threshold
        )));
    }
    let (inputs, reference) = match mode {
        Mode::Logits(dir) => (io::list_files(dir, is_logit_file)?, None),
        Mode::Baseline(dir, reference) => (io::list_files(dir, io::is_image_file)?, Some(io::read_gray(reference)?)),
    };
    if inputs.is_empty() {
        return Err(Failure::Data("no input files found".into()));
    }
    ensure_dir(&a.out)?;
    let segment_one = |path: &PathBuf| -> Result<(String, usize), Failure> {
        let mask = match &reference {
            None => {
                let probs = maskgen::sigmoid_map(&io::read_logits(path)?)?;
                maskgen::binarize(&probs, a.threshold)?
            }
            Some(r) => maskgen::diff_segment(&io::read_gray(path)?, r, a.delta)?,
        };
        let name = stem(path);
        write_mask(&a.out, &name, &mask, a.format)?;
        Ok((name, mask.count()))
    };
    let results: Vec<_> = inputs
        .par_iter()
        .map(|p| segment_one(p).map_err(|e| e.at(p)))
        .collect();
    for r in results {
        let (name, pixels) = r?;
        if pixels == 0 {
            log::warn!("{name}: mask is empty");
            eprintln!("warning: {name}: no contact pixels");
        }
        println!("{name}\t{pixels} contact pixels");
    }
    Ok(())
}
