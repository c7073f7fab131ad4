//! File formats: 8-bit images, logit maps, ground-truth CSVs.
//!
//! Logit binaries are little-endian: `u32` width, `u32` height, then
//! `width * height` `f32` values in row-major order. CSV grids hold one image
//! row per line with comma-separated values.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, SlipError};
use crate::maskgen::{from_eight_bit, to_eight_bit};
use crate::metrics::{ground_truth_angle, LiftData};
use crate::synth::LiftFrame;
use crate::types::{BinaryMask, GrayImage, MarkerVector, ProbabilityMap, RgbImage};

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = img.dimensions();
    let data = img.pixels().map(|p| p.0).collect();
    RgbImage::new(w as usize, h as usize, data)
}

/// Read any supported image as grayscale; color inputs go through luminance.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path)?;
    match img {
        image::DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            GrayImage::new(w as usize, h as usize, g.into_raw())
        }
        _ => Ok(crate::types::luminance(&read_rgb(path)?)),
    }
}

/// Encode a grayscale image as binary PGM (P5).
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(image))?;
    Ok(())
}

pub fn write_png(path: &Path, image: &GrayImage) -> Result<()> {
    image::save_buffer(
        path,
        image.data(),
        image.width() as u32,
        image.height() as u32,
        image::ExtendedColorType::L8,
    )?;
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    Ok(from_eight_bit(&read_gray(path)?))
}

pub fn write_mask_pgm(path: &Path, mask: &BinaryMask) -> Result<()> {
    write_pgm(path, &to_eight_bit(mask))
}

pub fn decode_logits_bin(bytes: &[u8]) -> Result<ProbabilityMap> {
    if bytes.len() < 8 {
        return Err(SlipError::Parse("logit file shorter than its 8-byte header".into()));
    }
    let w = u32::from_le_bytes(bytes[0..4].try_into().expect("4 bytes")) as usize;
    let h = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body = &bytes[8..];
    if w.checked_mul(h).and_then(|n| n.checked_mul(4)) != Some(body.len()) {
        return Err(SlipError::Parse(format!(
            "logit header says {w}x{h} but body has {} bytes",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    ProbabilityMap::new(w, h, data)
}

pub fn encode_logits_bin(map: &ProbabilityMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 * map.data().len());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    for &v in map.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_logits_csv(text: &str) -> Result<ProbabilityMap> {
    let mut width = None;
    let mut data = Vec::new();
    let mut height = 0;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| SlipError::Parse(format!("line {}: {e}", ln + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(SlipError::Parse(format!(
                    "line {} has {} values, expected {w}",
                    ln + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        data.extend(row);
        height += 1;
    }
    ProbabilityMap::new(width.unwrap_or(0), height, data)
}

/// Read a logit map by extension: `.csv` as a text grid, anything else binary.
pub fn read_logits(path: &Path) -> Result<ProbabilityMap> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        decode_logits_csv(&fs::read_to_string(path)?)
    } else {
        decode_logits_bin(&fs::read(path)?)
    }
}

/// Parse a per-frame ground-truth CSV.
///
/// Accepted headers: a `gt` column of angles in degrees, or `dx,dy` columns
/// holding the marker vector per frame, in which case angles are measured
/// against the first row's vector.
pub fn parse_ground_truth_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| SlipError::Parse("ground-truth CSV is empty".into()))?
        .split(',')
        .map(|s| s.trim().to_ascii_lowercase())
        .collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let rows: Vec<Vec<f64>> = lines
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| SlipError::Parse(format!("row {}: {e}", i + 1)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let get = |row: &Vec<f64>, c: usize| {
        row.get(c)
            .copied()
            .ok_or_else(|| SlipError::Parse("ground-truth row too short".into()))
    };
    if let Some(c) = col("gt") {
        rows.iter().map(|r| get(r, c)).collect()
    } else if let (Some(cx), Some(cy)) = (col("dx"), col("dy")) {
        let vectors = rows
            .iter()
            .map(|r| MarkerVector::new(get(r, cx)?, get(r, cy)?))
            .collect::<Result<Vec<_>>>()?;
        let Some(first) = vectors.first() else {
            return Ok(Vec::new());
        };
        vectors.iter().map(|p| ground_truth_angle(p, first)).collect()
    } else {
        Err(SlipError::Parse(
            "ground-truth CSV needs a 'gt' column or 'dx,dy' columns".into(),
        ))
    }
}

pub fn ground_truth_csv(values: &[f64]) -> String {
    let mut out = String::from("frame,gt\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v:.6}\n"));
    }
    out
}

/// Write through a temporary sibling and rename, so readers never see a
/// partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| SlipError::Io(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

const IMAGE_EXTENSIONS: [&str; 5] = ["pgm", "png", "pnm", "ppm", "pbm"];

fn has_extension(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| exts.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

pub fn is_image_file(path: &Path) -> bool {
    path.is_file() && has_extension(path, &IMAGE_EXTENSIONS)
}

/// Files in `dir` accepted by `keep`, sorted by name.
pub fn list_files(dir: &Path, keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| SlipError::Io(format!("{}: {e}", dir.display())))? {
        let path = entry?.path();
        if path.is_file() && keep(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// All mask images of a directory in file-name order.
pub fn read_mask_dir(dir: &Path) -> Result<Vec<(PathBuf, BinaryMask)>> {
    list_files(dir, is_image_file)?
        .into_iter()
        .map(|p| {
            let m = read_mask(&p).map_err(|e| SlipError::Io(format!("{}: {e}", p.display())))?;
            Ok((p, m))
        })
        .collect()
}

/// Name of the ground-truth file inside a lift directory.
pub const GROUND_TRUTH_FILE: &str = "gt.csv";

/// Write one lift as `frame_NNN.pgm` files plus `gt.csv`; returns the paths
/// written, in order.
pub fn write_lift_dir(dir: &Path, frames: &[LiftFrame]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(frames.len() + 1);
    for (i, f) in frames.iter().enumerate() {
        let p = dir.join(format!("frame_{i:03}.pgm"));
        write_atomic(&p, &encode_pgm(&to_eight_bit(&f.mask)))?;
        written.push(p);
    }
    let gt: Vec<f64> = frames.iter().map(|f| f.ground_truth).collect();
    let p = dir.join(GROUND_TRUTH_FILE);
    write_atomic(&p, ground_truth_csv(&gt).as_bytes())?;
    written.push(p);
    Ok(written)
}

/// Read a lift directory written by [`write_lift_dir`] (or laid out the same way).
pub fn read_lift_dir(dir: &Path) -> Result<LiftData> {
    let masks: Vec<BinaryMask> = read_mask_dir(dir)?.into_iter().map(|(_, m)| m).collect();
    let gt = parse_ground_truth_csv(&fs::read_to_string(dir.join(GROUND_TRUTH_FILE))?)?;
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    LiftData::new(id, masks, gt)
}

/// Every sub-directory of `dir` holding a `gt.csv`, in name order.
pub fn read_dataset(dir: &Path) -> Result<Vec<LiftData>> {
    let mut lifts = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| SlipError::Io(format!("{}: {e}", dir.display())))? {
        let path = entry?.path();
        if path.is_dir() && path.join(GROUND_TRUTH_FILE).is_file() {
            lifts.push(path);
        }
    }
    lifts.sort();
    if lifts.is_empty() {
        return Err(SlipError::Empty(format!("no lift directories in {}", dir.display())));
    }
    lifts.iter().map(|p| read_lift_dir(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_roundtrip_through_reader() {
        let dir = tempfile::tempdir().unwrap();
        let mask = BinaryMask::from_fn(7, 5, |x, y| (x * y) % 3 == 1).unwrap();
        let p = dir.path().join("m.pgm");
        write_mask_pgm(&p, &mask).unwrap();
        assert_eq!(read_mask(&p).unwrap(), mask);
        let bytes = std::fs::read(&p).unwrap();
        assert!(bytes.starts_with(b"P5\n7 5\n255\n"));
        let png = dir.path().join("m.png");
        write_png(&png, &to_eight_bit(&mask)).unwrap();
        assert_eq!(read_mask(&png).unwrap(), mask);
    }

    #[test]
    fn color_images_use_luminance() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ppm");
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 255, 255, 255]);
        std::fs::write(&p, bytes).unwrap();
        assert_eq!(read_gray(&p).unwrap().data(), &[76, 255]);
    }

    #[test]
    fn logit_binary_layout() {
        let map = ProbabilityMap::new(3, 2, vec![0.0, 1.5, -2.0, 3.25, 0.5, -0.125]).unwrap();
        let bytes = encode_logits_bin(&map);
        assert_eq!(&bytes[..8], &[3, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(bytes.len(), 8 + 24);
        assert_eq!(decode_logits_bin(&bytes).unwrap(), map);
        assert!(decode_logits_bin(&bytes[..20]).is_err());
        assert!(decode_logits_bin(&[1, 2]).is_err());
    }

    #[test]
    fn logit_csv_grid() {
        let m = decode_logits_csv("0.5, -1\n2,3\n").unwrap();
        assert_eq!((m.width(), m.height()), (2, 2));
        assert_eq!(m.data(), &[0.5, -1.0, 2.0, 3.0]);
        assert!(decode_logits_csv("1,2\n3\n").is_err());
        assert!(decode_logits_csv("a,b\n").is_err());
    }

    #[test]
    fn lift_dir_roundtrip() {
        use crate::synth::{gen_lift, NoiseSpec, ShapeKind, ShapeSpec};
        let dir = tempfile::tempdir().unwrap();
        let spec = ShapeSpec {
            kind: ShapeKind::Bar,
            major: 30.0,
            minor: 8.0,
            center: (30.0, 25.0),
            angle: 12.0,
        };
        let frames = gen_lift(&spec, &[0.0, 2.0, 4.0], (60, 50), &NoiseSpec::none(), false).unwrap();
        let lift_dir = dir.path().join("lift_a");
        let written = write_lift_dir(&lift_dir, &frames).unwrap();
        assert_eq!(written.len(), 4);
        let data = read_dataset(dir.path()).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data[0].id, "lift_a");
        assert_eq!(data[0].ground_truth, vec![0.0, 2.0, 4.0]);
        assert_eq!(data[0].masks[2], frames[2].mask);
        assert!(read_dataset(&lift_dir).is_err());
    }

    #[test]
    fn ground_truth_columns() {
        let gt = parse_ground_truth_csv("frame,gt\n0,0\n1,1.5\n").unwrap();
        assert_eq!(gt, vec![0.0, 1.5]);
        let markers = parse_ground_truth_csv("frame,dx,dy\n0,1,0\n1,1,1\n2,0,2\n").unwrap();
        assert!((markers[1] - 45.0).abs() < 1e-12);
        assert!((markers[2] - 90.0).abs() < 1e-12);
        assert!(parse_ground_truth_csv("frame,angle\n0,1\n").is_err());
        assert_eq!(parse_ground_truth_csv(&ground_truth_csv(&[0.0, 2.5])).unwrap(), vec![0.0, 2.5]);
    }
}
