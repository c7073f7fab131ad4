use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use slipkit::maskgen::LabelMeFile;
use slipkit::metrics::{mean_std, seg_score};
use slipkit::{io, BinaryMask};

use super::{emit, ensure_dir, stem};
use crate::failure::{CmdResult, Failure};

#[derive(Args, Debug)]
pub struct EvalSegArgs {
    /// Directory of predicted masks.
    #[arg(long, value_name = "DIR")]
    pred: PathBuf,
    /// Directory of ground-truth masks or LabelMe JSON files, matched by file stem.
    #[arg(long, value_name = "DIR")]
    gt: PathBuf,
    /// Output directory for `seg_scores.csv` and `seg_scores.json`; CSV to stdout when omitted.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct FileScore {
    file: String,
    dice: f64,
    iou: f64,
}

#[derive(Serialize)]
struct Summary {
    files: usize,
    dice_mean: f64,
    dice_std: f64,
    iou_mean: f64,
    iou_std: f64,
}

#[derive(Serialize)]
struct Report {
    per_file: Vec<FileScore>,
    summary: Summary,
}

fn is_gt_file(p: &Path) -> bool {
    io::is_image_file(p) || p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_gt(path: &Path) -> Result<BinaryMask, Failure> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let text = std::fs::read_to_string(path)?;
        Ok(LabelMeFile::from_json(&text)?.to_mask()?)
    } else {
        Ok(io::read_mask(path)?)
    }
}

fn by_stem(files: Vec<PathBuf>, what: &str) -> Result<BTreeMap<String, PathBuf>, Failure> {
    let mut map = BTreeMap::new();
    for f in files {
        if let Some(prev) = map.insert(stem(&f), f.clone()) {
            return Err(Failure::Data(format!(
                "{what} files {} and {} share a name",
                prev.display(),
                f.display()
            )));
        }
    }
    Ok(map)
}

pub fn run(a: EvalSegArgs) -> CmdResult {
    let preds = by_stem(io::list_files(&a.pred, io::is_image_file)?, "prediction")?;
    let gts = by_stem(io::list_files(&a.gt, is_gt_file)?, "ground-truth")?;
    if gts.is_empty() {
        return Err(Failure::Data(format!("no ground-truth files in {}", a.gt.display())));
    }
    if preds.is_empty() {
        return Err(Failure::Data(format!("no predicted masks in {}", a.pred.display())));
    }
    let missing_gt: Vec<&String> = preds.keys().filter(|k| !gts.contains_key(*k)).collect();
    let missing_pred: Vec<&String> = gts.keys().filter(|k| !preds.contains_key(*k)).collect();
    if !missing_gt.is_empty() || !missing_pred.is_empty() {
        for k in &missing_gt {
            eprintln!("unmatched prediction: {k}");
        }
        for k in &missing_pred {
            eprintln!("unmatched ground truth: {k}");
        }
        return Err(Failure::Data(format!(
            "{} predictions and {} ground-truth files have no partner",
            missing_gt.len(),
            missing_pred.len()
        )));
    }

    let mut per_file = Vec::with_capacity(preds.len());
    for (name, pred_path) in &preds {
        let gt_path = &gts[name];
        let pred = io::read_mask(pred_path).map_err(|e| Failure::from(e).at(pred_path))?;
        let gt = read_gt(gt_path).map_err(|e| e.at(gt_path))?;
        let s = seg_score(&pred, &gt).map_err(|e| Failure::from(e).at(pred_path))?;
        per_file.push(FileScore {
            file: name.clone(),
            dice: s.dice,
            iou: s.iou,
        });
    }
    let dice: Vec<f64> = per_file.iter().map(|f| f.dice).collect();
    let iou: Vec<f64> = per_file.iter().map(|f| f.iou).collect();
    let (dice_mean, dice_std) = mean_std(&dice);
    let (iou_mean, iou_std) = mean_std(&iou);
    let report = Report {
        summary: Summary {
            files: per_file.len(),
            dice_mean,
            dice_std,
            iou_mean,
            iou_std,
        },
        per_file,
    };

    let mut csv = String::from("file,dice,iou\n");
    for f in &report.per_file {
        writeln!(csv, "{},{:.6},{:.6}", f.file, f.dice, f.iou).unwrap();
    }
    writeln!(csv, "mean,{dice_mean:.6},{iou_mean:.6}").unwrap();
    writeln!(csv, "std,{dice_std:.6},{iou_std:.6}").unwrap();

    match &a.out {
        None => emit(None, &csv)?,
        Some(dir) => {
            ensure_dir(dir)?;
            emit(Some(&dir.join("seg_scores.csv")), &csv)?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            emit(Some(&dir.join("seg_scores.json")), &json)?;
            println!(
                "{} files: Dice {dice_mean:.4} ± {dice_std:.4}, IoU {iou_mean:.4} ± {iou_std:.4}",
                report.summary.files
            );
        }
    }
    Ok(())
}
