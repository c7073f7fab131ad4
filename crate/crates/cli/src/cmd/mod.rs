pub mod angle;
pub mod eval_seg;
pub mod segment;
pub mod sweep;
pub mod synth;

use std::path::Path;

use crate::failure::Failure;

/// Create `dir` (and parents), mapping failures to a data error.
pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Write to a file when given, otherwise to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                ensure_dir(parent)?;
            }
            slipkit::io::write_atomic(p, text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
