//! Flat `key=value` config files, applied as trailing `--key=value` flags so
//! that they override anything given on the command line.

use std::ffi::OsString;
use std::path::Path;

use crate::failure::Failure;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Failure::Usage(format!("config line {}: empty key", n + 1)));
        }
        if key == "config" {
            return Err(Failure::Usage("config files cannot include other config files".into()));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Path given to `--config`, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Command line with the config file entries appended.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = args;
    for (k, v) in parse(&text)? {
        out.push(format!("--{k}={v}").into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let p = parse("# comment\nwindow = 4\n\nelongation_min=1.5\n").unwrap();
        assert_eq!(
            p,
            vec![
                ("window".to_string(), "4".to_string()),
                ("elongation-min".to_string(), "1.5".to_string())
            ]
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(parse("window 4"), Err(Failure::Usage(_))));
        assert!(matches!(parse("=4"), Err(Failure::Usage(_))));
        assert!(matches!(parse("config=x"), Err(Failure::Usage(_))));
    }

    #[test]
    fn finds_config_path() {
        let args: Vec<OsString> = ["slipkit", "angle", "--config", "a.cfg"].iter().map(Into::into).collect();
        assert_eq!(config_path(&args), Some("a.cfg".into()));
        let args: Vec<OsString> = ["slipkit", "--config=b.cfg", "sweep"].iter().map(Into::into).collect();
        assert_eq!(config_path(&args), Some("b.cfg".into()));
    }
}
