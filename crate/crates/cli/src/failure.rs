use std::fmt;

use slipkit::SlipError;

/// Command failure carrying its process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, bad config values or an invalid synthetic spec (exit 2).
    Usage(String),
    /// No usable contact axis, e.g. a round first frame (exit 3).
    Degenerate(String),
    /// Inputs that do not line up or cannot be read (exit 4).
    Data(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Degenerate(_) => 3,
            Failure::Data(_) => 4,
        }
    }
}

impl Failure {
    /// Prefix the message with the offending file.
    pub fn at(self, path: &std::path::Path) -> Self {
        let wrap = |m: String| format!("{}: {m}", path.display());
        match self {
            Failure::Usage(m) => Failure::Usage(wrap(m)),
            Failure::Degenerate(m) => Failure::Degenerate(wrap(m)),
            Failure::Data(m) => Failure::Data(wrap(m)),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Degenerate(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

impl From<SlipError> for Failure {
    fn from(e: SlipError) -> Self {
        let msg = e.to_string();
        match e {
            SlipError::Config(_) => Failure::Usage(msg),
            SlipError::NoContact { .. }
            | SlipError::DegenerateFit(_)
            | SlipError::DegenerateSkeleton { .. }
            | SlipError::InitialContactUnreliable
            | SlipError::Degenerate(_) => Failure::Degenerate(msg),
            SlipError::DimensionMismatch { .. }
            | SlipError::InvalidDimensions { .. }
            | SlipError::NonFinite { .. }
            | SlipError::Empty(_)
            | SlipError::Io(_)
            | SlipError::Parse(_) => Failure::Data(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;
