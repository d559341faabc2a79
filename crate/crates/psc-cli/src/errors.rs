use std::fmt;

/// Command-level failure carrying the process exit status.
///
/// Exit codes: 0 success, 2 usage/parse/dimension errors, 3 removal
/// warning (returned as a success code by `fit`), 4 empty survivors,
/// 5 degenerate statistics, 1 anything else.
#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    EmptySurvivors,
    Degenerate(String),
    Other(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::EmptySurvivors => 4,
            CmdError::Degenerate(_) => 5,
            CmdError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Usage(m) => write!(f, "error: {m}"),
            CmdError::EmptySurvivors => write!(f, "error: no points survived screening"),
            CmdError::Degenerate(m) => write!(f, "error: degenerate statistics: {m}"),
            CmdError::Other(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<psc_core::Error> for CmdError {
    fn from(e: psc_core::Error) -> Self {
        use psc_core::Error as E;
        match e {
            E::EmptySurvivors => CmdError::EmptySurvivors,
            E::DegenerateMean | E::DegenerateStep { .. } => CmdError::Degenerate(e.to_string()),
            E::DimensionBounds { .. }
            | E::ShapeMismatch { .. }
            | E::NonFinite { .. }
            | E::NotOrthonormal { .. }
            | E::LengthMismatch { .. }
            | E::EmptyDataset => CmdError::Usage(e.to_string()),
            other => CmdError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Usage(e.to_string())
    }
}

pub type CmdResult<T> = Result<T, CmdError>;
