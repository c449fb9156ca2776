use thiserror::Error;

/// Errors raised anywhere in the lab. Verifier-level outcomes that are not
/// failures of the code (a hypothesis that does not hold, a property check that
/// fails) are reported through [`crate::verify::VerifierReport`] instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("profiles live on different grids")]
    GridMismatch,
    #[error("group element of dimension {group} applied to a {grid}-D grid")]
    DimensionMismatch { group: usize, grid: usize },
    #[error("cannot combine elements of different groups")]
    GroupMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no base return found within the horizon")]
    EmptyReturnSet,
    #[error("step constraint violated: {0}")]
    CflViolation(String),
    #[error("non-finite value at node {node} after t = {time}")]
    NonFiniteState { time: f64, node: usize },
    #[error("profile at sample {sample} never crosses level {level}")]
    NoCrossing { sample: usize, level: f64 },
    #[error("perturbations of size {delta:e} escape the {eps:e}-ball (ensemble member {member})")]
    NotStable { eps: f64, delta: f64, member: usize },
    #[error("omega-limit estimate is undecided")]
    Undecided,
    #[error("problem does not declare the invariance required by {0}")]
    SymmetryFlagMissing(String),
    #[error("phase minimizer hit the search boundary at sample {sample} (sigma = {sigma})")]
    BracketFailure { sample: usize, sigma: f64 },
    #[error("phase series is not Cauchy: spread {spread:e} exceeds {tol:e}")]
    NoConvergence { spread: f64, tol: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("trapping violated: {0}")]
    TrappingViolated(String),
    #[error("invalid configuration:\n{}", format_issues(.0))]
    ConfigInvalid(Vec<ConfigIssue>),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed data: {0}")]
    Format(String),
}

/// A single configuration diagnostic, located by JSON pointer.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConfigIssue {
    pub pointer: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| {
            format!(
                "  {}: {}",
                if i.pointer.is_empty() { "/" } else { &i.pointer },
                i.message
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Format(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
