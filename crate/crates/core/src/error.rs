use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A point or codepoint lies outside the divergence domain.
    #[error("{}value {value} at coordinate {coord} is outside {expected}", row_prefix(*row))]
    Domain {
        row: Option<usize>,
        coord: usize,
        value: f64,
        expected: String,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} curve entries, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("label vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("rejection sampling for component {component} accepted too few draws")]
    RejectionBudget { component: usize },
    #[error("unknown preset `{0}`; expected one of gaussian, poisson, binomial, gamma, cauchy, heterogeneous followed by `,small` or `,large`")]
    UnknownPreset(String),
    #[error("cannot parse divergence `{0}`")]
    Parse(String),
    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),
}

fn row_prefix(row: Option<usize>) -> String {
    match row {
        Some(r) => alloc::format!("row {r}: "),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn with_row(self, row: usize) -> Self {
        match self {
            Error::Domain {
                coord,
                value,
                expected,
                ..
            } => Error::Domain {
                row: Some(row),
                coord,
                value,
                expected,
            },
            other => other,
        }
    }
}
