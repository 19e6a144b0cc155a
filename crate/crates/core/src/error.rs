use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which invariance condition a failed solve violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Violation {
    Eq3,
    Eq4,
    Range,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Violation::Eq3 => "eq3",
            Violation::Eq4 => "eq4",
            Violation::Range => "range",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot mix radicands sqrt({0}) and sqrt({1})")]
    MixedRadicand(u64, u64),
    #[error("cannot mix exact and float scalars")]
    MixedBackend,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),
    #[error("affine pullback needs a positive slope")]
    NonpositiveSlope,
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("infeasible ({which}), max deviation {deviation}")]
    Infeasible { which: Violation, deviation: f64 },
    #[error("density has zero total mass")]
    ZeroMass,
    #[error("inadmissible branch choice at step {step}: x = {x}")]
    InadmissibleChoice { step: usize, x: f64 },
    #[error("enumeration exceeded the node budget of {0}")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
