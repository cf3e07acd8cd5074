use num_bigint::BigInt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("precision cap of {cap} bits reached")]
    PrecisionExhausted { cap: u32 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("interval straddles a half-integer")]
    AmbiguousRounding,
    #[error("interval too wide to round (width must be below 1/4)")]
    WidthTooLarge,
    #[error("rational dependence suspected near tail {}", fmt_tail(.tail))]
    DependenceSuspected { tail: Vec<BigInt> },
    #[error("chain too short: need {needed} records, have {have}")]
    ChainTooShort { needed: usize, have: usize },
    #[error("search volume {volume} exceeds budget {budget}")]
    SearchTooLarge { volume: u128, budget: u128 },
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn fmt_tail(tail: &[BigInt]) -> String {
    let parts: Vec<String> = tail.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

impl Error {
    pub(crate) fn dependence(tail: &[i64]) -> Self {
        Error::DependenceSuspected {
            tail: tail.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }
}
