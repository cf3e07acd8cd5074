//! Best Diophantine approximations of linear forms `m_0 + m_1 a_1 + ... + m_r a_r`
//! in exact arithmetic, with checks on the resulting chains and experiments
//! on what happens when the form gains `k` extra random coefficients.

pub mod analysis;
pub mod enumerator;
pub mod error;
pub mod extension;
pub mod linform;
pub mod realnum;
mod serde_str;

pub use analysis::{analyze, ChainReport, PsiSpec, ReportOptions, Status, Verdict};
pub use enumerator::{brute_force_oracle, cf_convergents, enumerate_chain, BAChain, BestApprox};
pub use error::{Error, Result};
pub use extension::{BetaSample, ExtendOptions, ExtensionReport, MonteCarloReport};
pub use linform::{IntVector, LinearForm};
pub use realnum::{Dyadic, DyadicInterval, Precision, RealExpr};
