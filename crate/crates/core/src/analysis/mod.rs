//! Checks of the inequalities and identities satisfied by best-approximation
//! chains, with the determinant, rank and series diagnostics.
//!
//! Unconditional results (monotonicity, Minkowski, growth, the polytope
//! bound on full-rank windows) failing means the chain is wrong. The psi
//! and gap checks describe special tuples, and failure there is ordinary.

mod checks;
pub mod linalg;
mod psi;

pub use checks::{
    check_corollary3_gap, check_growth, check_minkowski, check_monotonic, check_polytope_all,
    check_polytope_bound, check_psi_singular, check_unimodular, determinant, growth_offset, tail_rank, Evidence,
    Status, Verdict,
};
pub use psi::{delta_k, series_partial_sums, PartialSum, PsiFamily, PsiSpec};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::enumerator::BAChain;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    pub psi: Option<PsiSpec>,
    pub k: Option<usize>,
    pub series_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminantEntry {
    pub nu: usize,
    #[serde(with = "crate::serde_str::bigint")]
    pub value: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub nu0: usize,
    pub rank: usize,
}

/// Everything `verify` reports about one chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub r: usize,
    pub records: usize,
    pub log_base: String,
    pub verdicts: Vec<Verdict>,
    pub determinants: Vec<DeterminantEntry>,
    pub ranks: Vec<RankEntry>,
    pub series_k: Option<usize>,
    pub series: Vec<PartialSum>,
    pub warnings: Vec<String>,
}

/// Checks whose failure contradicts a theorem rather than describing the tuple.
pub const THEOREM_CHECKS: [&str; 5] = ["monotonic", "minkowski", "growth", "polytope", "unimodular"];

impl ChainReport {
    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }

    pub fn theorem_failures(&self) -> Vec<&Verdict> {
        self.verdicts
            .iter()
            .filter(|v| THEOREM_CHECKS.contains(&v.check.as_str()) && v.status == Status::Fail)
            .collect()
    }
}

/// Runs every check, turning `ChainTooShort` and `HypothesisUnmet` into warnings.
pub fn analyze(chain: &BAChain, opts: &ReportOptions) -> Result<ChainReport> {
    let mut warnings = Vec::new();
    let mut verdicts = Vec::new();
    let mut keep = |name: &str, res: Result<Verdict>, warnings: &mut Vec<String>| match res {
        Ok(v) => {
            verdicts.push(v);
            Ok(())
        }
        Err(e @ (Error::ChainTooShort { .. } | Error::HypothesisUnmet(_))) => {
            warnings.push(format!("{name}: {e}"));
            Ok(())
        }
        Err(e) => Err(e),
    };
    keep("monotonic", check_monotonic(chain), &mut warnings)?;
    keep("minkowski", check_minkowski(chain), &mut warnings)?;
    keep("growth", check_growth(chain), &mut warnings)?;
    keep("polytope", check_polytope_all(chain), &mut warnings)?;
    if chain.r() == 1 {
        keep("unimodular", check_unimodular(chain), &mut warnings)?;
    }
    if let Some(psi) = &opts.psi {
        let psi = psi.clone().with_default_r(chain.r());
        keep("psi_singular", check_psi_singular(chain, &psi), &mut warnings)?;
        keep("corollary3_gap", check_corollary3_gap(chain, &psi), &mut warnings)?;
    }

    let r = chain.r();
    let determinants = (1..=chain.len().saturating_sub(r))
        .map(|nu| {
            Ok(DeterminantEntry {
                nu,
                value: determinant(chain, nu)?,
            })
        })
        .collect::<Result<_>>()?;
    let ranks = (1..=chain.len())
        .map(|nu0| {
            Ok(RankEntry {
                nu0,
                rank: tail_rank(chain, nu0)?,
            })
        })
        .collect::<Result<_>>()?;

    let mut series = Vec::new();
    if let Some(k) = opts.k {
        match series_partial_sums(chain, k, opts.series_bits.max(64)) {
            Ok(s) => series = s,
            Err(e @ Error::ChainTooShort { .. }) => warnings.push(format!("series: {e}")),
            Err(e) => return Err(e),
        }
    }
    Ok(ChainReport {
        r,
        records: chain.len(),
        log_base: "natural".into(),
        verdicts,
        determinants,
        ranks,
        series_k: opts.k,
        series,
        warnings,
    })
}
