//! Padding a chain to dimension `r + k`, the criterion under which padded
//! records stay best approximations of the extended tuple, the measure
//! bounds on the bad slabs, and seeded experiments comparing padded chains
//! with enumerated ones.

mod beta;
mod criterion;
mod omega;

pub use beta::{BetaRecipe, BetaSample, Provenance, BETA_MULTIPLIER_MAX, BETA_PRIMES};
pub use criterion::{
    criterion_volume, degeneracy_criterion, CriterionVerdict, CriterionWitness,
    DEFAULT_SCAN_BUDGET,
};
pub use omega::{lattice_sum, omega_bound, LatticeSum, OmegaBound};

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::series_partial_sums;
use crate::enumerator::{enumerate_chain, BAChain, BestApprox};
use crate::error::{Error, Result};
use crate::linform::{IntVector, LinearForm};
use crate::realnum::DyadicInterval;

/// A base record with `k` zero coordinates appended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddedVector {
    pub base: BestApprox,
    pub k: usize,
    pub m: IntVector,
}

pub fn pad_chain(chain: &BAChain, k: usize) -> Result<Vec<PaddedVector>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    Ok(chain
        .records()
        .iter()
        .map(|rec| PaddedVector {
            base: rec.clone(),
            k,
            m: rec.m.padded(k),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtendOptions {
    pub scan_budget: u128,
    pub lattice_budget: u128,
    pub bits: u32,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        Self {
            scan_budget: DEFAULT_SCAN_BUDGET,
            lattice_budget: DEFAULT_SCAN_BUDGET,
            bits: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddedStatus {
    pub nu: usize,
    pub m: IntVector,
    /// Whether `m` is itself a best approximation of the extended tuple.
    pub present: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub nu: usize,
    pub verdict: Option<CriterionVerdict>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaRow {
    pub nu: usize,
    #[serde(flatten)]
    pub omega: OmegaBound,
}

/// Whether the convergence hypothesis looks plausible on the scanned range.
/// Finitely many terms can never settle it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The last three series terms strictly decrease and the last is below the first.
    Decaying,
    /// The terms do not decay, so the run exercises the criterion and bounds only.
    NotDecaying,
    /// Fewer than three terms.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub r: usize,
    pub k: usize,
    pub max_norm: u64,
    pub betas: Vec<String>,
    pub provenance: Provenance,
    pub padded: Vec<PaddedStatus>,
    pub extended: Vec<BestApprox>,
    /// Extended best approximations with a nonzero `beta` part.
    pub extras: Vec<BestApprox>,
    /// Smallest `nu` from which the extended chain is exactly the padded one.
    pub agreement_from: Option<usize>,
    pub criteria: Vec<CriterionEntry>,
    pub omega: Vec<OmegaRow>,
    /// Every index passing the criterion has its padded vector present.
    pub consistent: bool,
    pub regime: Regime,
    pub warnings: Vec<String>,
}

impl ExtensionReport {
    pub fn criterion(&self, nu: usize) -> Option<&CriterionVerdict> {
        self.criteria
            .iter()
            .find(|c| c.nu == nu)
            .and_then(|c| c.verdict.as_ref())
    }
}

/// Enumerates the base chain of `form` up to `max_norm`, then compares.
pub fn compare_extended(
    form: &LinearForm,
    beta: &BetaSample,
    max_norm: u64,
    opts: &ExtendOptions,
) -> Result<ExtensionReport> {
    let chain = enumerate_chain(form, max_norm)?;
    compare_extended_with(&chain, beta, max_norm, opts)
}

fn regime_of(chain: &BAChain, k: usize) -> Result<Regime> {
    if chain.len() < 4 {
        return Ok(Regime::Undetermined);
    }
    let terms: Vec<DyadicInterval> = series_partial_sums(chain, k, 64)?
        .into_iter()
        .map(|s| s.term)
        .collect();
    let n = terms.len();
    let tail_falls = terms[n - 3..].windows(2).all(|w| w[1].certainly_lt(&w[0]));
    Ok(if tail_falls && terms[n - 1].certainly_lt(&terms[0]) {
        Regime::Decaying
    } else {
        Regime::NotDecaying
    })
}

/// Compares the padded records of `chain` (truncated to `max_norm`) with the
/// best approximations of the extended tuple.
pub fn compare_extended_with(
    chain: &BAChain,
    beta: &BetaSample,
    max_norm: u64,
    opts: &ExtendOptions,
) -> Result<ExtensionReport> {
    if chain.search_bound() < max_norm {
        return Err(Error::InvalidInput(format!(
            "chain was scanned to {}, below the requested {max_norm}",
            chain.search_bound()
        )));
    }
    let base = chain.truncated(max_norm);
    let (r, k) = (base.r(), beta.k());
    let ext_form = base.form().extended(beta.betas());
    let side = 2 * max_norm as u128 + 1;
    let volume = side.checked_pow((r + k) as u32).map_or(u128::MAX, |v| (v - 1) / 2);
    if volume > opts.scan_budget {
        return Err(Error::SearchTooLarge { volume, budget: opts.scan_budget });
    }
    let ext = enumerate_chain(&ext_form, max_norm)?;
    let padded = pad_chain(&base, k)?;

    let status: Vec<PaddedStatus> = padded
        .iter()
        .map(|p| PaddedStatus {
            nu: p.base.index,
            m: p.m.clone(),
            present: ext.records().iter().any(|e| e.m == p.m),
        })
        .collect();
    let extras: Vec<BestApprox> = ext
        .records()
        .iter()
        .filter(|e| e.m.coords()[r + 1..].iter().any(|c| !c.is_zero()))
        .cloned()
        .collect();

    let mut agreement_from = None;
    for nu in (1..=padded.len()).rev() {
        let floor = &padded[nu - 1].base.norm;
        let suffix: Vec<&IntVector> = ext
            .records()
            .iter()
            .filter(|e| &e.norm >= floor)
            .map(|e| &e.m)
            .collect();
        let want: Vec<&IntVector> = padded[nu - 1..].iter().map(|p| &p.m).collect();
        if suffix != want {
            break;
        }
        agreement_from = Some(nu);
    }

    let mut warnings = Vec::new();
    let mut criteria = Vec::new();
    let mut omega = Vec::new();
    let mut omega_open = true;
    for nu in 1..base.len() {
        let entry = match degeneracy_criterion(&base, beta, nu, opts.scan_budget) {
            Ok(v) => CriterionEntry {
                nu,
                verdict: Some(v),
                error: None,
            },
            Err(e @ (Error::SearchTooLarge { .. } | Error::PrecisionExhausted { .. })) => {
                CriterionEntry {
                    nu,
                    verdict: None,
                    error: Some(e.to_string()),
                }
            }
            Err(e) => return Err(e),
        };
        criteria.push(entry);

        if omega_open {
            let m_next = base.get(nu + 1).unwrap().norm.to_u64().unwrap_or(u64::MAX);
            let z = base.zeta_at(nu, opts.bits + 16)?;
            match omega_bound(&z, m_next, r, k, opts.lattice_budget, opts.bits) {
                Ok(o) => omega.push(OmegaRow { nu, omega: o }),
                Err(e @ Error::SearchTooLarge { .. }) => {
                    warnings.push(format!("omega table stops at nu = {nu}: {e}"));
                    omega_open = false;
                }
                Err(e) => return Err(e),
            }
        }
    }
    let consistent = criteria.iter().all(|c| {
        c.verdict
            .as_ref()
            .is_none_or(|v| !v.holds || status[c.nu - 1].present)
    });
    Ok(ExtensionReport {
        r,
        k,
        max_norm,
        betas: beta.betas().iter().map(|b| b.to_string()).collect(),
        provenance: beta.provenance().clone(),
        padded: status,
        extended: ext.records().to_vec(),
        extras,
        agreement_from,
        criteria,
        omega,
        consistent,
        regime: regime_of(&base, k)?,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloRow {
    pub nu: usize,
    /// Samples whose extended chain equals the padded one from `nu` on.
    pub matched: u64,
    pub criterion_passed: u64,
    /// Sum of the measure bounds over indices `>= nu` in the table.
    pub omega_tail: Option<DyadicInterval>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub seed: u64,
    pub samples: u64,
    pub k: usize,
    pub max_norm: u64,
    pub rows: Vec<MonteCarloRow>,
    pub inconsistent: u64,
    pub reports: Vec<ExtensionReport>,
}

/// Runs [`compare_extended_with`] on `samples` seeded beta tuples, one
/// generator stream per sample, and aggregates counts.
pub fn monte_carlo(
    chain: &BAChain,
    k: usize,
    samples: u64,
    seed: u64,
    max_norm: u64,
    opts: &ExtendOptions,
) -> Result<MonteCarloReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let reports: Vec<ExtensionReport> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let beta = BetaSample::seeded(k, seed, i)?;
            compare_extended_with(chain, &beta, max_norm, opts)
        })
        .collect::<Result<_>>()?;

    let depth = reports[0].padded.len();
    let table = &reports[0].omega;
    let rows = (1..=depth)
        .map(|nu| {
            let matched = reports
                .iter()
                .filter(|r| r.agreement_from.is_some_and(|a| a <= nu))
                .count() as u64;
            let criterion_passed = reports
                .iter()
                .filter(|r| r.criterion(nu).is_some_and(|v| v.holds))
                .count() as u64;
            let tail: Vec<&OmegaRow> = table.iter().filter(|o| o.nu >= nu).collect();
            let omega_tail = (!tail.is_empty()).then(|| {
                tail.iter()
                    .fold(DyadicInterval::from_int(0), |acc, o| &acc + &o.omega.bound)
            });
            MonteCarloRow {
                nu,
                matched,
                criterion_passed,
                omega_tail,
            }
        })
        .collect();
    Ok(MonteCarloReport {
        seed,
        samples,
        k,
        max_norm,
        rows,
        inconsistent: reports.iter().filter(|r| !r.consistent).count() as u64,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerator::brute_force_oracle;
    use crate::linform::zeta;
    use crate::realnum::{Precision, RealExpr};

    fn sqrt2() -> LinearForm {
        LinearForm::new(vec![RealExpr::sqrt_int(2).unwrap()]).unwrap()
    }

    fn golden_minus_one() -> RealExpr {
        let phi = RealExpr::div(
            RealExpr::add(RealExpr::int(1), RealExpr::sqrt_int(5).unwrap()),
            RealExpr::int(2),
        )
        .unwrap();
        RealExpr::sub(phi, RealExpr::int(1))
    }

    #[test]
    fn padding() {
        let form = LinearForm::new(vec![
            RealExpr::int_root(2, 3).unwrap(),
            RealExpr::int_root(4, 3).unwrap(),
        ])
        .unwrap();
        let chain = enumerate_chain(&form, 5).unwrap();
        let p = pad_chain(&chain, 3).unwrap();
        assert_eq!(p.len(), chain.len());
        assert_eq!(p[0].m.len(), 6);
        let c = enumerate_chain(&sqrt2(), 1).unwrap();
        assert_eq!(pad_chain(&c, 1).unwrap()[0].m, IntVector::from_i64(&[-1, 1, 0]));
        let empty = c.truncated(0);
        assert!(pad_chain(&empty, 2).unwrap().is_empty());
        assert!(pad_chain(&c, 0).is_err());
    }

    #[test]
    fn padding_keeps_zeta() {
        let chain = enumerate_chain(&sqrt2(), 100).unwrap();
        let ext = chain.form().extended(&[golden_minus_one()]);
        for p in pad_chain(&chain, 1).unwrap() {
            let z = zeta(&p.m, &ext, 80).unwrap();
            let base = zeta(&p.base.m, chain.form(), 80).unwrap();
            assert_eq!(z, base);
        }
    }

    #[test]
    fn criterion_passes_when_beta_is_far() {
        let chain = tiny_alpha_chain(1 << 16);
        let b = RealExpr::add(
            RealExpr::ratio(1, 2).unwrap(),
            RealExpr::div(RealExpr::sqrt_int(2).unwrap(), RealExpr::int(100)).unwrap(),
        );
        let beta = BetaSample::explicit(vec![b]).unwrap();
        let v = degeneracy_criterion(&chain, &beta, 1, DEFAULT_SCAN_BUDGET).unwrap();
        assert!(v.holds);
        assert_eq!(v.scanned, criterion_volume(2, 1, 1));

        let (a, bf) = (2f64.sqrt() / 1e4, 0.5 + 2f64.sqrt() / 100.0);
        let mut min = f64::MAX;
        for m1 in -2i32..=2 {
            for m2 in [-2i32, -1, 1, 2] {
                let x = m1 as f64 * a + m2 as f64 * bf;
                min = min.min((x - x.round()).abs());
            }
        }
        assert!(min > 2f64.sqrt() / 1e4);
    }

    #[test]
    fn criterion_finds_planted_witness() {
        let chain = enumerate_chain(&sqrt2(), 30).unwrap();
        // beta = frac(2 sqrt2) sits exactly on the slab of the tail (-2, 1)
        let b = RealExpr::sub(
            RealExpr::mul(RealExpr::int(2), RealExpr::sqrt_int(2).unwrap()),
            RealExpr::int(2),
        );
        let beta = BetaSample::explicit(vec![b]).unwrap();
        let v = degeneracy_criterion(&chain, &beta, 2, DEFAULT_SCAN_BUDGET).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.m.coords()[2].magnitude(), &num_bigint::BigUint::from(1u8));
        assert!(w.residual.contains_zero());
    }

    fn tiny_alpha_chain(cap: u32) -> BAChain {
        // zeta_1 = sqrt2 / 10^4 with M_2 = 2; only these two quantities enter
        let alpha = RealExpr::div(RealExpr::sqrt_int(2).unwrap(), RealExpr::int(10_000)).unwrap();
        let form = LinearForm::new(vec![alpha])
            .unwrap()
            .with_precision(Precision::with_cap(cap));
        let recs: Vec<BestApprox> = [[0i64, 1], [0, 2]]
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let m = IntVector::from_i64(m);
                BestApprox {
                    index: i + 1,
                    norm: m.tail_norm(),
                    zeta: zeta(&m, &form, 80).unwrap(),
                    m,
                }
            })
            .collect();
        BAChain::from_parts(form, recs, 2, 80)
    }

    #[test]
    fn criterion_tie_exhausts_precision() {
        let chain = tiny_alpha_chain(512);
        let alpha = chain.form().alphas()[0].clone();
        // beta = 1 - 3 alpha: the tail (2, 1) ties zeta_1 exactly, and no
        // combination in the box vanishes
        let b = RealExpr::sub(RealExpr::int(1), RealExpr::mul(RealExpr::int(3), alpha));
        let beta = BetaSample::explicit(vec![b]).unwrap();
        assert_eq!(
            degeneracy_criterion(&chain, &beta, 1, DEFAULT_SCAN_BUDGET),
            Err(Error::PrecisionExhausted { cap: 512 })
        );
        assert!(matches!(
            degeneracy_criterion(&chain, &beta, 1, 3),
            Err(Error::SearchTooLarge { .. })
        ));
        assert!(matches!(
            degeneracy_criterion(&chain, &beta, 2, DEFAULT_SCAN_BUDGET),
            Err(Error::ChainTooShort { .. })
        ));
    }

    #[test]
    fn extended_chain_matches_brute_force() {
        let beta = BetaSample::explicit(vec![golden_minus_one()]).unwrap();
        let rep = compare_extended(&sqrt2(), &beta, 30, &ExtendOptions::default()).unwrap();
        let ext = sqrt2().extended(beta.betas());
        let oracle = brute_force_oracle(&ext, 30).unwrap();
        assert_eq!(rep.extended.len(), oracle.len());
        for (a, b) in rep.extended.iter().zip(oracle.records()) {
            assert_eq!((&a.m, &a.norm), (&b.m, &b.norm));
        }
        for p in &rep.padded {
            assert_eq!(p.present, oracle.records().iter().any(|o| o.m == p.m));
        }
        assert!(rep.consistent);
        assert_eq!(rep.criteria.len(), rep.padded.len() - 1);
        assert_eq!(rep.omega.len(), rep.criteria.len());
        assert_eq!(rep.regime, Regime::NotDecaying);
    }

    #[test]
    fn single_shell_report() {
        let beta = BetaSample::seeded(1, 3, 0).unwrap();
        let rep = compare_extended(&sqrt2(), &beta, 1, &ExtendOptions::default()).unwrap();
        assert_eq!(rep.padded.len(), 1);
        assert!(rep.criteria.is_empty());
        assert!(!rep.extended.is_empty());
        assert_eq!(rep.regime, Regime::Undetermined);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let chain = enumerate_chain(&sqrt2(), 12).unwrap();
        let opts = ExtendOptions::default();
        let a = monte_carlo(&chain, 1, 10, 42, 12, &opts).unwrap();
        let b = monte_carlo(&chain, 1, 10, 42, 12, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.reports.len(), 10);
        assert_eq!(a.inconsistent, 0);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(monte_carlo(&chain, 1, 0, 42, 12, &opts).is_err());
    }
}
