use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BetaSample;
use crate::enumerator::{advance, first_nonzero_positive, BAChain};
use crate::error::{Error, Result};
use crate::linform::{IntVector, LinearForm, Residual};
use crate::realnum::DyadicInterval;

/// Default number of residual evaluations one criterion call may spend.
pub const DEFAULT_SCAN_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionWitness {
    pub m: IntVector,
    pub residual: DyadicInterval,
}

/// Outcome of the degeneracy criterion at one index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub nu: usize,
    /// `M_{nu+1}`, the box half-width of the scan.
    #[serde(with = "crate::serde_str::bigint")]
    pub bound: BigInt,
    pub zeta: DyadicInterval,
    pub holds: bool,
    /// The violating vector with the smallest residual, when one exists.
    pub witness: Option<CriterionWitness>,
    #[serde(with = "crate::serde_str::count")]
    pub scanned: u128,
}

/// Number of canonical extended tails with `|m_j| <= m` and a nonzero
/// `beta` part.
pub fn criterion_volume(m: u64, r: usize, k: usize) -> u128 {
    let side = 2 * m as u128 + 1;
    let pow = |e: usize| side.checked_pow(e as u32).unwrap_or(u128::MAX);
    pow(r).saturating_mul(pow(k).saturating_sub(1)) / 2
}

enum Outcome {
    Clear,
    Violates(Residual),
    Undecided,
}

fn classify(ext: &LinearForm, chain: &BAChain, nu: usize, zeta: &DyadicInterval, tail: &[i64]) -> Result<Outcome> {
    let mut res = Residual::compute(ext, tail)?;
    let mut z = zeta.clone();
    loop {
        let mag = res.magnitude();
        if mag.lower() >= z.upper() {
            return Ok(Outcome::Clear);
        }
        if mag.upper() < z.lower() {
            return Ok(Outcome::Violates(res));
        }
        if ext.precision().refine(res.bits).is_none() {
            return Ok(Outcome::Undecided);
        }
        res = res.refine(ext)?;
        z = chain.zeta_at(nu, res.bits)?;
    }
}

/// Decides whether every extended vector with `max |m_j| <= M_{nu+1}`, a
/// nonzero `beta` part and the optimal `m_0` keeps `|zeta| >= zeta_nu`.
/// A certified violation settles the answer even if other vectors tie
/// `zeta_nu` too closely to separate; without one, such ties are
/// `PrecisionExhausted`.
pub fn degeneracy_criterion(
    chain: &BAChain,
    beta: &BetaSample,
    nu: usize,
    budget: u128,
) -> Result<CriterionVerdict> {
    if !chain.has_successor(nu) {
        return Err(Error::ChainTooShort {
            needed: nu + 1,
            have: chain.len(),
        });
    }
    let bound = chain.get(nu + 1).unwrap().norm.clone();
    let (r, k) = (chain.r(), beta.k());
    let m = bound.to_u64().unwrap_or(u64::MAX);
    let volume = criterion_volume(m, r, k);
    if volume > budget {
        return Err(Error::SearchTooLarge { volume, budget });
    }
    let m = m as i64;
    let ext = chain.form().extended(beta.betas());
    let zeta = chain.zeta_at(nu, ext.precision().start_bits + 64)?;

    let alpha_parts: Vec<Vec<i64>> = {
        let (lows, highs) = (vec![-m; r], vec![m; r]);
        let mut t = lows.clone();
        let mut out = vec![t.clone()];
        while advance(&mut t, &lows, &highs) {
            out.push(t.clone());
        }
        out
    };
    let worst = alpha_parts
        .par_iter()
        .map(|a| -> Result<(u128, bool, Option<Residual>)> {
            let alpha_zero = a.iter().all(|&c| c == 0);
            if !alpha_zero && !first_nonzero_positive(a) {
                return Ok((0, false, None));
            }
            let (lows, highs) = (vec![-m; k], vec![m; k]);
            let mut b = lows.clone();
            let mut tail = a.clone();
            tail.extend_from_slice(&b);
            let mut scanned = 0u128;
            let mut best: Option<Residual> = None;
            let mut undecided = false;
            loop {
                let keep = if alpha_zero {
                    first_nonzero_positive(&b)
                } else {
                    b.iter().any(|&c| c != 0)
                };
                if keep {
                    tail[r..].copy_from_slice(&b);
                    scanned += 1;
                    match classify(&ext, chain, nu, &zeta, &tail)? {
                        Outcome::Clear => {}
                        Outcome::Undecided => undecided = true,
                        Outcome::Violates(res) => {
                            if best.as_ref().is_none_or(|w| smaller(&res, w)) {
                                best = Some(res);
                            }
                        }
                    }
                }
                if !advance(&mut b, &lows, &highs) {
                    break;
                }
            }
            Ok((scanned, undecided, best))
        })
        .collect::<Result<Vec<_>>>()?;

    let scanned = worst.iter().map(|w| w.0).sum();
    let undecided = worst.iter().any(|w| w.1);
    let witness = worst
        .into_iter()
        .filter_map(|w| w.2)
        .reduce(|a, b| if smaller(&b, &a) { b } else { a })
        .map(|res| {
            let v = res.vector();
            let (m, residual) = if res.value.lower().signum() >= 0 {
                (v, res.value)
            } else {
                (-&v, -res.value)
            };
            CriterionWitness { m, residual }
        });
    if witness.is_none() && undecided {
        return Err(Error::PrecisionExhausted {
            cap: ext.precision().cap_bits,
        });
    }
    Ok(CriterionVerdict {
        nu,
        bound,
        zeta,
        holds: witness.is_none(),
        witness,
        scanned,
    })
}

fn smaller(a: &Residual, b: &Residual) -> bool {
    let (ma, mb) = (a.magnitude(), b.magnitude());
    (ma.upper(), &a.tail) < (mb.upper(), &b.tail)
}
