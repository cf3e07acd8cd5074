//! Best approximations by max-norm shell scanning, plus two independent
//! oracles: an exhaustive recomputation and, for `r = 1`, continued fractions.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linform::{zeta, IntVector, LinearForm, Residual};
use crate::realnum::{DyadicInterval, RealExpr};

/// One best approximation `m_nu` with `M_nu` and an enclosure of `zeta_nu > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestApprox {
    pub index: usize,
    pub m: IntVector,
    #[serde(with = "crate::serde_str::bigint")]
    pub norm: BigInt,
    pub zeta: DyadicInterval,
}

/// The sequence of best approximations found up to `search_bound`.
///
/// The final record never has a known successor: the next norm level, if
/// any, lies beyond the scanned range.
#[derive(Clone, Debug, PartialEq)]
pub struct BAChain {
    form: LinearForm,
    records: Vec<BestApprox>,
    search_bound: u64,
    precision_used: u32,
}

impl BAChain {
    /// Validates indices, vector lengths, norms, signs and both strict
    /// monotonicities.
    pub fn new(
        form: LinearForm,
        records: Vec<BestApprox>,
        search_bound: u64,
        precision_used: u32,
    ) -> Result<Self> {
        let r = form.r();
        for (i, rec) in records.iter().enumerate() {
            let bad = |what: &str| Error::InvalidInput(format!("record {}: {what}", i + 1));
            if rec.index != i + 1 {
                return Err(bad("indices must be consecutive from 1"));
            }
            if rec.m.len() != r + 1 {
                return Err(bad("wrong vector length"));
            }
            if rec.m.tail_norm() != rec.norm {
                return Err(bad("norm does not match the vector"));
            }
            if !rec.zeta.is_positive() {
                return Err(bad("zeta enclosure is not certified positive"));
            }
            if rec.norm > BigInt::from(search_bound) {
                return Err(bad("norm exceeds the search bound"));
            }
            if i > 0 {
                let prev = &records[i - 1];
                if rec.norm <= prev.norm {
                    return Err(bad("norms must strictly increase"));
                }
                if !rec.zeta.certainly_lt(&prev.zeta) {
                    return Err(bad("zeta must strictly decrease"));
                }
            }
        }
        Ok(Self::from_parts(form, records, search_bound, precision_used))
    }

    /// Assembles a chain without validation, for synthetic test fixtures.
    pub fn from_parts(
        form: LinearForm,
        records: Vec<BestApprox>,
        search_bound: u64,
        precision_used: u32,
    ) -> Self {
        BAChain {
            form,
            records,
            search_bound,
            precision_used,
        }
    }

    pub fn form(&self) -> &LinearForm {
        &self.form
    }

    pub fn r(&self) -> usize {
        self.form.r()
    }

    pub fn records(&self) -> &[BestApprox] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn search_bound(&self) -> u64 {
        self.search_bound
    }

    pub fn precision_used(&self) -> u32 {
        self.precision_used
    }

    /// Record `nu` (1-based).
    pub fn get(&self, nu: usize) -> Option<&BestApprox> {
        nu.checked_sub(1).and_then(|i| self.records.get(i))
    }

    pub fn norms(&self) -> Vec<BigInt> {
        self.records.iter().map(|r| r.norm.clone()).collect()
    }

    /// True when `M_{nu+1}` is known.
    pub fn has_successor(&self, nu: usize) -> bool {
        nu >= 1 && nu < self.records.len()
    }

    /// Records with `M <= bound`, reported as scanned to `bound`.
    pub fn truncated(&self, bound: u64) -> Self {
        let b = BigInt::from(bound);
        let records = self
            .records
            .iter()
            .filter(|r| r.norm <= b)
            .cloned()
            .collect();
        Self::from_parts(
            self.form.clone(),
            records,
            bound.min(self.search_bound),
            self.precision_used,
        )
    }

    /// An enclosure of `zeta_nu` at least as tight as `2^-bits`-scaled
    /// evaluation, intersected with the stored one.
    pub fn zeta_at(&self, nu: usize, bits: u32) -> Result<DyadicInterval> {
        let rec = self.get(nu).ok_or(Error::ChainTooShort {
            needed: nu,
            have: self.len(),
        })?;
        if rec.zeta.is_point() {
            return Ok(rec.zeta.clone());
        }
        let fresh = zeta(&rec.m, &self.form, bits)?;
        let lo = std::cmp::max(fresh.lower(), rec.zeta.lower()).clone();
        let hi = std::cmp::min(fresh.upper(), rec.zeta.upper()).clone();
        DyadicInterval::new(lo, hi)
    }

    /// Same vectors and norms, with overlapping zeta enclosures.
    pub fn same_records(&self, other: &BAChain) -> bool {
        self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.index == b.index
                    && a.m == b.m
                    && a.norm == b.norm
                    && !a.zeta.certainly_lt(&b.zeta)
                    && !b.zeta.certainly_lt(&a.zeta)
            })
    }
}

/// Canonical tails (first nonzero coordinate positive) of max-norm exactly `level`.
pub(crate) fn shell_tails(r: usize, level: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    // the first coordinate with |t_i| = level is `pivot`; earlier ones are strictly inside
    for pivot in 0..r {
        for sign in [1i64, -1] {
            let mut lows = vec![-level; r];
            let mut highs = vec![level; r];
            for j in 0..pivot {
                lows[j] = -level + 1;
                highs[j] = level - 1;
            }
            lows[pivot] = sign * level;
            highs[pivot] = sign * level;
            if lows.iter().zip(&highs).any(|(l, h)| l > h) {
                continue;
            }
            let mut t = lows.clone();
            loop {
                if first_nonzero_positive(&t) {
                    out.push(t.clone());
                }
                if !advance(&mut t, &lows, &highs) {
                    break;
                }
            }
        }
    }
    out.sort();
    out
}

pub(crate) fn first_nonzero_positive(t: &[i64]) -> bool {
    t.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Odometer step over a box; returns false after the last point.
pub(crate) fn advance(t: &mut [i64], lows: &[i64], highs: &[i64]) -> bool {
    for i in (0..t.len()).rev() {
        if t[i] < highs[i] {
            t[i] += 1;
            return true;
        }
        t[i] = lows[i];
    }
    false
}

/// Refines the contenders until one residual is certifiably the smallest in
/// magnitude. Ties that never separate are reported as dependence.
fn certified_argmin(form: &LinearForm, cands: &mut [Residual], max_bits: &mut u32) -> Result<usize> {
    let mut mags: Vec<DyadicInterval> = cands.iter().map(|c| c.magnitude()).collect();
    loop {
        let mut best = 0;
        for i in 1..mags.len() {
            if mags[i].upper() < mags[best].upper() {
                best = i;
            }
        }
        let rivals: Vec<usize> = (0..mags.len())
            .filter(|&i| i != best && mags[i].lower() <= mags[best].upper())
            .collect();
        if rivals.is_empty() {
            return Ok(best);
        }
        for i in std::iter::once(best).chain(rivals) {
            cands[i] = cands[i].refine(form)?;
            *max_bits = (*max_bits).max(cands[i].bits);
            mags[i] = cands[i].magnitude();
        }
    }
}

fn record_from(index: usize, res: &Residual) -> BestApprox {
    let v = res.vector();
    let (m, z) = if res.value.is_positive() {
        (v, res.value.clone())
    } else {
        (-&v, -&res.value)
    };
    BestApprox {
        index,
        norm: m.tail_norm(),
        m,
        zeta: z,
    }
}

/// All best approximations with `M <= max_norm`, by increasing shells.
pub fn enumerate_chain(form: &LinearForm, max_norm: u64) -> Result<BAChain> {
    if max_norm < 1 {
        return Err(Error::InvalidInput("max norm must be at least 1".into()));
    }
    let max_level = i64::try_from(max_norm)
        .map_err(|_| Error::InvalidInput("max norm exceeds 63 bits".into()))?;
    let r = form.r();
    let mut records: Vec<BestApprox> = Vec::new();
    let mut running: Option<Residual> = None;
    let mut max_bits = 0u32;

    for level in 1..=max_level {
        let tails = shell_tails(r, level);
        let mut cands: Vec<Residual> = tails
            .par_iter()
            .map(|t| Residual::compute(form, t))
            .collect::<Result<_>>()?;
        for c in &cands {
            max_bits = max_bits.max(c.bits);
        }
        let best = certified_argmin(form, &mut cands, &mut max_bits)?;
        let mut shell_min = cands.swap_remove(best);

        let improves = match running.as_mut() {
            None => true,
            Some(run) => loop {
                let (s, m) = (shell_min.magnitude(), run.magnitude());
                if s.certainly_lt(&m) {
                    break true;
                }
                if m.certainly_lt(&s) {
                    break false;
                }
                shell_min = shell_min.refine(form)?;
                *run = run.refine(form)?;
                max_bits = max_bits.max(shell_min.bits).max(run.bits);
                // keep the stored record consistent with the refined running minimum
                if let Some(last) = records.last_mut() {
                    last.zeta = run.magnitude();
                }
            },
        };
        if improves {
            let certified = shell_min.sign_certified(form)?;
            max_bits = max_bits.max(certified.bits);
            records.push(record_from(records.len() + 1, &certified));
            running = Some(certified);
        }
    }
    Ok(BAChain::from_parts(form.clone(), records, max_norm, max_bits))
}

/// Exhaustive reference: at every norm level the global minimum over the
/// whole box is recomputed from scratch.
pub fn brute_force_oracle(form: &LinearForm, max_norm: u64) -> Result<BAChain> {
    if max_norm < 1 {
        return Err(Error::InvalidInput("max norm must be at least 1".into()));
    }
    let m = i64::try_from(max_norm)
        .map_err(|_| Error::InvalidInput("max norm exceeds 63 bits".into()))?;
    let r = form.r();
    let lows = vec![-m; r];
    let highs = vec![m; r];
    let mut tails = Vec::new();
    let mut t = lows.clone();
    loop {
        if first_nonzero_positive(&t) {
            tails.push(t.clone());
        }
        if !advance(&mut t, &lows, &highs) {
            break;
        }
    }
    let norm_of = |t: &[i64]| t.iter().map(|c| c.abs()).max().unwrap_or(0);
    tails.sort_by_key(|t| norm_of(t));

    let mut residuals: Vec<Residual> = tails
        .iter()
        .map(|t| Residual::compute(form, t))
        .collect::<Result<_>>()?;
    let mut mags: Vec<DyadicInterval> = residuals.iter().map(|c| c.magnitude()).collect();
    let mut max_bits = residuals.iter().map(|c| c.bits).max().unwrap_or(0);

    let mut records: Vec<BestApprox> = Vec::new();
    let mut previous: Option<Vec<i64>> = None;
    let mut end = 0usize;
    for level in 1..=m {
        while end < tails.len() && norm_of(&tails[end]) <= level {
            end += 1;
        }
        let best = loop {
            let mut best = 0;
            for i in 1..end {
                if mags[i].upper() < mags[best].upper() {
                    best = i;
                }
            }
            let mut clash = false;
            for i in 0..end {
                if i != best && mags[i].lower() <= mags[best].upper() {
                    clash = true;
                    residuals[i] = residuals[i].refine(form)?;
                    mags[i] = residuals[i].magnitude();
                    max_bits = max_bits.max(residuals[i].bits);
                }
            }
            if !clash {
                break best;
            }
            residuals[best] = residuals[best].refine(form)?;
            mags[best] = residuals[best].magnitude();
            max_bits = max_bits.max(residuals[best].bits);
        };
        if previous.as_deref() != Some(&residuals[best].tail[..]) {
            previous = Some(residuals[best].tail.clone());
            let v = crate::linform::canonicalize_sign(&residuals[best].vector(), form)?;
            let z = zeta(&v, form, residuals[best].bits)?;
            records.push(BestApprox {
                index: records.len() + 1,
                norm: v.tail_norm(),
                m: v,
                zeta: z,
            });
        }
    }
    Ok(BAChain::from_parts(form.clone(), records, max_norm, max_bits))
}

/// Continued-fraction convergents `p/q` of `alpha` via interval-certified
/// Gauss map steps, restarting at doubled precision whenever a partial
/// quotient is not yet determined.
pub fn cf_convergents(alpha: &RealExpr, count: usize) -> Result<Vec<(BigInt, BigInt)>> {
    let quotients = cf_partial_quotients(alpha, count)?;
    let (mut p0, mut q0) = (BigInt::from(1), BigInt::from(0));
    let (mut p1, mut q1) = (quotients[0].clone(), BigInt::from(1));
    let mut out = vec![(p1.clone(), q1.clone())];
    for a in &quotients[1..] {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        (p0, q0, p1, q1) = (p1, q1, p2.clone(), q2.clone());
        out.push((p2, q2));
    }
    Ok(out)
}

pub fn cf_partial_quotients(alpha: &RealExpr, count: usize) -> Result<Vec<BigInt>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let prec = crate::realnum::Precision::default();
    'outer: for bits in prec.schedule(prec.start_bits) {
        let Some(mut x) = alpha.enclose(bits)? else {
            continue;
        };
        let mut quotients = Vec::with_capacity(count);
        for i in 0..count {
            let a = x.lower().floor();
            if x.upper().floor() != a {
                continue 'outer;
            }
            quotients.push(a.clone());
            if i + 1 == count {
                return Ok(quotients);
            }
            let frac = &x - &DyadicInterval::from_int(a);
            if !frac.is_positive() {
                continue 'outer;
            }
            x = match frac.recip(bits) {
                Some(v) => v,
                None => continue 'outer,
            };
        }
    }
    Err(Error::PrecisionExhausted { cap: prec.cap_bits })
}
