use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::{bareiss_determinant, matrix_rank};
use super::psi::PsiSpec;
use crate::enumerator::BAChain;
use crate::error::{Error, Result};
use crate::realnum::{Dyadic, DyadicInterval, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Undecided,
}

/// Certified comparison of `value` against `bound` at one index.
/// `holds` is `None` when the enclosures still overlap at the precision cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub nu: usize,
    pub value: DyadicInterval,
    pub bound: DyadicInterval,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    /// First index at which the check failed or could not be decided.
    pub witness: Option<usize>,
    /// The applicable index closest to violating the inequality.
    pub tightest: Option<Evidence>,
    pub evidence: Vec<Evidence>,
    pub skipped: Vec<usize>,
    pub note: Option<String>,
}

impl Verdict {
    fn new(check: &str) -> Self {
        Verdict {
            check: check.to_string(),
            status: Status::Pass,
            witness: None,
            tightest: None,
            evidence: Vec::new(),
            skipped: Vec::new(),
            note: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Folds the evidence into status, witness and tightest entry. `slack`
    /// orders entries from tightest to loosest.
    fn settle(mut self, slack: impl Fn(&Evidence) -> f64) -> Self {
        let first_bad = self.evidence.iter().find(|e| e.holds != Some(true));
        self.status = match first_bad.map(|e| e.holds) {
            None => Status::Pass,
            Some(Some(false)) => Status::Fail,
            Some(_) => Status::Undecided,
        };
        if let Some(Some(false)) = first_bad.map(|e| e.holds) {
            // a definite failure outranks an earlier undecided index
            let fail = self.evidence.iter().find(|e| e.holds == Some(false));
            self.witness = fail.map(|e| e.nu);
        } else {
            self.witness = first_bad.map(|e| e.nu);
        }
        self.tightest = self
            .evidence
            .iter()
            .min_by(|a, b| slack(a).total_cmp(&slack(b)))
            .cloned();
        self
    }
}

#[derive(Clone, Copy)]
enum Rel {
    Le,
    Ge,
}

fn decide(value: &DyadicInterval, bound: &DyadicInterval, rel: Rel) -> Option<bool> {
    let (small, big) = match rel {
        Rel::Le => (value, bound),
        Rel::Ge => (bound, value),
    };
    if small.upper() <= big.lower() {
        Some(true)
    } else if small.lower() > big.upper() {
        Some(false)
    } else {
        None
    }
}

/// Evaluates at increasing precision until the relation is decided or the
/// schedule runs out.
fn certify(
    nu: usize,
    prec: &Precision,
    start: u32,
    rel: Rel,
    mut eval: impl FnMut(u32) -> Result<(DyadicInterval, DyadicInterval)>,
) -> Result<Evidence> {
    let mut last = None;
    for bits in prec.schedule(start) {
        let (value, bound) = eval(bits)?;
        let holds = decide(&value, &bound, rel);
        let exact = value.is_point() && bound.is_point();
        last = Some(Evidence {
            nu,
            value,
            bound,
            holds,
        });
        if holds.is_some() || exact {
            break;
        }
    }
    Ok(last.expect("schedule is nonempty"))
}

fn log2_abs(d: &Dyadic) -> f64 {
    if d.is_zero() {
        return f64::NEG_INFINITY;
    }
    let m = d.mantissa().abs();
    let drop = (m.bits() as i64 - 53).max(0);
    let top = (m >> drop as usize).to_f64().unwrap_or(f64::MAX);
    top.log2() + (drop + d.exponent()) as f64
}

/// `log2(value / bound)` at the midpoints, for ranking entries by tightness.
fn log_ratio(e: &Evidence) -> f64 {
    log2_abs(&e.value.midpoint()) - log2_abs(&e.bound.midpoint())
}

fn too_short(needed: usize, chain: &BAChain) -> Error {
    Error::ChainTooShort {
        needed,
        have: chain.len(),
    }
}

fn int_iv(n: &BigInt) -> DyadicInterval {
    DyadicInterval::from_int(n.clone())
}

/// Strict increase of `M_nu` and certified strict decrease of `zeta_nu`.
pub fn check_monotonic(chain: &BAChain) -> Result<Verdict> {
    let mut v = Verdict::new("monotonic");
    let prec = *chain.form().precision();
    for nu in 2..=chain.len() {
        let (prev, cur) = (chain.get(nu - 1).unwrap(), chain.get(nu).unwrap());
        if cur.norm <= prev.norm {
            v.evidence.push(Evidence {
                nu,
                value: int_iv(&prev.norm),
                bound: int_iv(&cur.norm),
                holds: Some(false),
            });
            v.note = Some(format!("M_{nu} does not exceed M_{}", nu - 1));
            break;
        }
        let e = certify(nu, &prec, prec.start_bits, Rel::Le, |bits| {
            Ok((chain.zeta_at(nu, bits)?, chain.zeta_at(nu - 1, bits)?))
        })?;
        // strict decrease: equal point enclosures do not count
        let strict = match e.holds {
            Some(true) => Some(e.value.certainly_lt(&e.bound)),
            other => other,
        };
        let stop = strict != Some(true);
        v.evidence.push(Evidence { holds: strict, ..e });
        if stop {
            v.note = Some(format!("zeta_{nu} is not certified below zeta_{}", nu - 1));
            break;
        }
    }
    Ok(v.settle(|e| -log_ratio(e)))
}

/// `zeta_nu * M_{nu+1}^r <= 1` for every record with a successor.
pub fn check_minkowski(chain: &BAChain) -> Result<Verdict> {
    if chain.len() < 2 {
        return Err(too_short(2, chain));
    }
    let r = chain.r() as u32;
    let prec = *chain.form().precision();
    let mut v = Verdict::new("minkowski");
    for nu in 1..chain.len() {
        let scale = chain.get(nu + 1).unwrap().norm.pow(r);
        let start = prec.start_bits + scale.bits() as u32;
        let one = DyadicInterval::from_int(1);
        let e = certify(nu, &prec, start, Rel::Le, |bits| {
            Ok((chain.zeta_at(nu, bits)?.scale_int(&scale), one.clone()))
        })?;
        v.evidence.push(e);
    }
    Ok(v.settle(|e| -log_ratio(e)))
}

/// Index offset `2^(2r+1) - 2^(r+1)` of the growth lemma.
pub fn growth_offset(r: usize) -> usize {
    (1usize << (2 * r + 1)) - (1usize << (r + 1))
}

/// `M_{nu+s} >= 2 M_nu` with `s = growth_offset(r)`, exact integers.
pub fn check_growth(chain: &BAChain) -> Result<Verdict> {
    let s = growth_offset(chain.r());
    if chain.len() <= s {
        return Err(too_short(s + 1, chain));
    }
    let mut v = Verdict::new("growth");
    for nu in 1..=chain.len() - s {
        let far = &chain.get(nu + s).unwrap().norm;
        let twice = &chain.get(nu).unwrap().norm * 2u32;
        v.evidence.push(Evidence {
            nu,
            value: int_iv(far),
            bound: int_iv(&twice),
            holds: Some(*far >= twice),
        });
    }
    v.note = Some(format!("offset {s}"));
    Ok(v.settle(log_ratio))
}

fn window(chain: &BAChain, nu: usize) -> Result<Vec<Vec<BigInt>>> {
    let r = chain.r();
    if nu == 0 || nu + r > chain.len() {
        return Err(too_short(nu.max(1) + r, chain));
    }
    Ok((nu..=nu + r)
        .map(|i| chain.get(i).unwrap().m.coords().to_vec())
        .collect())
}

/// Determinant of the `(r+1) x (r+1)` matrix of records `nu..=nu+r`.
pub fn determinant(chain: &BAChain, nu: usize) -> Result<BigInt> {
    Ok(bareiss_determinant(&window(chain, nu)?))
}

/// For `r = 1`: every window has `|Delta_nu| = 1` and consecutive windows
/// alternate in sign. The overall sign depends on the first window.
pub fn check_unimodular(chain: &BAChain) -> Result<Verdict> {
    if chain.r() != 1 {
        return Err(Error::InvalidInput("unimodularity applies to r = 1".into()));
    }
    if chain.len() < 2 {
        return Err(too_short(2, chain));
    }
    let mut v = Verdict::new("unimodular");
    let mut prev: Option<BigInt> = None;
    for nu in 1..chain.len() {
        let d = determinant(chain, nu)?;
        let unit = d == BigInt::one() || d == -BigInt::one();
        let alternates = prev.as_ref().is_none_or(|p| *p == -&d);
        v.evidence.push(Evidence {
            nu,
            value: int_iv(&d),
            bound: int_iv(&prev.clone().map_or(d.clone(), |p| -p)),
            holds: Some(unit && alternates),
        });
        prev = Some(d);
    }
    let first = v.evidence.first().map(|e| e.value.lower().signum());
    v.note = Some(match first {
        Some(1) => "Delta_nu = (-1)^(nu-1)".into(),
        _ => "Delta_nu = (-1)^nu".into(),
    });
    Ok(v.settle(|_| 0.0))
}

/// Rank of the rows `m_nu`, `nu >= nu0`.
pub fn tail_rank(chain: &BAChain, nu0: usize) -> Result<usize> {
    if nu0 == 0 || nu0 > chain.len() {
        return Err(too_short(nu0.max(1), chain));
    }
    let rows: Vec<Vec<BigInt>> = chain.records()[nu0 - 1..]
        .iter()
        .map(|r| r.m.coords().to_vec())
        .collect();
    Ok(matrix_rank(&rows))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `zeta_nu * (r+1)! * M_{nu+r}^r >= 1` on one window; skipped when the
/// window is degenerate.
pub fn check_polytope_bound(chain: &BAChain, nu: usize) -> Result<Verdict> {
    let mut v = Verdict::new("polytope");
    polytope_window(chain, nu, &mut v)?;
    Ok(finish_polytope(v))
}

/// [`check_polytope_bound`] over every window in the chain.
pub fn check_polytope_all(chain: &BAChain) -> Result<Verdict> {
    let r = chain.r();
    if chain.len() < r + 1 {
        return Err(too_short(r + 1, chain));
    }
    let mut v = Verdict::new("polytope");
    for nu in 1..=chain.len() - r {
        polytope_window(chain, nu, &mut v)?;
    }
    Ok(finish_polytope(v))
}

fn polytope_window(chain: &BAChain, nu: usize, v: &mut Verdict) -> Result<()> {
    let r = chain.r();
    if determinant(chain, nu)?.is_zero() {
        v.skipped.push(nu);
        return Ok(());
    }
    let prec = *chain.form().precision();
    let scale = factorial(r + 1) * chain.get(nu + r).unwrap().norm.pow(r as u32);
    let one = DyadicInterval::from_int(1);
    let e = certify(nu, &prec, prec.start_bits, Rel::Ge, |bits| {
        Ok((chain.zeta_at(nu, bits)?.scale_int(&scale), one.clone()))
    })?;
    v.evidence.push(e);
    Ok(())
}

fn finish_polytope(v: Verdict) -> Verdict {
    let all_skipped = v.evidence.is_empty() && !v.skipped.is_empty();
    let mut v = v.settle(log_ratio);
    if all_skipped {
        v.status = Status::Skipped;
        v.note = Some("skipped: degenerate window".into());
    } else if !v.skipped.is_empty() {
        v.note = Some(format!("degenerate windows skipped: {:?}", v.skipped));
    }
    v
}

/// `zeta_nu <= psi(M_{nu+1})` wherever `psi` is defined at `M_{nu+1}`.
pub fn check_psi_singular(chain: &BAChain, psi: &PsiSpec) -> Result<Verdict> {
    if chain.len() < 2 {
        return Err(too_short(2, chain));
    }
    let prec = *chain.form().precision();
    let mut v = Verdict::new("psi_singular");
    for nu in 1..chain.len() {
        let y = &chain.get(nu + 1).unwrap().norm;
        if psi.eval(y, prec.start_bits)?.is_none() {
            v.skipped.push(nu);
            continue;
        }
        let start = prec.start_bits + y.bits() as u32 * (psi.r + psi.k + 1) as u32;
        let e = certify(nu, &prec, start, Rel::Le, |bits| {
            let bound = psi.eval(y, bits)?.ok_or(Error::DomainError(format!(
                "psi undefined at {y}"
            )))?;
            Ok((chain.zeta_at(nu, bits)?, bound))
        })?;
        v.evidence.push(e);
    }
    v.note = Some(psi.to_string());
    let mut v = v.settle(|e| -log_ratio(e));
    if v.evidence.is_empty() {
        v.status = Status::Skipped;
    }
    Ok(v)
}

/// `M_{nu+r}^r >= M_{nu+1}^(r+k)` under psi-singularity and full-rank
/// windows. Passes when a nonempty final run of windows satisfies it; the
/// start of that run is reported as the empirical `nu_0`.
pub fn check_corollary3_gap(chain: &BAChain, psi: &PsiSpec) -> Result<Verdict> {
    let r = chain.r();
    if chain.len() < r + 1 {
        return Err(Error::HypothesisUnmet(format!(
            "chain has {} records, windows need {}",
            chain.len(),
            r + 1
        )));
    }
    let singular = check_psi_singular(chain, psi)?;
    if singular.status != Status::Pass {
        return Err(Error::HypothesisUnmet(format!(
            "chain is not certified psi-singular for {psi} (status {:?}, index {:?})",
            singular.status, singular.witness
        )));
    }
    let last = chain.len() - r;
    for nu in 1..=last {
        if determinant(chain, nu)?.is_zero() {
            return Err(Error::HypothesisUnmet(format!(
                "window {nu} is degenerate"
            )));
        }
    }
    let mut v = Verdict::new("corollary3_gap");
    for nu in 1..=last {
        let far = chain.get(nu + r).unwrap().norm.pow(r as u32);
        let near = chain.get(nu + 1).unwrap().norm.pow((r + psi.k) as u32);
        v.evidence.push(Evidence {
            nu,
            value: int_iv(&far),
            bound: int_iv(&near),
            holds: Some(far >= near),
        });
    }
    let nu0 = v
        .evidence
        .iter()
        .rposition(|e| e.holds != Some(true))
        .map_or(1, |i| i + 2);
    let witness = nu0.checked_sub(1).filter(|&w| w >= 1);
    let mut v = v.settle(log_ratio);
    v.witness = witness;
    if nu0 <= last {
        v.status = Status::Pass;
        v.note = Some(format!("nu_0 = {nu0}"));
    } else {
        v.status = Status::Fail;
        v.note = Some("no final run of windows satisfies the gap".into());
    }
    Ok(v)
}
