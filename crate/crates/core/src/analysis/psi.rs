//! Approximation functions `psi` and the convergence series of the main theorem.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::enumerator::BAChain;
use crate::error::{Error, Result};
use crate::realnum::elementary::{ln, pow_rational};
use crate::realnum::DyadicInterval;

/// Exponent of the logarithm in the series: 1 for `k = 1`, 0 for `k >= 2`.
pub fn delta_k(k: usize) -> u32 {
    u32::from(k == 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PsiFamily {
    /// `1 / (y^(r+k) (log y)^(delta_k + 1 + eps))`
    Corollary1,
    /// `1 / (y^(r+k) (log y)^delta_k (log log y)^(1 + eps))`
    Corollary3,
    /// `c * y^(-e)`
    Power {
        #[serde(with = "crate::serde_str::rational")]
        c: BigRational,
        #[serde(with = "crate::serde_str::rational")]
        e: BigRational,
    },
    Constant {
        #[serde(with = "crate::serde_str::rational")]
        c: BigRational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiSpec {
    #[serde(flatten)]
    pub family: PsiFamily,
    pub r: usize,
    pub k: usize,
    #[serde(with = "crate::serde_str::rational")]
    pub eps: BigRational,
}

impl PsiSpec {
    pub fn corollary1(r: usize, k: usize, eps: BigRational) -> Result<Self> {
        Self::build(PsiFamily::Corollary1, r, k, eps)
    }

    pub fn corollary3(r: usize, k: usize, eps: BigRational) -> Result<Self> {
        Self::build(PsiFamily::Corollary3, r, k, eps)
    }

    pub fn power(r: usize, c: BigRational, e: BigRational) -> Result<Self> {
        if !c.is_positive() || e.is_negative() {
            return Err(Error::InvalidInput("power psi needs c > 0 and e >= 0".into()));
        }
        Self::build(PsiFamily::Power { c, e }, r, 1, BigRational::one())
    }

    pub fn constant(r: usize, c: BigRational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::InvalidInput("constant psi needs c > 0".into()));
        }
        Self::build(PsiFamily::Constant { c }, r, 1, BigRational::one())
    }

    fn build(family: PsiFamily, r: usize, k: usize, eps: BigRational) -> Result<Self> {
        if r == 0 || k == 0 {
            return Err(Error::InvalidInput("psi needs r >= 1 and k >= 1".into()));
        }
        if !eps.is_positive() {
            return Err(Error::InvalidInput("psi needs eps > 0".into()));
        }
        Ok(Self { family, r, k, eps })
    }

    pub fn delta_k(&self) -> u32 {
        delta_k(self.k)
    }

    /// Smallest integer argument at which the family is positive and defined.
    pub fn y0(&self) -> u64 {
        match self.family {
            PsiFamily::Corollary1 => 2,
            PsiFamily::Corollary3 => 3,
            PsiFamily::Power { .. } | PsiFamily::Constant { .. } => 1,
        }
    }

    /// Enclosure of `psi(y)`, or `None` below `y0`.
    pub fn eval(&self, y: &BigInt, bits: u32) -> Result<Option<DyadicInterval>> {
        if *y < BigInt::from(self.y0()) {
            return Ok(None);
        }
        let guard = bits + 16 + y.bits() as u32 * (self.r + self.k) as u32;
        let yi = DyadicInterval::from_int(y.clone());
        let one = DyadicInterval::from_int(1);
        let one_eps = BigRational::one() + &self.eps;
        let denom = match &self.family {
            PsiFamily::Corollary1 => {
                let e = BigRational::from_integer(self.delta_k().into()) + one_eps;
                let log = ln(&yi, guard)?;
                &yi.pow((self.r + self.k) as u32) * &pow_rational(&log, &e, guard)?
            }
            PsiFamily::Corollary3 => {
                let log = ln(&yi, guard)?;
                let loglog = ln(&log, guard)?;
                &(&yi.pow((self.r + self.k) as u32) * &log.pow(self.delta_k()))
                    * &pow_rational(&loglog, &one_eps, guard)?
            }
            PsiFamily::Power { c, e } => {
                let c_iv = DyadicInterval::from_rational(c, guard);
                let p = pow_rational(&yi, e, guard)?;
                return Ok(c_iv.checked_div(&p, bits));
            }
            PsiFamily::Constant { c } => return Ok(Some(DyadicInterval::from_rational(c, bits))),
        };
        Ok(one.checked_div(&denom, bits))
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            PsiFamily::Corollary1 => {
                write!(f, "corollary1:r={},k={},eps={}", self.r, self.k, self.eps)
            }
            PsiFamily::Corollary3 => {
                write!(f, "corollary3:r={},k={},eps={}", self.r, self.k, self.eps)
            }
            PsiFamily::Power { c, e } => write!(f, "power:r={},c={c},e={e}", self.r),
            PsiFamily::Constant { c } => write!(f, "constant:r={},c={c}", self.r),
        }
    }
}

/// Parses `family:key=value,...`. A missing `r` is left as 0 for the caller
/// to fill in from the chain; see [`PsiSpec::with_default_r`].
impl FromStr for PsiSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidInput(format!("psi spec {s:?}: {msg}"));
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let mut r = 0usize;
        let mut k = None;
        let mut eps = None;
        let mut c = None;
        let mut e = None;
        for kv in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = kv
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {kv:?}")))?;
            let int = || val.parse::<usize>().map_err(|_| bad(format!("bad integer {val:?}")));
            let rat = || {
                val.parse::<BigRational>()
                    .map_err(|_| bad(format!("bad rational {val:?}")))
            };
            match key.trim() {
                "r" => r = int()?,
                "k" => k = Some(int()?),
                "eps" => eps = Some(rat()?),
                "c" => c = Some(rat()?),
                "e" => e = Some(rat()?),
                other => return Err(bad(format!("unknown parameter {other:?}"))),
            }
        }
        fn need<T>(v: Option<T>, what: &str, s: &str) -> Result<T> {
            v.ok_or_else(|| Error::InvalidInput(format!("psi spec {s:?}: missing {what}")))
        }
        let family = match name.trim() {
            "corollary1" => PsiFamily::Corollary1,
            "corollary3" => PsiFamily::Corollary3,
            "power" => PsiFamily::Power {
                c: c.clone().unwrap_or_else(BigRational::one),
                e: need(e.clone(), "e", s)?,
            },
            "constant" => PsiFamily::Constant {
                c: c.clone().unwrap_or_else(BigRational::one),
            },
            other => return Err(bad(format!("unknown family {other:?}"))),
        };
        let spec = match family {
            PsiFamily::Corollary1 | PsiFamily::Corollary3 => PsiSpec {
                family,
                r,
                k: need(k, "k", s)?,
                eps: need(eps, "eps", s)?,
            },
            PsiFamily::Power { c, e } => {
                if !c.is_positive() || e.is_negative() {
                    return Err(bad("power psi needs c > 0 and e >= 0".into()));
                }
                PsiSpec {
                    family: PsiFamily::Power { c, e },
                    r,
                    k: k.unwrap_or(1),
                    eps: BigRational::one(),
                }
            }
            PsiFamily::Constant { c } => {
                if !c.is_positive() {
                    return Err(bad("constant psi needs c > 0".into()));
                }
                PsiSpec {
                    family: PsiFamily::Constant { c },
                    r,
                    k: k.unwrap_or(1),
                    eps: BigRational::one(),
                }
            }
        };
        if spec.k == 0 {
            return Err(bad("k must be at least 1".into()));
        }
        if !spec.eps.is_positive() {
            return Err(bad("eps must be positive".into()));
        }
        Ok(spec)
    }
}

impl PsiSpec {
    pub fn with_default_r(mut self, r: usize) -> Self {
        if self.r == 0 {
            self.r = r;
        }
        self
    }
}

/// One partial sum `S_N = sum_{nu <= N} M_{nu+1}^(r+k) (log M_{nu+1})^delta_k zeta_nu`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSum {
    pub n: usize,
    pub term: DyadicInterval,
    pub sum: DyadicInterval,
}

/// Certified partial sums over every `nu` with a known successor, natural
/// logarithm. Each term is enclosed to roughly `2^-bits` relative to its size.
pub fn series_partial_sums(chain: &BAChain, k: usize, bits: u32) -> Result<Vec<PartialSum>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if chain.len() < 2 {
        return Err(Error::ChainTooShort {
            needed: 2,
            have: chain.len(),
        });
    }
    let r = chain.r();
    let delta = delta_k(k);
    let mut out = Vec::with_capacity(chain.len() - 1);
    let mut sum = DyadicInterval::from_int(0);
    for nu in 1..chain.len() {
        let m_next = &chain.get(nu + 1).expect("successor").norm;
        let scale = DyadicInterval::from_int(m_next.pow((r + k) as u32));
        let work = bits + 16 + m_next.bits() as u32 * (r + k + 1) as u32;
        let z = chain.zeta_at(nu, work)?;
        let mut term = &scale * &z;
        if delta == 1 {
            term = &term * &ln(&DyadicInterval::from_int(m_next.clone()), work)?;
        }
        term = term.round_outward(work);
        sum = &sum + &term;
        out.push(PartialSum {
            n: nu,
            term,
            sum: sum.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerator::{enumerate_chain, BestApprox};
    use crate::linform::{IntVector, LinearForm};
    use crate::realnum::{Dyadic, RealExpr};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn delta_rule() {
        assert_eq!(delta_k(1), 1);
        assert_eq!(delta_k(2), 0);
        assert_eq!(delta_k(5), 0);
        let p: PsiSpec = "corollary1:r=2,k=1,eps=1/10".parse().unwrap();
        assert_eq!(p.delta_k(), 1);
        assert_eq!(p.eps, q(1, 10));
    }

    #[test]
    fn parse_round_trips_through_display() {
        for s in [
            "corollary1:r=2,k=1,eps=1/10",
            "corollary3:r=2,k=2,eps=1",
            "power:r=1,c=1/2,e=1",
            "constant:r=3,c=1",
        ] {
            let p: PsiSpec = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("corollary1:k=1".parse::<PsiSpec>().is_err());
        assert!("bogus:k=1".parse::<PsiSpec>().is_err());
        assert!("corollary1:k=0,eps=1".parse::<PsiSpec>().is_err());
        let p: PsiSpec = "corollary3:k=2,eps=1/2".parse().unwrap();
        assert_eq!(p.with_default_r(2).r, 2);
    }

    #[test]
    fn corollary1_value() {
        // 1 / (10^3 * (ln 10)^(2 + 1/10))
        let p = PsiSpec::corollary1(2, 1, q(1, 10)).unwrap();
        let v = p.eval(&BigInt::from(10), 60).unwrap().unwrap();
        let expect = 1.0 / (1000.0 * 10f64.ln().powf(2.1));
        let (lo, hi) = v.to_f64_pair();
        assert!(lo <= expect * (1.0 + 1e-12) && expect * (1.0 - 1e-12) <= hi);
        assert!(p.eval(&BigInt::from(1), 60).unwrap().is_none());
    }

    #[test]
    fn corollary3_needs_loglog_positive() {
        let p = PsiSpec::corollary3(2, 2, q(1, 2)).unwrap();
        assert!(p.eval(&BigInt::from(2), 60).unwrap().is_none());
        let v = p.eval(&BigInt::from(100), 60).unwrap().unwrap();
        let y = 100f64;
        let expect = 1.0 / (y.powi(4) * y.ln().ln().powf(1.5));
        let (lo, hi) = v.to_f64_pair();
        assert!(lo <= expect * (1.0 + 1e-12) && expect * (1.0 - 1e-12) <= hi);
    }

    #[test]
    fn single_exact_term() {
        let form = LinearForm::new(vec![RealExpr::sqrt_int(2).unwrap()]).unwrap();
        let rec = |i, m: &[i64], z: Dyadic| BestApprox {
            index: i,
            m: IntVector::from_i64(m),
            norm: IntVector::from_i64(m).tail_norm(),
            zeta: DyadicInterval::point(z),
        };
        let chain = BAChain::from_parts(
            form,
            vec![
                rec(1, &[0, 1], Dyadic::new(1.into(), -3)),
                rec(2, &[0, 2], Dyadic::new(1.into(), -4)),
            ],
            2,
            64,
        );
        let s = series_partial_sums(&chain, 2, 64).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].sum, DyadicInterval::from_int(1));
    }

    #[test]
    fn sums_increase_on_sqrt2() {
        let form = LinearForm::new(vec![RealExpr::sqrt_int(2).unwrap()]).unwrap();
        let chain = enumerate_chain(&form, 1000).unwrap();
        for k in [1, 2] {
            let s = series_partial_sums(&chain, k, 100).unwrap();
            assert_eq!(s.len(), chain.len() - 1);
            for w in s.windows(2) {
                assert!(w[0].sum.certainly_lt(&w[1].sum));
            }
        }
        let short = chain.truncated(1);
        assert!(matches!(
            series_partial_sums(&short, 1, 64),
            Err(Error::ChainTooShort { .. })
        ));
    }
}
