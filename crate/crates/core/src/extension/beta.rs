use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realnum::{Dyadic, DyadicInterval, Precision, RealExpr};

/// Non-square primes the seeded construction draws radicands from.
pub const BETA_PRIMES: [u64; 21] = [
    11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Largest numerator and denominator of the random multipliers `u_i`.
pub const BETA_MULTIPLIER_MAX: i64 = 999;

/// How one seeded coefficient was built: `frac(u * sqrt(p))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaRecipe {
    #[serde(with = "crate::serde_str::rational")]
    pub u: BigRational,
    pub p: u64,
    #[serde(with = "crate::serde_str::bigint")]
    pub floor: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Explicit,
    Seeded {
        seed: u64,
        stream: u64,
        recipe: Vec<BetaRecipe>,
    },
}

/// Extra coefficients `beta_1..beta_k`, each certified to lie in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaSample {
    betas: Vec<RealExpr>,
    provenance: Provenance,
}

fn certify_unit(b: &RealExpr, prec: &Precision) -> Result<()> {
    if b.as_rational().is_some() {
        return Err(Error::InvalidInput(format!("beta {b} is rational")));
    }
    for bits in prec.schedule(prec.start_bits) {
        let iv = b.eval_with(bits, prec)?;
        if iv.is_positive() && (&iv - &DyadicInterval::from_int(1)).is_negative() {
            return Ok(());
        }
        if iv.upper().signum() <= 0 || iv.lower() >= &Dyadic::from_int(1) {
            return Err(Error::InvalidInput(format!("beta {b} is not in (0, 1)")));
        }
    }
    Err(Error::PrecisionExhausted {
        cap: prec.cap_bits,
    })
}

impl BetaSample {
    pub fn explicit(betas: Vec<RealExpr>) -> Result<Self> {
        Self::explicit_with(betas, &Precision::default())
    }

    pub fn explicit_with(betas: Vec<RealExpr>, prec: &Precision) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidInput("need at least one beta".into()));
        }
        for b in &betas {
            certify_unit(b, prec)?;
        }
        Ok(Self {
            betas,
            provenance: Provenance::Explicit,
        })
    }

    /// Sample `stream` of the generator seeded by `seed`: `k` distinct primes
    /// and multipliers `u_i = a/b` with `1 <= a, b <= 999`.
    pub fn seeded(k: usize, seed: u64, stream: u64) -> Result<Self> {
        if k == 0 || k > BETA_PRIMES.len() {
            return Err(Error::InvalidInput(format!(
                "k must be between 1 and {}",
                BETA_PRIMES.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let primes: Vec<u64> = BETA_PRIMES.choose_multiple(&mut rng, k).copied().collect();
        let prec = Precision::default();
        let mut betas = Vec::with_capacity(k);
        let mut recipe = Vec::with_capacity(k);
        for p in primes {
            let a = rng.random_range(1..=BETA_MULTIPLIER_MAX);
            let b = rng.random_range(1..=BETA_MULTIPLIER_MAX);
            let u = BigRational::new(a.into(), b.into());
            let x = RealExpr::mul(RealExpr::rational(u.clone()), RealExpr::sqrt_int(p)?);
            let floor = x.floor(&prec)?;
            let beta = if floor.is_zero() {
                x
            } else {
                RealExpr::sub(x, RealExpr::int(floor.clone()))
            };
            certify_unit(&beta, &prec)?;
            betas.push(beta);
            recipe.push(BetaRecipe { u, p, floor });
        }
        Ok(Self {
            betas,
            provenance: Provenance::Seeded {
                seed,
                stream,
                recipe,
            },
        })
    }

    pub fn betas(&self) -> &[RealExpr] {
        &self.betas
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_is_reproducible_and_distinct() {
        let a = BetaSample::seeded(3, 7, 2).unwrap();
        let b = BetaSample::seeded(3, 7, 2).unwrap();
        assert_eq!(a, b);
        let c = BetaSample::seeded(3, 7, 3).unwrap();
        assert_ne!(a, c);
        let Provenance::Seeded { recipe, .. } = a.provenance() else {
            panic!("seeded provenance")
        };
        let mut ps: Vec<u64> = recipe.iter().map(|r| r.p).collect();
        ps.dedup();
        assert_eq!(ps.len(), 3);
        for beta in a.betas() {
            let (lo, hi) = beta.eval(40).unwrap().to_f64_pair();
            assert!(0.0 < lo && hi < 1.0);
        }
    }

    #[test]
    fn explicit_must_be_irrational_in_unit_interval() {
        let r3 = RealExpr::sqrt_int(3).unwrap();
        assert!(BetaSample::explicit(vec![RealExpr::sub(r3.clone(), RealExpr::int(1))]).is_ok());
        assert!(BetaSample::explicit(vec![r3]).is_err());
        assert!(BetaSample::explicit(vec![RealExpr::ratio(1, 2).unwrap()]).is_err());
        assert!(BetaSample::explicit(vec![]).is_err());
        assert!(BetaSample::seeded(0, 1, 0).is_err());
    }
}
