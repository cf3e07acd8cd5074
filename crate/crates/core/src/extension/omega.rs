use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realnum::DyadicInterval;

/// `sum (m_1^2 + ... + m_k^2)^(-1/2)` over `0 < max |m_j| <= M`, split into
/// the terms with a perfect-square norm (summed exactly) and the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSum {
    #[serde(with = "crate::serde_str::rational")]
    pub exact: BigRational,
    pub irrational: DyadicInterval,
    #[serde(with = "crate::serde_str::count")]
    pub points: u128,
}

impl LatticeSum {
    pub fn enclosure(&self, bits: u32) -> DyadicInterval {
        &DyadicInterval::from_rational(&self.exact, bits) + &self.irrational
    }
}

/// Multiplicity of every squared norm over the nonzero points of `[-M, M]^k`.
fn norm_counts(m: u64, k: usize) -> BTreeMap<u128, u128> {
    let mut acc: BTreeMap<u128, u128> = BTreeMap::from([(0, 1)]);
    for _ in 0..k {
        let mut next = BTreeMap::new();
        for (&n, &c) in &acc {
            for j in 0..=m as u128 {
                let mult = if j == 0 { 1 } else { 2 };
                *next.entry(n + j * j).or_insert(0) += c * mult;
            }
        }
        acc = next;
    }
    acc.remove(&0);
    acc
}

/// Sum of `c_i / d_i` over the common denominator `lcm(d_i)`, reduced once.
fn rational_sum(terms: &[(BigInt, BigInt)]) -> BigRational {
    let mut l = BigInt::one();
    for (_, d) in terms {
        let g = (&l % d).gcd(d);
        l = &l / &g * d;
    }
    let p: BigInt = terms.iter().map(|(c, d)| c * (&l / d)).sum();
    BigRational::new(p, l)
}

pub fn lattice_sum(m: u64, k: usize, budget: u128, bits: u32) -> Result<LatticeSum> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidInput("lattice sum needs k >= 1 and M >= 1".into()));
    }
    let side = 2 * m as u128 + 1;
    let points = side
        .checked_pow(k as u32)
        .map(|p| p - 1)
        .unwrap_or(u128::MAX);
    if points > budget {
        return Err(Error::SearchTooLarge {
            volume: points,
            budget,
        });
    }
    let counts = norm_counts(m, k);
    let mut exact_terms = Vec::new();
    let mut irrational = DyadicInterval::from_int(0);
    let guard = bits + 2 * (128 - points.leading_zeros()) + 8;
    for (&n, &c) in &counts {
        let s = n.isqrt();
        if s * s == n {
            exact_terms.push((BigInt::from(c), BigInt::from(s)));
        } else {
            let root = DyadicInterval::from_int(n).nth_root(2, guard)?;
            let term = DyadicInterval::from_int(c)
                .checked_div(&root, guard)
                .expect("sqrt of a positive integer is positive");
            irrational = &irrational + &term;
        }
    }
    Ok(LatticeSum {
        exact: rational_sum(&exact_terms),
        irrational: irrational.round_outward(bits),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaBound {
    pub m_next: u64,
    pub lattice: LatticeSum,
    pub bound: DyadicInterval,
}

/// Enclosure of `2 (k+r+1) k^(k/2) zeta (2M+1)^(r+1) S_k(M)`, the explicit
/// union bound on the measure of the bad slabs at one index.
pub fn omega_bound(
    zeta: &DyadicInterval,
    m_next: u64,
    r: usize,
    k: usize,
    budget: u128,
    bits: u32,
) -> Result<OmegaBound> {
    if !zeta.is_positive() || m_next == 0 || r == 0 {
        return Err(Error::InvalidInput("omega bound needs positive inputs".into()));
    }
    let lattice = lattice_sum(m_next, k, budget, bits + 16)?;
    let guard = bits + 16;
    let kk = DyadicInterval::from_int(k as u64).pow(k as u32 / 2);
    let k_half = if k % 2 == 1 {
        &kk * &DyadicInterval::from_int(k as u64).nth_root(2, guard)?
    } else {
        kk
    };
    let front = BigInt::from(2 * (k + r + 1)) * BigInt::from(2 * m_next + 1).pow(r as u32 + 1);
    let bound = (&(&k_half * zeta).scale_int(&front) * &lattice.enclosure(guard)).round_outward(bits);
    Ok(OmegaBound {
        m_next,
        lattice,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::Dyadic;
    use num_traits::Zero;

    fn harmonic(m: u64) -> BigRational {
        let mut h = BigRational::zero();
        for j in 1..=m {
            h += BigRational::new(1.into(), j.into());
        }
        h
    }

    #[test]
    fn k1_is_twice_harmonic() {
        for m in [1u64, 2, 3, 10, 57, 200] {
            let s = lattice_sum(m, 1, u128::MAX, 64).unwrap();
            assert_eq!(s.exact, harmonic(m) * BigRational::from_integer(2.into()));
            assert_eq!(s.irrational, DyadicInterval::from_int(0));
        }
    }

    #[test]
    fn k2_small_box_by_hand() {
        // M = 1: four points at distance 1, four at sqrt 2
        let s = lattice_sum(1, 2, 100, 80).unwrap();
        assert_eq!(s.exact, BigRational::from_integer(4.into()));
        let (lo, hi) = s.irrational.to_f64_pair();
        let expect = 4.0 / 2f64.sqrt();
        assert!(lo - 1e-15 <= expect && expect <= hi + 1e-15 && hi - lo < 1e-15);
        assert_eq!(s.points, 8);
        assert!(matches!(lattice_sum(10, 2, 100, 64), Err(Error::SearchTooLarge { .. })));
    }

    #[test]
    fn displayed_example() {
        // 2 * 3 * 1 * (1/100) * 3^2 * 2 = 1.08
        let q = BigRational::new(1.into(), 100.into());
        let z = DyadicInterval::from_rational(&q, 80);
        let b = omega_bound(&z, 1, 1, 1, 1000, 64).unwrap();
        let target = BigRational::new(108.into(), 100.into());
        assert!(b.bound.contains_rational(&target));
        assert!(b.bound.width() < Dyadic::new(1.into(), -60));
    }

    #[test]
    fn bound_grows_with_m() {
        let z = DyadicInterval::point(Dyadic::new(1.into(), -20));
        let mut prev: Option<DyadicInterval> = None;
        for m in 1..8 {
            let b = omega_bound(&z, m, 2, 2, 10_000, 64).unwrap().bound;
            if let Some(p) = prev {
                assert!(p.certainly_lt(&b));
            }
            prev = Some(b);
        }
    }
}
