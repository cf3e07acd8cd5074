//! Certified natural logarithm, exponential and rational powers over dyadic
//! intervals. Both functions are monotone, so interval enclosures come from
//! evaluating each endpoint with the appropriate outward rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use super::{Dyadic, DyadicInterval};
use crate::error::{Error, Result};

fn unit(bits: u32) -> Dyadic {
    Dyadic::new(BigInt::one(), -(bits as i64))
}

/// `atanh(z) = sum z^(2i+1)/(2i+1)` for an interval `z` with `|z| <= 1/3`.
fn atanh_small(z: &DyadicInterval, bits: u32) -> DyadicInterval {
    // (1/3)^j <= 2^(-1.5 j) and the geometric tail factor is at most 9/8
    let terms = (2 * bits as u64 + 2).div_ceil(3) as u32 + 1;
    let z2 = (z * z).round_outward(bits);
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut j = 1u32;
    while j < terms {
        power = (&power * &z2).round_outward(bits);
        j += 2;
        let term = power
            .checked_div(&DyadicInterval::from_int(j), bits)
            .expect("odd denominator is nonzero");
        sum = &sum + &term;
    }
    let tail = unit(bits);
    &sum + &DyadicInterval::new_unchecked(-&tail, tail)
}

fn ln2(bits: u32) -> DyadicInterval {
    let third = DyadicInterval::from_rational(&BigRational::new(1.into(), 3.into()), bits);
    atanh_small(&third, bits).scale_i64(2)
}

/// Enclosure of `ln x` for a positive dyadic point.
fn ln_point(x: &Dyadic, bits: u32) -> DyadicInterval {
    debug_assert!(x.signum() > 0);
    if *x == Dyadic::from_int(1) {
        return DyadicInterval::from_int(0);
    }
    let n = x.mantissa().bits() as i64;
    let k = x.exponent() + n;
    // y = mantissa / 2^n in [1/2, 1)
    let y = DyadicInterval::point(Dyadic::new(x.mantissa().clone(), -n));
    let guard = bits + 24 + 64 - k.unsigned_abs().leading_zeros();
    let one = DyadicInterval::from_int(1);
    let z = (&y - &one)
        .checked_div(&(&y + &one), guard)
        .expect("y + 1 > 0");
    let ln_y = atanh_small(&z, guard).scale_i64(2);
    let total = &ln2(guard).scale_i64(k) + &ln_y;
    total.round_outward(bits)
}

/// Enclosure of `exp x` for a dyadic point.
fn exp_point(x: &Dyadic, bits: u32) -> DyadicInterval {
    if x.is_zero() {
        return DyadicInterval::from_int(1);
    }
    // reduce to |t| <= 1/4
    let s = (x.magnitude_bits() + 2).max(0) as u32;
    let t = DyadicInterval::point(x.shl(-(s as i64)));
    let growth = if x.signum() > 0 {
        (x.to_f64() * 1.45).ceil().max(0.0) as u32
    } else {
        0
    };
    let work = bits + s + growth + 24;
    let terms = work / 2 + 2;
    let mut sum = DyadicInterval::from_int(1);
    let mut term = DyadicInterval::from_int(1);
    for i in 1..=terms {
        term = (&term * &t)
            .checked_div(&DyadicInterval::from_int(i), work)
            .expect("positive divisor");
        sum = &sum + &term;
    }
    // remainder <= 2 |t|^(terms+1)/(terms+1)! <= 2 * 4^-(terms+1)
    let tail = unit(2 * (terms + 1) - 1);
    let mut acc = &sum + &DyadicInterval::new_unchecked(-&tail, tail);
    for _ in 0..s {
        acc = (&acc * &acc).round_outward(work);
    }
    acc.round_outward(bits)
}

/// Natural logarithm of a positive interval.
pub fn ln(x: &DyadicInterval, bits: u32) -> Result<DyadicInterval> {
    if x.lower().signum() <= 0 {
        return Err(Error::DomainError(format!("logarithm of non-positive interval {x}")));
    }
    let lo = ln_point(x.lower(), bits);
    let hi = if x.is_point() {
        lo.clone()
    } else {
        ln_point(x.upper(), bits)
    };
    Ok(DyadicInterval::new_unchecked(lo.lower().clone(), hi.upper().clone()))
}

pub fn exp(x: &DyadicInterval, bits: u32) -> DyadicInterval {
    let lo = exp_point(x.lower(), bits);
    let hi = if x.is_point() {
        lo.clone()
    } else {
        exp_point(x.upper(), bits)
    };
    DyadicInterval::new_unchecked(lo.lower().clone(), hi.upper().clone())
}

/// `x^a` for a positive interval and a nonnegative rational exponent.
pub fn pow_rational(x: &DyadicInterval, a: &BigRational, bits: u32) -> Result<DyadicInterval> {
    if a.is_negative() {
        return Err(Error::InvalidInput("negative exponent".into()));
    }
    if a.is_integer() {
        let e = a
            .numer()
            .to_u32()
            .ok_or_else(|| Error::InvalidInput("exponent too large".into()))?;
        return Ok(x.pow(e));
    }
    let l = ln(x, bits + 16)?;
    let a_iv = DyadicInterval::from_rational(a, bits + 16);
    Ok(exp(&(&a_iv * &l), bits))
}
