use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::Dyadic;
use crate::error::{Error, Result};

/// A closed interval `[lower, upper]` with dyadic endpoints.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct DyadicInterval {
    lower: Dyadic,
    upper: Dyadic,
}

impl DyadicInterval {
    pub fn new(lower: Dyadic, upper: Dyadic) -> Result<Self> {
        if lower > upper {
            return Err(Error::InvalidInput(format!(
                "interval endpoints out of order: [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub(crate) fn new_unchecked(lower: Dyadic, upper: Dyadic) -> Self {
        debug_assert!(lower <= upper);
        Self { lower, upper }
    }

    pub fn point(x: Dyadic) -> Self {
        Self {
            lower: x.clone(),
            upper: x,
        }
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::point(Dyadic::from_int(n))
    }

    /// Tightest enclosure of `q` with endpoints on the `2^-bits` grid; exact
    /// when `q` is itself dyadic.
    pub fn from_rational(q: &BigRational, bits: u32) -> Self {
        Self {
            lower: Dyadic::rational_down(q, bits),
            upper: Dyadic::rational_up(q, bits),
        }
    }

    pub fn lower(&self) -> &Dyadic {
        &self.lower
    }

    pub fn upper(&self) -> &Dyadic {
        &self.upper
    }

    pub fn width(&self) -> Dyadic {
        &self.upper - &self.lower
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        &self.lower.to_rational() <= q && q <= &self.upper.to_rational()
    }

    pub fn contains_zero(&self) -> bool {
        self.lower.signum() <= 0 && self.upper.signum() >= 0
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lower <= self.lower && self.upper <= other.upper
    }

    pub fn is_positive(&self) -> bool {
        self.lower.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.upper.signum() < 0
    }

    /// `-1`/`+1` when the sign is certified, `0` otherwise.
    pub fn certified_sign(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }

    /// True when every point of `self` is strictly below every point of `other`.
    pub fn certainly_lt(&self, other: &Self) -> bool {
        self.upper < other.lower
    }

    /// Enclosure of `{|x| : x in self}`.
    pub fn abs(&self) -> Self {
        if self.lower.signum() >= 0 {
            self.clone()
        } else if self.upper.signum() <= 0 {
            -self
        } else {
            let hi = std::cmp::max(self.lower.abs(), self.upper.clone());
            Self::new_unchecked(Dyadic::zero(), hi)
        }
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lower + &self.upper).shl(-1)
    }

    /// Widens the endpoints outward onto the `2^-bits` grid.
    pub fn round_outward(&self, bits: u32) -> Self {
        Self::new_unchecked(self.lower.round_down(bits), self.upper.round_up(bits))
    }

    pub fn scale_int(&self, n: &BigInt) -> Self {
        let f = Dyadic::from_int(n.clone());
        if n.is_negative() {
            Self::new_unchecked(&self.upper * &f, &self.lower * &f)
        } else {
            Self::new_unchecked(&self.lower * &f, &self.upper * &f)
        }
    }

    pub fn scale_i64(&self, n: i64) -> Self {
        self.scale_int(&BigInt::from(n))
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self::new_unchecked(
            std::cmp::min(&self.lower, &other.lower).clone(),
            std::cmp::max(&self.upper, &other.upper).clone(),
        )
    }

    /// Quotient with outward rounding at `2^-bits`; `None` if the divisor
    /// interval contains zero.
    pub fn checked_div(&self, other: &Self, bits: u32) -> Option<Self> {
        if other.contains_zero() {
            return None;
        }
        let candidates_lo = [
            self.lower.div_down(&other.lower, bits),
            self.lower.div_down(&other.upper, bits),
            self.upper.div_down(&other.lower, bits),
            self.upper.div_down(&other.upper, bits),
        ];
        let candidates_hi = [
            self.lower.div_up(&other.lower, bits),
            self.lower.div_up(&other.upper, bits),
            self.upper.div_up(&other.lower, bits),
            self.upper.div_up(&other.upper, bits),
        ];
        let lo = candidates_lo.into_iter().min().expect("four candidates");
        let hi = candidates_hi.into_iter().max().expect("four candidates");
        Some(Self::new_unchecked(lo, hi))
    }

    pub fn recip(&self, bits: u32) -> Option<Self> {
        Self::from_int(1).checked_div(self, bits)
    }

    /// Integer power by repeated multiplication (exact).
    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::from_int(1);
        for _ in 0..exp {
            acc = &acc * self;
        }
        if exp % 2 == 0 && self.contains_zero() {
            // even powers are nonnegative
            acc = Self::new_unchecked(Dyadic::zero(), acc.upper);
        }
        acc
    }

    /// Enclosure of the `n`-th root of a nonnegative interval, endpoints on the
    /// `2^-bits` grid. Lower endpoints slightly below zero are clamped.
    pub fn nth_root(&self, n: u32, bits: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("root index {n} < 2")));
        }
        if self.is_negative() {
            return Err(Error::DomainError(format!(
                "root of negative interval [{}, {}]",
                self.lower, self.upper
            )));
        }
        let scale = n as i64 * bits as i64;
        let lo = if self.lower.signum() <= 0 {
            BigInt::zero()
        } else {
            self.lower.shl(scale).floor().nth_root(n)
        };
        let hi_arg = self.upper.shl(scale).ceil();
        let mut hi = hi_arg.nth_root(n);
        if hi.pow(n) < hi_arg {
            hi += BigInt::one();
        }
        Ok(Self::new_unchecked(
            Dyadic::new(lo, -(bits as i64)),
            Dyadic::new(hi, -(bits as i64)),
        ))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.lower.to_f64(), self.upper.to_f64())
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

impl Add for &DyadicInterval {
    type Output = DyadicInterval;
    fn add(self, rhs: &DyadicInterval) -> DyadicInterval {
        DyadicInterval::new_unchecked(&self.lower + &rhs.lower, &self.upper + &rhs.upper)
    }
}

impl Sub for &DyadicInterval {
    type Output = DyadicInterval;
    fn sub(self, rhs: &DyadicInterval) -> DyadicInterval {
        DyadicInterval::new_unchecked(&self.lower - &rhs.upper, &self.upper - &rhs.lower)
    }
}

impl Mul for &DyadicInterval {
    type Output = DyadicInterval;
    fn mul(self, rhs: &DyadicInterval) -> DyadicInterval {
        if self.lower.signum() >= 0 && rhs.lower.signum() >= 0 {
            return DyadicInterval::new_unchecked(
                &self.lower * &rhs.lower,
                &self.upper * &rhs.upper,
            );
        }
        let p = [
            &self.lower * &rhs.lower,
            &self.lower * &rhs.upper,
            &self.upper * &rhs.lower,
            &self.upper * &rhs.upper,
        ];
        let lo = p.iter().min().expect("nonempty").clone();
        let hi = p.iter().max().expect("nonempty").clone();
        DyadicInterval::new_unchecked(lo, hi)
    }
}

impl Neg for &DyadicInterval {
    type Output = DyadicInterval;
    fn neg(self) -> DyadicInterval {
        DyadicInterval::new_unchecked(-&self.upper, -&self.lower)
    }
}

impl Neg for DyadicInterval {
    type Output = DyadicInterval;
    fn neg(self) -> DyadicInterval {
        DyadicInterval::new_unchecked(-self.upper, -self.lower)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for DyadicInterval {
            type Output = DyadicInterval;
            fn $m(self, rhs: DyadicInterval) -> DyadicInterval {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
