use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An exact dyadic rational `mantissa * 2^exponent`.
///
/// Values are kept canonical: the mantissa is odd, or the value is zero with
/// exponent zero. Structural equality is therefore numeric equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            return Self { mantissa, exponent };
        }
        Self {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Self {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::new(n.into(), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `2^shift`.
    pub fn shl(&self, shift: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + shift,
        }
    }

    /// Number of bits needed for the integer part of `|self|`, or a negative
    /// estimate for values below one. Used for precision bookkeeping only.
    pub fn magnitude_bits(&self) -> i64 {
        if self.is_zero() {
            return i64::MIN / 4;
        }
        self.mantissa.bits() as i64 + self.exponent
    }

    pub fn floor(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << self.exponent as usize
        } else {
            // arithmetic shift rounds toward negative infinity
            &self.mantissa >> (-self.exponent) as usize
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    pub fn is_integer(&self) -> bool {
        self.exponent >= 0
    }

    /// Largest multiple of `2^-bits` that is `<= self`.
    pub fn round_down(&self, bits: u32) -> Self {
        let target = -(bits as i64);
        if self.exponent >= target {
            return self.clone();
        }
        let shift = (target - self.exponent) as usize;
        Self::new(&self.mantissa >> shift, target)
    }

    /// Smallest multiple of `2^-bits` that is `>= self`.
    pub fn round_up(&self, bits: u32) -> Self {
        -(-self).round_down(bits)
    }

    /// `self / other` rounded toward negative infinity at `2^-bits`.
    pub fn div_down(&self, other: &Dyadic, bits: u32) -> Self {
        assert!(!other.is_zero(), "division by zero dyadic");
        // self/other = (a/b) * 2^(ea - eb); scale numerator to get `bits` fraction bits
        let (a, b) = (&self.mantissa, &other.mantissa);
        let shift = self.exponent - other.exponent + bits as i64;
        let (num, den) = if shift >= 0 {
            (a << shift as usize, b.clone())
        } else {
            (a.clone(), b << (-shift) as usize)
        };
        Self::new(num.div_floor(&den), -(bits as i64))
    }

    pub fn div_up(&self, other: &Dyadic, bits: u32) -> Self {
        -(-self).div_down(other, bits)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << (-self.exponent) as usize,
            )
        }
    }

    /// Exact conversion when the rational has a power-of-two denominator.
    pub fn from_rational_exact(q: &BigRational) -> Option<Self> {
        let den = q.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz as usize).is_one() {
            Some(Self::new(q.numer().clone(), -(tz as i64)))
        } else {
            None
        }
    }

    pub fn rational_down(q: &BigRational, bits: u32) -> Self {
        if let Some(d) = Self::from_rational_exact(q) {
            return d;
        }
        let num: BigInt = q.numer() << bits as usize;
        Self::new(num.div_floor(q.denom()), -(bits as i64))
    }

    pub fn rational_up(q: &BigRational, bits: u32) -> Self {
        -Self::rational_down(&-q, bits)
    }

    /// Lossy conversion for display and diagnostics.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        let keep = 60i64;
        let (m, e) = if bits > keep {
            (&self.mantissa >> (bits - keep) as usize, self.exponent + bits - keep)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let mf: f64 = num_traits::ToPrimitive::to_f64(&m).unwrap_or(f64::NAN);
        mf * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &rhs.mantissa << (rhs.exponent - e) as usize;
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Hexadecimal mantissa with a binary exponent, e.g. `-0x1b5p-8`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        let e = self.exponent;
        let esign = if e < 0 { '-' } else { '+' };
        write!(
            f,
            "{sign}0x{}p{esign}{}",
            self.mantissa.magnitude().to_str_radix(16),
            e.unsigned_abs()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed dyadic literal `{0}`")]
pub struct ParseDyadicError(pub String);

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDyadicError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let body = body.strip_prefix("0x").ok_or_else(err)?;
        let (mant, exp) = body.split_once('p').ok_or_else(err)?;
        if mant.is_empty() || !mant.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err());
        }
        let mut m = BigInt::parse_bytes(mant.as_bytes(), 16).ok_or_else(err)?;
        if neg {
            m = -m;
        }
        if !exp.starts_with(['+', '-']) {
            return Err(err());
        }
        let e: i64 = exp.parse().map_err(|_| err())?;
        let d = Dyadic::new(m, e);
        // only canonical spellings are accepted so that parse/print is a bijection
        if d.to_string() != s {
            return Err(err());
        }
        Ok(d)
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
