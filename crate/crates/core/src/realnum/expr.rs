use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Dyadic, DyadicInterval, Precision};
use crate::error::{Error, Result};

/// Closed-form real constant built from rationals, `n`-th roots and the four
/// field operations.
///
/// Binary nodes whose operands are both rational literals are folded at
/// construction, so every expression has a single normal form and its text
/// rendering parses back to the same tree.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RealExpr(Arc<Node>);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Rational(BigRational),
    Root { radicand: RealExpr, index: u32 },
    Add(RealExpr, RealExpr),
    Sub(RealExpr, RealExpr),
    Mul(RealExpr, RealExpr),
    Div(RealExpr, RealExpr),
}

enum Step {
    Done(DyadicInterval),
    Refine,
}

impl RealExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn rational(q: BigRational) -> Self {
        // BigRational is always reduced with a positive denominator
        RealExpr(Arc::new(Node::Rational(q)))
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::DomainError("zero denominator".into()));
        }
        Ok(Self::rational(BigRational::new(num.into(), den)))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Rational(q) => Some(q),
            _ => None,
        }
    }

    /// `n`-th root, `n >= 2`. The radicand must be certifiably nonnegative.
    pub fn root(radicand: RealExpr, index: u32) -> Result<Self> {
        if index < 2 {
            return Err(Error::InvalidInput(format!("root index {index} must be >= 2")));
        }
        let prec = Precision::default();
        let mut certified = false;
        for bits in prec.schedule(prec.start_bits) {
            match radicand.enclose_at(bits)? {
                Step::Refine => continue,
                Step::Done(iv) => {
                    if iv.lower().signum() >= 0 {
                        certified = true;
                        break;
                    }
                    if iv.is_negative() {
                        return Err(Error::DomainError(format!(
                            "radicand {radicand} is negative"
                        )));
                    }
                }
            }
        }
        if !certified {
            return Err(Error::PrecisionExhausted { cap: prec.cap_bits });
        }
        Ok(RealExpr(Arc::new(Node::Root { radicand, index })))
    }

    /// `root(n, index)` for an integer radicand.
    pub fn int_root(n: impl Into<BigInt>, index: u32) -> Result<Self> {
        Self::root(Self::int(n), index)
    }

    pub fn sqrt_int(n: impl Into<BigInt>) -> Result<Self> {
        Self::int_root(n, 2)
    }

    pub fn add(a: RealExpr, b: RealExpr) -> Self {
        if let (Some(x), Some(y)) = (a.as_rational(), b.as_rational()) {
            return Self::rational(x + y);
        }
        RealExpr(Arc::new(Node::Add(a, b)))
    }

    pub fn sub(a: RealExpr, b: RealExpr) -> Self {
        if let (Some(x), Some(y)) = (a.as_rational(), b.as_rational()) {
            return Self::rational(x - y);
        }
        RealExpr(Arc::new(Node::Sub(a, b)))
    }

    pub fn mul(a: RealExpr, b: RealExpr) -> Self {
        if let (Some(x), Some(y)) = (a.as_rational(), b.as_rational()) {
            return Self::rational(x * y);
        }
        RealExpr(Arc::new(Node::Mul(a, b)))
    }

    /// Quotient; the denominator must be certifiably nonzero.
    pub fn div(a: RealExpr, b: RealExpr) -> Result<Self> {
        if let Some(y) = b.as_rational() {
            if y.is_zero() {
                return Err(Error::DomainError("division by zero".into()));
            }
            if let Some(x) = a.as_rational() {
                return Ok(Self::rational(x / y));
            }
        } else {
            let prec = Precision::default();
            let mut certified = false;
            for bits in prec.schedule(prec.start_bits) {
                if let Step::Done(iv) = b.enclose_at(bits)? {
                    if !iv.contains_zero() {
                        certified = true;
                        break;
                    }
                }
            }
            if !certified {
                return Err(Error::DomainError(format!(
                    "denominator {b} cannot be certified nonzero"
                )));
            }
        }
        Ok(RealExpr(Arc::new(Node::Div(a, b))))
    }

    pub fn neg(a: RealExpr) -> Self {
        Self::sub(Self::int(0), a)
    }

    /// An interval containing the exact value, width at most `2^-precision`.
    pub fn eval(&self, precision: u32) -> Result<DyadicInterval> {
        self.eval_with(precision, &Precision::default())
    }

    pub fn eval_with(&self, precision: u32, prec: &Precision) -> Result<DyadicInterval> {
        if precision > prec.cap_bits {
            return Err(Error::PrecisionExhausted { cap: prec.cap_bits });
        }
        let target = Dyadic::new(BigInt::one(), -(precision as i64));
        // the cap bounds the requested width; guard bits may exceed it
        let internal = Precision {
            start_bits: prec.start_bits,
            cap_bits: prec.cap_bits.saturating_add(EVAL_GUARD_BITS),
        };
        let start = prec.start_bits.max(precision.saturating_add(16));
        for bits in internal.schedule(start) {
            if let Step::Done(iv) = self.enclose_at(bits)? {
                if iv.width() <= target {
                    return Ok(iv);
                }
            }
        }
        Err(Error::PrecisionExhausted { cap: prec.cap_bits })
    }

    /// Enclosure computed with every intermediate rounded outward to the
    /// `2^-bits` grid. No width guarantee; `None` when a quotient's
    /// denominator has not yet separated from zero at this precision.
    pub fn enclose(&self, bits: u32) -> Result<Option<DyadicInterval>> {
        Ok(match self.enclose_at(bits)? {
            Step::Done(iv) => Some(iv),
            Step::Refine => None,
        })
    }

    fn enclose_at(&self, bits: u32) -> Result<Step> {
        let iv = match self.node() {
            Node::Rational(q) => DyadicInterval::from_rational(q, bits),
            Node::Root { radicand, index } => match radicand.enclose_at(bits)? {
                Step::Refine => return Ok(Step::Refine),
                Step::Done(x) => x.nth_root(*index, bits)?,
            },
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                let (x, y) = match (a.enclose_at(bits)?, b.enclose_at(bits)?) {
                    (Step::Done(x), Step::Done(y)) => (x, y),
                    _ => return Ok(Step::Refine),
                };
                match self.node() {
                    Node::Add(..) => (&x + &y).round_outward(bits),
                    Node::Sub(..) => (&x - &y).round_outward(bits),
                    Node::Mul(..) => (&x * &y).round_outward(bits),
                    _ => match x.checked_div(&y, bits) {
                        Some(q) => q,
                        None => return Ok(Step::Refine),
                    },
                }
            }
        };
        Ok(Step::Done(iv))
    }

    /// Exact floor, refining until the enclosure sits inside one unit cell.
    pub fn floor(&self, prec: &Precision) -> Result<BigInt> {
        for bits in prec.schedule(prec.start_bits) {
            if let Step::Done(iv) = self.enclose_at(bits)? {
                let lo = iv.lower().floor();
                if iv.upper().floor() == lo {
                    return Ok(lo);
                }
            }
        }
        Err(Error::PrecisionExhausted { cap: prec.cap_bits })
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Rational(_) | Node::Root { .. } => 3,
        }
    }
}

/// Extra working bits `eval_with` may use beyond the cap.
pub const EVAL_GUARD_BITS: u32 = 64;

/// Outcome of a certified comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    /// Enclosures still overlapped at the given precision.
    Undecided { bits: u32 },
}

/// Compares two constants, refining up to `max_precision` bits.
pub fn compare(a: &RealExpr, b: &RealExpr, max_precision: u32) -> Result<Comparison> {
    let prec = Precision {
        start_bits: Precision::default().start_bits.min(max_precision),
        cap_bits: max_precision,
    };
    let mut last = prec.start_bits;
    for bits in prec.schedule(prec.start_bits) {
        last = bits;
        let (x, y) = match (a.enclose_at(bits)?, b.enclose_at(bits)?) {
            (Step::Done(x), Step::Done(y)) => (x, y),
            _ => continue,
        };
        if x.certainly_lt(&y) {
            return Ok(Comparison::Less);
        }
        if y.certainly_lt(&x) {
            return Ok(Comparison::Greater);
        }
    }
    Ok(Comparison::Undecided { bits: last })
}

/// Rounds an enclosure to the nearest integer, returning the integer and an
/// enclosure of the signed residual `x - n`.
pub fn nearest_integer(x: &DyadicInterval) -> Result<(BigInt, DyadicInterval)> {
    let quarter = Dyadic::new(BigInt::one(), -2);
    if x.width() >= quarter {
        return Err(Error::WidthTooLarge);
    }
    let half = Dyadic::new(BigInt::one(), -1);
    let lo = x.lower() + &half;
    let hi = x.upper() + &half;
    let n = lo.floor();
    // a half-integer anywhere in [lo, hi] (endpoints included) is ambiguous
    if hi.floor() != n || lo.is_integer() || hi.is_integer() {
        return Err(Error::AmbiguousRounding);
    }
    let residual = x - &DyadicInterval::from_int(n.clone());
    Ok((n, residual))
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &RealExpr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self.node() {
            Node::Rational(q) => {
                if q.is_integer() && !q.is_negative() {
                    write!(f, "{}", q.numer())
                } else if q.is_integer() {
                    write!(f, "({})", q.numer())
                } else {
                    write!(f, "({}/{})", q.numer(), q.denom())
                }
            }
            Node::Root { radicand, index } => write!(f, "root({radicand}, {index})"),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                let p = self.precedence();
                let op = match self.node() {
                    Node::Add(..) => "+",
                    Node::Sub(..) => "-",
                    Node::Mul(..) => "*",
                    _ => "/",
                };
                child(f, a, p)?;
                write!(f, " {op} ")?;
                child(f, b, p + 1)
            }
        }
    }
}
