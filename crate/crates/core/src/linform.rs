//! Linear forms `m_0 + m_1 a_1 + ... + m_r a_r`: evaluation, the optimal free
//! coefficient, and sign canonicalization.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realnum::{nearest_integer, Dyadic, DyadicInterval, Precision, RealExpr};

/// Integer point `(m_0, m_1, ..., m_r)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct IntVector(pub Vec<BigInt>);

impl IntVector {
    pub fn from_i64(coords: &[i64]) -> Self {
        IntVector(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Max-norm over coordinates `1..`, i.e. everything except `m_0`.
    pub fn tail_norm(&self) -> BigInt {
        self.0
            .iter()
            .skip(1)
            .map(|c| c.abs())
            .max()
            .unwrap_or_default()
    }

    /// Appends `k` zero coordinates.
    pub fn padded(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        v.extend(std::iter::repeat_n(BigInt::zero(), k));
        IntVector(v)
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|c| c.to_i64()).collect()
    }
}

impl Neg for &IntVector {
    type Output = IntVector;
    fn neg(self) -> IntVector {
        IntVector(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for IntVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let coords: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        coords.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let coords = Vec::<String>::deserialize(d)?;
        coords
            .iter()
            .map(|c| c.parse::<BigInt>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()
            .map(IntVector)
    }
}

/// The tuple `(a_1, ..., a_r)` defining the form.
#[derive(Clone)]
pub struct LinearForm {
    alphas: Arc<[RealExpr]>,
    precision: Precision,
    cache: Arc<RwLock<BTreeMap<u32, Arc<[DyadicInterval]>>>>,
    fixed: Arc<RwLock<BTreeMap<u32, Option<Arc<[(i128, i128)]>>>>>,
}

/// Largest `sum |m_j|` handled by the fixed-point residual path.
const FIXED_L1_LIMIT: u64 = 1 << 24;

impl fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearForm")
            .field("alphas", &self.alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>())
            .field("precision", &self.precision)
            .finish()
    }
}

impl PartialEq for LinearForm {
    fn eq(&self, other: &Self) -> bool {
        self.alphas == other.alphas && self.precision == other.precision
    }
}

impl LinearForm {
    /// Rejects an empty tuple and rational literal coefficients (which make
    /// `1, a_1, ..., a_r` dependent outright).
    pub fn new(alphas: Vec<RealExpr>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidInput("a linear form needs r >= 1 coefficients".into()));
        }
        if let Some(pos) = alphas.iter().position(|a| a.as_rational().is_some()) {
            let mut tail = vec![BigInt::zero(); alphas.len()];
            tail[pos] = BigInt::from(1);
            return Err(Error::DependenceSuspected { tail });
        }
        Ok(Self::new_unchecked(alphas))
    }

    /// Builds a form without the rational-literal screen; the enumerator
    /// still detects dependence operationally.
    pub fn new_unchecked(alphas: Vec<RealExpr>) -> Self {
        LinearForm {
            alphas: alphas.into(),
            precision: Precision::default(),
            cache: Default::default(),
            fixed: Default::default(),
        }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self.cache = Default::default();
        self.fixed = Default::default();
        self
    }

    pub fn r(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[RealExpr] {
        &self.alphas
    }

    pub fn precision(&self) -> &Precision {
        &self.precision
    }

    /// The `(r+k)`-form `(a_1, ..., a_r, b_1, ..., b_k)`.
    pub fn extended(&self, betas: &[RealExpr]) -> Self {
        let mut all = self.alphas.to_vec();
        all.extend_from_slice(betas);
        LinearForm::new_unchecked(all).with_precision(self.precision)
    }

    /// Enclosures of every coefficient, each of width at most `2^-bits`.
    pub fn alpha_enclosures(&self, bits: u32) -> Result<Arc<[DyadicInterval]>> {
        if let Some(hit) = self.cache.read().expect("cache lock").get(&bits) {
            return Ok(hit.clone());
        }
        let values: Arc<[DyadicInterval]> = self
            .alphas
            .iter()
            .map(|a| a.eval_with(bits, &self.precision))
            .collect::<Result<Vec<_>>>()?
            .into();
        self.cache
            .write()
            .expect("cache lock")
            .insert(bits, values.clone());
        Ok(values)
    }

    /// Coefficient enclosures as `i128` numerators over `2^bits`, when they
    /// leave enough headroom for tails with `sum |m_j| < 2^24`.
    fn fixed_alphas(&self, bits: u32) -> Result<Option<Arc<[(i128, i128)]>>> {
        if let Some(hit) = self.fixed.read().expect("cache lock").get(&bits) {
            return Ok(hit.clone());
        }
        let mut out = None;
        if bits <= 96 {
            let alphas = self.alpha_enclosures(bits)?;
            let scaled: Option<Vec<(i128, i128)>> = alphas
                .iter()
                .map(|a| {
                    let lo = a.lower().shl(bits as i64).floor().to_i128()?;
                    let hi = a.upper().shl(bits as i64).ceil().to_i128()?;
                    let room = 126 - 24 - 1;
                    let fits = |v: i128| 128 - v.unsigned_abs().leading_zeros() < room;
                    (fits(lo) && fits(hi)).then_some((lo, hi))
                })
                .collect();
            out = scaled.map(Into::into);
        }
        self.fixed
            .write()
            .expect("cache lock")
            .insert(bits, out.clone());
        Ok(out)
    }

    /// `m_1 a_1 + ... + m_r a_r` over small integer tails.
    pub(crate) fn tail_value(&self, tail: &[i64], bits: u32) -> Result<DyadicInterval> {
        debug_assert_eq!(tail.len(), self.r());
        let alphas = self.alpha_enclosures(bits)?;
        let mut acc = DyadicInterval::from_int(0);
        for (&t, a) in tail.iter().zip(alphas.iter()) {
            if t != 0 {
                acc = &acc + &a.scale_i64(t);
            }
        }
        Ok(acc)
    }
}

/// Enclosure of `zeta(m) = m_0 + m_1 a_1 + ... + m_r a_r`, width at most
/// `2^-precision * (1 + sum |m_j|)`.
pub fn zeta(m: &IntVector, form: &LinearForm, precision: u32) -> Result<DyadicInterval> {
    if m.len() != form.r() + 1 {
        return Err(Error::InvalidInput(format!(
            "vector has {} coordinates, form expects {}",
            m.len(),
            form.r() + 1
        )));
    }
    let alphas = form.alpha_enclosures(precision)?;
    let mut acc = DyadicInterval::from_int(m.0[0].clone());
    for (c, a) in m.0[1..].iter().zip(alphas.iter()) {
        if !c.is_zero() {
            acc = &acc + &a.scale_int(c);
        }
    }
    Ok(acc)
}

/// Optimal free coefficient for an integer tail together with the signed
/// residual `zeta((m_0, tail))`, at a recorded working precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub tail: Vec<i64>,
    pub m0: BigInt,
    pub value: DyadicInterval,
    pub bits: u32,
}

impl Residual {
    /// Starting precision for a tail: 64 bits plus the bit length of `sum |m_j|`.
    pub fn start_bits(form: &LinearForm, tail: &[i64]) -> u32 {
        let l1: u64 = tail.iter().map(|t| t.unsigned_abs()).sum();
        let len = 64 - l1.leading_zeros();
        (form.precision().start_bits + len).min(form.precision().cap_bits)
    }

    /// Residual at exactly `bits`, or `None` if rounding is ambiguous there.
    pub fn at(form: &LinearForm, tail: &[i64], bits: u32) -> Result<Option<Self>> {
        let l1: u64 = tail.iter().map(|t| t.unsigned_abs()).sum();
        if l1 < FIXED_L1_LIMIT {
            if let Some(fx) = form.fixed_alphas(bits)? {
                return Ok(Self::at_fixed(&fx, tail, bits));
            }
        }
        let v = form.tail_value(tail, bits)?;
        match nearest_integer(&v) {
            Ok((n, residual)) => Ok(Some(Residual {
                tail: tail.to_vec(),
                m0: -n,
                value: residual,
                bits,
            })),
            Err(Error::AmbiguousRounding | Error::WidthTooLarge) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn at_fixed(alphas: &[(i128, i128)], tail: &[i64], bits: u32) -> Option<Self> {
        let (mut lo, mut hi) = (0i128, 0i128);
        for (&t, &(a_lo, a_hi)) in tail.iter().zip(alphas) {
            let t = t as i128;
            if t > 0 {
                lo += t * a_lo;
                hi += t * a_hi;
            } else {
                lo += t * a_hi;
                hi += t * a_lo;
            }
        }
        let one = 1i128 << bits;
        let half = one >> 1;
        if hi - lo >= one >> 2 {
            return None;
        }
        let n = (lo + half).div_euclid(one);
        // no half-integer may lie in [lo, hi]
        if (hi + half).div_euclid(one) != n
            || (lo + half).rem_euclid(one) == 0
            || (hi + half).rem_euclid(one) == 0
        {
            return None;
        }
        let e = -(bits as i64);
        let value = DyadicInterval::new_unchecked(
            Dyadic::new(BigInt::from(lo - n * one), e),
            Dyadic::new(BigInt::from(hi - n * one), e),
        );
        Some(Residual {
            tail: tail.to_vec(),
            m0: BigInt::from(-n),
            value,
            bits,
        })
    }

    /// Refines from the default schedule until rounding is unambiguous.
    pub fn compute(form: &LinearForm, tail: &[i64]) -> Result<Self> {
        let start = Self::start_bits(form, tail);
        Self::compute_from(form, tail, start)
    }

    fn compute_from(form: &LinearForm, tail: &[i64], start: u32) -> Result<Self> {
        for bits in form.precision().schedule(start) {
            if let Some(r) = Self::at(form, tail, bits)? {
                return Ok(r);
            }
        }
        Err(Error::dependence(tail))
    }

    /// Same residual at the next precision step; fails with
    /// `DependenceSuspected` once the cap is reached.
    pub fn refine(&self, form: &LinearForm) -> Result<Self> {
        match form.precision().refine(self.bits) {
            Some(bits) => Self::compute_from(form, &self.tail, bits),
            None => Err(Error::dependence(&self.tail)),
        }
    }

    pub fn magnitude(&self) -> DyadicInterval {
        self.value.abs()
    }

    pub fn vector(&self) -> IntVector {
        let mut v = Vec::with_capacity(self.tail.len() + 1);
        v.push(self.m0.clone());
        v.extend(self.tail.iter().map(|&t| BigInt::from(t)));
        IntVector(v)
    }

    /// Refines until the residual sign is certified.
    pub fn sign_certified(mut self, form: &LinearForm) -> Result<Self> {
        while self.value.certified_sign() == 0 {
            self = self.refine(form)?;
        }
        Ok(self)
    }
}

/// Nearest-integer free coefficient for a nonzero tail.
pub fn best_m0(tail: &[BigInt], form: &LinearForm) -> Result<(BigInt, DyadicInterval)> {
    if tail.len() != form.r() {
        return Err(Error::InvalidInput(format!(
            "tail has {} coordinates, form expects {}",
            tail.len(),
            form.r()
        )));
    }
    if tail.iter().all(|c| c.is_zero()) {
        return Err(Error::InvalidInput("tail must not be all zero".into()));
    }
    let small: Vec<i64> = tail
        .iter()
        .map(|c| c.to_i64())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidInput("tail coordinates exceed 64 bits".into()))?;
    let r = Residual::compute(form, &small)?;
    Ok((r.m0, r.value))
}

/// Returns `m` or `-m`, whichever has certified positive `zeta`.
pub fn canonicalize_sign(m: &IntVector, form: &LinearForm) -> Result<IntVector> {
    let prec = *form.precision();
    let l1: BigInt = m.0.iter().map(|c| c.abs()).sum();
    let start = prec.start_bits + l1.bits() as u32;
    for bits in prec.schedule(start) {
        let z = zeta(m, form, bits)?;
        match z.certified_sign() {
            1 => return Ok(m.clone()),
            -1 => return Ok(-m),
            _ => {}
        }
    }
    Err(Error::DependenceSuspected {
        tail: m.0[1..].to_vec(),
    })
}
