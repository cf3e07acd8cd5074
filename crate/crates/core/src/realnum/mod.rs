//! Exact real constants and certified dyadic interval arithmetic.

mod dyadic;
pub mod elementary;
mod expr;
mod interval;

pub use dyadic::{Dyadic, ParseDyadicError};
pub use expr::{compare, nearest_integer, Comparison, Node, RealExpr};
pub use interval::DyadicInterval;

use serde::{Deserialize, Serialize};

pub const DEFAULT_START_BITS: u32 = 64;
pub const DEFAULT_PRECISION_CAP: u32 = 1 << 16;

/// Working-precision schedule: start at `start_bits`, double on refinement,
/// give up past `cap_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    pub start_bits: u32,
    pub cap_bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            start_bits: DEFAULT_START_BITS,
            cap_bits: DEFAULT_PRECISION_CAP,
        }
    }
}

impl Precision {
    pub fn with_cap(cap_bits: u32) -> Self {
        Self {
            start_bits: DEFAULT_START_BITS.min(cap_bits),
            cap_bits,
        }
    }

    /// Doubling sequence from `start` (clamped to the cap), always ending on
    /// the cap itself.
    pub fn schedule(&self, start: u32) -> impl Iterator<Item = u32> {
        let cap = self.cap_bits.max(1);
        let mut next = Some(start.clamp(1, cap));
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur >= cap {
                None
            } else {
                Some(cur.saturating_mul(2).min(cap))
            };
            Some(cur)
        })
    }

    /// Next step after `bits`, or `None` once the cap is reached.
    pub fn refine(&self, bits: u32) -> Option<u32> {
        if bits >= self.cap_bits {
            None
        } else {
            Some(bits.saturating_mul(2).min(self.cap_bits))
        }
    }
}
