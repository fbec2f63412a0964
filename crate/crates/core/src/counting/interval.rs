//! Fixed-point real intervals with outward rounding.
//!
//! A value `x` is held as integers `lo <= x * 2^PREC <= hi`. Every operation
//! rounds `lo` down and `hi` up, so a true inequality checked as
//! `lower(lhs) <= upper(rhs)` can never come out false.

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub(crate) const PREC: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Interval {
    pub lo: BigUint,
    pub hi: BigUint,
}

fn unit() -> BigUint {
    BigUint::one() << PREC
}

fn div_ceil(a: &BigUint, b: &BigUint) -> BigUint {
    let (q, r) = (a / b, a % b);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

fn shr_ceil(a: &BigUint, bits: u64) -> BigUint {
    let q = a >> bits;
    if &q << bits == *a {
        q
    } else {
        q + 1u32
    }
}

impl Interval {
    #[cfg(test)]
    pub fn int(v: u64) -> Interval {
        let x = BigUint::from(v) << PREC;
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    /// `sqrt(n)`.
    pub fn sqrt(n: u64) -> Interval {
        let scaled = BigUint::from(n) << (2 * PREC);
        let lo = scaled.sqrt();
        let hi = if &lo * &lo == scaled {
            lo.clone()
        } else {
            &lo + 1u32
        };
        Interval { lo, hi }
    }

    /// `1 / self`; `self` must be bounded away from zero.
    pub fn recip(&self) -> Interval {
        let num = BigUint::one() << (2 * PREC);
        Interval {
            lo: &num / &self.hi,
            hi: div_ceil(&num, &self.lo),
        }
    }

    pub fn mul_int(&self, k: u64) -> Interval {
        Interval {
            lo: &self.lo * k,
            hi: &self.hi * k,
        }
    }

    /// `self - k`; the result must stay nonnegative.
    pub fn sub_int(&self, k: u64) -> Interval {
        let k = BigUint::from(k) << PREC;
        Interval {
            lo: &self.lo - &k,
            hi: &self.hi - &k,
        }
    }

    /// `e^self` for nonnegative `self`.
    pub fn exp(&self) -> Interval {
        Interval {
            lo: exp_bound(&self.lo, false),
            hi: exp_bound(&self.hi, true),
        }
    }

    /// Integer bounds `floor(big * lower)` and `ceil(big * upper)`.
    pub fn scale(&self, big: &BigUint) -> (BigUint, BigUint) {
        ((big * &self.lo) >> PREC, shr_ceil(&(big * &self.hi), PREC))
    }
}

/// Lower (`up = false`) or upper bound of `e^(x / 2^PREC) * 2^PREC`.
fn exp_bound(x: &BigUint, up: bool) -> BigUint {
    let one = unit();
    // halve the argument until it is at most 1, then square back
    let mut halvings = 0u64;
    while (x >> halvings) > one {
        halvings += 1;
    }
    let y = if up {
        shr_ceil(x, halvings)
    } else {
        x >> halvings
    };

    let mut sum = BigUint::zero();
    let mut term = one.clone();
    let mut i = 0u64;
    while term > BigUint::one() {
        sum += &term;
        i += 1;
        let next = &term * &y;
        term = if up {
            div_ceil(&shr_ceil(&next, PREC), &BigUint::from(i))
        } else {
            (next >> PREC) / i
        };
    }
    if up {
        // tail of the series with y <= 1 is at most twice its first term
        sum += 2u32 * term + 1u32;
    }

    for _ in 0..halvings {
        let sq = &sum * &sum;
        sum = if up { shr_ceil(&sq, PREC) } else { sq >> PREC };
    }
    sum
}
