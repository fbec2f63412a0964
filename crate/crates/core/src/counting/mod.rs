//! Exact counts of partial injections and the estimates derived from them.
//!
//! `I_n`, the number of partial injections of an `n`-set, obeys
//! `I_n = 2n I_{n-1} - (n-1)^2 I_{n-2}` with `I_0 = 1`, `I_1 = 2`.
//! `I_n` has about `n log2 n` bits, so a table up to `10^5` would not fit in
//! memory if every entry were kept. [`InjectionTable`] keeps entries below
//! [`DENSE_LEN`] and, above that, a pair of consecutive values every
//! [`STRIDE`] indices from which any entry is recomputed on demand. For every
//! index it also keeps a [`Head`]: the top two 64-bit limbs, which is all the
//! component sampler reads on its fast path.

mod cache;
mod interval;

use std::borrow::Cow;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{usage, Result};
use interval::Interval;

pub use cache::{read_cache, write_cache, CACHE_VERSION};

/// Entries `I_k` with `k < DENSE_LEN` are stored outright.
pub const DENSE_LEN: usize = 2048;
/// Spacing of the stored recurrence seeds above [`DENSE_LEN`].
pub const STRIDE: usize = 512;

/// Leading limbs of a table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Head {
    /// Number of 64-bit limbs.
    pub limbs: u32,
    /// `limb[limbs-1] << 64 | limb[limbs-2]`, missing limbs read as zero.
    pub top: u128,
    pub power_of_two: bool,
}

impl Head {
    pub fn of(value: &BigUint) -> Head {
        let mut digits = value.iter_u64_digits();
        let limbs = digits.len() as u32;
        let hi = digits.next_back().unwrap_or(0);
        let lo = digits.next_back().unwrap_or(0);
        let power_of_two = !value.is_zero() && value.trailing_zeros() == Some(value.bits() - 1);
        Head {
            limbs,
            top: (u128::from(hi) << 64) | u128::from(lo),
            power_of_two,
        }
    }

    pub fn bits(&self) -> u64 {
        if self.limbs == 0 {
            return 0;
        }
        let hi = (self.top >> 64) as u64;
        64 * (u64::from(self.limbs) - 1) + u64::from(64 - hi.leading_zeros())
    }

    /// Limb `i` if it is one of the two stored ones.
    pub fn limb(&self, i: u64) -> Option<u64> {
        let top = u64::from(self.limbs).checked_sub(1)?;
        if i == top {
            Some((self.top >> 64) as u64)
        } else if i + 1 == top {
            Some(self.top as u64)
        } else {
            None
        }
    }
}

/// `I_k` from `I_{k-2}` and `I_{k-1}`, for `k >= 2`.
fn step(k: u64, older: &BigUint, newer: &BigUint) -> BigUint {
    let mut next = newer * (2 * k);
    next -= older * ((k - 1) * (k - 1));
    next
}

/// Runs the recurrence from the pair `(I_{start-2}, I_{start-1})` and calls
/// `visit(k, I_k)` for `k` in `start..=end`.
fn walk(
    start: usize,
    end: usize,
    mut older: BigUint,
    mut newer: BigUint,
    mut visit: impl FnMut(usize, &BigUint),
) {
    for k in start..=end {
        // in place: older <- (k-1)^2 older, then the new value replaces it
        let k64 = k as u64;
        older *= (k64 - 1) * (k64 - 1);
        let mut next = &newer * (2 * k64);
        next -= &older;
        visit(k, &next);
        older = std::mem::replace(&mut newer, next);
    }
}

/// Exact values `I_0..=I_{n_max}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectionTable {
    n_max: usize,
    dense: Vec<BigUint>,
    /// `seeds[b] = (I_{c-2}, I_{c-1})` with `c = DENSE_LEN + b * STRIDE`.
    seeds: Vec<(BigUint, BigUint)>,
    heads: Vec<Head>,
}

impl InjectionTable {
    /// Builds the table with `O(n_max)` big-integer operations.
    pub fn build(n_max: usize) -> InjectionTable {
        let mut dense = vec![BigUint::one()];
        if n_max >= 1 {
            dense.push(BigUint::from(2u32));
        }
        let mut heads: Vec<Head> = dense.iter().map(Head::of).collect();
        let mut seeds = Vec::new();

        let mut older = BigUint::one();
        let mut newer = BigUint::from(2u32);
        for k in 2..=n_max {
            if k >= DENSE_LEN && (k - DENSE_LEN).is_multiple_of(STRIDE) {
                seeds.push((older.clone(), newer.clone()));
            }
            let k64 = k as u64;
            older *= (k64 - 1) * (k64 - 1);
            let mut next = &newer * (2 * k64);
            next -= &older;
            heads.push(Head::of(&next));
            if k < DENSE_LEN {
                dense.push(next.clone());
            }
            older = std::mem::replace(&mut newer, next);
        }
        InjectionTable {
            n_max,
            dense,
            seeds,
            heads,
        }
    }

    pub(crate) fn from_parts(
        n_max: usize,
        dense: Vec<BigUint>,
        seeds: Vec<(BigUint, BigUint)>,
        heads: Vec<Head>,
    ) -> InjectionTable {
        InjectionTable {
            n_max,
            dense,
            seeds,
            heads,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub(crate) fn dense(&self) -> &[BigUint] {
        &self.dense
    }

    pub(crate) fn seeds(&self) -> &[(BigUint, BigUint)] {
        &self.seeds
    }

    pub fn head(&self, k: usize) -> Head {
        self.heads[k]
    }

    pub(crate) fn heads(&self) -> &[Head] {
        &self.heads
    }

    fn check(&self, k: usize) -> Result<()> {
        if k > self.n_max {
            Err(usage!(
                "index {k} exceeds table size n_max = {}",
                self.n_max
            ))
        } else {
            Ok(())
        }
    }

    /// `I_k`. Borrowed below [`DENSE_LEN`], recomputed from the nearest seed
    /// pair above it.
    pub fn get(&self, k: usize) -> Result<Cow<'_, BigUint>> {
        self.check(k)?;
        if k < self.dense.len() {
            return Ok(Cow::Borrowed(&self.dense[k]));
        }
        let (start, (older, newer)) = self.seed_for(k);
        let mut out = None;
        walk(start, k, older.clone(), newer.clone(), |i, v| {
            if i == k {
                out = Some(v.clone());
            }
        });
        Ok(Cow::Owned(out.expect("walk visits its end index")))
    }

    fn seed_for(&self, k: usize) -> (usize, &(BigUint, BigUint)) {
        let block = (k - DENSE_LEN) / STRIDE;
        (DENSE_LEN + block * STRIDE, &self.seeds[block])
    }

    /// All values in increasing order, recomputed as it goes.
    pub fn iter(&self) -> Values {
        Values {
            k: 0,
            end: self.n_max,
            older: BigUint::zero(),
            newer: BigUint::zero(),
        }
    }

    /// `I_from, I_{from-1}, ..., I_0`. Above [`DENSE_LEN`] one block of at
    /// most [`STRIDE`] values is held at a time.
    pub fn descending(&self, from: usize) -> Result<Descending<'_>> {
        self.check(from)?;
        Ok(Descending {
            table: self,
            next: Some(from),
            block: Vec::new(),
        })
    }
}

/// Ascending iterator over a table's values.
pub struct Values {
    k: usize,
    end: usize,
    older: BigUint,
    newer: BigUint,
}

impl Iterator for Values {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if self.k > self.end {
            return None;
        }
        let value = match self.k {
            0 => BigUint::one(),
            1 => BigUint::from(2u32),
            k => step(k as u64, &self.older, &self.newer),
        };
        self.older = std::mem::replace(&mut self.newer, value.clone());
        self.k += 1;
        Some(value)
    }
}

/// Descending iterator over a table's values.
pub struct Descending<'a> {
    table: &'a InjectionTable,
    next: Option<usize>,
    block: Vec<BigUint>,
}

impl<'a> Iterator for Descending<'a> {
    type Item = Cow<'a, BigUint>;

    fn next(&mut self) -> Option<Cow<'a, BigUint>> {
        let k = self.next?;
        self.next = k.checked_sub(1);
        if k < self.table.dense.len() {
            return Some(Cow::Borrowed(&self.table.dense[k]));
        }
        if self.block.is_empty() {
            let (start, (older, newer)) = self.table.seed_for(k);
            let block = &mut self.block;
            walk(start, k, older.clone(), newer.clone(), |_, v| {
                block.push(v.clone())
            });
        }
        self.block.pop().map(Cow::Owned)
    }
}

/// Natural logarithm of a positive big integer, from its top 128 bits.
pub fn ln_big(x: &BigUint) -> f64 {
    let head = Head::of(x);
    // value ~ top * 2^(64 (limbs - 2)); for a single limb the exponent is -64
    let shift = 64 * (i64::from(head.limbs) - 2);
    (head.top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Checks the pointed decomposition identity
/// `I_n = sum_{k=1..n} (k+1) (n-1)!/(n-k)! I_{n-k}` in exact integers.
pub fn verify_pointing_identity(n: usize, table: &InjectionTable) -> Result<bool> {
    if n == 0 {
        return Err(usage!("pointing identity is stated for n >= 1"));
    }
    table.check(n)?;
    let mut falling = BigUint::one();
    let mut sum = BigUint::zero();
    for (k, value) in (1..=n).zip(table.descending(n - 1)?) {
        if k > 1 {
            falling *= (n - k + 1) as u64;
        }
        sum += &falling * value.as_ref() * (k as u64 + 1);
    }
    Ok(sum == *table.get(n)?)
}

/// Checks `(n+1)! <= (n+1) I_{n-1} <= I_n <= n e^{1/sqrt n} I_{n-1} <= n! e^{2 sqrt n - 1}`.
///
/// The transcendental factors are bracketed with outward rounding; each
/// comparison passes when the lower bound of its left side does not exceed
/// the upper bound of its right side.
pub fn check_injection_bounds(n: usize, table: &InjectionTable) -> Result<bool> {
    if n == 0 {
        return Err(usage!("injection bounds are stated for n >= 1"));
    }
    table.check(n)?;
    let n64 = n as u64;
    let current = table.get(n)?;
    let previous = table.get(n - 1)?;
    let scaled_previous = previous.as_ref() * (n64 + 1);

    if factorial(n64 + 1) > scaled_previous || scaled_previous > *current {
        return Ok(false);
    }

    let sqrt_n = Interval::sqrt(n64);
    let ratio = sqrt_n.recip().exp();
    let n_prev = previous.as_ref() * n64;
    let (middle_lo, middle_hi) = ratio.scale(&n_prev);
    if *current > middle_hi {
        return Ok(false);
    }

    let growth = sqrt_n.mul_int(2).sub_int(1).exp();
    let (_, outer_hi) = growth.scale(&factorial(n64));
    Ok(middle_lo <= outer_hi)
}

/// Estimate of the number `S_{n,r}` of size-`n` subgroups of a rank-`r` free group.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupCountEstimate {
    pub n: usize,
    pub r: usize,
    /// `I_n^r / (n-1)!` in lowest terms.
    pub numerator: BigUint,
    pub denominator: BigUint,
    /// Natural log of the closed-form asymptotic equivalent.
    pub stirling_log: f64,
}

impl SubgroupCountEstimate {
    /// Natural log of the exact leading term.
    pub fn leading_log(&self) -> f64 {
        ln_big(&self.numerator) - ln_big(&self.denominator)
    }
}

/// Natural log of `(2e)^{-r/2} / sqrt(2 pi) * e^{-(r-1)n + 2r sqrt n} * n^{(r-1)n + (r+2)/4}`.
pub fn stirling_log(n: usize, r: usize) -> f64 {
    use std::f64::consts::{E, PI};
    let (n, r) = (n as f64, r as f64);
    -r / 2.0 * (2.0 * E).ln() - 0.5 * (2.0 * PI).ln()
        + (-(r - 1.0) * n + 2.0 * r * n.sqrt())
        + ((r - 1.0) * n + (r + 2.0) / 4.0) * n.ln()
}

pub fn subgroup_count_estimate(
    n: usize,
    r: usize,
    table: &InjectionTable,
) -> Result<SubgroupCountEstimate> {
    if n == 0 {
        return Err(usage!("subgroup size must be positive"));
    }
    if r < 2 {
        return Err(usage!("rank must be at least 2, got {r}"));
    }
    let power = table.get(n)?.pow(r as u32);
    let fact = factorial(n as u64 - 1);
    let gcd = power.gcd(&fact);
    Ok(SubgroupCountEstimate {
        n,
        r,
        numerator: power / &gcd,
        denominator: fact / &gcd,
        stirling_log: stirling_log(n, r),
    })
}

/// `I_n` as `u64`, if it fits.
pub fn small_value(table: &InjectionTable, n: usize) -> Option<u64> {
    table.get(n).ok()?.to_u64()
}
