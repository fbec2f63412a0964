//! Seedable random source and exact uniform integer sampling.
//!
//! The generator is SplitMix64 used in counter mode: the word at stream
//! position `i` is `mix64(seed + (i + 1) * GAMMA)`. Its period is 2^64 and any
//! position can be read without advancing the stream, which lets the
//! component sampler inspect the high limbs of a large random integer first
//! and read the low limbs only when they are needed, while consuming exactly
//! the same words as a plain draw.
//!
//! Independent streams for parallel work are derived with
//! [`RandomSource::for_stream`], which hashes `(seed, stream)` into a fresh
//! SplitMix64 seed.
//!
//! Uniform draws never use modular reduction or floating point. To draw below
//! `bound`, take `ceil(log2(bound))` random bits (the high bits of
//! `ceil(bits / 64)` consecutive words, most significant limb last) and reject
//! values `>= bound`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{usage, Result};

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// The SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic, single-owner source of random 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSource {
    seed: u64,
    position: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, position: 0 }
    }

    /// Source for the `stream`-th independent substream of `seed`.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        RandomSource::new(mix64(seed ^ mix64(stream.wrapping_add(GAMMA))))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of words consumed so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// The word at an absolute stream position. Does not advance the stream.
    #[inline]
    pub fn word_at(&self, position: u64) -> u64 {
        mix64(
            self.seed
                .wrapping_add(position.wrapping_add(1).wrapping_mul(GAMMA)),
        )
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let word = self.word_at(self.position);
        self.position = self.position.wrapping_add(1);
        word
    }

    /// Advances the stream by `words` without reading them.
    #[inline]
    pub fn skip(&mut self, words: u64) {
        self.position = self.position.wrapping_add(words);
    }
}

/// One rejection attempt of a big uniform draw: `words` consecutive stream
/// words starting at `base`, the top word shifted right by `top_shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Attempt {
    pub base: u64,
    pub words: u64,
    pub top_shift: u32,
}

impl Attempt {
    fn at(src: &RandomSource, bits: u64) -> Attempt {
        let words = bits.div_ceil(64);
        Attempt {
            base: src.position(),
            words,
            top_shift: (words * 64 - bits) as u32,
        }
    }

    /// Limb `i` (little-endian) of the candidate value.
    #[inline]
    pub fn limb(&self, src: &RandomSource, i: u64) -> u64 {
        let word = src.word_at(self.base + i);
        if i + 1 == self.words {
            // top_shift < 64 because `bits` fills at least one bit of the top word
            word >> self.top_shift
        } else {
            word
        }
    }

    pub fn value(&self, src: &RandomSource) -> BigUint {
        let limbs: Vec<u64> = (0..self.words).map(|i| self.limb(src, i)).collect();
        biguint_from_limbs(&limbs)
    }
}

pub(crate) fn biguint_from_limbs(limbs: &[u64]) -> BigUint {
    let digits: Vec<u32> = limbs
        .iter()
        .flat_map(|&l| [l as u32, (l >> 32) as u32])
        .collect();
    BigUint::new(digits)
}

/// Read access to the limbs of a bound for [`uniform_below_lazy`]. Low limbs
/// are only requested when all higher limbs of the candidate tie.
pub(crate) trait LimbSource {
    fn bits(&self) -> u64;
    fn is_power_of_two(&self) -> bool;
    fn limb(&self, i: u64) -> u64;
}

impl LimbSource for BigUint {
    fn bits(&self) -> u64 {
        BigUint::bits(self)
    }

    fn is_power_of_two(&self) -> bool {
        !self.is_zero() && self.trailing_zeros() == Some(BigUint::bits(self) - 1)
    }

    fn limb(&self, i: u64) -> u64 {
        self.iter_u64_digits().nth(i as usize).unwrap_or(0)
    }
}

/// Draws uniformly from `[0, bound)`. `bound` must be at least 1.
pub fn uniform_below(bound: &BigUint, src: &mut RandomSource) -> Result<BigUint> {
    if bound.is_zero() {
        return Err(usage!("uniform_below requires a positive bound"));
    }
    let bits = (bound - BigUint::one()).bits();
    if bits == 0 {
        return Ok(BigUint::zero());
    }
    loop {
        let attempt = Attempt::at(src, bits);
        src.skip(attempt.words);
        let candidate = attempt.value(src);
        if &candidate < bound {
            return Ok(candidate);
        }
    }
}

/// Same distribution and stream consumption as [`uniform_below`], but the
/// candidate is compared against `bound` from the most significant limb down,
/// so usually only the top limb of either number is read. Returns the
/// accepted attempt; the caller reads its limbs on demand.
pub(crate) fn uniform_below_lazy<B: LimbSource + ?Sized>(
    bound: &B,
    src: &mut RandomSource,
) -> Attempt {
    let bits = if bound.is_power_of_two() {
        bound.bits() - 1
    } else {
        bound.bits()
    };
    loop {
        let attempt = Attempt::at(src, bits);
        src.skip(attempt.words);
        if bound.is_power_of_two() {
            return attempt;
        }
        let mut accepted = false;
        for i in (0..attempt.words).rev() {
            let (d, m) = (attempt.limb(src, i), bound.limb(i));
            if d != m {
                accepted = d < m;
                break;
            }
        }
        if accepted {
            return attempt;
        }
    }
}

/// Draws uniformly from `[0, n)` using one machine word per attempt.
pub fn uniform_index(n: usize, src: &mut RandomSource) -> Result<usize> {
    if n == 0 {
        return Err(usage!("uniform_index requires n >= 1"));
    }
    Ok(uniform_index_unchecked(n, src))
}

#[inline]
pub(crate) fn uniform_index_unchecked(n: usize, src: &mut RandomSource) -> usize {
    debug_assert!(n >= 1);
    let limit = (n - 1) as u64;
    if limit == 0 {
        return 0;
    }
    let shift = limit.leading_zeros();
    loop {
        let candidate = src.next_u64() >> shift;
        if candidate <= limit {
            return candidate as usize;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_identical_streams() {
        let mut a = RandomSource::new(99);
        let mut b = RandomSource::new(99);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RandomSource::new(100);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn word_at_matches_sequential_reads() {
        let mut src = RandomSource::new(5);
        let peek: Vec<u64> = (0..10).map(|i| src.word_at(i)).collect();
        let read: Vec<u64> = (0..10).map(|_| src.next_u64()).collect();
        assert_eq!(peek, read);
    }

    #[test]
    fn bit_positions_are_balanced() {
        let mut src = RandomSource::new(2024);
        let draws = 1_000_000;
        let mut ones = [0u32; 64];
        for _ in 0..draws {
            let w = src.next_u64();
            for (bit, count) in ones.iter_mut().enumerate() {
                *count += ((w >> bit) & 1) as u32;
            }
        }
        for (bit, &count) in ones.iter().enumerate() {
            let freq = count as f64 / draws as f64;
            assert!((freq - 0.5).abs() < 0.005, "bit {bit}: {freq}");
        }
    }

    #[test]
    fn streams_differ() {
        let a = RandomSource::for_stream(1, 0);
        let b = RandomSource::for_stream(1, 1);
        assert_ne!(a.seed(), b.seed());
        assert_eq!(a, RandomSource::for_stream(1, 0));
    }

    #[test]
    fn uniform_below_one_is_zero_and_consumes_nothing() {
        let mut src = RandomSource::new(1);
        for _ in 0..10 {
            assert!(uniform_below(&BigUint::one(), &mut src).unwrap().is_zero());
        }
        assert_eq!(src.position(), 0);
    }

    #[test]
    fn uniform_below_zero_is_usage_error() {
        let mut src = RandomSource::new(1);
        assert!(uniform_below(&BigUint::zero(), &mut src).is_err());
        assert!(uniform_index(0, &mut src).is_err());
    }

    #[test]
    fn power_of_two_bound_never_rejects() {
        let mut src = RandomSource::new(3);
        let bound = BigUint::one() << 100u32;
        for _ in 0..200 {
            let before = src.position();
            let v = uniform_below(&bound, &mut src).unwrap();
            assert!(v < bound);
            assert_eq!(src.position() - before, 2);
        }
    }

    #[test]
    fn small_bound_residues_are_uniform() {
        let mut src = RandomSource::new(77);
        let bound = BigUint::from(6u32);
        let draws = 600_000;
        let mut counts = [0u32; 6];
        for _ in 0..draws {
            let v = uniform_below(&bound, &mut src).unwrap();
            counts[v.iter_u64_digits().next().unwrap_or(0) as usize] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / draws as f64;
            assert!((freq * 6.0 - 1.0).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn uniform_index_basics() {
        let mut src = RandomSource::new(8);
        assert_eq!(uniform_index(1, &mut src).unwrap(), 0);
        let mut seen = [false; 2];
        for _ in 0..100 {
            seen[uniform_index(2, &mut src).unwrap()] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn lazy_draw_matches_plain_draw() {
        let bounds = [
            BigUint::from(1u32),
            BigUint::from(7u32),
            BigUint::from(u64::MAX),
            (BigUint::one() << 64u32) + 1u32,
            (BigUint::one() << 128u32) - 1u32,
            BigUint::one() << 130u32,
            BigUint::parse_bytes(b"234662231234662231234662231234662231", 10).unwrap(),
        ];
        for bound in &bounds {
            let mut plain = RandomSource::new(11);
            let mut lazy = RandomSource::new(11);
            for _ in 0..500 {
                let v = uniform_below(bound, &mut plain).unwrap();
                let attempt = uniform_below_lazy(bound, &mut lazy);
                assert_eq!(attempt.value(&lazy), v);
                assert_eq!(plain.position(), lazy.position());
            }
        }
    }

    #[test]
    fn lazy_draw_resolves_deep_ties() {
        // a bound whose top limbs equal the candidate's forces low-limb reads
        let src = RandomSource::new(4);
        let bits = 200;
        let probe = Attempt::at(&src, bits);
        let candidate = probe.value(&src);
        for bound in [candidate.clone(), &candidate + 1u32, &candidate + 2u32] {
            let mut plain = src.clone();
            let mut lazy = src.clone();
            let v = uniform_below(&bound, &mut plain).unwrap();
            let attempt = uniform_below_lazy(&bound, &mut lazy);
            assert_eq!(attempt.value(&lazy), v);
            assert_eq!(plain.position(), lazy.position());
        }
    }
}
