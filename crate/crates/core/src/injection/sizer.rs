//! Fast exact component-size draws.
//!
//! The reference loop compares the dice against exact partial sums, which
//! costs a multiplication of `O(n log n)`-bit numbers per step. Here the dice
//! is accepted lazily (only its top limbs are read) and the partial sums are
//! bracketed by short binary floats with directed rounding. A step is decided
//! when the dice interval lies entirely on one side of the sum interval;
//! otherwise the dice is read in full and the exact loop finishes the draw.
//! A cheaper first pass in double precision, with explicit error margins,
//! settles almost every draw before the binary floats are needed.
//! The outcome and the words consumed are those of the reference loop.

use std::cell::{Cell, OnceCell};
use std::cmp::Ordering;

use num_bigint::BigUint;

use super::{kind_for, label_shapes, random_permutation, size_for_dice};
use super::{PartialInjection, ShapeSequence};
use crate::counting::{Head, InjectionTable};
use crate::error::{internal, usage, Result};
use crate::random::{uniform_below_lazy, Attempt, LimbSource, RandomSource};

/// Nonnegative real `m * 2^e`; `m` is zero or has its top bit set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Float {
    m: u64,
    e: i64,
}

const ZERO: Float = Float { m: 0, e: 0 };

impl Float {
    fn is_zero(self) -> bool {
        self.m == 0
    }

    fn cmp(self, other: Float) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.e.cmp(&other.e).then(self.m.cmp(&other.m)),
        }
    }
}

/// Directed rounding to `prec` mantissa bits.
#[derive(Debug, Clone, Copy)]
struct Rounding {
    prec: u32,
}

impl Rounding {
    /// `x * 2^e`, plus a strictly positive amount below one unit of `x` when
    /// `inexact` is set.
    fn round(self, x: u128, e: i64, inexact: bool, up: bool) -> Float {
        if x == 0 {
            // only reachable for exact zero: callers never pass inexact zeros
            debug_assert!(!inexact);
            return ZERO;
        }
        let lz = x.leading_zeros();
        let y = x << lz;
        let mut m = (y >> 64) as u64;
        let mut inexact = inexact || y as u64 != 0;
        let mut e = e + 64 - i64::from(lz);

        let drop = 64 - self.prec;
        if drop > 0 {
            let mask = (1u64 << drop) - 1;
            inexact |= m & mask != 0;
            m &= !mask;
        }
        if up && inexact {
            match m.checked_add(1u64 << drop) {
                Some(v) => m = v,
                None => {
                    m = 1 << 63;
                    e += 1;
                }
            }
        }
        Float { m, e }
    }

    fn int(self, x: u64, up: bool) -> Float {
        self.round(u128::from(x), 0, false, up)
    }

    fn mul(self, a: Float, b: Float, up: bool) -> Float {
        if a.is_zero() || b.is_zero() {
            return ZERO;
        }
        self.round(u128::from(a.m) * u128::from(b.m), a.e + b.e, false, up)
    }

    fn add(self, a: Float, b: Float, up: bool) -> Float {
        let (a, b) = if a.cmp(b) == Ordering::Less {
            (b, a)
        } else {
            (a, b)
        };
        if b.is_zero() {
            return a;
        }
        // a's top bit at 125 leaves room for the carry
        let wide_a = u128::from(a.m) << 62;
        let wide_b = u128::from(b.m) << 62;
        let diff = (a.e - b.e) as u64;
        let (shifted, inexact) = if diff >= 126 {
            (0, true)
        } else {
            let s = wide_b >> diff;
            (s, s << diff != wide_b)
        };
        self.round(wide_a + shifted, a.e - 62, inexact, up)
    }
}

/// Closed interval `[lo, hi]` of nonnegative reals.
#[derive(Debug, Clone, Copy)]
struct Bound {
    lo: Float,
    hi: Float,
}

impl Bound {
    fn mul(self, other: Bound, r: Rounding) -> Bound {
        Bound {
            lo: r.mul(self.lo, other.lo, false),
            hi: r.mul(self.hi, other.hi, true),
        }
    }

    fn mul_int(self, x: u64, r: Rounding) -> Bound {
        self.mul(
            Bound {
                lo: r.int(x, false),
                hi: r.int(x, true),
            },
            r,
        )
    }

    fn add(self, other: Bound, r: Rounding) -> Bound {
        Bound {
            lo: r.add(self.lo, other.lo, false),
            hi: r.add(self.hi, other.hi, true),
        }
    }
}

/// Bounds for an integer whose limbs above `64 * scale` form `top` and whose
/// lower limbs are unknown (`scale = 0` means `top` is the exact value).
fn head_bound(top: u128, scale: u64, r: Rounding) -> Bound {
    let e = 64 * scale as i64;
    let lo = r.round(top, e, false, false);
    let mut hi = r.round(top, e, false, true);
    if scale > 0 {
        let unit = r.round(1, e, false, true);
        hi = r.add(hi, unit, true);
    }
    Bound { lo, hi }
}

fn entry_bound(head: Head, r: Rounding) -> Bound {
    match head.limbs {
        0 => Bound { lo: ZERO, hi: ZERO },
        // a single limb sits in the high half of `top`
        1 => head_bound(head.top >> 64, 0, r),
        l => head_bound(head.top, u64::from(l) - 2, r),
    }
}

/// `[lo, hi_excl)` containing the dice, as reals.
fn dice_bound(attempt: &Attempt, src: &RandomSource, r: Rounding) -> (Float, Float) {
    let (top, scale) = match attempt.words {
        0 => (0, 0),
        1 => (u128::from(attempt.limb(src, 0)), 0),
        w => (
            (u128::from(attempt.limb(src, w - 1)) << 64) | u128::from(attempt.limb(src, w - 2)),
            w - 2,
        ),
    };
    let e = 64 * scale as i64;
    let lo = r.round(top, e, false, false);
    let hi = r.add(
        r.round(top, e, false, true),
        r.round(1, e, false, true),
        true,
    );
    (lo, hi)
}

const EPS: f64 = f64::EPSILON / 2.0;
const TWO_64: f64 = 18_446_744_073_709_551_616.0;
/// Below this the double-precision pass gives up rather than approach the
/// subnormal range.
const TINY: f64 = 1e-280;

/// `(m, e)` with the entry close to `m * 2^(64 e)`, relative error below
/// `2^-63` plus one rounding.
fn head_f64(head: Head) -> (f64, i64) {
    (head.top as f64, i64::from(head.limbs) - 2)
}

fn pow_two_64(e: i64) -> f64 {
    match e {
        0 => 1.0,
        -1 => 1.0 / TWO_64,
        1 => TWO_64,
        _ => TWO_64.powi(e as i32),
    }
}

/// `I_k` exposed limb by limb: the head answers the top two, anything lower
/// recomputes the value once.
struct Entry<'a> {
    table: &'a InjectionTable,
    k: usize,
    head: Head,
    full: OnceCell<BigUint>,
}

impl LimbSource for Entry<'_> {
    fn bits(&self) -> u64 {
        self.head.bits()
    }

    fn is_power_of_two(&self) -> bool {
        self.head.power_of_two
    }

    fn limb(&self, i: u64) -> u64 {
        self.head.limb(i).unwrap_or_else(|| {
            let full = self.full.get_or_init(|| {
                self.table
                    .get(self.k)
                    .expect("index checked on construction")
                    .into_owned()
            });
            full.limb(i)
        })
    }
}

/// Component-size sampler with the distribution and stream usage of
/// [`super::draw_component_size`].
#[derive(Debug)]
pub struct ComponentSizer<'a> {
    table: &'a InjectionTable,
    rounding: Rounding,
    quick: bool,
    fallbacks: Cell<u64>,
}

impl<'a> ComponentSizer<'a> {
    pub fn new(table: &'a InjectionTable) -> Self {
        ComponentSizer {
            table,
            rounding: Rounding { prec: 64 },
            quick: true,
            fallbacks: Cell::new(0),
        }
    }

    /// Mantissa width of the interval arithmetic, between 2 and 64 bits.
    /// Narrow widths only make the exact fallback more frequent. Setting a
    /// width also turns off the double-precision first pass.
    pub fn with_precision(mut self, bits: u32) -> Self {
        assert!((2..=64).contains(&bits), "precision must be in 2..=64");
        self.rounding = Rounding { prec: bits };
        self.quick = false;
        self
    }

    /// Number of draws so far that needed the exact loop.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks.get()
    }

    pub fn draw(&self, n: usize, src: &mut RandomSource) -> Result<usize> {
        if n == 0 {
            return Err(usage!("component size needs n >= 1"));
        }
        if n > self.table.n_max() {
            return Err(usage!("n = {n} exceeds table size {}", self.table.n_max()));
        }
        let r = self.rounding;
        let bound = Entry {
            table: self.table,
            k: n,
            head: self.table.head(n),
            full: OnceCell::new(),
        };
        let attempt = uniform_below_lazy(&bound, src);
        if self.quick {
            if let Some(k) = self.quick_draw(n, &attempt, src) {
                return Ok(k);
            }
        }
        let (dice_lo, dice_hi) = dice_bound(&attempt, src, r);

        let mut t = Bound {
            lo: r.int(1, false),
            hi: r.int(1, true),
        };
        let mut s = Bound { lo: ZERO, hi: ZERO };
        for k in 1..=n {
            if k > 1 {
                t = t.mul_int((n - k + 1) as u64, r);
            }
            let term = t
                .mul(entry_bound(self.table.head(n - k), r), r)
                .mul_int(k as u64 + 1, r);
            s = s.add(term, r);
            if dice_hi.cmp(s.lo) != Ordering::Greater {
                return Ok(k);
            }
            if dice_lo.cmp(s.hi) == Ordering::Less {
                self.fallbacks.set(self.fallbacks.get() + 1);
                let dice = attempt.value(src);
                return Ok(size_for_dice(n, &dice, self.table)?.0);
            }
        }
        Err(internal!("partial sums for n = {n} never passed the dice"))
    }

    /// Compares `dice / I_n` with the partial sums divided by `I_n`, each
    /// carried with a relative error bound. `None` when the margins straddle
    /// the dice or the terms get too small.
    fn quick_draw(&self, n: usize, attempt: &Attempt, src: &RandomSource) -> Option<usize> {
        let w = attempt.words;
        if w == 0 {
            return None;
        }
        let top_word = u128::from(attempt.limb(src, w - 1)) << 64;
        let top = top_word
            | if w >= 2 {
                u128::from(attempt.limb(src, w - 2))
            } else {
                0
            };
        let (m_n, e_n) = head_f64(self.table.head(n));
        let scale = pow_two_64(w as i64 - 2 - e_n) / m_n;
        let top_f = top as f64;
        let dice_lo = top_f * scale * (1.0 - 8.0 * EPS);
        let dice_hi = (top_f + 1.0) * scale * (1.0 + 8.0 * EPS);

        let (mut m_prev, mut e_prev) = (m_n, e_n);
        let mut q = 0.0;
        let mut s = 0.0;
        for k in 1..=n {
            let (m, e) = head_f64(self.table.head(n - k));
            let ratio = m / m_prev * pow_two_64(e - e_prev);
            q = if k == 1 {
                2.0 * ratio
            } else {
                q * ((k + 1) as f64 / k as f64) * (n - k + 1) as f64 * ratio
            };
            (m_prev, e_prev) = (m, e);
            s += q;
            if q < TINY {
                return None;
            }
            let margin = (16 * k + 32) as f64 * EPS;
            if dice_hi <= s * (1.0 - margin) {
                return Some(k);
            }
            if dice_lo < s * (1.0 + margin) {
                return None;
            }
        }
        None
    }

    pub fn shape_sequence(&self, mut n: usize, src: &mut RandomSource) -> Result<ShapeSequence> {
        if n > self.table.n_max() {
            return Err(usage!("n = {n} exceeds table size {}", self.table.n_max()));
        }
        let mut shapes = Vec::new();
        while n > 0 {
            let k = self.draw(n, src)?;
            shapes.push(kind_for(k, src));
            n -= k;
        }
        ShapeSequence::new(shapes)
    }

    pub fn partial_injection(&self, n: usize, src: &mut RandomSource) -> Result<PartialInjection> {
        let shapes = self.shape_sequence(n, src)?;
        let perm = random_permutation(n, src);
        label_shapes(&shapes, &perm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{DENSE_LEN, STRIDE};
    use crate::injection::draw_component_size;

    fn to_f64(x: Float) -> f64 {
        x.m as f64 * 2f64.powi(x.e as i32)
    }

    #[test]
    fn rounding_brackets() {
        for prec in [4, 17, 64] {
            let r = Rounding { prec };
            let x = 0x1234_5678_9abc_def1u64;
            let (lo, hi) = (r.int(x, false), r.int(x, true));
            assert!(to_f64(lo) <= x as f64 && x as f64 <= to_f64(hi));
            let p = r.mul(hi, hi, true);
            assert!(p.cmp(r.mul(lo, lo, false)) != Ordering::Less);
            let s_lo = r.add(lo, r.int(3, false), false);
            let s_hi = r.add(hi, r.int(3, true), true);
            assert!(s_lo.cmp(s_hi) != Ordering::Greater);
        }
        let r = Rounding { prec: 64 };
        assert_eq!(
            r.add(r.int(5, false), r.int(7, false), false),
            r.int(12, false)
        );
        assert_eq!(
            r.mul(r.int(6, false), r.int(7, true), true),
            r.int(42, false)
        );
        let tiny = Float {
            m: 1 << 63,
            e: -300,
        };
        assert!(r.add(r.int(1, false), tiny, true).cmp(r.int(1, false)) == Ordering::Greater);
        assert_eq!(r.add(r.int(1, false), tiny, false), r.int(1, false));
    }

    #[test]
    fn entry_bounds_contain_values() {
        let table = InjectionTable::build(200);
        let r = Rounding { prec: 64 };
        for k in [0, 1, 5, 20, 21, 22, 50, 200] {
            let v = table.get(k).unwrap();
            let b = entry_bound(table.head(k), r);
            let fv = crate::counting::ln_big(&v);
            let ln = |x: Float| (x.m as f64).ln() + x.e as f64 * std::f64::consts::LN_2;
            let (lo, hi) = (ln(b.lo), ln(b.hi));
            assert!(lo <= fv + 1e-12 && fv <= hi + 1e-12, "k={k}");
        }
    }

    fn assert_identical(n_max: usize, step: usize, seeds: u64, precision: Option<u32>) -> u64 {
        let table = InjectionTable::build(n_max);
        let mut sizer = ComponentSizer::new(&table);
        if let Some(bits) = precision {
            sizer = sizer.with_precision(bits);
        }
        for seed in 0..seeds {
            let mut plain = RandomSource::new(seed);
            let mut fast = RandomSource::new(seed);
            for n in (1..=n_max).step_by(step) {
                let a = draw_component_size(n, &table, &mut plain).unwrap();
                let b = sizer.draw(n, &mut fast).unwrap();
                assert_eq!(a, b, "seed {seed} n {n}");
                assert_eq!(plain.position(), fast.position());
            }
        }
        sizer.fallbacks()
    }

    #[test]
    fn matches_reference_loop() {
        assert_identical(300, 7, 40, None);
        assert_identical(300, 7, 40, Some(64));
    }

    #[test]
    fn matches_reference_loop_past_dense_range() {
        assert_identical(DENSE_LEN + STRIDE + 40, 97, 3, None);
    }

    #[test]
    fn matches_reference_loop_with_forced_fallbacks() {
        let fallbacks = assert_identical(120, 7, 40, Some(4));
        assert!(fallbacks > 0);
    }

    #[test]
    fn rejects_out_of_range() {
        let table = InjectionTable::build(5);
        let sizer = ComponentSizer::new(&table);
        let mut src = RandomSource::new(0);
        assert!(sizer.draw(0, &mut src).is_err());
        assert!(sizer.draw(6, &mut src).is_err());
        assert!(sizer.shape_sequence(6, &mut src).is_err());
    }
}
