//! Uniform random partial injections by the recursive method.
//!
//! A partial injection of `{0..n-1}` splits into sequences (paths) and
//! cycles. Sampling first draws the component sizes and kinds on a shrinking
//! remainder, then assigns labels with one uniform permutation.
//!
//! Vertices are 0-based in this module; serializers add one.

mod sizer;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::counting::InjectionTable;
use crate::error::{usage, Error, Result};
use crate::random::{uniform_below, uniform_index_unchecked, RandomSource};

pub use sizer::ComponentSizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Sequence,
    Cycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentShape {
    pub kind: ComponentKind,
    pub size: usize,
}

impl ComponentShape {
    pub fn sequence(size: usize) -> Self {
        ComponentShape {
            kind: ComponentKind::Sequence,
            size,
        }
    }

    pub fn cycle(size: usize) -> Self {
        ComponentShape {
            kind: ComponentKind::Cycle,
            size,
        }
    }
}

/// Unlabeled components in draw order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShapeSequence {
    shapes: Vec<ComponentShape>,
    total: usize,
}

impl ShapeSequence {
    pub fn new(shapes: Vec<ComponentShape>) -> Result<Self> {
        if shapes.iter().any(|s| s.size == 0) {
            return Err(usage!("component sizes must be positive"));
        }
        let total = shapes.iter().map(|s| s.size).sum();
        Ok(ShapeSequence { shapes, total })
    }

    pub fn shapes(&self) -> &[ComponentShape] {
        &self.shapes
    }

    pub fn total(&self) -> usize {
        self.total
    }
}

/// An injective partial map on `{0..n-1}`. `image[u] = Some(v)` means `u -> v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialInjection {
    image: Vec<Option<u32>>,
}

impl PartialInjection {
    pub fn new(image: Vec<Option<u32>>) -> Result<Self> {
        let n = image.len();
        let mut hit = vec![false; n];
        for (u, v) in image.iter().enumerate() {
            if let Some(v) = *v {
                let v = v as usize;
                if v >= n {
                    return Err(Error::Data(format!("image {v} of {u} is out of range")));
                }
                if std::mem::replace(&mut hit[v], true) {
                    return Err(Error::Data(format!("{v} has two preimages")));
                }
            }
        }
        Ok(PartialInjection { image })
    }

    pub(crate) fn new_unchecked(image: Vec<Option<u32>>) -> Self {
        debug_assert!(PartialInjection::new(image.clone()).is_ok());
        PartialInjection { image }
    }

    pub fn empty(n: usize) -> Self {
        PartialInjection {
            image: vec![None; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        PartialInjection {
            image: (0..n as u32).map(Some).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[Option<u32>] {
        &self.image
    }

    pub fn get(&self, u: usize) -> Option<usize> {
        self.image[u].map(|v| v as usize)
    }

    /// Size of the domain of definition.
    pub fn defined(&self) -> usize {
        self.image.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.image.iter().all(Option::is_some)
    }

    /// The inverse partial map.
    pub fn inverse(&self) -> PartialInjection {
        let mut inv = vec![None; self.n()];
        for (u, v) in self.image.iter().enumerate() {
            if let Some(v) = v {
                inv[*v as usize] = Some(u as u32);
            }
        }
        PartialInjection { image: inv }
    }
}

/// A bijection on `{0..n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<u32>,
}

impl Permutation {
    pub fn new(image: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &v in &image {
            match seen.get_mut(v as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::Data(format!("not a permutation: {image:?}"))),
            }
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n as u32).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }

    pub fn to_injection(&self) -> PartialInjection {
        PartialInjection {
            image: self.image.iter().map(|&v| Some(v)).collect(),
        }
    }
}

/// Size of the component containing a marked vertex of a uniform partial
/// injection of size `n`: `k` with probability `(k+1) (n-1)!/(n-k)! I_{n-k} / I_n`.
///
/// This is the reference loop over exact integers. It costs `O(k)` operations
/// on numbers of `O(n log n)` bits; [`ComponentSizer`] returns the same value
/// from the same stream words much faster.
pub fn draw_component_size(
    n: usize,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<usize> {
    if n == 0 {
        return Err(usage!("component size needs n >= 1"));
    }
    let dice = uniform_below(table.get(n)?.as_ref(), src)?;
    Ok(size_for_dice(n, &dice, table)?.0)
}

/// Runs the exact partial-sum loop for a fixed dice value. Also returns the
/// final partial sum so callers can check it.
fn size_for_dice(n: usize, dice: &BigUint, table: &InjectionTable) -> Result<(usize, BigUint)> {
    let mut below = table.descending(n - 1)?;
    let mut next_value = || below.next().expect("descending covers I_0");
    let mut k = 1;
    let mut t = BigUint::from(1u32);
    let mut s = next_value().as_ref() * 2u32;
    while *dice >= s {
        k += 1;
        if k > n {
            return Err(Error::Internal(format!("dice exceeds I_{n}")));
        }
        t *= (n - k + 1) as u64;
        s += &t * next_value().as_ref() * (k as u64 + 1);
    }
    Ok((k, s))
}

/// A sequence with probability `k/(k+1)`, otherwise a cycle.
pub fn draw_component_kind(k: usize, src: &mut RandomSource) -> Result<ComponentShape> {
    if k == 0 {
        return Err(usage!("component size must be positive"));
    }
    Ok(kind_for(k, src))
}

fn kind_for(k: usize, src: &mut RandomSource) -> ComponentShape {
    if uniform_index_unchecked(k + 1, src) < k {
        ComponentShape::sequence(k)
    } else {
        ComponentShape::cycle(k)
    }
}

pub fn random_shape_sequence(
    n: usize,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<ShapeSequence> {
    ComponentSizer::new(table).shape_sequence(n, src)
}

/// Uniform permutation by Fisher-Yates.
pub fn random_permutation(n: usize, src: &mut RandomSource) -> Permutation {
    let mut image: Vec<u32> = (0..n as u32).collect();
    for i in 1..n {
        let j = uniform_index_unchecked(i + 1, src);
        image.swap(i, j);
    }
    Permutation { image }
}

/// Labels the shapes with consecutive runs of `perm`: a run `v_1..v_k` gets
/// `v_i -> v_{i+1}`, plus `v_k -> v_1` for a cycle.
pub fn label_shapes(shapes: &ShapeSequence, perm: &Permutation) -> Result<PartialInjection> {
    if shapes.total() != perm.n() {
        return Err(usage!(
            "shapes cover {} vertices but the permutation has {}",
            shapes.total(),
            perm.n()
        ));
    }
    let mut image = vec![None; perm.n()];
    let mut rest = perm.image();
    for shape in shapes.shapes() {
        let (run, tail) = rest.split_at(shape.size);
        rest = tail;
        for pair in run.windows(2) {
            image[pair[0] as usize] = Some(pair[1]);
        }
        if shape.kind == ComponentKind::Cycle {
            image[run[shape.size - 1] as usize] = Some(run[0]);
        }
    }
    Ok(PartialInjection::new_unchecked(image))
}

/// Uniform over all `I_n` partial injections of `{0..n-1}`.
pub fn random_partial_injection(
    n: usize,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<PartialInjection> {
    ComponentSizer::new(table).partial_injection(n, src)
}

/// Component multiset, as counts per shape.
pub fn decompose(inj: &PartialInjection) -> BTreeMap<ComponentShape, usize> {
    let n = inj.n();
    let inv = inj.inverse();
    let mut seen = vec![false; n];
    let mut out = BTreeMap::new();
    // sequences start at vertices without a preimage
    for start in 0..n {
        if inv.image[start].is_some() {
            continue;
        }
        let mut size = 0;
        let mut u = Some(start);
        while let Some(v) = u {
            seen[v] = true;
            size += 1;
            u = inj.get(v);
        }
        *out.entry(ComponentShape::sequence(size)).or_insert(0) += 1;
    }
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut size = 0;
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            size += 1;
            v = inj.get(v).expect("vertices left over lie on cycles");
        }
        *out.entry(ComponentShape::cycle(size)).or_insert(0) += 1;
    }
    out
}

/// Number of sequence components: every sequence has exactly one vertex
/// outside the domain.
pub fn count_sequences(inj: &PartialInjection) -> usize {
    inj.n() - inj.defined()
}
