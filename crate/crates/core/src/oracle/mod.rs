//! Brute-force enumeration at small sizes, used as ground truth for the
//! samplers and the counting formulas, plus the statistical harness.

mod selftest;
mod stats;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::counting::factorial;
use crate::error::{internal, usage, Error, Result};
use crate::graph::{assemble, canonical_form, is_admissible, is_connected, AGraph};
use crate::injection::{PartialInjection, Permutation};

pub use selftest::{selftest, SelfTestCheck};
pub use stats::{
    asymptotic_crosscheck, chi_square_p_value, connectivity_stat, fi_accept_stat,
    finite_index_fraction_bound, finite_index_fraction_log, rank_stat, sequences_stat, stat,
    uniformity_test, Metric, StatReport,
};

/// Largest `n` for [`enumerate_partial_injections`].
pub const MAX_INJECTION_N: usize = 6;
/// Largest number of letter tuples [`enumerate_admissible`] will visit.
pub const MAX_TUPLES: u64 = 3_000_000;

/// All partial injections of `{0..n-1}`, in lexicographic order of images
/// with "undefined" first.
pub fn enumerate_partial_injections(n: usize) -> Result<Vec<PartialInjection>> {
    if n > MAX_INJECTION_N {
        return Err(Error::Scale(format!(
            "partial injections are enumerated up to n = {MAX_INJECTION_N}, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut image = vec![None; n];
    let mut used = vec![false; n];
    fn go(
        u: usize,
        image: &mut Vec<Option<u32>>,
        used: &mut Vec<bool>,
        out: &mut Vec<PartialInjection>,
    ) {
        if u == image.len() {
            out.push(PartialInjection::new_unchecked(image.clone()));
            return;
        }
        image[u] = None;
        go(u + 1, image, used, out);
        for v in 0..image.len() {
            if !used[v] {
                used[v] = true;
                image[u] = Some(v as u32);
                go(u + 1, image, used, out);
                used[v] = false;
            }
        }
        image[u] = None;
    }
    go(0, &mut image, &mut used, &mut out);
    Ok(out)
}

/// All `n!` permutations of `{0..n-1}` in lexicographic order.
pub fn enumerate_permutations(n: usize) -> Result<Vec<Permutation>> {
    if n > MAX_INJECTION_N {
        return Err(Error::Scale(format!(
            "permutations are enumerated up to n = {MAX_INJECTION_N}, got {n}"
        )));
    }
    Ok(enumerate_partial_injections(n)?
        .into_iter()
        .filter(PartialInjection::is_total)
        .map(|inj| {
            Permutation::new(inj.image().iter().map(|v| v.expect("total")).collect())
                .expect("a total injection is a permutation")
        })
        .collect())
}

/// Calls `visit` on every `r`-tuple of items, last coordinate fastest.
fn for_each_tuple<T: Clone>(
    items: &[T],
    r: usize,
    mut visit: impl FnMut(Vec<T>) -> Result<()>,
) -> Result<()> {
    if items.is_empty() {
        return Ok(());
    }
    let mut idx = vec![0usize; r];
    loop {
        visit(idx.iter().map(|&i| items[i].clone()).collect())?;
        let mut pos = r;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < items.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn check_tuple_count(base: usize, r: usize) -> Result<()> {
    let count = (base as u64).checked_pow(r as u32);
    match count {
        Some(c) if c <= MAX_TUPLES => Ok(()),
        _ => Err(Error::Scale(format!(
            "{base}^{r} letter tuples exceed the enumeration cap {MAX_TUPLES}"
        ))),
    }
}

/// Every admissible labeled graph with `n` vertices over `r` letters.
pub fn admissible_graphs(n: usize, r: usize) -> Result<Vec<AGraph>> {
    if n == 0 || r == 0 {
        return Err(usage!("enumeration needs n >= 1 and r >= 1"));
    }
    let injections = enumerate_partial_injections(n)?;
    check_tuple_count(injections.len(), r)?;
    let mut out = Vec::new();
    for_each_tuple(&injections, r, |letters| {
        let g = assemble(letters, n)?;
        if is_admissible(&g) {
            out.push(g);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Every connected permutation graph with `n` vertices over `r` letters.
pub fn finite_index_graphs(n: usize, r: usize) -> Result<Vec<AGraph>> {
    if n == 0 || r == 0 {
        return Err(usage!("enumeration needs n >= 1 and r >= 1"));
    }
    let perms = enumerate_permutations(n)?;
    check_tuple_count(perms.len(), r)?;
    let mut out = Vec::new();
    for_each_tuple(&perms, r, |letters| {
        let g = assemble(letters.iter().map(Permutation::to_injection).collect(), n)?;
        if is_connected(&g) {
            out.push(g);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Subgroup counts obtained two independent ways.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationResult {
    pub n: usize,
    pub r: usize,
    /// Admissible graphs with labeled vertices.
    pub labeled_admissible: u64,
    /// `labeled_admissible / (n-1)!`.
    pub subgroup_count: u64,
    /// Distinct canonical forms among the labeled graphs.
    pub canonical_classes: u64,
}

fn summarize(n: usize, r: usize, graphs: &[AGraph]) -> Result<EnumerationResult> {
    let labeled = graphs.len() as u64;
    let classes: HashSet<_> = graphs.iter().map(canonical_form).collect::<Result<_>>()?;
    let fact = factorial(n as u64 - 1);
    let fact = u64::try_from(fact).map_err(|_| internal!("(n-1)! overflows"))?;
    if !labeled.is_multiple_of(fact) {
        return Err(internal!(
            "{labeled} labeled graphs is not a multiple of (n-1)! = {fact}"
        ));
    }
    let result = EnumerationResult {
        n,
        r,
        labeled_admissible: labeled,
        subgroup_count: labeled / fact,
        canonical_classes: classes.len() as u64,
    };
    if result.subgroup_count != result.canonical_classes {
        return Err(internal!(
            "subgroup counts disagree: {} by division, {} by canonical forms",
            result.subgroup_count,
            result.canonical_classes
        ));
    }
    Ok(result)
}

/// Counts size-`n` subgroups of the free group of rank `r` by enumeration.
pub fn enumerate_admissible(n: usize, r: usize) -> Result<EnumerationResult> {
    summarize(n, r, &admissible_graphs(n, r)?)
}

/// Counts index-`n` subgroups of the free group of rank `r` by enumeration.
pub fn enumerate_finite_index(n: usize, r: usize) -> Result<EnumerationResult> {
    summarize(n, r, &finite_index_graphs(n, r)?)
}

/// Whether some relabeling fixing the base maps `g` onto `h`, by trying all
/// of them.
pub fn rooted_isomorphic(g: &AGraph, h: &AGraph) -> Result<bool> {
    if g.n() != h.n() || g.r() != h.r() {
        return Ok(false);
    }
    if g.edge_count() != h.edge_count() {
        return Ok(false);
    }
    let n = g.n();
    let target: HashSet<_> = h.edges().into_iter().collect();
    for perm in enumerate_permutations(n - 1)? {
        let map = |v: usize| {
            if v == 0 {
                0
            } else {
                perm.image()[v - 1] as usize + 1
            }
        };
        if g.edges()
            .into_iter()
            .all(|(u, a, v)| target.contains(&(map(u), a, map(v))))
        {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injection_counts() {
        let counts: Vec<usize> = (0..=6)
            .map(|n| enumerate_partial_injections(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 2, 7, 34, 209, 1546, 13327]);
        assert!(matches!(
            enumerate_partial_injections(7),
            Err(Error::Scale(_))
        ));
        let all = enumerate_partial_injections(4).unwrap();
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), all.len());
    }

    #[test]
    fn permutation_counts() {
        let counts: Vec<usize> = (0..=5)
            .map(|n| enumerate_permutations(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 24, 120]);
    }

    #[test]
    fn subgroup_counts() {
        let expect = [
            ((1, 1), (2, 2)),
            ((1, 2), (4, 4)),
            ((2, 2), (25, 25)),
            ((3, 2), (504, 252)),
        ];
        for ((n, r), (labeled, subgroups)) in expect {
            let res = enumerate_admissible(n, r).unwrap();
            assert_eq!(res.labeled_admissible, labeled, "n={n} r={r}");
            assert_eq!(res.subgroup_count, subgroups);
            assert_eq!(res.canonical_classes, subgroups);
        }
        assert!(matches!(enumerate_admissible(6, 2), Err(Error::Scale(_))));
    }

    #[test]
    fn finite_index_counts() {
        let two = enumerate_finite_index(2, 2).unwrap();
        assert_eq!((two.labeled_admissible, two.subgroup_count), (3, 3));
        let three = enumerate_finite_index(3, 2).unwrap();
        assert_eq!((three.labeled_admissible, three.subgroup_count), (26, 13));
    }

    #[test]
    fn isomorphism_search() {
        let g = AGraph::from_edges(3, 1, &[(0, 0, 1), (1, 0, 2), (2, 0, 0)]).unwrap();
        let h = AGraph::from_edges(3, 1, &[(0, 0, 2), (2, 0, 1), (1, 0, 0)]).unwrap();
        let k = AGraph::from_edges(3, 1, &[(0, 0, 2), (2, 0, 1)]).unwrap();
        assert!(rooted_isomorphic(&g, &h).unwrap());
        assert!(!rooted_isomorphic(&g, &k).unwrap());
    }
}
