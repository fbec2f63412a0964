//! A-graphs: one partial injection per letter on a common vertex set, rooted
//! at vertex 0.
//!
//! An admissible graph (connected, no leaf other than the base) is the
//! Stallings graph of a finitely generated subgroup of the free group on the
//! letters.

mod fold;
mod format;
mod word;

use std::collections::VecDeque;
use std::fmt;

use crate::error::{internal, usage, Error, Result};
use crate::injection::PartialInjection;

pub use fold::{basis, fold};
pub use format::GraphJson;
pub use word::{Letter, Word};

/// An edge `(source, letter, target)` with 0-based vertices and letters.
pub type Edge = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AGraph {
    n: usize,
    letters: Vec<PartialInjection>,
    inverses: Vec<PartialInjection>,
}

impl AGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Alphabet size.
    pub fn r(&self) -> usize {
        self.letters.len()
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn letter(&self, a: usize) -> &PartialInjection {
        &self.letters[a]
    }

    pub fn letters(&self) -> &[PartialInjection] {
        &self.letters
    }

    /// Endpoint of the edge leaving `u` along `a`, or along `a^-1` when `inverse`.
    pub fn step(&self, u: usize, a: usize, inverse: bool) -> Option<usize> {
        if inverse {
            self.inverses[a].get(u)
        } else {
            self.letters[a].get(u)
        }
    }

    /// Builds a graph from 0-based edges. Two edges with the same letter
    /// leaving or entering one vertex are a data error.
    pub fn from_edges(n: usize, r: usize, edges: &[Edge]) -> Result<AGraph> {
        let mut images = vec![vec![None; n]; r];
        for &(u, a, v) in edges {
            if u >= n || v >= n || a >= r {
                return Err(Error::Data(format!("edge ({u}, {a}, {v}) out of range")));
            }
            if images[a][u].replace(v as u32).is_some() {
                return Err(Error::Data(format!("two edges labeled {a} leave {u}")));
            }
        }
        let letters = images
            .into_iter()
            .map(PartialInjection::new)
            .collect::<Result<Vec<_>>>()?;
        assemble(letters, n)
    }

    /// Edges sorted by letter, then source.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, inj) in self.letters.iter().enumerate() {
            for u in 0..self.n {
                if let Some(v) = inj.get(u) {
                    out.push((u, a, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.letters.iter().map(PartialInjection::defined).sum()
    }

    /// The same graph with vertex `v` renamed `map[v]`. The base must stay put.
    pub fn relabel(&self, map: &[usize]) -> Result<AGraph> {
        let mut seen = vec![false; self.n];
        let bijective = map.len() == self.n
            && map
                .iter()
                .all(|&v| v < self.n && !std::mem::replace(&mut seen[v], true));
        if !bijective || map[self.base()] != self.base() {
            return Err(usage!("relabeling must be a bijection fixing the base"));
        }
        let edges: Vec<Edge> = self
            .edges()
            .into_iter()
            .map(|(u, a, v)| (map[u], a, map[v]))
            .collect();
        AGraph::from_edges(self.n, self.r(), &edges)
    }
}

impl fmt::Display for AGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Combines one partial injection per letter into a graph rooted at 0.
pub fn assemble(injections: Vec<PartialInjection>, n: usize) -> Result<AGraph> {
    if injections.is_empty() {
        return Err(usage!("an A-graph needs at least one letter"));
    }
    if n == 0 {
        return Err(usage!("an A-graph needs at least one vertex"));
    }
    if let Some(bad) = injections.iter().find(|inj| inj.n() != n) {
        return Err(usage!(
            "injection of size {} in a graph of size {n}",
            bad.n()
        ));
    }
    let inverses = injections.iter().map(PartialInjection::inverse).collect();
    Ok(AGraph {
        n,
        letters: injections,
        inverses,
    })
}

/// Every vertex reachable from the base along edges in either direction.
pub fn is_connected(g: &AGraph) -> bool {
    let mut seen = vec![false; g.n];
    let mut stack = vec![g.base()];
    seen[g.base()] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for maps in [&g.letters, &g.inverses] {
            for inj in maps.iter() {
                if let Some(v) = inj.get(u) {
                    if !seen[v] {
                        seen[v] = true;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
        }
    }
    count == g.n
}

/// Number of edge ends at each vertex; a loop counts twice.
fn occurrences(g: &AGraph) -> Vec<usize> {
    let mut occ = vec![0; g.n];
    for inj in &g.letters {
        for (u, v) in inj.image().iter().enumerate() {
            if let Some(v) = v {
                occ[u] += 1;
                occ[*v as usize] += 1;
            }
        }
    }
    occ
}

/// No vertex other than the base is a leaf (occurs at most once).
pub fn is_one_trim(g: &AGraph) -> bool {
    occurrences(g)
        .iter()
        .enumerate()
        .all(|(v, &c)| v == g.base() || c >= 2)
}

pub fn is_admissible(g: &AGraph) -> bool {
    is_connected(g) && is_one_trim(g)
}

/// Rank of the represented subgroup, `|E| - n + 1`.
pub fn rank_of(g: &AGraph) -> Result<usize> {
    if !is_admissible(g) {
        return Err(usage!("rank is defined for admissible graphs only"));
    }
    Ok(g.edge_count() + 1 - g.n)
}

/// Finite index: every letter is a permutation. Checked both directly and
/// through the rank, which must then be `(r-1) n + 1`.
pub fn is_finite_index(g: &AGraph) -> Result<bool> {
    let rank = rank_of(g)?;
    let total = g
        .letters
        .iter()
        .zip(&g.inverses)
        .all(|(a, inv)| a.is_total() && inv.is_total());
    let by_rank = rank == (g.r() - 1) * g.n + 1;
    if total != by_rank {
        return Err(internal!(
            "finite-index tests disagree: total = {total}, rank = {rank}"
        ));
    }
    Ok(total)
}

/// Rooted isomorphism invariant: two connected graphs over the same alphabet
/// have equal forms iff some base-preserving relabeling maps one to the other.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{b:02x}"))
    }
}

/// Vertices in breadth-first order from the base, visiting at each vertex
/// the letters forward, then the letters backward.
pub(crate) fn bfs_order(g: &AGraph) -> Vec<usize> {
    let mut seen = vec![false; g.n];
    let mut order = Vec::with_capacity(g.n);
    let mut queue = VecDeque::from([g.base()]);
    seen[g.base()] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for maps in [&g.letters, &g.inverses] {
            for inj in maps.iter() {
                if let Some(v) = inj.get(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    order
}

/// Encodes `(n, r, edge count, sorted renumbered edges)` as little-endian
/// `u32`s, with vertices renumbered in [`bfs_order`].
pub fn canonical_form(g: &AGraph) -> Result<CanonicalForm> {
    let order = bfs_order(g);
    if order.len() != g.n {
        return Err(usage!("canonical form needs a connected graph"));
    }
    let mut rename = vec![0u32; g.n];
    for (new, &old) in order.iter().enumerate() {
        rename[old] = new as u32;
    }
    let mut edges: Vec<(u32, u32, u32)> = g
        .edges()
        .into_iter()
        .map(|(u, a, v)| (rename[u], a as u32, rename[v]))
        .collect();
    edges.sort_unstable();

    let mut bytes = Vec::with_capacity(12 * (edges.len() + 1));
    for x in [g.n as u32, g.r() as u32, edges.len() as u32] {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    for (u, a, v) in edges {
        for x in [u, a, v] {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(CanonicalForm(bytes))
}

/// Whether the subgroup contains `word`: reading it from the base stays on
/// edges and ends at the base.
pub fn accepts_word(g: &AGraph, word: &Word) -> bool {
    let mut at = g.base();
    for letter in word.letters() {
        if letter.index >= g.r() {
            return false;
        }
        match g.step(at, letter.index, letter.inverse) {
            Some(v) => at = v,
            None => return false,
        }
    }
    at == g.base()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, r: usize, edges: &[Edge]) -> AGraph {
        AGraph::from_edges(n, r, edges).unwrap()
    }

    #[test]
    fn assemble_checks_sizes() {
        assert!(assemble(vec![], 1).is_err());
        assert!(assemble(vec![PartialInjection::empty(2)], 1).is_err());
        let g = assemble(vec![PartialInjection::identity(1)], 1).unwrap();
        assert_eq!(g.edges(), vec![(0, 0, 0)]);
        let trivial = assemble(vec![PartialInjection::empty(1); 2], 1).unwrap();
        assert_eq!(trivial.edge_count(), 0);
        assert!(AGraph::from_edges(2, 1, &[(0, 0, 1), (0, 0, 0)]).is_err());
        assert!(AGraph::from_edges(2, 1, &[(0, 0, 1), (1, 0, 1)]).is_err());
    }

    #[test]
    fn predicates_on_small_graphs() {
        let empty2 = graph(2, 2, &[]);
        assert!(!is_connected(&empty2));
        assert!(!is_admissible(&empty2));

        let single = graph(2, 2, &[(0, 0, 1)]);
        assert!(is_connected(&single));
        assert!(!is_one_trim(&single));

        let back = graph(2, 2, &[(0, 0, 1), (1, 1, 0)]);
        assert!(is_one_trim(&back));
        assert!(is_admissible(&back));

        let point = graph(1, 2, &[]);
        assert!(is_one_trim(&point) && is_admissible(&point));
        assert_eq!(rank_of(&point).unwrap(), 0);

        let two_cycle = graph(2, 2, &[(0, 0, 1), (1, 0, 0)]);
        assert!(is_admissible(&two_cycle));

        assert!(rank_of(&single).is_err());
        assert!(is_finite_index(&single).is_err());
    }

    #[test]
    fn rank_and_finite_index_on_one_vertex() {
        let both = graph(1, 2, &[(0, 0, 0), (0, 1, 0)]);
        assert_eq!(rank_of(&both).unwrap(), 2);
        assert!(is_finite_index(&both).unwrap());
        let one = graph(1, 2, &[(0, 0, 0)]);
        assert!(!is_finite_index(&one).unwrap());
    }

    #[test]
    fn accepts_words() {
        let g = fold(&[Word::parse("a1").unwrap()], 2).unwrap();
        assert!(accepts_word(&g, &Word::parse("").unwrap()));
        assert!(accepts_word(&g, &Word::parse("a1 a1").unwrap()));
        assert!(accepts_word(&g, &Word::parse("a1'").unwrap()));
        assert!(!accepts_word(&g, &Word::parse("a2").unwrap()));
        assert!(!accepts_word(&g, &Word::parse("a3").unwrap()));
    }

    #[test]
    fn canonical_form_of_the_point() {
        let point = graph(1, 2, &[]);
        let form = canonical_form(&point).unwrap();
        assert_eq!(form.as_bytes(), &[1, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0]);
        assert!(canonical_form(&graph(2, 2, &[])).is_err());
    }
}
