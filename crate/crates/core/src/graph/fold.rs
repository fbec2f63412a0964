use std::collections::{BTreeSet, HashMap};

use super::{bfs_order, is_admissible, AGraph, Edge, Letter, Word};
use crate::error::{usage, Result};

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Stallings graph of the subgroup generated by `words` over `r` letters.
///
/// Builds one loop per word at the base, identifies the endpoints of equally
/// labeled edges sharing a source or a target until none remain, then
/// removes leaves other than the base. Quadratic; meant for small inputs.
pub fn fold(words: &[Word], r: usize) -> Result<AGraph> {
    if r == 0 {
        return Err(usage!("alphabet must have at least one letter"));
    }
    let mut edges: Vec<Edge> = Vec::new();
    let mut vertices = 1;
    for w in words {
        if !w.is_reduced() {
            return Err(usage!("word {w} is not freely reduced"));
        }
        if w.alphabet_size() > r {
            return Err(usage!("word {w} uses letters beyond a{r}"));
        }
        // the empty word generates nothing and adds no loop
        let mut at = 0;
        for (i, l) in w.letters().iter().enumerate() {
            let next = if i + 1 == w.len() {
                0
            } else {
                vertices += 1;
                vertices - 1
            };
            edges.push(if l.inverse {
                (next, l.index, at)
            } else {
                (at, l.index, next)
            });
            at = next;
        }
    }

    let mut parent: Vec<usize> = (0..vertices).collect();
    loop {
        let mut merged = false;
        let mut out: HashMap<(usize, usize), usize> = HashMap::new();
        let mut inc: HashMap<(usize, usize), usize> = HashMap::new();
        for &(u, a, v) in &edges {
            let (u, v) = (find(&mut parent, u), find(&mut parent, v));
            for (map, key, end) in [(&mut out, (u, a), v), (&mut inc, (v, a), u)] {
                let other = *map.entry(key).or_insert(end);
                let (x, y) = (find(&mut parent, other), find(&mut parent, end));
                if x != y {
                    // keep the base as its own root
                    let (keep, drop) = if y == 0 { (y, x) } else { (x, y) };
                    parent[drop] = keep;
                    merged = true;
                }
            }
        }
        if !merged {
            break;
        }
    }

    let mut folded: BTreeSet<Edge> = edges
        .iter()
        .map(|&(u, a, v)| (find(&mut parent, u), a, find(&mut parent, v)))
        .collect();

    loop {
        let mut occ: HashMap<usize, usize> = HashMap::new();
        for &(u, _, v) in &folded {
            *occ.entry(u).or_default() += 1;
            *occ.entry(v).or_default() += 1;
        }
        let leaves: BTreeSet<usize> = occ
            .into_iter()
            .filter(|&(v, c)| v != 0 && c <= 1)
            .map(|(v, _)| v)
            .collect();
        if leaves.is_empty() {
            break;
        }
        folded.retain(|(u, _, v)| !leaves.contains(u) && !leaves.contains(v));
    }

    let mut ids: HashMap<usize, usize> = HashMap::from([(0, 0)]);
    for &(u, _, v) in &folded {
        for x in [u, v] {
            let next = ids.len();
            ids.entry(x).or_insert(next);
        }
    }
    let renamed: Vec<Edge> = folded
        .iter()
        .map(|&(u, a, v)| (ids[&u], a, ids[&v]))
        .collect();
    AGraph::from_edges(ids.len(), r, &renamed)
}

/// A free basis of the subgroup represented by an admissible graph: one
/// word per edge outside a breadth-first spanning tree.
pub fn basis(g: &AGraph) -> Result<Vec<Word>> {
    if !is_admissible(g) {
        return Err(usage!("basis is read off admissible graphs only"));
    }
    let mut access: Vec<Option<Word>> = vec![None; g.n()];
    access[g.base()] = Some(Word::default());
    let mut tree: BTreeSet<Edge> = BTreeSet::new();
    for u in bfs_order(g) {
        let to_u = access[u].clone().expect("visited in breadth-first order");
        for inverse in [false, true] {
            for a in 0..g.r() {
                let Some(v) = g.step(u, a, inverse) else {
                    continue;
                };
                if access[v].is_none() {
                    access[v] = Some(to_u.concat(&Word::new(vec![Letter::new(a, inverse)])));
                    tree.insert(if inverse { (v, a, u) } else { (u, a, v) });
                }
            }
        }
    }
    let word_to = |v: usize| access[v].clone().expect("graph is connected");
    Ok(g.edges()
        .into_iter()
        .filter(|e| !tree.contains(e))
        .map(|(u, a, v)| {
            word_to(u)
                .concat(&Word::new(vec![Letter::new(a, false)]))
                .concat(&word_to(v).inverse())
                .reduced()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{accepts_word, canonical_form, rank_of};

    fn words(list: &[&str]) -> Vec<Word> {
        list.iter().map(|s| Word::parse(s).unwrap()).collect()
    }

    #[test]
    fn single_generators() {
        let g = fold(&words(&["a1"]), 2).unwrap();
        assert_eq!((g.n(), g.edges()), (1, vec![(0, 0, 0)]));
        let whole = fold(&words(&["a1", "a2"]), 2).unwrap();
        assert_eq!((whole.n(), whole.edges()), (1, vec![(0, 0, 0), (0, 1, 0)]));
        assert_eq!(fold(&[], 2).unwrap().n(), 1);
    }

    #[test]
    fn rejects_bad_words() {
        assert!(fold(&words(&["a1 a1'"]), 2).is_err());
        assert_eq!(fold(&[Word::default()], 2).unwrap().n(), 1);
        assert!(fold(&words(&["a3"]), 2).is_err());
        assert!(fold(&words(&["a1"]), 0).is_err());
    }

    #[test]
    fn conjugate_folds_to_a_stem() {
        let g = fold(&words(&["a1 a2 a1'"]), 2).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(rank_of(&g).unwrap(), 1);
        assert!(accepts_word(&g, &Word::parse("a1 a2 a2 a1'").unwrap()));
        assert!(!accepts_word(&g, &Word::parse("a2").unwrap()));
    }

    #[test]
    fn redundant_generators_collapse() {
        let g = fold(&words(&["a1 a1", "a1 a1 a1"]), 1).unwrap();
        assert_eq!(g.edges(), vec![(0, 0, 0)]);
    }

    #[test]
    fn basis_refolds_to_the_same_graph() {
        let g = fold(&words(&["a1 a2 a1' a2'", "a2 a2 a2", "a1 a2 a2 a1 a2"]), 2).unwrap();
        let b = basis(&g).unwrap();
        assert_eq!(b.len(), rank_of(&g).unwrap());
        let again = fold(&b, 2).unwrap();
        assert_eq!(canonical_form(&again).unwrap(), canonical_form(&g).unwrap());
    }
}
