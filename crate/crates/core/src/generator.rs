//! Uniform random subgroups by rejection.
//!
//! A uniform admissible graph is obtained by drawing one uniform partial
//! injection per letter until the assembled graph is admissible. Forgetting
//! the labels of the non-base vertices makes it a uniform subgroup of the
//! given size. Finite-index subgroups use permutations instead and only need
//! to reject disconnected graphs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::InjectionTable;
use crate::error::{internal, usage, Result};
use crate::graph::{assemble, is_admissible, is_connected, is_finite_index, AGraph};
use crate::injection::{random_permutation, ComponentSizer};
use crate::random::RandomSource;

/// Attempts allowed per draw before giving up with an internal error.
pub const MAX_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationReport {
    pub graph: AGraph,
    /// Failed attempts before the accepted one.
    pub rejections: u64,
    /// Seed of the source the draw started from; for batches, the batch seed.
    pub seed: u64,
    /// Batch index, for draws made by [`sample_batch`].
    pub stream: Option<u64>,
    pub n: usize,
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// All subgroups of the given size.
    Admissible,
    /// Finite-index subgroups of the given index.
    FiniteIndex,
}

fn check_shape(n: usize, r: usize) -> Result<()> {
    if n == 0 {
        return Err(usage!("graph size must be at least 1"));
    }
    if r < 2 {
        return Err(usage!("rank must be at least 2, got {r}"));
    }
    Ok(())
}

fn retry(
    n: usize,
    r: usize,
    src: &mut RandomSource,
    mut attempt: impl FnMut(&mut RandomSource) -> Result<Option<AGraph>>,
) -> Result<GenerationReport> {
    let seed = src.seed();
    for rejections in 0..MAX_ATTEMPTS {
        if let Some(graph) = attempt(src)? {
            return Ok(GenerationReport {
                graph,
                rejections,
                seed,
                stream: None,
                n,
                r,
            });
        }
    }
    Err(internal!(
        "no acceptable graph in {MAX_ATTEMPTS} attempts (n = {n}, r = {r})"
    ))
}

/// Uniform admissible graph with `n` vertices over `r` letters.
pub fn random_admissible_graph(
    n: usize,
    r: usize,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<GenerationReport> {
    check_shape(n, r)?;
    if n > table.n_max() {
        return Err(usage!("n = {n} exceeds table size {}", table.n_max()));
    }
    let sizer = ComponentSizer::new(table);
    retry(n, r, src, |src| {
        let letters = (0..r)
            .map(|_| sizer.partial_injection(n, src))
            .collect::<Result<Vec<_>>>()?;
        let g = assemble(letters, n)?;
        Ok(is_admissible(&g).then_some(g))
    })
}

/// Uniform connected permutation graph: a uniform finite-index subgroup of
/// index `n`.
pub fn random_finite_index_graph(
    n: usize,
    r: usize,
    src: &mut RandomSource,
) -> Result<GenerationReport> {
    check_shape(n, r)?;
    let report = retry(n, r, src, |src| {
        let letters = (0..r)
            .map(|_| random_permutation(n, src).to_injection())
            .collect();
        let g = assemble(letters, n)?;
        Ok(is_connected(&g).then_some(g))
    })?;
    if !is_admissible(&report.graph) || !is_finite_index(&report.graph)? {
        return Err(internal!(
            "permutation graph is not a finite-index Stallings graph"
        ));
    }
    Ok(report)
}

/// Runs one draw of `family` on a given source.
pub fn draw(
    family: Family,
    n: usize,
    r: usize,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<GenerationReport> {
    match family {
        Family::Admissible => random_admissible_graph(n, r, table, src),
        Family::FiniteIndex => random_finite_index_graph(n, r, src),
    }
}

/// `count` independent draws; draw `i` uses `RandomSource::for_stream(seed, i)`,
/// so each result depends only on `(seed, i)`. Results are in index order.
pub fn sample_batch(
    family: Family,
    n: usize,
    r: usize,
    count: usize,
    table: &InjectionTable,
    seed: u64,
) -> Result<Vec<GenerationReport>> {
    if count == 0 {
        return Err(usage!("batch count must be at least 1"));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut src = RandomSource::for_stream(seed, i);
            let mut report = draw(family, n, r, table, &mut src)?;
            report.seed = seed;
            report.stream = Some(i);
            Ok(report)
        })
        .collect()
}
