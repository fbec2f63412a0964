use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::counting::{ln_big, InjectionTable};
use crate::error::{internal, usage, Result};
use crate::generator::random_admissible_graph;
use crate::graph::{assemble, is_connected, rank_of};
use crate::injection::{count_sequences, random_permutation, ComponentSizer};
use crate::random::RandomSource;

/// Upper tail probability of Pearson's statistic for `observed` counts
/// against `expected` probabilities (which must sum to 1).
pub fn chi_square_p_value(observed: &[u64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(usage!(
            "observed and expected must be non-empty and of equal length"
        ));
    }
    if observed.len() == 1 {
        return Ok(1.0);
    }
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64)
        .map_err(|e| internal!("chi-square distribution: {e}"))?;
    Ok(dist.sf(stat))
}

/// Draws `trials` samples, maps them to classes and tests the histogram
/// against the uniform distribution on `classes`. A sample outside `classes`
/// is an internal error.
pub fn uniformity_test<K, F>(
    mut sampler: F,
    classes: &[K],
    trials: u64,
    src: &mut RandomSource,
) -> Result<f64>
where
    K: Eq + Hash + Debug,
    F: FnMut(&mut RandomSource) -> Result<K>,
{
    if classes.is_empty() {
        return Err(usage!("uniformity test needs at least one class"));
    }
    if trials < 50 * classes.len() as u64 {
        return Err(usage!(
            "{trials} trials is fewer than 50 per class for {} classes",
            classes.len()
        ));
    }
    let index: HashMap<&K, usize> = classes.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut counts = vec![0u64; classes.len()];
    for _ in 0..trials {
        let key = sampler(src)?;
        let i = index
            .get(&key)
            .ok_or_else(|| internal!("sample {key:?} is not among the classes"))?;
        counts[*i] += 1;
    }
    let p = 1.0 / classes.len() as f64;
    chi_square_p_value(&counts, &vec![p; classes.len()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "rank")]
    Rank,
    #[serde(rename = "connectivity")]
    Connectivity,
    #[serde(rename = "sequences")]
    Sequences,
    #[serde(rename = "fi-accept")]
    FiniteIndexAccept,
}

impl std::str::FromStr for Metric {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Metric> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| usage!("unknown metric {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub n: usize,
    pub r: usize,
    pub trials: u64,
    pub mean: f64,
    /// Sample standard deviation (zero for a single trial).
    pub stddev: f64,
    pub metric: Metric,
}

/// Evaluates `f` on `trials` independent sources split from one word of `src`.
fn sample<F>(trials: u64, src: &mut RandomSource, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut RandomSource) -> Result<f64> + Sync,
{
    if trials == 0 {
        return Err(usage!("trials must be at least 1"));
    }
    let seed = src.next_u64();
    (0..trials)
        .into_par_iter()
        .map(|i| f(&mut RandomSource::for_stream(seed, i)))
        .collect()
}

fn report(n: usize, r: usize, metric: Metric, values: &[f64]) -> StatReport {
    let trials = values.len();
    let mean = values.iter().sum::<f64>() / trials as f64;
    let stddev = if trials > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    StatReport {
        n,
        r,
        trials: trials as u64,
        mean,
        stddev,
        metric,
    }
}

fn check_graph_shape(n: usize, r: usize, table: Option<&InjectionTable>) -> Result<()> {
    if n == 0 || r == 0 {
        return Err(usage!("statistics need n >= 1 and r >= 1"));
    }
    match table {
        Some(t) if n > t.n_max() => Err(usage!("n = {n} exceeds table size {}", t.n_max())),
        _ => Ok(()),
    }
}

/// Fraction of `r`-tuples of uniform partial injections whose graph is
/// connected.
pub fn connectivity_stat(
    n: usize,
    r: usize,
    trials: u64,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<StatReport> {
    check_graph_shape(n, r, Some(table))?;
    let values = sample(trials, src, |s| {
        let sizer = ComponentSizer::new(table);
        let letters = (0..r)
            .map(|_| sizer.partial_injection(n, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(f64::from(u8::from(is_connected(&assemble(letters, n)?))))
    })?;
    Ok(report(n, r, Metric::Connectivity, &values))
}

/// Rank of uniform random size-`n` subgroups.
pub fn rank_stat(
    n: usize,
    r: usize,
    trials: u64,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<StatReport> {
    check_graph_shape(n, r, Some(table))?;
    let values = sample(trials, src, |s| {
        let rep = random_admissible_graph(n, r, table, s)?;
        Ok(rank_of(&rep.graph)? as f64)
    })?;
    Ok(report(n, r, Metric::Rank, &values))
}

/// Number of sequence components of uniform partial injections. The report
/// has `r = 1`: one injection per trial.
pub fn sequences_stat(
    n: usize,
    trials: u64,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<StatReport> {
    check_graph_shape(n, 1, Some(table))?;
    let values = sample(trials, src, |s| {
        let inj = ComponentSizer::new(table).partial_injection(n, s)?;
        Ok(count_sequences(&inj) as f64)
    })?;
    Ok(report(n, 1, Metric::Sequences, &values))
}

/// Fraction of `r`-tuples of uniform permutations whose graph is connected,
/// i.e. the acceptance rate of the finite-index sampler.
pub fn fi_accept_stat(
    n: usize,
    r: usize,
    trials: u64,
    src: &mut RandomSource,
) -> Result<StatReport> {
    check_graph_shape(n, r, None)?;
    let values = sample(trials, src, |s| {
        let letters = (0..r)
            .map(|_| random_permutation(n, s).to_injection())
            .collect();
        Ok(f64::from(u8::from(is_connected(&assemble(letters, n)?))))
    })?;
    Ok(report(n, r, Metric::FiniteIndexAccept, &values))
}

/// Dispatches on `metric`.
pub fn stat(
    metric: Metric,
    n: usize,
    r: usize,
    trials: u64,
    table: &InjectionTable,
    src: &mut RandomSource,
) -> Result<StatReport> {
    match metric {
        Metric::Rank => rank_stat(n, r, trials, table, src),
        Metric::Connectivity => connectivity_stat(n, r, trials, table, src),
        Metric::Sequences => sequences_stat(n, trials, table, src),
        Metric::FiniteIndexAccept => fi_accept_stat(n, r, trials, src),
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `r ln(n! / I_n)`.
pub fn finite_index_fraction_log(n: usize, r: usize, table: &InjectionTable) -> Result<f64> {
    let value = table.get(n)?;
    Ok(r as f64 * (ln_factorial(n) - ln_big(value.as_ref())))
}

/// `(n! / I_n)^r`, an upper bound on the probability that a uniform size-`n`
/// subgroup has finite index. Computed from logarithms.
pub fn finite_index_fraction_bound(n: usize, r: usize, table: &InjectionTable) -> Result<f64> {
    Ok(finite_index_fraction_log(n, r, table)?.exp())
}

/// Relative error of `I_n / n! ~ e^{-1/2} / (2 sqrt pi) n^{-1/4} e^{2 sqrt n}`.
pub fn asymptotic_crosscheck(n: usize, table: &InjectionTable) -> Result<f64> {
    if n == 0 {
        return Err(usage!("asymptotic cross-check needs n >= 1"));
    }
    let exact = ln_big(table.get(n)?.as_ref()) - ln_factorial(n);
    let nf = n as f64;
    let formula =
        -0.5 - (2.0 * std::f64::consts::PI.sqrt()).ln() - 0.25 * nf.ln() + 2.0 * nf.sqrt();
    Ok((formula - exact).exp_m1().abs())
}
