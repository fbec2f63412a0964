//! Uniform random generation of finitely generated subgroups of free groups.
//!
//! A subgroup is represented by its Stallings graph, an [`graph::AGraph`]
//! whose letters act as partial injections on the vertices. A uniform
//! subgroup of size `n` is drawn by sampling one uniform partial injection
//! per letter ([`injection`]) and rejecting graphs that are not admissible
//! ([`generator`]). The exact counts that drive the injection sampler live in
//! [`counting`]; [`oracle`] enumerates small cases and validates the
//! samplers statistically.
//!
//! ```
//! use stallings::{counting::InjectionTable, generator, graph, random::RandomSource};
//!
//! let table = InjectionTable::build(50);
//! let mut src = RandomSource::new(7);
//! let report = generator::random_admissible_graph(50, 2, &table, &mut src).unwrap();
//! assert!(graph::is_admissible(&report.graph));
//! ```

pub mod cli;
pub mod counting;
pub mod error;
pub mod generator;
pub mod graph;
pub mod injection;
pub mod oracle;
pub mod random;

pub use error::{Error, Result};
