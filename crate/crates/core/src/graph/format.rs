//! JSON and DOT serialization. Vertices are written 1-based with the base as
//! vertex 1; letters are written `a1..aR`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AGraph, Edge, Letter};
use crate::error::{Error, Result};

/// `{"n": 2, "r": 2, "base": 1, "edges": [[1, "a1", 2], [2, "a2", 1]]}`,
/// edges sorted by letter, then source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub r: usize,
    pub base: usize,
    pub edges: Vec<(usize, String, usize)>,
}

impl AGraph {
    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            r: self.r(),
            base: self.base() + 1,
            edges: self
                .edges()
                .into_iter()
                .map(|(u, a, v)| (u + 1, Letter::new(a, false).to_string(), v + 1))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<AGraph> {
        let parsed: GraphJson =
            serde_json::from_str(text).map_err(|e| Error::Data(format!("graph JSON: {e}")))?;
        AGraph::try_from(parsed)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n  node [shape=circle];\n");
        for v in 0..self.n() {
            let shape = if v == self.base() {
                " [shape=doublecircle]"
            } else {
                ""
            };
            writeln!(out, "  {}{shape};", v + 1).expect("writing to a string");
        }
        for (u, a, v) in self.edges() {
            writeln!(out, "  {} -> {} [label=\"a{}\"];", u + 1, v + 1, a + 1)
                .expect("writing to a string");
        }
        out.push_str("}\n");
        out
    }
}

impl TryFrom<GraphJson> for AGraph {
    type Error = Error;

    fn try_from(json: GraphJson) -> Result<AGraph> {
        if json.base != 1 {
            return Err(Error::Data(format!("base must be 1, got {}", json.base)));
        }
        let edges = json
            .edges
            .iter()
            .map(|(u, name, v)| {
                let letter: Letter = name.parse()?;
                if letter.inverse || *u == 0 || *v == 0 {
                    return Err(Error::Data(format!("bad edge [{u}, {name:?}, {v}]")));
                }
                Ok((u - 1, letter.index, v - 1))
            })
            .collect::<Result<Vec<Edge>>>()?;
        AGraph::from_edges(json.n, json.r, &edges)
    }
}
