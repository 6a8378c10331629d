//! JSON graph files: `{"n": 3, "edges": [[0,1],[1,2],[0,2]], "q": [0.1,0.2,0.3]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        GraphFile {
            n: g.n_vertices(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            q: Some(g.potential().to_vec()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph file serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// True when the file had no `q` and the zero potential was used.
    pub potential_defaulted: bool,
}

/// Parses graph JSON; `origin` names the source in error messages.
pub fn parse_graph_str(text: &str, origin: &str) -> Result<LoadedGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!(
            "{origin}:{}:{}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let potential_defaulted = file.q.is_none();
    let q = file.q.unwrap_or_else(|| vec![0.0; file.n]);
    let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
    let graph = Graph::new(file.n, &edges, q).map_err(|e| Error::Located {
        location: origin.to_string(),
        error: Box::new(e),
    })?;
    Ok(LoadedGraph {
        graph,
        potential_defaulted,
    })
}

pub fn parse_graph_file(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_graph_str(&text, &path.display().to_string())
}

/// Canonical JSON of a graph.
pub fn graph_to_json(g: &Graph) -> String {
    GraphFile::from_graph(g).to_json()
}

/// 64-bit FNV-1a of the canonical graph JSON, as hex.
pub fn graph_hash(g: &Graph) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in graph_to_json(g).bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
