//! Exact perfect-`H`-packing search.
//!
//! Copies of the pattern are enumerated up front (one per host vertex set),
//! then an exact-cover search over copies decides whether a perfect packing
//! exists. Branching always picks the uncovered vertex lying in the fewest
//! remaining copies.

mod copies;
mod search;
mod verify;

use serde::Serialize;

use crate::graph::Graph;
use crate::vertex_set::VertexSet;

pub use copies::{canonical_embedding, enumerate_copies, is_kr_minus_pattern};
pub use search::{
    find_perfect_packing, find_perfect_packing_with, max_packing_size, max_packing_size_with,
    MaxPackingReport, SearchReport, SolverConfig,
};
pub use verify::{check_packing, verify_packing, PackingDefect};

/// One embedded occurrence of the pattern: `embedding[i]` is the host image
/// of pattern vertex `i`, and `vertices` is the image set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Copy {
    pub vertices: VertexSet,
    pub embedding: Vec<usize>,
}

impl Copy {
    pub fn new(host_n: usize, embedding: Vec<usize>) -> Self {
        let mut vertices = VertexSet::empty(host_n);
        for &v in &embedding {
            vertices.insert(v);
        }
        Copy { vertices, embedding }
    }

    pub fn vertex_list(&self) -> Vec<usize> {
        self.vertices.to_vec()
    }
}

impl Serialize for Copy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.vertices.serialize(s)
    }
}

/// A collection of copies in a host on `host_n` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Packing {
    pub copies: Vec<Copy>,
    #[serde(skip)]
    pub host_n: usize,
}

impl Packing {
    pub fn new(host_n: usize, copies: Vec<Copy>) -> Self {
        Packing { copies, host_n }
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn covered(&self) -> VertexSet {
        let mut s = VertexSet::empty(self.host_n);
        for c in &self.copies {
            s.union_with(&c.vertices);
        }
        s
    }

    pub fn vertex_lists(&self) -> Vec<Vec<usize>> {
        self.copies.iter().map(Copy::vertex_list).collect()
    }

    /// Re-expresses copies of a subgraph in parent coordinates:
    /// subgraph vertex `i` becomes `map[i]`.
    pub fn lift(&self, map: &[usize], parent_n: usize) -> Packing {
        let copies = self
            .copies
            .iter()
            .map(|c| Copy::new(parent_n, c.embedding.iter().map(|&v| map[v]).collect()))
            .collect();
        Packing::new(parent_n, copies)
    }
}

/// The vertices as a copy of `K_r^-` (pattern of
/// [`k_r_minus`](crate::constructions::k_r_minus)): the non-adjacent pair,
/// if any, takes pattern vertices 0 and 1. `None` if more than one pair of
/// `vertices` is non-adjacent in `g`.
pub fn kr_minus_copy(g: &Graph, vertices: &[usize]) -> Option<Copy> {
    let mut vs = vertices.to_vec();
    vs.sort_unstable();
    let mut pairs = vs
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| vs[i + 1..].iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| !g.has_edge(a, b));
    let first = pairs.next();
    if pairs.next().is_some() {
        return None;
    }
    let embedding = match first {
        Some((a, b)) => {
            let mut e = vec![a, b];
            e.extend(vs.iter().copied().filter(|&v| v != a && v != b));
            e
        }
        None => vs,
    };
    Some(Copy::new(g.n(), embedding))
}
